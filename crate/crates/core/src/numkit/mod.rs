//! Small deterministic numeric toolkit shared by every model.

mod matrix;
mod rng;
mod vexp;

use alloc::vec::Vec;

pub use matrix::{axpy, dot, DenseMatrix};
pub use rng::{SeededRng, ALGORITHM as RNG_ALGORITHM};
pub use vexp::{exp_in_place, sigmoid_in_place, tanh_in_place};

use crate::error::{Error, Result};

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// `tanh` through one `expm1`, which is cheaper than libm's `tanh` and keeps
/// full precision near zero.
pub fn tanh(x: f64) -> f64 {
    let m = libm::expm1(-2.0 * x.abs());
    let t = -m / (2.0 + m);
    if x < 0.0 {
        -t
    } else {
        t
    }
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

pub fn sigmoid(x: f64) -> f64 {
    // Branch keeps exp's argument non-positive so neither side overflows.
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Max-shifted softmax. Empty input gives an empty output.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|x| exp(x - max)).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= sum);
    out
}

/// `log(sum(exp(v)))` computed with the max shift.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + ln(v.iter().map(|x| exp(x - max)).sum::<f64>())
}

/// Index of the maximum; ties go to the smallest index. Empty input returns 0.
pub fn argmax_tiebreak(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Central-difference gradient `(f(x + eps e_i) - f(x - eps e_i)) / 2 eps`.
pub fn finite_difference_gradient(
    mut f: impl FnMut(&[f64]) -> f64,
    x: &[f64],
    eps: f64,
) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let plus = f(&probe);
        probe[i] = orig - eps;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Oracle(i));
        }
        grad.push((plus - minus) / (2.0 * eps));
    }
    Ok(grad)
}

/// `|a - b| / max(|a|, |b|, floor)`; the floor keeps near-zero pairs from blowing up.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Errors unless `v` has `expected` finite entries.
pub fn check_len(context: &'static str, expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Shape {
            context,
            expected,
            found: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!(
            "{context} has a non-finite entry"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn tanh_agrees_with_libm() {
        let mut rng = SeededRng::new(4);
        for _ in 0..100_000 {
            let x = rng.uniform(-25.0, 25.0) * rng.next_f64().powi(3);
            let (a, b) = (tanh(x), libm::tanh(x));
            assert!(
                (a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(f64::MIN_POSITIVE),
                "{x}: {a} vs {b}"
            );
        }
        assert_eq!(tanh(0.0), 0.0);
        assert_eq!(tanh(40.0), 1.0);
        assert_eq!(tanh(-40.0), -1.0);
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        let big = softmax(&[1000.0, 0.0]);
        assert!(big.iter().all(|p| p.is_finite()));
        assert!((big[0] - 1.0).abs() < 1e-12 && big[1] < 1e-300);
    }

    #[test]
    fn activations() {
        assert_eq!(relu(-1.0), 0.0);
        assert_eq!(relu(2.0), 2.0);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_tiebreak(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax_tiebreak(&[5.0]), 0);
        assert_eq!(argmax_tiebreak(&[0.0, 0.0, 0.0]), 0);
    }

    #[test]
    fn finite_differences() {
        let g = finite_difference_gradient(|x| x[0] * x[0], &[3.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() < 1e-6);
        let g = finite_difference_gradient(|_| 4.0, &[1.0, 2.0], 1e-5).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
        let a = [0.5, -2.0, 3.0];
        let g = finite_difference_gradient(|x| dot(&a, x), &[1.0, 1.0, 1.0], 1e-5).unwrap();
        for (gi, ai) in g.iter().zip(a) {
            assert!((gi - ai).abs() < 1e-9);
        }
        assert_eq!(
            finite_difference_gradient(|x| 1.0 / x[0], &[1e-5], 1e-5),
            Err(Error::Oracle(0))
        );
        assert!(finite_difference_gradient(|x| x[0], &[0.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn softmax_sums_to_one_and_is_shift_invariant(
            v in proptest::collection::vec(-50.0f64..50.0, 1..12),
            c in -100.0f64..100.0,
        ) {
            let p = softmax(&v);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|x| *x > 0.0));
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            for (a, b) in p.iter().zip(softmax(&shifted)) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
