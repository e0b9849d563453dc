use alloc::vec;
use alloc::vec::Vec;

use crate::numkit::{dot, sqrt, DenseMatrix, SeededRng};

/// Uniform in `±sqrt(6 / fan_in)`, suited to ReLU layers.
pub(crate) fn he_uniform(rows: usize, cols: usize, rng: &mut SeededRng) -> DenseMatrix {
    let limit = sqrt(6.0 / cols as f64);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform(-limit, limit))
}

/// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
pub(crate) fn glorot_uniform(rows: usize, cols: usize, rng: &mut SeededRng) -> DenseMatrix {
    let limit = sqrt(6.0 / (rows + cols) as f64);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform(-limit, limit))
}

/// Zeroes each entry with probability `rate` and scales survivors by
/// `1 / (1 - rate)`, so the expected output equals the input. Returns the mask
/// that was applied.
pub fn apply_dropout(values: &mut [f64], rate: f64, rng: &mut SeededRng) -> Vec<f64> {
    let keep = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = values
        .iter()
        .map(|_| if rng.next_f64() < rate { 0.0 } else { keep })
        .collect();
    values.iter_mut().zip(&mask).for_each(|(v, m)| *v *= m);
    mask
}

/// Dropout in training mode only; `None` means the identity was applied.
pub(crate) fn maybe_dropout(
    values: &mut [f64],
    rate: f64,
    rng: Option<&mut SeededRng>,
) -> Option<Vec<f64>> {
    match rng {
        Some(r) if rate > 0.0 => Some(apply_dropout(values, rate, r)),
        _ => None,
    }
}

/// Positions of non-zero entries when they are sparse enough to be worth listing.
fn sparse_support(x: &[f64]) -> Option<Vec<usize>> {
    let nz: Vec<usize> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect();
    (nz.len() * 4 < x.len()).then_some(nz)
}

/// `W x + b` with `W` stored outputs × inputs and `b` as a 1 × outputs row.
pub(crate) fn affine(w: &DenseMatrix, b: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    let bias = b.as_slice();
    match sparse_support(x) {
        Some(nz) => (0..w.rows())
            .map(|o| {
                let row = w.row(o);
                bias[o] + nz.iter().map(|&j| row[j] * x[j]).sum::<f64>()
            })
            .collect(),
        None => (0..w.rows()).map(|o| bias[o] + dot(w.row(o), x)).collect(),
    }
}

/// Adds `dz xᵀ` to `gw` and `dz` to `gb`; returns `Wᵀ dz` when `want_input_grad`.
pub(crate) fn affine_backward(
    w: &DenseMatrix,
    x: &[f64],
    dz: &[f64],
    gw: &mut DenseMatrix,
    gb: &mut DenseMatrix,
    want_input_grad: bool,
) -> Option<Vec<f64>> {
    gb.as_mut_slice()
        .iter_mut()
        .zip(dz)
        .for_each(|(g, d)| *g += d);
    let nz = sparse_support(x);
    for (o, &d) in dz.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let row = gw.row_mut(o);
        match &nz {
            Some(nz) => nz.iter().for_each(|&j| row[j] += d * x[j]),
            None => row.iter_mut().zip(x).for_each(|(g, xi)| *g += d * xi),
        }
    }
    want_input_grad.then(|| {
        let mut dx = vec![0.0; x.len()];
        for (o, &d) in dz.iter().enumerate() {
            if d != 0.0 {
                dx.iter_mut().zip(w.row(o)).for_each(|(g, wi)| *g += d * wi);
            }
        }
        dx
    })
}

/// Column tile for the batched kernels: 64 rows of this width stay in cache
/// while every example in the batch passes over them.
const TILE: usize = 256;

/// [`affine`] for several inputs at once, reading `W` once per column tile.
pub(crate) fn affine_batch(w: &DenseMatrix, b: &DenseMatrix, xs: &[&[f64]]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = xs.iter().map(|_| b.as_slice().to_vec()).collect();
    let cols = w.cols();
    let mut start = 0;
    while start < cols {
        let end = (start + TILE).min(cols);
        for o in 0..w.rows() {
            let row = &w.row(o)[start..end];
            for (x, y) in xs.iter().zip(out.iter_mut()) {
                y[o] += dot(row, &x[start..end]);
            }
        }
        start = end;
    }
    out
}

/// [`affine_backward`] for several examples; always returns the input gradients.
pub(crate) fn affine_backward_batch(
    w: &DenseMatrix,
    xs: &[&[f64]],
    dzs: &[Vec<f64>],
    gw: &mut DenseMatrix,
    gb: &mut DenseMatrix,
) -> Vec<Vec<f64>> {
    for dz in dzs {
        gb.as_mut_slice()
            .iter_mut()
            .zip(dz)
            .for_each(|(g, d)| *g += d);
    }
    let cols = w.cols();
    let mut dx: Vec<Vec<f64>> = xs.iter().map(|_| vec![0.0; cols]).collect();
    let mut start = 0;
    while start < cols {
        let end = (start + TILE).min(cols);
        for o in 0..w.rows() {
            let wrow = &w.row(o)[start..end];
            for ((x, dz), dxs) in xs.iter().zip(dzs).zip(dx.iter_mut()) {
                let d = dz[o];
                if d == 0.0 {
                    continue;
                }
                let grow = &mut gw.row_mut(o)[start..end];
                grow.iter_mut()
                    .zip(&x[start..end])
                    .for_each(|(g, xi)| *g += d * xi);
                dxs[start..end]
                    .iter_mut()
                    .zip(wrow)
                    .for_each(|(g, wi)| *g += d * wi);
            }
        }
        start = end;
    }
    dx
}

pub(crate) fn relu_in_place(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

/// Gradient of softmax cross-entropy with respect to the logits, and the loss.
pub(crate) fn softmax_xent_grad(z: &[f64], y: usize) -> (Vec<f64>, f64) {
    let lse = crate::numkit::log_sum_exp(z);
    let mut p = crate::numkit::softmax(z);
    p[y] -= 1.0;
    (p, lse - z[y])
}
