//! One entry point for training and predicting with any of the eight classifiers.

use alloc::format;
use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classical::{
    DecisionTreeModel, KnnModel, KnnParams, LinearSvmModel, LogisticRegressionModel, LrParams,
    MultinomialNbModel, NbParams, SvmParams, TreeParams,
};
use crate::dataset::{Dataset, Prediction};
use crate::error::{Error, Result};
use crate::neural::{
    train_network, CnnConfig, CnnModel, LearningCurve, LstmConfig, LstmModel, MlpConfig, MlpModel,
    Network, TrainingConfig,
};
use crate::numkit::SeededRng;
use crate::textprep::CountVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Dt,
    Svm,
    Lr,
    Knn,
    Nb,
    Cnn,
    Mlp,
    Lstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::Dt,
        ModelKind::Svm,
        ModelKind::Lr,
        ModelKind::Knn,
        ModelKind::Nb,
        ModelKind::Cnn,
        ModelKind::Mlp,
        ModelKind::Lstm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dt => "DT",
            ModelKind::Svm => "SVM",
            ModelKind::Lr => "LR",
            ModelKind::Knn => "KNN",
            ModelKind::Nb => "NB",
            ModelKind::Cnn => "CNN",
            ModelKind::Mlp => "MLP",
            ModelKind::Lstm => "LSTM",
        }
    }

    /// Lower-case form used in file names.
    pub fn slug(self) -> String {
        self.name().to_ascii_lowercase()
    }

    pub fn is_neural(self) -> bool {
        matches!(self, ModelKind::Cnn | ModelKind::Mlp | ModelKind::Lstm)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase();
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown model `{s}`; expected one of DT, SVM, LR, KNN, NB, CNN, MLP, LSTM"
                ))
            })
    }
}

/// Hyperparameters for every model kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub dt: TreeParams,
    pub svm: SvmParams,
    pub lr: LrParams,
    pub knn: KnnParams,
    pub nb: NbParams,
    pub mlp: MlpConfig,
    pub cnn: CnnConfig,
    pub lstm: LstmConfig,
    pub training: TrainingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model")]
pub enum TrainedModel {
    #[serde(rename = "DT")]
    Dt(DecisionTreeModel),
    #[serde(rename = "SVM")]
    Svm(LinearSvmModel),
    #[serde(rename = "LR")]
    Lr(LogisticRegressionModel),
    #[serde(rename = "KNN")]
    Knn(KnnModel),
    #[serde(rename = "NB")]
    Nb(MultinomialNbModel),
    #[serde(rename = "CNN")]
    Cnn(CnnModel),
    #[serde(rename = "MLP")]
    Mlp(MlpModel),
    #[serde(rename = "LSTM")]
    Lstm(LstmModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Dt(_) => ModelKind::Dt,
            TrainedModel::Svm(_) => ModelKind::Svm,
            TrainedModel::Lr(_) => ModelKind::Lr,
            TrainedModel::Knn(_) => ModelKind::Knn,
            TrainedModel::Nb(_) => ModelKind::Nb,
            TrainedModel::Cnn(_) => ModelKind::Cnn,
            TrainedModel::Mlp(_) => ModelKind::Mlp,
            TrainedModel::Lstm(_) => ModelKind::Lstm,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            TrainedModel::Dt(m) => m.dimension(),
            TrainedModel::Svm(m) => m.dimension(),
            TrainedModel::Lr(m) => m.dimension(),
            TrainedModel::Knn(m) => m.dimension(),
            TrainedModel::Nb(m) => m.dimension(),
            TrainedModel::Cnn(m) => m.input_dim(),
            TrainedModel::Mlp(m) => m.input_dim(),
            TrainedModel::Lstm(m) => m.input_dim(),
        }
    }

    pub fn classes(&self) -> usize {
        match self {
            TrainedModel::Dt(m) => m.classes(),
            TrainedModel::Svm(m) => m.classes(),
            TrainedModel::Lr(m) => m.classes(),
            TrainedModel::Knn(m) => m.classes(),
            TrainedModel::Nb(m) => m.classes(),
            TrainedModel::Cnn(m) => m.classes(),
            TrainedModel::Mlp(m) => m.classes(),
            TrainedModel::Lstm(m) => m.classes(),
        }
    }

    /// Internal consistency of parameters that did not come from training, such
    /// as a deserialized artifact. Call before any other method on such a model.
    pub fn validate(&self) -> Result<()> {
        match self {
            TrainedModel::Dt(m) => m.validate(),
            TrainedModel::Svm(m) => m.validate(),
            TrainedModel::Lr(m) => m.validate(),
            TrainedModel::Knn(m) => m.validate(),
            TrainedModel::Nb(m) => m.validate(),
            TrainedModel::Cnn(m) => m.validate(),
            TrainedModel::Mlp(m) => m.validate(),
            TrainedModel::Lstm(m) => m.validate(),
        }
    }

    /// Errors with a shape error when `x` does not match the training dimension.
    pub fn predict(&self, x: &CountVector) -> Result<Prediction> {
        match self {
            TrainedModel::Dt(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
            TrainedModel::Lr(m) => m.predict(x),
            TrainedModel::Knn(m) => m.predict(x),
            TrainedModel::Nb(m) => m.predict(x),
            TrainedModel::Cnn(m) => m.predict(x),
            TrainedModel::Mlp(m) => m.predict(x),
            TrainedModel::Lstm(m) => m.predict(x),
        }
    }
}

/// Trains `kind`; neural kinds also return their learning curve. Network
/// weights are initialized from `params.training.seed`.
pub fn train_model(
    kind: ModelKind,
    data: &Dataset,
    params: &ModelParams,
) -> Result<(TrainedModel, Option<LearningCurve>)> {
    let (dim, classes) = (data.dimension(), data.classes());
    let mut init = SeededRng::new(params.training.seed);
    let neural = |m: TrainedModel, c: LearningCurve| Ok((m, Some(c)));
    match kind {
        ModelKind::Dt => Ok((
            TrainedModel::Dt(DecisionTreeModel::train(data, &params.dt)?),
            None,
        )),
        ModelKind::Svm => Ok((
            TrainedModel::Svm(LinearSvmModel::train(data, &params.svm)?),
            None,
        )),
        ModelKind::Lr => Ok((
            TrainedModel::Lr(LogisticRegressionModel::train(data, &params.lr)?),
            None,
        )),
        ModelKind::Knn => Ok((TrainedModel::Knn(KnnModel::train(data, &params.knn)?), None)),
        ModelKind::Nb => Ok((
            TrainedModel::Nb(MultinomialNbModel::train(data, &params.nb)?),
            None,
        )),
        ModelKind::Mlp => {
            let net = MlpModel::new(dim, classes, &params.mlp, &mut init)?;
            let (net, curve) = train_network(net, "MLP", data, &params.training)?;
            neural(TrainedModel::Mlp(net), curve)
        }
        ModelKind::Cnn => {
            let net = CnnModel::new(dim, classes, &params.cnn, &mut init)?;
            let (net, curve) = train_network(net, "CNN", data, &params.training)?;
            neural(TrainedModel::Cnn(net), curve)
        }
        ModelKind::Lstm => {
            let net = LstmModel::new(dim, classes, &params.lstm, &mut init)?;
            let mut training = params.training.clone();
            if let Some(rate) = params.lstm.learning_rate {
                training.learning_rate = rate;
            }
            let (net, curve) = train_network(net, "LSTM", data, &training)?;
            neural(TrainedModel::Lstm(net), curve)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in ModelKind::ALL {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
            assert_eq!(k.slug().parse::<ModelKind>().unwrap(), k);
        }
        assert!("forest".parse::<ModelKind>().is_err());
        assert_eq!(ModelKind::ALL.iter().filter(|k| k.is_neural()).count(), 3);
    }

    #[test]
    fn facade_checks_dimension() {
        let d = Dataset::new(
            alloc::vec![
                CountVector::from_dense(&[1, 0]),
                CountVector::from_dense(&[0, 1])
            ],
            alloc::vec![0, 1],
            2,
        )
        .unwrap();
        let p = ModelParams {
            knn: KnnParams { k: 1 },
            ..Default::default()
        };
        for kind in [
            ModelKind::Dt,
            ModelKind::Svm,
            ModelKind::Lr,
            ModelKind::Knn,
            ModelKind::Nb,
        ] {
            let (m, curve) = train_model(kind, &d, &p).unwrap();
            assert!(curve.is_none());
            assert_eq!(m.kind(), kind);
            m.validate().unwrap();
            assert!(matches!(
                m.predict(&CountVector::zeros(3)),
                Err(Error::Shape { .. })
            ));
            assert_eq!(
                m.predict(&CountVector::from_dense(&[3, 0])).unwrap().label,
                0,
                "{kind}"
            );
        }
    }
}
