//! Decision tree, k-nearest neighbours, multinomial naive Bayes, softmax
//! regression and a one-vs-rest linear SVM with sigmoid calibration.

mod knn;
mod logistic;
mod naive_bayes;
mod svm;
mod tree;

pub use knn::{KnnModel, KnnParams};
pub use logistic::{LogisticRegressionModel, LrParams};
pub use naive_bayes::{MultinomialNbModel, NbParams};
pub use svm::{
    binary_hinge_gradient, binary_hinge_objective, LinearSvmModel, PlattScaling, SvmParams,
};
pub use tree::{DecisionTreeModel, SplitCriterion, TreeNode, TreeParams};
