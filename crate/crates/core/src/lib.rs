//! Multi-label classification with surrogate-loss learners: the Hamming,
//! subset and ranking losses, their convex surrogates, linear models trained
//! with SVRG-BB, generalization-bound calculators and executable checks of
//! the inequalities between the losses.

pub mod bounds;
pub mod data;
pub mod error;
pub mod harness;
pub mod loss;
pub mod model;
pub mod optimizer;
pub mod relations;

pub use data::{Dataset, SparseMatrix, SparseRow};
pub use error::{MlcError, Result};
pub use loss::{BaseLoss, BaseLossKind, LabelVector, Surrogate};
pub use model::LinearModel;
pub use optimizer::{TrainConfig, TrainTrace};
