//! Semi-supervised linear classification with a quadratic unlabeled-margin
//! term (QLDS) and a random-matrix performance predictor used for label-free
//! hyperparameter selection.

pub mod baselines;
pub mod bench;
pub mod data;
pub mod error;
pub mod losslab;
pub mod numerics;
pub mod select;
pub mod solver;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
