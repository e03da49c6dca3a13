//! Multivariate matrix jets and finite-order differential operators in the
//! Cartan coordinates.

mod jet;
mod operator;

pub use jet::{binomial, degree, factorial, JetLayout, MatrixJet, MultiIndex};
pub use operator::{CoefficientSource, DiffOperator, JetFunction, MAX_OPERATOR_ORDER};

use crate::elliptic::EllipticError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiffOpError {
    #[error("jets expanded at different base points")]
    BaseMismatch,
    #[error("jet orders differ ({left} vs {right})")]
    OrderMismatch { left: usize, right: usize },
    #[error("incompatible shapes")]
    ShapeMismatch,
    #[error("coefficient jets needed to order {needed}, available to order {available}")]
    InsufficientJetOrder { needed: usize, available: usize },
    #[error("operator order {order} exceeds the cap of 4")]
    OrderTooHigh { order: usize },
    #[error("coefficient undefined here: {0}")]
    Domain(String),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}
