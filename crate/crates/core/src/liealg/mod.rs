//! Root data, weight modules and the zero-weight space of a tensor product.

mod module;
mod roots;
mod tensor;
mod verma;

pub use module::{
    commutation_defect, dual_action, ModuleKind, ModuleMatrix, RepresentedModule, DENSE_LIMIT,
};
pub use roots::{
    build_root_system, AlgebraElement, BasisElement, Root, RootSystem, Series, Weight, MAX_RANK,
};
pub use tensor::{zero_weight_basis, TensorState, ZeroWeightSpace};
pub use verma::{build_dual_verma, build_irrep, dominant_labels, MAX_IRREP_DIM};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LieError {
    #[error("unknown Lie algebra series `{0}`")]
    UnknownSeries(String),
    #[error("unsupported algebra {series}_{rank}; only A_1..A_3 are implemented")]
    UnsupportedAlgebra { series: Series, rank: usize },
    #[error("weight has {got} components, expected {expected}")]
    WeightLength { expected: usize, got: usize },
    #[error("weight is not dominant integral (Dynkin labels {labels:?})")]
    NonDominantWeight { labels: Vec<(f64, f64)> },
    #[error("module dimension {dim} exceeds the limit {limit}")]
    ModuleTooLarge { dim: usize, limit: usize },
    #[error("dual Verma depth must be at least 1")]
    DepthTooSmall,
    #[error("quotient has dimension {built}, Weyl formula gives {expected}")]
    DimensionMismatch { built: usize, expected: usize },
}
