//! Exact arithmetic for symmetric bilinear forms on finitely generated
//! modules over artinian principal ideal rings.
//!
//! The supported rings are `Z/p^n`, `Z/N` (split into prime-power
//! components), and `F_p[t]/(t^n)`. On top of exact modular linear
//! algebra (valuation-pivot Smith normal form, canonical column-reduced
//! submodule matrices) the crate decides anisotropy, quasi-anisotropy
//! and the radical root of a symmetric bilinear form, and ships
//! brute-force oracles that machine-check the structural theorems on
//! exhaustive small instances.


pub mod aniso;
pub mod form;
pub mod graded;

pub mod linalg;
pub mod module;
pub mod oracle;

pub mod ring;

use thiserror::Error;

/// Errors shared by every layer of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring parameters: {0}")]
    InvalidRing(String),
    #[error("ring mismatch between operands")]
    RingMismatch,
    #[error("ambient module shapes do not match")]
    ShapeMismatch,
    #[error("invalid module shape: {0}")]
    InvalidShape(String),
    #[error("element is not a unit (valuation {valuation} > 0)")]
    NotAUnit { valuation: u32 },
    #[error("cannot divide: valuation {valuation} is smaller than {requested}")]
    ValuationTooSmall { valuation: u32, requested: u32 },
    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),
    #[error("element does not lie in the submodule")]
    NotContained,
    #[error("submodule is not contained in its orthogonal complement")]
    NotIsotropic,
    #[error("operation requires a non-degenerate form")]
    Degenerate,
    #[error("operation requires exponent at least {required}, module has {actual}")]
    ExponentTooSmall { required: u32, actual: u32 },
    #[error("enumeration budget exceeded: module has {size} elements, budget is {budget}")]
    BudgetExceeded { size: u128, budget: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default element-count budget for exhaustive submodule enumeration.
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 12;

/// Default cap on the number of Gram matrices visited per shape in a suite.
pub const DEFAULT_GRAM_BUDGET: u64 = 1_000_000;
