//! Numerical laboratory for operator positivity and analytic models of
//! commuting matrix tuples.
//!
//! The crate certifies weighted-Bergman-type positivity of finite matrix
//! tuples, constructs isometric dilations into truncated weighted Bergman
//! spaces over the disc and polydisc, computes partially isometric
//! Beurling-type multipliers of shift-invariant subspaces, analyzes
//! doubly commuting quotient modules, and generalizes the construction to
//! diagonal reproducing kernels. Every identity is verified at finite
//! truncation with explicit, computable error bounds.

pub mod bergman;
pub mod blh;
pub mod dilation;
pub mod hereditary;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod srkh;

pub use bergman::{SpaceVector, TruncatedSpace};
pub use blh::MultiplierPoly;
pub use dilation::{DilationMap, JointDilation, ModelProjection};
pub use hereditary::{
    Certificate, CertifyMode, DefectData, HereditaryPolynomial, OperatorTuple, WeightMultiIndex,
};
pub use linalg::{CMatrix, CVector, SubspaceFrame, Tolerances};
pub use model::{ModelData, QuotientAnalysis};
pub use srkh::{DiagonalKernel, KContractCertificate, ReciprocalSeries};
