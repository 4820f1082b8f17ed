//! Approximation of functions of the form `F = K * f`, where `K` is a
//! singular or oscillatory kernel and `f` is smooth, on the interval
//! `[-1, 1]` and the unit sphere `S^2`.
//!
//! Two polynomial approximation operators of degree `n` are provided:
//!
//! * **classical hyperinterpolation** `L_n F`: a discrete `L^2` projection
//!   whose coefficients `<K f, p_l>` are evaluated with a positive-weight
//!   quadrature rule, sampling the full product `K f` at the nodes;
//! * **product-integration hyperinterpolation** `S_n F`: the kernel enters
//!   analytically through its modified moments `beta_r = int K q_r`, and the
//!   rule only samples the smooth factor `f`.
//!
//! The second operator needs far fewer quadrature points to reach the
//! projection-error plateau when `K` is hard to resolve pointwise. The
//! [`analysis`] module contains the experiment harness (error tables,
//! sweeps, stability audits) and the `hyperapprox` CLI exposes it.

pub mod adaptive;
pub mod analysis;
pub mod connection;
pub mod hyperinterp;
pub mod moments;
pub mod orthopoly;
pub mod quadrature;
pub mod reference;
pub mod scalar;

mod linalg;

pub use connection::{AlphaMatrix, ProductExpansion};
pub use hyperinterp::{EfficientWeights, Expansion, Provenance};
pub use moments::{KernelDescriptor, MomentVector};
pub use orthopoly::{BasisFamily, BasisSet, Point, Region, RegionKind, SphericalPoint};
pub use quadrature::{MZEstimate, QuadratureRule};
pub use scalar::Scalar;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {name} = {value} outside domain ({constraint})")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("Newton iteration for quadrature nodes did not converge (m = {m}, node {node})")]
    NewtonNoConvergence { m: usize, node: usize },

    #[error("malformed point-set file {path}: {reason}")]
    DesignFormat { path: String, reason: String },

    #[error("point off the unit sphere by {defect:.3e} (tolerance {tol:.1e})")]
    PointOffSphere { defect: f64, tol: f64 },

    #[error(
        "point set fails exactness verification at degree {degree}: max defect {max_defect:.3e}"
    )]
    ExactnessVerification { degree: usize, max_defect: f64 },

    #[error("moment vector covers q-indices up to {have}, need {need}")]
    MomentVectorTooShort { have: usize, need: usize },

    #[error("sample length {got} does not match rule size {expected}")]
    SampleMismatch { expected: usize, got: usize },

    #[error("quadrature node within {dist:.3e} of a kernel singularity")]
    NodeOnSingularity { dist: f64 },

    #[error("adaptive quadrature did not reach tolerance {tol:.3e} (estimate {estimate:.3e}) within {evals} evaluations")]
    AdaptiveNoConvergence {
        tol: f64,
        estimate: f64,
        evals: usize,
    },

    #[error("non-finite integrand at reference node after re-grading")]
    NonFiniteIntegrand,

    #[error("{op}: kernel incompatible with region")]
    KernelRegionMismatch { op: &'static str },

    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
