use thiserror::Error;

use crate::solver::SolveReport;

/// Errors raised by geometry, quadrature, solver and file-format routines.
#[derive(Debug, Error, Clone)]
pub enum Error {
    #[error("facet normals lie in a closed hemisphere; the body is unbounded")]
    UnboundedBody,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("origin lies outside the body (support number {value} at index {index})")]
    OriginOutside { index: usize, value: f64 },
    #[error("origin lies on the boundary of the body")]
    OriginOnBoundary,
    #[error("radial function vanishes in this direction")]
    ZeroRadial,
    #[error("unsupported dimensions n={n}, m={m}")]
    BadDims { n: usize, m: usize },
    #[error("non-positive support number {value} at index {index}")]
    NonPositiveSupport { index: usize, value: f64 },
    #[error("body is not origin-symmetric on the measure atoms (deviation {0:e})")]
    AsymmetricInput(f64),
    #[error("vector is not of unit length (norm {0})")]
    NotUnit(f64),
    #[error("quadrature budget {got} below minimum {min}")]
    BudgetTooSmall { got: usize, min: usize },

    #[error("measure has no atoms")]
    EmptyMeasure,
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("measure is not even: {0}")]
    NotEven(String),
    #[error("measure is concentrated on a closed hemisphere (witness direction {witness:?})")]
    InadmissibleMeasure { witness: Option<Vec<f64>> },
    #[error("exponent p={p} is excluded (requires p > 1 and p != mn = {mn})")]
    ExcludedExponent { p: f64, mn: f64 },
    #[error("strict subspace concentration fails (worst normalized ratio {ratio})")]
    ConcentrationFail { ratio: f64 },
    #[error("exponent p={p} is not above the guaranteed range p > {bound}")]
    ExponentBelowGuarantee { p: f64, bound: f64 },
    #[error("solver did not converge within {} iterations", .0.iterations)]
    NoConvergence(Box<SolveReport>),

    #[error("{file}: {field}: {message}")]
    Format {
        file: &'static str,
        field: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
