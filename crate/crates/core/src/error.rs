use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no Dirichlet eigenvalue below cutoff {cutoff} (lowest is {lowest})")]
    EmptyBasis { cutoff: f64, lowest: f64 },

    #[error("quadrature resolution {nodes} along {axis} is below the {required} nodes needed for cutoff {cutoff}")]
    Resolution {
        axis: &'static str,
        nodes: usize,
        required: usize,
        cutoff: f64,
    },

    #[error("non-finite integrand value at ({x}, {y})")]
    Evaluation { x: f64, y: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("measure has total mass {mass}, expected 1 within {tolerance}")]
    MassDeficit { mass: f64, tolerance: f64 },

    #[error("density takes the negative value {value} at ({x}, {y})")]
    Negativity { value: f64, x: f64, y: f64 },

    #[error("{0}")]
    InvalidMeasure(String),

    #[error("spectral parameter {lambda} lies within {distance:e} of the pole {pole}")]
    PoleProximity {
        lambda: String,
        pole: f64,
        distance: f64,
    },

    #[error("Re {re} exceeds the usable window below cutoff {cutoff} (margin {margin})")]
    CutoffExceeded { re: f64, cutoff: f64, margin: f64 },

    #[error("undecidable at this cutoff: {0}")]
    Undecidable(String),

    #[error("argument-principle contour failed: {0}")]
    Contour(String),

    #[error("inconsistent root count: contour says {expected}, refinement found {found}")]
    Inconsistency { expected: i64, found: usize },

    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    #[error("spectral parameter {lambda} is not certifiably in the resolvent set: |m| = {value:e} <= bound {bound:e}")]
    NotInResolventSet {
        lambda: String,
        value: f64,
        bound: f64,
    },

    #[error("operation needs a measure with an L2 density, got {0}")]
    UnsupportedMeasure(String),

    #[error("vector is not in the operator domain: <u0>_mu = {defect:e}")]
    DomainMembership { defect: f64 },

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("rejection sampler efficiency {efficiency:.4} is below 1%")]
    DensityBound { efficiency: f64 },

    #[error("bin mismatch: {0}")]
    BinMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
