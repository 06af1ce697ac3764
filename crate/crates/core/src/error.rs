use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split into two families: invalid inputs (rejected before any
/// numerics run) and numerical failures (unconverged, ambiguous or
/// overflowing computations). The CLI maps these onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient matrix is not symmetric: asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NonSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("phase-space vector length must be even and >= 2, got {0}")]
    OddPhaseDimension(usize),

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("polynomial degree {degree} exceeds the supported maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("truncation {n} too small: need at least {need}")]
    TruncationTooSmall { n: usize, need: usize },

    #[error("matrix dimension {dim} exceeds the dense-storage cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("operation requires a zero singular space, but dim S = {dim}")]
    SingularSpaceNonzero { dim: usize },

    #[error("quadratic form is not elliptic on its singular space (margin {margin:.3e})")]
    NotEllipticOnS { margin: f64 },

    #[error("singular space dimension {dim} is odd; rank tolerances are likely misconfigured")]
    OddSingularSpace { dim: usize },

    #[error("restriction of q to S is not purely imaginary: real residual {residual:.3e}")]
    NotImaginaryOnS { residual: f64 },

    #[error(
        "eigenvalue {re:+.6e}{im:+.6e}i of the Hamilton map sits on the selection boundary and \
         cannot be certified in or out; candidate lattices have {with} and {without} generators"
    )]
    AmbiguousBoundary { re: f64, im: f64, with: usize, without: usize },

    #[error("generator modulus {modulus:.3e} too close to zero; enumeration would not terminate")]
    DegenerateGenerator { modulus: f64 },

    #[error("enumeration exceeded the configured cap of {cap} lattice points")]
    EnumerationOverflow { cap: usize },

    #[error("the region is empty for the given parameters (C={c}, C0={c0}, h={h})")]
    EmptyRegion { c: f64, c0: f64, h: f64 },

    #[error("grid step {step:.4} does not resolve the Gaussian window (need <= {max:.4})")]
    UnderResolvedGrid { step: f64, max: f64 },

    #[error("grid function has non-negligible boundary mass: tail fraction {tail:.3e}")]
    BoundaryMass { tail: f64 },

    #[error("eigenvalue solver failed: {0}")]
    EigFailure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unconverged: {0}")]
    Unconverged(String),
}

impl Error {
    /// True when the error indicates malformed input rather than a
    /// numerical failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::AmbiguousBoundary { .. }
                | Error::EnumerationOverflow { .. }
                | Error::EigFailure(_)
                | Error::Unconverged(_)
                | Error::NotImaginaryOnS { .. }
                | Error::OddSingularSpace { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
