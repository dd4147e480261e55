use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two atoms sit (numerically) on top of each other.
    #[error("degenerate geometry: bond `{bond}` has length {distance:e} (minimum {min:e})")]
    DegenerateGeometry {
        bond: &'static str,
        distance: f64,
        min: f64,
    },

    #[error("parameter `{name}` = {value} out of range: {expected}")]
    Range {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// The band gap vanishes where a gapped spectrum is required.
    #[error("bands touch at k = ({kx:.6}, {ky:.6}); gap {gap:e}")]
    DegeneratePoint { kx: f64, ky: f64, gap: f64 },

    /// A winding loop passes through (or too close to) a zero of n(k).
    #[error("winding loop passes through a node: |n| = {modulus:e}")]
    LoopThroughNode { modulus: f64 },

    #[error("winding number not an integer: {value} (residual {residual:e})")]
    NonInteger { value: f64, residual: f64 },

    #[error("spectrum is not gapped (min gap {min_gap:e})")]
    NotGapped { min_gap: f64 },

    /// Berry phases of parallel Wilson lines disagree beyond tolerance.
    #[error("Zak phase not quantized along {direction}: spread {spread:e} rad")]
    NonQuantized { direction: char, spread: f64 },

    #[error("cone is degenerate: smallest velocity {sigma_min:e}")]
    DegenerateCone { sigma_min: f64 },

    #[error("power-law fit failed: R^2 = {r2:.4}")]
    FitFailure { r2: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("matrix is not Hermitian: ||H - H^dagger||_F = {residual:e}")]
    NotHermitian { residual: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::Range { .. } | Error::Invalid(_) | Error::DegenerateGeometry { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
