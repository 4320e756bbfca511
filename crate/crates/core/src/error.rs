use crate::C64;
use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("the two points coincide on the sphere")]
    DegeneratePoints,

    #[error("singular Möbius matrix (|det| = {0:e})")]
    SingularMatrix(f64),

    #[error("hypergeometric evaluation did not converge at z = {0}")]
    NoConvergence(C64),

    #[error("kernel is not one-dimensional (σ₁ = {smallest:e}, σ₂ = {second:e})")]
    RankDeficient { smallest: f64, second: f64 },

    #[error("no rational map of degree {degree} fits the samples (residual {residual:e})")]
    DegreeTooLow { degree: usize, residual: f64 },

    #[error("numerator and denominator share a factor (Sylvester σ_min = {0:e})")]
    CommonFactor(f64),

    #[error("need at least {needed} usable samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("disk regions overlap in {0} mask pixels")]
    RegionsOverlap(usize),

    #[error("escape iteration revisited a (region, pixel) pair at output pixel ({x}, {y})")]
    EscapeCycle { x: usize, y: usize },

    #[error("generator {0} is {1:?}; Schottky generators must be hyperbolic or loxodromic")]
    NotHyperbolic(&'static str, crate::geometry::MobiusClass),

    #[error("multiplier {0} is not in the lattice's multiplier ring")]
    NotInRing(C64),

    #[error("image is {width}x{height}; spherical images need a 2:1 aspect")]
    Aspect { width: u32, height: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input or I/O.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence(_)
                | Error::RankDeficient { .. }
                | Error::DegreeTooLow { .. }
                | Error::CommonFactor(_)
                | Error::TooFewSamples { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Image(image::ImageError::IoError(_)) | Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
