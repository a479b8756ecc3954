use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input.
    InvalidInput(String),
    /// Two objects that must share a dimension do not.
    DimensionMismatch { expected: usize, found: usize },
    /// Two grid functions with different resolutions were combined.
    ResolutionMismatch { left: usize, right: usize },
    /// A hull facet incident to `site` reaches the outermost lattice copies.
    TruncationTooSmall { site: usize, truncation: usize },
    /// An affine chart with a (numerically) singular linear part.
    SingularChart,
    /// A constructed function failed the a-posteriori g-convexity check.
    PostCheckFailed { worst: f64 },
    /// A reparametrization violated convexity or `0 <= χ' <= 1`.
    SlopeBound { slope: f64 },
    /// Measures compared on different supports.
    SupportMismatch,
    /// The equation is invariant under constant shifts (zero exponent).
    UnanchoredProblem,
    /// A measure specification with no mass.
    ZeroMass,
    MaxIterExceeded { iterations: usize, residual: f64 },
    /// The linear solve inside a Newton step broke down.
    SingularJacobian,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ResolutionMismatch { left, right } => {
                write!(f, "grid resolution mismatch: {left} vs {right}")
            }
            Error::TruncationTooSmall { site, truncation } => write!(
                f,
                "lattice truncation {truncation} too small: hull facet at site {site} touches the lift boundary"
            ),
            Error::SingularChart => write!(f, "affine chart has a singular linear part"),
            Error::PostCheckFailed { worst } => {
                write!(f, "g-convexity post-check failed (worst second difference {worst:e})")
            }
            Error::SlopeBound { slope } => {
                write!(f, "reparametrization must be convex with slopes in [0, 1], found slope {slope}")
            }
            Error::SupportMismatch => write!(f, "measures are supported on different point sets"),
            Error::UnanchoredProblem => {
                write!(f, "exponent must be positive: the zero-exponent equation is shift invariant")
            }
            Error::ZeroMass => write!(f, "measure has zero total mass"),
            Error::MaxIterExceeded { iterations, residual } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:e})"
            ),
            Error::SingularJacobian => write!(f, "singular mass Jacobian"),
        }
    }
}

impl core::error::Error for Error {}
