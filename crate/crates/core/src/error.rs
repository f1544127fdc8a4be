use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two things that must agree in size do not.
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// A forward cache was used with parameters other than the ones that produced it.
    StaleCache,
    /// The optimizer received a NaN or infinite gradient.
    NonFiniteGradient { layer: usize },
    /// A training loss became NaN or infinite.
    Diverged {
        epoch: usize,
        batch: usize,
        loss: &'static str,
    },
    /// A required input was empty.
    Empty(&'static str),
    /// A value violates a documented precondition.
    Invalid(String),
    /// A feature block has zero mean pairwise distance over the reference set.
    DegenerateBlock { block: usize },
    /// A mixture covariance is not symmetric positive definite.
    NotPositiveDefinite { component: usize },
    /// Two standard-ensemble members were given the same seed.
    DuplicateSeed(u64),
    /// The snapshot window holds fewer epochs than requested members.
    WindowTooNarrow { window: (usize, usize), requested: usize },
    /// `k` exceeds the number of reference points.
    KTooLarge { k: usize, available: usize },
    /// The baseline mean distance at rank `j` is zero.
    ZeroBaseline { j: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape {
                context,
                expected,
                found,
            } => write!(f, "shape mismatch in {context}: expected {expected}, found {found}"),
            Error::StaleCache => f.write_str("forward cache does not belong to these parameters"),
            Error::NonFiniteGradient { layer } => {
                write!(f, "training diverged: non-finite gradient in layer {layer}")
            }
            Error::Diverged { epoch, batch, loss } => {
                write!(
                    f,
                    "training diverged: non-finite {loss} at epoch {epoch}, batch {batch}"
                )
            }
            Error::Empty(what) => write!(f, "{what} must not be empty"),
            Error::Invalid(msg) => f.write_str(msg),
            Error::DegenerateBlock { block } => {
                write!(f, "feature block {block} is degenerate (zero mean pairwise distance)")
            }
            Error::NotPositiveDefinite { component } => {
                write!(
                    f,
                    "covariance of component {component} is not symmetric positive definite"
                )
            }
            Error::DuplicateSeed(seed) => write!(f, "duplicate ensemble member seed {seed}"),
            Error::WindowTooNarrow { window, requested } => write!(
                f,
                "snapshot window [{}, {}] cannot supply {requested} distinct epochs",
                window.0, window.1
            ),
            Error::KTooLarge { k, available } => {
                write!(f, "k = {k} exceeds the {available} available points")
            }
            Error::ZeroBaseline { j } => write!(f, "baseline mean distance at rank {j} is zero"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
