use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jets are expanded at different base points ({0} vs {1})")]
    BasePointMismatch(Complex64, Complex64),

    #[error("division by a jet that vanishes through its truncation order")]
    DivisionByZero,

    #[error("every significant coefficient was truncated away")]
    OrderUnderflow,

    #[error("jet has truncation order {have}, need at least {need}")]
    InsufficientOrder { have: usize, need: usize },

    #[error("operation needs an analytic jet but got a pole of order {0}")]
    LaurentJet(u32),

    #[error("{op} needs a unit jet (nonzero constant term, no pole)")]
    NonUnitJet { op: &'static str },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("zero exponent at position {pos}")]
    ZeroExponent { pos: usize },

    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),

    #[error("Bessel series argument |{0}| exceeds the series radius {1}")]
    SeriesRadius(f64, f64),

    #[error("Bessel series did not converge within {0} terms")]
    SeriesDivergence(usize),

    #[error("could not bracket zero number {n} of {kind}")]
    Bracketing { kind: &'static str, n: usize },

    #[error("the Schwarzian of a constant function is not a finite function")]
    SchwarzianOfConstant,

    #[error("f' vanishes at {0}")]
    CriticalPoint(Complex64),

    #[error("Grahl condition violated for tuple {tuple:?}: {reason}")]
    GrahlCondition { tuple: Vec<u32>, reason: String },

    #[error("ODE step size underflow near {0}")]
    StepUnderflow(Complex64),

    #[error("failed to evaluate the ODE coefficient at {at}: {source}")]
    CoefficientEvaluation {
        at: Complex64,
        #[source]
        source: Box<Error>,
    },

    #[error("point {0} lies outside the integrated trajectory")]
    OutsideTrajectory(Complex64),

    #[error("zero on or near the contour persists after {0} dilations")]
    BoundaryZero(usize),

    #[error("winding number {0} is not within 0.1 of an integer")]
    NonIntegerWinding(f64),

    #[error("no valid grid points")]
    EmptyGrid,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
