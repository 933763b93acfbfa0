use thiserror::Error;

/// Errors produced by the geometry, coding, pressure and counting layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix has non-positive determinant {0}; not in PSL(2,R)")]
    NotUnimodular(f64),
    #[error("point ({re}, {im}) is not in the upper half-plane")]
    InvalidPoint { re: f64, im: f64 },
    #[error("|trace| = {trace} is within tolerance of 2; classification ambiguous")]
    AmbiguousClass { trace: f64 },
    #[error("element is not hyperbolic (class {0:?})")]
    NotHyperbolic(crate::moebius::Class),
    #[error("elliptic or identity element has no boundary fixed points")]
    NoBoundaryFixedPoints,
    #[error("arc construction failed: {0}")]
    ArcConstructionFailed(String),
    #[error("unknown generator label `{0}`")]
    UnknownLabel(String),
    #[error("generator `{label}` tagged {tagged} but classifies as {found}")]
    KindMismatch {
        label: String,
        tagged: String,
        found: String,
    },
    #[error("representation has too few generators ({0}); need at least 2")]
    TooFewGenerators(usize),
    #[error("representation pair has mismatched generator lists")]
    PairMismatch,
    #[error("word evaluates to a non-hyperbolic element; configuration is not a valid Schottky system")]
    NonHyperbolicWord,
    #[error("tail of the exponent sum diverges: t(a+b) = {0} <= 1/2")]
    DivergentTail(f64),
    #[error("truncation insufficient: relative tail uncertainty {0:.3e} exceeds 10% of the partition sum")]
    TruncationInsufficient(f64),
    #[error("tail model fit for letter `{0}` failed to bracket held-out distances")]
    TailModelInvalid(String),
    #[error("finite-difference step {h} crosses the phase boundary at t = {t}")]
    StepTooLarge { t: f64, h: f64 },
    #[error("pressure never became negative up to t = {0}; bracket failure (bad configuration?)")]
    BracketFailure(f64),
    #[error("requested root tolerance {requested:.2e} below achievable precision {floor:.2e}")]
    PrecisionFloor { requested: f64, floor: f64 },
    #[error("need at least 5 traced curve points, got {0}")]
    InsufficientPoints(usize),
    #[error("counting window saturated; enlarge the enumeration budget")]
    SaturatedWindow,
    #[error("only {0} conjugacy classes below the length cutoff; need at least 50")]
    TooFewClasses(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
