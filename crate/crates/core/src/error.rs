use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight {index} is not positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("weights sum to {sum}, which is not within 1e-6 of 1")]
    SumTooFarFromOne { sum: f64 },
    #[error("distribution must have at least one outcome")]
    EmptyDistribution,
    #[error("labels length {labels} does not match weights length {weights}")]
    LabelMismatch { labels: usize, weights: usize },
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("theta {theta} out of range for n = {n}")]
    ThetaOutOfRange { theta: f64, n: u64 },
    #[error("bin {index} of mass {value} is not below tau' = {tau_prime}; split first")]
    NotSplit { index: usize, value: f64, tau_prime: f64 },
    #[error("no bin in [tau, tau') to absorb the residual mass {residual}")]
    NoMidBin { residual: f64 },
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("support of size {size} exceeds the exact-enumeration limit {limit}")]
    SupportTooLarge { size: usize, limit: usize },
    #[error("argument {x} is outside the W_-1 domain [-1/e, 0)")]
    DomainError { x: f64 },
    #[error("epsilon {epsilon} must lie strictly inside (0, 1)")]
    EpsilonOutOfRange { epsilon: f64 },
    #[error("gamma {gamma} is outside the admissible domain for epsilon {epsilon}")]
    GammaOutOfDomain { gamma: f64, epsilon: f64 },
    #[error("variance proxy {0} is negative")]
    NegativeVariance(f64),
    #[error("no crossover for coefficient {coefficient} on the search interval")]
    NoCrossover { coefficient: f64 },
    #[error("x = {x} lies beyond the largest support point {max}")]
    XOutsideSupportHull { x: f64, max: f64 },
    #[error("distributions have different supports")]
    SupportMismatch,
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),
    #[error("index {index} out of range for {len} bins")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("indices must be distinct")]
    RequiresDistinct,
    #[error("index sets overlap")]
    OverlappingSets,
    #[error("trials must be at least 1")]
    NoTrials,
}

impl Error {
    /// Stable machine-readable identifier, used in the CLI error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveWeight { .. } => "NonPositiveWeight",
            Error::SumTooFarFromOne { .. } => "SumTooFarFromOne",
            Error::EmptyDistribution => "EmptyDistribution",
            Error::LabelMismatch { .. } => "LabelMismatch",
            Error::BadParam(_) => "BadParam",
            Error::ThetaOutOfRange { .. } => "ThetaOutOfRange",
            Error::NotSplit { .. } => "NotSplit",
            Error::NoMidBin { .. } => "NoMidBin",
            Error::BadPartition(_) => "BadPartition",
            Error::SupportTooLarge { .. } => "SupportTooLarge",
            Error::DomainError { .. } => "DomainError",
            Error::EpsilonOutOfRange { .. } => "EpsilonOutOfRange",
            Error::GammaOutOfDomain { .. } => "GammaOutOfDomain",
            Error::NegativeVariance(_) => "NegativeVariance",
            Error::NoCrossover { .. } => "NoCrossover",
            Error::XOutsideSupportHull { .. } => "XOutsideSupportHull",
            Error::SupportMismatch => "SupportMismatch",
            Error::InvalidPmf(_) => "InvalidPmf",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::RequiresDistinct => "RequiresDistinct",
            Error::OverlappingSets => "OverlappingSets",
            Error::NoTrials => "NoTrials",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
