use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("divisor lattice of order {order} is missing the entry for d = {missing}")]
    IncompleteLattice { order: u64, missing: u64 },

    #[error("inseparable split: {0}")]
    InseparableSplit(String),

    #[error("precision cap reached at level {level}; increase n")]
    PrecisionCap { level: u32 },

    #[error("real precision insufficient at {digits} digits: {reason}")]
    RealPrecision { digits: u32, reason: String },

    #[error("search bound {bound} exceeded: {what}")]
    SearchBound { bound: u64, what: String },

    #[error("fixture integrity: {0}")]
    FixtureIntegrity(String),

    #[error("fixture parse: {0}")]
    FixtureParse(String),

    #[error("internal verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
