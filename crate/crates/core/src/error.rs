use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario (n={n}, m={m}, k={k}): every parameter must be at least 2")]
    InvalidScenario { n: usize, m: usize, k: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("expanded tensor would hold {entries} entries, above the guard of {guard}")]
    SizeGuardExceeded { entries: u128, guard: u128 },

    #[error("enumeration needs about {cost} evaluations, above the guard of {guard}")]
    EnumerationGuardExceeded { cost: u128, guard: u128 },

    #[error("party index {party} is outside 1..={n}")]
    InvalidPartyIndex { party: usize, n: usize },

    #[error("operation needs at least {min} parties, scenario has {n}")]
    TooFewParties { n: usize, min: usize },

    #[error("invalid group count {groups} for {n} parties")]
    InvalidGroupCount { groups: usize, n: usize },

    #[error("reduction requires a bipartite expression, got n={0}")]
    NotBipartite(usize),

    #[error("reduction requires two settings per party, got m={0}")]
    NotTwoSettings(usize),

    #[error("operation requires binary outcomes, got k={0}")]
    NotBinaryOutcome(usize),

    #[error("coefficient function is not of the product form g(s)*r")]
    NotProductForm,

    #[error("correlator {value} for settings {settings} lies outside [-1, 1]")]
    CorrelatorOutOfRange { settings: String, value: f64 },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("distribution for settings {settings} sums to {sum}")]
    Normalization { settings: String, sum: f64 },

    #[error("negative probability {value} for settings {settings}")]
    NegativeProbability { settings: String, value: f64 },

    #[error("full table for settings {settings} does not reduce to the stated outcome-sum distribution")]
    ReductionMismatch { settings: String },

    #[error("behavior has no full outcome table")]
    FullTableAbsent,

    #[error("scenario mismatch: expression has {expected}, behavior has {found}")]
    ScenarioMismatch { expected: String, found: String },

    #[error("bound does not belong to this expression: {0}")]
    BoundExpressionMismatch(String),

    #[error("spectral check failed: {0}")]
    SpectralMismatch(String),

    #[error("no catalogued bounds for {0}")]
    NoCatalogueEntry(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
