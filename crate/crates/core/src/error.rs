use thiserror::Error;

/// Errors raised while building or querying finite structures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("space has {points} points, above the bound of {bound}")]
    TooManyPoints { points: usize, bound: usize },
    #[error("open family is not a topology: {0}")]
    NotATopology(String),
    #[error("domain of partial map is not open")]
    DomainNotOpen,
    #[error("structural error: {0}")]
    Structure(String),
    #[error("action undefined: beta(c) = {beta_c} but alpha(a) = {alpha_a}")]
    ActionFeet { beta_c: String, alpha_a: String },
    #[error("edges do not match: {0} vs {1}")]
    EdgeMismatch(String, String),
    #[error("not a free derivation: {0}")]
    NotADerivation(String),
    #[error("derivation is not coadmissible: {0}")]
    NotCoadmissible(String),
    #[error("subgroupoid is not normal: {0}")]
    NotNormal(String),
    #[error("axiom {0} fails; refusing to build")]
    AxiomFailed(String),
    #[error("hypothesis {0} fails")]
    HypothesisFailed(String),
    #[error("point {0} is outside the domain")]
    OutsideDomain(String),
    #[error("no factorisation within word length {0}")]
    FactorisationBound(usize),
    #[error("scenario error at {location}: {message}")]
    Scenario { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
