use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid variable subset: {0}")]
    InvalidSubset(String),
    #[error("augmented design matrix is numerically rank deficient")]
    RankDeficient,
    #[error("{vars} variables plus intercept exceed the sample size n = {n}")]
    TooManyVariables { vars: usize, n: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("diversity needs at least two ensemble members, got {0}")]
    DegenerateEnsemble(usize),
    #[error("null-model objective is zero; strength is undefined")]
    NullObjectiveZero,
    #[error("response has zero variance")]
    ZeroVarianceResponse,
    #[error("correlation matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}
