use alloc::string::String;

use crate::gain::Functional;
use crate::rational::Vector;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cone generator {0} is the zero vector")]
    ZeroGenerator(usize),
    #[error("cone generators span only {rank} of {dim} dimensions")]
    NotGenerating { rank: usize, dim: usize },
    #[error("cone is not proper: it contains a line")]
    NotProper,
    #[error("order unit is not interior to the cone (fails along basis direction {direction})")]
    NotOrderUnit { direction: usize },
    #[error("unsupported standard space: {0}")]
    UnsupportedKind(String),
    #[error("space is not classical (cone is not simplicial)")]
    NotClassical,

    #[error("malformed linear program: {0}")]
    MalformedProblem(String),

    #[error("effect {label:?} is not in the positive cone")]
    EffectNotPositive { label: String, separator: Functional },
    #[error("effects do not sum to the order unit")]
    NotNormalized { residual: Vector },
    #[error("duplicate outcome label {0:?}")]
    DuplicateLabel(String),
    #[error("a measurement needs at least one outcome")]
    NoOutcomes,
    #[error("not a probability distribution: {0}")]
    BadDistribution(String),
    #[error("mixing weight must lie in [0, 1]")]
    WeightOutOfRange,
    #[error("measurements live on different spaces")]
    SpaceMismatch,
    #[error("outcome labels do not match: {0}")]
    LabelMismatch(String),
    #[error("not a stochastic matrix: {0}")]
    NotStochastic(String),
    #[error("blocks do not partition the outcomes: {0}")]
    NotAPartition(String),

    #[error("empty list")]
    EmptyList,
    #[error("not an ensemble: {0}")]
    NotAnEnsemble(String),

    #[error("joint outcome space has {size} outcomes, limit is {limit}")]
    ProductTooLarge { size: usize, limit: usize },

    #[error("{0:?} is not a normalized state")]
    NotAState(String),
    #[error("not a statistical experiment: {0}")]
    BadExperiment(String),
    #[error("experiments have different parameter sets")]
    ParameterMismatch,
}
