use thiserror::Error;

/// Errors produced while building, solving or verifying an allocation problem.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("graph is disconnected: nodes {unreachable:?} are unreachable from node 0")]
    Disconnected { unreachable: Vec<usize> },

    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("invalid cost model: {0}")]
    InvalidCost(String),

    #[error("exponential inverse marginal needs lambda > 0, got {0}")]
    NonpositiveLambda(f64),

    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("step {step} overflowed: agent {agent} would get load {value} (try halving dt)")]
    StepOverflow { step: u64, agent: usize, value: f64 },

    #[error("breakpoint table needs a single cost family; found a mix")]
    MixedFamilies,

    #[error("no non-degenerate bracket contains total {total}")]
    DegenerateBracket { total: f64 },

    #[error("allocation is not in the feasible set: {0}")]
    NotFeasible(String),

    #[error("sampler starved: acceptance rate {rate:e} below {threshold:e}")]
    SamplerStarved { rate: f64, threshold: f64 },

    #[error("grid oracle supports at most {max} agents, got {n}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("grid at resolution {0} contains no feasible point")]
    EmptyGrid(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown example id {0:?} (expected one of fig2, fig3, tab1, tab3)")]
    UnknownExample(String),
}

impl Error {
    /// Stable machine-readable code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SelfLoop(_) => "E_SELF_LOOP",
            Error::NodeOutOfRange { .. } => "E_NODE_OUT_OF_RANGE",
            Error::Disconnected { .. } => "E_DISCONNECTED",
            Error::EmptyGraph => "E_EMPTY_GRAPH",
            Error::InvalidCost(_) => "E_INVALID_COST",
            Error::NonpositiveLambda(_) => "E_NONPOSITIVE_LAMBDA",
            Error::LengthMismatch { .. } => "E_LENGTH_MISMATCH",
            Error::Infeasible(_) => "E_INFEASIBLE",
            Error::InvalidInitialState(_) => "E_INVALID_INITIAL_STATE",
            Error::InvalidConfig(_) => "E_INVALID_CONFIG",
            Error::StepOverflow { .. } => "E_STEP_OVERFLOW",
            Error::MixedFamilies => "E_MIXED_FAMILIES",
            Error::DegenerateBracket { .. } => "E_DEGENERATE_BRACKET",
            Error::NotFeasible(_) => "E_NOT_FEASIBLE",
            Error::SamplerStarved { .. } => "E_SAMPLER_STARVED",
            Error::DimensionTooLarge { .. } => "E_DIMENSION_TOO_LARGE",
            Error::EmptyGrid(_) => "E_EMPTY_GRID",
            Error::Parse(_) => "E_PARSE",
            Error::UnknownExample(_) => "E_UNKNOWN_EXAMPLE",
        }
    }

    /// Process exit status used by the command-line front end.
    ///
    /// 2 parse/config, 3 infeasible, 4 numerical, 5 verification mismatch.
    pub fn exit_status(&self) -> i32 {
        match self {
            Error::Infeasible(_) | Error::NotFeasible(_) => 3,
            Error::StepOverflow { .. }
            | Error::SamplerStarved { .. }
            | Error::DegenerateBracket { .. }
            | Error::NonpositiveLambda(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
