use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("negative weight {weight} for agent `{agent}` on task `{task}`")]
    NegativeWeight { agent: String, task: String, weight: i64 },

    #[error("empty hyperedge: task `{0}` has no assigned agents")]
    EmptyHyperedge(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("isolated agent at index {0} (zero weighted degree)")]
    IsolatedAgent(usize),

    #[error("empty task at index {0} (zero weighted degree)")]
    EmptyTask(usize),

    #[error("hypergraph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("stationary distribution did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("infeasible totals: total budget {budget} < total energy {energy}")]
    InfeasibleTotals { budget: u64, energy: u64 },

    #[error("greedy stalled with {remaining} units of unmet task energy")]
    GreedyStall { remaining: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("retry cap of {0} exceeded")]
    RetryCap(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
