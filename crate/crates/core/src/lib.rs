pub mod agent;
pub mod codes;
pub mod distance;
pub mod environment;
pub mod search;
pub mod symplectic;
pub mod tncode;

pub use agent::AgentConfig;

/// The agent in double precision, as used by the experiment runner.
pub type Agent = agent::ProjectiveAgent<f64>;
