//! Contextual multi-armed bandits with per-arm minimum aggregated-revenue
//! constraints.
//!
//! The crate covers the whole pipeline:
//!
//! - [`lp`]: a dense two-phase simplex and the allocation programs built on it;
//! - [`instance`]: problem instances, their file format, a built-in catalog
//!   and a random generator;
//! - [`oracle`]: exact planning (optimal allocation and active set) plus the
//!   problem-dependent constants: feasibility margin, sensitivity
//!   coefficients and sub-optimality gaps;
//! - [`policy`]: online algorithms (optimistic LP, optimistic–pessimistic LP,
//!   greedy plug-in, non-contextual baseline);
//! - [`sim`]: the interaction protocol, pseudo-regret / pseudo-violation
//!   metrics, coverage experiments and CSV/JSON output.

pub mod active_set;
pub mod allocation;
pub mod instance;
pub mod lp;
pub mod matrix;
pub mod oracle;
pub mod policy;
pub mod sim;

pub use active_set::ActiveSet;
pub use instance::{Instance, RewardModel};
pub use matrix::PairMatrix;
pub use oracle::{Allocation, OracleReport};
pub use policy::Algorithm;
