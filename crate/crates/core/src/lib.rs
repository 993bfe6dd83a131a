//! Incentive-compatible collaborative learning.
//!
//! Agents with private data-quality types pool samples to train a shared
//! model. The crate provides the economic model ([`econ`]), full-information
//! contribution schemes ([`scheme`]), the naive revelation game ([`game`]),
//! the transfer and verification mechanisms ([`mechanism`]), a threshold
//! classification lab for type estimation ([`classif`]) and the experiment
//! runner behind the `collab-bench` binary ([`bench`]).

pub mod bench;
pub mod classif;
pub mod error;
pub mod game;
pub mod econ;
pub mod instances;
pub mod mechanism;
pub mod scheme;

pub use error::{Error, Result};
pub use econ::{agent_utility, max_contribution, welfare, AgentPool, ContributionScheme, EnvParams, LearningEnv};
pub use scheme::{
    binding_fixed_point_scheme, binding_scheme, brute_force_optimal_scheme, select_contributor_count,
    simplified_scheme, target_total_samples, waterfill_optimal_scheme, welfare_gap, welfare_gap_proxy,
    SchemeMode, SchemeSolution,
};
