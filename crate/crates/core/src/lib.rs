//! Uniform sampling and exact statistics for permutations drawn from a
//! parabolic double coset `S_lambda \ S_n / S_mu` of the symmetric group.
//!
//! Double cosets are indexed by contingency tables with row sums `lambda` and
//! column sums `mu`. The crate samples uniformly within a coset, evaluates
//! fixed points, descents, d-descents and inversions, computes their exact
//! means and variances from the table, builds size-bias couplings, and
//! evaluates Stein-method and concentration bounds against Monte Carlo.

pub mod concentration;
pub mod error;
pub mod moments;
pub mod montecarlo;
pub mod oracle;
pub mod partition;
pub mod permutation;
pub mod rational;
pub mod rng;
pub mod sampler;
pub mod size_bias;
pub mod stats;
pub mod stein;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use moments::{BorderSums, MomentReport, Moments, Variance, VarianceOrder};
pub use oracle::{CosetOracle, ExactLaw};
pub use partition::{block_structure, BlockStructure, Partition};
pub use permutation::Permutation;
pub use rational::{Rational, RationalValue};
pub use rng::RngStream;
pub use sampler::{enumerate_coset, sample_uniform, CosetSampler};
pub use size_bias::{size_bias_transform, CouplingCase, CouplingOutcome, IntegerDistribution, SizeBiasCoupling};
pub use stats::StatisticKind;
pub use stein::{BoundReport, DependencyGraph};
pub use table::ContingencyTable;
