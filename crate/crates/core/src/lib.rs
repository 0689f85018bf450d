//! Exact analysis of MAP decoding ties for binary block codes with arbitrary
//! priors over the binary symmetric channel.
//!
//! The crate enumerates every channel output of a small code, labels each one
//! as a decoder tie, a tie-free error or a correct decision for every
//! transmitted codeword, and computes the MAP error probability `a_n`, the
//! tie-free error probability `b_n` and the tie probability `delta_n` as exact
//! rationals. On top of that it materializes the family of set partitions
//! used to prove `b_n <= a_n <= (1 + 2qn) b_n` and checks each step of that
//! argument on concrete instances.

pub mod classify;
pub mod harness;
pub mod model;
pub mod montecarlo;
pub mod partitions;
pub mod weights;

pub use classify::{Classification, Label, Metrics, TheoremReport};
pub use harness::{run_fuzz, run_suite, FuzzConfig, SuiteReport, WeightStyle};
pub use model::{build_instance, BitWord, IndexSet, Instance, InstanceFile, ModelError};
pub use montecarlo::{estimate_metrics, Estimate, Estimates};
pub use partitions::{Analysis, CheckReport, Outcome, PartitionError};
pub use weights::{parse_weight, LaurentWeight, Rational};
