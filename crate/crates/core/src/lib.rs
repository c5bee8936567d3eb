//! Deterministic workbench for Feistel indifferentiability experiments.
//!
//! * [`ideal`]: lazy-sampled random permutation, two-sided random function
//!   and the Feistel construction, all with explicit seedable randomness.
//! * [`sim14`]: the 14-round simulator with queue-based chain completion.
//! * [`chain`]: partial-chain algebra, bad-event monitor and the map from
//!   randomness pairs to partial round tables.
//! * [`sim6`]: the six-round simulator with 3-chain detection and abort.
//! * [`attacks`]: distinguisher scripts, including the two attacks on the
//!   six-round simulator.
//! * [`harness`]: scenarios, trials, Monte-Carlo advantage estimation.

pub mod attacks;
pub mod chain;
pub mod error;
pub mod harness;
pub mod ideal;
pub mod oracle;
pub mod seed;
pub mod sim14;
pub mod sim6;
pub mod transcript;
pub mod word;

pub use error::{AbortLocation, ConfigError, Fault, Halt};
pub use word::{HexWord, Pair, Width, Word};
