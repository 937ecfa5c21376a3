//! Explain-then-predict claim verification.
//!
//! Evidence is summarized into a rationale without looking at the claim,
//! the verdict is read off a two-choice prompt over that rationale, and the
//! explanation shown to users is a fixed template around both. Attribution,
//! macro-F1, entailment and manual-rating tooling audit each step.

pub mod backend;
pub mod corpus;
pub mod digest;
pub mod evaluation;
pub mod explain;
pub mod nle;
pub mod pipeline;
pub mod rationale;
pub mod text;
pub mod verdict;

pub use backend::BackendFailure;
pub use corpus::{ClaimRecord, VerdictLabel};
