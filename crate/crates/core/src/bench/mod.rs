//! Benchmark suite: synthetic black boxes, the experiment harness, normalised
//! scoring and the GP-fit comparison.

pub mod functions;
pub mod gpfit;
pub mod harness;
pub mod score;

pub use functions::{builtin_functions, lookup, BlackBox, NoiseKind};
pub use gpfit::{gp_fit_comparison, GpFitConfig, GpFitReport, Toggle, Verdict};
pub use harness::{read_records, run_plan, write_records, Plan, RunRecord, SolverSpec};
pub use score::{normalized_score, summarize, Summary};
