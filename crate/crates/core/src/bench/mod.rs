//! Benchmark data generation and the recall/time harness.

mod harness;
mod randomwalk;

pub use harness::{
    load_records, run_bench, BenchReport, BenchSpec, IndexShape, ModeSummary, QueryRow,
};
pub use randomwalk::{gen_randomwalk, RandomWalk, StepDistribution};
