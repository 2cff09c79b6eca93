//! Generates a random-walk dataset, builds an index with default settings and
//! reports recall and latency of every query mode.
//!
//! ```text
//! cargo run --release --example random_walk_bench -- [count] [queries] [k,k,...]
//! ```

use std::time::Instant;

use climber::bench::{run_bench, BenchSpec, RandomWalk};
use climber::build::BuildConfig;
use climber::ClimberIndex;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: u64 = args.next().map_or(Ok(100_000), |a| a.parse())?;
    let queries: usize = args.next().map_or(Ok(50), |a| a.parse())?;
    let ks: Vec<usize> = match args.next() {
        Some(list) => list.split(',').map(str::parse).collect::<Result<_, _>>()?,
        None => vec![100, 500],
    };

    let dir = tempfile::tempdir()?;
    let start = Instant::now();
    let files = RandomWalk::new(count, 256, 1).write(&dir.path().join("data"), 5000)?;
    println!("generated {count} series in {:.1}s", start.elapsed().as_secs_f64());

    let (index, summary) = ClimberIndex::build(&files, &dir.path().join("index"), &BuildConfig::default())?;
    let spec = BenchSpec {
        queries,
        ks,
        ..BenchSpec::default()
    };
    let report = run_bench(&spec, &index.cached(), &files, Some(summary))?;
    print!("{}", report.table());
    println!("chain violations: {}", report.chain_violations().len());
    Ok(())
}
