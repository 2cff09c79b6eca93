//! Builds an index over a small random-walk dataset and runs one query in
//! every mode, comparing each answer with the exact one.
//!
//! ```text
//! cargo run --release --example build_and_query -- [count] [k]
//! ```

use climber::bench::RandomWalk;
use climber::build::BuildConfig;
use climber::query::{QueryMode, QuerySpec};
use climber::series::recall;
use climber::storage::read_dataset_file;
use climber::ClimberIndex;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: u64 = args.next().map_or(Ok(20_000), |a| a.parse())?;
    let k: usize = args.next().map_or(Ok(50), |a| a.parse())?;

    let dir = tempfile::tempdir()?;
    let files = RandomWalk::new(count, 128, 3).write(&dir.path().join("data"), 2000)?;
    let cfg = BuildConfig {
        capacity: 1000,
        ..BuildConfig::default()
    };
    let (index, summary) = ClimberIndex::build(&files, &dir.path().join("index"), &cfg)?;
    println!(
        "{} records into {} partitions in {:.2}s",
        summary.stats.records,
        index.skeleton().partition_count(),
        summary.timings.total_secs
    );

    let query = read_dataset_file(&files[0])?.swap_remove(7);
    let exact = index.scan_exact(&QuerySpec::new(query.clone(), k, QueryMode::Scan)?)?;
    for mode in QueryMode::chain() {
        let result = index.query(&QuerySpec::new(query.clone(), k, mode)?)?;
        println!(
            "{mode:<12} recall {:.3}  partitions {:>3}  records {:>6}  nearest {:?}",
            recall(&result.ids(), &exact.ids())?,
            result.partitions_accessed,
            result.records_examined,
            result.neighbors.first().map(|n| n.id)
        );
    }
    Ok(())
}
