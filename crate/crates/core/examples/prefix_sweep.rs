//! Builds skeletons for several prefix lengths over the same random-walk
//! dataset and prints how the group and trie counts change.
//!
//! ```text
//! cargo run --release --example prefix_sweep -- [count] [m,m,...] [data seed]
//! ```

use climber::bench::RandomWalk;
use climber::build::{build_skeleton, BuildConfig};
use climber::storage::sample_partitions;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: u64 = args.next().map_or(Ok(100_000), |a| a.parse())?;
    let prefixes: Vec<usize> = match args.next() {
        Some(list) => list.split(',').map(str::parse).collect::<Result<_, _>>()?,
        None => vec![6, 10, 20],
    };
    let seed: u64 = args.next().map_or(Ok(1), |a| a.parse())?;

    let dir = tempfile::tempdir()?;
    let files = RandomWalk::new(count, 256, seed).write(dir.path(), 5000)?;
    println!("{:>4} {:>8} {:>11} {:>11} {:>8}", "m", "groups", "trie nodes", "partitions", "total");
    for m in prefixes {
        let cfg = BuildConfig {
            prefix_len: m,
            ..BuildConfig::default()
        };
        let sample = sample_partitions(&files, cfg.alpha, cfg.seed)?;
        let (_, sk) = build_skeleton(&sample, &cfg)?;
        println!(
            "{:>4} {:>8} {:>11} {:>11} {:>8}",
            m,
            sk.group_count(),
            sk.trie_node_count(),
            sk.partition_count(),
            sk.group_count() + sk.trie_node_count()
        );
    }
    Ok(())
}
