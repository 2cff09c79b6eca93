//! Imports a CSV file (id, then values), builds an index over it and prints
//! the index layout.
//!
//! ```text
//! cargo run --example csv_import -- [file.csv]
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use climber::build::BuildConfig;
use climber::storage::import_csv;
use climber::ClimberIndex;

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let csv = match std::env::args().nth(1) {
        Some(path) => PathBuf::from(path),
        None => {
            let path = dir.path().join("sines.csv");
            let mut text = String::new();
            for id in 0..1000 {
                let phase = id as f64 * 0.37;
                let freq = 1.0 + (id % 5) as f64;
                let values: Vec<String> = (0..48)
                    .map(|t| format!("{:.5}", (phase + freq * t as f64 / 8.0).sin()))
                    .collect();
                writeln!(text, "{id},{}", values.join(","))?;
            }
            std::fs::write(&path, text)?;
            path
        }
    };

    let files = import_csv(&csv, &dir.path().join("data"), 250)?;
    let cfg = BuildConfig {
        segments: 8,
        pivots: 40,
        prefix_len: 4,
        capacity: 200,
        alpha: 0.5,
        ..BuildConfig::default()
    };
    let (index, _) = ClimberIndex::build(&files, &dir.path().join("index"), &cfg)?;
    print!("{}", index.inspect()?);
    Ok(())
}
