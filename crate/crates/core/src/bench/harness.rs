//! Recall and latency of every query mode against the exact scan.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::build::BuildConfig;
use crate::error::{Error, Result};
use crate::index::{BuildSummary, BuildTimings, ClimberIndex};
use crate::query::{QueryMode, QuerySpec};
use crate::series::{recall, DataSeries, RecordId};
use crate::storage::{read_dataset_file, read_dataset_header};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    /// Number of query objects drawn from the dataset.
    pub queries: usize,
    pub ks: Vec<usize>,
    pub modes: Vec<QueryMode>,
    pub seed: u64,
    /// Standard deviation of Gaussian noise added to each drawn query.
    pub noise: Option<f64>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            queries: 50,
            ks: vec![500],
            modes: QueryMode::chain().to_vec(),
            seed: 7,
            noise: None,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.queries == 0 {
            return Err(Error::Config("query count must be at least 1".into()));
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Config("k list must be non-empty with every k at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("no query modes selected".into()));
        }
        if let Some(sigma) = self.noise {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(Error::Config(format!("noise {sigma} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRow {
    pub query: usize,
    pub record_id: RecordId,
    pub k: usize,
    pub mode: QueryMode,
    pub recall: f64,
    pub partitions_accessed: usize,
    pub records_examined: u64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub k: usize,
    pub mode: QueryMode,
    pub mean_recall: f64,
    pub min_recall: f64,
    pub max_recall: f64,
    pub mean_secs: f64,
    pub mean_partitions: f64,
    pub max_partitions: usize,
    pub mean_records: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexShape {
    pub series_len: usize,
    pub groups: usize,
    pub trie_nodes: usize,
    pub partitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub spec: BenchSpec,
    pub config: BuildConfig,
    pub index: IndexShape,
    pub build: Option<BuildSummary>,
    pub summaries: Vec<ModeSummary>,
    pub rows: Vec<QueryRow>,
}

impl BenchReport {
    pub fn summary(&self, k: usize, mode: QueryMode) -> Option<&ModeSummary> {
        self.summaries.iter().find(|s| s.k == k && s.mode == mode)
    }

    /// Rows where recall drops between two consecutive modes of
    /// [`QueryMode::chain`], as `(query, k, narrower, wider)`.
    pub fn chain_violations(&self) -> Vec<(usize, usize, QueryMode, QueryMode)> {
        let chain: Vec<QueryMode> = QueryMode::chain()
            .into_iter()
            .filter(|m| self.spec.modes.contains(m))
            .collect();
        let mut out = Vec::new();
        for q in 0..self.spec.queries {
            for &k in &self.spec.ks {
                let recall_of = |mode: QueryMode| {
                    self.rows
                        .iter()
                        .find(|r| r.query == q && r.k == k && r.mode == mode)
                        .map(|r| r.recall)
                };
                for pair in chain.windows(2) {
                    if let (Some(a), Some(b)) = (recall_of(pair[0]), recall_of(pair[1])) {
                        if b < a {
                            out.push((q, k, pair[0], pair[1]));
                        }
                    }
                }
            }
        }
        out
    }

    /// Copy with every wall-clock measurement zeroed, for comparing runs.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            row.elapsed_secs = 0.0;
        }
        for s in &mut out.summaries {
            s.mean_secs = 0.0;
        }
        if let Some(build) = &mut out.build {
            build.timings = BuildTimings::default();
            build.stats.conversion_secs = 0.0;
            build.stats.write_secs = 0.0;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(format!("serializing report: {e}")))
    }

    /// Fixed-width summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(
            out,
            "index: {} groups, {} trie nodes, {} partitions (w={} r={} m={} c={} alpha={})",
            self.index.groups,
            self.index.trie_nodes,
            self.index.partitions,
            c.segments,
            c.pivots,
            c.prefix_len,
            c.capacity,
            c.alpha
        );
        if let Some(b) = &self.build {
            let t = &b.timings;
            let _ = writeln!(
                out,
                "build: sampling+skeleton {:.2}s, conversion {:.2}s, redistribution {:.2}s, total {:.2}s",
                t.sampling_skeleton_secs, t.conversion_secs, t.redistribution_secs, t.total_secs
            );
        }
        let _ = writeln!(
            out,
            "{:>6}  {:<12} {:>8} {:>8} {:>8} {:>10} {:>10} {:>12}",
            "k", "mode", "mean", "min", "max", "ms/query", "partitions", "records"
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:>6}  {:<12} {:>8.4} {:>8.4} {:>8.4} {:>10.2} {:>10.2} {:>12.1}",
                s.k,
                s.mode.to_string(),
                s.mean_recall,
                s.min_recall,
                s.max_recall,
                s.mean_secs * 1e3,
                s.mean_partitions,
                s.mean_records
            );
        }
        out
    }
}

/// Records at the given global positions (file order, then record order),
/// returned in the order of `positions`.
pub fn load_records(files: &[PathBuf], positions: &[u64]) -> Result<Vec<DataSeries>> {
    let mut starts = Vec::with_capacity(files.len());
    let mut total = 0u64;
    for f in files {
        starts.push(total);
        total += read_dataset_header(f)?.count;
    }
    if let Some(bad) = positions.iter().find(|p| **p >= total) {
        return Err(Error::Input(format!("record position {bad} beyond dataset of {total}")));
    }
    let mut out: Vec<Option<DataSeries>> = vec![None; positions.len()];
    for (i, f) in files.iter().enumerate() {
        let end = starts.get(i + 1).copied().unwrap_or(total);
        let wanted: Vec<usize> = (0..positions.len())
            .filter(|&j| positions[j] >= starts[i] && positions[j] < end)
            .collect();
        if wanted.is_empty() {
            continue;
        }
        let rows = read_dataset_file(f)?;
        for j in wanted {
            out[j] = Some(rows[(positions[j] - starts[i]) as usize].clone());
        }
    }
    Ok(out.into_iter().map(|r| r.expect("every position resolved")).collect())
}

fn total_records(files: &[PathBuf]) -> Result<u64> {
    files
        .iter()
        .map(|f| read_dataset_header(f).map(|h| h.count))
        .sum()
}

/// Draws `spec.queries` records from `data_files`, answers each with every
/// mode and every k, and scores the answers against the exact scan.
pub fn run_bench(
    spec: &BenchSpec,
    index: &ClimberIndex,
    data_files: &[PathBuf],
    build: Option<BuildSummary>,
) -> Result<BenchReport> {
    spec.validate()?;
    let total = total_records(data_files)?;
    if (spec.queries as u64) > total {
        return Err(Error::Config(format!(
            "{} queries requested from a dataset of {total} records",
            spec.queries
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let positions: Vec<u64> = rand::seq::index::sample(&mut rng, total as usize, spec.queries)
        .into_iter()
        .map(|p| p as u64)
        .collect();
    let mut queries = load_records(data_files, &positions)?;
    if let Some(sigma) = spec.noise.filter(|s| *s > 0.0) {
        let dist = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
        for (i, q) in queries.iter_mut().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64 + 1);
            let values = q.values().iter().map(|v| v + dist.sample(&mut rng)).collect();
            *q = DataSeries::new(q.id, values)?;
        }
    }

    let max_k = *spec.ks.iter().max().expect("validated");
    let per_query: Vec<Vec<QueryRow>> = queries
        .par_iter()
        .enumerate()
        .map(|(qi, series)| {
            let truth = index.scan_exact(&QuerySpec::new(series.clone(), max_k, QueryMode::Scan)?)?;
            let truth = truth.ids();
            let mut rows = Vec::new();
            for &k in &spec.ks {
                let exact = &truth[..k.min(truth.len())];
                for &mode in &spec.modes {
                    let q = QuerySpec::new(series.clone(), k, mode)?;
                    let start = Instant::now();
                    let res = index.query(&q)?;
                    let elapsed_secs = start.elapsed().as_secs_f64();
                    rows.push(QueryRow {
                        query: qi,
                        record_id: series.id,
                        k,
                        mode,
                        recall: recall(&res.ids(), exact)?,
                        partitions_accessed: res.partitions_accessed,
                        records_examined: res.records_examined,
                        elapsed_secs,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<QueryRow> = per_query.into_iter().flatten().collect();

    let mut summaries = Vec::new();
    for &k in &spec.ks {
        for &mode in &spec.modes {
            let sel: Vec<&QueryRow> = rows.iter().filter(|r| r.k == k && r.mode == mode).collect();
            let n = sel.len() as f64;
            let mean = |f: &dyn Fn(&QueryRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / n;
            summaries.push(ModeSummary {
                k,
                mode,
                mean_recall: mean(&|r| r.recall),
                min_recall: sel.iter().map(|r| r.recall).fold(f64::INFINITY, f64::min),
                max_recall: sel.iter().map(|r| r.recall).fold(f64::NEG_INFINITY, f64::max),
                mean_secs: mean(&|r| r.elapsed_secs),
                mean_partitions: mean(&|r| r.partitions_accessed as f64),
                max_partitions: sel.iter().map(|r| r.partitions_accessed).max().unwrap_or(0),
                mean_records: mean(&|r| r.records_examined as f64),
            });
        }
    }

    let sk = index.skeleton();
    Ok(BenchReport {
        spec: spec.clone(),
        config: sk.config.clone(),
        index: IndexShape {
            series_len: sk.series_len,
            groups: sk.group_count(),
            trie_nodes: sk.trie_node_count(),
            partitions: sk.partition_count(),
        },
        build,
        summaries,
        rows,
    })
}
