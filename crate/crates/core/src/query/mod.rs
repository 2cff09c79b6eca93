//! Query routing and answering.
//!
//! A query is turned into a [`RoutingPlan`] by one of the strategies in
//! [`QueryMode`], then [`execute`] reads the planned clusters and ranks the
//! candidates by Euclidean distance. [`scan_exact`] answers exactly by
//! reading everything.

mod route;
mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::build::{signature_of, IndexSkeleton, PartitionId};
use crate::error::{Error, Result};
use crate::series::{squared_distance, DataSeries, RecordId};
use crate::signature::{PivotId, PivotSet};

pub use route::{route_adaptive, route_knn, route_od_smallest, ClusterTarget, MatchedNode, RoutingPlan};
pub use store::{PartitionStore, Selection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum QueryMode {
    Knn,
    /// Adaptive expansion capped at `multiplier` times the base partitions.
    Adaptive { multiplier: usize },
    OdSmallest,
    Scan,
}

impl QueryMode {
    pub const ADAPTIVE_2X: Self = Self::Adaptive { multiplier: 2 };
    pub const ADAPTIVE_4X: Self = Self::Adaptive { multiplier: 4 };

    /// The chain used by benchmarks, from narrowest to widest.
    pub fn chain() -> [Self; 5] {
        [Self::Knn, Self::ADAPTIVE_2X, Self::ADAPTIVE_4X, Self::OdSmallest, Self::Scan]
    }
}

impl Default for QueryMode {
    fn default() -> Self {
        Self::ADAPTIVE_4X
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Knn => f.pad("knn"),
            Self::Adaptive { multiplier } => f.pad(&format!("adaptive{multiplier}x")),
            Self::OdSmallest => f.pad("od-smallest"),
            Self::Scan => f.pad("scan"),
        }
    }
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "knn" => return Ok(Self::Knn),
            "od-smallest" | "od_smallest" | "odsmallest" => return Ok(Self::OdSmallest),
            "scan" => return Ok(Self::Scan),
            _ => {}
        }
        let multiplier = lower
            .strip_prefix("adaptive")
            .and_then(|rest| rest.trim_start_matches(['-', '_']).strip_suffix('x'))
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|n| *n >= 1);
        multiplier
            .map(|multiplier| Self::Adaptive { multiplier })
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown query mode {s:?} (expected knn, adaptive2x, adaptive4x, od-smallest or scan)"
                ))
            })
    }
}

impl From<QueryMode> for String {
    fn from(mode: QueryMode) -> Self {
        mode.to_string()
    }
}

impl TryFrom<String> for QueryMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub series: DataSeries,
    pub k: usize,
    pub mode: QueryMode,
}

impl QuerySpec {
    pub fn new(series: DataSeries, k: usize, mode: QueryMode) -> Result<Self> {
        if k == 0 {
            return Err(Error::Query("k must be at least 1".into()));
        }
        Ok(Self { series, k, mode })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: RecordId,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    pub neighbors: Vec<Neighbor>,
    pub partitions_accessed: usize,
    pub records_examined: u64,
    /// Whether the base clusters were too small and whole partitions were read.
    pub widened: bool,
    pub elapsed_secs: f64,
}

impl QueryResult {
    pub fn ids(&self) -> Vec<RecordId> {
        self.neighbors.iter().map(|n| n.id).collect()
    }
}

fn check_query(q: &QuerySpec, series_len: usize) -> Result<()> {
    if q.k == 0 {
        return Err(Error::Query("k must be at least 1".into()));
    }
    if q.series.len() != series_len {
        return Err(Error::Query(format!(
            "query has length {}, index expects {series_len}",
            q.series.len()
        )));
    }
    Ok(())
}

/// Routes `q` with the strategy named by its mode.
pub fn plan(q: &QuerySpec, skeleton: &IndexSkeleton, pivots: &PivotSet) -> Result<RoutingPlan> {
    check_query(q, skeleton.series_len)?;
    if q.mode == QueryMode::Scan {
        return Ok(RoutingPlan::all_partitions(skeleton));
    }
    let sig = signature_of(q.series.values(), pivots, &skeleton.config)?;
    match q.mode {
        QueryMode::Knn => route_knn(&sig, skeleton),
        QueryMode::Adaptive { multiplier } => route_adaptive(&sig, skeleton, q.k, multiplier),
        QueryMode::OdSmallest => route_od_smallest(&sig, skeleton),
        QueryMode::Scan => unreachable!(),
    }
}

/// Best `k` of `(distance², id)` pairs, ascending by distance then id.
fn top_k(mut scored: Vec<(f64, RecordId)>, k: usize) -> Vec<Neighbor> {
    let order = |a: &(f64, RecordId), b: &(f64, RecordId)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(order);
    scored
        .into_iter()
        .map(|(d2, id)| Neighbor { id, distance: d2.sqrt() })
        .collect()
}

fn rank(
    store: &PartitionStore,
    reads: &BTreeMap<PartitionId, Option<Vec<Vec<PivotId>>>>,
    query: &[f64],
    k: usize,
) -> Result<(Vec<Neighbor>, u64)> {
    let scored: Vec<Vec<(f64, RecordId)>> = reads
        .par_iter()
        .map(|(&id, paths)| {
            let selection = match paths {
                None => Selection::All,
                Some(paths) => Selection::Clusters(paths),
            };
            let mut out = Vec::new();
            store.for_each(id, selection, |rec| {
                out.push((squared_distance(query, rec.values()), rec.id));
            })?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let scored: Vec<(f64, RecordId)> = scored.into_iter().flatten().collect();
    let examined = scored.len() as u64;
    Ok((top_k(scored, k), examined))
}

/// Reads the records named by `plan` and returns the `k` nearest to `q`.
///
/// When the base clusters hold fewer than `k` records, the base partitions
/// are read in full instead.
pub fn execute(plan: &RoutingPlan, q: &QuerySpec, store: &PartitionStore) -> Result<QueryResult> {
    let start = Instant::now();
    check_query(q, store.series_len())?;

    let mut base: BTreeMap<PartitionId, Vec<Vec<PivotId>>> = BTreeMap::new();
    for t in &plan.base {
        base.entry(t.partition).or_default().push(t.path.clone());
    }
    let mut base_count = 0u64;
    for (&id, paths) in &base {
        base_count += store.count(id, Selection::Clusters(paths))?;
    }
    let widened = !base.is_empty() && base_count < q.k as u64;

    let mut full: BTreeSet<PartitionId> = plan.full.iter().copied().collect();
    if widened {
        full.extend(base.keys().copied());
    }
    let mut reads: BTreeMap<PartitionId, Option<Vec<Vec<PivotId>>>> =
        full.iter().map(|&id| (id, None)).collect();
    for t in plan.base.iter().chain(&plan.extra) {
        // a partition read in full needs no cluster list
        if let Some(paths) = reads.entry(t.partition).or_insert_with(|| Some(Vec::new())) {
            if !paths.contains(&t.path) {
                paths.push(t.path.clone());
            }
        }
    }

    let (neighbors, records_examined) = rank(store, &reads, q.series.values(), q.k)?;
    Ok(QueryResult {
        neighbors,
        partitions_accessed: reads.len(),
        records_examined,
        widened,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

/// Exact answer: every partition read in full.
pub fn scan_exact(q: &QuerySpec, store: &PartitionStore) -> Result<QueryResult> {
    let start = Instant::now();
    check_query(q, store.series_len())?;
    let reads = store.partition_ids().iter().map(|&id| (id, None)).collect();
    let (neighbors, records_examined) = rank(store, &reads, q.series.values(), q.k)?;
    Ok(QueryResult {
        neighbors,
        partitions_accessed: store.partition_ids().len(),
        records_examined,
        widened: false,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests;
