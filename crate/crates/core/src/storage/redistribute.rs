//! Routes every input record to its partition and writes the partition files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{encode_record, read_dataset_file};
use super::partition::{encode_path, partition_file_name, PartitionContents};
use crate::build::{signature_of, GroupId, IndexSkeleton, PartitionId, FALLBACK_GROUP};
use crate::error::{Error, Result};
use crate::signature::{PivotId, PivotSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionStats {
    pub id: PartitionId,
    pub group: GroupId,
    pub estimated: u64,
    pub records: u64,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedistributeStats {
    pub records: u64,
    /// Partitions that received at least one record.
    pub partitions_written: usize,
    pub fallback_records: u64,
    /// Records whose walk stopped above a leaf.
    pub default_routed: u64,
    pub partitions: Vec<PartitionStats>,
    /// Seconds spent on PAA, signatures and routing.
    pub conversion_secs: f64,
    /// Seconds spent assembling and writing partition files.
    pub write_secs: f64,
}

struct Routed {
    partition: PartitionId,
    path: Vec<PivotId>,
    to_default: bool,
    group: GroupId,
    bytes: Vec<u8>,
}

/// Record count and encoded records per cluster path.
type Clusters = BTreeMap<Vec<PivotId>, (u64, Vec<u8>)>;

/// Assigns every record of `inputs` to a group, trie node and partition and
/// writes one partition file per skeleton partition into `out_dir`.
///
/// Input files are processed in parallel; within a cluster records keep
/// input order (file order, then record order), so output is byte-stable.
pub fn redistribute(
    inputs: &[PathBuf],
    pivots: &PivotSet,
    skeleton: &IndexSkeleton,
    out_dir: &Path,
) -> Result<RedistributeStats> {
    let cfg = &skeleton.config;
    if pivots.len() != cfg.pivots || pivots.dim() != cfg.segments {
        return Err(Error::Config(format!(
            "pivot set ({} pivots of dimension {}) does not match build config ({} pivots, {} segments)",
            pivots.len(),
            pivots.dim(),
            cfg.pivots,
            cfg.segments
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let convert_start = Instant::now();
    let weights = skeleton.weights();
    let ties = skeleton.tie_breaker();
    let routed: Vec<Vec<Routed>> = inputs
        .par_iter()
        .map(|path| {
            let records = read_dataset_file(path)?;
            records
                .iter()
                .map(|rec| {
                    if rec.len() != skeleton.series_len {
                        return Err(Error::Config(format!(
                            "{}: record {} has length {}, index expects {}",
                            path.display(),
                            rec.id,
                            rec.len(),
                            skeleton.series_len
                        )));
                    }
                    let sig = signature_of(rec.values(), pivots, cfg)?;
                    let place = skeleton.place(&sig, &weights, &ties);
                    let node_is_leaf = skeleton.tries[&place.group]
                        .get(&place.path)
                        .is_some_and(|n| n.is_leaf());
                    let mut bytes = Vec::with_capacity(8 + 4 * rec.len());
                    encode_record(&mut bytes, rec);
                    Ok(Routed {
                        partition: place.partition,
                        path: place.path,
                        to_default: !node_is_leaf,
                        group: place.group,
                        bytes,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let conversion_secs = convert_start.elapsed().as_secs_f64();

    let write_start = Instant::now();
    let mut buckets: BTreeMap<PartitionId, Clusters> = BTreeMap::new();
    let (mut records, mut fallback_records, mut default_routed) = (0u64, 0u64, 0u64);
    for r in routed.into_iter().flatten() {
        records += 1;
        fallback_records += u64::from(r.group == FALLBACK_GROUP);
        default_routed += u64::from(r.to_default);
        let cluster = buckets.entry(r.partition).or_default().entry(r.path).or_default();
        cluster.0 += 1;
        cluster.1.extend_from_slice(&r.bytes);
    }

    let work: Vec<_> = skeleton
        .partitions
        .iter()
        .map(|info| (info, buckets.remove(&info.id).unwrap_or_default()))
        .collect();
    if !buckets.is_empty() {
        return Err(Error::Build("records routed to partitions missing from the directory".into()));
    }
    let partitions: Vec<PartitionStats> = work
        .into_par_iter()
        .map(|(info, bucket)| {
            let clusters: Vec<(String, u64, Vec<u8>)> = bucket
                .into_iter()
                .map(|(path, (count, bytes))| (encode_path(&path), count, bytes))
                .collect();
            let contents = PartitionContents {
                partition: info.id,
                group: info.group,
                clusters,
            };
            contents.write(&out_dir.join(partition_file_name(info.id)))?;
            Ok(PartitionStats {
                id: info.id,
                group: info.group,
                estimated: info.estimated_size,
                records: contents.clusters.iter().map(|c| c.1).sum(),
                clusters: contents.clusters.len(),
            })
        })
        .collect::<Result<_>>()?;

    Ok(RedistributeStats {
        records,
        partitions_written: partitions.iter().filter(|p| p.records > 0).count(),
        fallback_records,
        default_routed,
        partitions,
        conversion_secs,
        write_secs: write_start.elapsed().as_secs_f64(),
    })
}
