use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::build::{build_skeleton, BuildConfig, GroupId, IndexSkeleton, PartitionId};
use crate::error::{Error, Result};
use crate::query::{self, PartitionStore, QueryMode, QueryResult, QuerySpec, RoutingPlan};
use crate::signature::PivotSet;
use crate::storage::{
    load_skeleton, redistribute, sample_partitions, save_skeleton, RedistributeStats,
    PARTITION_EXTENSION, SKELETON_FILE_NAME,
};

/// Wall time of the three build phases, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildTimings {
    /// Sampling input files, pivots, centroids, tries and packing.
    pub sampling_skeleton_secs: f64,
    /// PAA, signatures and routing of every record.
    pub conversion_secs: f64,
    /// Writing the partition files.
    pub redistribution_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub sample_records: usize,
    pub timings: BuildTimings,
    pub stats: RedistributeStats,
}

/// Fill of one partition file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFill {
    pub id: PartitionId,
    pub group: GroupId,
    pub estimated: u64,
    pub records: u64,
    pub clusters: usize,
    /// Stored records over capacity.
    pub fill: f64,
}

/// Structural statistics of a built index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inspection {
    pub series_len: usize,
    pub groups: usize,
    pub trie_nodes: usize,
    pub trie_height: usize,
    /// Leaf count per leaf depth, over all tries.
    pub leaf_depths: BTreeMap<usize, usize>,
    pub records: u64,
    pub partitions: Vec<PartitionFill>,
    /// Cluster paths of one group found in more than one partition file.
    pub split_clusters: usize,
}

impl fmt::Display for Inspection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "series length   {}", self.series_len)?;
        writeln!(f, "groups          {}", self.groups)?;
        writeln!(f, "trie nodes      {}", self.trie_nodes)?;
        writeln!(f, "trie height     {}", self.trie_height)?;
        writeln!(f, "records         {}", self.records)?;
        writeln!(f, "partitions      {}", self.partitions.len())?;
        writeln!(f, "split clusters  {}", self.split_clusters)?;
        writeln!(f, "leaf depths")?;
        for (depth, count) in &self.leaf_depths {
            writeln!(f, "  {depth:>3}  {count}")?;
        }
        writeln!(f, "{:>9} {:>6} {:>10} {:>10} {:>9} {:>7}", "partition", "group", "estimated", "records", "clusters", "fill")?;
        for p in &self.partitions {
            writeln!(
                f,
                "{:>9} {:>6} {:>10} {:>10} {:>9} {:>7.3}",
                p.id, p.group, p.estimated, p.records, p.clusters, p.fill
            )?;
        }
        Ok(())
    }
}

/// A built index on disk: `skeleton.json` plus one file per partition.
#[derive(Debug)]
pub struct ClimberIndex {
    dir: PathBuf,
    pivots: PivotSet,
    skeleton: IndexSkeleton,
    store: PartitionStore,
}

impl ClimberIndex {
    /// Samples `inputs`, builds the skeleton and redistributes every record
    /// into `dir`. Partition files left there by an earlier build are removed.
    pub fn build(inputs: &[PathBuf], dir: &Path, cfg: &BuildConfig) -> Result<(Self, BuildSummary)> {
        cfg.validate()?;
        if inputs.is_empty() {
            return Err(Error::Input("no dataset files given".into()));
        }
        let start = Instant::now();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().is_some_and(|ext| ext == PARTITION_EXTENSION) {
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
            }
        }

        let sample = sample_partitions(inputs, cfg.alpha, cfg.seed)?;
        let (pivots, skeleton) = build_skeleton(&sample, cfg)?;
        save_skeleton(&dir.join(SKELETON_FILE_NAME), &pivots, &skeleton)?;
        let sampling_skeleton_secs = start.elapsed().as_secs_f64();

        let stats = redistribute(inputs, &pivots, &skeleton, dir)?;
        let timings = BuildTimings {
            sampling_skeleton_secs,
            conversion_secs: stats.conversion_secs,
            redistribution_secs: stats.write_secs,
            total_secs: start.elapsed().as_secs_f64(),
        };
        let summary = BuildSummary {
            sample_records: sample.len(),
            timings,
            stats,
        };
        let store = PartitionStore::new(dir, &skeleton);
        Ok((
            Self {
                dir: dir.to_path_buf(),
                pivots,
                skeleton,
                store,
            },
            summary,
        ))
    }

    pub fn open(dir: &Path) -> Result<Self> {
        let (pivots, skeleton) = load_skeleton(&dir.join(SKELETON_FILE_NAME))?;
        let store = PartitionStore::new(dir, &skeleton);
        Ok(Self {
            dir: dir.to_path_buf(),
            pivots,
            skeleton,
            store,
        })
    }

    /// Keeps partitions in memory after their first read.
    pub fn cached(mut self) -> Self {
        self.store = PartitionStore::new(&self.dir, &self.skeleton).cached();
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn pivots(&self) -> &PivotSet {
        &self.pivots
    }

    pub fn skeleton(&self) -> &IndexSkeleton {
        &self.skeleton
    }

    pub fn store(&self) -> &PartitionStore {
        &self.store
    }

    pub fn plan(&self, q: &QuerySpec) -> Result<RoutingPlan> {
        query::plan(q, &self.skeleton, &self.pivots)
    }

    pub fn query(&self, q: &QuerySpec) -> Result<QueryResult> {
        if q.mode == QueryMode::Scan {
            return self.scan_exact(q);
        }
        let start = Instant::now();
        let plan = self.plan(q)?;
        let mut result = query::execute(&plan, q, &self.store)?;
        result.elapsed_secs = start.elapsed().as_secs_f64();
        Ok(result)
    }

    pub fn scan_exact(&self, q: &QuerySpec) -> Result<QueryResult> {
        query::scan_exact(q, &self.store)
    }

    /// Reads every partition header and summarizes the index.
    pub fn inspect(&self) -> Result<Inspection> {
        let sk = &self.skeleton;
        let mut leaf_depths = BTreeMap::new();
        for root in sk.tries.values() {
            for (path, _) in root.leaves() {
                *leaf_depths.entry(path.len()).or_insert(0) += 1;
            }
        }
        let mut partitions = Vec::with_capacity(sk.partitions.len());
        let mut homes: BTreeMap<(GroupId, String), usize> = BTreeMap::new();
        for info in &sk.partitions {
            let file = self.store.open(info.id)?;
            for c in &file.clusters {
                *homes.entry((info.group, c.path.clone())).or_insert(0) += 1;
            }
            let records = file.record_count();
            partitions.push(PartitionFill {
                id: info.id,
                group: info.group,
                estimated: info.estimated_size,
                records,
                clusters: file.clusters.len(),
                fill: records as f64 / sk.config.capacity as f64,
            });
        }
        Ok(Inspection {
            series_len: sk.series_len,
            groups: sk.group_count(),
            trie_nodes: sk.trie_node_count(),
            trie_height: sk.tries.values().map(|t| t.height()).max().unwrap_or(0),
            leaf_depths,
            records: partitions.iter().map(|p| p.records).sum(),
            partitions,
            split_clusters: homes.values().filter(|n| **n > 1).count(),
        })
    }
}
