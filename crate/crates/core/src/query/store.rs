//! Access to the partition files of a built index.

use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use crate::build::{IndexSkeleton, PartitionId};
use crate::error::{Error, Result};
use crate::series::DataSeries;
use crate::signature::PivotId;
use crate::storage::{encode_path, partition_file_name, path_has_prefix, PartitionFile};

/// Which records of a partition to read.
#[derive(Debug, Clone, Copy)]
pub enum Selection<'a> {
    All,
    Clusters(&'a [Vec<PivotId>]),
}

struct Loaded {
    file: PartitionFile,
    records: Vec<DataSeries>,
}

/// Reads partitions from an index directory.
///
/// With caching enabled each partition is decoded once and kept in memory,
/// which benchmarks use to keep repeated queries cheap. Without it every
/// call goes to disk.
pub struct PartitionStore {
    dir: PathBuf,
    series_len: usize,
    ids: Vec<PartitionId>,
    cache: Option<Vec<OnceLock<Arc<Loaded>>>>,
}

impl std::fmt::Debug for PartitionStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PartitionStore")
            .field("dir", &self.dir)
            .field("partitions", &self.ids.len())
            .field("cached", &self.cache.is_some())
            .finish()
    }
}

fn matches(path: &str, prefixes: &[String]) -> bool {
    prefixes.iter().any(|p| path_has_prefix(path, p))
}

impl PartitionStore {
    pub fn new(dir: impl Into<PathBuf>, skeleton: &IndexSkeleton) -> Self {
        Self {
            dir: dir.into(),
            series_len: skeleton.series_len,
            ids: skeleton.partitions.iter().map(|p| p.id).collect(),
            cache: None,
        }
    }

    pub fn cached(mut self) -> Self {
        self.cache = Some((0..self.ids.len()).map(|_| OnceLock::new()).collect());
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn partition_ids(&self) -> &[PartitionId] {
        &self.ids
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    fn path_of(&self, id: PartitionId) -> PathBuf {
        self.dir.join(partition_file_name(id))
    }

    fn check(&self, id: PartitionId) -> Result<usize> {
        // ids are dense, so the position equals the id
        match self.ids.get(id as usize) {
            Some(&found) if found == id => Ok(id as usize),
            _ => Err(Error::Query(format!("partition {id} is not part of the index"))),
        }
    }

    fn loaded(&self, slot: &OnceLock<Arc<Loaded>>, id: PartitionId) -> Result<Arc<Loaded>> {
        if let Some(hit) = slot.get() {
            return Ok(hit.clone());
        }
        let file = PartitionFile::open(&self.path_of(id), self.series_len)?;
        let records = file.read_all()?;
        Ok(slot.get_or_init(|| Arc::new(Loaded { file, records })).clone())
    }

    /// Opens the header of partition `id`.
    pub fn open(&self, id: PartitionId) -> Result<PartitionFile> {
        let index = self.check(id)?;
        match &self.cache {
            Some(slots) => Ok(self.loaded(&slots[index], id)?.file.clone()),
            None => PartitionFile::open(&self.path_of(id), self.series_len),
        }
    }

    /// Number of records `selection` covers in partition `id`.
    pub fn count(&self, id: PartitionId, selection: Selection<'_>) -> Result<u64> {
        let file = self.open(id)?;
        Ok(match selection {
            Selection::All => file.record_count(),
            Selection::Clusters(paths) => {
                let prefixes: Vec<String> = paths.iter().map(|p| encode_path(p)).collect();
                file.clusters
                    .iter()
                    .filter(|c| matches(&c.path, &prefixes))
                    .map(|c| c.count)
                    .sum()
            }
        })
    }

    /// Calls `f` on every record of partition `id` covered by `selection`.
    pub fn for_each(
        &self,
        id: PartitionId,
        selection: Selection<'_>,
        mut f: impl FnMut(&DataSeries),
    ) -> Result<()> {
        let index = self.check(id)?;
        match &self.cache {
            Some(slots) => {
                let loaded = self.loaded(&slots[index], id)?;
                match selection {
                    Selection::All => loaded.records.iter().for_each(f),
                    Selection::Clusters(paths) => {
                        let prefixes: Vec<String> = paths.iter().map(|p| encode_path(p)).collect();
                        let mut start = 0usize;
                        for c in &loaded.file.clusters {
                            let end = start + c.count as usize;
                            if matches(&c.path, &prefixes) {
                                loaded.records[start..end].iter().for_each(&mut f);
                            }
                            start = end;
                        }
                    }
                }
            }
            None => {
                let file = PartitionFile::open(&self.path_of(id), self.series_len)?;
                let rows = match selection {
                    Selection::All => file.read_all()?,
                    Selection::Clusters(paths) => file.read_clusters(paths)?,
                };
                rows.iter().for_each(f);
            }
        }
        Ok(())
    }
}
