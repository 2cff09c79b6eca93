//! Partition files: records clustered contiguously by trie node.
//!
//! Layout, little-endian:
//!
//! ```text
//! "CLBP" | u32 version | u64 partition id | u64 group id | u32 cluster count
//! cluster count x ( u32 path length | path bytes | u64 offset | u64 count )
//! records: u64 id | n x f32
//! ```
//!
//! A cluster path is the trie node's pivot ids joined by `/`; the root is the
//! empty string. Offsets are absolute byte positions of a cluster's first
//! record.

use std::fs::{self, File};
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use crate::build::{GroupId, PartitionId};
use crate::error::{Error, Result};
use crate::series::DataSeries;
use crate::signature::PivotId;

use super::dataset::decode_record;

pub const PARTITION_MAGIC: &[u8; 4] = b"CLBP";
pub const PARTITION_VERSION: u32 = 1;
pub const PARTITION_EXTENSION: &str = "clbp";

pub fn partition_file_name(id: PartitionId) -> String {
    format!("partition-{id:05}.{PARTITION_EXTENSION}")
}

pub fn encode_path(path: &[PivotId]) -> String {
    path.iter()
        .map(|id| id.to_string())
        .collect::<Vec<_>>()
        .join("/")
}

pub fn decode_path(text: &str) -> Option<Vec<PivotId>> {
    if text.is_empty() {
        return Some(Vec::new());
    }
    text.split('/').map(|p| p.parse().ok()).collect()
}

/// True when `prefix` names `path` itself or one of its ancestors.
pub fn path_has_prefix(path: &str, prefix: &str) -> bool {
    prefix.is_empty()
        || path == prefix
        || (path.starts_with(prefix) && path.as_bytes()[prefix.len()] == b'/')
}

/// One entry of the cluster table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterEntry {
    pub path: String,
    pub offset: u64,
    pub count: u64,
}

/// In-memory form of a partition used while writing.
#[derive(Debug, Clone, Default)]
pub struct PartitionContents {
    pub partition: PartitionId,
    pub group: GroupId,
    /// Encoded records per cluster path, in table order.
    pub clusters: Vec<(String, u64, Vec<u8>)>,
}

impl PartitionContents {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut table_len = 4 + 4 + 8 + 8 + 4;
        for (path, _, _) in &self.clusters {
            table_len += 4 + path.len() + 8 + 8;
        }
        let body_len: usize = self.clusters.iter().map(|c| c.2.len()).sum();
        let mut out = Vec::with_capacity(table_len + body_len);
        out.extend_from_slice(PARTITION_MAGIC);
        out.extend_from_slice(&PARTITION_VERSION.to_le_bytes());
        out.extend_from_slice(&u64::from(self.partition).to_le_bytes());
        out.extend_from_slice(&u64::from(self.group).to_le_bytes());
        out.extend_from_slice(&(self.clusters.len() as u32).to_le_bytes());
        let mut offset = table_len as u64;
        for (path, count, bytes) in &self.clusters {
            out.extend_from_slice(&(path.len() as u32).to_le_bytes());
            out.extend_from_slice(path.as_bytes());
            out.extend_from_slice(&offset.to_le_bytes());
            out.extend_from_slice(&count.to_le_bytes());
            offset += bytes.len() as u64;
        }
        for (_, _, bytes) in &self.clusters {
            out.extend_from_slice(bytes);
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// An opened partition file; only the header is held in memory.
#[derive(Debug, Clone)]
pub struct PartitionFile {
    pub path: PathBuf,
    pub partition: PartitionId,
    pub group: GroupId,
    pub clusters: Vec<ClusterEntry>,
    series_len: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| {
            Error::parse(self.path, format!("byte {}", self.pos), format!("truncated {what}"))
        })?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

impl PartitionFile {
    /// Opens `path`, validating the header and cluster table against the
    /// file size for records of `series_len` values.
    pub fn open(path: &Path, series_len: usize) -> Result<Self> {
        let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
        let file_len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        // the table is small; read a generous head and grow if needed
        let mut head = Vec::new();
        let mut want = 4096u64.min(file_len);
        loop {
            head.resize(want as usize, 0);
            file.seek(SeekFrom::Start(0)).map_err(|e| Error::io(path, e))?;
            file.read_exact(&mut head).map_err(|e| Error::io(path, e))?;
            match Self::parse_head(path, &head, series_len, file_len) {
                Err(Error::Parse { message, .. }) if message.starts_with("truncated") && want < file_len => {
                    want = (want * 4).min(file_len);
                }
                other => return other,
            }
        }
    }

    fn parse_head(path: &Path, head: &[u8], series_len: usize, file_len: u64) -> Result<Self> {
        let mut cur = Cursor { bytes: head, pos: 0, path };
        if cur.take(4, "magic")? != PARTITION_MAGIC {
            return Err(Error::parse(path, "header", "bad magic, expected CLBP"));
        }
        let version = cur.u32("version")?;
        if version != PARTITION_VERSION {
            return Err(Error::parse(path, "header", format!("unsupported version {version}")));
        }
        let partition = cur.u64("partition id")? as PartitionId;
        let group = cur.u64("group id")? as GroupId;
        let count = cur.u32("cluster count")?;
        let mut clusters = Vec::with_capacity(count as usize);
        for i in 0..count {
            let len = cur.u32("path length")? as usize;
            let raw = cur.take(len, "path")?;
            let text = std::str::from_utf8(raw)
                .map_err(|_| Error::parse(path, format!("cluster {i}"), "path is not UTF-8"))?;
            if decode_path(text).is_none() {
                return Err(Error::parse(path, format!("cluster {i}"), format!("bad path {text:?}")));
            }
            clusters.push(ClusterEntry {
                path: text.to_owned(),
                offset: cur.u64("offset")?,
                count: cur.u64("count")?,
            });
        }
        let record_len = (8 + 4 * series_len) as u64;
        let mut expected = cur.pos as u64;
        for (i, c) in clusters.iter().enumerate() {
            if c.offset != expected || c.count == 0 {
                return Err(Error::parse(
                    path,
                    format!("cluster {i}"),
                    "cluster offsets must be contiguous, increasing and non-empty",
                ));
            }
            expected += c.count * record_len;
        }
        if expected != file_len {
            return Err(Error::parse(
                path,
                "body",
                format!("file holds {file_len} bytes, cluster table implies {expected}"),
            ));
        }
        Ok(Self {
            path: path.to_path_buf(),
            partition,
            group,
            clusters,
            series_len,
        })
    }

    pub fn record_count(&self) -> u64 {
        self.clusters.iter().map(|c| c.count).sum()
    }

    fn record_len(&self) -> usize {
        8 + 4 * self.series_len
    }

    /// Records stored under `node_path` or any of its descendants. Paths not
    /// present in the table yield an empty result.
    pub fn read_cluster(&self, node_path: &[PivotId]) -> Result<Vec<DataSeries>> {
        self.read_clusters(std::slice::from_ref(&node_path.to_vec()))
    }

    /// Records under any of `node_paths`, each cluster read at most once.
    pub fn read_clusters(&self, node_paths: &[Vec<PivotId>]) -> Result<Vec<DataSeries>> {
        let prefixes: Vec<String> = node_paths.iter().map(|p| encode_path(p)).collect();
        let matching: Vec<&ClusterEntry> = self
            .clusters
            .iter()
            .filter(|c| prefixes.iter().any(|p| path_has_prefix(&c.path, p)))
            .collect();
        self.read_entries(&matching)
    }

    pub fn read_all(&self) -> Result<Vec<DataSeries>> {
        let all: Vec<&ClusterEntry> = self.clusters.iter().collect();
        self.read_entries(&all)
    }

    fn read_entries(&self, entries: &[&ClusterEntry]) -> Result<Vec<DataSeries>> {
        if entries.is_empty() {
            return Ok(Vec::new());
        }
        let mut file = File::open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let mut out = Vec::with_capacity(entries.iter().map(|c| c.count as usize).sum());
        let mut buf = Vec::new();
        for entry in entries {
            buf.resize(entry.count as usize * self.record_len(), 0);
            file.seek(SeekFrom::Start(entry.offset))
                .and_then(|_| file.read_exact(&mut buf))
                .map_err(|e| Error::io(&self.path, e))?;
            for (i, rec) in buf.chunks_exact(self.record_len()).enumerate() {
                out.push(decode_record(rec, 4, &self.path, || {
                    format!("cluster {:?} record {i}", entry.path)
                })?);
            }
        }
        Ok(out)
    }
}
