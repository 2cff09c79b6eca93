//! JSON persistence for pivots and the index skeleton.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::build::{BuildConfig, Centroid, GroupId, IndexSkeleton, PartitionId, PartitionInfo, TrieNode};
use crate::error::{Error, Result};
use crate::signature::{PivotId, PivotSet};

pub const SKELETON_MAGIC: &str = "CLBS";
pub const SKELETON_VERSION: u32 = 1;
pub const SKELETON_FILE_NAME: &str = "skeleton.json";

#[derive(Debug, Serialize, Deserialize)]
struct PivotEntry {
    id: PivotId,
    coordinates: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PivotsDoc {
    seed: u64,
    pivots: Vec<PivotEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SkeletonDoc {
    magic: String,
    version: u32,
    series_len: usize,
    config: BuildConfig,
    pivots: PivotsDoc,
    centroids: Vec<Centroid>,
    tries: BTreeMap<GroupId, TrieNode>,
    default_partitions: BTreeMap<GroupId, PartitionId>,
    partitions: Vec<PartitionInfo>,
}

pub fn serialize_skeleton(pivots: &PivotSet, skeleton: &IndexSkeleton) -> Result<String> {
    let doc = SkeletonDoc {
        magic: SKELETON_MAGIC.into(),
        version: SKELETON_VERSION,
        series_len: skeleton.series_len,
        config: skeleton.config.clone(),
        pivots: PivotsDoc {
            seed: pivots.seed,
            pivots: pivots
                .iter()
                .map(|(id, p)| PivotEntry { id, coordinates: p.to_vec() })
                .collect(),
        },
        centroids: skeleton.centroids.clone(),
        tries: skeleton.tries.clone(),
        default_partitions: skeleton.default_partitions.clone(),
        partitions: skeleton.partitions.clone(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Build(format!("serializing skeleton: {e}")))
}

/// Parses a skeleton document. `origin` only labels errors.
pub fn deserialize_skeleton(text: &str, origin: &Path) -> Result<(PivotSet, IndexSkeleton)> {
    let doc: SkeletonDoc = serde_json::from_str(text).map_err(|e| {
        Error::parse(origin, format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    if doc.magic != SKELETON_MAGIC {
        return Err(Error::parse(
            origin,
            "magic",
            format!("expected {SKELETON_MAGIC:?}, found {:?}", doc.magic),
        ));
    }
    if doc.version != SKELETON_VERSION {
        return Err(Error::parse(origin, "version", format!("unsupported version {}", doc.version)));
    }
    for (i, entry) in doc.pivots.pivots.iter().enumerate() {
        if entry.id as usize != i + 1 {
            return Err(Error::parse(
                origin,
                format!("pivots[{i}]"),
                format!("expected id {}, found {}", i + 1, entry.id),
            ));
        }
    }
    let pivots = PivotSet::new(
        doc.pivots.pivots.into_iter().map(|p| p.coordinates).collect(),
        doc.pivots.seed,
    )
    .map_err(|e| Error::parse(origin, "pivots", e.to_string()))?;
    let skeleton = IndexSkeleton {
        config: doc.config,
        series_len: doc.series_len,
        centroids: doc.centroids,
        tries: doc.tries,
        default_partitions: doc.default_partitions,
        partitions: doc.partitions,
    };
    Ok((pivots, skeleton))
}

pub fn save_skeleton(path: &Path, pivots: &PivotSet, skeleton: &IndexSkeleton) -> Result<()> {
    fs::write(path, serialize_skeleton(pivots, skeleton)?).map_err(|e| Error::io(path, e))
}

pub fn load_skeleton(path: &Path) -> Result<(PivotSet, IndexSkeleton)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    deserialize_skeleton(&text, path)
}
