//! Approximate kNN similarity search over fixed-length data series.
//!
//! Every series is reduced with PAA and described by a dual pivot signature:
//! the `m` nearest pivots in proximity order (rank-sensitive) and the same ids
//! in id order (rank-insensitive). The rank-insensitive form clusters series
//! into coarse groups; a per-group trie over the rank-sensitive form splits
//! oversized groups into capacity-bounded partitions that are packed into
//! on-disk files.
//!
//! The crate is organized bottom-up:
//!
//! - [`series`]: data series, Euclidean distance, PAA, recall.
//! - [`signature`]: pivots, dual signatures, overlap and weight distances.
//! - [`build`]: centroid discovery, group assignment, tries and leaf packing.
//! - [`storage`]: dataset files, partition files, skeleton JSON, redistribution.
//! - [`query`]: routing strategies, localized ranking and the exact scan.
//! - [`bench`]: random-walk generator and the recall/time harness.

pub mod bench;
pub mod build;
pub mod error;
pub mod query;
pub mod series;
pub mod signature;
pub mod storage;

mod index;

pub use error::{Error, Result};
pub use index::{BuildSummary, BuildTimings, ClimberIndex, Inspection, PartitionFill};
