//! Pivots and the dual pivot-permutation-prefix signature.
//!
//! A signature keeps the ids of the `m` pivots nearest to a PAA vector twice:
//! once ordered by proximity (rank-sensitive) and once ordered by id
//! (rank-insensitive). Groups are formed over the second form with the
//! overlap distance; ties are broken on the first form with decay weights.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{squared_distance, PaaVector};

/// Pivot identifier, 1-based and dense.
pub type PivotId = u32;

/// A fixed set of `r` pivots in PAA space, addressed by ids `1..=r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotSet {
    pub seed: u64,
    pivots: Vec<Vec<f64>>,
}

impl PivotSet {
    /// Pivot `i` in `coordinates` receives id `i + 1`.
    pub fn new(coordinates: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let dim = coordinates.first().map_or(0, Vec::len);
        if coordinates.is_empty() || dim == 0 {
            return Err(Error::Build("pivot set must be non-empty".into()));
        }
        if coordinates.iter().any(|p| p.len() != dim) {
            return Err(Error::Build("pivots must share one dimension".into()));
        }
        Ok(Self {
            seed,
            pivots: coordinates,
        })
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.pivots[0].len()
    }

    pub fn get(&self, id: PivotId) -> Option<&[f64]> {
        (id as usize)
            .checked_sub(1)
            .and_then(|i| self.pivots.get(i))
            .map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (PivotId, &[f64])> {
        self.pivots
            .iter()
            .enumerate()
            .map(|(i, p)| (i as PivotId + 1, p.as_slice()))
    }
}

/// Proximity-ordered pivot ids plus the same ids in ascending order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct P4Signature {
    pub rank_sensitive: Vec<PivotId>,
    pub rank_insensitive: Vec<PivotId>,
}

impl P4Signature {
    pub fn from_rank_sensitive(rank_sensitive: Vec<PivotId>) -> Result<Self> {
        let mut rank_insensitive = rank_sensitive.clone();
        rank_insensitive.sort_unstable();
        if rank_insensitive.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Input(format!(
                "signature {rank_sensitive:?} repeats a pivot"
            )));
        }
        Ok(Self {
            rank_sensitive,
            rank_insensitive,
        })
    }

    pub fn prefix_len(&self) -> usize {
        self.rank_sensitive.len()
    }
}

/// Position weights for rank-sensitive signatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Decay {
    /// `f(i) = lambda^(i-1)`.
    Exponential { lambda: f64 },
    /// `f(i) = (m - i + 1) / m`.
    Linear,
}

impl Default for Decay {
    fn default() -> Self {
        Decay::Exponential { lambda: 0.5 }
    }
}

impl Decay {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Decay::Exponential { lambda } if !(lambda > 0.0 && lambda < 1.0) => Err(
                Error::Config(format!("decay rate {lambda} must lie strictly inside (0, 1)")),
            ),
            _ => Ok(()),
        }
    }

    /// Effective decay rate for prefix length `m`.
    pub fn lambda(&self, m: usize) -> f64 {
        match *self {
            Decay::Exponential { lambda } => lambda,
            Decay::Linear => 1.0 / m as f64,
        }
    }
}

/// Randomly picks `r` distinct members of `sample` as pivots.
pub fn select_pivots(sample: &[PaaVector], r: usize, seed: u64) -> Result<PivotSet> {
    if r == 0 {
        return Err(Error::Config("pivot count must be at least 1".into()));
    }
    if sample.len() < r {
        return Err(Error::Build(format!(
            "sample holds {} vectors but {r} pivots were requested",
            sample.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, sample.len(), r);
    PivotSet::new(
        chosen.iter().map(|i| sample[i].means.clone()).collect(),
        seed,
    )
}

/// Dual signature of a PAA vector over the `m` nearest pivots.
///
/// Equidistant pivots are ordered by ascending id.
pub fn p4_signature(v: &[f64], pivots: &PivotSet, m: usize) -> Result<P4Signature> {
    if m == 0 || m > pivots.len() {
        return Err(Error::Config(format!(
            "prefix length {m} must lie in 1..={}",
            pivots.len()
        )));
    }
    if v.len() != pivots.dim() {
        return Err(Error::Input(format!(
            "vector dimension {} differs from pivot dimension {}",
            v.len(),
            pivots.dim()
        )));
    }
    let mut ranked: Vec<(f64, PivotId)> = pivots
        .iter()
        .map(|(id, p)| (squared_distance(v, p), id))
        .collect();
    let by_distance = |a: &(f64, PivotId), b: &(f64, PivotId)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if m < ranked.len() {
        ranked.select_nth_unstable_by(m - 1, by_distance);
        ranked.truncate(m);
    }
    ranked.sort_unstable_by(by_distance);
    let rank_sensitive: Vec<PivotId> = ranked.into_iter().map(|(_, id)| id).collect();
    let mut rank_insensitive = rank_sensitive.clone();
    rank_insensitive.sort_unstable();
    Ok(P4Signature {
        rank_sensitive,
        rank_insensitive,
    })
}

/// `m` minus the number of shared ids. Both inputs must be sorted ascending.
pub fn overlap_distance(a: &[PivotId], b: &[PivotId]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "signature lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.len() - sorted_intersection_len(a, b))
}

pub(crate) fn sorted_intersection_len(a: &[PivotId], b: &[PivotId]) -> usize {
    let (mut i, mut j, mut shared) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    shared
}

pub fn pivot_weights(m: usize, decay: &Decay) -> Result<Vec<f64>> {
    decay.validate()?;
    Ok((1..=m)
        .map(|i| match *decay {
            Decay::Exponential { lambda } => lambda.powi(i as i32 - 1),
            Decay::Linear => (m - i + 1) as f64 / m as f64,
        })
        .collect())
}

pub fn total_weight(m: usize, decay: &Decay) -> Result<f64> {
    Ok(pivot_weights(m, decay)?.iter().sum())
}

/// Total weight minus the weights of `rank_sensitive` positions whose pivot
/// appears in the (ascending) `centroid` id list.
pub fn weight_distance(
    rank_sensitive: &[PivotId],
    centroid: &[PivotId],
    decay: &Decay,
) -> Result<f64> {
    if rank_sensitive.len() != centroid.len() {
        return Err(Error::Input(format!(
            "signature length {} differs from centroid length {}",
            rank_sensitive.len(),
            centroid.len()
        )));
    }
    let weights = pivot_weights(rank_sensitive.len(), decay)?;
    Ok(weight_distance_with(rank_sensitive, centroid, &weights))
}

pub(crate) fn weight_distance_with(
    rank_sensitive: &[PivotId],
    centroid: &[PivotId],
    weights: &[f64],
) -> f64 {
    let total: f64 = weights.iter().sum();
    let matched: f64 = rank_sensitive
        .iter()
        .zip(weights)
        .filter(|(id, _)| centroid.binary_search(id).is_ok())
        .map(|(_, w)| w)
        .sum();
    total - matched
}
