//! Raw data series, Euclidean distance, PAA reduction and recall.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RecordId = u64;

/// A fixed-length, finite, real-valued sequence with a unique id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSeries {
    pub id: RecordId,
    values: Vec<f64>,
}

impl DataSeries {
    pub fn new(id: RecordId, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input(format!("series {id} is empty")));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "series {id} has a non-finite value at position {pos}"
            )));
        }
        Ok(Self { id, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A collection of series sharing one length, with unique ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    series: Vec<DataSeries>,
    length: usize,
}

impl Dataset {
    pub fn new(series: Vec<DataSeries>) -> Result<Self> {
        let length = series.first().map_or(0, DataSeries::len);
        let mut seen = HashSet::with_capacity(series.len());
        for s in &series {
            if s.len() != length {
                return Err(Error::Input(format!(
                    "series {} has length {}, expected {length}",
                    s.id,
                    s.len()
                )));
            }
            if !seen.insert(s.id) {
                return Err(Error::Input(format!("duplicate series id {}", s.id)));
            }
        }
        Ok(Self { series, length })
    }

    /// Series length `n`; zero for an empty dataset.
    pub fn series_len(&self) -> usize {
        self.length
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DataSeries> {
        self.series.iter()
    }

    pub fn as_slice(&self) -> &[DataSeries] {
        &self.series
    }

    pub fn into_inner(self) -> Vec<DataSeries> {
        self.series
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a DataSeries;
    type IntoIter = std::slice::Iter<'a, DataSeries>;

    fn into_iter(self) -> Self::IntoIter {
        self.series.iter()
    }
}

/// Segment means of one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaaVector {
    pub source_id: RecordId,
    pub means: Vec<f64>,
}

impl PaaVector {
    pub fn dim(&self) -> usize {
        self.means.len()
    }
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(squared_distance(a, b).sqrt())
}

/// Squared Euclidean distance; callers guarantee equal lengths.
#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Piecewise aggregate approximation into `w` segments.
///
/// When `w` does not divide `n`, the first `n % w` segments hold one extra value.
pub fn paa(x: &DataSeries, w: usize) -> Result<PaaVector> {
    Ok(PaaVector {
        source_id: x.id,
        means: paa_values(x.values(), w)?,
    })
}

pub(crate) fn paa_values(values: &[f64], w: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if w == 0 || w > n {
        return Err(Error::Config(format!(
            "segment count {w} must lie in 1..={n}"
        )));
    }
    let base = n / w;
    let extra = n % w;
    let mut means = Vec::with_capacity(w);
    let mut start = 0;
    for seg in 0..w {
        let len = base + usize::from(seg < extra);
        let sum: f64 = values[start..start + len].iter().sum();
        means.push(sum / len as f64);
        start += len;
    }
    Ok(means)
}

/// Fraction of `exact` ids present in `approx`.
pub fn recall(approx: &[RecordId], exact: &[RecordId]) -> Result<f64> {
    let exact: HashSet<RecordId> = exact.iter().copied().collect();
    if exact.is_empty() {
        return Err(Error::Input("exact answer set is empty".into()));
    }
    let approx: HashSet<RecordId> = approx.iter().copied().collect();
    let hits = approx.intersection(&exact).count();
    Ok(hits as f64 / exact.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(values: &[f64]) -> DataSeries {
        DataSeries::new(0, values.to_vec()).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(euclidean_distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert_eq!(euclidean_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        let d = euclidean_distance(&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!((d - 1.732_050_8).abs() < 1e-7);
    }

    #[test]
    fn distance_rejects_length_mismatch() {
        assert!(matches!(
            euclidean_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn series_rejects_nan_and_empty() {
        assert!(DataSeries::new(1, vec![]).is_err());
        assert!(DataSeries::new(1, vec![0.0, f64::NAN]).is_err());
        assert!(DataSeries::new(1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn dataset_rejects_mixed_lengths_and_duplicate_ids() {
        let a = DataSeries::new(1, vec![1.0, 2.0]).unwrap();
        let b = DataSeries::new(2, vec![1.0]).unwrap();
        assert!(Dataset::new(vec![a.clone(), b]).is_err());
        assert!(Dataset::new(vec![a.clone(), a]).is_err());
    }

    #[test]
    fn paa_examples() {
        assert_eq!(paa(&series(&[5.0; 4]), 2).unwrap().means, vec![5.0, 5.0]);
        assert_eq!(
            paa(&series(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), 3).unwrap().means,
            vec![1.5, 3.5, 5.5]
        );
        // n = 12 reduced to w = 4
        let x = series(&(0..12).map(f64::from).collect::<Vec<_>>());
        assert_eq!(paa(&x, 4).unwrap().dim(), 4);
    }

    #[test]
    fn paa_uneven_segments_front_loaded() {
        // n = 7, w = 3 -> segment lengths 3, 2, 2
        let x = series(&[1.0, 2.0, 3.0, 10.0, 20.0, 5.0, 7.0]);
        assert_eq!(paa(&x, 3).unwrap().means, vec![2.0, 15.0, 6.0]);
    }

    #[test]
    fn paa_rejects_bad_segment_count() {
        let x = series(&[1.0, 2.0]);
        assert!(matches!(paa(&x, 0), Err(Error::Config(_))));
        assert!(matches!(paa(&x, 3), Err(Error::Config(_))));
    }

    #[test]
    fn recall_examples() {
        assert_eq!(recall(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(recall(&[4, 5], &[1, 2]).unwrap(), 0.0);
        let exact: Vec<u64> = (0..500).collect();
        let approx: Vec<u64> = (250..750).collect();
        assert_eq!(recall(&approx, &exact).unwrap(), 0.5);
        assert!(recall(&[1], &[]).is_err());
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            v in proptest::collection::vec((-1e3..1e3f64, -1e3..1e3f64, -1e3..1e3f64), 1..16)
        ) {
            let a: Vec<f64> = v.iter().map(|t| t.0).collect();
            let b: Vec<f64> = v.iter().map(|t| t.1).collect();
            let c: Vec<f64> = v.iter().map(|t| t.2).collect();
            let ab = euclidean_distance(&a, &b).unwrap();
            let ba = euclidean_distance(&b, &a).unwrap();
            let bc = euclidean_distance(&b, &c).unwrap();
            let ac = euclidean_distance(&a, &c).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert_eq!(euclidean_distance(&a, &a).unwrap(), 0.0);
            prop_assert!(ac <= ab + bc + 1e-9 * (1.0 + ab + bc));
            if a != b {
                prop_assert!(ab > 0.0);
            }
        }

        #[test]
        fn paa_is_linear_and_identity_at_full_width(
            v in proptest::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 1..40),
            w_seed in 0usize..1000,
        ) {
            let n = v.len();
            let w = 1 + w_seed % n;
            let x = series(&v.iter().map(|t| t.0).collect::<Vec<_>>());
            let y = series(&v.iter().map(|t| t.1).collect::<Vec<_>>());
            let z = series(&v.iter().map(|t| (t.0 + t.1) / 2.0).collect::<Vec<_>>());
            let px = paa(&x, w).unwrap().means;
            let py = paa(&y, w).unwrap().means;
            let pz = paa(&z, w).unwrap().means;
            prop_assert_eq!(pz.len(), w);
            for i in 0..w {
                let expected = (px[i] + py[i]) / 2.0;
                prop_assert!((pz[i] - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
            }
            prop_assert_eq!(paa(&x, n).unwrap().means, x.values().to_vec());
        }

        #[test]
        fn recall_monotone_in_correct_ids(
            exact in proptest::collection::hash_set(0u64..200, 1..30),
            approx in proptest::collection::vec(0u64..200, 0..30),
        ) {
            let exact: Vec<u64> = exact.into_iter().collect();
            let before = recall(&approx, &exact).unwrap();
            let mut more = approx.clone();
            more.push(exact[0]);
            prop_assert!(recall(&more, &exact).unwrap() >= before);
        }
    }
}
