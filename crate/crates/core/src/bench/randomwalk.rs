//! Random-walk series: cumulative sums of independent random steps.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{DataSeries, RecordId};
use crate::storage::{write_dataset, DATASET_EXTENSION};

/// Distribution of the increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepDistribution {
    Normal { std_dev: f64 },
    /// Uniform on `[-half_width, half_width)`.
    Uniform { half_width: f64 },
}

impl Default for StepDistribution {
    fn default() -> Self {
        Self::Normal { std_dev: 1.0 }
    }
}

impl StepDistribution {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { std_dev } if std_dev.is_finite() && std_dev > 0.0 => Ok(()),
            Self::Uniform { half_width } if half_width.is_finite() && half_width > 0.0 => Ok(()),
            other => Err(Error::Config(format!("invalid step distribution {other:?}"))),
        }
    }

    fn steps(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        match *self {
            Self::Normal { std_dev } => {
                let dist = Normal::new(0.0, std_dev).expect("validated");
                (0..n).map(|_| dist.sample(rng)).collect()
            }
            Self::Uniform { half_width } => {
                let dist = Uniform::new(-half_width, half_width).expect("validated");
                (0..n).map(|_| dist.sample(rng)).collect()
            }
        }
    }
}

/// Parameters of a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomWalk {
    pub count: u64,
    pub length: usize,
    pub seed: u64,
    #[serde(default)]
    pub steps: StepDistribution,
}

impl RandomWalk {
    pub fn new(count: u64, length: usize, seed: u64) -> Self {
        Self {
            count,
            length,
            seed,
            steps: StepDistribution::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 || self.length == 0 {
            return Err(Error::Config("random walk needs count and length of at least 1".into()));
        }
        self.steps.validate()
    }

    /// Series with id `index`. Each index draws from its own stream, so a
    /// record does not depend on how many others are generated.
    pub fn series(&self, index: RecordId) -> DataSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut level = 0.0;
        let values = self
            .steps
            .steps(&mut rng, self.length)
            .into_iter()
            .map(|step| {
                level += step;
                level
            })
            .collect();
        DataSeries::new(index, values).expect("random walk values are finite")
    }

    /// All series, ids `0..count`.
    pub fn generate(&self) -> Result<Vec<DataSeries>> {
        self.validate()?;
        Ok((0..self.count).into_par_iter().map(|i| self.series(i)).collect())
    }

    /// Writes the walk as `part-NNNNN.clbd` files of at most `per_file`
    /// records each, generating shards in parallel.
    pub fn write(&self, dir: &Path, per_file: u64) -> Result<Vec<PathBuf>> {
        self.validate()?;
        if per_file == 0 {
            return Err(Error::Config("records per file must be at least 1".into()));
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let shards = self.count.div_ceil(per_file);
        (0..shards)
            .into_par_iter()
            .map(|shard| {
                let start = shard * per_file;
                let end = (start + per_file).min(self.count);
                let rows: Vec<DataSeries> = (start..end).map(|i| self.series(i)).collect();
                let path = dir.join(format!("part-{shard:05}.{DATASET_EXTENSION}"));
                write_dataset(&path, &rows).map(|_| path)
            })
            .collect()
    }
}

/// `count` random walks of `length` standard-normal steps.
pub fn gen_randomwalk(count: u64, length: usize, seed: u64) -> Result<Vec<DataSeries>> {
    RandomWalk::new(count, length, seed).generate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storage::read_dataset_file;

    fn increments(s: &DataSeries) -> Vec<f64> {
        let v = s.values();
        std::iter::once(v[0]).chain(v.windows(2).map(|w| w[1] - w[0])).collect()
    }

    #[test]
    fn single_value() {
        let rows = gen_randomwalk(1, 1, 3).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].len(), 1);
        assert!(rows[0].values()[0].abs() < 10.0);
    }

    #[test]
    fn records_are_independent_of_count() {
        let a = gen_randomwalk(5, 16, 9).unwrap();
        let b = gen_randomwalk(50, 16, 9).unwrap();
        assert_eq!(a[..], b[..5]);
        assert_ne!(gen_randomwalk(1, 16, 10).unwrap()[0], a[0]);
    }

    #[test]
    fn same_seed_same_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let walk = RandomWalk::new(30, 8, 1);
        let a = walk.write(&dir.path().join("a"), 7).unwrap();
        let b = walk.write(&dir.path().join("b"), 7).unwrap();
        assert_eq!(a.len(), 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
        let back = read_dataset_file(&a[4]).unwrap();
        assert_eq!(back.iter().map(|r| r.id).collect::<Vec<_>>(), vec![28, 29]);
    }

    #[test]
    fn increments_look_standard_normal() {
        let rows = gen_randomwalk(2000, 64, 5).unwrap();
        let steps: Vec<f64> = rows.iter().flat_map(increments).collect();
        let n = steps.len() as f64;
        let mean = steps.iter().sum::<f64>() / n;
        let var = steps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        // five standard errors
        assert!(mean.abs() < 5.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 5.0 * (2.0 / n).sqrt(), "variance {var}");
    }

    #[test]
    fn uniform_steps_stay_in_range() {
        let walk = RandomWalk {
            steps: StepDistribution::Uniform { half_width: 0.5 },
            ..RandomWalk::new(20, 32, 2)
        };
        for s in walk.generate().unwrap() {
            assert!(increments(&s).iter().all(|d| d.abs() <= 0.5 + 1e-12));
        }
    }

    #[test]
    fn rejects_empty_shapes() {
        assert!(gen_randomwalk(0, 4, 1).is_err());
        assert!(gen_randomwalk(4, 0, 1).is_err());
        let bad = RandomWalk {
            steps: StepDistribution::Normal { std_dev: 0.0 },
            ..RandomWalk::new(1, 1, 1)
        };
        assert!(bad.generate().is_err());
    }
}
