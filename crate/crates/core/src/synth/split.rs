use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};

use super::PointSet;
use crate::error::invalid;
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.train_fraction, self.test_fraction);
        if !(a > 0.0 && b > 0.0 && a + b <= 1.0 + 1e-12) {
            return Err(invalid("split fractions must be positive and sum to at most 1"));
        }
        Ok(())
    }

    /// `(train, test)` sizes for `n` points.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize)> {
        self.validate()?;
        let train = libm::round(self.train_fraction * n as f64) as usize;
        let test = libm::round(self.test_fraction * n as f64) as usize;
        if train == 0 {
            return Err(Error::Empty("train split"));
        }
        if test == 0 {
            return Err(Error::Empty("test split"));
        }
        if train + test > n {
            return Err(invalid("split fractions do not fit the data"));
        }
        Ok((train, test))
    }
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: PointSet,
    pub test: PointSet,
    /// Row indices into the source set, in the order they appear in `train`.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Seeded shuffle, then the first rows go to train and the next to test.
pub fn train_test_split(data: &PointSet, split: &SplitSpec) -> Result<Split> {
    let (n_train, n_test) = split.sizes(data.len())?;
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut seed::rng(split.seed));
    let train_indices = order[..n_train].to_vec();
    let test_indices = order[n_train..n_train + n_test].to_vec();
    Ok(Split {
        train: data.select(&train_indices),
        test: data.select(&test_indices),
        train_indices,
        test_indices,
    })
}

/// `n` distinct rows drawn uniformly without replacement, kept in source order.
pub fn subsample(data: &PointSet, n: usize, seed: u64) -> Result<PointSet> {
    if n > data.len() {
        return Err(invalid(alloc::format!(
            "cannot draw {n} distinct rows from {}",
            data.len()
        )));
    }
    let mut picked = index::sample(&mut seed::rng(seed), data.len(), n).into_vec();
    picked.sort_unstable();
    Ok(data.select(&picked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{sample_mixture, MixtureSpec};

    #[test]
    fn sizes_follow_fractions() {
        let data = sample_mixture(&MixtureSpec::ring8(), 1000, 1).unwrap();
        let spec = SplitSpec {
            train_fraction: 0.8,
            test_fraction: 0.2,
            seed: 4,
        };
        let s = train_test_split(&data, &spec).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (800, 200));
        let again = train_test_split(&data, &spec).unwrap();
        assert_eq!(s.train_indices, again.train_indices);
        assert_eq!(s.train, again.train);
        assert_eq!(s.train.row(0), data.row(s.train_indices[0]));
    }

    #[test]
    fn empty_side_is_an_error() {
        let data = sample_mixture(&MixtureSpec::ring8(), 3, 1).unwrap();
        let spec = SplitSpec {
            train_fraction: 0.9,
            test_fraction: 0.1,
            seed: 0,
        };
        assert_eq!(train_test_split(&data, &spec).unwrap_err(), Error::Empty("test split"));
    }

    #[test]
    fn subsample_draws_distinct_rows() {
        let data = PointSet::new(crate::numerics::Matrix::new(50, 1, (0..50).map(f64::from).collect()).unwrap());
        let s = subsample(&data, 20, 3).unwrap();
        let v: Vec<f64> = s.points().as_slice().to_vec();
        assert_eq!(v.len(), 20);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(subsample(&data, 20, 3).unwrap(), s);
        assert_eq!(subsample(&data, 50, 9).unwrap(), data);
        assert!(subsample(&data, 51, 0).is_err());
    }
}
