use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::PointSet;
use crate::error::invalid;
use crate::numerics::Matrix;
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Covariance {
    /// Per-axis variances.
    Diagonal(Vec<f64>),
    /// Full symmetric positive-definite matrix, row by row.
    Full(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Component {
    pub mean: Vec<f64>,
    pub covariance: Covariance,
    pub weight: f64,
}

impl Component {
    pub fn isotropic(mean: Vec<f64>, sigma: f64, weight: f64) -> Self {
        let d = mean.len();
        Self {
            mean,
            covariance: Covariance::Diagonal(vec![sigma * sigma; d]),
            weight,
        }
    }

    /// Lower-triangular Cholesky factor of the covariance.
    #[allow(clippy::needless_range_loop)]
    fn cholesky(&self, index: usize) -> Result<Matrix> {
        let d = self.mean.len();
        let npd = Error::NotPositiveDefinite { component: index };
        match &self.covariance {
            Covariance::Diagonal(v) => {
                if v.len() != d {
                    return Err(Error::Shape {
                        context: "diagonal covariance",
                        expected: d,
                        found: v.len(),
                    });
                }
                let mut l = Matrix::zeros(d, d);
                for (i, &var) in v.iter().enumerate() {
                    if !(var > 0.0 && var.is_finite()) {
                        return Err(npd);
                    }
                    l.set(i, i, libm::sqrt(var));
                }
                Ok(l)
            }
            Covariance::Full(rows) => {
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Shape {
                        context: "full covariance",
                        expected: d,
                        found: rows.len(),
                    });
                }
                let mut l = Matrix::zeros(d, d);
                for i in 0..d {
                    for j in 0..=i {
                        let (a, b) = (rows[i][j], rows[j][i]);
                        if !a.is_finite() || libm::fabs(a - b) > 1e-12 * (1.0 + libm::fabs(a)) {
                            return Err(npd);
                        }
                        let mut s = a;
                        for k in 0..j {
                            s -= l.get(i, k) * l.get(j, k);
                        }
                        if i == j {
                            if s.is_nan() || s <= 0.0 {
                                return Err(npd);
                            }
                            l.set(i, i, libm::sqrt(s));
                        } else {
                            l.set(i, j, s / l.get(j, j));
                        }
                    }
                }
                Ok(l)
            }
        }
    }
}

/// A finite Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct MixtureSpec {
    pub components: Vec<Component>,
}

impl MixtureSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let spec = Self { components };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    /// Checks dimensions, weights (non-negative, summing to 1 within 1e-12) and
    /// positive definiteness.
    pub fn validate(&self) -> Result<()> {
        self.factors().map(|_| ())
    }

    fn factors(&self) -> Result<Vec<Matrix>> {
        if self.components.is_empty() {
            return Err(Error::Empty("mixture components"));
        }
        let d = self.dim();
        if d == 0 {
            return Err(invalid("mixture dimension must be positive"));
        }
        let mut total = 0.0;
        for c in &self.components {
            if c.mean.len() != d {
                return Err(Error::Shape {
                    context: "mixture component mean",
                    expected: d,
                    found: c.mean.len(),
                });
            }
            if c.weight.is_nan() || c.weight < 0.0 || c.mean.iter().any(|m| !m.is_finite()) {
                return Err(invalid("mixture weights must be >= 0 and means finite"));
            }
            total += c.weight;
        }
        if libm::fabs(total - 1.0) > 1e-12 {
            return Err(invalid(alloc::format!("mixture weights sum to {total}, expected 1")));
        }
        self.components.iter().enumerate().map(|(i, c)| c.cholesky(i)).collect()
    }

    /// `modes` equal-weight isotropic components evenly spaced on a circle.
    pub fn ring(modes: usize, radius: f64, sigma: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Empty("ring modes"));
        }
        let w = 1.0 / modes as f64;
        let components = (0..modes)
            .map(|k| {
                let a = 2.0 * core::f64::consts::PI * k as f64 / modes as f64;
                Component::isotropic(vec![radius * libm::cos(a), radius * libm::sin(a)], sigma, w)
            })
            .collect();
        Self::new(components)
    }

    /// Default ring benchmark: 8 modes, radius 6, sigma 0.3.
    pub fn ring8() -> Self {
        Self::ring(8, 6.0, 0.3).expect("valid preset")
    }

    /// Imbalanced bimodal benchmark: weight 0.9 at (5, 0), 0.1 at (-5, 0), unit covariance.
    pub fn imbalanced_bimodal() -> Self {
        Self::new(vec![
            Component::isotropic(vec![5.0, 0.0], 1.0, 0.9),
            Component::isotropic(vec![-5.0, 0.0], 1.0, 0.1),
        ])
        .expect("valid preset")
    }
}

/// Draws `n` i.i.d. points: a component by weight, then a Gaussian draw.
pub fn sample_mixture(spec: &MixtureSpec, n: usize, seed: u64) -> Result<PointSet> {
    let factors = spec.factors()?;
    if n == 0 {
        return Err(Error::Empty("sample count"));
    }
    let d = spec.dim();
    let weights = WeightedIndex::new(spec.components.iter().map(|c| c.weight))
        .map_err(|_| invalid("mixture weights must not all be zero"))?;
    let mut rng = seed::rng(seed);
    let mut data = Vec::with_capacity(n * d);
    let mut z = vec![0.0; d];
    for _ in 0..n {
        let k = weights.sample(&mut rng);
        let c = &spec.components[k];
        let l = &factors[k];
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for i in 0..d {
            let mut x = c.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                x += l.get(i, j) * zj;
            }
            data.push(x);
        }
    }
    Ok(PointSet::new(Matrix::new(n, d, data)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_mean_near_true_mean() {
        let sigma = 2.0;
        let spec = MixtureSpec::new(vec![Component::isotropic(vec![1.0, -3.0], sigma, 1.0)]).unwrap();
        let n = 4000;
        let p = sample_mixture(&spec, n, 11).unwrap();
        let bound = 4.0 * sigma / libm::sqrt(n as f64);
        for (m, t) in p.mean().iter().zip([1.0, -3.0]) {
            assert!(libm::fabs(m - t) < bound, "{m} vs {t}");
        }
    }

    #[test]
    fn balanced_bimodal_splits_evenly() {
        let spec = MixtureSpec::new(vec![
            Component::isotropic(vec![5.0, 0.0], 1.0, 0.5),
            Component::isotropic(vec![-5.0, 0.0], 1.0, 0.5),
        ])
        .unwrap();
        let n = 2000;
        let p = sample_mixture(&spec, n, 3).unwrap();
        let right = p.points().iter_rows().filter(|r| r[0] > 0.0).count() as f64;
        // binomial(n, 1/2): 3 sigma = 3 * sqrt(n) / 2
        let sd3 = 3.0 * libm::sqrt(n as f64) / 2.0;
        assert!(libm::fabs(right - n as f64 / 2.0) <= sd3, "{right}");
    }

    #[test]
    fn fixed_seed_reproduces() {
        let spec = MixtureSpec::ring8();
        assert_eq!(
            sample_mixture(&spec, 50, 9).unwrap(),
            sample_mixture(&spec, 50, 9).unwrap()
        );
        assert_ne!(
            sample_mixture(&spec, 50, 9).unwrap(),
            sample_mixture(&spec, 50, 10).unwrap()
        );
    }

    #[test]
    fn full_covariance_matches_diagonal_when_diagonal() {
        let diag = MixtureSpec::new(vec![Component {
            mean: vec![0.0, 0.0],
            covariance: Covariance::Diagonal(vec![4.0, 9.0]),
            weight: 1.0,
        }])
        .unwrap();
        let full = MixtureSpec::new(vec![Component {
            mean: vec![0.0, 0.0],
            covariance: Covariance::Full(vec![vec![4.0, 0.0], vec![0.0, 9.0]]),
            weight: 1.0,
        }])
        .unwrap();
        assert_eq!(
            sample_mixture(&diag, 20, 1).unwrap(),
            sample_mixture(&full, 20, 1).unwrap()
        );
    }

    #[test]
    fn rejects_non_spd_and_bad_weights() {
        let bad = MixtureSpec {
            components: vec![Component {
                mean: vec![0.0, 0.0],
                covariance: Covariance::Full(vec![vec![1.0, 2.0], vec![2.0, 1.0]]),
                weight: 1.0,
            }],
        };
        assert_eq!(
            sample_mixture(&bad, 5, 0).unwrap_err(),
            Error::NotPositiveDefinite { component: 0 }
        );
        let asym = MixtureSpec {
            components: vec![Component {
                mean: vec![0.0, 0.0],
                covariance: Covariance::Full(vec![vec![1.0, 0.5], vec![0.0, 1.0]]),
                weight: 1.0,
            }],
        };
        assert!(asym.validate().is_err());
        let weights = MixtureSpec {
            components: vec![Component::isotropic(vec![0.0], 1.0, 0.7)],
        };
        assert!(weights.validate().is_err());
    }

    #[test]
    fn presets_are_valid() {
        assert_eq!(MixtureSpec::ring8().components.len(), 8);
        assert_eq!(MixtureSpec::imbalanced_bimodal().dim(), 2);
    }
}
