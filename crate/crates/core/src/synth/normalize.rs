use alloc::vec::Vec;

use rand::Rng;

use super::{Block, PointSet};
use crate::error::invalid;
use crate::{seed, Error, Result};

#[inline]
fn block_distance(a: &[f64], b: &[f64], block: Block) -> f64 {
    let mut s = 0.0;
    for i in block.range() {
        let d = a[i] - b[i];
        s += d * d;
    }
    libm::sqrt(s)
}

/// Exact mean Euclidean distance over all unordered pairs, within one block.
pub fn mean_pairwise_distance(points: &PointSet, block: Block) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        let a = points.row(i);
        let mut row = 0.0;
        for j in i + 1..n {
            row += block_distance(a, points.row(j), block);
        }
        total += row;
    }
    total / (n * (n - 1) / 2) as f64
}

/// Computes per-block scales on a reference set and divides them out.
///
/// Scales are exact all-pairs means up to `exact_limit` reference points,
/// otherwise means over `sample_pairs` seeded random pairs of distinct points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockNormalizer {
    pub exact_limit: usize,
    pub sample_pairs: usize,
    pub seed: u64,
}

impl Default for BlockNormalizer {
    fn default() -> Self {
        Self {
            exact_limit: 2000,
            sample_pairs: 1_000_000,
            seed: 0x5ca1e,
        }
    }
}

/// Output of [`block_normalize`].
#[derive(Debug, Clone)]
pub struct Normalized {
    pub scales: Vec<f64>,
    pub reference: PointSet,
    pub targets: Vec<PointSet>,
}

impl BlockNormalizer {
    pub fn scales(&self, reference: &PointSet) -> Result<Vec<f64>> {
        let n = reference.len();
        if n < 2 {
            return Err(invalid("normalization reference needs at least two points"));
        }
        let exact = n <= self.exact_limit;
        let mut rng = seed::rng(self.seed);
        let pairs: Vec<(usize, usize)> = if exact {
            Vec::new()
        } else {
            (0..self.sample_pairs)
                .map(|_| {
                    let i = rng.random_range(0..n);
                    let j = (i + rng.random_range(1..n)) % n;
                    (i, j)
                })
                .collect()
        };
        reference
            .blocks()
            .iter()
            .enumerate()
            .map(|(bi, &block)| {
                let s = if exact {
                    mean_pairwise_distance(reference, block)
                } else {
                    let total: f64 = pairs
                        .iter()
                        .map(|&(i, j)| block_distance(reference.row(i), reference.row(j), block))
                        .sum();
                    total / pairs.len() as f64
                };
                if s > 0.0 && s.is_finite() {
                    Ok(s)
                } else {
                    Err(Error::DegenerateBlock { block: bi })
                }
            })
            .collect()
    }

    pub fn normalize(&self, reference: &PointSet, targets: &[PointSet]) -> Result<Normalized> {
        for t in targets {
            if t.blocks() != reference.blocks() {
                return Err(invalid("normalization targets must share the reference block layout"));
            }
        }
        let scales = self.scales(reference)?;
        let rescale = |p: &PointSet| {
            let mut out = p.clone();
            let blocks = p.blocks().to_vec();
            let m = out.points_mut();
            for r in 0..m.rows() {
                let row = m.row_mut(r);
                for (block, &s) in blocks.iter().zip(&scales) {
                    for v in &mut row[block.range()] {
                        *v /= s;
                    }
                }
            }
            out.set_scales(scales.clone());
            out
        };
        Ok(Normalized {
            reference: rescale(reference),
            targets: targets.iter().map(rescale).collect(),
            scales: scales.clone(),
        })
    }
}

/// Normalizes with the default settings.
pub fn block_normalize(reference: &PointSet, targets: &[PointSet]) -> Result<Normalized> {
    BlockNormalizer::default().normalize(reference, targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;
    use crate::synth::{sample_mixture, MixtureSpec};
    use alloc::vec;

    #[test]
    fn two_point_reference() {
        let r = PointSet::from_rows(&[[0.0], [2.0]]).unwrap();
        let out = block_normalize(&r, core::slice::from_ref(&r)).unwrap();
        assert_eq!(out.scales, vec![2.0]);
        assert_eq!(out.targets[0].points().as_slice(), &[0.0, 1.0]);
        assert_eq!(out.reference.scales(), Some(&[2.0][..]));
    }

    #[test]
    fn unit_reference_is_fixed_point() {
        let r = PointSet::from_rows(&[[0.0], [1.0]]).unwrap();
        let t = PointSet::from_rows(&[[0.3], [-7.0]]).unwrap();
        let out = block_normalize(&r, core::slice::from_ref(&t)).unwrap();
        assert_eq!(out.scales, vec![1.0]);
        assert_eq!(out.targets[0].points(), t.points());
    }

    #[test]
    fn sampled_estimate_close_to_exact() {
        let r = sample_mixture(&MixtureSpec::ring8(), 100, 5).unwrap();
        let exact = BlockNormalizer::default().scales(&r).unwrap()[0];
        let sampled = BlockNormalizer {
            exact_limit: 0,
            ..BlockNormalizer::default()
        }
        .scales(&r)
        .unwrap()[0];
        assert!(libm::fabs(sampled / exact - 1.0) < 0.01, "{sampled} vs {exact}");
    }

    #[test]
    fn degenerate_block_named() {
        let m = Matrix::from_rows(&[[1.0, 0.0], [1.0, 5.0], [1.0, 2.0]]).unwrap();
        let blocks = vec![Block { offset: 0, width: 1 }, Block { offset: 1, width: 1 }];
        let p = PointSet::with_blocks(m, blocks, None).unwrap();
        assert_eq!(
            block_normalize(&p, &[]).unwrap_err(),
            Error::DegenerateBlock { block: 0 }
        );
    }

    #[test]
    fn layout_mismatch_rejected() {
        let a = PointSet::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let b = PointSet::with_blocks(
            a.points().clone(),
            vec![Block { offset: 0, width: 1 }, Block { offset: 1, width: 1 }],
            None,
        )
        .unwrap();
        assert!(block_normalize(&a, &[b]).is_err());
    }
}
