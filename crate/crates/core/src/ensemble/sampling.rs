use alloc::vec::Vec;

use rand::Rng;

use super::{EnsembleKind, EnsembleModel};
use crate::error::invalid;
use crate::gan::generate_from;
use crate::numerics::Matrix;
use crate::synth::PointSet;
use crate::{seed, Error, Result};

/// How many samples each member contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SamplingPolicy {
    /// `floor(n / m)` each, remainder to the first members.
    #[default]
    EqualSplit,
    /// Each sample picks a member uniformly at random.
    UniformRandom,
    /// Member `k` draws `n * share_k` (largest-remainder rounding); cascades only.
    StageShares,
}

/// Noise seed for member `i`; member 0 uses `seed` itself.
pub fn member_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Per-member sample counts; always sums to `n`.
pub fn member_counts(ens: &EnsembleModel, n: usize, policy: SamplingPolicy, seed: u64) -> Result<Vec<usize>> {
    let m = ens.len();
    match policy {
        SamplingPolicy::EqualSplit => {
            if n < m {
                return Err(invalid(alloc::format!("equal split needs n >= members ({n} < {m})")));
            }
            Ok((0..m).map(|i| n / m + usize::from(i < n % m)).collect())
        }
        SamplingPolicy::UniformRandom => {
            let mut rng = seed::rng(seed::derive(seed, &[0xa551]));
            let mut counts = alloc::vec![0; m];
            for _ in 0..n {
                counts[rng.random_range(0..m)] += 1;
            }
            Ok(counts)
        }
        SamplingPolicy::StageShares => {
            if ens.kind() != EnsembleKind::Cascade {
                return Err(invalid("stage_shares sampling requires a cascade ensemble"));
            }
            let shares = ens.stage_shares().expect("cascade has shares");
            let exact: Vec<f64> = shares.iter().map(|s| s * n as f64).collect();
            let mut counts: Vec<usize> = exact.iter().map(|&x| libm::floor(x + 1e-9) as usize).collect();
            let assigned: usize = counts.iter().sum();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                let fa = exact[a] - counts[a] as f64;
                let fb = exact[b] - counts[b] as f64;
                fb.total_cmp(&fa).then(a.cmp(&b))
            });
            if assigned > n {
                // rounding tolerance pushed us over; take back from the smallest remainders
                for &i in order.iter().rev().take(assigned - n) {
                    counts[i] -= 1;
                }
            } else {
                for &i in order.iter().cycle().take(n - assigned) {
                    counts[i] += 1;
                }
            }
            Ok(counts)
        }
    }
}

/// Draws `n` points from the ensemble, grouped by member in member order.
pub fn ensemble_generate(ens: &EnsembleModel, n: usize, policy: SamplingPolicy, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::Empty("sample count"));
    }
    let counts = member_counts(ens, n, policy, seed)?;
    let parts = ens
        .members()
        .iter()
        .zip(&counts)
        .enumerate()
        .filter(|(_, (_, &c))| c > 0)
        .map(|(i, (m, &c))| generate_from(&m.generator, c, member_seed(seed, i)).map(|p| p.into_points()))
        .collect::<Result<Vec<Matrix>>>()?;
    Ok(PointSet::new(Matrix::vstack(&parts)?))
}
