//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use ganlab_core::numerics::{mlp_backward, mlp_forward, Activation, Matrix, MlpParams};
use ganlab_core::seed;
use ganlab_core::synth::{Block, PointSet};
use rand::Rng;
use rand_distr::StandardNormal;

pub const STEP: f64 = 1e-5;
pub const TOL: f64 = 1e-4;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Straightforward forward pass, independent of the library's batched kernels.
/// Returns the output and every pre-activation.
#[allow(clippy::needless_range_loop)]
pub fn naive_forward(p: &MlpParams, x: &Matrix) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut outs = Vec::new();
    let mut pres = Vec::new();
    for r in 0..x.rows() {
        let mut v = x.row(r).to_vec();
        for l in p.layers() {
            let w = l.weight();
            let mut next = vec![0.0; l.out_dim()];
            for o in 0..l.out_dim() {
                let mut z = l.bias()[o];
                for i in 0..l.in_dim() {
                    z += w.get(o, i) * v[i];
                }
                pres.push((l.activation(), z));
                next[o] = match l.activation() {
                    Activation::Relu => z.max(0.0),
                    Activation::LeakyRelu(s) => {
                        if z > 0.0 {
                            z
                        } else {
                            s * z
                        }
                    }
                    Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
                    Activation::Identity => z,
                };
            }
            v = next;
        }
        outs.push(v);
    }
    let near_kink = pres
        .iter()
        .filter(|(a, _)| matches!(a, Activation::Relu | Activation::LeakyRelu(_)))
        .map(|(_, z)| z.abs())
        .collect();
    (outs, near_kink)
}

pub fn weighted_sum(p: &MlpParams, x: &Matrix, u: &Matrix) -> f64 {
    let (outs, _) = naive_forward(p, x);
    outs.iter()
        .enumerate()
        .map(|(r, o)| o.iter().zip(u.row(r)).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

pub fn random_matrix(rng: &mut seed::Rng, rows: usize, cols: usize) -> Matrix {
    let d = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::new(rows, cols, d).unwrap()
}

pub fn random_case(case_seed: u64) -> (MlpParams, Matrix, Matrix) {
    let mut rng = seed::rng(case_seed);
    loop {
        let depth = rng.random_range(1..=3);
        let dims: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..=8)).collect();
        let acts: Vec<Activation> = (0..depth)
            .map(|_| match rng.random_range(0..4) {
                0 => Activation::Relu,
                1 => Activation::LeakyRelu(rng.random_range(0.05..0.5)),
                2 => Activation::Sigmoid,
                _ => Activation::Identity,
            })
            .collect();
        let params = MlpParams::init(&dims, &acts, 0.8, &mut rng).unwrap();
        let batch = rng.random_range(1..=4);
        let x = random_matrix(&mut rng, batch, dims[0]);
        let u = random_matrix(&mut rng, batch, dims[depth]);
        // keep away from ReLU kinks, where finite differences are meaningless
        let (_, kinks) = naive_forward(&params, &x);
        if kinks.iter().all(|&z| z > 1e-3) {
            return (params, x, u);
        }
    }
}

/// Max relative error over every parameter and input entry.
pub fn fd_check(case_seed: u64) -> f64 {
    let (params, x, u) = random_case(case_seed);
    let cache = mlp_forward(&params, &x).unwrap();
    let (grads, dx) = mlp_backward(&params, &cache, &u).unwrap();
    assert!(grads.is_congruent(&params));
    assert_eq!((dx.rows(), dx.cols()), (x.rows(), x.cols()));
    let analytic = grads.flatten();

    let mut worst: f64 = 0.0;
    let mut idx = 0;
    for li in 0..params.layers().len() {
        let nw = params.layers()[li].weight().as_slice().len();
        let nb = params.layers()[li].bias().len();
        for k in 0..nw + nb {
            let bump = |delta: f64| {
                let mut p = params.clone();
                let l = &mut p.layers_mut()[li];
                if k < nw {
                    l.weight_mut()[k] += delta;
                } else {
                    l.bias_mut()[k - nw] += delta;
                }
                weighted_sum(&p, &x, &u)
            };
            let numeric = (bump(STEP) - bump(-STEP)) / (2.0 * STEP);
            worst = worst.max(rel_err(analytic[idx], numeric));
            idx += 1;
        }
    }
    for k in 0..x.as_slice().len() {
        let bump = |delta: f64| {
            let mut xx = x.clone();
            xx.as_mut_slice()[k] += delta;
            weighted_sum(&params, &xx, &u)
        };
        let numeric = (bump(STEP) - bump(-STEP)) / (2.0 * STEP);
        worst = worst.max(rel_err(dx.as_slice()[k], numeric));
    }
    worst
}

/// Mid-ranks by counting: rank = #smaller + (#equal + 1) / 2.
pub fn mid_ranks(abs: &[f64]) -> Vec<f64> {
    abs.iter()
        .map(|&v| {
            let less = abs.iter().filter(|&&u| u < v).count() as f64;
            let equal = abs.iter().filter(|&&u| u == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Two-sided p from every sign pattern, visited in plain binary order.
pub fn enumerated_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|&d| d != 0.0).collect();
    if d.is_empty() {
        return 1.0;
    }
    let ranks = mid_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let observed: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let n = d.len();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if w <= observed {
            le += 1;
        }
        if w >= observed {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / (1u64 << n) as f64).min(1.0)
}

/// Exact two-sided p for tie-free data via the subset-sum recurrence over ranks 1..=n.
pub fn dp_p(n: usize, observed: f64) -> f64 {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0.0f64; max + 1];
    counts[0] = 1.0;
    for r in 1..=n {
        for s in (r..=max).rev() {
            counts[s] += counts[s - r];
        }
    }
    let total: f64 = counts.iter().sum();
    let w = observed as usize;
    let le: f64 = counts[..=w].iter().sum();
    let ge: f64 = counts[w..].iter().sum();
    (2.0 * le.min(ge) / total).min(1.0)
}

pub fn random_points(rng: &mut seed::Rng, n: usize, d: usize) -> PointSet {
    let data = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
    PointSet::new(Matrix::new(n, d, data).unwrap())
}

/// Every distance, fully sorted, first `k` kept.
pub fn knn_oracle(q: &PointSet, g: &PointSet, k: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..q.len() {
        let mut all: Vec<f64> = (0..g.len())
            .map(|j| {
                q.row(i)
                    .iter()
                    .zip(g.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        all.sort_by(f64::total_cmp);
        out.extend_from_slice(&all[..k]);
    }
    out
}

pub fn naive_mean_pairwise(p: &PointSet, block: Block) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..p.len() {
        for j in 0..p.len() {
            if i != j {
                let d: f64 = block.range().map(|c| (p.row(i)[c] - p.row(j)[c]).powi(2)).sum();
                sum += d.sqrt();
                count += 1;
            }
        }
    }
    sum / count as f64
}
