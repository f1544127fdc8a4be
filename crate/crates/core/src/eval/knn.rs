use alloc::string::String;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::synth::PointSet;
use crate::{Error, Result};

/// `d[i][j]`: distance from query `i` to its `(j + 1)`-th nearest generated point.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    label: String,
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Rows must be non-decreasing and non-negative.
    pub fn new(label: impl Into<String>, n: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * k {
            return Err(Error::Shape {
                context: "distance matrix",
                expected: n * k,
                found: data.len(),
            });
        }
        if k > 0 {
            for row in data.chunks(k) {
                if row.iter().any(|&d| d.is_nan() || d < 0.0) || row.windows(2).any(|w| w[0] > w[1]) {
                    return Err(invalid("distance rows must be non-negative and sorted"));
                }
            }
        }
        Ok(Self {
            label: label.into(),
            n,
            k,
            data,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn n_queries(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `d[.][j]` for a 1-based rank `j`.
    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        self.check_rank(j)?;
        Ok((0..self.n).map(|i| self.data[i * self.k + j - 1]).collect())
    }

    /// Mean over queries of the `j`-th nearest distance (1-based).
    pub fn mean(&self, j: usize) -> Result<f64> {
        self.check_rank(j)?;
        if self.n == 0 {
            return Err(Error::Empty("distance matrix"));
        }
        let s: f64 = (0..self.n).map(|i| self.data[i * self.k + j - 1]).sum();
        Ok(s / self.n as f64)
    }

    fn check_rank(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.k {
            return Err(invalid(alloc::format!("neighbor rank {j} outside 1..={}", self.k)));
        }
        Ok(())
    }
}

/// The `k` smallest Euclidean distances from `query` to the rows of
/// `generated`, ascending. `scratch` is reused between calls.
pub fn knn_row(query: &[f64], generated: &PointSet, k: usize, scratch: &mut Vec<f64>) -> Vec<f64> {
    scratch.clear();
    scratch.extend(generated.points().iter_rows().map(|g| {
        let mut s = 0.0;
        for (a, b) in query.iter().zip(g) {
            let d = a - b;
            s += d * d;
        }
        s
    }));
    if k < scratch.len() {
        scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    let mut best: Vec<f64> = scratch[..k].to_vec();
    best.sort_unstable_by(f64::total_cmp);
    best.iter_mut().for_each(|v| *v = libm::sqrt(*v));
    best
}

pub(crate) fn check_knn(queries: &PointSet, generated: &PointSet, k: usize) -> Result<()> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if k > generated.len() {
        return Err(Error::KTooLarge {
            k,
            available: generated.len(),
        });
    }
    if queries.dim() != generated.dim() {
        return Err(Error::Shape {
            context: "query vs generated feature width",
            expected: queries.dim(),
            found: generated.dim(),
        });
    }
    Ok(())
}

/// Exact brute-force k-NN distances of every query against `generated`.
pub fn knn_distances(queries: &PointSet, generated: &PointSet, k: usize) -> Result<DistanceMatrix> {
    check_knn(queries, generated, k)?;
    let mut scratch = Vec::with_capacity(generated.len());
    let mut data = Vec::with_capacity(queries.len() * k);
    for q in queries.points().iter_rows() {
        data.extend(knn_row(q, generated, k, &mut scratch));
    }
    Ok(DistanceMatrix {
        label: String::new(),
        n: queries.len(),
        k,
        data,
    })
}

/// Relative increase of the mean `j`-th neighbor distance over the baseline:
/// `(mean_j(method) - mean_j(baseline)) / mean_j(baseline)`.
pub fn dhat(method: &DistanceMatrix, baseline: &DistanceMatrix, j: usize) -> Result<f64> {
    if method.n != baseline.n {
        return Err(Error::Shape {
            context: "query count of method vs baseline",
            expected: baseline.n,
            found: method.n,
        });
    }
    let b = baseline.mean(j)?;
    if b == 0.0 {
        return Err(Error::ZeroBaseline { j });
    }
    Ok((method.mean(j)? - b) / b)
}

/// [`dhat`] for `j = 1..=min(k)`.
pub fn dhat_curve(method: &DistanceMatrix, baseline: &DistanceMatrix) -> Result<Vec<f64>> {
    (1..=method.k.min(baseline.k))
        .map(|j| dhat(method, baseline, j))
        .collect()
}
