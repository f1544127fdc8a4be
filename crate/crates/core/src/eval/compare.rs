use alloc::string::String;
use alloc::vec::Vec;

use super::{wilcoxon_signed_rank, DistanceMatrix};
use crate::error::invalid;
use crate::{Error, Result};

/// Counts of `+1 / 0 / -1` codes for one cell over repeated runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tally {
    pub plus: u32,
    pub zero: u32,
    pub minus: u32,
}

impl Tally {
    pub fn total(&self) -> u32 {
        self.plus + self.zero + self.minus
    }

    pub fn add(&mut self, code: i8) {
        match code {
            1 => self.plus += 1,
            -1 => self.minus += 1,
            _ => self.zero += 1,
        }
    }

    /// The tally seen from the other method's side.
    pub fn mirrored(self) -> Self {
        Self {
            plus: self.minus,
            zero: self.zero,
            minus: self.plus,
        }
    }
}

/// All-pairs Wilcoxon codes: `codes[a][b] = +1` when method `a` has
/// significantly smaller nearest-neighbor distances than `b`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonMatrix {
    pub labels: Vec<String>,
    pub codes: Vec<Vec<i8>>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub tallies: Option<Vec<Vec<Tally>>>,
}

impl ComparisonMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Aggregates per-run matrices with identical labels into tallies.
    ///
    /// The resulting codes are the sign of `plus - minus` for each cell.
    pub fn tally(runs: &[ComparisonMatrix]) -> Result<Self> {
        let first = runs.first().ok_or(Error::Empty("comparison runs"))?;
        let m = first.len();
        let mut tallies = alloc::vec![alloc::vec![Tally::default(); m]; m];
        for run in runs {
            if run.labels != first.labels {
                return Err(invalid("comparison runs must share method labels"));
            }
            for (a, row) in run.codes.iter().enumerate() {
                for (b, &c) in row.iter().enumerate() {
                    tallies[a][b].add(c);
                }
            }
        }
        let codes = tallies
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| (t.plus as i64 - t.minus as i64).signum() as i8)
                    .collect()
            })
            .collect();
        Ok(Self {
            labels: first.labels.clone(),
            codes,
            tallies: Some(tallies),
        })
    }

    /// Checks `codes[a][b] == -codes[b][a]` and a zero diagonal.
    pub fn is_antisymmetric(&self) -> bool {
        let m = self.len();
        (0..m).all(|a| self.codes[a][a] == 0 && (0..m).all(|b| self.codes[a][b] == -self.codes[b][a]))
    }
}

/// Pairwise codes from the Wilcoxon test on the nearest-neighbor (`j = 1`)
/// distances. Only the upper triangle is tested; the lower is mirrored.
pub fn comparison_matrix(methods: &[&DistanceMatrix], alpha: f64) -> Result<ComparisonMatrix> {
    if methods.len() < 2 {
        return Err(invalid("a comparison needs at least two methods"));
    }
    let n = methods[0].n_queries();
    if let Some(bad) = methods.iter().find(|m| m.n_queries() != n) {
        return Err(Error::Shape {
            context: "comparison test-set size",
            expected: n,
            found: bad.n_queries(),
        });
    }
    let firsts: Vec<Vec<f64>> = methods.iter().map(|m| m.column(1)).collect::<Result<_>>()?;
    let m = methods.len();
    let mut codes = alloc::vec![alloc::vec![0i8; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            let c = wilcoxon_signed_rank(&firsts[a], &firsts[b], alpha)?.code;
            codes[a][b] = c;
            codes[b][a] = -c;
        }
    }
    Ok(ComparisonMatrix {
        labels: methods.iter().map(|m| String::from(m.label())).collect(),
        codes,
        tallies: None,
    })
}
