use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::numerics::Matrix;
use crate::{Error, Result};

/// A contiguous range of feature columns `[offset, offset + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Block {
    pub offset: usize,
    pub width: usize,
}

impl Block {
    pub fn range(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.width
    }
}

/// A batch of feature vectors (one per row) with its block layout and, once
/// normalized, the per-block scales that were divided out.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Matrix,
    blocks: Vec<Block>,
    scales: Option<Vec<f64>>,
}

impl PointSet {
    /// A point set whose features form a single block.
    pub fn new(points: Matrix) -> Self {
        let width = points.cols();
        Self {
            points,
            blocks: vec![Block { offset: 0, width }],
            scales: None,
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Ok(Self::new(Matrix::from_rows(rows)?))
    }

    /// Blocks must tile `[0, dim)` in order without gaps or overlap.
    pub fn with_blocks(points: Matrix, blocks: Vec<Block>, scales: Option<Vec<f64>>) -> Result<Self> {
        let mut next = 0;
        for b in &blocks {
            if b.offset != next || b.width == 0 {
                return Err(invalid("feature blocks must tile the columns in order"));
            }
            next += b.width;
        }
        if next != points.cols() {
            return Err(Error::Shape {
                context: "feature block layout",
                expected: points.cols(),
                found: next,
            });
        }
        if let Some(s) = &scales {
            if s.len() != blocks.len() {
                return Err(Error::Shape {
                    context: "block scales",
                    expected: blocks.len(),
                    found: s.len(),
                });
            }
            if s.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(invalid("block scales must be positive and finite"));
            }
        }
        Ok(Self { points, blocks, scales })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn into_points(self) -> Matrix {
        self.points
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn scales(&self) -> Option<&[f64]> {
        self.scales.as_deref()
    }

    pub(crate) fn set_scales(&mut self, scales: Vec<f64>) {
        self.scales = Some(scales);
    }

    pub(crate) fn points_mut(&mut self) -> &mut Matrix {
        &mut self.points
    }

    /// Rows at `indices`, in that order, with the block metadata carried over.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            points: self.points.select_rows(indices),
            blocks: self.blocks.clone(),
            scales: self.scales.clone(),
        }
    }

    /// Replaces the points, keeping the block metadata.
    pub fn with_points(&self, points: Matrix) -> Result<Self> {
        Self::with_blocks(points, self.blocks.clone(), self.scales.clone())
    }

    /// Concatenates point sets that share a block layout.
    pub fn concat(parts: &[PointSet]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("point sets to concatenate"))?;
        if parts.iter().any(|p| p.blocks != first.blocks) {
            return Err(invalid("cannot concatenate point sets with different block layouts"));
        }
        let mats: Vec<Matrix> = parts.iter().map(|p| p.points.clone()).collect();
        Ok(Self {
            points: Matrix::vstack(&mats)?,
            blocks: first.blocks.clone(),
            scales: first.scales.clone(),
        })
    }

    /// Column means.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for r in self.points.iter_rows() {
            for (a, v) in m.iter_mut().zip(r) {
                *a += v;
            }
        }
        let n = self.len().max(1) as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }
}
