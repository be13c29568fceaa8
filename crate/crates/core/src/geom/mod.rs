//! Point storage, the spatial-median kd-tree and k-nearest-neighbor queries.

mod kdtree;
mod knn;

pub use kdtree::{node_distance, KdNode, KdTree, NodeId, PARALLEL_CUTOFF};
pub use knn::{knn, KnnResult};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A dense, row-major set of `n` points in `dim` dimensions. Point ids are row
/// indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Points<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> Points<T> {
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidCoordinate {
                point: bad / dim,
                dim: bad % dim,
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(row) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        Self::new(dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, id: usize) -> &[T] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dist(&self, a: usize, b: usize) -> T {
        sq_dist(self.point(a), self.point(b)).sqrt()
    }
}

#[inline]
pub fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        acc = acc + d * d;
    }
    acc
}
