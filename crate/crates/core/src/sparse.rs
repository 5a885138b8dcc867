use std::fmt;

use crate::error::{Error, Result};

/// Index-sorted sparse vector. Explicit zeros are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(index, value)` pairs in any order; duplicate
    /// indices are summed and zeros dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        let mut out = SparseVector { indices, values };
        out.drop_zeros();
        out
    }

    pub fn from_dense(dense: &[f64]) -> Self {
        let (indices, values) = dense
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .unzip();
        SparseVector { indices, values }
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|v| *v != 0.0) {
            return;
        }
        let (indices, values) = self
            .indices
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (*i, *v))
            .unzip();
        self.indices = indices;
        self.values = values;
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    /// One past the largest stored index.
    pub fn dim(&self) -> usize {
        self.indices.last().map_or(0, |&i| i as usize + 1)
    }

    /// Dot product; walks the shorter vector and looks up in the longer one.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (small, large) = if self.nnz() <= other.nnz() {
            (self, other)
        } else {
            (other, self)
        };
        small.iter().map(|(i, v)| v * large.get(i)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
        self.drop_zeros();
    }

    pub fn squared_distance(&self, other: &SparseVector) -> f64 {
        let mut sum = 0.0;
        merge_walk(self, other, |_, a, b| sum += (a - b) * (a - b));
        sum
    }

    /// `self + t * (other - self)`, clamped per coordinate to the segment's box.
    pub fn interpolate(&self, other: &SparseVector, t: f64) -> SparseVector {
        let mut pairs = Vec::with_capacity(self.nnz().max(other.nnz()));
        merge_walk(self, other, |i, a, b| {
            let v = (a + t * (b - a)).clamp(a.min(b), a.max(b));
            pairs.push((i, v));
        });
        let mut out = SparseVector {
            indices: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        };
        out.drop_zeros();
        out
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Parses the `index:value` form written by `Display`.
    pub fn parse(s: &str) -> Result<SparseVector> {
        let mut pairs = Vec::new();
        for item in s.split_whitespace() {
            let (i, v) = item
                .split_once(':')
                .ok_or_else(|| Error::Data(format!("bad sparse entry {item:?}")))?;
            let i: u32 = i
                .parse()
                .map_err(|_| Error::Data(format!("bad sparse index {i:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Data(format!("bad sparse value {v:?}")))?;
            pairs.push((i, v));
        }
        Ok(SparseVector::from_pairs(pairs))
    }
}

impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (i, v)) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{i}:{v}")?;
        }
        Ok(())
    }
}

/// Calls `f(index, a_i, b_i)` for every index present in either vector.
fn merge_walk(a: &SparseVector, b: &SparseVector, mut f: impl FnMut(u32, f64, f64)) {
    let (mut p, mut q) = (0, 0);
    while p < a.nnz() || q < b.nnz() {
        let ia = a.indices.get(p).copied().unwrap_or(u32::MAX);
        let ib = b.indices.get(q).copied().unwrap_or(u32::MAX);
        if ia == ib {
            f(ia, a.values[p], b.values[q]);
            p += 1;
            q += 1;
        } else if ia < ib {
            f(ia, a.values[p], 0.0);
            p += 1;
        } else {
            f(ib, 0.0, b.values[q]);
            q += 1;
        }
    }
}
