use crate::error::{Error, Result};
use crate::jet::GaussianRational;

/// Exact rank of a set of row vectors over the Gaussian rationals.
pub fn rank_at_zero(rows: &[Vec<GaussianRational>]) -> Result<usize> {
    let Some(width) = rows.first().map(Vec::len) else {
        return Ok(0);
    };
    if let Some(bad) = rows.iter().find(|r| r.len() != width) {
        return Err(Error::RaggedRows { expected: width, found: bad.len() });
    }
    Ok(row_echelon(rows.to_vec()).len())
}

/// Reduces `rows` and returns the nonzero echelon rows.
fn row_echelon(mut rows: Vec<Vec<GaussianRational>>) -> Vec<Vec<GaussianRational>> {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].inv().unwrap();
        let pivot_row: Vec<GaussianRational> = rows[rank].iter().map(|x| x * &inv).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= &(&factor * p);
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

/// Incrementally tracks the span of added vectors; reports whether each new
/// vector enlarges it.
#[derive(Clone, Debug, Default)]
pub struct SpanTracker {
    // Reduced rows with their pivot columns.
    basis: Vec<(usize, Vec<GaussianRational>)>,
}

impl SpanTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Adds `v`; returns `true` if it was independent of the current span.
    pub fn insert(&mut self, v: &[GaussianRational]) -> bool {
        let mut v = v.to_vec();
        for (pivot, row) in &self.basis {
            if v[*pivot].is_zero() {
                continue;
            }
            let factor = v[*pivot].clone();
            for (x, p) in v.iter_mut().zip(row) {
                *x -= &(&factor * p);
            }
        }
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[pivot].inv().unwrap();
        let v: Vec<GaussianRational> = v.iter().map(|x| x * &inv).collect();
        // Keep the basis fully reduced so later insertions stay one pass.
        for (_, row) in self.basis.iter_mut() {
            if row[pivot].is_zero() {
                continue;
            }
            let factor = row[pivot].clone();
            for (x, p) in row.iter_mut().zip(&v) {
                *x -= &(&factor * p);
            }
        }
        self.basis.push((pivot, v));
        true
    }
}
