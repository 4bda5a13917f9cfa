use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::jet::{GaussianRational, Jet};

/// Largest square matrix [`JetMatrix::det`] accepts.
pub const MAX_DET_SIZE: usize = 8;

/// A rectangular grid of jets over one signature and work order.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_rows(rows: Vec<Vec<Jet>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::NotSquare { rows: nrows, cols: ncols });
        }
        let (sig, order) = (rows[0][0].sig(), rows[0][0].order());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::RaggedRows { expected: ncols, found: row.len() });
            }
            for jet in row {
                if jet.sig() != sig || jet.order() != order {
                    return Err(Error::SignatureMismatch("matrix entries differ in signature".into()));
                }
                entries.push(jet);
            }
        }
        Ok(Self { rows: nrows, cols: ncols, entries })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Jet {
        &self.entries[r * self.cols + c]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Values of all entries at the origin.
    pub fn eval0(&self) -> Result<Vec<Vec<GaussianRational>>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).eval0()).collect())
            .collect()
    }

    /// Determinant by Laplace expansion along rows, memoised on the set of
    /// remaining columns. Division-free, so it is sound over truncated jet
    /// rings with zero divisors.
    pub fn det(&self) -> Result<Jet> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        if self.rows > MAX_DET_SIZE {
            return Err(Error::SizeLimitExceeded(self.rows));
        }
        let full = (1u32 << self.cols) - 1;
        let mut memo = HashMap::new();
        Ok(self.minor(full, &mut memo))
    }

    // Determinant of the bottom rows restricted to the columns in `mask`;
    // the row is fixed by the number of columns left.
    fn minor(&self, mask: u32, memo: &mut HashMap<u32, Jet>) -> Jet {
        let first = self.get(0, 0);
        if mask == 0 {
            return Jet::one(first.sig(), first.order());
        }
        if let Some(j) = memo.get(&mask) {
            return j.clone();
        }
        let row = self.rows - mask.count_ones() as usize;
        let mut acc = Jet::zero(first.sig(), first.order());
        let mut position = 0;
        for c in 0..self.cols {
            if mask & (1 << c) == 0 {
                continue;
            }
            let entry = self.get(row, c);
            if !entry.is_zero() || !entry.is_exact() {
                let sub = self.minor(mask & !(1 << c), memo);
                let term = entry * &sub;
                acc = if position % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            position += 1;
        }
        memo.insert(mask, acc.clone());
        acc
    }
}
