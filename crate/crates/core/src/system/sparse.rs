//! Compressed sparse row matrices assembled from triplets.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Unordered `(row, col, value)` contributions; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    /// Sorts by position (stable, so duplicates are summed in insertion order).
    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n_rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(i) => self.values[range.start + i],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::new(self.n_cols, self.n_rows);
        for (r, c, v) in self.triplets() {
            b.push(c, r, v);
        }
        b.build()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Coordinate text: one `row col value` line per stored entry.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n_rows, self.n_cols, self.nnz());
        for (r, c, v) in self.triplets() {
            s.push_str(&format!("{r} {c} {v:.17e}\n"));
        }
        s
    }

    /// Direct sparse LU solve.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if self.n_rows != self.n_cols {
            return Err(Error::Factorization("matrix is not square".into()));
        }
        let lu = SparseLu::new(self.n_rows, self.triplets())?;
        lu.solve(rhs)
    }

    /// Solves a system bordered by one constraint row and column, such as a
    /// zero-mean multiplier, whose interior block has a one-dimensional kernel.
    ///
    /// A dense border row ruins the fill of a direct factorization, so the
    /// interior block is factored with the unknown `pin` fixed to zero and the
    /// equation `pin` dropped. The kernel direction (obtained from the same
    /// factors) restores the constraint, and the border unknown is recovered
    /// from the dropped equation.
    pub fn solve_bordered(&self, rhs: &[f64], border: usize, pin: usize) -> Result<Vec<f64>> {
        let n = self.n_rows;
        if n != self.n_cols || border >= n || pin >= n || border == pin {
            return Err(Error::Factorization("invalid bordered system".into()));
        }
        let index = |i: usize| -> Option<usize> {
            if i == border || i == pin {
                None
            } else {
                Some(i - usize::from(i > border) - usize::from(i > pin))
            }
        };
        let m = n - 2;
        let mut reduced_rhs = vec![0.0; m];
        let mut pin_column = vec![0.0; m];
        let mut entries = Vec::with_capacity(self.nnz());
        for (r, c, v) in self.triplets() {
            let Some(ri) = index(r) else { continue };
            match index(c) {
                Some(ci) => entries.push((ri, ci, v)),
                None if c == pin => pin_column[ri] = -v,
                None => {}
            }
        }
        for (i, &b) in rhs.iter().enumerate() {
            if let Some(ri) = index(i) {
                reduced_rhs[ri] = b;
            }
        }
        let lu = SparseLu::new(m, entries.into_iter())?;
        let y = lu.solve(&reduced_rhs)?;
        let z = lu.solve(&pin_column)?;

        let expand = |v: &[f64], at_pin: f64| -> Vec<f64> {
            (0..n)
                .map(|i| match index(i) {
                    Some(j) => v[j],
                    None if i == pin => at_pin,
                    None => 0.0,
                })
                .collect()
        };
        let (mut x, z) = (expand(&y, 0.0), expand(&z, 1.0));
        let constraint = |v: &[f64]| self.row(border).map(|(c, a)| a * v[c]).sum::<f64>();
        let cz = constraint(&z);
        if cz == 0.0 {
            return Err(Error::Factorization(
                "constraint does not fix the kernel".into(),
            ));
        }
        let alpha = (rhs[border] - constraint(&x)) / cz;
        x.iter_mut().zip(&z).for_each(|(a, b)| *a += alpha * b);

        let (mut lhs, mut coupling) = (0.0, 0.0);
        for (c, a) in self.row(pin) {
            if c == border {
                coupling = a;
            } else {
                lhs += a * x[c];
            }
        }
        if coupling == 0.0 {
            return Err(Error::Factorization(
                "pinned row does not see the border".into(),
            ));
        }
        x[border] = (rhs[pin] - lhs) / coupling;
        Ok(x)
    }
}

struct SparseLu {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    fn new(n: usize, entries: impl Iterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let triplets: Vec<Triplet<usize, usize, f64>> =
            entries.map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Self { n, lu })
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = faer::col::Col::from_fn(self.n, |i| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<f64> = (0..self.n).map(|i| x[i]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization(
                "singular matrix (non-finite solution)".into(),
            ));
        }
        Ok(out)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
