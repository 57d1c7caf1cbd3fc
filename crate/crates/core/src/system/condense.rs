//! Static condensation of the cell velocity unknowns.

use nalgebra::{DMatrix, DVector};

use crate::discretization::Discretization;
use crate::error::{Error, Result};

use super::assemble::{GlobalSystem, Solution};
use super::sparse::{CsrMatrix, TripletBuilder};

#[derive(Debug, Clone)]
struct CellBlock {
    start: usize,
    size: usize,
    inverse: DMatrix<f64>,
    /// Global columns outside the cell block coupled to it.
    cols: Vec<usize>,
    /// Rows of the cell block restricted to `cols`.
    coupling: DMatrix<f64>,
}

/// System on face, pressure and multiplier unknowns with the cell velocity
/// blocks eliminated by local Schur complements.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// First retained global unknown; reduced index `i` is global `offset + i`.
    pub offset: usize,
    n_full: usize,
    blocks: Vec<CellBlock>,
}

pub fn static_condensation(system: &GlobalSystem) -> Result<CondensedSystem> {
    let a = &system.matrix;
    let d = &system.dofs;
    let offset = d.face_offset;
    let n = d.total;
    let at = a.transpose();
    let size = 2 * d.nc;

    let mut builder = TripletBuilder::new(n - offset, n - offset);
    let mut rhs: Vec<f64> = system.rhs[offset..].to_vec();
    for r in offset..n {
        for (c, v) in a.row(r) {
            if c >= offset {
                builder.push(r - offset, c - offset, v);
            }
        }
    }

    let mut blocks = Vec::with_capacity(d.n_cells);
    for cell in 0..d.n_cells {
        let start = d.cell_velocity(cell);
        let range = start..start + size;
        let mut aii = DMatrix::zeros(size, size);
        let mut cols: Vec<usize> = Vec::new();
        for r in range.clone() {
            for (c, v) in a.row(r) {
                if range.contains(&c) {
                    aii[(r - start, c - start)] = v;
                } else if c < offset {
                    return Err(Error::InconsistentOptions(format!(
                        "static condensation needs decoupled cell unknowns, but cell {cell} couples to unknown {c} \
                         (use the trivial macro decomposition)"
                    )));
                } else {
                    cols.push(c);
                }
            }
        }
        cols.sort_unstable();
        cols.dedup();
        let mut air = DMatrix::zeros(size, cols.len());
        for r in range.clone() {
            for (c, v) in a.row(r) {
                if let Ok(j) = cols.binary_search(&c) {
                    air[(r - start, j)] = v;
                }
            }
        }
        let mut rows: Vec<usize> = Vec::new();
        for c in range.clone() {
            for (r, _) in at.row(c) {
                if r >= offset {
                    rows.push(r);
                }
            }
        }
        rows.sort_unstable();
        rows.dedup();
        let mut ari = DMatrix::zeros(rows.len(), size);
        for (i, &r) in rows.iter().enumerate() {
            for c in range.clone() {
                ari[(i, c - start)] = a.get(r, c);
            }
        }
        let inverse = aii
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular {
                what: format!("cell velocity block of cell {cell}"),
            })?;
        let ari_inv = &ari * &inverse;
        let schur = &ari_inv * &air;
        let bi = DVector::from_column_slice(&system.rhs[range.clone()]);
        let g = &ari_inv * bi;
        for (i, &r) in rows.iter().enumerate() {
            rhs[r - offset] -= g[i];
            for (j, &c) in cols.iter().enumerate() {
                builder.push(r - offset, c - offset, -schur[(i, j)]);
            }
        }
        blocks.push(CellBlock {
            start,
            size,
            inverse,
            cols,
            coupling: air,
        });
    }
    Ok(CondensedSystem {
        matrix: builder.build(),
        rhs,
        offset,
        n_full: n,
        blocks,
    })
}

impl CondensedSystem {
    pub fn n_unknowns(&self) -> usize {
        self.matrix.n_rows
    }

    /// Full solution vector from the reduced one.
    pub fn recover(&self, full_rhs: &[f64], reduced: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_full];
        x[self.offset..].copy_from_slice(reduced);
        for b in &self.blocks {
            let xr = DVector::from_iterator(b.cols.len(), b.cols.iter().map(|&c| x[c]));
            let bi = DVector::from_column_slice(&full_rhs[b.start..b.start + b.size]);
            let xi = &b.inverse * (bi - &b.coupling * xr);
            x[b.start..b.start + b.size].copy_from_slice(xi.as_slice());
        }
        x
    }
}

/// Solves through the condensed system and reconstructs the full solution.
pub fn solve_condensed(disc: &Discretization, system: &GlobalSystem) -> Result<Solution> {
    let cs = static_condensation(system)?;
    let d = &system.dofs;
    let reduced =
        cs.matrix
            .solve_bordered(&cs.rhs, d.multiplier - cs.offset, d.pressure(0) - cs.offset)?;
    let x = cs.recover(&system.rhs, &reduced);
    system.finish(disc, x)
}
