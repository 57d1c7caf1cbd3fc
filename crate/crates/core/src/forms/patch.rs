//! Blocks of the local projection stabilisation on macro patches.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::mesh::Patch;
use crate::operators::CellOperators;
use crate::projection::PatchFluctuation;

use super::params::PatchParams;

/// Stabilisation blocks of one patch.
///
/// Velocity blocks act on the cells' local velocity blocks stacked in patch
/// order; pressure blocks act on the stacked `P^k` coefficients.
#[derive(Debug, Clone)]
pub struct PatchForms {
    pub cells: Vec<usize>,
    /// Start of each cell's velocity block in the stacked vector, plus the total.
    pub velocity_offsets: Vec<usize>,
    /// `g^T Q g = ||K_M g||_M^2` for stacked scalar `P^k` coefficients.
    pub fluctuation: DMatrix<f64>,
    /// `tau_M (K_M G_{b_M,M} w, K_M G_{b_M,M} v)_M`.
    pub lps: DMatrix<f64>,
    /// `rho_M (K_M grad_h q, K_M grad_h r)_M`.
    pub pressure_gradient: DMatrix<f64>,
}

impl PatchForms {
    /// `ops[i]` must be the pack of `patch.cells[i]`.
    pub fn new(
        patch: &Patch,
        ops: &[&CellOperators],
        params: &PatchParams,
        k: usize,
    ) -> Result<Self> {
        let quads: Vec<_> = ops.iter().map(|o| &o.quad).collect();
        let kernel = PatchFluctuation::new(patch, &quads, k)?;
        let bases: Vec<_> = ops.iter().map(|o| &o.basis).collect();
        let nc = crate::basis::poly_dim(k);
        let fluctuation = kernel.fluctuation_gram(&bases, nc);

        let m = ops.len();
        let mut velocity_offsets = Vec::with_capacity(m + 1);
        let mut acc = 0;
        for o in ops {
            velocity_offsets.push(acc);
            acc += o.nv();
        }
        velocity_offsets.push(acc);

        let mut lps = DMatrix::zeros(acc, acc);
        let mut pressure_gradient = DMatrix::zeros(m * nc, m * nc);
        for c in 0..2 {
            let mut g = DMatrix::zeros(m * nc, acc);
            let mut d = DMatrix::zeros(m * nc, m * nc);
            for (i, o) in ops.iter().enumerate() {
                let ns = o.ns();
                let gm = o.advection_constant(params.b_mean);
                g.view_mut((i * nc, velocity_offsets[i] + c * ns), (nc, ns))
                    .copy_from(&gm);
                d.view_mut((i * nc, i * nc), (nc, nc))
                    .copy_from(&o.derivative[c]);
            }
            lps += g.transpose() * &fluctuation * &g * params.tau;
            pressure_gradient += d.transpose() * &fluctuation * &d * params.rho;
        }
        Ok(Self {
            cells: patch.cells.clone(),
            velocity_offsets,
            fluctuation,
            lps: symmetrise(lps),
            pressure_gradient: symmetrise(pressure_gradient),
        })
    }
}

fn symmetrise(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}
