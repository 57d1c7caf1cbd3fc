//! Dense diagnostics of the discrete inequalities.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::discretization::{Discretization, HybridVelocity};
use crate::error::{Error, Result};
use crate::forms::h1_block;
use crate::system::GlobalSystem;

use super::norms::{norm_1h, norm_eps_sq, velocity_l2};

/// Largest system handled by the dense diagnostics.
pub const DENSE_LIMIT: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfSup {
    Value(f64),
    /// The zero-mean pressure space is trivial.
    NotApplicable,
}

/// `min_q sup_v B_h(v, q) / (||v||_{1,h} ||q||)` over zero-mean `q`.
///
/// Computed as the square root of the second smallest eigenvalue of
/// `B H^{-1} B^T x = lambda M_p x` (the smallest belongs to constants).
pub fn infsup_diagnostic(disc: &Discretization, system: &GlobalSystem) -> Result<InfSup> {
    let d = &system.dofs;
    let nv = d.n_velocity();
    let np = d.n_pressure();
    if nv + np > DENSE_LIMIT {
        return Err(Error::TooLarge {
            size: nv + np,
            limit: DENSE_LIMIT,
        });
    }
    if np <= 1 {
        return Ok(InfSup::NotApplicable);
    }
    let mut h = DMatrix::zeros(nv, nv);
    for (c, o) in disc.ops.iter().enumerate() {
        let map = d.local_velocity(&disc.mesh, c);
        let a = h1_block(o);
        for (i, gi) in map.iter().enumerate() {
            let Some(gi) = gi else { continue };
            for (j, gj) in map.iter().enumerate() {
                if let Some(gj) = gj {
                    h[(*gi, *gj)] += a[(i, j)];
                }
            }
        }
    }
    let mut b = DMatrix::zeros(np, nv);
    for r in 0..np {
        for (c, v) in system.matrix.row(d.pressure_offset + r) {
            if c < nv {
                b[(r, c)] = v;
            }
        }
    }
    let mut mp = DMatrix::zeros(np, np);
    for (c, o) in disc.ops.iter().enumerate() {
        let nc = d.nc;
        mp.view_mut((c * nc, c * nc), (nc, nc))
            .copy_from(&o.mass_k());
    }
    let hc = h.cholesky().ok_or_else(|| Error::Singular {
        what: "discrete H1 Gram".into(),
    })?;
    let s = &b * hc.solve(&b.transpose());
    let lp = mp.cholesky().ok_or_else(|| Error::Singular {
        what: "pressure mass".into(),
    })?;
    let l = lp.l();
    let linv = l
        .solve_lower_triangular(&DMatrix::identity(np, np))
        .ok_or_else(|| Error::Singular {
            what: "pressure mass factor".into(),
        })?;
    let c = &linv * s * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    Ok(InfSup::Value(eig[1].max(0.0).sqrt()))
}

/// `||v_h|| / ||v||_{1,h}` (discrete Poincare ratio).
pub fn poincare_ratio(disc: &Discretization, u: &HybridVelocity) -> f64 {
    velocity_l2(disc, u) / norm_1h(disc, u)
}

/// `||v||_{eps,h}^2 / (eps ||v||_{1,h}^2)`.
pub fn norm_equivalence_ratio(disc: &Discretization, u: &HybridVelocity) -> f64 {
    norm_eps_sq(disc, u) / (disc.coeffs.epsilon * norm_1h(disc, u).powi(2))
}
