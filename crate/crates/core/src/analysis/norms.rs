//! Discrete norms on hybrid velocity and pressure pairs.

use nalgebra::DVector;

use crate::discretization::{Discretization, HybridVelocity, PressureField};
use crate::forms::{b_norm_block, h1_block};
use crate::operators::block_diag2;

/// Squared components of the norms of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NormSquares {
    pub eps: f64,
    pub b: f64,
    pub st: f64,
    pub supg: f64,
    /// `||q||^2`.
    pub pressure: f64,
    /// `1 / (1 + omega)` weight of the SUPG part.
    pub supg_weight: f64,
    /// `eps + sigma` weight of the pressure part.
    pub pressure_weight: f64,
}

impl NormSquares {
    /// `|||(v, q)|||^2 = ||v||_eps^2 + ||v||_b^2 + ||(v, q)||_st^2`.
    pub fn triple(&self) -> f64 {
        self.eps + self.b + self.st
    }

    pub fn lp(&self) -> f64 {
        self.triple() + self.supg_weight * self.supg + self.pressure_weight * self.pressure
    }
}

pub fn norm_1h(disc: &Discretization, u: &HybridVelocity) -> f64 {
    disc.ops
        .iter()
        .enumerate()
        .map(|(c, o)| {
            let v = disc.gather(c, u);
            v.dot(&(h1_block(o) * &v))
        })
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// `||v||_{eps,h}^2 = A_{eps,h}(v, v)`.
pub fn norm_eps_sq(disc: &Discretization, u: &HybridVelocity) -> f64 {
    disc.forms
        .iter()
        .enumerate()
        .map(|(c, f)| {
            let v = disc.gather(c, u);
            v.dot(&(&f.viscous * &v))
        })
        .sum()
}

pub fn norm_eps(disc: &Discretization, u: &HybridVelocity) -> f64 {
    norm_eps_sq(disc, u).max(0.0).sqrt()
}

pub fn norm_b_sq(disc: &Discretization, u: &HybridVelocity) -> f64 {
    let sigma = disc.coeffs.sigma;
    disc.ops
        .iter()
        .enumerate()
        .map(|(c, o)| {
            let v = disc.gather(c, u);
            v.dot(&(b_norm_block(o, sigma) * &v))
        })
        .sum()
}

pub fn norm_b(disc: &Discretization, u: &HybridVelocity) -> f64 {
    norm_b_sq(disc, u).max(0.0).sqrt()
}

/// `A_st((v, q), (v, q))`.
pub fn norm_st_sq(disc: &Discretization, u: &HybridVelocity, p: &PressureField) -> f64 {
    let mut total = 0.0;
    for (c, f) in disc.forms.iter().enumerate() {
        let v = disc.gather(c, u);
        total += v.dot(&(&f.normal_jump * &v));
    }
    for (m, pf) in disc.patches.iter().enumerate() {
        let v = disc.gather_patch(m, u);
        total += v.dot(&(&pf.lps * &v));
        let q = disc.gather_patch_pressure(m, p);
        total += q.dot(&(&pf.pressure_gradient * &q));
    }
    total
}

pub fn norm_st(disc: &Discretization, u: &HybridVelocity, p: &PressureField) -> f64 {
    norm_st_sq(disc, u, p).max(0.0).sqrt()
}

/// Coefficients of `G_{b,T} v + grad q` on a cell (`2 nc`).
pub fn supg_field(
    disc: &Discretization,
    cell: usize,
    u: &HybridVelocity,
    p: &PressureField,
) -> DVector<f64> {
    let o = &disc.ops[cell];
    let nc = o.nc();
    let mut g = o.reconstruct_advection(&disc.gather(cell, u));
    let dp0 = &o.derivative[0] * &p.cells[cell];
    let dp1 = &o.derivative[1] * &p.cells[cell];
    let mut top = g.rows_mut(0, nc);
    top += dp0;
    let mut bottom = g.rows_mut(nc, nc);
    bottom += dp1;
    g
}

/// `sum_M gamma_M ||G_{b,M} v + grad_h q||_M^2` with the exact convection field.
pub fn norm_supg_sq(disc: &Discretization, u: &HybridVelocity, p: &PressureField) -> f64 {
    let cell_sq: Vec<f64> = (0..disc.mesh.n_cells())
        .map(|c| {
            let g = supg_field(disc, c, u, p);
            let m = block_diag2(&disc.ops[c].mass_k());
            g.dot(&(m * &g))
        })
        .collect();
    disc.macros
        .patches
        .iter()
        .zip(&disc.params.patches)
        .map(|(patch, pp)| pp.gamma * patch.cells.iter().map(|&c| cell_sq[c]).sum::<f64>())
        .sum()
}

pub fn norm_supg(disc: &Discretization, u: &HybridVelocity, p: &PressureField) -> f64 {
    norm_supg_sq(disc, u, p).max(0.0).sqrt()
}

pub fn pressure_l2_sq(disc: &Discretization, p: &PressureField) -> f64 {
    disc.ops
        .iter()
        .zip(&p.cells)
        .map(|(o, q)| q.dot(&(o.mass_k() * q)))
        .sum()
}

/// Cellwise `L^2` norm of the cell velocity components.
pub fn velocity_l2(disc: &Discretization, u: &HybridVelocity) -> f64 {
    disc.ops
        .iter()
        .zip(&u.cells)
        .map(|(o, v)| v.dot(&(block_diag2(&o.mass_k()) * v)))
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

pub fn norm_squares(disc: &Discretization, u: &HybridVelocity, p: &PressureField) -> NormSquares {
    NormSquares {
        eps: norm_eps_sq(disc, u),
        b: norm_b_sq(disc, u),
        st: norm_st_sq(disc, u, p),
        supg: norm_supg_sq(disc, u, p),
        pressure: pressure_l2_sq(disc, p),
        supg_weight: 1.0 / (1.0 + disc.params.omega),
        pressure_weight: disc.coeffs.epsilon + disc.coeffs.sigma,
    }
}

/// `|||(v, q)|||_LP`.
pub fn norm_lp(disc: &Discretization, u: &HybridVelocity, p: &PressureField) -> f64 {
    norm_squares(disc, u, p).lp().max(0.0).sqrt()
}
