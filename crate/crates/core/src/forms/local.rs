//! Cellwise blocks of the bilinear forms.
//!
//! Every block acting on velocities uses the local layout of
//! [`CellOperators`]; rows correspond to test functions, columns to trial
//! functions.

use nalgebra::DMatrix;

use crate::operators::{block_diag2, CellOperators};

fn chol_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone()
        .cholesky()
        .expect("local mass matrices are positive definite")
        .solve(rhs)
}

/// Consistent part `eps (grad r w, grad r v)_T`.
pub fn consistent_viscous_block(ops: &CellOperators, epsilon: f64) -> DMatrix<f64> {
    let r = &ops.reconstruction;
    block_diag2(&(r.transpose() * &ops.stiffness * r * epsilon))
}

/// Face operators `v -> pi_F^k (v_F - v_T - (r v - pi_T^k r v))` for each face (scalar).
pub fn stabilisation_residuals(ops: &CellOperators) -> Vec<DMatrix<f64>> {
    let nc = ops.nc();
    let n1 = ops.n1();
    let nf = ops.nf();
    let ns = ops.ns();
    let mk = ops.mass_k();
    // P^k projection of P^{k+1} coefficients
    let pk = chol_solve(&mk, &ops.mass.view((0, 0), (nc, n1)).into_owned());
    let r = &ops.reconstruction;
    let fluct = r - {
        let mut e = DMatrix::zeros(n1, ns);
        e.view_mut((0, 0), (nc, ns)).copy_from(&(&pk * r));
        e
    };
    ops.faces
        .iter()
        .enumerate()
        .map(|(l, lf)| {
            let mut d = DMatrix::zeros(nf, ns);
            // v_F is already in P^k(F); project the rest
            let mut inner = DMatrix::zeros(n1, ns);
            inner.view_mut((0, 0), (nc, nc)).fill_diagonal(1.0);
            inner += &fluct;
            let proj = chol_solve(&lf.mass, &(&lf.trace * inner));
            d.view_mut((0, ops.face_offset(l)), (nf, nf))
                .fill_diagonal(1.0);
            d - proj
        })
        .collect()
}

/// HHO stabilisation `S_{eps,T}`.
pub fn stabilisation_block(ops: &CellOperators, epsilon: f64) -> DMatrix<f64> {
    let ns = ops.ns();
    let mut s = DMatrix::zeros(ns, ns);
    for (lf, theta) in ops.faces.iter().zip(stabilisation_residuals(ops)) {
        s += theta.transpose() * &lf.mass * theta;
    }
    block_diag2(&(s * (epsilon / ops.diameter)))
}

/// `A_{eps,T}`.
pub fn viscous_block(ops: &CellOperators, epsilon: f64) -> DMatrix<f64> {
    consistent_viscous_block(ops, epsilon) + stabilisation_block(ops, epsilon)
}

/// `A_{b,T}`: `-(w_T, G_{b,T} v)_T + sum_F (b^-_TF (w_F - w_T), v_F - v_T)_F + sigma (w_T, v_T)_T`.
pub fn convection_block(ops: &CellOperators, sigma: f64) -> DMatrix<f64> {
    let ns = ops.ns();
    let nc = ops.nc();
    let mk = ops.mass_k();
    let sel = ops.cell_selector();
    let mut a = -(ops.advection.transpose() * &mk * &sel);
    for (l, lf) in ops.faces.iter().enumerate() {
        for (q, &w) in lf.quad.weights.iter().enumerate() {
            let bn = lf.normal_flux[q];
            let minus = 0.5 * (bn.abs() - bn);
            if minus == 0.0 {
                continue;
            }
            let j = ops.jump_row(l, q);
            a.ger(w * minus, &j, &j, 1.0);
        }
    }
    let mut cell = a.view_mut((0, 0), (nc, nc));
    cell += &mk * sigma;
    debug_assert_eq!(a.nrows(), ns);
    block_diag2(&a)
}

/// `A_{N}` restricted to the cell: `sum_F ((v_T - v_F) . n, (w_T - w_F) . n)_F`.
pub fn normal_jump_block(ops: &CellOperators) -> DMatrix<f64> {
    let ns = ops.ns();
    let mut a = DMatrix::zeros(2 * ns, 2 * ns);
    for (l, lf) in ops.faces.iter().enumerate() {
        for (q, &w) in lf.quad.weights.iter().enumerate() {
            let j = ops.jump_row(l, q);
            let mut row = nalgebra::DVector::zeros(2 * ns);
            row.rows_mut(0, ns).axpy(lf.normal.x, &j, 0.0);
            row.rows_mut(ns, ns).axpy(lf.normal.y, &j, 0.0);
            a.ger(w, &row, &row, 1.0);
        }
    }
    a
}

/// Cell contribution to `B_h(v, q) = -(D_T v, q)_T` as `q^T B v` (`nc x 2 ns`).
pub fn pressure_coupling(ops: &CellOperators) -> DMatrix<f64> {
    -(ops.mass_k() * &ops.divergence)
}

/// Squared discrete `H^1` norm on the cell:
/// `||grad v_T||^2 + sum_F h_F^{-1} ||v_F - v_T||_F^2`.
pub fn h1_block(ops: &CellOperators) -> DMatrix<f64> {
    let ns = ops.ns();
    let nc = ops.nc();
    let mut a = DMatrix::zeros(ns, ns);
    a.view_mut((0, 0), (nc, nc))
        .copy_from(&ops.stiffness.view((0, 0), (nc, nc)));
    for (l, lf) in ops.faces.iter().enumerate() {
        for (q, &w) in lf.quad.weights.iter().enumerate() {
            let j = ops.jump_row(l, q);
            a.ger(w / lf.measure, &j, &j, 1.0);
        }
    }
    block_diag2(&a)
}

/// Squared `||.||_b` on the cell: `sigma ||v_T||^2 + sum_F 1/2 (|b_TF| (v_F - v_T), v_F - v_T)_F`.
pub fn b_norm_block(ops: &CellOperators, sigma: f64) -> DMatrix<f64> {
    let ns = ops.ns();
    let nc = ops.nc();
    let mut a = DMatrix::zeros(ns, ns);
    a.view_mut((0, 0), (nc, nc))
        .copy_from(&(ops.mass_k() * sigma));
    for (l, lf) in ops.faces.iter().enumerate() {
        for (q, &w) in lf.quad.weights.iter().enumerate() {
            let j = ops.jump_row(l, q);
            a.ger(0.5 * w * lf.normal_flux[q].abs(), &j, &j, 1.0);
        }
    }
    block_diag2(&a)
}

/// Face term `-1/2 sum_F (b_TF v_F, v_F)_F`: the amount by which the cellwise
/// convection form differs from the cellwise `||.||_b`. It cancels between
/// neighbouring cells and vanishes on boundary faces with zero values.
pub fn convection_face_defect_block(ops: &CellOperators) -> DMatrix<f64> {
    let ns = ops.ns();
    let nf = ops.nf();
    let mut a = DMatrix::zeros(ns, ns);
    for (l, lf) in ops.faces.iter().enumerate() {
        let off = ops.face_offset(l);
        for (q, &w) in lf.quad.weights.iter().enumerate() {
            let psi = lf.face_values.row(q).transpose();
            let mut v = a.view_mut((off, off), (nf, nf));
            v.ger(-0.5 * w * lf.normal_flux[q], &psi, &psi, 1.0);
        }
    }
    block_diag2(&a)
}
