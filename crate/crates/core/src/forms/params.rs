//! Patchwise stabilisation parameters.

use crate::error::Result;
use crate::mesh::{MacroDecomposition, Mesh, Point};
use crate::quadrature::{cell_quadrature, QuadRule};

use super::coefficients::{jacobian, OseenCoefficients};

/// User-tunable scalings of the stabilisation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilisationConstants {
    pub c_tau: f64,
    pub c_rho: f64,
    /// Lower bound on `||b||` in the denominator of `tau_M`.
    pub guard: f64,
}

impl Default for StabilisationConstants {
    fn default() -> Self {
        Self {
            c_tau: 1.0,
            c_rho: 1.0,
            guard: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchParams {
    pub h: f64,
    /// Constant approximation of the convection field on the patch.
    pub b_mean: Point,
    /// `||b||_{0,inf,M}` (Euclidean norm, maximised over quadrature points).
    pub b_max: f64,
    /// `|b|_{1,inf,M}` (Frobenius norm of the Jacobian, maximised).
    pub b_lipschitz: f64,
    pub tau: f64,
    pub rho: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilisationParams {
    pub constants: StabilisationConstants,
    pub patches: Vec<PatchParams>,
    pub omega: f64,
}

/// `h^2 / (eps + (1 + ||b||) h + sigma h^2)`.
pub fn gamma(h: f64, b_max: f64, epsilon: f64, sigma: f64) -> f64 {
    h * h / (epsilon + (1.0 + b_max) * h + sigma * h * h)
}

impl StabilisationParams {
    /// Largest `gamma_M / min(tau_M, rho_M)` over the patches.
    pub fn gamma_ratio(&self) -> f64 {
        self.patches
            .iter()
            .map(|p| p.gamma / p.tau.min(p.rho))
            .fold(0.0, f64::max)
    }
}

/// Parameters from cell quadratures of exactness degree 6.
pub fn build_params(
    mesh: &Mesh,
    macros: &MacroDecomposition,
    coeffs: &OseenCoefficients,
    constants: StabilisationConstants,
) -> Result<StabilisationParams> {
    let rules = (0..mesh.n_cells())
        .map(|c| cell_quadrature(mesh, c, 6))
        .collect::<Result<Vec<_>>>()?;
    Ok(build_params_with(macros, coeffs, constants, &rules))
}

/// Parameters using the given per-cell quadrature rules.
pub fn build_params_with(
    macros: &MacroDecomposition,
    coeffs: &OseenCoefficients,
    constants: StabilisationConstants,
    rules: &[QuadRule],
) -> StabilisationParams {
    let b = coeffs.convection.as_ref();
    let mut patches = Vec::with_capacity(macros.len());
    let mut omega = 0.0f64;
    for patch in &macros.patches {
        let h = patch.diameter;
        let step = 1e-6 * h;
        let mut sum = Point::zeros();
        let mut measure = 0.0;
        let mut b_max = 0.0f64;
        let mut b_lipschitz = 0.0f64;
        for &c in &patch.cells {
            for (x, w) in rules[c].iter() {
                let v = b.value(x);
                sum += v * w;
                measure += w;
                b_max = b_max.max(v.norm());
                b_lipschitz = b_lipschitz.max(jacobian(b, x, step).norm());
            }
        }
        let tau = constants.c_tau * h / b_max.max(constants.guard);
        let rho = constants.c_rho * h;
        let gamma = gamma(h, b_max, coeffs.epsilon, coeffs.sigma);
        omega = omega.max(h * h * b_lipschitz / (coeffs.epsilon + coeffs.sigma * h * h));
        patches.push(PatchParams {
            h,
            b_mean: sum / measure,
            b_max,
            b_lipschitz,
            tau,
            rho,
            gamma,
        });
    }
    StabilisationParams {
        constants,
        patches,
        omega,
    }
}
