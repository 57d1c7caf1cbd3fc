//! Errors against manufactured solutions and empirical rates.

use serde::Serialize;

use crate::discretization::Discretization;
use crate::error::Result;
use crate::mesh::Point;
use crate::system::Solution;

use super::norms::norm_squares;

/// Error of one run, measured between the interpolated exact solution and the
/// discrete solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub err_lp: f64,
    pub err_supg: f64,
    pub err_b: f64,
    pub err_eps: f64,
    pub err_st: f64,
    /// `||pi_h^k p - p_h||`.
    pub err_pressure: f64,
    /// `||u - u_T||` over the cells, for information.
    pub err_velocity_exact: f64,
    pub rate_lp: Option<f64>,
    pub rate_supg: Option<f64>,
}

pub fn compute_errors(
    disc: &Discretization,
    solution: &Solution,
    u: impl Fn(Point) -> Point + Sync,
    p: impl Fn(Point) -> f64 + Sync,
    level: usize,
    ndof: usize,
) -> Result<ErrorReport> {
    let iu = disc.interpolate(&u)?;
    let ip = disc.project_pressure(&p)?;
    let eu = iu.add_scaled(&solution.velocity, -1.0);
    let ep = ip.add_scaled(&solution.pressure, -1.0);
    let n = norm_squares(disc, &eu, &ep);
    let sq = |x: f64| x.max(0.0).sqrt();

    let mut exact = 0.0;
    for (c, o) in disc.ops.iter().enumerate() {
        for (x, w) in o.quad.iter() {
            exact += w * (u(x) - disc.eval_velocity(&solution.velocity, c, x)).norm_squared();
        }
    }
    Ok(ErrorReport {
        level,
        h: disc.mesh.h(),
        ndof,
        err_lp: sq(n.lp()),
        err_supg: sq(n.supg),
        err_b: sq(n.b),
        err_eps: sq(n.eps),
        err_st: sq(n.st),
        err_pressure: sq(n.pressure),
        err_velocity_exact: exact.sqrt(),
        rate_lp: None,
        rate_supg: None,
    })
}

/// `log(e_l / e_{l-1}) / log(h_l / h_{l-1})` for consecutive pairs; `None`
/// when an error is not positive.
pub fn compute_rate(pairs: &[(f64, f64)]) -> Vec<Option<f64>> {
    pairs
        .windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            if e0 > 0.0 && e1 > 0.0 && h0 > 0.0 && h1 > 0.0 && h0 != h1 {
                Some((e1 / e0).ln() / (h1 / h0).ln())
            } else {
                None
            }
        })
        .collect()
}

/// Fills the rate columns of consecutive reports.
pub fn fill_rates(reports: &mut [ErrorReport]) {
    let lp: Vec<_> = reports.iter().map(|r| (r.h, r.err_lp)).collect();
    let supg: Vec<_> = reports.iter().map(|r| (r.h, r.err_supg)).collect();
    let (rl, rs) = (compute_rate(&lp), compute_rate(&supg));
    for (i, r) in reports.iter_mut().enumerate() {
        r.rate_lp = if i == 0 { None } else { rl[i - 1] };
        r.rate_supg = if i == 0 { None } else { rs[i - 1] };
    }
}
