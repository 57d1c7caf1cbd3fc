//! L2 projections on cells, faces and macro patches.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::basis::{poly_dim, CellBasis, FaceBasis};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Patch, Point};
use crate::quadrature::QuadRule;

fn solve_gram(gram: DMatrix<f64>, rhs: DVector<f64>, what: &str) -> Result<DVector<f64>> {
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Singular { what: what.into() })?;
    Ok(chol.solve(&rhs))
}

/// Coefficients of the L2 projection of `f` onto the first `poly_dim(degree)`
/// functions of `basis`.
pub fn l2_project_cell(
    basis: &CellBasis,
    quad: &QuadRule,
    degree: usize,
    f: impl Fn(Point) -> f64,
) -> Result<DVector<f64>> {
    let n = poly_dim(degree);
    assert!(n <= basis.dim(), "projection degree exceeds basis degree");
    let mut gram = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for (x, w) in quad.iter() {
        let phi = basis.values(x).rows(0, n).into_owned();
        gram.syger(w, &phi, &phi, 1.0);
        rhs.axpy(w * f(x), &phi, 1.0);
    }
    gram.fill_upper_triangle_with_lower_triangle();
    solve_gram(gram, rhs, "cell Gram")
}

/// Component-wise projection of a vector field; components stacked.
pub fn l2_project_cell_vector(
    basis: &CellBasis,
    quad: &QuadRule,
    degree: usize,
    f: impl Fn(Point) -> Point,
) -> Result<DVector<f64>> {
    let a = l2_project_cell(basis, quad, degree, |x| f(x).x)?;
    let b = l2_project_cell(basis, quad, degree, |x| f(x).y)?;
    Ok(stack(&a, &b))
}

pub fn l2_project_face(
    basis: &FaceBasis,
    quad: &QuadRule,
    f: impl Fn(Point) -> f64,
) -> Result<DVector<f64>> {
    let n = basis.dim();
    let mut rhs = DVector::zeros(n);
    for (x, w) in quad.iter() {
        rhs.axpy(w * f(x), &basis.values(x), 1.0);
    }
    solve_gram(basis.gram(quad), rhs, "face Gram")
}

pub fn l2_project_face_vector(
    basis: &FaceBasis,
    quad: &QuadRule,
    f: impl Fn(Point) -> Point,
) -> Result<DVector<f64>> {
    let a = l2_project_face(basis, quad, |x| f(x).x)?;
    let b = l2_project_face(basis, quad, |x| f(x).y)?;
    Ok(stack(&a, &b))
}

pub(crate) fn stack(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut v = DVector::zeros(a.len() + b.len());
    v.rows_mut(0, a.len()).copy_from(a);
    v.rows_mut(a.len(), b.len()).copy_from(b);
    v
}

/// Fluctuation operator `Id - pi_M^{k-1}` on a macro patch.
///
/// The projection is computed with a single Gram solve over the union of the
/// cell quadratures of the patch. For `k = 0` the projected space is `{0}` and
/// the operator is the identity.
#[derive(Debug, Clone)]
pub struct PatchFluctuation {
    basis: Option<CellBasis>,
    chol: Option<Cholesky<f64, Dyn>>,
    quad: QuadRule,
    /// Start of each cell's points inside `quad`, plus the total.
    offsets: Vec<usize>,
}

impl PatchFluctuation {
    /// `cell_quads[i]` must be the rule of `patch.cells[i]`.
    pub fn new(patch: &Patch, cell_quads: &[&QuadRule], k: usize) -> Result<Self> {
        assert_eq!(patch.cells.len(), cell_quads.len());
        let quad = QuadRule::union(cell_quads.iter().copied());
        let mut offsets = Vec::with_capacity(cell_quads.len() + 1);
        let mut acc = 0;
        for q in cell_quads {
            offsets.push(acc);
            acc += q.len();
        }
        offsets.push(acc);
        if k == 0 {
            return Ok(Self {
                basis: None,
                chol: None,
                quad,
                offsets,
            });
        }
        let basis = CellBasis::monomial(patch.centroid, patch.diameter, k - 1);
        let chol = basis
            .gram(&quad)
            .cholesky()
            .ok_or_else(|| Error::Singular {
                what: "patch Gram".into(),
            })?;
        Ok(Self {
            basis: Some(basis),
            chol: Some(chol),
            quad,
            offsets,
        })
    }

    /// Convenience constructor building the cell rules from the mesh.
    pub fn on_mesh(mesh: &Mesh, patch: &Patch, k: usize, degree: usize) -> Result<Self> {
        let quads = patch
            .cells
            .iter()
            .map(|&c| crate::quadrature::cell_quadrature(mesh, c, degree))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&QuadRule> = quads.iter().collect();
        Self::new(patch, &refs, k)
    }

    pub fn quadrature(&self) -> &QuadRule {
        &self.quad
    }

    /// Range of the points of the `i`-th patch cell inside [`Self::quadrature`].
    pub fn cell_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Coefficients of `pi_M^{k-1} g` in the patch basis, `g` sampled at the
    /// patch quadrature points.
    pub fn project(&self, values: &[f64]) -> Option<DVector<f64>> {
        let (basis, chol) = (self.basis.as_ref()?, self.chol.as_ref()?);
        let mut rhs = DVector::zeros(basis.dim());
        for ((x, w), &g) in self.quad.iter().zip(values) {
            rhs.axpy(w * g, &basis.values(x), 1.0);
        }
        Some(chol.solve(&rhs))
    }

    /// `g - pi_M^{k-1} g` at the patch quadrature points.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.quad.len());
        match (self.project(values), &self.basis) {
            (Some(c), Some(basis)) => self
                .quad
                .points
                .iter()
                .zip(values)
                .map(|(&x, &g)| g - basis.eval(&c, x))
                .collect(),
            _ => values.to_vec(),
        }
    }

    /// Matrix `Q` with `g^T Q g = ||K_M g||_M^2` for cellwise polynomials `g`
    /// given by the first `n` coefficients of each cell basis, stacked per cell.
    ///
    /// Built from the fluctuation values at the quadrature points, so that
    /// fields in the projected space give zero up to rounding of the values
    /// rather than of their squares.
    pub fn fluctuation_gram(&self, cell_bases: &[&CellBasis], n: usize) -> DMatrix<f64> {
        let m = cell_bases.len();
        let nq = self.quad.len();
        let mut values = DMatrix::zeros(nq, m * n);
        for (i, basis) in cell_bases.iter().enumerate() {
            for p in self.cell_range(i) {
                let phi = basis.values(self.quad.points[p]);
                for j in 0..n {
                    values[(p, i * n + j)] = phi[j];
                }
            }
        }
        if let (Some(pb), Some(chol)) = (&self.basis, &self.chol) {
            let mut psi = DMatrix::zeros(nq, pb.dim());
            for (p, &x) in self.quad.points.iter().enumerate() {
                psi.row_mut(p).tr_copy_from(&pb.values(x));
            }
            let mut weighted = psi.transpose();
            for (p, w) in self.quad.weights.iter().enumerate() {
                weighted.column_mut(p).scale_mut(*w);
            }
            let coeffs = chol.solve(&(weighted * &values));
            values -= psi * coeffs;
        }
        let mut weighted = values.transpose();
        for (p, w) in self.quad.weights.iter().enumerate() {
            weighted.column_mut(p).scale_mut(*w);
        }
        let q = weighted * values;
        let qt = q.transpose();
        (q + qt) * 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_macro_decomposition, generate_mesh, Family, MacroMode};
    use crate::quadrature::{cell_quadrature, face_quadrature};

    #[test]
    fn projection_reproduces_polynomials() {
        let mesh = generate_mesh(Family::Hexagonal, 1);
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            let q = cell_quadrature(&mesh, c, 8).unwrap();
            let b = CellBasis::monomial(cell.centroid, cell.diameter, 2);
            let one = l2_project_cell(&b, &q, 0, |_| 1.0).unwrap();
            assert!((one[0] - 1.0).abs() < 1e-13);
            let f = |p: Point| 1.0 + p.x - 3.0 * p.x * p.y + p.y * p.y;
            let c2 = l2_project_cell(&b, &q, 2, f).unwrap();
            for (x, _) in q.iter() {
                assert!((b.eval(&c2, x) - f(x)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn x_on_unit_square() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let q = QuadRule::polygon(&pts, Point::new(0.5, 0.5), 4).unwrap();
        let b = CellBasis::monomial(Point::new(0.5, 0.5), 2f64.sqrt(), 1);
        let c = l2_project_cell(&b, &q, 1, |p| p.x).unwrap();
        // x = 0.5 + sqrt(2) * ((x - 0.5) / sqrt(2))
        assert!((c[0] - 0.5).abs() < 1e-13);
        assert!((c[1] - 2f64.sqrt()).abs() < 1e-13);
        assert!(c[2].abs() < 1e-13);
    }

    #[test]
    fn face_projection_of_exp_matches_least_squares() {
        let mesh = generate_mesh(Family::Cartesian, 0);
        let f = 0;
        let face = mesh.face(f);
        let fb = FaceBasis::new(face.midpoint, face.tangent, face.measure, 2);
        let q = face_quadrature(&mesh, f, 8);
        let c = l2_project_face(&fb, &q, |p| p.x.exp()).unwrap();
        // oversampled weighted least squares with a 40-point Gauss rule
        let fine = QuadRule::segment(mesh.face_points(f)[0], mesh.face_points(f)[1], 79);
        let mut a = DMatrix::zeros(fine.len(), 3);
        let mut rhs = DVector::zeros(fine.len());
        for (i, (x, w)) in fine.iter().enumerate() {
            let s = w.sqrt();
            let psi = fb.values(x);
            for j in 0..3 {
                a[(i, j)] = s * psi[j];
            }
            rhs[i] = s * x.x.exp();
        }
        let ls = a.svd(true, true).solve(&rhs, 1e-14).unwrap();
        assert!((c - ls).amax() < 1e-10);
    }

    #[test]
    fn fluctuation_k0_is_identity() {
        let mesh = generate_mesh(Family::Cartesian, 0);
        let d = build_macro_decomposition(&mesh, MacroMode::VertexPatch);
        let k = PatchFluctuation::on_mesh(&mesh, &d.patches[0], 0, 4).unwrap();
        let g: Vec<f64> = k.quadrature().points.iter().map(|p| p.x.sin()).collect();
        assert_eq!(k.apply(&g), g);
    }

    #[test]
    fn fluctuation_annihilates_and_is_idempotent() {
        let mesh = generate_mesh(Family::Triangular, 1);
        let d = build_macro_decomposition(&mesh, MacroMode::VertexPatch);
        for patch in &d.patches {
            for k in 1..4 {
                let op = PatchFluctuation::on_mesh(&mesh, patch, k, 8).unwrap();
                let pts = &op.quadrature().points;
                let poly: Vec<f64> = pts
                    .iter()
                    .map(|p| match k {
                        1 => 1.5,
                        2 => 1.0 + 2.0 * p.x - p.y,
                        _ => 1.0 + 2.0 * p.x - p.y + p.x * p.y,
                    })
                    .collect();
                let r = op.apply(&poly);
                assert!(r.iter().all(|v| v.abs() < 1e-11), "k={k}");
                let g: Vec<f64> = pts.iter().map(|p| (3.0 * p.x).sin() * p.y.exp()).collect();
                let once = op.apply(&g);
                let twice = op.apply(&once);
                let diff = once
                    .iter()
                    .zip(&twice)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-12);
            }
        }
    }
}
