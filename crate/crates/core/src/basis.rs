//! Scaled monomial bases on cells and faces.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quadrature::QuadRule;

/// Dimension of the bivariate polynomials of total degree at most `degree`.
pub const fn poly_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Polynomials of total degree `<= degree` in the scaled variables
/// `((x - x_T) / h_T, (y - y_T) / h_T)`.
///
/// Basis functions are ordered by increasing total degree, so the first
/// `poly_dim(m)` functions span the polynomials of degree `m`. The optional
/// orthonormalisation is lower triangular and keeps this hierarchy.
#[derive(Debug, Clone)]
pub struct CellBasis {
    degree: usize,
    center: Point,
    scale: f64,
    powers: Vec<(i32, i32)>,
    /// `phi = transform * monomials` when orthonormalised.
    transform: Option<DMatrix<f64>>,
}

impl CellBasis {
    pub fn monomial(center: Point, scale: f64, degree: usize) -> Self {
        let mut powers = Vec::with_capacity(poly_dim(degree));
        for d in 0..=degree as i32 {
            for a in (0..=d).rev() {
                powers.push((a, d - a));
            }
        }
        Self {
            degree,
            center,
            scale,
            powers,
            transform: None,
        }
    }

    /// Replaces the monomials by their Gram-Schmidt orthonormalisation on `quad`.
    pub fn orthonormalized(mut self, quad: &QuadRule) -> Result<Self> {
        self.transform = None;
        let gram = self.gram(quad);
        let chol = gram.cholesky().ok_or_else(|| Error::Singular {
            what: "cell basis Gram".into(),
        })?;
        let n = self.dim();
        let l_inv = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::Singular {
                what: "cell basis Cholesky factor".into(),
            })?;
        self.transform = Some(l_inv);
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.powers.len()
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_orthonormalized(&self) -> bool {
        self.transform.is_some()
    }

    fn scaled(&self, x: Point) -> (f64, f64) {
        (
            (x.x - self.center.x) / self.scale,
            (x.y - self.center.y) / self.scale,
        )
    }

    fn powers_of(t: f64, n: usize) -> Vec<f64> {
        let mut p = Vec::with_capacity(n + 1);
        let mut v = 1.0;
        for _ in 0..=n {
            p.push(v);
            v *= t;
        }
        p
    }

    fn apply(&self, m: DVector<f64>) -> DVector<f64> {
        match &self.transform {
            Some(t) => t * m,
            None => m,
        }
    }

    pub fn values(&self, x: Point) -> DVector<f64> {
        let (u, v) = self.scaled(x);
        let pu = Self::powers_of(u, self.degree);
        let pv = Self::powers_of(v, self.degree);
        let m = DVector::from_iterator(
            self.dim(),
            self.powers
                .iter()
                .map(|&(a, b)| pu[a as usize] * pv[b as usize]),
        );
        self.apply(m)
    }

    /// Partial derivatives `(d/dx, d/dy)` of every basis function.
    pub fn gradients(&self, x: Point) -> (DVector<f64>, DVector<f64>) {
        let (u, v) = self.scaled(x);
        let pu = Self::powers_of(u, self.degree);
        let pv = Self::powers_of(v, self.degree);
        let inv = 1.0 / self.scale;
        let dx = DVector::from_iterator(
            self.dim(),
            self.powers.iter().map(|&(a, b)| {
                if a == 0 {
                    0.0
                } else {
                    a as f64 * pu[a as usize - 1] * pv[b as usize] * inv
                }
            }),
        );
        let dy = DVector::from_iterator(
            self.dim(),
            self.powers.iter().map(|&(a, b)| {
                if b == 0 {
                    0.0
                } else {
                    b as f64 * pu[a as usize] * pv[b as usize - 1] * inv
                }
            }),
        );
        (self.apply(dx), self.apply(dy))
    }

    pub fn gram(&self, quad: &QuadRule) -> DMatrix<f64> {
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for (x, w) in quad.iter() {
            let phi = self.values(x);
            g.syger(w, &phi, &phi, 1.0);
        }
        g.fill_upper_triangle_with_lower_triangle();
        g
    }

    /// Evaluates the polynomial with coefficients `coeffs` (leading basis functions).
    pub fn eval(&self, coeffs: &DVector<f64>, x: Point) -> f64 {
        let phi = self.values(x);
        phi.rows(0, coeffs.len()).dot(coeffs)
    }
}

/// Monomials `s^j`, `j <= degree`, in the scaled arc-length coordinate
/// `s = ((x - x_F) . t_F) / h_F` of a face.
#[derive(Debug, Clone)]
pub struct FaceBasis {
    degree: usize,
    midpoint: Point,
    tangent: Point,
    scale: f64,
}

impl FaceBasis {
    pub fn new(midpoint: Point, tangent: Point, scale: f64, degree: usize) -> Self {
        Self {
            degree,
            midpoint,
            tangent,
            scale,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn values(&self, x: Point) -> DVector<f64> {
        let s = (x - self.midpoint).dot(&self.tangent) / self.scale;
        let mut v = 1.0;
        DVector::from_iterator(
            self.dim(),
            (0..=self.degree).map(|_| {
                let r = v;
                v *= s;
                r
            }),
        )
    }

    pub fn gram(&self, quad: &QuadRule) -> DMatrix<f64> {
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for (x, w) in quad.iter() {
            let psi = self.values(x);
            g.syger(w, &psi, &psi, 1.0);
        }
        g.fill_upper_triangle_with_lower_triangle();
        g
    }

    pub fn eval(&self, coeffs: &DVector<f64>, x: Point) -> f64 {
        self.values(x).dot(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, Family};
    use crate::quadrature::{cell_quadrature, face_quadrature};

    #[test]
    fn dims() {
        assert_eq!(poly_dim(0), 1);
        assert_eq!(poly_dim(1), 3);
        assert_eq!(poly_dim(3), 10);
        let b = CellBasis::monomial(Point::zeros(), 1.0, 3);
        assert_eq!(b.dim(), 10);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = CellBasis::monomial(Point::new(0.3, 0.2), 0.7, 4);
        let x = Point::new(0.41, 0.13);
        let (dx, dy) = b.gradients(x);
        let h = 1e-6;
        let fx = (b.values(x + Point::new(h, 0.0)) - b.values(x - Point::new(h, 0.0))) / (2.0 * h);
        let fy = (b.values(x + Point::new(0.0, h)) - b.values(x - Point::new(0.0, h))) / (2.0 * h);
        assert!((dx - fx).amax() < 1e-8);
        assert!((dy - fy).amax() < 1e-8);
    }

    #[test]
    fn gram_spd_and_orthonormalisation() {
        let mesh = generate_mesh(Family::Hexagonal, 1);
        for c in 0..mesh.n_cells() {
            let cell = mesh.cell(c);
            let q = cell_quadrature(&mesh, c, 10).unwrap();
            let b = CellBasis::monomial(cell.centroid, cell.diameter, 3);
            let g = b.gram(&q);
            assert!((&g - g.transpose()).amax() < 1e-15);
            assert!(g.clone().cholesky().is_some());
            let o = b.orthonormalized(&q).unwrap();
            let go = o.gram(&q);
            assert!((go - DMatrix::identity(10, 10)).amax() < 1e-10, "cell {c}");
        }
    }

    #[test]
    fn orthonormal_basis_is_hierarchical() {
        // the first three orthonormal functions still span P^1
        let mesh = generate_mesh(Family::Cartesian, 0);
        let q = cell_quadrature(&mesh, 0, 8).unwrap();
        let cell = mesh.cell(0);
        let o = CellBasis::monomial(cell.centroid, cell.diameter, 3)
            .orthonormalized(&q)
            .unwrap();
        // project x + 2y onto the first three functions; residual must vanish
        let f = |p: Point| p.x + 2.0 * p.y;
        let c: DVector<f64> = q
            .iter()
            .map(|(x, w)| o.values(x).rows(0, 3).into_owned() * (w * f(x)))
            .fold(DVector::zeros(3), |a, b| a + b);
        for (x, _) in q.iter() {
            assert!((o.eval(&c, x) - f(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn face_gram_spd() {
        let mesh = generate_mesh(Family::Triangular, 1);
        for f in 0..mesh.n_faces() {
            let face = mesh.face(f);
            let b = FaceBasis::new(face.midpoint, face.tangent, face.measure, 3);
            let g = b.gram(&face_quadrature(&mesh, f, 8));
            assert!(g.cholesky().is_some());
        }
    }
}
