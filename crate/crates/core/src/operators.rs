//! Per-cell interpolation and reconstruction operators.
//!
//! Local unknowns of a cell are stored component-major. For one scalar
//! component the local vector holds the `nc` cell coefficients followed by
//! `nf` coefficients per face in the cell's face order; the velocity block
//! repeats this layout for the second component, so component `c` of scalar
//! index `i` sits at `c * ns + i`.

use nalgebra::{DMatrix, DVector};

use crate::basis::{poly_dim, CellBasis, FaceBasis};
use crate::error::{Error, Result};
use crate::forms::VectorField;
use crate::mesh::{Mesh, Point};
use crate::projection::{l2_project_cell_vector, l2_project_face_vector};
use crate::quadrature::{cell_quadrature, face_quadrature, QuadRule};

/// Face basis of degree `k` attached to a mesh face (shared by both sides).
pub fn face_basis(mesh: &Mesh, face: usize, k: usize) -> FaceBasis {
    let f = mesh.face(face);
    FaceBasis::new(f.midpoint, f.tangent, f.measure, k)
}

/// Cell basis of degree `degree` on a mesh cell; orthonormalised when `k >= 2`.
pub fn cell_basis(
    mesh: &Mesh,
    cell: usize,
    degree: usize,
    k: usize,
    quad: &QuadRule,
) -> Result<CellBasis> {
    let c = mesh.cell(cell);
    let basis = CellBasis::monomial(c.centroid, c.diameter, degree);
    if k >= 2 {
        basis.orthonormalized(quad)
    } else {
        Ok(basis)
    }
}

/// Default exactness degree of cell and face quadratures for degree `k`.
pub fn default_quadrature_degree(k: usize) -> usize {
    2 * k + 4
}

/// Geometric and algebraic data of one face seen from a cell.
#[derive(Debug, Clone)]
pub struct LocalFace {
    pub id: usize,
    pub measure: f64,
    /// Outward unit normal of the cell.
    pub normal: Point,
    pub basis: FaceBasis,
    pub quad: QuadRule,
    /// Face basis values at the quadrature points (`nq x nf`).
    pub face_values: DMatrix<f64>,
    /// Cell basis (degree `k + 1`) values at the quadrature points (`nq x n1`).
    pub cell_values: DMatrix<f64>,
    /// `b . n_TF` at the quadrature points.
    pub normal_flux: Vec<f64>,
    /// Face mass matrix (`nf x nf`).
    pub mass: DMatrix<f64>,
    /// `(psi_i, phi_j)_F` (`nf x n1`).
    pub trace: DMatrix<f64>,
}

/// Matrices of the local operators of one cell.
#[derive(Debug, Clone)]
pub struct CellOperators {
    pub cell: usize,
    pub k: usize,
    /// Cell basis of degree `k + 1`; its first `nc` functions span `P^k`.
    pub basis: CellBasis,
    pub quad: QuadRule,
    pub faces: Vec<LocalFace>,
    pub measure: f64,
    pub diameter: f64,
    /// Mass matrix of the degree-`k + 1` basis.
    pub mass: DMatrix<f64>,
    /// Gradient Gram matrix of the degree-`k + 1` basis.
    pub stiffness: DMatrix<f64>,
    /// Velocity reconstruction, scalar (`n1 x ns`).
    pub reconstruction: DMatrix<f64>,
    /// Advection reconstruction with the exact field, scalar (`nc x ns`).
    pub advection: DMatrix<f64>,
    /// Cell-derivative parts of the advection reconstruction: `d/dx`, `d/dy` (`nc x ns`).
    pub advection_cell: [DMatrix<f64>; 2],
    /// Face part of the advection reconstruction (`nc x ns`).
    pub advection_face: DMatrix<f64>,
    /// Divergence reconstruction (`nc x 2 ns`).
    pub divergence: DMatrix<f64>,
    /// Derivatives `d/dx`, `d/dy` acting on `P^k` coefficients (`nc x nc`).
    pub derivative: [DMatrix<f64>; 2],
    /// Cell basis values and gradients at the cell quadrature points (`nq x n1`).
    pub values: DMatrix<f64>,
    pub gradients: [DMatrix<f64>; 2],
    /// Exact advection field at the cell quadrature points.
    pub advection_values: Vec<Point>,
}

impl CellOperators {
    pub fn new(
        mesh: &Mesh,
        cell: usize,
        k: usize,
        b: &dyn VectorField,
        quad_degree: usize,
    ) -> Result<Self> {
        let geo = mesh.cell(cell);
        let quad = cell_quadrature(mesh, cell, quad_degree)?;
        let basis = cell_basis(mesh, cell, k + 1, k, &quad)?;
        let nc = poly_dim(k);
        let n1 = poly_dim(k + 1);
        let nf = k + 1;
        let n_faces = geo.faces.len();
        let ns = nc + n_faces * nf;

        let nq = quad.len();
        let mut values = DMatrix::zeros(nq, n1);
        let mut gx = DMatrix::zeros(nq, n1);
        let mut gy = DMatrix::zeros(nq, n1);
        for (q, x) in quad.points.iter().enumerate() {
            values.set_row(q, &basis.values(*x).transpose());
            let (dx, dy) = basis.gradients(*x);
            gx.set_row(q, &dx.transpose());
            gy.set_row(q, &dy.transpose());
        }
        let w = DMatrix::from_diagonal(&DVector::from_vec(quad.weights.clone()));
        let mass = sym(values.transpose() * &w * &values);
        let stiffness = sym(gx.transpose() * &w * &gx + gy.transpose() * &w * &gy);

        let mut faces = Vec::with_capacity(n_faces);
        for (l, &f) in geo.faces.iter().enumerate() {
            let fq = face_quadrature(mesh, f, quad_degree);
            let fb = face_basis(mesh, f, k);
            let normal = mesh.outward_normal(cell, l);
            let m = fq.len();
            let mut face_values = DMatrix::zeros(m, nf);
            let mut cell_values = DMatrix::zeros(m, n1);
            let mut normal_flux = Vec::with_capacity(m);
            for (q, x) in fq.points.iter().enumerate() {
                face_values.set_row(q, &fb.values(*x).transpose());
                cell_values.set_row(q, &basis.values(*x).transpose());
                normal_flux.push(b.value(*x).dot(&normal));
            }
            let fw = DMatrix::from_diagonal(&DVector::from_vec(fq.weights.clone()));
            let fmass = sym(face_values.transpose() * &fw * &face_values);
            let trace = face_values.transpose() * &fw * &cell_values;
            faces.push(LocalFace {
                id: f,
                measure: mesh.face(f).measure,
                normal,
                basis: fb,
                quad: fq,
                face_values,
                cell_values,
                normal_flux,
                mass: fmass,
                trace,
            });
        }

        let face_off = |l: usize| nc + l * nf;

        // velocity reconstruction
        let mut rhs = DMatrix::zeros(n1, ns);
        rhs.view_mut((0, 0), (n1, nc))
            .copy_from(&stiffness.view((0, 0), (n1, nc)));
        for (l, lf) in faces.iter().enumerate() {
            for (q, &wq) in lf.quad.weights.iter().enumerate() {
                let x = lf.quad.points[q];
                let (dx, dy) = basis.gradients(x);
                let dn = dx * lf.normal.x + dy * lf.normal.y;
                for j in 0..n1 {
                    let a = wq * dn[j];
                    for i in 0..nc {
                        rhs[(j, i)] -= a * lf.cell_values[(q, i)];
                    }
                    for i in 0..nf {
                        rhs[(j, face_off(l) + i)] += a * lf.face_values[(q, i)];
                    }
                }
            }
        }
        let kred = stiffness.view((1, 1), (n1 - 1, n1 - 1)).into_owned();
        let chol = kred.cholesky().ok_or_else(|| Error::Singular {
            what: format!("reconstruction stiffness of cell {cell}"),
        })?;
        let sol = chol.solve(&rhs.rows(1, n1 - 1).into_owned());
        let mut reconstruction = DMatrix::zeros(n1, ns);
        reconstruction.rows_mut(1, n1 - 1).copy_from(&sol);
        let moments: DVector<f64> = values.transpose() * DVector::from_vec(quad.weights.clone());
        let mut row0 = DMatrix::zeros(1, ns);
        for i in 0..nc {
            row0[(0, i)] = moments[i];
        }
        for i in 1..n1 {
            row0 -= reconstruction.row(i) * moments[i];
        }
        reconstruction.set_row(0, &(row0 / moments[0]).row(0));

        // advection reconstruction
        let mk = mass.view((0, 0), (nc, nc)).into_owned();
        let mk_chol = mk.clone().cholesky().ok_or_else(|| Error::Singular {
            what: format!("mass of cell {cell}"),
        })?;
        let vk = values.columns(0, nc).into_owned();
        let mut bdx = DMatrix::zeros(nc, ns);
        let mut bdy = DMatrix::zeros(nc, ns);
        bdx.view_mut((0, 0), (nc, nc))
            .copy_from(&(vk.transpose() * &w * gx.columns(0, nc)));
        bdy.view_mut((0, 0), (nc, nc))
            .copy_from(&(vk.transpose() * &w * gy.columns(0, nc)));
        let advection_values: Vec<Point> = quad.points.iter().map(|&x| b.value(x)).collect();
        let mut bcell = DMatrix::zeros(nc, ns);
        for (q, &wq) in quad.weights.iter().enumerate() {
            let bv = advection_values[q];
            for j in 0..nc {
                let a = wq * values[(q, j)];
                for i in 0..nc {
                    bcell[(j, i)] += a * (bv.x * gx[(q, i)] + bv.y * gy[(q, i)]);
                }
            }
        }
        let mut bface = DMatrix::zeros(nc, ns);
        for (l, lf) in faces.iter().enumerate() {
            for (q, &wq) in lf.quad.weights.iter().enumerate() {
                let bn = lf.normal_flux[q];
                for j in 0..nc {
                    let a = wq * bn * lf.cell_values[(q, j)];
                    for i in 0..nc {
                        bface[(j, i)] -= a * lf.cell_values[(q, i)];
                    }
                    for i in 0..nf {
                        bface[(j, face_off(l) + i)] += a * lf.face_values[(q, i)];
                    }
                }
            }
        }
        let advection_cell = [mk_chol.solve(&bdx), mk_chol.solve(&bdy)];
        let advection_face = mk_chol.solve(&bface);
        let advection = mk_chol.solve(&bcell) + &advection_face;

        // divergence reconstruction
        let mut bdiv = DMatrix::zeros(nc, 2 * ns);
        bdiv.view_mut((0, 0), (nc, ns)).copy_from(&bdx);
        bdiv.view_mut((0, ns), (nc, ns)).copy_from(&bdy);
        for (l, lf) in faces.iter().enumerate() {
            for (q, &wq) in lf.quad.weights.iter().enumerate() {
                for (c, nc_comp) in [lf.normal.x, lf.normal.y].into_iter().enumerate() {
                    for j in 0..nc {
                        let a = wq * nc_comp * lf.cell_values[(q, j)];
                        for i in 0..nc {
                            bdiv[(j, c * ns + i)] -= a * lf.cell_values[(q, i)];
                        }
                        for i in 0..nf {
                            bdiv[(j, c * ns + face_off(l) + i)] += a * lf.face_values[(q, i)];
                        }
                    }
                }
            }
        }
        let divergence = mk_chol.solve(&bdiv);
        let derivative = [
            advection_cell[0].columns(0, nc).into_owned(),
            advection_cell[1].columns(0, nc).into_owned(),
        ];

        Ok(Self {
            cell,
            k,
            basis,
            quad,
            faces,
            measure: geo.measure,
            diameter: geo.diameter,
            mass,
            stiffness,
            reconstruction,
            advection,
            advection_cell,
            advection_face,
            divergence,
            derivative,
            values,
            gradients: [gx, gy],
            advection_values,
        })
    }

    /// Dimension of `P^k` on the cell.
    pub fn nc(&self) -> usize {
        poly_dim(self.k)
    }

    /// Dimension of `P^{k+1}` on the cell.
    pub fn n1(&self) -> usize {
        poly_dim(self.k + 1)
    }

    pub fn nf(&self) -> usize {
        self.k + 1
    }

    /// Scalar local size `nc + n_faces * nf`.
    pub fn ns(&self) -> usize {
        self.nc() + self.faces.len() * self.nf()
    }

    /// Velocity block size `2 ns`.
    pub fn nv(&self) -> usize {
        2 * self.ns()
    }

    /// Offset of local face `l` inside a scalar block.
    pub fn face_offset(&self, l: usize) -> usize {
        self.nc() + l * self.nf()
    }

    /// Mass matrix of `P^k`.
    pub fn mass_k(&self) -> DMatrix<f64> {
        self.mass.view((0, 0), (self.nc(), self.nc())).into_owned()
    }

    /// Selects the cell coefficients of a scalar block (`nc x ns`).
    pub fn cell_selector(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.nc(), self.ns());
        s.fill_diagonal(1.0);
        s
    }

    /// Advection reconstruction for a constant field `bm` (`nc x ns`).
    pub fn advection_constant(&self, bm: Point) -> DMatrix<f64> {
        &self.advection_cell[0] * bm.x + &self.advection_cell[1] * bm.y + &self.advection_face
    }

    /// Scalar jump `v_F - v_T` at quadrature point `q` of local face `l` (`1 x ns`).
    pub fn jump_row(&self, l: usize, q: usize) -> DVector<f64> {
        let lf = &self.faces[l];
        let mut j = DVector::zeros(self.ns());
        for i in 0..self.nc() {
            j[i] = -lf.cell_values[(q, i)];
        }
        let off = self.face_offset(l);
        for i in 0..self.nf() {
            j[off + i] = lf.face_values[(q, i)];
        }
        j
    }

    /// `I_T^k v`: projections onto the cell and face spaces.
    pub fn interpolate(&self, v: impl Fn(Point) -> Point) -> Result<DVector<f64>> {
        let nc = self.nc();
        let ns = self.ns();
        let cell = l2_project_cell_vector(&self.basis, &self.quad, self.k, &v)?;
        let mut out = DVector::zeros(2 * ns);
        for c in 0..2 {
            out.rows_mut(c * ns, nc).copy_from(&cell.rows(c * nc, nc));
        }
        for (l, lf) in self.faces.iter().enumerate() {
            let fv = l2_project_face_vector(&lf.basis, &lf.quad, &v)?;
            let nf = self.nf();
            for c in 0..2 {
                out.rows_mut(c * ns + self.face_offset(l), nf)
                    .copy_from(&fv.rows(c * nf, nf));
            }
        }
        Ok(out)
    }

    /// Coefficients of `r_T^{k+1}` applied to a velocity block (`2 n1`).
    pub fn reconstruct_velocity(&self, block: &DVector<f64>) -> DVector<f64> {
        self.apply_scalar(&self.reconstruction, block)
    }

    /// Coefficients of `G_{b,T}^k` with the exact field (`2 nc`).
    pub fn reconstruct_advection(&self, block: &DVector<f64>) -> DVector<f64> {
        self.apply_scalar(&self.advection, block)
    }

    /// Coefficients of `G_{b_M,T}^k` for a constant field (`2 nc`).
    pub fn reconstruct_advection_constant(&self, block: &DVector<f64>, bm: Point) -> DVector<f64> {
        self.apply_scalar(&self.advection_constant(bm), block)
    }

    /// Coefficients of `D_T^k` (`nc`).
    pub fn reconstruct_divergence(&self, block: &DVector<f64>) -> DVector<f64> {
        &self.divergence * block
    }

    /// Applies a scalar operator to both components of a velocity block.
    pub fn apply_scalar(&self, op: &DMatrix<f64>, block: &DVector<f64>) -> DVector<f64> {
        let ns = self.ns();
        let a = op * block.rows(0, ns);
        let b = op * block.rows(ns, ns);
        crate::projection::stack(&a, &b)
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// `diag(a, a)` for a scalar operator acting on both velocity components.
pub fn block_diag2(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    out.view_mut((0, 0), (r, c)).copy_from(a);
    out.view_mut((r, c), (r, c)).copy_from(a);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::ConstantField;
    use crate::mesh::{generate_mesh, Family};

    fn pack(mesh: &Mesh, c: usize, k: usize) -> CellOperators {
        let b = ConstantField(Point::new(1.0, 1.0));
        CellOperators::new(mesh, c, k, &b, default_quadrature_degree(k)).unwrap()
    }

    #[test]
    fn constant_block_reconstructions() {
        let mesh = generate_mesh(Family::Hexagonal, 0);
        for k in 0..3 {
            for c in 0..mesh.n_cells() {
                let p = pack(&mesh, c, k);
                let block = p.interpolate(|_| Point::new(2.0, -1.0)).unwrap();
                let r = p.reconstruct_velocity(&block);
                let n1 = p.n1();
                for (x, _) in p.quad.iter() {
                    let phi = p.basis.values(x);
                    assert!((phi.dot(&r.rows(0, n1)) - 2.0).abs() < 1e-11);
                    assert!((phi.dot(&r.rows(n1, n1)) + 1.0).abs() < 1e-11);
                }
                assert!(p.reconstruct_advection(&block).amax() < 1e-11);
                assert!(p.reconstruct_divergence(&block).amax() < 1e-11);
            }
        }
    }

    #[test]
    fn divergence_of_linear_fields() {
        let mesh = generate_mesh(Family::Triangular, 0);
        for c in 0..mesh.n_cells() {
            let p = pack(&mesh, c, 1);
            let d0 = p.reconstruct_divergence(&p.interpolate(|x| Point::new(x.x, -x.y)).unwrap());
            assert!(d0.amax() < 1e-12);
            let d2 = p.reconstruct_divergence(&p.interpolate(|x| Point::new(x.x, x.y)).unwrap());
            // the constant 2 in the scaled monomial basis
            assert!((d2[0] - 2.0).abs() < 1e-12);
            assert!(d2.rows(1, 2).amax() < 1e-12);
        }
    }
}
