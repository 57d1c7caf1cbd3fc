//! Discrete spaces, cellwise operator packs and patch blocks of one problem.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::basis::poly_dim;
use crate::error::{Error, Result};
use crate::forms::{
    build_params_with, convection_block, normal_jump_block, pressure_coupling, viscous_block,
    OseenCoefficients, PatchForms, StabilisationConstants, StabilisationParams,
};
use crate::mesh::{build_macro_decomposition, MacroDecomposition, MacroMode, Mesh, Point};
use crate::operators::{default_quadrature_degree, face_basis, CellOperators};
use crate::projection::{l2_project_cell, l2_project_face_vector};
use crate::quadrature::face_quadrature;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationOptions {
    pub degree: usize,
    pub macro_mode: MacroMode,
    pub constants: StabilisationConstants,
    /// Exactness degree of cell and face quadratures; `2k + 4` when `None`.
    pub quadrature_degree: Option<usize>,
}

impl DiscretizationOptions {
    pub fn new(degree: usize) -> Self {
        Self {
            degree,
            macro_mode: MacroMode::Trivial,
            constants: StabilisationConstants::default(),
            quadrature_degree: None,
        }
    }

    pub fn with_macro(mut self, mode: MacroMode) -> Self {
        self.macro_mode = mode;
        self
    }

    pub fn with_constants(mut self, constants: StabilisationConstants) -> Self {
        self.constants = constants;
        self
    }
}

/// Velocity in the hybrid space: `P^k` coefficients per cell and per face,
/// component-major (`[x coefficients, y coefficients]`).
#[derive(Debug, Clone, PartialEq)]
pub struct HybridVelocity {
    pub cells: Vec<DVector<f64>>,
    pub faces: Vec<DVector<f64>>,
}

impl HybridVelocity {
    pub fn zeros(mesh: &Mesh, k: usize) -> Self {
        Self {
            cells: vec![DVector::zeros(2 * poly_dim(k)); mesh.n_cells()],
            faces: vec![DVector::zeros(2 * (k + 1)); mesh.n_faces()],
        }
    }

    pub fn add_scaled(&self, other: &Self, a: f64) -> Self {
        Self {
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(x, y)| x + y * a)
                .collect(),
            faces: self
                .faces
                .iter()
                .zip(&other.faces)
                .map(|(x, y)| x + y * a)
                .collect(),
        }
    }
}

/// Piecewise `P^k` pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    pub cells: Vec<DVector<f64>>,
}

impl PressureField {
    pub fn zeros(mesh: &Mesh, k: usize) -> Self {
        Self {
            cells: vec![DVector::zeros(poly_dim(k)); mesh.n_cells()],
        }
    }

    pub fn add_scaled(&self, other: &Self, a: f64) -> Self {
        Self {
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(x, y)| x + y * a)
                .collect(),
        }
    }
}

/// Precomputed cell blocks.
#[derive(Debug, Clone)]
pub struct CellForms {
    pub viscous: nalgebra::DMatrix<f64>,
    pub convection: nalgebra::DMatrix<f64>,
    pub normal_jump: nalgebra::DMatrix<f64>,
    /// `q^T B v = -(D_T v, q)_T`.
    pub coupling: nalgebra::DMatrix<f64>,
}

#[derive(Debug)]
pub struct Discretization {
    pub mesh: Mesh,
    pub macros: MacroDecomposition,
    pub degree: usize,
    pub coeffs: OseenCoefficients,
    pub params: StabilisationParams,
    pub ops: Vec<CellOperators>,
    pub forms: Vec<CellForms>,
    pub patches: Vec<PatchForms>,
}

impl Discretization {
    pub fn new(
        mesh: Mesh,
        coeffs: OseenCoefficients,
        options: DiscretizationOptions,
    ) -> Result<Self> {
        coeffs.validate()?;
        if mesh.n_cells() == 0 {
            return Err(Error::EmptyMesh);
        }
        let k = options.degree;
        let qdeg = options
            .quadrature_degree
            .unwrap_or_else(|| default_quadrature_degree(k));
        let macros = build_macro_decomposition(&mesh, options.macro_mode);
        let b = coeffs.convection.as_ref();
        let ops = (0..mesh.n_cells())
            .into_par_iter()
            .map(|c| CellOperators::new(&mesh, c, k, b, qdeg))
            .collect::<Result<Vec<_>>>()?;

        let div = coeffs.max_divergence(ops.iter().map(|o| &o.quad), 1e-6 * mesh.h());
        if div > 1e-10 {
            log::warn!("convection field is not divergence free: max |div b| = {div:e}");
        }
        let rules: Vec<_> = ops.iter().map(|o| o.quad.clone()).collect();
        let params = build_params_with(&macros, &coeffs, options.constants, &rules);
        log::debug!(
            "omega = {:e}, max gamma/min(tau, rho) = {:e}",
            params.omega,
            params.gamma_ratio()
        );

        let (eps, sigma) = (coeffs.epsilon, coeffs.sigma);
        let forms = ops
            .par_iter()
            .map(|o| CellForms {
                viscous: viscous_block(o, eps),
                convection: convection_block(o, sigma),
                normal_jump: normal_jump_block(o),
                coupling: pressure_coupling(o),
            })
            .collect();
        let patches = macros
            .patches
            .par_iter()
            .zip(params.patches.par_iter())
            .map(|(patch, pp)| {
                let pops: Vec<&CellOperators> = patch.cells.iter().map(|&c| &ops[c]).collect();
                PatchForms::new(patch, &pops, pp, k)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            mesh,
            macros,
            degree: k,
            coeffs,
            params,
            ops,
            forms,
            patches,
        })
    }

    pub fn nc(&self) -> usize {
        poly_dim(self.degree)
    }

    pub fn nf(&self) -> usize {
        self.degree + 1
    }

    /// Velocity with every coefficient drawn from `gen`; boundary faces are
    /// zero when `zero_boundary` is set.
    pub fn velocity_from_fn(
        &self,
        zero_boundary: bool,
        mut gen: impl FnMut() -> f64,
    ) -> HybridVelocity {
        let mut u = HybridVelocity::zeros(&self.mesh, self.degree);
        for c in &mut u.cells {
            c.iter_mut().for_each(|v| *v = gen());
        }
        for (f, v) in u.faces.iter_mut().enumerate() {
            if !(zero_boundary && self.mesh.face(f).is_boundary()) {
                v.iter_mut().for_each(|x| *x = gen());
            }
        }
        u
    }

    pub fn pressure_from_fn(&self, mut gen: impl FnMut() -> f64) -> PressureField {
        let mut p = PressureField::zeros(&self.mesh, self.degree);
        for c in &mut p.cells {
            c.iter_mut().for_each(|v| *v = gen());
        }
        p
    }

    /// Local velocity block of `cell`.
    pub fn gather(&self, cell: usize, u: &HybridVelocity) -> DVector<f64> {
        let o = &self.ops[cell];
        let (nc, nf, ns) = (o.nc(), o.nf(), o.ns());
        let mut out = DVector::zeros(2 * ns);
        for c in 0..2 {
            out.rows_mut(c * ns, nc)
                .copy_from(&u.cells[cell].rows(c * nc, nc));
            for (l, &f) in self.mesh.cell(cell).faces.iter().enumerate() {
                out.rows_mut(c * ns + o.face_offset(l), nf)
                    .copy_from(&u.faces[f].rows(c * nf, nf));
            }
        }
        out
    }

    /// Stacked local velocity blocks of a patch.
    pub fn gather_patch(&self, patch: usize, u: &HybridVelocity) -> DVector<f64> {
        let pf = &self.patches[patch];
        let mut out = DVector::zeros(*pf.velocity_offsets.last().unwrap());
        for (i, &c) in pf.cells.iter().enumerate() {
            let b = self.gather(c, u);
            out.rows_mut(pf.velocity_offsets[i], b.len()).copy_from(&b);
        }
        out
    }

    pub fn gather_patch_pressure(&self, patch: usize, p: &PressureField) -> DVector<f64> {
        let pf = &self.patches[patch];
        let nc = self.nc();
        let mut out = DVector::zeros(pf.cells.len() * nc);
        for (i, &c) in pf.cells.iter().enumerate() {
            out.rows_mut(i * nc, nc).copy_from(&p.cells[c]);
        }
        out
    }

    /// Global interpolant `I_h^k v`.
    pub fn interpolate(&self, v: impl Fn(Point) -> Point + Sync) -> Result<HybridVelocity> {
        let nc = self.nc();
        let cells = self
            .ops
            .par_iter()
            .map(|o| {
                let a = l2_project_cell(&o.basis, &o.quad, self.degree, |x| v(x).x)?;
                let b = l2_project_cell(&o.basis, &o.quad, self.degree, |x| v(x).y)?;
                let mut out = DVector::zeros(2 * nc);
                out.rows_mut(0, nc).copy_from(&a);
                out.rows_mut(nc, nc).copy_from(&b);
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let faces = (0..self.mesh.n_faces())
            .map(|f| self.project_face(f, &v))
            .collect::<Result<Vec<_>>>()?;
        Ok(HybridVelocity { cells, faces })
    }

    /// `pi_F^k v` on a mesh face, components stacked.
    pub fn project_face(&self, face: usize, v: impl Fn(Point) -> Point) -> Result<DVector<f64>> {
        let fb = face_basis(&self.mesh, face, self.degree);
        let q = face_quadrature(&self.mesh, face, self.ops[0].quad.degree);
        l2_project_face_vector(&fb, &q, v)
    }

    /// Cellwise projection `pi_h^k p`.
    pub fn project_pressure(&self, p: impl Fn(Point) -> f64 + Sync) -> Result<PressureField> {
        let cells = self
            .ops
            .par_iter()
            .map(|o| l2_project_cell(&o.basis, &o.quad, self.degree, &p))
            .collect::<Result<Vec<_>>>()?;
        Ok(PressureField { cells })
    }

    pub fn eval_velocity(&self, u: &HybridVelocity, cell: usize, x: Point) -> Point {
        let nc = self.nc();
        let phi = self.ops[cell].basis.values(x);
        let phi = phi.rows(0, nc);
        Point::new(
            phi.dot(&u.cells[cell].rows(0, nc)),
            phi.dot(&u.cells[cell].rows(nc, nc)),
        )
    }

    pub fn eval_pressure(&self, p: &PressureField, cell: usize, x: Point) -> f64 {
        self.ops[cell].basis.eval(&p.cells[cell], x)
    }

    /// `sum_T (p, 1)_T`.
    pub fn pressure_mean(&self, p: &PressureField) -> f64 {
        self.ops
            .iter()
            .zip(&p.cells)
            .map(|(o, pc)| {
                o.quad
                    .iter()
                    .map(|(x, w)| w * o.basis.eval(pc, x))
                    .sum::<f64>()
            })
            .sum()
    }

    /// `A_h^{LP}((u, p), (v, q))` evaluated block by block.
    pub fn bilinear_form(
        &self,
        (u, p): (&HybridVelocity, &PressureField),
        (v, q): (&HybridVelocity, &PressureField),
    ) -> f64 {
        let mut total = 0.0;
        for (c, f) in self.forms.iter().enumerate() {
            let ub = self.gather(c, u);
            let vb = self.gather(c, v);
            let a = &f.viscous + &f.convection + &f.normal_jump;
            total += vb.dot(&(a * &ub));
            // B_h(v, p) - B_h(u, q)
            total += p.cells[c].dot(&(&f.coupling * &vb)) - q.cells[c].dot(&(&f.coupling * &ub));
        }
        for (m, pf) in self.patches.iter().enumerate() {
            let ub = self.gather_patch(m, u);
            let vb = self.gather_patch(m, v);
            total += vb.dot(&(&pf.lps * ub));
            let pp = self.gather_patch_pressure(m, p);
            let qp = self.gather_patch_pressure(m, q);
            total += qp.dot(&(&pf.pressure_gradient * pp));
        }
        total
    }
}
