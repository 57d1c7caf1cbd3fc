//! Assembly of the global saddle-point system.

use std::sync::Arc;

use nalgebra::DVector;

use crate::discretization::{Discretization, HybridVelocity, PressureField};
use crate::error::{Error, Result};
use crate::forms::VectorField;

use super::dofs::DofMap;
use super::sparse::{norm, CsrMatrix, TripletBuilder};

/// Treatment of the boundary face unknowns.
#[derive(Clone, Default)]
pub enum BoundaryCondition {
    /// Zero velocity: boundary faces are eliminated.
    #[default]
    Homogeneous,
    /// Boundary faces fixed to `pi_F^k g` and moved to the right-hand side.
    Lifted(Arc<dyn VectorField>),
}

impl std::fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Homogeneous => f.write_str("Homogeneous"),
            Self::Lifted(_) => f.write_str("Lifted"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dofs: DofMap,
    /// Prescribed values of boundary faces (`None` for interior faces).
    pub boundary: Vec<Option<DVector<f64>>>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub velocity: HybridVelocity,
    pub pressure: PressureField,
    pub multiplier: f64,
    /// `||A x - b|| / ||b||` (absolute when `b = 0`).
    pub residual: f64,
    /// `sum_T (p_h, 1)_T`.
    pub pressure_mean: f64,
}

#[derive(Clone, Copy)]
enum Slot {
    Free(usize),
    Fixed(f64),
}

fn velocity_slots(
    disc: &Discretization,
    dofs: &DofMap,
    boundary: &[Option<DVector<f64>>],
    cell: usize,
) -> Vec<Slot> {
    let o = &disc.ops[cell];
    let ns = o.ns();
    let faces = &disc.mesh.cell(cell).faces;
    dofs.local_velocity(&disc.mesh, cell)
        .into_iter()
        .enumerate()
        .map(|(i, g)| match g {
            Some(g) => Slot::Free(g),
            None => {
                let (c, s) = (i / ns, i % ns);
                let l = (s - o.nc()) / o.nf();
                let j = (s - o.nc()) % o.nf();
                let vals = boundary[faces[l]]
                    .as_ref()
                    .expect("boundary face has values");
                Slot::Fixed(vals[c * o.nf() + j])
            }
        })
        .collect()
}

/// Adds a dense block with the given row and column slots.
fn scatter(
    builder: &mut TripletBuilder,
    rhs: &mut [f64],
    block: &nalgebra::DMatrix<f64>,
    rows: &[Slot],
    cols: &[Slot],
) {
    for (i, r) in rows.iter().enumerate() {
        let Slot::Free(r) = *r else { continue };
        for (j, c) in cols.iter().enumerate() {
            let a = block[(i, j)];
            match *c {
                Slot::Free(c) => builder.push(r, c, a),
                Slot::Fixed(v) => rhs[r] -= a * v,
            }
        }
    }
}

/// Builds `A_h^{LP}` and the load vector `(f, v_T)_T`.
pub fn assemble(disc: &Discretization, bc: &BoundaryCondition) -> Result<GlobalSystem> {
    let mesh = &disc.mesh;
    if mesh.n_cells() == 0 {
        return Err(Error::EmptyMesh);
    }
    let dofs = DofMap::new(mesh, disc.degree);
    let nc = dofs.nc;
    let boundary = (0..mesh.n_faces())
        .map(|f| {
            if !mesh.face(f).is_boundary() {
                return Ok(None);
            }
            match bc {
                BoundaryCondition::Homogeneous => Ok(Some(DVector::zeros(2 * dofs.nf))),
                BoundaryCondition::Lifted(g) => disc.project_face(f, |x| g.value(x)).map(Some),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut builder = TripletBuilder::new(dofs.total, dofs.total);
    let mut rhs = vec![0.0; dofs.total];
    let slots: Vec<Vec<Slot>> = (0..mesh.n_cells())
        .map(|c| velocity_slots(disc, &dofs, &boundary, c))
        .collect();

    for (c, forms) in disc.forms.iter().enumerate() {
        let o = &disc.ops[c];
        // load
        let base = dofs.cell_velocity(c);
        for (q, (x, w)) in o.quad.iter().enumerate() {
            let f = disc.coeffs.forcing.value(x);
            for i in 0..nc {
                let phi = o.values[(q, i)];
                rhs[base + i] += w * f.x * phi;
                rhs[base + nc + i] += w * f.y * phi;
            }
        }
        let a = &forms.viscous + &forms.convection + &forms.normal_jump;
        scatter(&mut builder, &mut rhs, &a, &slots[c], &slots[c]);

        let pslots: Vec<Slot> = (0..nc).map(|i| Slot::Free(dofs.pressure(c) + i)).collect();
        // velocity test rows, pressure trial columns: B_h(v, p)
        scatter(
            &mut builder,
            &mut rhs,
            &forms.coupling.transpose(),
            &slots[c],
            &pslots,
        );
        // pressure test rows, velocity trial columns: -B_h(u, q)
        scatter(
            &mut builder,
            &mut rhs,
            &(-&forms.coupling),
            &pslots,
            &slots[c],
        );

        // zero-mean constraint
        for i in 0..nc {
            let m: f64 = o
                .quad
                .iter()
                .enumerate()
                .map(|(q, (_, w))| w * o.values[(q, i)])
                .sum();
            builder.push(dofs.multiplier, dofs.pressure(c) + i, m);
            builder.push(dofs.pressure(c) + i, dofs.multiplier, m);
        }
    }

    for pf in &disc.patches {
        let vslots: Vec<Slot> = pf
            .cells
            .iter()
            .flat_map(|&c| slots[c].iter().copied())
            .collect();
        scatter(&mut builder, &mut rhs, &pf.lps, &vslots, &vslots);
        let pslots: Vec<Slot> = pf
            .cells
            .iter()
            .flat_map(|&c| (0..nc).map(move |i| (c, i)))
            .map(|(c, i)| Slot::Free(dofs.pressure(c) + i))
            .collect();
        scatter(
            &mut builder,
            &mut rhs,
            &pf.pressure_gradient,
            &pslots,
            &pslots,
        );
    }

    Ok(GlobalSystem {
        matrix: builder.build(),
        rhs,
        dofs,
        boundary,
    })
}

impl GlobalSystem {
    pub fn n_unknowns(&self) -> usize {
        self.dofs.total
    }

    /// Largest `|A[p, u] + A[u, p]|` over pressure rows and velocity columns.
    pub fn coupling_antisymmetry_defect(&self) -> f64 {
        let d = &self.dofs;
        let mut max = 0.0f64;
        for r in d.pressure_offset..d.multiplier {
            for (c, v) in self.matrix.row(r) {
                if c < d.pressure_offset {
                    max = max.max((v + self.matrix.get(c, r)).abs());
                }
            }
        }
        max
    }

    /// Splits a global vector into fields (boundary faces from the prescribed values).
    pub fn unpack(&self, disc: &Discretization, x: &[f64]) -> (HybridVelocity, PressureField, f64) {
        let d = &self.dofs;
        let (nc, nf) = (d.nc, d.nf);
        let cells = (0..d.n_cells)
            .map(|c| {
                DVector::from_column_slice(&x[d.cell_velocity(c)..d.cell_velocity(c) + 2 * nc])
            })
            .collect();
        let faces = (0..disc.mesh.n_faces())
            .map(|f| match d.face_velocity(f) {
                Some(g) => DVector::from_column_slice(&x[g..g + 2 * nf]),
                None => self.boundary[f]
                    .clone()
                    .unwrap_or_else(|| DVector::zeros(2 * nf)),
            })
            .collect();
        let pressure = (0..d.n_cells)
            .map(|c| DVector::from_column_slice(&x[d.pressure(c)..d.pressure(c) + nc]))
            .collect();
        (
            HybridVelocity { cells, faces },
            PressureField { cells: pressure },
            x[d.multiplier],
        )
    }

    /// Inverse of [`Self::unpack`] (boundary faces are dropped).
    pub fn pack(&self, u: &HybridVelocity, p: &PressureField, multiplier: f64) -> Vec<f64> {
        let d = &self.dofs;
        let mut x = vec![0.0; d.total];
        for (c, v) in u.cells.iter().enumerate() {
            x[d.cell_velocity(c)..d.cell_velocity(c) + v.len()].copy_from_slice(v.as_slice());
        }
        for (f, v) in u.faces.iter().enumerate() {
            if let Some(g) = d.face_velocity(f) {
                x[g..g + v.len()].copy_from_slice(v.as_slice());
            }
        }
        for (c, v) in p.cells.iter().enumerate() {
            x[d.pressure(c)..d.pressure(c) + v.len()].copy_from_slice(v.as_slice());
        }
        x[d.multiplier] = multiplier;
        x
    }

    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.mul_vec(x);
        let r: Vec<f64> = ax.iter().zip(&self.rhs).map(|(a, b)| a - b).collect();
        let b = norm(&self.rhs);
        if b > 0.0 {
            norm(&r) / b
        } else {
            norm(&r)
        }
    }

    /// Right-hand side as text, one value per line.
    pub fn rhs_text(&self) -> String {
        self.rhs.iter().map(|v| format!("{v:.17e}\n")).collect()
    }

    pub fn solve(&self, disc: &Discretization) -> Result<Solution> {
        let x = self.linear_solve(&self.rhs)?;
        self.finish(disc, x)
    }

    /// Direct solve with the mean-value multiplier handled as a border.
    pub(crate) fn linear_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.matrix
            .solve_bordered(rhs, self.dofs.multiplier, self.dofs.pressure(0))
    }

    pub(crate) fn finish(&self, disc: &Discretization, mut x: Vec<f64>) -> Result<Solution> {
        let mut residual = self.relative_residual(&x);
        if residual > 1e-10 {
            // one step of iterative refinement
            let ax = self.matrix.mul_vec(&x);
            let r: Vec<f64> = self.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            if let Ok(dx) = self.linear_solve(&r) {
                let refined: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
                let res2 = self.relative_residual(&refined);
                if res2 < residual {
                    x = refined;
                    residual = res2;
                }
            }
        }
        if residual > 1e-9 {
            log::warn!("relative residual {residual:e} exceeds 1e-9");
        }
        let (velocity, pressure, multiplier) = self.unpack(disc, &x);
        let pressure_mean = disc.pressure_mean(&pressure);
        Ok(Solution {
            velocity,
            pressure,
            multiplier,
            residual,
            pressure_mean,
        })
    }
}

/// Assembles and solves in one call.
pub fn solve(disc: &Discretization, bc: &BoundaryCondition) -> Result<Solution> {
    assemble(disc, bc)?.solve(disc)
}
