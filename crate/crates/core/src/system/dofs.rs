//! Global numbering of the discrete unknowns.

use crate::basis::poly_dim;
use crate::mesh::Mesh;

/// Unknowns ordered as: cell velocities, interior face velocities,
/// pressures, one multiplier for the zero-mean pressure constraint.
///
/// Within a cell or face block the layout is component-major, as in
/// [`crate::discretization::HybridVelocity`].
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub nc: usize,
    pub nf: usize,
    pub n_cells: usize,
    /// Position of each mesh face among the interior faces.
    pub face_index: Vec<Option<usize>>,
    pub n_interior_faces: usize,
    pub face_offset: usize,
    pub pressure_offset: usize,
    pub multiplier: usize,
    pub total: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, k: usize) -> Self {
        let nc = poly_dim(k);
        let nf = k + 1;
        let mut face_index = Vec::with_capacity(mesh.n_faces());
        let mut n_interior_faces = 0;
        for f in mesh.faces() {
            if f.is_boundary() {
                face_index.push(None);
            } else {
                face_index.push(Some(n_interior_faces));
                n_interior_faces += 1;
            }
        }
        let n_cells = mesh.n_cells();
        let face_offset = 2 * nc * n_cells;
        let pressure_offset = face_offset + 2 * nf * n_interior_faces;
        let multiplier = pressure_offset + nc * n_cells;
        Self {
            nc,
            nf,
            n_cells,
            face_index,
            n_interior_faces,
            face_offset,
            pressure_offset,
            multiplier,
            total: multiplier + 1,
        }
    }

    pub fn cell_velocity(&self, cell: usize) -> usize {
        2 * self.nc * cell
    }

    pub fn face_velocity(&self, face: usize) -> Option<usize> {
        self.face_index[face].map(|i| self.face_offset + 2 * self.nf * i)
    }

    pub fn pressure(&self, cell: usize) -> usize {
        self.pressure_offset + self.nc * cell
    }

    pub fn n_velocity(&self) -> usize {
        self.pressure_offset
    }

    pub fn n_pressure(&self) -> usize {
        self.nc * self.n_cells
    }

    /// Global index (or `None` for boundary faces) of every entry of the
    /// local velocity block of `cell`.
    pub fn local_velocity(&self, mesh: &Mesh, cell: usize) -> Vec<Option<usize>> {
        let faces = &mesh.cell(cell).faces;
        let ns = self.nc + faces.len() * self.nf;
        let mut out = vec![None; 2 * ns];
        for c in 0..2 {
            for i in 0..self.nc {
                out[c * ns + i] = Some(self.cell_velocity(cell) + c * self.nc + i);
            }
            for (l, &f) in faces.iter().enumerate() {
                if let Some(base) = self.face_velocity(f) {
                    for j in 0..self.nf {
                        out[c * ns + self.nc + l * self.nf + j] = Some(base + c * self.nf + j);
                    }
                }
            }
        }
        out
    }
}
