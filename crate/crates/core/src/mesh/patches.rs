//! Macro decompositions: possibly overlapping groups of cells on which the
//! local projections act.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::{Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroMode {
    /// One patch per cell.
    Trivial,
    /// One patch per interior vertex holding every incident cell.
    VertexPatch,
}

impl fmt::Display for MacroMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MacroMode::Trivial => "trivial",
            MacroMode::VertexPatch => "vertex",
        })
    }
}

impl FromStr for MacroMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trivial" => Ok(MacroMode::Trivial),
            "vertex" | "vertex_patch" | "vertex-patch" => Ok(MacroMode::VertexPatch),
            other => Err(format!("unknown macro mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Patch {
    pub cells: Vec<usize>,
    pub diameter: f64,
    pub measure: f64,
    pub centroid: Point,
}

#[derive(Debug, Clone)]
pub struct MacroDecomposition {
    pub mode: MacroMode,
    pub patches: Vec<Patch>,
    /// Largest number of patches sharing a cell with a given patch, itself included.
    pub overlap: usize,
    /// Largest ratio `h_M / h_T` over patches `M` and cells `T` in `M`.
    pub diameter_ratio: f64,
}

impl MacroDecomposition {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.mode == MacroMode::Trivial
    }
}

fn make_patch(mesh: &Mesh, cells: Vec<usize>) -> Patch {
    let pts: Vec<Point> = cells
        .iter()
        .flat_map(|&c| mesh.cell(c).vertices.iter().map(|&v| mesh.vertices()[v]))
        .collect();
    let mut diameter = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            diameter = diameter.max((pts[i] - pts[j]).norm());
        }
    }
    let measure: f64 = cells.iter().map(|&c| mesh.cell(c).measure).sum();
    let centroid = cells
        .iter()
        .map(|&c| mesh.cell(c).centroid * mesh.cell(c).measure)
        .sum::<Point>()
        / measure;
    Patch {
        cells,
        diameter,
        measure,
        centroid,
    }
}

pub fn build_macro_decomposition(mesh: &Mesh, mode: MacroMode) -> MacroDecomposition {
    let mut groups: Vec<Vec<usize>> = match mode {
        MacroMode::Trivial => (0..mesh.n_cells()).map(|c| vec![c]).collect(),
        MacroMode::VertexPatch => {
            let mut on_boundary = vec![false; mesh.vertices().len()];
            for f in mesh.faces().iter().filter(|f| f.is_boundary()) {
                on_boundary[f.vertices[0]] = true;
                on_boundary[f.vertices[1]] = true;
            }
            let mut incident: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); mesh.vertices().len()];
            for (id, c) in mesh.cells().iter().enumerate() {
                for &v in &c.vertices {
                    incident[v].insert(id);
                }
            }
            incident
                .into_iter()
                .enumerate()
                .filter(|(v, cells)| !on_boundary[*v] && !cells.is_empty())
                .map(|(_, cells)| cells.into_iter().collect())
                .collect()
        }
    };
    // cells touching no interior vertex get a patch of their own
    let mut covered = vec![false; mesh.n_cells()];
    for g in &groups {
        for &c in g {
            covered[c] = true;
        }
    }
    for (c, _) in covered.iter().enumerate().filter(|(_, &cov)| !cov) {
        groups.push(vec![c]);
    }

    let mut by_cell: Vec<Vec<usize>> = vec![Vec::new(); mesh.n_cells()];
    for (p, g) in groups.iter().enumerate() {
        for &c in g {
            by_cell[c].push(p);
        }
    }
    let mut overlap = 0;
    for g in &groups {
        let touching: BTreeSet<usize> =
            g.iter().flat_map(|&c| by_cell[c].iter().copied()).collect();
        overlap = overlap.max(touching.len());
    }

    let patches: Vec<Patch> = groups.into_iter().map(|g| make_patch(mesh, g)).collect();
    let diameter_ratio = patches
        .iter()
        .flat_map(|p| {
            p.cells
                .iter()
                .map(move |&c| p.diameter / mesh.cell(c).diameter)
        })
        .fold(0.0, f64::max);
    MacroDecomposition {
        mode,
        patches,
        overlap,
        diameter_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_on_four_cells() {
        let m = Mesh::cartesian(2);
        let d = build_macro_decomposition(&m, MacroMode::Trivial);
        assert_eq!(d.len(), 4);
        assert_eq!(d.overlap, 1);
        assert!((d.diameter_ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vertex_patch_two_by_two() {
        let m = Mesh::cartesian(2);
        let d = build_macro_decomposition(&m, MacroMode::VertexPatch);
        assert_eq!(d.len(), 1);
        assert_eq!(d.patches[0].cells, vec![0, 1, 2, 3]);
        assert!((d.patches[0].measure - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vertex_patch_three_by_three() {
        // interior vertices (1,1), (2,1), (1,2), (2,2) in grid units; each is
        // shared by four cells and every pair of patches shares a cell
        let m = Mesh::cartesian(3);
        let d = build_macro_decomposition(&m, MacroMode::VertexPatch);
        assert_eq!(d.len(), 4);
        for p in &d.patches {
            assert_eq!(p.cells.len(), 4);
        }
        assert_eq!(d.overlap, 4);
        let mut count = vec![0; 9];
        for p in &d.patches {
            for &c in &p.cells {
                count[c] += 1;
            }
        }
        assert_eq!(count, vec![1, 2, 1, 2, 4, 2, 1, 2, 1]);
    }

    #[test]
    fn vertex_patches_cover_all_families() {
        for family in super::super::Family::ALL {
            let m = super::super::generate_mesh(family, 1);
            let d = build_macro_decomposition(&m, MacroMode::VertexPatch);
            let area: f64 = (0..m.n_cells()).map(|c| m.cell(c).measure).sum();
            let mut covered = vec![false; m.n_cells()];
            for p in &d.patches {
                for &c in &p.cells {
                    covered[c] = true;
                }
            }
            assert!(covered.iter().all(|&c| c), "{family}");
            assert!((area - 1.0).abs() < 1e-12);
            assert!(d.diameter_ratio >= 1.0);
        }
    }
}
