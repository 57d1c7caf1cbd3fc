//! Polygonal meshes of planar domains.
//!
//! A [`Mesh`] stores counter-clockwise polygonal cells and the list of edges
//! ("faces") derived from them. Every face has an owner cell (the lower cell
//! id) and, when interior, a neighbour. The stored unit normal of a face points
//! out of its owner; the outward normal seen from a cell is obtained with
//! [`Mesh::outward_normal`].

mod generate;
mod io;
mod patches;

pub use generate::{generate_mesh, Family};
pub use io::{load_mesh, MeshFile};
pub use patches::{build_macro_decomposition, MacroDecomposition, MacroMode, Patch};

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point = nalgebra::Vector2<f64>;

#[derive(Debug, Clone)]
pub struct Face {
    /// End points, ordered along the owner's counter-clockwise boundary.
    pub vertices: [usize; 2],
    pub owner: usize,
    pub neighbor: Option<usize>,
    pub measure: f64,
    pub midpoint: Point,
    /// Unit normal pointing out of the owner.
    pub normal: Point,
    /// Unit tangent from `vertices[0]` to `vertices[1]`.
    pub tangent: Point,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }

    /// Faces are straight segments, so the diameter is the length.
    pub fn diameter(&self) -> f64 {
        self.measure
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    /// Counter-clockwise vertex list.
    pub vertices: Vec<usize>,
    /// Face ids; `faces[i]` joins `vertices[i]` and `vertices[i + 1]`.
    pub faces: Vec<usize>,
    /// `+1` when this cell owns `faces[i]`, `-1` otherwise.
    pub orientations: Vec<f64>,
    pub measure: f64,
    pub centroid: Point,
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    faces: Vec<Face>,
}

/// Measured shape constants of a mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQuality {
    /// Largest cell diameter.
    pub h: f64,
    /// Largest `rho` such that `rho^2 h_T <= h_F` for every face of every cell.
    pub regularity: f64,
    /// Largest number of faces of a single cell.
    pub max_faces: usize,
}

pub(crate) fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| {
            let a = points[i];
            let b = points[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        * 0.5
}

fn polygon_centroid(points: &[Point], area: f64) -> Point {
    let n = points.len();
    let mut c = Point::zeros();
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        let cross = a.x * b.y - b.x * a.y;
        c += (a + b) * cross;
    }
    c / (6.0 * area)
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    fn orient(a: Point, b: Point, c: Point) -> f64 {
        (b - a).perp(&(c - a))
    }
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    let scale = (p2 - p1).norm().max((q2 - q1).norm());
    let tol = 1e-14 * scale * scale;
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    let on_segment = |a: Point, b: Point, c: Point, d: f64| {
        d.abs() <= tol
            && c.x >= a.x.min(b.x) - 1e-14
            && c.x <= a.x.max(b.x) + 1e-14
            && c.y >= a.y.min(b.y) - 1e-14
            && c.y <= a.y.max(b.y) + 1e-14
    };
    on_segment(q1, q2, p1, d1)
        || on_segment(q1, q2, p2, d2)
        || on_segment(p1, p2, q1, d3)
        || on_segment(p1, p2, q2, d4)
}

impl Mesh {
    /// Builds a mesh from vertex coordinates and counter-clockwise cell
    /// vertex lists, deriving the faces.
    pub fn from_polygons(vertices: Vec<Point>, cell_vertices: Vec<Vec<usize>>) -> Result<Self> {
        if cell_vertices.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut cells = Vec::with_capacity(cell_vertices.len());
        for (id, vs) in cell_vertices.into_iter().enumerate() {
            cells.push(Self::make_cell(id, &vertices, vs)?);
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        for (id, cell) in cells.iter_mut().enumerate() {
            let n = cell.vertices.len();
            for i in 0..n {
                let a = cell.vertices[i];
                let b = cell.vertices[(i + 1) % n];
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.neighbor.is_some() {
                            return Err(Error::InvalidCell {
                                cell: id,
                                reason: format!("edge ({a}, {b}) is shared by more than two cells"),
                            });
                        }
                        if face.vertices != [b, a] {
                            return Err(Error::InvalidCell {
                                cell: id,
                                reason: format!(
                                    "edge ({a}, {b}) has the same orientation as in cell {}",
                                    face.owner
                                ),
                            });
                        }
                        face.neighbor = Some(id);
                        cell.faces.push(f);
                        cell.orientations.push(-1.0);
                    }
                    None => {
                        let pa = vertices[a];
                        let pb = vertices[b];
                        let d = pb - pa;
                        let len = d.norm();
                        let tangent = d / len;
                        faces.push(Face {
                            vertices: [a, b],
                            owner: id,
                            neighbor: None,
                            measure: len,
                            midpoint: (pa + pb) * 0.5,
                            normal: Point::new(tangent.y, -tangent.x),
                            tangent,
                        });
                        lookup.insert(key, faces.len() - 1);
                        cell.faces.push(faces.len() - 1);
                        cell.orientations.push(1.0);
                    }
                }
            }
        }
        Ok(Self {
            vertices,
            cells,
            faces,
        })
    }

    fn make_cell(id: usize, vertices: &[Point], vs: Vec<usize>) -> Result<Cell> {
        let invalid = |reason: String| Error::InvalidCell { cell: id, reason };
        if vs.len() < 3 {
            return Err(invalid(format!("{} vertices, need at least 3", vs.len())));
        }
        for &v in &vs {
            if v >= vertices.len() {
                return Err(invalid(format!("vertex index {v} out of range")));
            }
        }
        for i in 0..vs.len() {
            if vs[i + 1..].contains(&vs[i]) {
                return Err(invalid(format!("vertex {} repeated", vs[i])));
            }
        }
        let pts: Vec<Point> = vs.iter().map(|&v| vertices[v]).collect();
        let n = pts.len();
        for i in 0..n {
            if (pts[(i + 1) % n] - pts[i]).norm() == 0.0 {
                return Err(invalid("zero-length edge".into()));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                    return Err(invalid(format!(
                        "edges {i} and {j} intersect (self-intersecting polygon)"
                    )));
                }
            }
        }
        let area = signed_area(&pts);
        if area <= 0.0 {
            return Err(invalid(format!(
                "signed area {area:e} is not positive (vertices must be counter-clockwise)"
            )));
        }
        let mut diameter = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max((pts[i] - pts[j]).norm());
            }
        }
        Ok(Cell {
            centroid: polygon_centroid(&pts, area),
            vertices: vs,
            faces: Vec::with_capacity(n),
            orientations: Vec::with_capacity(n),
            measure: area,
            diameter,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.is_boundary()).count()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.n_faces() - self.n_boundary_faces()
    }

    /// Outward unit normal of `cell` on its `local`-th face.
    pub fn outward_normal(&self, cell: usize, local: usize) -> Point {
        let c = &self.cells[cell];
        self.faces[c.faces[local]].normal * c.orientations[local]
    }

    pub fn cell_points(&self, cell: usize) -> Vec<Point> {
        self.cells[cell]
            .vertices
            .iter()
            .map(|&v| self.vertices[v])
            .collect()
    }

    pub fn face_points(&self, face: usize) -> [Point; 2] {
        let f = &self.faces[face];
        [self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]]
    }

    /// Largest cell diameter.
    pub fn h(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    pub fn total_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }

    pub fn quality(&self) -> MeshQuality {
        let mut rho2 = f64::INFINITY;
        let mut max_faces = 0;
        for c in &self.cells {
            max_faces = max_faces.max(c.faces.len());
            for &f in &c.faces {
                rho2 = rho2.min(self.faces[f].measure / c.diameter);
            }
        }
        MeshQuality {
            h: self.h(),
            regularity: rho2.min(1.0).sqrt(),
            max_faces,
        }
    }

    /// Returns a copy with the cells renumbered: new cell `i` is old cell `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n_cells() {
            return Err(Error::InvalidMesh(format!(
                "permutation has {} entries for {} cells",
                order.len(),
                self.n_cells()
            )));
        }
        let cells = order
            .iter()
            .map(|&i| self.cells[i].vertices.clone())
            .collect();
        Self::from_polygons(self.vertices.clone(), cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Mesh {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        Mesh::from_polygons(v, vec![vec![0, 1, 2, 3]]).unwrap()
    }

    #[test]
    fn single_square() {
        let m = unit_square();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.n_boundary_faces(), 4);
        assert!((m.cell(0).measure - 1.0).abs() < 1e-15);
        assert!((m.cell(0).centroid - Point::new(0.5, 0.5)).norm() < 1e-15);
        assert!((m.cell(0).diameter - 2f64.sqrt()).abs() < 1e-15);
        // bottom edge normal points down
        assert!((m.outward_normal(0, 0) - Point::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn shared_diagonal_gives_opposite_normals() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let m = Mesh::from_polygons(v, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap();
        assert_eq!(m.n_interior_faces(), 1);
        let f = m.faces().iter().position(|f| !f.is_boundary()).unwrap();
        let l0 = m.cell(0).faces.iter().position(|&x| x == f).unwrap();
        let l1 = m.cell(1).faces.iter().position(|&x| x == f).unwrap();
        let n0 = m.outward_normal(0, l0);
        let n1 = m.outward_normal(1, l1);
        assert!((n0 + n1).norm() < 1e-15);
        assert_eq!(m.face(f).owner, 0);
        assert_eq!(m.face(f).neighbor, Some(1));
    }

    #[test]
    fn clockwise_cell_rejected() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let err = Mesh::from_polygons(v, vec![vec![0, 3, 2, 1]]).unwrap_err();
        assert!(matches!(err, Error::InvalidCell { cell: 0, .. }), "{err}");
    }

    #[test]
    fn bow_tie_rejected() {
        let v = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let err = Mesh::from_polygons(v, vec![vec![0, 2, 3, 1]]).unwrap_err();
        assert!(matches!(err, Error::InvalidCell { cell: 0, .. }), "{err}");
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            Mesh::from_polygons(vec![], vec![]),
            Err(Error::EmptyMesh)
        ));
    }
}
