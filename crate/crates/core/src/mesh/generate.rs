//! Mesh families on the unit square.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{signed_area, Mesh, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Triangular,
    Cartesian,
    Hexagonal,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Triangular, Family::Cartesian, Family::Hexagonal];

    pub fn name(self) -> &'static str {
        match self {
            Family::Triangular => "triangular",
            Family::Cartesian => "cartesian",
            Family::Hexagonal => "hexagonal",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "triangular" | "tri" => Ok(Family::Triangular),
            "cartesian" | "cart" => Ok(Family::Cartesian),
            "hexagonal" | "hex" => Ok(Family::Hexagonal),
            other => Err(format!("unknown mesh family '{other}'")),
        }
    }
}

/// Number of subdivisions per side used at a refinement level.
pub fn subdivisions(level: usize) -> usize {
    2usize << level
}

/// Mesh of the unit square from `family` at refinement `level`.
///
/// Level `l` uses `2^(l+1)` subdivisions per side, so the mesh size halves
/// from one level to the next.
pub fn generate_mesh(family: Family, level: usize) -> Mesh {
    let n = subdivisions(level);
    match family {
        Family::Triangular => Mesh::triangular(n),
        Family::Cartesian => Mesh::cartesian(n),
        Family::Hexagonal => Mesh::hexagonal(n),
    }
}

fn grid_vertices(n: usize) -> Vec<Point> {
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push(Point::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    v
}

impl Mesh {
    /// `n x n` squares.
    pub fn cartesian(n: usize) -> Mesh {
        assert!(n > 0);
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::from_polygons(grid_vertices(n), cells).expect("cartesian grid is valid")
    }

    /// `n x n` squares, each cut along its lower-left to upper-right diagonal.
    pub fn triangular(n: usize) -> Mesh {
        assert!(n > 0);
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                cells.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        Mesh::from_polygons(grid_vertices(n), cells).expect("triangular grid is valid")
    }

    /// Flat-topped hexagonal tiling with `n` column spacings and `n` row
    /// spacings, clipped to the unit square.
    ///
    /// The domain edges pass either through hexagon centres or along hexagon
    /// edges, so boundary cells are half or quarter hexagons (pentagons and
    /// quadrilaterals) and the clipped mesh stays conforming.
    pub fn hexagonal(n: usize) -> Mesh {
        assert!(n > 0);
        // Lattice coordinates: X in units of r/2, Y in units of r*sqrt(3)/2.
        // Every vertex and clip intersection is then an integer point.
        let width = 3 * n as i64;
        let height = 2 * n as i64;
        let offsets: [(i64, i64); 6] = [(2, 0), (1, 1), (-1, 1), (-2, 0), (-1, -1), (1, -1)];

        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut cells = Vec::new();
        for i in 0..=n as i64 {
            let cx = 3 * i;
            let parity = i % 2;
            for j in -1..=n as i64 + 1 {
                let cy = 2 * j + parity;
                let hex: Vec<(f64, f64)> = offsets
                    .iter()
                    .map(|&(dx, dy)| ((cx + dx) as f64, (cy + dy) as f64))
                    .collect();
                let clipped = clip_to_box(&hex, width as f64, height as f64);
                if clipped.len() < 3 {
                    continue;
                }
                let pts: Vec<Point> = clipped.iter().map(|&(x, y)| Point::new(x, y)).collect();
                if signed_area(&pts) < 1e-9 {
                    continue;
                }
                let ids = clipped
                    .iter()
                    .map(|&(x, y)| {
                        let key = (x.round() as i64, y.round() as i64);
                        *index.entry(key).or_insert_with(|| {
                            vertices.push(Point::new(
                                key.0 as f64 / width as f64,
                                key.1 as f64 / height as f64,
                            ));
                            vertices.len() - 1
                        })
                    })
                    .collect();
                cells.push(ids);
            }
        }
        Mesh::from_polygons(vertices, cells).expect("clipped hexagonal tiling is valid")
    }
}

/// Sutherland-Hodgman clipping of a convex polygon against `[0,w] x [0,h]`,
/// with consecutive duplicate points removed.
fn clip_to_box(poly: &[(f64, f64)], w: f64, h: f64) -> Vec<(f64, f64)> {
    type Plane = (fn((f64, f64), f64) -> f64, f64);
    let planes: [Plane; 4] = [
        (|p, _| p.0, 0.0),
        (|p, w| w - p.0, w),
        (|p, _| p.1, 0.0),
        (|p, h| h - p.1, h),
    ];
    let mut out: Vec<(f64, f64)> = poly.to_vec();
    for (dist, c) in planes {
        if out.is_empty() {
            break;
        }
        let input = std::mem::take(&mut out);
        let n = input.len();
        for k in 0..n {
            let a = input[k];
            let b = input[(k + 1) % n];
            let da = dist(a, c);
            let db = dist(b, c);
            if da >= 0.0 {
                out.push(a);
            }
            if (da > 0.0 && db < 0.0) || (da < 0.0 && db > 0.0) {
                let t = da / (da - db);
                out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
            }
        }
    }
    let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(out.len());
    for p in out {
        if dedup.last() != Some(&p) {
            dedup.push(p);
        }
    }
    while dedup.len() > 1 && dedup.first() == dedup.last() {
        dedup.pop();
    }
    dedup
}
