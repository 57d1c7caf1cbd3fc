//! Quadrature on segments, triangles and star-shaped polygons.

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};

#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Polynomials up to this total degree are integrated exactly.
    pub degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Concatenation of several rules (for integrals over unions of cells).
    pub fn union<'a>(rules: impl IntoIterator<Item = &'a QuadRule>) -> QuadRule {
        let mut out = QuadRule {
            points: Vec::new(),
            weights: Vec::new(),
            degree: usize::MAX,
        };
        for r in rules {
            out.points.extend_from_slice(&r.points);
            out.weights.extend_from_slice(&r.weights);
            out.degree = out.degree.min(r.degree);
        }
        out
    }

    /// Gauss rule on the segment `[a, b]`.
    pub fn segment(a: Point, b: Point, degree: usize) -> QuadRule {
        let (x, w) = gauss_legendre(degree / 2 + 1);
        let len = (b - a).norm();
        QuadRule {
            points: x.iter().map(|&t| a + (b - a) * t).collect(),
            weights: w.iter().map(|&wi| wi * len).collect(),
            degree,
        }
    }

    /// Collapsed (conical product) Gauss rule on a triangle.
    pub fn triangle(p0: Point, p1: Point, p2: Point, degree: usize) -> QuadRule {
        // x = p0 + s (p1 - p0) + s t (p2 - p1), jacobian 2 |T| s
        let n = (degree + 2).div_ceil(2);
        let (x, w) = gauss_legendre(n);
        let area2 = (p1 - p0).perp(&(p2 - p0));
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&s, &ws) in x.iter().zip(&w) {
            for (&t, &wt) in x.iter().zip(&w) {
                points.push(p0 + (p1 - p0) * s + (p2 - p1) * (s * t));
                weights.push(ws * wt * s * area2);
            }
        }
        QuadRule {
            points,
            weights,
            degree,
        }
    }

    /// Fan sub-triangulation from `center`; `None` if some sub-triangle is not
    /// positively oriented (the polygon is not star-shaped with respect to `center`).
    pub fn polygon(points: &[Point], center: Point, degree: usize) -> Option<QuadRule> {
        let n = points.len();
        let scale: f64 = (0..n)
            .map(|i| (points[i] - center).norm_squared())
            .fold(0.0, f64::max);
        let mut subs = Vec::with_capacity(n);
        for i in 0..n {
            let a = points[i];
            let b = points[(i + 1) % n];
            if (a - center).perp(&(b - center)) <= 1e-12 * scale {
                return None;
            }
            subs.push(QuadRule::triangle(center, a, b, degree));
        }
        Some(QuadRule::union(&subs))
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton iteration on P_n from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Quadrature on a mesh cell, exact up to `degree`.
pub fn cell_quadrature(mesh: &Mesh, cell: usize, degree: usize) -> Result<QuadRule> {
    let pts = mesh.cell_points(cell);
    QuadRule::polygon(&pts, mesh.cell(cell).centroid, degree).ok_or(Error::NotStarShaped { cell })
}

/// Gauss rule on a mesh face, exact up to `degree`.
pub fn face_quadrature(mesh: &Mesh, face: usize, degree: usize) -> QuadRule {
    let [a, b] = mesh.face_points(face);
    QuadRule::segment(a, b, degree)
}
