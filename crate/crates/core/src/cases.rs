//! Manufactured solutions on the unit square.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::forms::{ConstantField, FnField, OseenCoefficients};
use crate::mesh::Point;
use crate::system::BoundaryCondition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseKind {
    /// Polynomial stream function `x^2 y^2 (x-1)^2 (y-1)^2`, trigonometric pressure.
    Smooth,
    /// Exponential boundary layers of width `sqrt(eps)` at `x = 1` and `y = 1`.
    BoundaryLayer,
    /// Linear velocity and pressure reproduced exactly by the scheme.
    Patch,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Smooth => "smooth",
            CaseKind::BoundaryLayer => "layer",
            CaseKind::Patch => "patch",
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "smooth" => Ok(CaseKind::Smooth),
            "layer" | "boundary_layer" | "boundary-layer" => Ok(CaseKind::BoundaryLayer),
            "patch" | "patch_test" => Ok(CaseKind::Patch),
            other => Err(format!("unknown case '{other}'")),
        }
    }
}

/// One-dimensional factor `A` of a separable stream function
/// `psi(x, y) = A(x) A(y)`, with derivatives up to order three.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    /// `x^2 (x - 1)^2`
    Polynomial,
    /// `x^2 (e^{l (x - 1)} - 1)^2`
    Exponential { lambda: f64 },
}

impl Profile {
    fn eval(self, x: f64) -> [f64; 4] {
        match self {
            Profile::Polynomial => [
                x * x * (x - 1.0) * (x - 1.0),
                2.0 * x * (x - 1.0) * (2.0 * x - 1.0),
                12.0 * x * x - 12.0 * x + 2.0,
                24.0 * x - 12.0,
            ],
            Profile::Exponential { lambda } => {
                let e = (lambda * (x - 1.0)).exp();
                let (g, g1, g2, g3) =
                    (e - 1.0, lambda * e, lambda * lambda * e, lambda.powi(3) * e);
                [
                    x * x * g * g,
                    2.0 * x * g * g + 2.0 * x * x * g * g1,
                    2.0 * g * g + 8.0 * x * g * g1 + 2.0 * x * x * (g1 * g1 + g * g2),
                    12.0 * g * g1
                        + 12.0 * x * (g1 * g1 + g * g2)
                        + 2.0 * x * x * (3.0 * g1 * g2 + g * g3),
                ]
            }
        }
    }
}

/// Exact solution, coefficients and derived forcing of a test problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    pub epsilon: f64,
    pub sigma: f64,
    pub convection: Point,
    profile: Option<Profile>,
}

impl ManufacturedCase {
    pub fn smooth(epsilon: f64) -> Self {
        Self {
            kind: CaseKind::Smooth,
            epsilon,
            sigma: 1.0,
            convection: Point::new(1.0, 1.0),
            profile: Some(Profile::Polynomial),
        }
    }

    /// Layer width parameter `lambda = 1 / (2 sqrt(eps))`.
    pub fn boundary_layer(epsilon: f64) -> Self {
        Self {
            kind: CaseKind::BoundaryLayer,
            epsilon,
            sigma: 1.0,
            convection: Point::new(1.0, 1.0),
            profile: Some(Profile::Exponential {
                lambda: 0.5 / epsilon.sqrt(),
            }),
        }
    }

    pub fn patch(epsilon: f64) -> Self {
        Self {
            kind: CaseKind::Patch,
            epsilon,
            sigma: 1.0,
            convection: Point::new(1.0, 1.0),
            profile: None,
        }
    }

    pub fn new(kind: CaseKind, epsilon: f64) -> Self {
        match kind {
            CaseKind::Smooth => Self::smooth(epsilon),
            CaseKind::BoundaryLayer => Self::boundary_layer(epsilon),
            CaseKind::Patch => Self::patch(epsilon),
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.profile {
            Some(Profile::Exponential { lambda }) => Some(lambda),
            _ => None,
        }
    }

    pub fn velocity(&self, p: Point) -> Point {
        match self.profile {
            None => Point::new(p.y, p.x),
            Some(a) => {
                let (ax, ay) = (a.eval(p.x), a.eval(p.y));
                Point::new(ax[0] * ay[1], -ax[1] * ay[0])
            }
        }
    }

    /// `J[(i, j)] = d u_i / d x_j`.
    pub fn velocity_gradient(&self, p: Point) -> Matrix2<f64> {
        match self.profile {
            None => Matrix2::new(0.0, 1.0, 1.0, 0.0),
            Some(a) => {
                let (ax, ay) = (a.eval(p.x), a.eval(p.y));
                Matrix2::new(ax[1] * ay[1], ax[0] * ay[2], -ax[2] * ay[0], -ax[1] * ay[1])
            }
        }
    }

    pub fn velocity_laplacian(&self, p: Point) -> Point {
        match self.profile {
            None => Point::zeros(),
            Some(a) => {
                let (ax, ay) = (a.eval(p.x), a.eval(p.y));
                Point::new(
                    ax[2] * ay[1] + ax[0] * ay[3],
                    -ax[3] * ay[0] - ax[1] * ay[2],
                )
            }
        }
    }

    pub fn pressure(&self, p: Point) -> f64 {
        match self.kind {
            CaseKind::Smooth => 2.0 * p.x.cos() * p.y.sin() - 2.0 * 1f64.sin() * (1.0 - 1f64.cos()),
            CaseKind::BoundaryLayer => (p.x + p.y).exp() - (std::f64::consts::E - 1.0).powi(2),
            CaseKind::Patch => p.x + p.y - 1.0,
        }
    }

    pub fn pressure_gradient(&self, p: Point) -> Point {
        match self.kind {
            CaseKind::Smooth => {
                Point::new(-2.0 * p.x.sin() * p.y.sin(), 2.0 * p.x.cos() * p.y.cos())
            }
            CaseKind::BoundaryLayer => Point::repeat((p.x + p.y).exp()),
            CaseKind::Patch => Point::new(1.0, 1.0),
        }
    }

    /// `f = -eps Lap u + (b . grad) u + sigma u + grad p`.
    pub fn forcing(&self, p: Point) -> Point {
        -self.velocity_laplacian(p) * self.epsilon
            + self.velocity_gradient(p) * self.convection
            + self.velocity(p) * self.sigma
            + self.pressure_gradient(p)
    }

    pub fn coefficients(&self) -> OseenCoefficients {
        let case = *self;
        OseenCoefficients::new(
            self.epsilon,
            self.sigma,
            ConstantField(self.convection),
            FnField::new(move |x| case.forcing(x)),
        )
    }

    /// Zero Dirichlet data for the layer and smooth cases; the exact
    /// velocity imposed on the boundary faces for the patch case.
    pub fn boundary_condition(&self) -> BoundaryCondition {
        match self.kind {
            CaseKind::Patch => {
                let case = *self;
                BoundaryCondition::Lifted(Arc::new(FnField::new(move |x| case.velocity(x))))
            }
            _ => BoundaryCondition::Homogeneous,
        }
    }
}
