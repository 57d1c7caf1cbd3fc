//! Coefficients and data of the Oseen problem.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quadrature::QuadRule;

/// A vector field on the plane, optionally with its Jacobian.
pub trait VectorField: Send + Sync {
    fn value(&self, x: Point) -> Point;

    /// Jacobian `J[(i, j)] = d v_i / d x_j`, when known in closed form.
    fn gradient(&self, _x: Point) -> Option<Matrix2<f64>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantField(pub Point);

impl VectorField for ConstantField {
    fn value(&self, _x: Point) -> Point {
        self.0
    }

    fn gradient(&self, _x: Point) -> Option<Matrix2<f64>> {
        Some(Matrix2::zeros())
    }
}

type ValueFn = dyn Fn(Point) -> Point + Send + Sync;
type GradientFn = dyn Fn(Point) -> Matrix2<f64> + Send + Sync;

/// Field given by closures.
#[derive(Clone)]
pub struct FnField {
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl FnField {
    pub fn new(value: impl Fn(Point) -> Point + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(Point) -> Matrix2<f64> + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField")
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

impl VectorField for FnField {
    fn value(&self, x: Point) -> Point {
        (self.value)(x)
    }

    fn gradient(&self, x: Point) -> Option<Matrix2<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }
}

/// Viscosity, convection field, reaction and forcing.
#[derive(Clone)]
pub struct OseenCoefficients {
    pub epsilon: f64,
    pub sigma: f64,
    pub convection: Arc<dyn VectorField>,
    pub forcing: Arc<dyn VectorField>,
}

impl fmt::Debug for OseenCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OseenCoefficients")
            .field("epsilon", &self.epsilon)
            .field("sigma", &self.sigma)
            .finish_non_exhaustive()
    }
}

impl OseenCoefficients {
    pub fn new(
        epsilon: f64,
        sigma: f64,
        convection: impl VectorField + 'static,
        forcing: impl VectorField + 'static,
    ) -> Self {
        Self {
            epsilon,
            sigma,
            convection: Arc::new(convection),
            forcing: Arc::new(forcing),
        }
    }

    /// Same coefficients with zero forcing.
    pub fn unforced(&self) -> Self {
        Self {
            forcing: Arc::new(ConstantField(Point::zeros())),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InconsistentOptions(format!(
                "viscosity must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InconsistentOptions(format!(
                "reaction coefficient must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Largest `|div b|` at the given points, from the Jacobian callback or
    /// by central differences with step `step`.
    pub fn max_divergence<'a>(
        &self,
        rules: impl IntoIterator<Item = &'a QuadRule>,
        step: f64,
    ) -> f64 {
        let mut max = 0.0f64;
        for rule in rules {
            for &x in &rule.points {
                let j = jacobian(self.convection.as_ref(), x, step);
                max = max.max((j[(0, 0)] + j[(1, 1)]).abs());
            }
        }
        max
    }
}

/// Jacobian from the callback when available, else by central differences.
pub fn jacobian(field: &dyn VectorField, x: Point, step: f64) -> Matrix2<f64> {
    if let Some(j) = field.gradient(x) {
        return j;
    }
    let ex = Point::new(step, 0.0);
    let ey = Point::new(0.0, step);
    let dx = (field.value(x + ex) - field.value(x - ex)) / (2.0 * step);
    let dy = (field.value(x + ey) - field.value(x - ey)) / (2.0 * step);
    Matrix2::new(dx.x, dy.x, dx.y, dy.y)
}
