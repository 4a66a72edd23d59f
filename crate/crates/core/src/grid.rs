//! Uniform grids on a truncated half-line and the profiles sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stencil::{one_sided_at_origin, DerivativeStencil};

/// Smallest grid the stencils and operators are designed for.
pub const MIN_POINTS: usize = 64;

/// Formal accuracy of the profile derivative stencils.
pub const STENCIL_ACCURACY: usize = 4;

/// Uniform grid `y_i = i·h` on `[0, L]` with `N` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    length: f64,
    points: usize,
}

impl Grid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid length must be positive, got {length}"
            )));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {MIN_POINTS} points, got {points}"
            )));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.node(i)).collect()
    }

    /// Composite trapezoid weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.points];
        w[0] = 0.5 * h;
        w[self.points - 1] = 0.5 * h;
        w
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile {
            grid: *self,
            values: (0..self.points).map(|i| f(self.node(i))).collect(),
        }
    }

    pub fn zeros(&self) -> Profile {
        Profile {
            grid: *self,
            values: vec![0.0; self.points],
        }
    }

    pub fn derivative_stencil(&self, order: usize) -> DerivativeStencil {
        DerivativeStencil::new(order, STENCIL_ACCURACY, self.points, self.spacing())
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.points,
                expected_length: self.length,
                found: other.points,
                found_length: other.length,
            })
        }
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::InvalidArgument(format!(
                "profile has {} values, grid has {} points",
                values.len(),
                grid.points()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "profile value at node {i} is not finite"
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.points());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l1_norm(&self) -> f64 {
        self.integrate_with(f64::abs)
    }

    pub fn integral(&self) -> f64 {
        self.integrate_with(|v| v)
    }

    /// Trapezoid integral of `g(a(y))`.
    pub fn integrate_with(&self, g: impl Fn(f64) -> f64) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().map(|&v| g(v)).sum();
        self.grid.spacing() * (inner + 0.5 * (g(self.values[0]) + g(self.values[n - 1])))
    }

    /// `order`-th derivative with the grid stencils.
    pub fn derivative(&self, order: usize) -> Profile {
        if order == 0 {
            return self.clone();
        }
        let st = self.grid.derivative_stencil(order);
        Profile::from_parts(self.grid, st.apply(&self.values))
    }

    /// One-sided derivative trace at the boundary node.
    pub fn trace(&self, order: usize) -> f64 {
        if order == 0 {
            return self.values[0];
        }
        one_sided_at_origin(&self.values, self.grid.spacing(), order, STENCIL_ACCURACY)
    }

    pub fn scaled(&self, factor: f64) -> Profile {
        Profile::from_parts(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// `alpha·self + beta·other` on a shared grid.
    pub fn combine(&self, alpha: f64, other: &Profile, beta: f64) -> Result<Profile> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Profile::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
        ))
    }

    pub fn sup_distance(&self, other: &Profile) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}
