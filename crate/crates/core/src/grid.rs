//! Uniform grids on `[0, 1]` and functions sampled on them.

use crate::error::{Error, Result};

/// A real profile sampled on `M + 1` uniform nodes `z_i = i / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a grid function needs at least 2 nodes, got {}",
                values.len()
            )));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(intervals: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = 1.0 / intervals as f64;
        GridFunction {
            values: (0..=intervals).map(|i| f(i as f64 * h)).collect(),
        }
    }

    pub fn zeros(intervals: usize) -> Self {
        GridFunction {
            values: vec![0.0; intervals + 1],
        }
    }

    pub fn constant(intervals: usize, c: f64) -> Self {
        GridFunction {
            values: vec![c; intervals + 1],
        }
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.step()
    }

    pub fn at_left(&self) -> f64 {
        self.values[0]
    }

    pub fn at_right(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Piecewise-linear interpolation; `z` is clamped into `[0, 1]`.
    pub fn interpolate(&self, z: f64) -> f64 {
        interpolate(&self.values, z)
    }

    /// Composite trapezoid rule for `∫₀¹ f`.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.step())
    }

    /// `∫₀¹ self · other` by the trapezoid rule.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        let h = self.step();
        let n = self.values.len();
        let mut s = 0.5 * (self.values[0] * other.values[0] + self.values[n - 1] * other.values[n - 1]);
        for i in 1..n - 1 {
            s += self.values[i] * other.values[i];
        }
        Ok(s * h)
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch {
                expected: self.values.len(),
                found: other.values.len(),
            });
        }
        Ok(())
    }

    /// Resample onto a grid with `intervals` intervals by linear interpolation.
    pub fn resample(&self, intervals: usize) -> GridFunction {
        if intervals == self.intervals() {
            return self.clone();
        }
        GridFunction::from_fn(intervals, |z| self.interpolate(z))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Discrete L2 norm on `[0, 1]` (trapezoid weights).
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        trapezoid(&sq, self.step()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Composite trapezoid rule over equally spaced samples.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Linear interpolation of samples on the uniform grid of `[0, 1]`.
pub fn interpolate(values: &[f64], z: f64) -> f64 {
    let m = values.len() - 1;
    let s = z.clamp(0.0, 1.0) * m as f64;
    let i = (s.floor() as usize).min(m - 1);
    let t = s - i as f64;
    values[i] * (1.0 - t) + values[i + 1] * t
}

/// Hat-function weights `(i, w)` such that `Σ w·f_i` interpolates `f(z)` linearly.
pub(crate) fn hat_weights(intervals: usize, z: f64) -> [(usize, f64); 2] {
    let s = z.clamp(0.0, 1.0) * intervals as f64;
    let i = (s.floor() as usize).min(intervals - 1);
    let t = s - i as f64;
    [(i, 1.0 - t), (i + 1, t)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_on_linear_profiles() {
        let f = GridFunction::from_fn(10, |z| 3.0 * z - 1.0);
        assert!((f.integral() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn interpolation_reproduces_linear_functions() {
        let f = GridFunction::from_fn(7, |z| 2.0 * z + 1.0);
        for &z in &[0.0, 0.13, 0.5, 0.999, 1.0] {
            assert!((f.interpolate(z) - (2.0 * z + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridFunction::zeros(4);
        let b = GridFunction::zeros(5);
        assert!(matches!(a.inner(&b), Err(Error::GridMismatch { .. })));
    }
}
