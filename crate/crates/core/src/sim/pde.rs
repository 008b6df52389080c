//! Crank–Nicolson stepping of `ẋ = λ̄ x'' + ā x + s(z,t)` with Robin data at both ends.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::solve_tridiagonal;

/// Second-order semi-discretization `ẋ = L x + f` on `M + 1` nodes.
///
/// The boundary conditions `x'(0) = q̄₀ x(0) + ℓ`, `x'(1) = q̄₁ x(1) + ρ` are
/// closed with ghost nodes `x_{−1} = x_1 − 2h(q̄₀x_0 + ℓ)` and
/// `x_{M+1} = x_{M−1} + 2h(q̄₁x_M + ρ)`.
#[derive(Debug, Clone)]
pub struct PdeOperator {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// `λ̄(0)` and `λ̄(1)`, scaling the boundary inputs.
    lambda_ends: (f64, f64),
    h: f64,
}

impl PdeOperator {
    pub fn new(lambda: &GridFunction, a: &GridFunction, q0: f64, q1: f64) -> Result<Self> {
        lambda.check_same_grid(a)?;
        let m = lambda.intervals();
        let h = lambda.step();
        let lam = lambda.values();
        if let Some(i) = lam.iter().position(|&l| !(l > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "diffusion {} at node {i} is not positive",
                lam[i]
            )));
        }
        let av = a.values();
        let c = 1.0 / (h * h);
        let mut lower = vec![0.0; m + 1];
        let mut diag = vec![0.0; m + 1];
        let mut upper = vec![0.0; m + 1];
        for i in 0..=m {
            diag[i] = -2.0 * lam[i] * c + av[i];
            if i > 0 {
                lower[i] = lam[i] * c;
            }
            if i < m {
                upper[i] = lam[i] * c;
            }
        }
        lower[m] *= 2.0;
        upper[0] *= 2.0;
        diag[0] -= 2.0 * h * q0 * lam[0] * c;
        diag[m] += 2.0 * h * q1 * lam[m] * c;
        Ok(PdeOperator {
            lower,
            diag,
            upper,
            lambda_ends: (lam[0], lam[m]),
            h,
        })
    }

    pub fn intervals(&self) -> usize {
        self.diag.len() - 1
    }

    /// `L x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.intervals();
        (0..=m)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i] * x[i - 1];
                }
                if i < m {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Adds the ghost-node contributions of the boundary inputs to a source vector.
    pub fn add_boundary_inputs(&self, f: &mut [f64], left: f64, right: f64) {
        let m = self.intervals();
        f[0] -= 2.0 * self.lambda_ends.0 * left / self.h;
        f[m] += 2.0 * self.lambda_ends.1 * right / self.h;
    }

    /// One Crank–Nicolson step with the step-averaged forcing `f̄` (boundary inputs included).
    pub fn step(&self, x: &mut [f64], forcing: &[f64], dt: f64) -> Result<()> {
        let m = self.intervals();
        let lx = self.apply(x);
        let mut rhs: Vec<f64> = (0..=m).map(|i| x[i] + 0.5 * dt * lx[i] + dt * forcing[i]).collect();
        let lower: Vec<f64> = self.lower.iter().map(|v| -0.5 * dt * v).collect();
        let upper: Vec<f64> = self.upper.iter().map(|v| -0.5 * dt * v).collect();
        let diag: Vec<f64> = self.diag.iter().map(|v| 1.0 - 0.5 * dt * v).collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
        x.copy_from_slice(&rhs);
        Ok(())
    }
}

/// The truth model of one agent on the simulation grid.
#[derive(Debug, Clone)]
pub struct AgentModel {
    pub operator: PdeOperator,
    pub output: crate::kernel::OutputOperator,
    pub g1: Vec<GridFunction>,
    pub g2: DVector<f64>,
    pub g3: DVector<f64>,
    pub g4: DVector<f64>,
}

impl AgentModel {
    /// `y = C̄[x] + g₄ᵀd`.
    pub fn output(&self, profile: &GridFunction, d: &DVector<f64>) -> Result<f64> {
        Ok(self.output.apply(profile)? + self.g4.dot(d))
    }

    /// Step-averaged forcing for disturbance `d̄` and actuation `ū`.
    pub fn forcing(&self, d: &DVector<f64>, u: f64) -> Vec<f64> {
        let m = self.operator.intervals();
        let mut f = vec![0.0; m + 1];
        for (gk, dk) in self.g1.iter().zip(d.iter()) {
            for (fi, gi) in f.iter_mut().zip(gk.values()) {
                *fi += gi * dk;
            }
        }
        self.operator.add_boundary_inputs(&mut f, self.g2.dot(d), u + self.g3.dot(d));
        f
    }

    /// One step with `u` and `d` held over the step.
    pub fn step(&self, profile: &GridFunction, u: f64, d: &DVector<f64>, dt: f64) -> Result<GridFunction> {
        let mut x = profile.values().to_vec();
        self.operator.step(&mut x, &self.forcing(d, u), dt)?;
        GridFunction::new(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_mode_decays_at_the_heat_rate() {
        let m = 200;
        let op = PdeOperator::new(&GridFunction::constant(m, 1.0), &GridFunction::zeros(m), 0.0, 0.0).unwrap();
        let mut x: Vec<f64> = GridFunction::from_fn(m, |z| (PI * z).cos()).into_values();
        let dt = 1e-4;
        let zero = vec![0.0; m + 1];
        for _ in 0..1000 {
            op.step(&mut x, &zero, dt).unwrap();
        }
        let decay = (-PI * PI * 0.1f64).exp();
        for (i, v) in x.iter().enumerate() {
            let exact = decay * (PI * i as f64 / m as f64).cos();
            assert!((v - exact).abs() <= 1e-3 * decay, "node {i}");
        }
    }

    #[test]
    fn zero_state_stays_zero() {
        let m = 50;
        let op = PdeOperator::new(&GridFunction::constant(m, 1.3), &GridFunction::constant(m, 2.0), 1.0, -1.0).unwrap();
        let mut x = vec![0.0; m + 1];
        op.step(&mut x, &vec![0.0; m + 1], 1e-3).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonpositive_diffusion_is_rejected() {
        let m = 10;
        let r = PdeOperator::new(&GridFunction::constant(m, 0.0), &GridFunction::zeros(m), 0.0, 0.0);
        assert!(r.is_err());
    }
}
