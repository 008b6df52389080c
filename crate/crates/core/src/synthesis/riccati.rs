//! The algebraic Riccati equation `SᵀQ + QS − 2ν Q g gᵀ Q + aI = 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{is_hurwitz, solve_lyapunov, solve_sylvester, spectral_abscissa, symmetrize};
use crate::signal::check_controllable;

pub const MAX_NEWTON_STEPS: usize = 60;

/// Solution of the Riccati equation and its Frobenius residual.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    pub q: DMatrix<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub fn are_residual(s: &DMatrix<f64>, g: &DVector<f64>, nu: f64, a: f64, q: &DMatrix<f64>) -> f64 {
    let n = s.nrows();
    let qg = q * g;
    (s.transpose() * q + q * s - (&qg * qg.transpose()) * (2.0 * nu) + DMatrix::identity(n, n) * a).norm()
}

/// Newton–Kleinman iteration from a Bass-type stabilizing gain.
///
/// With `K = 2ν gᵀX` every step solves the Lyapunov equation
/// `(S − gK)ᵀX + X(S − gK) = −(aI + KᵀK / 2ν)`.
pub fn solve_are(s: &DMatrix<f64>, g: &DVector<f64>, nu: f64, a: f64) -> Result<RiccatiSolution> {
    if !(nu > 0.0) || !(a > 0.0) {
        return Err(Error::InvalidArgument(format!("ν = {nu} and a = {a} must be positive")));
    }
    if !check_controllable(s, g) {
        return Err(Error::NotControllable);
    }
    let n = s.nrows();
    let eye = DMatrix::<f64>::identity(n, n);

    // K₀ = gᵀP⁻¹ with (S + βI)P + P(S + βI)ᵀ = 2ggᵀ places σ(S − gK₀) left of −β
    let beta = spectral_abscissa(s).max(0.0) + 1.0;
    let shifted = s + &eye * beta;
    let p = symmetrize(&solve_sylvester(&shifted, &shifted.transpose(), &((g * g.transpose()) * 2.0))?);
    let p_inv = p
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NewtonDivergence("initial Gramian is singular".into()))?;
    let mut k = g.transpose() * p_inv;

    let tol = 1e-8 * a * n as f64;
    let mut x = DMatrix::zeros(n, n);
    for it in 1..=MAX_NEWTON_STEPS {
        let closed = s - g * &k;
        if !is_hurwitz(&closed) {
            return Err(Error::NewtonDivergence(format!("closed loop lost stability at step {it}")));
        }
        let rhs = &eye * a + k.transpose() * &k / (2.0 * nu);
        let x_next = solve_lyapunov(&closed, &rhs)?;
        let k_next = (g.transpose() * &x_next) * (2.0 * nu);
        let step = (&x_next - &x).norm();
        x = x_next;
        k = k_next;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NewtonDivergence(format!("non-finite iterate at step {it}")));
        }
        let residual = are_residual(s, g, nu, a, &x);
        if residual <= tol && step <= 1e-12 * x.norm().max(1.0) {
            return Ok(RiccatiSolution {
                q: x,
                residual,
                iterations: it,
            });
        }
    }
    let residual = are_residual(s, g, nu, a, &x);
    if residual <= tol {
        return Ok(RiccatiSolution {
            q: x,
            residual,
            iterations: MAX_NEWTON_STEPS,
        });
    }
    Err(Error::NewtonDivergence(format!(
        "residual {residual:e} after {MAX_NEWTON_STEPS} steps"
    )))
}

/// `k_v = Q q̃(1)`, i.e. the row gain `k_vᵀ = q̃ᵀ(1) Q`.
pub fn feedback_gain(q: &DMatrix<f64>, q_tilde_at_1: &DVector<f64>) -> DVector<f64> {
    q * q_tilde_at_1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_integrator() {
        let sol = solve_are(&DMatrix::zeros(1, 1), &DVector::from_element(1, 1.0), 0.5, 1.0).unwrap();
        assert!((sol.q[(0, 0)] - 1.0).abs() < 1e-12);
        let kv = feedback_gain(&sol.q, &DVector::from_element(1, 1.0));
        assert!((kv[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_weight_gain() {
        let e1 = DVector::from_row_slice(&[1.0, 0.0]);
        assert_eq!(feedback_gain(&DMatrix::identity(2, 2), &e1), e1);
    }

    #[test]
    fn uncontrollable_pair_is_rejected() {
        let r = solve_are(&DMatrix::zeros(2, 2), &DVector::from_element(2, 1.0), 1.0, 1.0);
        assert!(matches!(r, Err(Error::NotControllable)));
    }

    #[test]
    fn rotation_plus_integrator() {
        let pi = std::f64::consts::PI;
        let s = DMatrix::from_row_slice(3, 3, &[0.0, pi, 0.0, -pi, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let g = DVector::from_row_slice(&[0.3, -1.2, 0.8]);
        let sol = solve_are(&s, &g, 0.382, 150.0).unwrap();
        assert!(sol.residual <= 1e-8 * 150.0 * 3.0);
        assert!((&sol.q - sol.q.transpose()).amax() < 1e-12);
        assert!(sol.q.clone().symmetric_eigenvalues().min() > 0.0);
    }
}
