//! Vector two-point boundary value problems with Neumann data.
//!
//! Solves `y'' − A y = g(z) + Σ J_k δ(z − z_k)` on `(0, 1)` with
//! `y'(0) = α`, `y'(1) = β`. Each Dirac term is a jump `y'(z_k⁺) − y'(z_k⁻) = J_k`.
//!
//! The discretization is the fourth-order Numerov stencil
//! `y_{i+1} − 2y_i + y_{i−1} = h²/12 (F_{i+1} + 10F_i + F_{i−1})`, `F = Ay + g`,
//! closed at each end by `y_1 − y_0 − h y'(0) = h²/24 (7F_0 + 6F_1 − F_2)`
//! (Taylor expansion with integral remainder, quadratic interpolation of `F`).
//! Jumps enter through the exact hat-function moments of the Dirac terms.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, BandMatrix};

/// Relative distance to the Neumann spectrum below which an operator counts as resonant.
pub const RESONANCE_TOL: f64 = 1e-8;

/// Data of one Neumann problem; `forcing` is `n × (M+1)`, one column per node.
#[derive(Debug, Clone)]
pub struct NeumannProblem<'a> {
    pub a: &'a DMatrix<f64>,
    pub forcing: DMatrix<f64>,
    pub left_flux: DVector<f64>,
    pub right_flux: DVector<f64>,
    pub jumps: Vec<(f64, DVector<f64>)>,
}

/// Fails with `ResonantSpectrum` when some eigenvalue of `A` equals `−(kπ)²`,
/// `k ≥ 0`, i.e. when the homogeneous Neumann problem has a nontrivial solution.
pub fn check_nonresonant(a: &DMatrix<f64>) -> Result<()> {
    for lambda in eigenvalues(a) {
        let k = ((-lambda.re).max(0.0).sqrt() / std::f64::consts::PI).round();
        let target = -(k * std::f64::consts::PI).powi(2);
        let dist = (lambda - target).norm();
        if dist <= RESONANCE_TOL * (1.0 + target.abs()) {
            return Err(Error::ResonantSpectrum {
                eigenvalue: format!("{:.6}{:+.6}i", lambda.re, lambda.im),
                target,
            });
        }
    }
    Ok(())
}

/// Solves the problem on the `M + 1` nodes implied by `forcing`; returns `n × (M+1)`.
pub fn solve_neumann(problem: &NeumannProblem) -> Result<DMatrix<f64>> {
    let a = problem.a;
    let n = a.nrows();
    let nodes = problem.forcing.ncols();
    if problem.forcing.nrows() != n || problem.left_flux.len() != n || problem.right_flux.len() != n {
        return Err(Error::InvalidArgument("boundary-value data dimensions disagree".into()));
    }
    if nodes < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 nodes, got {nodes}")));
    }
    check_nonresonant(a)?;
    let m = nodes - 1;
    let h = 1.0 / m as f64;
    let h2 = h * h;
    let g = &problem.forcing;
    let band = 3 * n - 1;
    let mut mat = BandMatrix::zeros(nodes * n, band, band);
    let mut rhs = DMatrix::zeros(nodes * n, 1);

    // adds  coef_i·y_node − h²·w·A y_node  to block row `row`
    let stencil = |mat: &mut BandMatrix, row: usize, node: usize, coef: f64, w: f64| {
        for r in 0..n {
            for c in 0..n {
                let mut v = -h2 * w * a[(r, c)];
                if r == c {
                    v += coef;
                }
                if v != 0.0 {
                    mat.add(row * n + r, node * n + c, v);
                }
            }
        }
    };

    let closure = [7.0 / 24.0, 6.0 / 24.0, -1.0 / 24.0];
    // z = 0: y_1 − y_0 − h²/24 (7F_0 + 6F_1 − F_2) = h α
    stencil(&mut mat, 0, 0, -1.0, closure[0]);
    stencil(&mut mat, 0, 1, 1.0, closure[1]);
    stencil(&mut mat, 0, 2, 0.0, closure[2]);
    // z = 1: y_{M−1} − y_M − h²/24 (7F_M + 6F_{M−1} − F_{M−2}) = −h β
    stencil(&mut mat, m, m, -1.0, closure[0]);
    stencil(&mut mat, m, m - 1, 1.0, closure[1]);
    stencil(&mut mat, m, m - 2, 0.0, closure[2]);
    for r in 0..n {
        let mut left = h * problem.left_flux[r];
        let mut right = -h * problem.right_flux[r];
        for (l, w) in closure.iter().enumerate() {
            left += h2 * w * g[(r, l)];
            right += h2 * w * g[(r, m - l)];
        }
        rhs[(r, 0)] = left;
        rhs[(m * n + r, 0)] = right;
    }
    for i in 1..m {
        stencil(&mut mat, i, i - 1, 1.0, 1.0 / 12.0);
        stencil(&mut mat, i, i, -2.0, 10.0 / 12.0);
        stencil(&mut mat, i, i + 1, 1.0, 1.0 / 12.0);
        for r in 0..n {
            rhs[(i * n + r, 0)] = h2 / 12.0 * (g[(r, i - 1)] + 10.0 * g[(r, i)] + g[(r, i + 1)]);
        }
    }

    for (zk, jump) in &problem.jumps {
        if !(*zk > 0.0 && *zk < 1.0) || jump.len() != n {
            return Err(Error::InvalidArgument(format!("invalid jump location {zk}")));
        }
        for i in 0..=m {
            let x = i as f64 * h;
            let weight = if i == 0 {
                (h - zk).max(0.0)
            } else if i == m {
                (h - (1.0 - zk)).max(0.0)
            } else {
                (h - (zk - x).abs()).max(0.0)
            };
            if weight > 0.0 {
                for r in 0..n {
                    rhs[(i * n + r, 0)] += weight * jump[r];
                }
            }
        }
        // F = Ay + g inherits the kink A J (z − z_k)₊ from y; the stencils are
        // exact for smooth F only, so the kink's quadrature defect is added back.
        let kink = a * jump;
        let ramp = |s: f64| (s - zk).max(0.0);
        let lo = ((zk / h).floor() as usize).saturating_sub(2);
        let hi = ((zk / h).ceil() as usize + 2).min(m);
        for i in lo..=hi {
            let x = i as f64 * h;
            let defect = if i == 0 {
                exact_moment(|s| (h - s) * ramp(s), 0.0, h, *zk)
                    - h2 * (closure[0] * ramp(0.0) + closure[1] * ramp(h) + closure[2] * ramp(2.0 * h))
            } else if i == m {
                exact_moment(|s| (s - (1.0 - h)) * ramp(s), 1.0 - h, 1.0, *zk)
                    - h2 * (closure[0] * ramp(1.0) + closure[1] * ramp(1.0 - h) + closure[2] * ramp(1.0 - 2.0 * h))
            } else {
                exact_moment(|s| (h - (s - x).abs()) * ramp(s), x - h, x, *zk)
                    + exact_moment(|s| (h - (s - x).abs()) * ramp(s), x, x + h, *zk)
                    - h2 / 12.0 * (ramp(x - h) + 10.0 * ramp(x) + ramp(x + h))
            };
            for r in 0..n {
                rhs[(i * n + r, 0)] += defect * kink[r];
            }
        }
    }

    let sol = mat.solve(&rhs)?;
    Ok(DMatrix::from_column_slice(n, nodes, sol.as_slice()))
}

/// `∫_a^b f` for `f` polynomial of degree ≤ 3 on each side of `split`.
fn exact_moment(f: impl Fn(f64) -> f64, a: f64, b: f64, split: f64) -> f64 {
    let gauss = |a: f64, b: f64| {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        let d = r / 3f64.sqrt();
        r * (f(c - d) + f(c + d))
    };
    if split > a && split < b {
        gauss(a, split) + gauss(split, b)
    } else {
        gauss(a, b)
    }
}
