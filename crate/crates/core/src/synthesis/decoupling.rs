//! Decoupling equations, the transfer numerator and the controllability of `(S, q̃(1))`.

use nalgebra::{DMatrix, DVector};

use super::bvp::{solve_neumann, NeumannProblem};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::{OutputOperator, TriangularKernel};
use crate::linalg::{eigenvalues, pbh_margin, C64};
use crate::signal::check_controllable;

/// `|n(λ)|` must exceed this for a frequency to count as transmitted.
pub const NUMERATOR_TOL: f64 = 1e-6;
/// Normalized PBH margin below which `(S, q̃(1))` is treated as uncontrollable.
///
/// The direct test sees `q̃(1)` through the discretization, so a pair that is
/// exactly blocked in the continuum shows a margin of order `M⁻²`, not zero.
pub const PBH_TOL: f64 = 1e-4;

/// `q̃` and `q` sampled on the grid, one column per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DecouplingSolution {
    pub q_tilde: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub q_tilde_at_1: DVector<f64>,
}

impl DecouplingSolution {
    pub fn intervals(&self) -> usize {
        self.q_tilde.ncols() - 1
    }
}

/// Solves `q̃'' − (μ_c I + S) q̃ = b_y c̃`, `q̃'(0) = b_y c_b0`, `q̃'(1) = −b_y c_b1`,
/// with a jump `b_y c_k` in `q̃'` at every point weight, then maps back to
/// `q(ζ) = q̃(ζ) − ∫_ζ¹ q̃(s) k(s,ζ) ds`.
pub fn solve_decoupling(
    s: &DMatrix<f64>,
    b_y: &DVector<f64>,
    c_tilde: &OutputOperator,
    mu_c: f64,
    kernel: &TriangularKernel,
) -> Result<DecouplingSolution> {
    let m = c_tilde.intervals();
    if kernel.intervals() != m {
        return Err(Error::GridMismatch {
            expected: m + 1,
            found: kernel.intervals() + 1,
        });
    }
    let n = s.nrows();
    let a = s + DMatrix::identity(n, n) * mu_c;
    let c = c_tilde.smooth.values();
    let problem = NeumannProblem {
        a: &a,
        forcing: DMatrix::from_fn(n, m + 1, |r, i| b_y[r] * c[i]),
        left_flux: b_y * c_tilde.boundary.0,
        right_flux: b_y * (-c_tilde.boundary.1),
        jumps: c_tilde.points.iter().map(|&(ck, zk)| (zk, b_y * ck)).collect(),
    };
    let q_tilde = solve_neumann(&problem)?;
    let q = pull_back(&q_tilde, kernel);
    Ok(DecouplingSolution {
        q_tilde_at_1: q_tilde.column(m).into_owned(),
        q_tilde,
        q,
    })
}

/// `q(ζ_j) = q̃(ζ_j) − ∫_{ζ_j}^1 q̃(s) k(s, ζ_j) ds` by the trapezoid rule.
fn pull_back(q_tilde: &DMatrix<f64>, kernel: &TriangularKernel) -> DMatrix<f64> {
    let m = kernel.intervals();
    let h = kernel.step();
    let mut q = q_tilde.clone();
    for j in 0..m {
        let mut acc = (q_tilde.column(j) * kernel.get(j, j) + q_tilde.column(m) * kernel.get(m, j)) * 0.5;
        for i in j + 1..m {
            acc += q_tilde.column(i) * kernel.get(i, j);
        }
        let mut col = q.column_mut(j);
        col -= acc * h;
    }
    q
}

/// Scalar transfer numerator
/// `n(s) = c_b0 + c_b1 cosh ρ + ∫₀¹ c̃(ζ) cosh(ρζ) dζ + Σ c_k cosh(ρ z_k)`, `ρ = √(s + μ_c)`.
///
/// `cosh(ρζ)` is even in `ρ`, so the choice of square-root branch is immaterial
/// and the expression is entire in `s`.
pub fn numerator_scalar(s: C64, c_tilde: &OutputOperator, mu_c: f64) -> C64 {
    let rho = (s + mu_c).sqrt();
    let grid = &c_tilde.smooth;
    let m = grid.intervals();
    let h = grid.step();
    let c = grid.values();
    let mut integral = C64::new(0.0, 0.0);
    for (i, &ci) in c.iter().enumerate() {
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        integral += (rho * (i as f64 * h)).cosh() * (w * ci);
    }
    let mut n = integral * h + c_tilde.boundary.0 + rho.cosh() * c_tilde.boundary.1;
    for &(ck, zk) in &c_tilde.points {
        n += (rho * zk).cosh() * ck;
    }
    n
}

/// `N(s) = n(s) I_N`.
pub fn numerator_at(s: C64, c_tilde: &OutputOperator, mu_c: f64, n_agents: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal_element(n_agents, n_agents, numerator_scalar(s, c_tilde, mu_c))
}

/// Both controllability verdicts for `(S, q̃(1))` and their evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityReport {
    /// `(S, b_y)` controllable.
    pub input_controllable: bool,
    /// `(λ, |n(λ)|)` for each `λ ∈ σ(S)`.
    pub numerator: Vec<(C64, f64)>,
    pub numerator_margin: f64,
    pub direct_margin: f64,
    pub controllable: bool,
}

/// `(S, q̃(1))` controllable iff `(S, b_y)` controllable and `n(λ) ≠ 0` on `σ(S)`;
/// cross-checked against a direct PBH test on `(S, q̃(1))`.
pub fn check_controllable_pair(
    s: &DMatrix<f64>,
    b_y: &DVector<f64>,
    q_tilde_at_1: &DVector<f64>,
    c_tilde: &OutputOperator,
    mu_c: f64,
) -> Result<ControllabilityReport> {
    let input_controllable = check_controllable(s, b_y);
    let numerator: Vec<(C64, f64)> = eigenvalues(s)
        .into_iter()
        .map(|l| (l, numerator_scalar(l, c_tilde, mu_c).norm()))
        .collect();
    let numerator_margin = numerator.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let direct_margin = pbh_margin(s, q_tilde_at_1);
    let by_numerator = input_controllable && numerator_margin > NUMERATOR_TOL;
    let direct = direct_margin > PBH_TOL;
    if by_numerator != direct {
        let confident = if by_numerator {
            numerator_margin > 10.0 * NUMERATOR_TOL && direct_margin < 0.1 * PBH_TOL
        } else {
            direct_margin > 10.0 * PBH_TOL && input_controllable && numerator_margin < 0.1 * NUMERATOR_TOL
        };
        if confident {
            return Err(Error::InconsistentCertificates {
                numerator_margin,
                direct_margin,
            });
        }
    }
    Ok(ControllabilityReport {
        input_controllable,
        numerator,
        numerator_margin,
        direct_margin,
        controllable: by_numerator && direct,
    })
}

/// The rows of `q` as grid functions, one per signal-model coordinate.
pub fn rows_as_grid(m: &DMatrix<f64>) -> Vec<GridFunction> {
    (0..m.nrows())
        .map(|r| GridFunction::new(m.row(r).iter().copied().collect()).expect("at least two nodes"))
        .collect()
}
