//! Closed-loop certificates, internal-model rank checks and the synchronized steady state.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::bvp::{check_nonresonant, solve_neumann, NeumannProblem};
use crate::error::{Error, Result};
use crate::graph::{kron, GraphMatrices, ThetaDecomposition};
use crate::kernel::OutputOperator;
use crate::linalg::{eigenvalues, is_hurwitz, rank, solve_sylvester, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    LeaderFollower,
    Leaderless,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::LeaderFollower => "leader-follower",
            Mode::Leaderless => "leaderless",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate {
    pub mode: Mode,
    /// `σ(F_ev)` or `σ(F_εv)`.
    pub closed_loop_eigs: Vec<C64>,
    pub alpha_ev: f64,
    /// Top eigenvalue `−μ_c` of the Neumann target PDE.
    pub target_pde_top_eig: f64,
    pub overall_alpha: f64,
}

impl StabilityCertificate {
    pub fn pass(&self) -> bool {
        self.alpha_ev > 0.0 && self.target_pde_top_eig < 0.0
    }
}

/// `F_ev = I_N ⊗ S − H ⊗ q̃(1)k_vᵀ`.
pub fn leader_closed_loop(s: &DMatrix<f64>, g: &DVector<f64>, k_v: &DVector<f64>, h: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    kron(&DMatrix::identity(n, n), s) - kron(h, &(g * k_v.transpose()))
}

/// `F_εv = I_{N−1} ⊗ S − L̃₂₂ ⊗ q̃(1)k_vᵀ`.
pub fn leaderless_closed_loop(
    s: &DMatrix<f64>,
    g: &DVector<f64>,
    k_v: &DVector<f64>,
    theta: &ThetaDecomposition,
) -> DMatrix<f64> {
    leader_closed_loop(s, g, k_v, &theta.l22)
}

pub fn certify_stability(
    mode: Mode,
    s: &DMatrix<f64>,
    q_tilde_at_1: &DVector<f64>,
    k_v: &DVector<f64>,
    graph: &GraphMatrices,
    mu_c: f64,
) -> Result<StabilityCertificate> {
    let f = match mode {
        Mode::LeaderFollower => leader_closed_loop(s, q_tilde_at_1, k_v, &graph.leader_follower),
        Mode::Leaderless => {
            let theta = crate::graph::theta_decompose(&graph.laplacian)?;
            leaderless_closed_loop(s, q_tilde_at_1, k_v, &theta)
        }
    };
    let closed_loop_eigs = eigenvalues(&f);
    let alpha_ev = -closed_loop_eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityCertificate {
        mode,
        closed_loop_eigs,
        alpha_ev,
        target_pde_top_eig: -mu_c,
        overall_alpha: alpha_ev.min(mu_c),
    })
}

/// `S − λ q̃(1)k_vᵀ` is Hurwitz for every `λ` in `eigs`.
///
/// The complex matrix `A + iB` is tested through its real form `[[A, −B], [B, A]]`,
/// whose spectrum is `σ(A + iB) ∪ conj σ(A + iB)`.
pub fn modal_loops_hurwitz(s: &DMatrix<f64>, g: &DVector<f64>, k_v: &DVector<f64>, eigs: &[C64]) -> bool {
    let n = s.nrows();
    let gk = g * k_v.transpose();
    eigs.iter().all(|l| {
        let a = s - &gk * l.re;
        let b = -&gk * l.im;
        let mut real = DMatrix::zeros(2 * n, 2 * n);
        real.view_mut((0, 0), (n, n)).copy_from(&a);
        real.view_mut((n, n), (n, n)).copy_from(&a);
        real.view_mut((0, n), (n, n)).copy_from(&(-&b));
        real.view_mut((n, 0), (n, n)).copy_from(&b);
        is_hurwitz(&real)
    })
}

/// Leader-follower: `det H ≠ 0`; leaderless: `rank H̃ = N − 1`.
pub fn internal_model_rank_check(mode: Mode, graph: &GraphMatrices) -> bool {
    let n = graph.laplacian.nrows();
    match mode {
        Mode::LeaderFollower => rank(&graph.leader_follower, 1e-9) == n && graph.leader_follower.amax() > 0.0,
        Mode::Leaderless => {
            if n < 2 {
                return false;
            }
            match crate::graph::theta_decompose(&graph.laplacian) {
                Ok(theta) => {
                    let ht = theta.h_tilde();
                    ht.amax() > 0.0 && rank(&ht, 1e-9) == n - 1
                }
                Err(_) => false,
            }
        }
    }
}

/// `Π`, `Σ₁`, `Σ₂` and the read-out `C∘T⁻¹[Σ₁]` of the synchronized steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncSteadyState {
    pub pi: DMatrix<f64>,
    /// Row `i` of `Σ₁(z)`, transposed: `n_w × (M+1)`.
    pub sigma1_rows: Vec<DMatrix<f64>>,
    /// Row `i` of `Σ₂(z)`, transposed: `(N−1)n_w × (M+1)`.
    pub sigma2_rows: Vec<DMatrix<f64>>,
    /// `N × n_w`; the synchronized output is `y_∞ = map · ẽ_{v₁}(t)`.
    pub y_inf_map: DMatrix<f64>,
    pub f_eps: DMatrix<f64>,
}

/// `B = [0; I_{N−1} ⊗ k_vᵀ]`, an `N × (N−1)n_w` matrix.
pub fn sync_input_matrix(n_agents: usize, k_v: &DVector<f64>) -> DMatrix<f64> {
    let nw = k_v.len();
    let mut b = DMatrix::zeros(n_agents, (n_agents - 1) * nw);
    for i in 1..n_agents {
        for c in 0..nw {
            b[(i, (i - 1) * nw + c)] = k_v[c];
        }
    }
    b
}

fn min_spectral_distance(a: &[C64], b: &[C64]) -> (f64, C64) {
    let mut best = (f64::INFINITY, C64::new(0.0, 0.0));
    for &x in a {
        for &y in b {
            let d = (x - y).norm();
            if d < best.0 {
                best = (d, x);
            }
        }
    }
    best
}

/// Solves `ΠF_εv − SΠ = −(l̃₁₂ᵀ ⊗ q̃(1)k_vᵀ)` and the Neumann problems
/// `Σ₁'' − μ_cΣ₁ − Σ₁S = 0`, `Σ₁'(0) = 0`, `Σ₁'(1) = 1_N k_vᵀ`,
/// `Σ₂'' − μ_cΣ₂ − Σ₂F_εv = 0`, `Σ₂'(0) = 0`, `Σ₂'(1) = 1_N k_vᵀΠ + B`.
pub fn sync_steady_state(
    s: &DMatrix<f64>,
    k_v: &DVector<f64>,
    q_tilde_at_1: &DVector<f64>,
    theta: &ThetaDecomposition,
    mu_c: f64,
    c_tilde: &OutputOperator,
) -> Result<SyncSteadyState> {
    let n_agents = theta.theta.nrows();
    let nw = s.nrows();
    let m = c_tilde.intervals();
    let f_eps = leaderless_closed_loop(s, q_tilde_at_1, k_v, theta);
    let (dist, at) = min_spectral_distance(&eigenvalues(&f_eps), &eigenvalues(s));
    if dist < 1e-8 {
        return Err(Error::ResonantSpectrum {
            eigenvalue: format!("{:.6}{:+.6}i", at.re, at.im),
            target: at.re,
        });
    }
    let l12_row = DMatrix::from_row_slice(1, n_agents - 1, theta.l12.as_slice());
    let coupling = kron(&l12_row, &(q_tilde_at_1 * k_v.transpose()));
    let pi = solve_sylvester(&(-s), &f_eps, &(-coupling))?;

    let a1 = s.transpose() + DMatrix::identity(nw, nw) * mu_c;
    let a2 = f_eps.transpose() + DMatrix::identity(f_eps.nrows(), f_eps.nrows()) * mu_c;
    check_nonresonant(&a1)?;
    check_nonresonant(&a2)?;
    let b = sync_input_matrix(n_agents, k_v);
    let kv_pi = (k_v.transpose() * &pi).transpose();

    let mut sigma1_rows = Vec::with_capacity(n_agents);
    let mut sigma2_rows = Vec::with_capacity(n_agents);
    for i in 0..n_agents {
        sigma1_rows.push(solve_neumann(&NeumannProblem {
            a: &a1,
            forcing: DMatrix::zeros(nw, m + 1),
            left_flux: DVector::zeros(nw),
            right_flux: k_v.clone(),
            jumps: vec![],
        })?);
        sigma2_rows.push(solve_neumann(&NeumannProblem {
            a: &a2,
            forcing: DMatrix::zeros(a2.nrows(), m + 1),
            left_flux: DVector::zeros(a2.nrows()),
            right_flux: &kv_pi + b.row(i).transpose(),
            jumps: vec![],
        })?);
    }

    let mut y_inf_map = DMatrix::zeros(n_agents, nw);
    for (i, row) in sigma1_rows.iter().enumerate() {
        for c in 0..nw {
            let profile = crate::grid::GridFunction::new(row.row(c).iter().copied().collect())?;
            y_inf_map[(i, c)] = c_tilde.apply(&profile)?;
        }
    }
    Ok(SyncSteadyState {
        pi,
        sigma1_rows,
        sigma2_rows,
        y_inf_map,
        f_eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, CommTopology};

    #[test]
    fn zero_gain_fails_certificate() {
        let pi = std::f64::consts::PI;
        let s = DMatrix::from_row_slice(2, 2, &[0.0, pi, -pi, 0.0]);
        let topo = CommTopology::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[1.0, 0.0]).unwrap();
        let cert = certify_stability(
            Mode::LeaderFollower,
            &s,
            &DVector::from_element(2, 1.0),
            &DVector::zeros(2),
            &laplacian(&topo),
            5.0,
        )
        .unwrap();
        assert!(!cert.pass());
    }

    #[test]
    fn rank_checks_on_edgeless_graph() {
        let topo = CommTopology::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[0.0, 0.0]).unwrap();
        let g = laplacian(&topo);
        assert!(!internal_model_rank_check(Mode::LeaderFollower, &g));
        assert!(!internal_model_rank_check(Mode::Leaderless, &g));
    }

    #[test]
    fn input_matrix_layout() {
        let b = sync_input_matrix(3, &DVector::from_row_slice(&[1.0, 2.0]));
        assert_eq!(
            b,
            DMatrix::from_row_slice(3, 4, &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0])
        );
    }
}
