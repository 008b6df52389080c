//! Regulator synthesis: kernel, decoupling, nonblocking test, Riccati gain and certificates.

pub mod bvp;
pub mod certificate;
pub mod decoupling;
pub mod gains;
pub mod riccati;

use nalgebra::{DMatrix, DVector};

pub use certificate::{
    certify_stability, internal_model_rank_check, leader_closed_loop, leaderless_closed_loop, modal_loops_hurwitz,
    sync_input_matrix, sync_steady_state, Mode, StabilityCertificate, SyncSteadyState,
};
pub use decoupling::{
    check_controllable_pair, numerator_at, numerator_scalar, solve_decoupling, ControllabilityReport,
    DecouplingSolution,
};
pub use gains::{assemble_gains, RegulatorGains};
pub use riccati::{are_residual, feedback_gain, solve_are, RiccatiSolution};

use crate::error::{Error, Result};
use crate::graph::{laplacian, spectral_lower_bound, theta_decompose, CommTopology, GraphMatrices};
use crate::grid::GridFunction;
use crate::kernel::{
    invert_kernel, solve_kernel, transform_output_weight, OutputOperator, TriangularKernel, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};

/// Nominal agent data known to the designer.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalPlant {
    pub a: GridFunction,
    pub q0: f64,
    pub q1: f64,
    pub output: OutputOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    pub mu_c: f64,
    /// Defaults to the spectral lower bound of `H` (or `L̃₂₂` without a leader).
    pub nu: Option<f64>,
    /// The weight `a` of the Riccati equation.
    pub riccati_weight: f64,
    pub kernel_tol: f64,
    pub kernel_max_iter: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            mu_c: 5.0,
            nu: None,
            riccati_weight: 150.0,
            kernel_tol: DEFAULT_TOL,
            kernel_max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Every intermediate of a synthesis run.
#[derive(Debug, Clone)]
pub struct Design {
    pub mode: Mode,
    pub graph: GraphMatrices,
    pub kernel: TriangularKernel,
    pub kernel_inv: TriangularKernel,
    pub c_tilde: OutputOperator,
    pub decoupling: DecouplingSolution,
    pub controllability: ControllabilityReport,
    pub nu: f64,
    pub riccati: RiccatiSolution,
    pub gains: RegulatorGains,
    pub certificate: StabilityCertificate,
    pub steady_state: Option<SyncSteadyState>,
}

/// `ν` from the graph: `min Re σ(H)` with a leader, `min Re σ(L̃₂₂)` without.
pub fn default_nu(mode: Mode, graph: &GraphMatrices) -> Result<f64> {
    match mode {
        Mode::LeaderFollower => spectral_lower_bound(&graph.leader_follower),
        Mode::Leaderless => spectral_lower_bound(&theta_decompose(&graph.laplacian)?.l22),
    }
}

/// Runs kernel → output transform → decoupling → nonblocking test → Riccati →
/// gains → certificate, plus the steady state in leaderless mode.
pub fn design(
    plant: &NominalPlant,
    s: &DMatrix<f64>,
    b_y: &DVector<f64>,
    topology: &CommTopology,
    mode: Mode,
    options: &DesignOptions,
) -> Result<Design> {
    if s.nrows() != b_y.len() {
        return Err(Error::InvalidArgument(format!(
            "b_y has length {} but S is {}x{}",
            b_y.len(),
            s.nrows(),
            s.ncols()
        )));
    }
    let topology = match mode {
        Mode::LeaderFollower => topology.clone(),
        Mode::Leaderless => {
            if topology.n_agents() < 2 {
                return Err(Error::InvalidArgument("leaderless mode needs at least two agents".into()));
            }
            topology.without_leader()
        }
    };
    let graph = laplacian(&topology);
    let nu = match options.nu {
        Some(nu) => nu,
        None => default_nu(mode, &graph)?,
    };

    let kernel = solve_kernel(&plant.a, plant.q0, options.mu_c, options.kernel_tol, options.kernel_max_iter)?;
    let kernel_inv = invert_kernel(&kernel)?;
    let c_tilde = transform_output_weight(&plant.output, &kernel_inv)?;
    let decoupling = solve_decoupling(s, b_y, &c_tilde, options.mu_c, &kernel)?;
    let controllability = check_controllable_pair(s, b_y, &decoupling.q_tilde_at_1, &c_tilde, options.mu_c)?;
    if !controllability.controllable {
        return Err(Error::NotControllable);
    }
    let riccati = solve_are(s, &decoupling.q_tilde_at_1, nu, options.riccati_weight)?;
    let k_v = feedback_gain(&riccati.q, &decoupling.q_tilde_at_1);
    let gains = assemble_gains(&kernel, &decoupling, plant.q1, &k_v, b_y, s, options.mu_c)?;
    let certificate = certify_stability(mode, s, &decoupling.q_tilde_at_1, &k_v, &graph, options.mu_c)?;
    let steady_state = match mode {
        Mode::LeaderFollower => None,
        Mode::Leaderless => Some(sync_steady_state(
            s,
            &k_v,
            &decoupling.q_tilde_at_1,
            &theta_decompose(&graph.laplacian)?,
            options.mu_c,
            &c_tilde,
        )?),
    };
    Ok(Design {
        mode,
        graph,
        kernel,
        kernel_inv,
        c_tilde,
        decoupling,
        controllability,
        nu,
        riccati,
        gains,
        certificate,
        steady_state,
    })
}
