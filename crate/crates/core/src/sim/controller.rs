//! Networked controller: cooperative internal model and boundary feedback.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::CommTopology;
use crate::grid::GridFunction;
use crate::synthesis::RegulatorGains;

/// Output-error feedback `Σ_j a_ij(y_i − y_j) + a_i0(y_i − r)` of every agent.
pub fn neighborhood_errors(topology: &CommTopology, y: &[f64], r: f64) -> Vec<f64> {
    let n = topology.n_agents();
    (0..n)
        .map(|i| {
            let mut e = topology.leader_links()[i] * (y[i] - r);
            for j in 0..n {
                e += topology.weight(i, j) * (y[i] - y[j]);
            }
            e
        })
        .collect()
}

/// `v̇_i = S v_i + b_y(Σ_j a_ij(y_i − y_j) + a_i0(y_i − r))`.
pub fn internal_model_rhs(
    gains: &RegulatorGains,
    topology: &CommTopology,
    v: &[DVector<f64>],
    y: &[f64],
    r: f64,
) -> Vec<DVector<f64>> {
    neighborhood_errors(topology, y, r)
        .into_iter()
        .zip(v)
        .map(|(e, vi)| &gains.s * vi + &gains.b_y * e)
        .collect()
}

/// Crank–Nicolson map `v ↦ (I − dt/2 S)⁻¹((I + dt/2 S)v + dt·b_y·e)` for a fixed step.
#[derive(Debug, Clone)]
pub struct InternalModelStepper {
    forward: DMatrix<f64>,
    input: DVector<f64>,
}

impl InternalModelStepper {
    pub fn new(gains: &RegulatorGains, dt: f64) -> Result<Self> {
        let n = gains.n_w();
        let id = DMatrix::<f64>::identity(n, n);
        let implicit = (&id - &gains.s * (0.5 * dt))
            .try_inverse()
            .ok_or_else(|| Error::SingularSystem("internal-model step matrix".into()))?;
        Ok(InternalModelStepper {
            forward: &implicit * (&id + &gains.s * (0.5 * dt)),
            input: implicit * &gains.b_y * dt,
        })
    }

    pub fn step(&self, v: &DVector<f64>, error: f64) -> DVector<f64> {
        &self.forward * v + &self.input * error
    }
}

/// Advances every `v_i` by one step with the outputs held at their current values.
pub fn internal_model_step(
    gains: &RegulatorGains,
    topology: &CommTopology,
    v: &[DVector<f64>],
    y: &[f64],
    r: f64,
    dt: f64,
) -> Result<Vec<DVector<f64>>> {
    let stepper = InternalModelStepper::new(gains, dt)?;
    Ok(neighborhood_errors(topology, y, r)
        .into_iter()
        .zip(v)
        .map(|(e, vi)| stepper.step(vi, e))
        .collect())
}

/// `u_i = k_vᵀv_i − k₁x_i(1) − ∫k_x x_i + Σ_j a_ij(ξ_i − ξ_j) + a_i0 ξ_i`, `ξ_i = ∫r_x x_i`.
///
/// The gains must live on the grid of the profiles.
pub fn controller_input(
    gains: &RegulatorGains,
    topology: &CommTopology,
    v: &[DVector<f64>],
    x: &[GridFunction],
) -> Result<Vec<f64>> {
    let n = topology.n_agents();
    if v.len() != n || x.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected {n} agents, got {} internal-model states and {} profiles",
            v.len(),
            x.len()
        )));
    }
    let xi = x.iter().map(|xi| gains.r_x.inner(xi)).collect::<Result<Vec<_>>>()?;
    (0..n)
        .map(|i| {
            let mut u = gains.k_v.dot(&v[i]) - gains.k_1 * x[i].at_right() - gains.k_x.inner(&x[i])?;
            u += topology.leader_links()[i] * xi[i];
            for j in 0..n {
                u += topology.weight(i, j) * (xi[i] - xi[j]);
            }
            Ok(u)
        })
        .collect()
}
