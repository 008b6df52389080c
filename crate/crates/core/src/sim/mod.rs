//! Closed-loop simulation of the networked agents by the method of lines.
//!
//! Each agent is discretized on `M + 1` nodes and stepped by Crank–Nicolson.
//! The actuation is held over a step, the exosystem is propagated exactly and
//! disturbances are averaged over the step.

pub mod cascade;
pub mod controller;
pub mod metrics;
pub mod pde;

use nalgebra::DVector;

pub use cascade::{simulate_target_cascade, to_target_coordinates, CascadeTrace};
pub use controller::{controller_input, internal_model_rhs, internal_model_step, neighborhood_errors, InternalModelStepper};
pub use metrics::{error_metrics_with_band, suffix_max, ErrorMetrics, SETTLING_FRACTION, TAIL_FRACTION};
pub use pde::{AgentModel, PdeOperator};

use crate::error::{Error, Result};
use crate::graph::CommTopology;
use crate::grid::GridFunction;
use crate::kernel::OutputOperator;
use crate::signal::{ExoModel, ExoPropagator, ExoState};
use crate::synthesis::{Mode, NominalPlant, RegulatorGains};

/// Per-agent deviations from the nominal plant, disturbance injection and initial state.
///
/// Profiles may live on any grid; they are resampled onto the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub delta_lambda: GridFunction,
    pub delta_a: GridFunction,
    pub delta_q0: f64,
    pub delta_q1: f64,
    pub delta_c0: GridFunction,
    /// One entry per pointwise output weight of the nominal plant.
    pub delta_points: Vec<f64>,
    pub delta_boundary: (f64, f64),
    /// Distributed disturbance input, one profile per disturbance channel.
    pub g1: Vec<GridFunction>,
    pub g2: DVector<f64>,
    pub g3: DVector<f64>,
    pub g4: DVector<f64>,
    pub x0: GridFunction,
    pub v0: DVector<f64>,
}

impl AgentSpec {
    /// No uncertainty and no disturbance channels.
    pub fn nominal(plant: &NominalPlant, x0: GridFunction, v0: DVector<f64>) -> Self {
        let m = plant.a.intervals();
        AgentSpec {
            delta_lambda: GridFunction::zeros(m),
            delta_a: GridFunction::zeros(m),
            delta_q0: 0.0,
            delta_q1: 0.0,
            delta_c0: GridFunction::zeros(m),
            delta_points: vec![0.0; plant.output.points.len()],
            delta_boundary: (0.0, 0.0),
            g1: vec![],
            g2: DVector::zeros(0),
            g3: DVector::zeros(0),
            g4: DVector::zeros(0),
            x0,
            v0,
        }
    }

    pub fn disturbance_dim(&self) -> usize {
        self.g2.len()
    }

    /// The true output operator `C̄ = C + ΔC` on a grid with `intervals` intervals.
    pub fn true_output(&self, nominal: &OutputOperator, intervals: usize) -> Result<OutputOperator> {
        if self.delta_points.len() != nominal.points.len() {
            return Err(Error::InvalidArgument(format!(
                "{} point-weight perturbations for {} point weights",
                self.delta_points.len(),
                nominal.points.len()
            )));
        }
        let smooth = nominal
            .smooth
            .resample(intervals)
            .zip_with(&self.delta_c0.resample(intervals), |c, d| c + d)?;
        let points = nominal
            .points
            .iter()
            .zip(&self.delta_points)
            .map(|(&(c, z), d)| (c + d, z))
            .collect();
        OutputOperator::new(
            smooth,
            points,
            (nominal.boundary.0 + self.delta_boundary.0, nominal.boundary.1 + self.delta_boundary.1),
        )
    }

    /// The agent's truth model on a grid with `intervals` intervals.
    pub fn truth_model(&self, plant: &NominalPlant, intervals: usize) -> Result<AgentModel> {
        let md = self.disturbance_dim();
        if self.g1.len() != md || self.g3.len() != md || self.g4.len() != md {
            return Err(Error::InvalidArgument(format!(
                "disturbance inputs disagree in size: g1 {}, g2 {}, g3 {}, g4 {}",
                self.g1.len(),
                md,
                self.g3.len(),
                self.g4.len()
            )));
        }
        let lambda = self.delta_lambda.resample(intervals).map(|d| 1.0 + d);
        let a = plant
            .a
            .resample(intervals)
            .zip_with(&self.delta_a.resample(intervals), |a, d| a + d)?;
        Ok(AgentModel {
            operator: PdeOperator::new(&lambda, &a, plant.q0 + self.delta_q0, plant.q1 + self.delta_q1)?,
            output: self.true_output(&plant.output, intervals)?,
            g1: self.g1.iter().map(|g| g.resample(intervals)).collect(),
            g2: self.g2.clone(),
            g3: self.g3.clone(),
            g4: self.g4.clone(),
        })
    }
}

/// `y_i = C̄_i[x_i] + g₄ᵀd_i` for a profile on any grid.
pub fn evaluate_output(
    plant: &NominalPlant,
    agent: &AgentSpec,
    profile: &GridFunction,
    d: &DVector<f64>,
) -> Result<f64> {
    Ok(agent.true_output(&plant.output, profile.intervals())?.apply(profile)? + agent.g4.dot(d))
}

/// One step of an agent's PDE with `u` and `d` held over the step.
pub fn pde_step(
    plant: &NominalPlant,
    agent: &AgentSpec,
    profile: &GridFunction,
    u: f64,
    d: &DVector<f64>,
    dt: f64,
) -> Result<GridFunction> {
    agent.truth_model(plant, profile.intervals())?.step(profile, u, d, dt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub intervals: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Spacing of recorded samples; rounded to a multiple of `dt`.
    pub sample_interval: f64,
    /// Times at which full profiles are stored.
    pub snapshot_times: Vec<f64>,
    pub blowup_bound: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            intervals: 200,
            dt: 1e-3,
            horizon: 20.0,
            sample_interval: 0.01,
            snapshot_times: vec![],
            blowup_bound: 1e8,
        }
    }
}

/// Everything that defines one closed-loop run.
#[derive(Debug, Clone, Copy)]
pub struct ClosedLoop<'a> {
    pub plant: &'a NominalPlant,
    pub agents: &'a [AgentSpec],
    pub topology: &'a CommTopology,
    pub mode: Mode,
    pub exo: &'a ExoModel,
    pub w0: &'a DVector<f64>,
    pub gains: &'a RegulatorGains,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub profiles: Vec<GridFunction>,
    pub v: Vec<DVector<f64>>,
}

/// Sampled closed-loop history.
///
/// With a leader `e_i = y_i − r`; without one `r` is recorded as zero and
/// `e_i = y_i − y_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub mode: Mode,
    pub times: Vec<f64>,
    pub reference: Vec<f64>,
    pub outputs: Vec<Vec<f64>>,
    pub errors: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Snapshot,
}

impl SimTrace {
    pub fn n_agents(&self) -> usize {
        self.final_state.profiles.len()
    }

    /// `max_i |y_i − r|` with a leader, `max_{i,j} |y_i − y_j|` without.
    pub fn error_magnitude(&self) -> Vec<f64> {
        match self.mode {
            Mode::LeaderFollower => self
                .errors
                .iter()
                .map(|e| e.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
                .collect(),
            Mode::Leaderless => self.outputs.iter().map(|y| max_pairwise_gap(y)).collect(),
        }
    }

    /// Amplitude the settling band is relative to: `max |r|`, or `max |y_i|` without a leader.
    pub fn signal_amplitude(&self) -> f64 {
        let abs_max = |xs: &[f64]| xs.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        match self.mode {
            Mode::LeaderFollower => abs_max(&self.reference),
            Mode::Leaderless => self.outputs.iter().map(|y| abs_max(y)).fold(0.0, f64::max),
        }
    }
}

pub fn max_pairwise_gap(y: &[f64]) -> f64 {
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    if y.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Settling time, tail error and decay rate of a trace; the band is 5% of the signal amplitude.
pub fn error_metrics(trace: &SimTrace) -> ErrorMetrics {
    error_metrics_with_band(
        &trace.times,
        &trace.error_magnitude(),
        SETTLING_FRACTION * trace.signal_amplitude(),
    )
}

fn state_norm(x: &[GridFunction], v: &[DVector<f64>]) -> f64 {
    let xs = x.iter().map(|p| p.sup_norm()).fold(0.0, f64::max);
    let vs = v.iter().map(|p| p.amax()).fold(0.0, f64::max);
    if xs.is_finite() && vs.is_finite() {
        xs.max(vs)
    } else {
        f64::INFINITY
    }
}

pub fn simulate(cl: &ClosedLoop, config: &SimConfig) -> Result<SimTrace> {
    let n = cl.topology.n_agents();
    let m = config.intervals;
    if cl.agents.len() != n || cl.exo.disturbance_readouts.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} agents, {} agent specifications, {} disturbance read-outs",
            n,
            cl.agents.len(),
            cl.exo.disturbance_readouts.len()
        )));
    }
    if m < 4 {
        return Err(Error::InvalidArgument(format!("grid needs at least 4 intervals, got {m}")));
    }
    if !(config.dt > 0.0 && config.horizon > 0.0 && config.sample_interval > 0.0) {
        return Err(Error::InvalidArgument("dt, horizon and sample interval must be positive".into()));
    }
    if cl.w0.len() != cl.exo.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial signal state has {} entries, signal model has dimension {}",
            cl.w0.len(),
            cl.exo.dim()
        )));
    }
    for (i, agent) in cl.agents.iter().enumerate() {
        if agent.v0.len() != cl.gains.n_w() {
            return Err(Error::InvalidArgument(format!(
                "agent {} has an internal-model state of size {}, expected {}",
                i + 1,
                agent.v0.len(),
                cl.gains.n_w()
            )));
        }
        if cl.exo.disturbance_readouts[i].nrows() != agent.disturbance_dim() {
            return Err(Error::InvalidArgument(format!(
                "agent {} has {} disturbance inputs but the signal model provides {}",
                i + 1,
                agent.disturbance_dim(),
                cl.exo.disturbance_readouts[i].nrows()
            )));
        }
    }

    let topology = match cl.mode {
        Mode::LeaderFollower => cl.topology.clone(),
        Mode::Leaderless => cl.topology.without_leader(),
    };
    let gains = cl.gains.resample(m);
    let models = cl
        .agents
        .iter()
        .map(|a| a.truth_model(cl.plant, m))
        .collect::<Result<Vec<_>>>()?;
    let dt = config.dt;
    let steps = (config.horizon / dt).round().max(1.0) as usize;
    let sample_every = ((config.sample_interval / dt).round() as usize).max(1);
    let snapshot_steps: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|t| ((t / dt).round().max(0.0) as usize).min(steps))
        .collect();
    let exo_step = ExoPropagator::new(&cl.exo.s, dt)?;
    let im_step = InternalModelStepper::new(&gains, dt)?;

    let mut w = ExoState { w: cl.w0.clone() };
    let mut x: Vec<GridFunction> = cl.agents.iter().map(|a| a.x0.resample(m)).collect();
    let mut v: Vec<DVector<f64>> = cl.agents.iter().map(|a| a.v0.clone()).collect();

    let mut trace = SimTrace {
        mode: cl.mode,
        times: vec![],
        reference: vec![],
        outputs: vec![],
        errors: vec![],
        inputs: vec![],
        snapshots: vec![],
        final_state: Snapshot {
            time: 0.0,
            profiles: vec![],
            v: vec![],
        },
    };

    let reference = |w: &ExoState| match cl.mode {
        Mode::LeaderFollower => cl.exo.reference(w),
        Mode::Leaderless => 0.0,
    };
    let disturbances = |w: &ExoState| (0..n).map(|i| cl.exo.disturbance(i, w)).collect::<Vec<_>>();

    let mut d = disturbances(&w);
    for step in 0..=steps {
        let t = step as f64 * dt;
        let r = reference(&w);
        let y = models
            .iter()
            .zip(&x)
            .zip(&d)
            .map(|((model, xi), di)| model.output(xi, di))
            .collect::<Result<Vec<_>>>()?;
        let u = controller_input(&gains, &topology, &v, &x)?;

        if step % sample_every == 0 || step == steps {
            trace.times.push(t);
            trace.reference.push(r);
            trace.errors.push(match cl.mode {
                Mode::LeaderFollower => y.iter().map(|yi| yi - r).collect(),
                Mode::Leaderless => y.iter().map(|yi| yi - y[0]).collect(),
            });
            trace.outputs.push(y.clone());
            trace.inputs.push(u.clone());
        }
        for _ in snapshot_steps.iter().filter(|&&s| s == step) {
            trace.snapshots.push(Snapshot {
                time: t,
                profiles: x.clone(),
                v: v.clone(),
            });
        }
        if step == steps {
            trace.final_state = Snapshot {
                time: t,
                profiles: x,
                v,
            };
            break;
        }

        let errors = neighborhood_errors(&topology, &y, r);
        let w_next = exo_step.step(&w);
        let d_next = disturbances(&w_next);
        for i in 0..n {
            v[i] = im_step.step(&v[i], errors[i]);
            let d_avg = (&d[i] + &d_next[i]) * 0.5;
            let forcing = models[i].forcing(&d_avg, u[i]);
            models[i].operator.step(x[i].values_mut(), &forcing, dt)?;
        }
        w = w_next;
        d = d_next;

        let norm = state_norm(&x, &v);
        if !(norm <= config.blowup_bound) {
            return Err(Error::NumericalBlowup {
                time: t + dt,
                norm,
                bound: config.blowup_bound,
            });
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::OutputOperator;
    use nalgebra::DMatrix;

    fn heat_plant(m: usize) -> NominalPlant {
        NominalPlant {
            a: GridFunction::zeros(m),
            q0: 0.0,
            q1: 0.0,
            output: OutputOperator::new(GridFunction::zeros(m), vec![], (0.0, 1.0)).unwrap(),
        }
    }

    #[test]
    fn stationary_profile_of_a_forced_heat_equation() {
        // x'' + 2 = 0, x'(0) = 0, x'(1) = −2  ⇒  x = c − z², a fixed point for any c
        let m = 50;
        let plant = heat_plant(m);
        let mut spec = AgentSpec::nominal(&plant, GridFunction::zeros(m), DVector::zeros(0));
        spec.g1 = vec![GridFunction::constant(m, 2.0)];
        spec.g2 = DVector::from_element(1, 0.0);
        spec.g3 = DVector::from_element(1, 0.0);
        spec.g4 = DVector::from_element(1, 0.0);
        let x = GridFunction::from_fn(m, |z| 0.3 - z * z);
        let next = pde_step(&plant, &spec, &x, -2.0, &DVector::from_element(1, 1.0), 1e-2).unwrap();
        for (a, b) in next.values().iter().zip(x.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn output_adds_the_feedthrough() {
        let m = 20;
        let plant = heat_plant(m);
        let mut spec = AgentSpec::nominal(&plant, GridFunction::zeros(m), DVector::zeros(0));
        spec.g1 = vec![GridFunction::zeros(m)];
        spec.g2 = DVector::from_element(1, 0.0);
        spec.g3 = DVector::from_element(1, 0.0);
        spec.g4 = DVector::from_element(1, 1.0);
        spec.delta_boundary = (0.5, 0.0);
        let x = GridFunction::from_fn(m, |z| 1.0 + z);
        let y = evaluate_output(&plant, &spec, &x, &DVector::from_element(1, 0.25)).unwrap();
        assert!((y - (0.5 * 1.0 + 2.0 + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn blowup_is_reported() {
        let m = 20;
        let mut plant = heat_plant(m);
        plant.a = GridFunction::constant(m, 40.0);
        let spec = AgentSpec::nominal(&plant, GridFunction::constant(m, 1.0), DVector::zeros(1));
        let topo = CommTopology::from_rows(&[vec![0.0]], &[1.0]).unwrap();
        let exo = crate::signal::merge((DMatrix::zeros(1, 1), DVector::from_element(1, 1.0)), &[]).unwrap();
        let exo = ExoModel {
            disturbance_readouts: vec![DMatrix::zeros(0, 1)],
            ..exo
        };
        let gains = RegulatorGains {
            k_v: DVector::zeros(1),
            k_1: 0.0,
            k_x: GridFunction::zeros(m),
            r_x: GridFunction::zeros(m),
            b_y: DVector::zeros(1),
            s: DMatrix::zeros(1, 1),
            mu_c: 1.0,
        };
        let cl = ClosedLoop {
            plant: &plant,
            agents: std::slice::from_ref(&spec),
            topology: &topo,
            mode: Mode::LeaderFollower,
            exo: &exo,
            w0: &DVector::zeros(1),
            gains: &gains,
        };
        let config = SimConfig {
            intervals: m,
            horizon: 2.0,
            blowup_bound: 1e6,
            ..SimConfig::default()
        };
        match simulate(&cl, &config) {
            Err(Error::NumericalBlowup { time, .. }) => assert!(time > 0.0 && time < 2.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
