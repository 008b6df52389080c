//! Scenario files: a TOML description of plant, network, signals, agents and numerics.
//!
//! Spatial profiles are either expressions in `z` or arrays of samples on a
//! uniform grid over `[0, 1]`.

pub mod commands;
pub mod expr;
pub mod files;

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use commands::{cmd_check, cmd_simulate, cmd_synthesize, CheckReport, CheckRow, SimulationOutcome, SynthesisOutcome};
pub use expr::{Expr, ExprError};

use crate::error::{Error, Result};
use crate::graph::CommTopology;
use crate::grid::GridFunction;
use crate::kernel::{OutputOperator, DEFAULT_MAX_ITER, DEFAULT_TOL, MIN_INTERVALS};
use crate::signal::{build_reference_block, merge, stack, DisturbanceBlock, ExoModel};
use crate::sim::{AgentSpec, SimConfig};
use crate::synthesis::{DesignOptions, Mode, NominalPlant};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawProfile {
    Num(f64),
    Expr(String),
    Samples(Vec<f64>),
}

/// A function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub enum Profile {
    Expr { source: String, parsed: Expr },
    Samples(Vec<f64>),
}

impl TryFrom<RawProfile> for Profile {
    type Error = String;

    fn try_from(raw: RawProfile) -> std::result::Result<Self, String> {
        match raw {
            RawProfile::Expr(source) => Profile::expr(&source).map_err(|e| format!("invalid expression `{source}`: {e}")),
            RawProfile::Samples(s) => Ok(Profile::Samples(s)),
            RawProfile::Num(v) => Profile::expr(&format!("{v:?}")).map_err(|e| e.to_string()),
        }
    }
}

impl From<Profile> for RawProfile {
    fn from(p: Profile) -> Self {
        match p {
            Profile::Expr { source, .. } => RawProfile::Expr(source),
            Profile::Samples(s) => RawProfile::Samples(s),
        }
    }
}

impl Profile {
    pub fn expr(source: &str) -> std::result::Result<Self, ExprError> {
        Ok(Profile::Expr {
            source: source.to_string(),
            parsed: Expr::parse(source)?,
        })
    }

    pub fn zero() -> Self {
        Profile::expr("0").expect("constant expression")
    }

    /// Values on `intervals + 1` nodes; samples are linearly interpolated.
    pub fn sample(&self, intervals: usize) -> Result<GridFunction> {
        match self {
            Profile::Expr { parsed, .. } => GridFunction::new(
                (0..=intervals)
                    .map(|i| parsed.eval(i as f64 / intervals as f64))
                    .collect(),
            ),
            Profile::Samples(s) => {
                if s.len() < 2 {
                    return Err(Error::InvalidArgument(format!("{} samples; need at least 2", s.len())));
                }
                Ok(GridFunction::new(s.clone())?.resample(intervals))
            }
        }
    }

    fn check(&self, field: &str, violations: &mut Vec<String>) {
        if let Profile::Samples(s) = self {
            if s.len() < 2 {
                violations.push(format!("{field}: {} samples; need at least 2", s.len()));
                return;
            }
        }
        match self.sample(256) {
            Ok(g) if g.values().iter().all(|v| v.is_finite()) => {}
            _ => violations.push(format!("{field}: profile is not finite on [0, 1]")),
        }
    }
}

impl Default for Profile {
    fn default() -> Self {
        Profile::zero()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Num(f64),
    Expr(String),
}

/// A number, optionally written as a constant expression such as `"2*pi"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScalar", into = "RawScalar")]
pub struct Scalar {
    pub value: f64,
    pub source: Option<String>,
}

impl TryFrom<RawScalar> for Scalar {
    type Error = String;

    fn try_from(raw: RawScalar) -> std::result::Result<Self, String> {
        match raw {
            RawScalar::Num(value) => Ok(Scalar { value, source: None }),
            RawScalar::Expr(source) => {
                let e = Expr::parse(&source).map_err(|e| format!("invalid expression `{source}`: {e}"))?;
                let (a, b) = (e.eval(0.0), e.eval(1.0));
                if a != b {
                    return Err(format!("`{source}` depends on z; a constant is required"));
                }
                Ok(Scalar {
                    value: a,
                    source: Some(source),
                })
            }
        }
    }
}

impl From<Scalar> for RawScalar {
    fn from(s: Scalar) -> Self {
        match s.source {
            Some(src) => RawScalar::Expr(src),
            None => RawScalar::Num(s.value),
        }
    }
}

impl From<f64> for Scalar {
    fn from(value: f64) -> Self {
        Scalar { value, source: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointWeight {
    pub weight: f64,
    pub location: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub c0: Profile,
    #[serde(default)]
    pub points: Vec<PointWeight>,
    /// `(c_b0, c_b1)`.
    #[serde(default)]
    pub boundary: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    pub a: Profile,
    pub q0: f64,
    pub q1: f64,
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    /// Row `i` lists the weights `a_ij` of the agents that agent `i` hears.
    pub adjacency: Vec<Vec<f64>>,
    /// Weights `a_i0` of the leader links; may be omitted without a leader.
    #[serde(default)]
    pub leader_links: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    /// Reference frequencies; `0` adds a constant.
    pub frequencies: Vec<Scalar>,
    pub reference_initial: Vec<f64>,
    /// Defaults to the first coordinate of every frequency block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_readout: Option<Vec<f64>>,
    /// Internal-model input vector over the merged signal state.
    pub b_y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Uncertainty {
    pub delta_lambda: Profile,
    pub delta_a: Profile,
    pub delta_q0: f64,
    pub delta_q1: f64,
    pub delta_c0: Profile,
    /// Empty, or one entry per point weight.
    pub delta_points: Vec<f64>,
    pub delta_boundary: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub generator: Vec<Vec<f64>>,
    pub readout: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub g1: Vec<Profile>,
    pub g2: Vec<f64>,
    pub g3: Vec<f64>,
    pub g4: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub x0: Profile,
    pub v0: Vec<f64>,
    #[serde(default)]
    pub uncertainty: Uncertainty,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Number of grid intervals `M`; the grid has `M + 1` nodes.
    pub grid_points: usize,
    pub dt: f64,
    pub horizon: f64,
    pub mu_c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    pub riccati_weight: f64,
    pub kernel_tol: f64,
    pub kernel_max_iter: usize,
    pub blowup_bound: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let sim = SimConfig::default();
        let design = DesignOptions::default();
        Numerics {
            grid_points: sim.intervals,
            dt: sim.dt,
            horizon: sim.horizon,
            mu_c: design.mu_c,
            nu: None,
            riccati_weight: design.riccati_weight,
            kernel_tol: DEFAULT_TOL,
            kernel_max_iter: DEFAULT_MAX_ITER,
            blowup_bound: sim.blowup_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    pub sample_interval: f64,
    pub snapshot_times: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions {
            sample_interval: SimConfig::default().sample_interval,
            snapshot_times: vec![],
            directory: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    pub plant: PlantSpec,
    pub topology: TopologySpec,
    pub signal: SignalSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputOptions,
    pub agents: Vec<AgentEntry>,
}

/// Command-line overrides of the numerics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub grid_points: Option<usize>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
}

/// The scenario turned into library inputs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub mode: Mode,
    pub plant: NominalPlant,
    pub topology: CommTopology,
    /// Internal-model generator: reference and distinct disturbance generators.
    pub s: DMatrix<f64>,
    pub b_y: DVector<f64>,
    /// Truth signal model with one disturbance state per agent.
    pub exo: ExoModel,
    pub w0: DVector<f64>,
    pub agents: Vec<AgentSpec>,
    pub design_options: DesignOptions,
    pub sim_config: SimConfig,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn matrix(rows: &[Vec<f64>], field: &str, violations: &mut Vec<String>) -> Option<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some(k) = rows.iter().position(|r| r.len() != ncols) {
        violations.push(format!("{field}: row {} has {} entries, row 1 has {ncols}", k + 1, rows[k].len()));
        return None;
    }
    Some(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl Scenario {
    /// Parses and validates scenario text.
    pub fn parse(text: &str) -> Result<Scenario> {
        if text.trim().is_empty() {
            return Err(Error::Parse {
                line: None,
                field: None,
                message: "scenario is empty".into(),
            });
        }
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)),
            field: None,
            message: e.message().to_string(),
        })?;
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse {
                line: inner.span().map(|s| line_of(text, s.start)),
                field: (field != ".").then_some(field),
                message: inner.message().to_string(),
            }
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidArgument(format!("cannot serialize scenario: {e}")))
    }

    pub fn n_agents(&self) -> usize {
        self.topology.adjacency.len()
    }

    /// Applies command-line overrides. A shorter horizon drops the snapshot
    /// times that fall after it.
    pub fn with_overrides(mut self, o: Overrides) -> Result<Scenario> {
        if let Some(m) = o.grid_points {
            self.numerics.grid_points = m;
        }
        if let Some(dt) = o.dt {
            self.numerics.dt = dt;
        }
        if let Some(t) = o.horizon {
            self.numerics.horizon = t;
            self.output.snapshot_times.retain(|&s| s <= t);
        }
        self.validate()?;
        Ok(self)
    }

    /// Collects every schema violation.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        let n = self.n_agents();
        if n == 0 {
            v.push("topology.adjacency: at least one agent is required".into());
        }
        if self.agents.len() != n {
            v.push(format!(
                "topology.adjacency has {n} rows but agents has {} entries",
                self.agents.len()
            ));
        }
        for (i, row) in self.topology.adjacency.iter().enumerate() {
            if row.len() != n {
                v.push(format!("topology.adjacency: row {} has {} entries, expected {n}", i + 1, row.len()));
            }
        }
        match self.mode {
            Mode::LeaderFollower if self.topology.leader_links.len() != n => v.push(format!(
                "topology.leader_links has {} entries, expected {n} in leader-follower mode",
                self.topology.leader_links.len()
            )),
            Mode::Leaderless if !self.topology.leader_links.is_empty() && self.topology.leader_links.len() != n => {
                v.push(format!(
                    "topology.leader_links has {} entries, expected 0 or {n}",
                    self.topology.leader_links.len()
                ))
            }
            Mode::Leaderless if n < 2 => v.push("leaderless mode needs at least two agents".into()),
            _ => {}
        }
        if v.is_empty() {
            if let Err(e) = self.topology() {
                v.push(format!("topology: {e}"));
            }
        }

        self.plant.a.check("plant.a", &mut v);
        self.plant.output.c0.check("plant.output.c0", &mut v);
        for (k, p) in self.plant.output.points.iter().enumerate() {
            if !(p.location > 0.0 && p.location < 1.0) {
                v.push(format!(
                    "plant.output.points[{k}].location = {} must lie strictly inside (0, 1)",
                    p.location
                ));
            }
        }
        for (name, x) in [("plant.q0", self.plant.q0), ("plant.q1", self.plant.q1)] {
            if !x.is_finite() {
                v.push(format!("{name} must be finite"));
            }
        }

        let reference = build_reference_block(&self.signal.frequencies.iter().map(|f| f.value).collect::<Vec<_>>());
        let n_r = match &reference {
            Ok((s, _)) => s.nrows(),
            Err(e) => {
                v.push(format!("signal.frequencies: {e}"));
                0
            }
        };
        if reference.is_ok() {
            if self.signal.reference_initial.len() != n_r {
                v.push(format!(
                    "signal.reference_initial has {} entries, the reference generator has dimension {n_r}",
                    self.signal.reference_initial.len()
                ));
            }
            if let Some(p) = &self.signal.reference_readout {
                if p.len() != n_r {
                    v.push(format!(
                        "signal.reference_readout has {} entries, the reference generator has dimension {n_r}",
                        p.len()
                    ));
                }
            }
        }

        let mut blocks_ok = true;
        for (i, agent) in self.agents.iter().enumerate() {
            let f = |name: &str| format!("agents[{i}].{name}");
            agent.x0.check(&f("x0"), &mut v);
            let u = &agent.uncertainty;
            u.delta_lambda.check(&f("uncertainty.delta_lambda"), &mut v);
            u.delta_a.check(&f("uncertainty.delta_a"), &mut v);
            u.delta_c0.check(&f("uncertainty.delta_c0"), &mut v);
            if let Ok(l) = u.delta_lambda.sample(256) {
                if l.values().iter().any(|d| !(1.0 + d > 0.0)) {
                    v.push(format!("{}: diffusion 1 + Δλ must stay positive", f("uncertainty.delta_lambda")));
                }
            }
            if !u.delta_points.is_empty() && u.delta_points.len() != self.plant.output.points.len() {
                v.push(format!(
                    "{} has {} entries, plant.output.points has {}",
                    f("uncertainty.delta_points"),
                    u.delta_points.len(),
                    self.plant.output.points.len()
                ));
            }
            if let Some(d) = &agent.disturbance {
                let before = v.len();
                let g = matrix(&d.generator, &f("disturbance.generator"), &mut v);
                let p = matrix(&d.readout, &f("disturbance.readout"), &mut v);
                if let (Some(g), Some(p)) = (g, p) {
                    let nd = g.nrows();
                    if g.ncols() != nd {
                        v.push(format!("{} must be square", f("disturbance.generator")));
                    }
                    if p.nrows() > 0 && p.ncols() != nd {
                        v.push(format!(
                            "{} has {} columns, the generator has dimension {nd}",
                            f("disturbance.readout"),
                            p.ncols()
                        ));
                    }
                    if d.initial.len() != nd {
                        v.push(format!(
                            "{} has {} entries, the generator has dimension {nd}",
                            f("disturbance.initial"),
                            d.initial.len()
                        ));
                    }
                    let md = p.nrows();
                    if d.g1.len() != md {
                        v.push(format!("{} has {} profiles, readout has {md} rows", f("disturbance.g1"), d.g1.len()));
                    }
                    for (name, g) in [("disturbance.g2", &d.g2), ("disturbance.g3", &d.g3), ("disturbance.g4", &d.g4)] {
                        if g.len() != md {
                            v.push(format!("{} has {} entries, readout has {md} rows", f(name), g.len()));
                        }
                    }
                }
                for (k, g) in d.g1.iter().enumerate() {
                    g.check(&f(&format!("disturbance.g1[{k}]")), &mut v);
                }
                if v.len() > before {
                    blocks_ok = false;
                }
            }
        }

        if reference.is_ok() && blocks_ok {
            let dim = self.design_signal().map(|(s, _)| s.nrows()).unwrap_or(0);
            if self.signal.b_y.len() != dim {
                v.push(format!(
                    "signal.b_y has {} entries, the merged signal model has dimension {dim}",
                    self.signal.b_y.len()
                ));
            }
            for (i, agent) in self.agents.iter().enumerate() {
                if agent.v0.len() != dim {
                    v.push(format!(
                        "agents[{i}].v0 has {} entries, the merged signal model has dimension {dim}",
                        agent.v0.len()
                    ));
                }
            }
        }

        let num = &self.numerics;
        if num.grid_points < MIN_INTERVALS {
            v.push(format!("numerics.grid_points = {} is below the minimum {MIN_INTERVALS}", num.grid_points));
        }
        for (name, x) in [
            ("numerics.dt", num.dt),
            ("numerics.horizon", num.horizon),
            ("numerics.riccati_weight", num.riccati_weight),
            ("numerics.kernel_tol", num.kernel_tol),
            ("numerics.blowup_bound", num.blowup_bound),
            ("output.sample_interval", self.output.sample_interval),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("{name} = {x} must be positive"));
            }
        }
        if num.dt > num.horizon {
            v.push(format!("numerics.dt = {} exceeds numerics.horizon = {}", num.dt, num.horizon));
        }
        if !num.mu_c.is_finite() {
            v.push("numerics.mu_c must be finite".into());
        }
        if let Some(nu) = num.nu {
            if !(nu > 0.0 && nu.is_finite()) {
                v.push(format!("numerics.nu = {nu} must be positive"));
            }
        }
        if num.kernel_max_iter == 0 {
            v.push("numerics.kernel_max_iter must be at least 1".into());
        }
        for t in &self.output.snapshot_times {
            if !(*t >= 0.0 && *t <= num.horizon) {
                v.push(format!("output.snapshot_times: {t} lies outside [0, {}]", num.horizon));
            }
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Schema(v))
        }
    }

    fn topology(&self) -> Result<CommTopology> {
        let n = self.n_agents();
        let links = if self.topology.leader_links.is_empty() {
            vec![0.0; n]
        } else {
            self.topology.leader_links.clone()
        };
        CommTopology::from_rows(&self.topology.adjacency, &links)
    }

    fn reference_block(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let (s, p) = build_reference_block(&self.signal.frequencies.iter().map(|f| f.value).collect::<Vec<_>>())?;
        let p = match &self.signal.reference_readout {
            Some(custom) => DVector::from_row_slice(custom),
            None => p,
        };
        Ok((s, p))
    }

    fn disturbance_blocks(&self) -> Vec<DisturbanceBlock> {
        self.agents
            .iter()
            .map(|a| match &a.disturbance {
                Some(d) => {
                    let nd = d.generator.len();
                    DisturbanceBlock {
                        generator: DMatrix::from_fn(nd, nd, |i, j| d.generator[i][j]),
                        readout: DMatrix::from_fn(d.readout.len(), nd, |i, j| d.readout[i][j]),
                    }
                }
                None => DisturbanceBlock {
                    generator: DMatrix::zeros(0, 0),
                    readout: DMatrix::zeros(0, 0),
                },
            })
            .collect()
    }

    /// The internal-model generator `S` (reference plus distinct disturbance generators).
    pub fn design_signal(&self) -> Result<(DMatrix<f64>, ExoModel)> {
        let merged = merge(self.reference_block()?, &self.disturbance_blocks())?;
        Ok((merged.s.clone(), merged))
    }

    pub fn prepare(&self) -> Result<Prepared> {
        let m = self.numerics.grid_points;
        let output = OutputOperator::new(
            self.plant.output.c0.sample(m)?,
            self.plant.output.points.iter().map(|p| (p.weight, p.location)).collect(),
            (self.plant.output.boundary[0], self.plant.output.boundary[1]),
        )?;
        let plant = NominalPlant {
            a: self.plant.a.sample(m)?,
            q0: self.plant.q0,
            q1: self.plant.q1,
            output,
        };
        let (s, _) = self.design_signal()?;
        let exo = stack(self.reference_block()?, &self.disturbance_blocks())?;
        let mut w0 = self.signal.reference_initial.clone();
        for a in &self.agents {
            if let Some(d) = &a.disturbance {
                w0.extend_from_slice(&d.initial);
            }
        }
        let agents = self
            .agents
            .iter()
            .map(|a| {
                let u = &a.uncertainty;
                let mut spec = AgentSpec::nominal(&plant, a.x0.sample(m)?, DVector::from_row_slice(&a.v0));
                spec.delta_lambda = u.delta_lambda.sample(m)?;
                spec.delta_a = u.delta_a.sample(m)?;
                spec.delta_q0 = u.delta_q0;
                spec.delta_q1 = u.delta_q1;
                spec.delta_c0 = u.delta_c0.sample(m)?;
                if !u.delta_points.is_empty() {
                    spec.delta_points = u.delta_points.clone();
                }
                spec.delta_boundary = (u.delta_boundary[0], u.delta_boundary[1]);
                if let Some(d) = &a.disturbance {
                    spec.g1 = d.g1.iter().map(|g| g.sample(m)).collect::<Result<_>>()?;
                    spec.g2 = DVector::from_row_slice(&d.g2);
                    spec.g3 = DVector::from_row_slice(&d.g3);
                    spec.g4 = DVector::from_row_slice(&d.g4);
                }
                Ok(spec)
            })
            .collect::<Result<Vec<_>>>()?;
        let num = &self.numerics;
        Ok(Prepared {
            mode: self.mode,
            plant,
            topology: self.topology()?,
            s,
            b_y: DVector::from_row_slice(&self.signal.b_y),
            exo,
            w0: DVector::from_vec(w0),
            agents,
            design_options: DesignOptions {
                mu_c: num.mu_c,
                nu: num.nu,
                riccati_weight: num.riccati_weight,
                kernel_tol: num.kernel_tol,
                kernel_max_iter: num.kernel_max_iter,
            },
            sim_config: SimConfig {
                intervals: m,
                dt: num.dt,
                horizon: num.horizon,
                sample_interval: self.output.sample_interval,
                snapshot_times: self.output.snapshot_times.clone(),
                blowup_bound: num.blowup_bound,
            },
        })
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::parse(&text)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario.to_toml()?).map_err(|e| Error::io(path, e))
}
