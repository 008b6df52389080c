//! `synthesize`, `simulate` and `check`.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use super::files::{gains_to_string, json_string, kernel_csv, read_gains, snapshot_csv, trace_csv, write_text};
use super::Scenario;
use crate::error::{Error, Result};
use crate::graph::{is_connected, laplacian, theta_decompose};
use crate::kernel::{invert_kernel, solve_kernel, transform_output_weight, TriangularKernel};
use crate::linalg::{eigenvalues, C64};
use crate::signal::{check_controllable, spectrum_on_imaginary_axis};
use crate::sim::{error_metrics, simulate, ClosedLoop, ErrorMetrics, SimTrace};
use crate::synthesis::bvp::check_nonresonant;
use crate::synthesis::decoupling::{NUMERATOR_TOL, PBH_TOL};
use crate::synthesis::{
    certify_stability, check_controllable_pair, default_nu, design, feedback_gain, internal_model_rank_check,
    modal_loops_hurwitz, solve_are, solve_decoupling, sync_steady_state, Design, Mode,
};

pub const GAINS_FILE: &str = "gains.txt";
pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const KERNEL_FILE: &str = "kernel.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        ErrorReport {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumeratorSample {
    pub lambda: [f64; 2],
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStateReport {
    /// `C∘T⁻¹[Σ₁]`, one row per agent.
    pub output_map: Vec<Vec<f64>>,
    pub max_row_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignReport {
    pub nu: f64,
    pub mu_c: f64,
    pub alpha_ev: f64,
    pub overall_alpha: f64,
    pub target_pde_top_eigenvalue: f64,
    pub closed_loop_eigenvalues: Vec<[f64; 2]>,
    pub modal_loops_hurwitz: bool,
    pub internal_model_rank: bool,
    pub riccati_residual: f64,
    pub riccati_tolerance: f64,
    pub riccati_iterations: usize,
    pub riccati_min_eigenvalue: f64,
    pub numerator: Vec<NumeratorSample>,
    pub numerator_margin: f64,
    pub pbh_margin: f64,
    pub kernel_diagonal_residual: f64,
    pub q_tilde_at_1: Vec<f64>,
    pub k_v: Vec<f64>,
    pub k_1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_state: Option<SteadyStateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub pass: bool,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignReport>,
}

#[derive(Debug)]
pub struct SynthesisOutcome {
    pub pass: bool,
    pub report: CertificateReport,
    pub design: Option<Design>,
}

fn sorted_pairs(eigs: &[C64]) -> Vec<[f64; 2]> {
    let mut v: Vec<[f64; 2]> = eigs.iter().map(|l| [l.re, l.im]).collect();
    v.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    v
}

/// `sup_z |k(z,z) − (q₀ − ½∫₀^z (a + μ_c))|`, trapezoid quadrature.
pub fn kernel_diagonal_residual(k: &TriangularKernel, a: &[f64], q0: f64, mu_c: f64) -> f64 {
    let h = k.step();
    let mut integral = 0.0;
    let mut worst: f64 = (k.get(0, 0) - q0).abs();
    for i in 1..=k.intervals() {
        integral += 0.5 * h * (a[i - 1] + a[i] + 2.0 * mu_c);
        worst = worst.max((k.get(i, i) - (q0 - 0.5 * integral)).abs());
    }
    worst
}

fn max_row_difference(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 1..m.nrows() {
        worst = worst.max((m.row(i) - m.row(0)).amax());
    }
    worst
}

fn design_report(scenario: &Scenario, d: &Design, a: &[f64]) -> DesignReport {
    let num = &scenario.numerics;
    let graph_eigs = match d.mode {
        Mode::LeaderFollower => eigenvalues(&d.graph.leader_follower),
        Mode::Leaderless => theta_decompose(&d.graph.laplacian)
            .map(|t| eigenvalues(&t.l22))
            .unwrap_or_default(),
    };
    let n_w = d.gains.n_w() as f64;
    DesignReport {
        nu: d.nu,
        mu_c: num.mu_c,
        alpha_ev: d.certificate.alpha_ev,
        overall_alpha: d.certificate.overall_alpha,
        target_pde_top_eigenvalue: d.certificate.target_pde_top_eig,
        closed_loop_eigenvalues: sorted_pairs(&d.certificate.closed_loop_eigs),
        modal_loops_hurwitz: modal_loops_hurwitz(&d.gains.s, &d.decoupling.q_tilde_at_1, &d.gains.k_v, &graph_eigs),
        internal_model_rank: internal_model_rank_check(d.mode, &d.graph),
        riccati_residual: d.riccati.residual,
        riccati_tolerance: 1e-8 * num.riccati_weight * n_w,
        riccati_iterations: d.riccati.iterations,
        riccati_min_eigenvalue: d.riccati.q.clone().symmetric_eigen().eigenvalues.min(),
        numerator: d
            .controllability
            .numerator
            .iter()
            .map(|(l, v)| NumeratorSample {
                lambda: [l.re, l.im],
                magnitude: *v,
            })
            .collect(),
        numerator_margin: d.controllability.numerator_margin,
        pbh_margin: d.controllability.direct_margin,
        kernel_diagonal_residual: kernel_diagonal_residual(&d.kernel, a, scenario.plant.q0, num.mu_c),
        q_tilde_at_1: d.decoupling.q_tilde_at_1.iter().copied().collect(),
        k_v: d.gains.k_v.iter().copied().collect(),
        k_1: d.gains.k_1,
        steady_state: d.steady_state.as_ref().map(|ss| SteadyStateReport {
            output_map: ss
                .y_inf_map
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            max_row_difference: max_row_difference(&ss.y_inf_map),
        }),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs the synthesis pipeline and writes the gains, kernel table and certificate.
///
/// Failures of the pipeline are recorded in the certificate, not returned as errors.
pub fn cmd_synthesize(scenario: &Scenario, out_dir: &Path) -> Result<SynthesisOutcome> {
    let p = scenario.prepare()?;
    create_dir(out_dir)?;
    let result = design(&p.plant, &p.s, &p.b_y, &p.topology, p.mode, &p.design_options);
    let (report, design) = match result {
        Ok(d) => {
            let dr = design_report(scenario, &d, p.plant.a.values());
            let pass = d.certificate.pass()
                && dr.modal_loops_hurwitz
                && dr.internal_model_rank
                && dr.riccati_residual <= dr.riccati_tolerance
                && dr.riccati_min_eigenvalue > 0.0;
            write_text(&out_dir.join(GAINS_FILE), &gains_to_string(&d.gains))?;
            write_text(&out_dir.join(KERNEL_FILE), &kernel_csv(&d.kernel))?;
            (
                CertificateReport {
                    pass,
                    mode: p.mode.as_str(),
                    error: None,
                    design: Some(dr),
                },
                Some(d),
            )
        }
        Err(e) => (
            CertificateReport {
                pass: false,
                mode: p.mode.as_str(),
                error: Some(ErrorReport::from(&e)),
                design: None,
            },
            None,
        ),
    };
    write_text(&out_dir.join(CERTIFICATE_FILE), &json_string(&report)?)?;
    Ok(SynthesisOutcome {
        pass: report.pass,
        report,
        design,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub pass: bool,
    pub mode: &'static str,
    pub grid_points: usize,
    pub dt: f64,
    pub horizon: f64,
    pub samples: usize,
    pub settling_time: Option<f64>,
    pub settling_band: f64,
    pub tail_error: f64,
    pub decay_rate: Option<f64>,
    pub peak_error: f64,
}

#[derive(Debug)]
pub struct SimulationOutcome {
    /// Tail error within the settling band.
    pub pass: bool,
    pub metrics: ErrorMetrics,
    pub trace: SimTrace,
    pub files: Vec<PathBuf>,
}

/// Simulates with gains read from `gains` or, when absent, synthesized first.
pub fn cmd_simulate(scenario: &Scenario, gains: Option<&Path>, out_dir: &Path) -> Result<SimulationOutcome> {
    let p = scenario.prepare()?;
    create_dir(out_dir)?;
    let gains = match gains {
        Some(path) => read_gains(path)?,
        None => {
            let outcome = cmd_synthesize(scenario, out_dir)?;
            match outcome.design {
                Some(d) => d.gains,
                None => {
                    let e = outcome.report.error.map(|e| e.message).unwrap_or_default();
                    return Err(Error::InvalidArgument(format!("synthesis failed: {e}")));
                }
            }
        }
    };
    if gains.n_w() != p.s.nrows() {
        return Err(Error::InvalidArgument(format!(
            "gains carry an internal model of dimension {}, the scenario needs {}",
            gains.n_w(),
            p.s.nrows()
        )));
    }
    let cl = ClosedLoop {
        plant: &p.plant,
        agents: &p.agents,
        topology: &p.topology,
        mode: p.mode,
        exo: &p.exo,
        w0: &p.w0,
        gains: &gains,
    };
    let trace = simulate(&cl, &p.sim_config)?;
    let metrics = error_metrics(&trace);
    let pass = metrics.tail_error <= metrics.settling_band;
    let report = MetricsReport {
        pass,
        mode: p.mode.as_str(),
        grid_points: p.sim_config.intervals,
        dt: p.sim_config.dt,
        horizon: p.sim_config.horizon,
        samples: trace.times.len(),
        settling_time: metrics.settling_time,
        settling_band: metrics.settling_band,
        tail_error: metrics.tail_error,
        decay_rate: metrics.decay_rate,
        peak_error: metrics.peak_error,
    };
    let mut files = vec![out_dir.join(TRACE_FILE), out_dir.join(METRICS_FILE)];
    write_text(&files[0], &trace_csv(&trace))?;
    write_text(&files[1], &json_string(&report)?)?;
    for (k, snap) in trace.snapshots.iter().enumerate() {
        let path = out_dir.join(format!("snapshot_{k:03}.csv"));
        write_text(&path, &snapshot_csv(snap))?;
        files.push(path);
    }
    Ok(SimulationOutcome {
        pass,
        metrics,
        trace,
        files,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub hypothesis: &'static str,
    pub condition: &'static str,
    pub pass: bool,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn row(&self, hypothesis: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.hypothesis == hypothesis)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let headers = ["hypothesis", "condition", "result", "evidence"];
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.hypothesis.to_string(),
                    r.condition.to_string(),
                    if r.pass { "pass" } else { "FAIL" }.to_string(),
                    r.evidence.clone(),
                ]
            })
            .collect();
        let width = |c: usize| {
            cells
                .iter()
                .map(|row| row[c].chars().count())
                .chain([headers[c].len()])
                .max()
                .unwrap_or(0)
        };
        let widths = [width(0), width(1), width(2)];
        let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));
        writeln!(
            f,
            "{}  {}  {}  {}",
            pad(headers[0], widths[0]),
            pad(headers[1], widths[1]),
            pad(headers[2], widths[2]),
            headers[3]
        )?;
        for row in &cells {
            writeln!(
                f,
                "{}  {}  {}  {}",
                pad(&row[0], widths[0]),
                pad(&row[1], widths[1]),
                pad(&row[2], widths[2]),
                row[3]
            )?;
        }
        write!(f, "overall: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

fn skipped(hypothesis: &'static str, condition: &'static str, why: &str) -> CheckRow {
    CheckRow {
        hypothesis,
        condition,
        pass: false,
        evidence: format!("not evaluated: {why}"),
    }
}

/// Evaluates every checkable hypothesis of the design; never fails on a violated hypothesis.
pub fn cmd_check(scenario: &Scenario) -> Result<CheckReport> {
    let p = scenario.prepare()?;
    let mu_c = p.design_options.mu_c;
    let mut rows = Vec::new();
    let topology = match p.mode {
        Mode::LeaderFollower => p.topology.clone(),
        Mode::Leaderless => p.topology.without_leader(),
    };
    let graph = laplacian(&topology);

    const GRAPH: &str = "graph connectivity";
    let (graph_cond, reach) = match p.mode {
        Mode::LeaderFollower => ("every agent reachable from the leader", is_connected(&topology, true)),
        Mode::Leaderless => ("some agent reaches every other agent", is_connected(&topology, false)),
    };
    let bound = default_nu(p.mode, &graph);
    rows.push(CheckRow {
        hypothesis: GRAPH,
        condition: graph_cond,
        pass: reach && matches!(bound, Ok(b) if b > 0.0),
        evidence: match &bound {
            Ok(b) => format!("reachable = {reach}, spectral lower bound = {b:.6}"),
            Err(e) => format!("reachable = {reach}, {e}"),
        },
    });
    rows.push(CheckRow {
        hypothesis: "internal-model rank",
        condition: match p.mode {
            Mode::LeaderFollower => "det H ≠ 0",
            Mode::Leaderless => "rank H̃ = N − 1",
        },
        pass: internal_model_rank_check(p.mode, &graph),
        evidence: format!("N = {}", topology.n_agents()),
    });

    let s_eigs = eigenvalues(&p.s);
    rows.push(CheckRow {
        hypothesis: "marginally stable signal model",
        condition: "σ(S) on the imaginary axis",
        pass: spectrum_on_imaginary_axis(&p.s, 1e-9),
        evidence: format!("max |Re λ| = {:.3e}", s_eigs.iter().map(|l| l.re.abs()).fold(0.0, f64::max)),
    });
    let by_ok = check_controllable(&p.s, &p.b_y);
    rows.push(CheckRow {
        hypothesis: "internal-model input",
        condition: "(S, b_y) controllable",
        pass: by_ok,
        evidence: format!("|b_y| = {:.6}", p.b_y.norm()),
    });
    rows.push(CheckRow {
        hypothesis: "target decay",
        condition: "−μ_c < 0",
        pass: mu_c > 0.0,
        evidence: format!("μ_c = {mu_c}"),
    });
    let shifted = &p.s + DMatrix::identity(p.s.nrows(), p.s.nrows()) * mu_c;
    let resonance = check_nonresonant(&shifted);
    rows.push(CheckRow {
        hypothesis: "non-resonance",
        condition: "σ_c ∩ σ(S) = ∅",
        pass: resonance.is_ok(),
        evidence: match &resonance {
            Ok(()) => format!("μ_c = {mu_c}"),
            Err(e) => e.to_string(),
        },
    });
    let min_diffusion = p
        .agents
        .iter()
        .flat_map(|a| a.delta_lambda.values().iter().map(|d| 1.0 + d))
        .fold(f64::INFINITY, f64::min);
    rows.push(CheckRow {
        hypothesis: "perturbed diffusion",
        condition: "1 + Δλ_i(z) > 0",
        pass: min_diffusion > 0.0,
        evidence: format!("min = {min_diffusion:.6}"),
    });

    const KERNEL: &str = "kernel";
    const NONBLOCKING: &str = "nonblocking";
    const PAIR: &str = "decoupled input";
    const RICCATI: &str = "Riccati solution";
    const CLOSED: &str = "closed-loop signal dynamics";
    const STEADY: &str = "synchronized steady state";
    let kernel_cond = "successive approximation converges";
    let nb_cond = "det N(λ) ≠ 0 for λ ∈ σ(S)";
    let pair_cond = "(S, q̃(1)) controllable";
    let ric_cond = "Q ≻ 0, residual ≤ 1e-8·a·n_w";
    let closed_cond = match p.mode {
        Mode::LeaderFollower => "F_ev Hurwitz",
        Mode::Leaderless => "F_εv Hurwitz",
    };
    let steady_cond = "σ(F_εv) ∩ σ(S) = ∅";

    let pipeline = (|| -> std::result::Result<(), (usize, String)> {
        let fail = |stage: usize| move |e: Error| (stage, e.to_string());
        let opts = &p.design_options;
        let kernel = solve_kernel(&p.plant.a, p.plant.q0, mu_c, opts.kernel_tol, opts.kernel_max_iter).map_err(fail(0))?;
        let kernel_inv = invert_kernel(&kernel).map_err(fail(0))?;
        rows.push(CheckRow {
            hypothesis: KERNEL,
            condition: kernel_cond,
            pass: true,
            evidence: format!(
                "sup |k| = {:.6}, diagonal residual = {:.3e}",
                kernel.sup_norm(),
                kernel_diagonal_residual(&kernel, p.plant.a.values(), p.plant.q0, mu_c)
            ),
        });
        let c_tilde = transform_output_weight(&p.plant.output, &kernel_inv).map_err(fail(1))?;
        let dec = solve_decoupling(&p.s, &p.b_y, &c_tilde, mu_c, &kernel).map_err(fail(1))?;
        let report = check_controllable_pair(&p.s, &p.b_y, &dec.q_tilde_at_1, &c_tilde, mu_c).map_err(fail(1))?;
        rows.push(CheckRow {
            hypothesis: NONBLOCKING,
            condition: nb_cond,
            pass: report.numerator_margin > NUMERATOR_TOL,
            evidence: format!("min |n(λ)| = {:.6e} (tolerance {NUMERATOR_TOL:e})", report.numerator_margin),
        });
        rows.push(CheckRow {
            hypothesis: PAIR,
            condition: pair_cond,
            pass: report.controllable,
            evidence: format!("PBH margin = {:.6e} (tolerance {PBH_TOL:e})", report.direct_margin),
        });
        if !report.controllable {
            return Err((3, "the decoupled input pair is not controllable".into()));
        }
        let nu = match opts.nu {
            Some(nu) => nu,
            None => default_nu(p.mode, &graph).map_err(fail(3))?,
        };
        let ric = solve_are(&p.s, &dec.q_tilde_at_1, nu, opts.riccati_weight).map_err(fail(3))?;
        let min_eig = ric.q.clone().symmetric_eigen().eigenvalues.min();
        let tol = 1e-8 * opts.riccati_weight * p.s.nrows() as f64;
        rows.push(CheckRow {
            hypothesis: RICCATI,
            condition: ric_cond,
            pass: min_eig > 0.0 && ric.residual <= tol,
            evidence: format!("ν = {nu:.6}, residual = {:.3e}, min eig(Q) = {min_eig:.6e}", ric.residual),
        });
        let k_v = feedback_gain(&ric.q, &dec.q_tilde_at_1);
        let cert = certify_stability(p.mode, &p.s, &dec.q_tilde_at_1, &k_v, &graph, mu_c).map_err(fail(4))?;
        rows.push(CheckRow {
            hypothesis: CLOSED,
            condition: closed_cond,
            pass: cert.alpha_ev > 0.0,
            evidence: format!("decay margin = {:.6}", cert.alpha_ev),
        });
        if p.mode == Mode::Leaderless {
            let steady = theta_decompose(&graph.laplacian)
                .and_then(|t| sync_steady_state(&p.s, &k_v, &dec.q_tilde_at_1, &t, mu_c, &c_tilde));
            rows.push(CheckRow {
                hypothesis: STEADY,
                condition: steady_cond,
                pass: steady.is_ok(),
                evidence: match steady {
                    Ok(ss) => format!("max output-map row difference = {:.3e}", max_row_difference(&ss.y_inf_map)),
                    Err(e) => e.to_string(),
                },
            });
        }
        Ok(())
    })();

    if let Err((stage, why)) = pipeline {
        let mut later: Vec<(&'static str, &'static str)> = vec![
            (KERNEL, kernel_cond),
            (NONBLOCKING, nb_cond),
            (PAIR, pair_cond),
            (RICCATI, ric_cond),
            (CLOSED, closed_cond),
        ];
        if p.mode == Mode::Leaderless {
            later.push((STEADY, steady_cond));
        }
        let failed_here = match stage {
            0 => Some(KERNEL),
            1 => Some(NONBLOCKING),
            _ => None,
        };
        for (h, c) in later {
            if rows.iter().any(|r| r.hypothesis == h) {
                continue;
            }
            if Some(h) == failed_here {
                rows.push(CheckRow {
                    hypothesis: h,
                    condition: c,
                    pass: false,
                    evidence: why.clone(),
                });
                if h == NONBLOCKING {
                    rows.push(skipped(PAIR, pair_cond, "the decoupling problem has no solution"));
                }
            } else {
                rows.push(skipped(h, c, &why));
            }
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(CheckReport { pass, rows })
}
