use std::path::PathBuf;

use coopreg::scenario::files::{gains_to_string, parse_gains};
use coopreg::scenario::{cmd_check, cmd_simulate, cmd_synthesize, load_scenario, Profile, Scenario};
use coopreg::synthesis::{Mode, RegulatorGains};
use coopreg::{Error, GridFunction};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn leader() -> Scenario {
    load_scenario(shipped("four_agent_leader.toml")).unwrap()
}

#[test]
fn shipped_leader_scenario_carries_the_example_parameters() {
    let s = leader();
    assert_eq!(s.mode, Mode::LeaderFollower);
    assert_eq!(s.n_agents(), 4);
    let p = s.prepare().unwrap();
    let m = p.plant.a.intervals();
    for (i, v) in p.plant.a.values().iter().enumerate() {
        assert!((v - (i as f64 / m as f64 + 1.0)).abs() < 1e-15);
    }
    assert_eq!((p.plant.q0, p.plant.q1), (3.0, 0.0));
    assert_eq!(p.plant.output.boundary, (1.0, 1.0));
    assert!((p.plant.output.smooth.at_right() + 1.0).abs() < 1e-15);
    let d: Vec<f64> = (0..4)
        .map(|i| p.exo.disturbance(i, &coopreg::signal::ExoState { w: p.w0.clone() })[0])
        .collect();
    assert_eq!(d, vec![3.0, -3.0, 1.0, 1.0]);
    assert_eq!(p.exo.reference(&coopreg::signal::ExoState { w: p.w0.clone() }), 2.0);
    assert_eq!(p.s.nrows(), 3);
    let dl: Vec<f64> = p.agents.iter().map(|a| a.delta_lambda.at_left()).collect();
    assert_eq!(dl, vec![0.2, -0.2, -0.1, 0.1]);
    assert!((p.agents[0].delta_a.at_right() - 0.4).abs() < 1e-15);
    assert_eq!(p.agents[3].delta_boundary, (-0.05, 0.1));
    assert_eq!(p.agents[1].v0, DVector::from_row_slice(&[0.1, 2.0, 0.8]));
    assert_eq!(p.agents[3].x0, GridFunction::constant(m, 3.0));
}

#[test]
fn empty_file_is_a_parse_error() {
    assert!(matches!(Scenario::parse(""), Err(Error::Parse { .. })));
    assert!(matches!(Scenario::parse("  \n"), Err(Error::Parse { .. })));
}

#[test]
fn agent_count_mismatch_names_both_fields() {
    let mut s = leader();
    s.agents.pop();
    let text = s.to_toml().unwrap();
    match Scenario::parse(&text) {
        Err(Error::Schema(v)) => {
            assert!(v.iter().any(|m| m.contains("topology.adjacency") && m.contains("agents")), "{v:?}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn every_violation_is_listed() {
    let mut s = leader();
    s.signal.b_y.pop();
    s.numerics.dt = -1.0;
    s.agents[2].v0.push(0.0);
    match s.validate() {
        Err(Error::Schema(v)) => {
            assert!(v.iter().any(|m| m.starts_with("signal.b_y")));
            assert!(v.iter().any(|m| m.starts_with("numerics.dt")));
            assert!(v.iter().any(|m| m.starts_with("agents[2].v0")));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn bad_expression_reports_line_and_field() {
    let text = std::fs::read_to_string(shipped("four_agent_leader.toml")).unwrap();
    let broken = text.replace("a = \"z + 1\"", "a = \"z + tan(z)\"");
    let line = broken.lines().position(|l| l.contains("tan(z)")).unwrap() + 1;
    match Scenario::parse(&broken) {
        Err(Error::Parse {
            line: Some(l),
            field: Some(f),
            message,
        }) => {
            assert_eq!(l, line);
            assert_eq!(f, "plant.a");
            assert!(message.contains("tan"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let text = std::fs::read_to_string(shipped("four_agent_leader.toml")).unwrap();
    let broken = text.replace("q1 = 0.0", "q1 = 0.0\nq2 = 1.0");
    assert!(matches!(Scenario::parse(&broken), Err(Error::Parse { field: Some(_), .. })));
}

#[test]
fn shipped_scenarios_round_trip() {
    for name in ["four_agent_leader.toml", "four_agent_leaderless.toml"] {
        let s = load_scenario(shipped(name)).unwrap();
        assert_eq!(Scenario::parse(&s.to_toml().unwrap()).unwrap(), s, "{name}");
    }
}

fn finite() -> impl Strategy<Value = f64> {
    -1e3f64..1e3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn randomized_scenarios_round_trip(
        weights in proptest::collection::vec(0.0f64..2.0, 4),
        q in (finite(), finite()),
        samples in proptest::collection::vec(finite(), 2..9),
        freq in 0.1f64..10.0,
        x0 in finite(),
        mu in 0.5f64..20.0,
        nu in proptest::option::of(0.01f64..5.0),
        snapshots in proptest::collection::vec(0.0f64..20.0, 0..4),
    ) {
        let mut s = leader();
        s.topology.adjacency[1][0] = weights[0];
        s.topology.adjacency[2][0] = weights[1] + 0.1;
        s.topology.adjacency[3][2] = weights[2];
        s.topology.leader_links[0] = weights[3] + 0.1;
        s.plant.q0 = q.0;
        s.plant.q1 = q.1;
        s.plant.a = Profile::Samples(samples.clone());
        s.signal.frequencies[0] = freq.into();
        s.agents[1].x0 = Profile::expr(&format!("{x0:?} * cos(pi * z)")).unwrap();
        s.agents[2].uncertainty.delta_c0 = Profile::Samples(samples);
        s.numerics.mu_c = mu;
        s.numerics.nu = nu;
        s.output.snapshot_times = snapshots;
        let text = s.to_toml().unwrap();
        prop_assert_eq!(Scenario::parse(&text).unwrap(), s);
    }

    #[test]
    fn gains_text_round_trips_bit_exactly(
        values in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO, 20),
    ) {
        let m = 4;
        let g = RegulatorGains {
            k_v: DVector::from_row_slice(&values[0..2]),
            k_1: values[2],
            k_x: GridFunction::new(values[3..8].to_vec()).unwrap(),
            r_x: GridFunction::new(values[8..13].to_vec()).unwrap(),
            b_y: DVector::from_row_slice(&values[13..15]),
            s: DMatrix::from_row_slice(2, 2, &values[15..19]),
            mu_c: values[19],
        };
        let back = parse_gains(&gains_to_string(&g)).unwrap();
        prop_assert_eq!(back.k_x.intervals(), m);
        for (a, b) in [(back.k_1, g.k_1), (back.mu_c, g.mu_c)] {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in back.k_x.values().iter().zip(g.k_x.values()).chain(back.r_x.values().iter().zip(g.r_x.values())) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in back.s.iter().zip(g.s.iter()).chain(back.k_v.iter().zip(g.k_v.iter())) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn synthesize_leader_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = leader();
    s.numerics.grid_points = 100;
    let out = cmd_synthesize(&s, dir.path()).unwrap();
    assert!(out.pass, "{:?}", out.report);
    let text = std::fs::read_to_string(dir.path().join("certificate.json")).unwrap();
    assert!(text.starts_with("{\n  \"pass\": true,\n  \"mode\": \"leader-follower\""));
    let gains = coopreg::scenario::files::read_gains(&dir.path().join("gains.txt")).unwrap();
    assert_eq!(gains, out.design.unwrap().gains);
    let kernel = std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert_eq!(kernel.lines().next(), Some("i,j,z,ζ,value"));
    assert_eq!(kernel.lines().count(), 1 + 101 * 102 / 2);
}

#[test]
fn synthesize_edgeless_graph_fails_with_nonpositive_bound() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = leader();
    s.numerics.grid_points = 64;
    s.numerics.nu = None;
    for row in &mut s.topology.adjacency {
        row.iter_mut().for_each(|w| *w = 0.0);
    }
    s.topology.leader_links = vec![0.0; 4];
    let out = cmd_synthesize(&s, dir.path()).unwrap();
    assert!(!out.pass);
    assert_eq!(out.report.error.unwrap().kind, "NonPositiveBound");
    let text = std::fs::read_to_string(dir.path().join("certificate.json")).unwrap();
    assert!(text.contains("\"kind\": \"NonPositiveBound\""));
}

#[test]
fn synthesize_resonant_mu_reports_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = leader();
    s.numerics.grid_points = 64;
    s.numerics.mu_c = 0.0;
    let out = cmd_synthesize(&s, dir.path()).unwrap();
    assert!(!out.pass);
    assert_eq!(out.report.error.unwrap().kind, "ResonantSpectrum");
}

fn zero_scenario() -> Scenario {
    let mut s = leader();
    s.numerics.grid_points = 64;
    s.numerics.horizon = 1.0;
    s.output.snapshot_times = vec![0.5];
    s.signal.reference_initial = vec![0.0, 0.0];
    for a in &mut s.agents {
        a.x0 = Profile::zero();
        a.v0 = vec![0.0; 3];
        if let Some(d) = &mut a.disturbance {
            d.initial = vec![0.0];
        }
    }
    s
}

#[test]
fn zero_scenario_gives_all_zero_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmd_simulate(&zero_scenario(), None, dir.path()).unwrap();
    assert!(out.pass);
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,r,y_1,y_2,y_3,y_4,e_1,e_2,e_3,e_4,u_1,u_2,u_3,u_4"
    );
    let mut rows = 0;
    for line in lines {
        rows += 1;
        assert!(line.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0), "{line}");
    }
    assert_eq!(rows, 101);
    let snap = std::fs::read_to_string(dir.path().join("snapshot_000.csv")).unwrap();
    assert_eq!(snap.lines().next(), Some("z,x_1,x_2,x_3,x_4"));
    let metrics = std::fs::read_to_string(dir.path().join("metrics.json")).unwrap();
    assert!(metrics.starts_with("{\n  \"pass\": true,"));
}

#[test]
fn simulation_outputs_are_reproducible() {
    let mut s = leader();
    s.numerics.grid_points = 64;
    s.numerics.horizon = 0.5;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    cmd_simulate(&s, None, a.path()).unwrap();
    cmd_simulate(&s, Some(&a.path().join("gains.txt")), b.path()).unwrap();
    for f in ["trace.csv", "metrics.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn check_passes_on_the_shipped_scenarios() {
    for name in ["four_agent_leader.toml", "four_agent_leaderless.toml"] {
        let mut s = load_scenario(shipped(name)).unwrap();
        s.numerics.grid_points = 100;
        let report = cmd_check(&s).unwrap();
        assert!(report.pass, "{name}\n{report}");
    }
}

#[test]
fn check_flags_a_disconnected_graph() {
    let mut s = leader();
    s.numerics.grid_points = 64;
    s.topology.adjacency[2][0] = 0.0;
    let report = cmd_check(&s).unwrap();
    assert!(!report.pass);
    assert!(!report.row("graph connectivity").unwrap().pass, "{report}");
}

#[test]
fn check_flags_a_zero_internal_model_input() {
    let mut s = leader();
    s.numerics.grid_points = 64;
    s.signal.b_y = vec![0.0; 3];
    let report = cmd_check(&s).unwrap();
    assert!(!report.pass);
    assert!(!report.row("internal-model input").unwrap().pass, "{report}");
    assert!(!report.row("decoupled input").unwrap().pass, "{report}");
}
