#![allow(dead_code)]

use coopreg::graph::CommTopology;
use coopreg::kernel::{invert_kernel, solve_kernel, transform_output_weight, OutputOperator, TriangularKernel};
use coopreg::linalg::C64;
use coopreg::signal::{build_reference_block, merge, DisturbanceBlock, ExoModel};
use coopreg::sim::{simulate, simulate_target_cascade, to_target_coordinates, AgentSpec, ClosedLoop, SimConfig};
use coopreg::synthesis::{design, leader_closed_loop, DecouplingSolution, DesignOptions, Mode, NominalPlant};
use coopreg::GridFunction;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Four agents; agent 1 hears the leader, edges 3→1, 1→2, 4→2, 1→3, 3→4.
pub fn four_agent_topology() -> CommTopology {
    CommTopology::from_rows(
        &[
            vec![0.0, 0.0, 1.0, 0.0],
            vec![1.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ],
        &[1.0, 0.0, 0.0, 0.0],
    )
    .unwrap()
}

/// `S = bdiag([[0, π], [−π, 0]], 0)`, `b_y = 1`.
pub fn four_agent_signal() -> (DMatrix<f64>, DVector<f64>) {
    let s = DMatrix::from_row_slice(3, 3, &[0.0, PI, 0.0, -PI, 0.0, 0.0, 0.0, 0.0, 0.0]);
    (s, DVector::from_element(3, 1.0))
}

pub fn four_agent_output(m: usize) -> OutputOperator {
    OutputOperator::new(GridFunction::from_fn(m, |z| -z), vec![], (1.0, 1.0)).unwrap()
}

pub fn four_agent_plant(m: usize) -> NominalPlant {
    NominalPlant {
        a: GridFunction::from_fn(m, |z| z + 1.0),
        q0: 3.0,
        q1: 0.0,
        output: four_agent_output(m),
    }
}

pub fn leader_options() -> DesignOptions {
    DesignOptions {
        mu_c: 5.0,
        nu: Some(0.382),
        riccati_weight: 150.0,
        ..DesignOptions::default()
    }
}

pub fn leaderless_options() -> DesignOptions {
    DesignOptions {
        nu: Some(1.0),
        ..leader_options()
    }
}

/// Fourth-order second derivative at interior nodes `2..=M−2`.
pub fn second_derivative_4(y: &[f64], h: f64, i: usize) -> f64 {
    (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) / (12.0 * h * h)
}

/// Fourth-order one-sided first derivatives at both ends.
pub fn end_derivatives_4(y: &[f64], h: f64) -> (f64, f64) {
    let m = y.len() - 1;
    let left = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h);
    let right = (25.0 * y[m] - 48.0 * y[m - 1] + 36.0 * y[m - 2] - 16.0 * y[m - 3] + 3.0 * y[m - 4]) / (12.0 * h);
    (left, right)
}

/// Reference `r = 2cos(πt)` and a constant disturbance `d_i = d_i0` shared through one state.
pub fn four_agent_exo() -> (ExoModel, DVector<f64>) {
    let reference = build_reference_block(&[PI]).unwrap();
    let levels = [3.0, -3.0, 1.0, 1.0];
    let blocks: Vec<DisturbanceBlock> = levels
        .iter()
        .map(|&d| DisturbanceBlock {
            generator: DMatrix::zeros(1, 1),
            readout: DMatrix::from_element(1, 1, d),
        })
        .collect();
    let exo = merge(reference, &blocks).unwrap();
    (exo, DVector::from_row_slice(&[2.0, 0.0, 1.0]))
}

pub const FOUR_AGENT_V0: [[f64; 3]; 4] = [[1.0, 3.5, 0.5], [0.1, 2.0, 0.8], [1.7, 0.8, 0.3], [0.5, 0.7, 0.9]];
pub const FOUR_AGENT_X0: [f64; 4] = [1.0, 2.0, 0.5, 3.0];

/// Perturbed diffusion, reaction and output, with disturbance inputs `g₁ … g₄`.
pub fn four_agent_specs(m: usize) -> Vec<AgentSpec> {
    let plant = four_agent_plant(m);
    let dl = [0.2, -0.2, -0.1, 0.1];
    let da = [0.2, -0.2, 0.1, 0.1];
    let g1: [fn(f64) -> f64; 4] = [|z| 2.0 * z, |z| 3.0 * z + 1.0, |z| z - 1.0, |z| 2.0 * z];
    (0..4)
        .map(|i| {
            let mut spec = AgentSpec::nominal(
                &plant,
                GridFunction::constant(m, FOUR_AGENT_X0[i]),
                DVector::from_row_slice(&FOUR_AGENT_V0[i]),
            );
            spec.delta_lambda = GridFunction::constant(m, dl[i]);
            spec.delta_a = plant.a.map(|a| da[i] * a);
            spec.g1 = vec![GridFunction::from_fn(m, g1[i])];
            spec.g2 = DVector::from_element(1, 1.0);
            spec.g3 = DVector::from_element(1, 1.0);
            spec.g4 = DVector::from_element(1, 0.0);
            if i == 3 {
                spec.delta_boundary = (-0.05, 0.1);
            }
            spec
        })
        .collect()
}

/// Sup of `k_zz − k_ζζ − f k` over interior nodes, via the diamond stencil.
pub fn interior_residual(k: &TriangularKernel, f: impl Fn(f64) -> f64) -> f64 {
    let m = k.intervals();
    let h = k.step();
    let mut res: f64 = 0.0;
    for i in 2..m {
        for j in 1..i {
            let lap = (k.get(i + 1, j) + k.get(i - 1, j) - k.get(i, j + 1) - k.get(i, j - 1)) / (h * h);
            res = res.max((lap - f(j as f64 * h) * k.get(i, j)).abs());
        }
    }
    res
}

pub fn random_profile(rng: &mut ChaCha8Rng, m: usize) -> GridFunction {
    let coeffs: Vec<(f64, f64)> = (0..4).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    GridFunction::from_fn(m, |z| {
        coeffs
            .iter()
            .enumerate()
            .map(|(n, (s, c))| s * ((n + 1) as f64 * z).sin() + c * (n as f64 * z).cos())
            .sum()
    })
}

/// Kernel for `a = 1 + z`, `q₀ = 3`, `μ_c = 5`.
pub fn four_agent_kernel(m: usize) -> TriangularKernel {
    let a = GridFunction::from_fn(m, |z| z + 1.0);
    solve_kernel(&a, 3.0, 5.0, coopreg::kernel::DEFAULT_TOL, coopreg::kernel::DEFAULT_MAX_ITER).unwrap()
}

pub fn transformed_output(m: usize, output: &OutputOperator) -> (TriangularKernel, OutputOperator) {
    let plant = four_agent_plant(m);
    let k = solve_kernel(&plant.a, plant.q0, 5.0, 1e-10, 200).unwrap();
    let ct = transform_output_weight(output, &invert_kernel(&k).unwrap()).unwrap();
    (k, ct)
}

/// Sup residual of `q̃'' − (μ I + S) q̃ − b_y c̃` and of the Neumann data, with 4th-order differences.
pub fn decoupling_residual(sol: &DecouplingSolution, ct: &OutputOperator, s: &DMatrix<f64>, b_y: &DVector<f64>) -> (f64, f64) {
    let m = sol.intervals();
    let h = 1.0 / m as f64;
    let n = s.nrows();
    let a = s + DMatrix::identity(n, n) * 5.0;
    let rows: Vec<Vec<f64>> = (0..n).map(|r| sol.q_tilde.row(r).iter().copied().collect()).collect();
    let mut interior: f64 = 0.0;
    for i in 2..=m - 2 {
        let q = sol.q_tilde.column(i);
        let aq = &a * q;
        for r in 0..n {
            let res = second_derivative_4(&rows[r], h, i) - aq[r] - b_y[r] * ct.smooth.values()[i];
            interior = interior.max(res.abs());
        }
    }
    let mut boundary: f64 = 0.0;
    for r in 0..n {
        let (l, rt) = end_derivatives_4(&rows[r], h);
        boundary = boundary.max((l - b_y[r] * ct.boundary.0).abs()).max((rt + b_y[r] * ct.boundary.1).abs());
    }
    (interior, boundary)
}

/// `n(s)` with `Ψ(0, ζ, s)` integrated by RK4 from `Ψ(0, 0, s) = I`.
pub fn numerator_by_ode(s: C64, ct: &OutputOperator, mu: f64) -> C64 {
    let m = ct.intervals();
    let h = 1.0 / m as f64;
    let sub = 20;
    let dt = h / sub as f64;
    let lam = s + mu;
    // d/dζ Ψ(0, ζ) = −Ψ(0, ζ) A with A = [[0, 1], [λ, 0]]
    let rhs = |y: [C64; 4]| -> [C64; 4] {
        let [a, b, c, d] = y;
        [-(b * lam), -a, -(d * lam), -c]
    };
    let mut y = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let mut psi11 = vec![y[0]];
    for _ in 0..m {
        for _ in 0..sub {
            let k1 = rhs(y);
            let k2 = rhs(std::array::from_fn(|i| y[i] + k1[i] * (dt / 2.0)));
            let k3 = rhs(std::array::from_fn(|i| y[i] + k2[i] * (dt / 2.0)));
            let k4 = rhs(std::array::from_fn(|i| y[i] + k3[i] * dt));
            y = std::array::from_fn(|i| y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0));
        }
        psi11.push(y[0]);
    }
    let c = ct.smooth.values();
    let mut integral = C64::new(0.0, 0.0);
    for i in 0..=m {
        let w = if i == 0 || i == m { 0.5 } else { 1.0 };
        integral += psi11[i] * (w * c[i]);
    }
    integral * h + ct.boundary.0 + psi11[m] * ct.boundary.1
}

/// Relative L2 gap, over snapshots every 0.1 s, between the nominal loop
/// mapped into `(e_v, x̃)` and the target cascade started from the same state.
pub fn structural_discrepancy(m: usize, dt: f64, horizon: f64, seed: u64) -> f64 {
    let (s, b_y) = four_agent_signal();
    let topo = four_agent_topology();
    let plant = four_agent_plant(m);
    let d = design(&plant, &s, &b_y, &topo, Mode::LeaderFollower, &leader_options()).unwrap();
    let exo = ExoModel {
        disturbance_readouts: vec![DMatrix::zeros(0, 3); 4],
        ..four_agent_exo().0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents: Vec<AgentSpec> = (0..4)
        .map(|_| {
            let c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            AgentSpec::nominal(
                &plant,
                GridFunction::from_fn(m, |z| c[0] + c[1] * (PI * z).cos() + c[2] * (2.0 * PI * z).cos()),
                DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    let cl = ClosedLoop {
        plant: &plant,
        agents: &agents,
        topology: &topo,
        mode: Mode::LeaderFollower,
        exo: &exo,
        w0: &DVector::zeros(3),
        gains: &d.gains,
    };
    let samples = (horizon / 0.1).round() as usize;
    let config = SimConfig {
        intervals: m,
        dt,
        horizon,
        snapshot_times: (0..=samples).map(|k| k as f64 * 0.1).collect(),
        ..SimConfig::default()
    };
    let trace = simulate(&cl, &config).unwrap();
    let h = &d.graph.leader_follower;
    let x0: Vec<GridFunction> = agents.iter().map(|a| a.x0.clone()).collect();
    let v0: Vec<DVector<f64>> = agents.iter().map(|a| a.v0.clone()).collect();
    let (e0, xt0) = to_target_coordinates(&d.kernel, &d.decoupling.q_tilde, h, &x0, &v0).unwrap();
    let f_ev = leader_closed_loop(&s, &d.decoupling.q_tilde_at_1, &d.gains.k_v, h);
    let cascade = simulate_target_cascade(&f_ev, &d.gains.k_v, 5.0, &e0, &xt0, dt, horizon, 0.1).unwrap();
    assert_eq!(trace.snapshots.len(), cascade.e_v.len());

    let (mut num, mut den) = (0.0, 0.0);
    for (snap, (ec, xc)) in trace.snapshots.iter().zip(cascade.e_v.iter().zip(&cascade.x_tilde)) {
        let (es, xs) = to_target_coordinates(&d.kernel, &d.decoupling.q_tilde, h, &snap.profiles, &snap.v).unwrap();
        num += (&es - ec).norm_squared();
        den += ec.norm_squared();
        for (a, b) in xs.iter().zip(xc) {
            num += a.zip_with(b, |p, q| p - q).unwrap().l2_norm().powi(2);
            den += b.l2_norm().powi(2);
        }
    }
    (num / den).sqrt()
}
