//! Backstepping kernel of the local transformation `x̃ = x − ∫₀ᶻ k(z,ζ) x(ζ) dζ`.
//!
//! The kernel solves the Goursat problem
//!
//! ```text
//! k_zz − k_ζζ = (μ_c + a(ζ)) k,     0 < ζ < z < 1
//! k_ζ(z, 0)   = q₀ k(z, 0)
//! k(z, z)     = q₀ − ½ ∫₀ᶻ (μ_c + a)
//! ```
//!
//! In characteristic coordinates `ξ = z + ζ`, `η = z − ζ` with
//! `G(ξ, η) = k(z, ζ)` and `f = μ_c + a`, the problem is equivalent to the
//! integral equation
//!
//! ```text
//! G(ξ,η) = g(η) − ½[F(ξ/2) − F(η/2)] + ¼ ∫_η^ξ P(τ,η) dτ,
//! P(τ,η) = ∫₀^η f((τ−s)/2) G(τ,s) ds,
//! g(η)   = q₀ e^{−q₀η} + 2 ∫₀^η e^{−q₀(η−s)} (−¼ f(s/2) + ¼ P(s,s)) ds,
//! ```
//!
//! where `F' = f` and `g(η) = G(η, η)` is the trace on `ζ = 0`, obtained from
//! the Robin condition as a linear ODE along the boundary. Grid node `(i, j)`
//! sits at `(ξ, η) = ((i+j)h, (i−j)h)`, so characteristic lines through nodes
//! hit nodes every `2h`; integrals use the trapezoid rule along them.

use crate::error::{Error, Result};
use crate::grid::{hat_weights, GridFunction};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const MIN_INTERVALS: usize = 32;

/// Values `k(z_i, ζ_j)` for `0 ≤ j ≤ i ≤ M` on the uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularKernel {
    rows: Vec<Vec<f64>>,
}

impl TriangularKernel {
    pub fn zeros(intervals: usize) -> Self {
        TriangularKernel {
            rows: (0..=intervals).map(|i| vec![0.0; i + 1]).collect(),
        }
    }

    pub fn from_fn(intervals: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let h = 1.0 / intervals as f64;
        TriangularKernel {
            rows: (0..=intervals)
                .map(|i| (0..=i).map(|j| f(i as f64 * h, j as f64 * h)).collect())
                .collect(),
        }
    }

    pub fn intervals(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn step(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    /// `k(z_i, ζ_j)`; panics for `j > i`, which lies outside the triangle.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(j <= i, "kernel read at ({i}, {j}) is outside the triangle ζ ≤ z");
        self.rows[i][j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.rows[i][j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn diagonal(&self) -> GridFunction {
        GridFunction::new(self.rows.iter().enumerate().map(|(i, r)| r[i]).collect())
            .expect("kernel has at least two rows")
    }

    /// `ζ ↦ k(1, ζ)`.
    pub fn top_row(&self) -> GridFunction {
        GridFunction::new(self.rows[self.intervals()].clone()).expect("kernel has at least two rows")
    }

    /// `ζ ↦ k(z, ζ)` on the nodes `ζ_j ≤ ⌊z M⌋ h`, interpolated linearly in `z`.
    /// Entries at `ζ_j ≥ z` are zero.
    pub fn slice_at(&self, z: f64) -> Vec<f64> {
        let m = self.intervals();
        let [(i0, w0), (i1, w1)] = hat_weights(m, z);
        let mut out = vec![0.0; m + 1];
        for (j, v) in out.iter_mut().enumerate().take(i0 + 1) {
            if (j as f64) < z * m as f64 {
                *v = w0 * self.rows[i0][j] + w1 * self.rows[i1][j];
            }
        }
        out
    }

    /// `k_z(1, ζ_j)` with second-order one-sided stencils.
    ///
    /// Below the corner the backward three-point stencil in `z` is used. The
    /// last two columns have no nodes below them inside the triangle, so
    /// there `k_z = D_(1,1) k − k_ζ`, with the derivative along the diagonal
    /// direction and the ζ-derivative both taken backward.
    pub fn top_row_z_derivative(&self) -> GridFunction {
        let m = self.intervals();
        let h = self.step();
        let k = |i: usize, j: usize| self.rows[i][j];
        let values = (0..=m)
            .map(|j| {
                if j + 2 <= m {
                    (3.0 * k(m, j) - 4.0 * k(m - 1, j) + k(m - 2, j)) / (2.0 * h)
                } else {
                    let diag = (3.0 * k(m, j) - 4.0 * k(m - 1, j - 1) + k(m - 2, j - 2)) / (2.0 * h);
                    let zeta = (3.0 * k(m, j) - 4.0 * k(m, j - 1) + k(m, j - 2)) / (2.0 * h);
                    diag - zeta
                }
            })
            .collect();
        GridFunction::new(values).expect("kernel has at least two rows")
    }

    pub fn sup_norm(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &TriangularKernel) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `f` and its antiderivative `F` sampled at the half nodes `m h / 2`, `m = 0..=2M`.
struct Reaction {
    f_half: Vec<f64>,
    antiderivative_half: Vec<f64>,
}

impl Reaction {
    fn new(a: &GridFunction, mu_c: f64) -> Self {
        let m = a.intervals();
        let av = a.values();
        let f_half: Vec<f64> = (0..=2 * m)
            .map(|k| {
                let ak = if k % 2 == 0 {
                    av[k / 2]
                } else {
                    0.5 * (av[k / 2] + av[k / 2 + 1])
                };
                mu_c + ak
            })
            .collect();
        let hh = 0.5 / m as f64;
        let mut antiderivative_half = vec![0.0; 2 * m + 1];
        for k in 1..=2 * m {
            antiderivative_half[k] = antiderivative_half[k - 1] + 0.5 * hh * (f_half[k - 1] + f_half[k]);
        }
        Reaction {
            f_half,
            antiderivative_half,
        }
    }

    /// `f(ζ_j)` at a full node.
    fn at_node(&self, j: usize) -> f64 {
        self.f_half[2 * j]
    }
}

/// Solves the kernel equations by successive approximation.
pub fn solve_kernel(
    a: &GridFunction,
    q0: f64,
    mu_c: f64,
    tol: f64,
    max_iter: usize,
) -> Result<TriangularKernel> {
    let m = a.intervals();
    if m < MIN_INTERVALS {
        return Err(Error::InvalidArgument(format!(
            "kernel grid needs at least {MIN_INTERVALS} intervals, got {m}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let h = 1.0 / m as f64;
    let reaction = Reaction::new(a, mu_c);
    let f = &reaction.f_half;
    let big_f = &reaction.antiderivative_half;
    // G on the ζ = 0 boundary trace and on the diagonal at half nodes
    let diag_half = |p: usize| q0 - 0.5 * big_f[p];
    let decay = (-q0 * h).exp();

    let mut kernel = TriangularKernel::zeros(m);
    // P(τ, σ) stored at node (i, j) with τ = i + j, σ = i − j
    let mut p_table = TriangularKernel::zeros(m);
    let mut trace = vec![0.0; m + 1];
    let mut last_change = f64::INFINITY;

    for _ in 0..max_iter {
        // P along each line τ = const, cumulative in σ
        for t in 0..=2 * m {
            let sigma_max = t.min(2 * m - t);
            let parity = t % 2;
            if parity > sigma_max {
                continue;
            }
            let node = |sigma: usize| ((t + sigma) / 2, (t - sigma) / 2);
            let phi = |sigma: usize| {
                let (i, j) = node(sigma);
                reaction.at_node(j) * kernel.get(i, j)
            };
            let mut acc = if parity == 0 {
                0.0
            } else {
                // first half-width segment from the diagonal at σ = 0 (off-grid) to σ = 1
                0.5 * h * (f[t] * diag_half(t) + phi(1))
            };
            let (i, j) = node(parity);
            p_table.set(i, j, acc);
            let mut prev = phi(parity);
            let mut sigma = parity;
            while sigma + 2 <= sigma_max {
                let next = phi(sigma + 2);
                acc += h * (prev + next);
                sigma += 2;
                let (i, j) = node(sigma);
                p_table.set(i, j, acc);
                prev = next;
            }
        }

        // boundary trace g(η) at η = q h, from the Robin condition
        let gamma = |s: usize| -0.25 * f[s] + 0.25 * p_table.get(s, 0);
        trace[0] = q0;
        let mut integral = 0.0;
        for q in 1..=m {
            integral = decay * integral + 0.5 * h * (decay * gamma(q - 1) + gamma(q));
            trace[q] = q0 * (-q0 * q as f64 * h).exp() + 2.0 * integral;
        }

        // new iterate, cumulative in τ along each line η = const
        let mut change: f64 = 0.0;
        let mut next = TriangularKernel::zeros(m);
        for q in 0..=m {
            let mut acc = 0.0;
            let mut prev_p = p_table.get(q, 0);
            let mut p = q;
            loop {
                let (i, j) = ((p + q) / 2, (p - q) / 2);
                let value = trace[q] - 0.5 * (big_f[p] - big_f[q]) + 0.25 * acc;
                change = change.max((value - kernel.get(i, j)).abs());
                next.set(i, j, value);
                if p + 2 + q > 2 * m {
                    break;
                }
                let (ni, nj) = ((p + 2 + q) / 2, (p + 2 - q) / 2);
                let next_p = p_table.get(ni, nj);
                acc += h * (prev_p + next_p);
                prev_p = next_p;
                p += 2;
            }
        }
        kernel = next;
        last_change = change;
        if change < tol {
            return Ok(kernel);
        }
    }
    Err(Error::NoConvergence {
        max_iter,
        last_change,
    })
}

/// Inverse kernel from `k_I(z,ζ) = k(z,ζ) + ∫_ζ^z k(z,s) k_I(s,ζ) ds`.
///
/// For each column `ζ_j` this is a linear Volterra equation of the second
/// kind in `z`; with trapezoid weights it is solved exactly by marching
/// upward from the diagonal.
pub fn invert_kernel(k: &TriangularKernel) -> Result<TriangularKernel> {
    let m = k.intervals();
    let h = k.step();
    let mut inv = TriangularKernel::zeros(m);
    for j in 0..=m {
        inv.set(j, j, k.get(j, j));
        for i in j + 1..=m {
            let mut s = 0.5 * k.get(i, j) * inv.get(j, j);
            for l in j + 1..i {
                s += k.get(i, l) * inv.get(l, j);
            }
            let pivot = 1.0 - 0.5 * h * k.get(i, i);
            if pivot.abs() < 1e-12 {
                return Err(Error::SingularSystem(format!(
                    "inverse-kernel marching pivot vanishes at z = {}",
                    i as f64 * h
                )));
            }
            inv.set(i, j, (k.get(i, j) + h * s) / pivot);
        }
    }
    Ok(inv)
}

fn volterra_apply(k: &TriangularKernel, x: &GridFunction, sign: f64) -> Result<GridFunction> {
    let m = k.intervals();
    if x.intervals() != m {
        return Err(Error::GridMismatch {
            expected: m + 1,
            found: x.values().len(),
        });
    }
    let h = k.step();
    let xv = x.values();
    let values = (0..=m)
        .map(|i| {
            if i == 0 {
                return xv[0];
            }
            let row = k.row(i);
            let mut s = 0.5 * (row[0] * xv[0] + row[i] * xv[i]);
            for j in 1..i {
                s += row[j] * xv[j];
            }
            xv[i] + sign * h * s
        })
        .collect();
    GridFunction::new(values)
}

/// `x̃(z) = x(z) − ∫₀ᶻ k(z,ζ) x(ζ) dζ`.
pub fn apply_transform(k: &TriangularKernel, x: &GridFunction) -> Result<GridFunction> {
    volterra_apply(k, x, -1.0)
}

/// `x(z) = x̃(z) + ∫₀ᶻ k_I(z,ζ) x̃(ζ) dζ`.
pub fn apply_inverse_transform(k_inv: &TriangularKernel, x: &GridFunction) -> Result<GridFunction> {
    volterra_apply(k_inv, x, 1.0)
}

/// Output operator `C[h] = ∫₀¹ c₀ h + Σ c_k h(z_k) + c_b0 h(0) + c_b1 h(1)`.
///
/// Point weights stay symbolic; they are never smeared onto the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputOperator {
    pub smooth: GridFunction,
    /// `(c_k, z_k)` with `z_k ∈ (0, 1)`.
    pub points: Vec<(f64, f64)>,
    pub boundary: (f64, f64),
}

impl OutputOperator {
    pub fn new(smooth: GridFunction, points: Vec<(f64, f64)>, boundary: (f64, f64)) -> Result<Self> {
        for &(c, z) in &points {
            if !(z > 0.0 && z < 1.0) || !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "point weight ({c}, {z}) must be finite with location strictly inside (0, 1)"
                )));
            }
        }
        if !boundary.0.is_finite() || !boundary.1.is_finite() {
            return Err(Error::InvalidArgument("boundary weights must be finite".into()));
        }
        Ok(OutputOperator {
            smooth,
            points,
            boundary,
        })
    }

    pub fn intervals(&self) -> usize {
        self.smooth.intervals()
    }

    /// Applies the operator to a profile on the same grid.
    pub fn apply(&self, profile: &GridFunction) -> Result<f64> {
        let mut y = self.smooth.inner(profile)?;
        for &(c, z) in &self.points {
            y += c * profile.interpolate(z);
        }
        Ok(y + self.boundary.0 * profile.at_left() + self.boundary.1 * profile.at_right())
    }

    /// Applies the operator to each row of a matrix-valued profile given as
    /// samples `values[node][col]`.
    pub fn apply_columns(&self, columns: &[Vec<f64>]) -> Result<Vec<f64>> {
        columns
            .iter()
            .map(|col| self.apply(&GridFunction::new(col.clone())?))
            .collect()
    }
}

/// `C ∘ T⁻¹`: the smooth weight becomes
/// `c̃(ζ) = c_b1 k_I(1,ζ) + c₀(ζ) + ∫_ζ¹ c₀(s) k_I(s,ζ) ds + Σ c_k k_I(z_k,ζ) 1{ζ < z_k}`;
/// point and boundary weights are carried over unchanged.
pub fn transform_output_weight(c: &OutputOperator, k_inv: &TriangularKernel) -> Result<OutputOperator> {
    let m = k_inv.intervals();
    if c.intervals() != m {
        return Err(Error::GridMismatch {
            expected: m + 1,
            found: c.smooth.values().len(),
        });
    }
    let h = k_inv.step();
    let c0 = c.smooth.values();
    let cb1 = c.boundary.1;
    let mut values: Vec<f64> = (0..=m)
        .map(|j| {
            let mut s = 0.0;
            if j < m {
                s = 0.5 * (c0[j] * k_inv.get(j, j) + c0[m] * k_inv.get(m, j));
                for i in j + 1..m {
                    s += c0[i] * k_inv.get(i, j);
                }
                s *= h;
            }
            cb1 * k_inv.get(m, j) + c0[j] + s
        })
        .collect();
    for &(ck, zk) in &c.points {
        let slice = k_inv.slice_at(zk);
        let (j0, frac) = {
            let s = zk * m as f64;
            (s.floor() as usize, s - s.floor())
        };
        for (v, kz) in values.iter_mut().zip(&slice).take(j0) {
            *v += ck * kz;
        }
        // the truncated segment [ζ_{j0}, z_k] rescales the node at the jump
        let [(i0, w0), (i1, w1)] = hat_weights(m, zk);
        let at_jump = w0 * k_inv.get(i0, j0.min(i0)) + w1 * k_inv.get(i1, j0.min(i1));
        values[j0] += ck * at_jump * (0.5 + frac);
    }
    OutputOperator::new(GridFunction::new(values)?, c.points.clone(), c.boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_data_gives_zero_kernel() {
        let k = solve_kernel(&GridFunction::zeros(40), 0.0, 0.0, 1e-12, 50).unwrap();
        assert_eq!(k.sup_norm(), 0.0);
        let inv = invert_kernel(&k).unwrap();
        assert_eq!(inv.sup_norm(), 0.0);
    }

    #[test]
    fn diagonal_matches_closed_form() {
        let m = 64;
        let a = GridFunction::from_fn(m, |z| z + 1.0);
        let k = solve_kernel(&a, 3.0, 5.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        for i in 0..=m {
            let z = i as f64 / m as f64;
            let exact = 3.0 - 0.5 * (6.0 * z + 0.5 * z * z);
            assert!((k.get(i, i) - exact).abs() < 1e-12);
        }
        assert!((k.get(m, m) + 0.25).abs() < 1e-12);
    }

    #[test]
    fn constant_reaction_without_robin_term_matches_bessel_series() {
        // q0 = 0, f ≡ λ: k(z,ζ) = −λ z I₁(√(λ(z²−ζ²)))/√(λ(z²−ζ²)) (Neumann at ζ = 0).
        let lambda = 4.0;
        let m = 128;
        let k = solve_kernel(&GridFunction::zeros(m), 0.0, lambda, 1e-13, 100).unwrap();
        let bessel_i1_over_x = |x2: f64| {
            // I₁(x)/x = Σ (x²/4)^n / (2 n! (n+1)!)
            let mut term = 0.5;
            let mut sum = term;
            for n in 1..40 {
                term *= x2 / 4.0 / (n as f64 * (n as f64 + 1.0));
                sum += term;
            }
            sum
        };
        let mut err: f64 = 0.0;
        for i in 0..=m {
            for j in 0..=i {
                let (z, s) = (i as f64 / m as f64, j as f64 / m as f64);
                let exact = -lambda * z * bessel_i1_over_x(lambda * (z * z - s * s));
                err = err.max((k.get(i, j) - exact).abs());
            }
        }
        assert!(err < 2e-4, "max error {err}");
    }

    #[test]
    fn deterministic_tables() {
        let a = GridFunction::from_fn(48, |z| (3.0 * z).sin());
        let k1 = solve_kernel(&a, 1.5, 2.0, 1e-11, 100).unwrap();
        let k2 = solve_kernel(&a, 1.5, 2.0, 1e-11, 100).unwrap();
        assert_eq!(k1, k2);
    }

    #[test]
    fn too_tight_tolerance_reports_no_convergence() {
        let a = GridFunction::from_fn(40, |z| z + 1.0);
        assert!(matches!(
            solve_kernel(&a, 3.0, 5.0, 1e-10, 2),
            Err(Error::NoConvergence { max_iter: 2, .. })
        ));
    }

    #[test]
    fn transform_closed_forms() {
        let m = 50;
        let one = GridFunction::constant(m, 1.0);
        let c = TriangularKernel::from_fn(m, |_, _| 0.7);
        let xt = apply_transform(&c, &one).unwrap();
        let xi = apply_inverse_transform(&c, &one).unwrap();
        for i in 0..=m {
            let z = i as f64 / m as f64;
            assert!((xt.values()[i] - (1.0 - 0.7 * z)).abs() < 1e-13);
            assert!((xi.values()[i] - (1.0 + 0.7 * z)).abs() < 1e-13);
        }
        let zero = TriangularKernel::zeros(m);
        let x = GridFunction::from_fn(m, |z| z * z - 0.3);
        assert_eq!(apply_transform(&zero, &x).unwrap(), x);
        assert!(matches!(
            apply_transform(&zero, &GridFunction::zeros(m + 1)),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn inverse_diagonal_equals_forward_diagonal() {
        let a = GridFunction::from_fn(40, |z| z + 1.0);
        let k = solve_kernel(&a, 3.0, 5.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let inv = invert_kernel(&k).unwrap();
        assert_eq!(inv.diagonal(), k.diagonal());
    }

    #[test]
    fn output_weight_special_cases() {
        let m = 40;
        let a = GridFunction::from_fn(m, |z| z + 1.0);
        let k = solve_kernel(&a, 3.0, 5.0, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let inv = invert_kernel(&k).unwrap();
        let c = OutputOperator::new(GridFunction::from_fn(m, |z| -z), vec![(0.5, 0.37)], (1.0, 1.0)).unwrap();
        let same = transform_output_weight(&c, &TriangularKernel::zeros(m)).unwrap();
        assert_eq!(same, c);
        let tip = OutputOperator::new(GridFunction::zeros(m), vec![], (0.0, 1.0)).unwrap();
        let t = transform_output_weight(&tip, &inv).unwrap();
        assert_eq!(t.smooth, inv.top_row());
    }

    #[test]
    fn output_evaluation() {
        let m = 100;
        let c = OutputOperator::new(GridFunction::from_fn(m, |z| -z), vec![], (1.0, 1.0)).unwrap();
        assert!((c.apply(&GridFunction::constant(m, 1.0)).unwrap() - 1.5).abs() < 1e-14);
        let p = OutputOperator::new(GridFunction::zeros(m), vec![(2.0, 0.3)], (0.0, 0.0)).unwrap();
        assert!((p.apply(&GridFunction::from_fn(m, |z| z)).unwrap() - 0.6).abs() < 1e-14);
        assert!(OutputOperator::new(GridFunction::zeros(m), vec![(1.0, 1.0)], (0.0, 0.0)).is_err());
    }
}
