//! The target cascade `ė_v = F_ev e_v` driving `x̃_t = x̃'' − μ_c x̃`,
//! `x̃'(0) = 0`, `x̃'(1) = (I_N ⊗ k_vᵀ) e_v`.

use nalgebra::{DMatrix, DVector};

use super::pde::PdeOperator;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::{apply_transform, TriangularKernel};
use crate::linalg::expm;

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrace {
    pub times: Vec<f64>,
    pub e_v: Vec<DVector<f64>>,
    pub x_tilde: Vec<Vec<GridFunction>>,
}

/// `x̃_i = T[x_i]` and `e_v = v − (H ⊗ I) ∫ q̃ x̃`.
pub fn to_target_coordinates(
    kernel: &TriangularKernel,
    q_tilde: &DMatrix<f64>,
    h: &DMatrix<f64>,
    x: &[GridFunction],
    v: &[DVector<f64>],
) -> Result<(DVector<f64>, Vec<GridFunction>)> {
    let n = h.nrows();
    let nw = q_tilde.nrows();
    if x.len() != n || v.len() != n {
        return Err(Error::InvalidArgument(format!("expected {n} agents")));
    }
    let x_tilde = x.iter().map(|xi| apply_transform(kernel, xi)).collect::<Result<Vec<_>>>()?;
    let mut eta = Vec::with_capacity(n);
    for xt in &x_tilde {
        if xt.values().len() != q_tilde.ncols() {
            return Err(Error::GridMismatch {
                expected: q_tilde.ncols(),
                found: xt.values().len(),
            });
        }
        let mut e = DVector::zeros(nw);
        for c in 0..nw {
            let row = GridFunction::new(q_tilde.row(c).iter().copied().collect())?;
            e[c] = row.inner(xt)?;
        }
        eta.push(e);
    }
    let mut e_v = DVector::zeros(n * nw);
    for i in 0..n {
        let mut block = v[i].clone();
        for j in 0..n {
            block -= &eta[j] * h[(i, j)];
        }
        e_v.rows_mut(i * nw, nw).copy_from(&block);
    }
    Ok((e_v, x_tilde))
}

/// Steps the cascade with the exact exponential for `e_v` and Crank–Nicolson for `x̃`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_target_cascade(
    f_ev: &DMatrix<f64>,
    k_v: &DVector<f64>,
    mu_c: f64,
    e_v0: &DVector<f64>,
    x_tilde0: &[GridFunction],
    dt: f64,
    horizon: f64,
    sample_interval: f64,
) -> Result<CascadeTrace> {
    let nw = k_v.len();
    let n = x_tilde0.len();
    if n == 0 || e_v0.len() != n * nw || f_ev.nrows() != n * nw {
        return Err(Error::InvalidArgument("cascade dimensions disagree".into()));
    }
    let m = x_tilde0[0].intervals();
    let op = PdeOperator::new(&GridFunction::constant(m, 1.0), &GridFunction::constant(m, -mu_c), 0.0, 0.0)?;
    let transition = expm(f_ev, dt);
    let steps = (horizon / dt).round().max(1.0) as usize;
    let sample_every = ((sample_interval / dt).round() as usize).max(1);

    let mut e = e_v0.clone();
    let mut x: Vec<GridFunction> = x_tilde0.to_vec();
    let mut trace = CascadeTrace {
        times: vec![],
        e_v: vec![],
        x_tilde: vec![],
    };
    let inputs = |e: &DVector<f64>| (0..n).map(|i| k_v.dot(&e.rows(i * nw, nw))).collect::<Vec<_>>();
    for step in 0..=steps {
        if step % sample_every == 0 || step == steps {
            trace.times.push(step as f64 * dt);
            trace.e_v.push(e.clone());
            trace.x_tilde.push(x.clone());
        }
        if step == steps {
            break;
        }
        let e_next = &transition * &e;
        let (u0, u1) = (inputs(&e), inputs(&e_next));
        for i in 0..n {
            let mut forcing = vec![0.0; m + 1];
            op.add_boundary_inputs(&mut forcing, 0.0, 0.5 * (u0[i] + u1[i]));
            op.step(x[i].values_mut(), &forcing, dt)?;
        }
        e = e_next;
    }
    Ok(trace)
}
