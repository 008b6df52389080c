//! Exosystem construction: reference and disturbance generators merged into
//! one marginally stable signal model `ẇ = S w`.
//!
//! Synthesis only ever sees `S` (and the user-chosen `b_y`); the read-outs
//! `p` and `P_i` belong to the simulator's truth model.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Rank tolerance relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-9;

/// Generator of a sum of sinusoids (and a constant for `ω = 0`), in real canonical form.
pub fn build_reference_block(frequencies: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
    for (i, &w) in frequencies.iter().enumerate() {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidArgument(format!("frequency {w} must be finite and ≥ 0")));
        }
        if frequencies[..i].contains(&w) {
            return Err(Error::DuplicateFrequency(w));
        }
    }
    let s = rotation_blocks(frequencies);
    let mut p = DVector::zeros(s.nrows());
    let mut k = 0;
    for &w in frequencies {
        p[k] = 1.0;
        k += if w == 0.0 { 1 } else { 2 };
    }
    Ok((s, p))
}

/// Direct sum of `[0]` (for `ω = 0`) and `[[0, ω], [−ω, 0]]` blocks.
pub fn rotation_blocks(frequencies: &[f64]) -> DMatrix<f64> {
    let n: usize = frequencies.iter().map(|&w| if w == 0.0 { 1 } else { 2 }).sum();
    let mut s = DMatrix::zeros(n, n);
    let mut k = 0;
    for &w in frequencies {
        if w == 0.0 {
            k += 1;
        } else {
            s[(k, k + 1)] = w;
            s[(k + 1, k)] = -w;
            k += 2;
        }
    }
    s
}

/// Local disturbance generator of one agent: `ẇ_d = S_d w_d`, `d = P_d w_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceBlock {
    pub generator: DMatrix<f64>,
    pub readout: DMatrix<f64>,
}

/// Merged signal model.
#[derive(Debug, Clone, PartialEq)]
pub struct ExoModel {
    pub s: DMatrix<f64>,
    /// Reference read-out `r = pᵀ w`.
    pub p: DVector<f64>,
    /// Disturbance read-outs `d_i = P_i w`, one per agent.
    pub disturbance_readouts: Vec<DMatrix<f64>>,
    /// Internal-model input vector.
    pub b_y: DVector<f64>,
    /// Column ranges of the merged state that belong to each distinct block.
    pub reference_range: std::ops::Range<usize>,
    pub disturbance_ranges: Vec<std::ops::Range<usize>>,
}

impl ExoModel {
    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn reference(&self, w: &ExoState) -> f64 {
        self.p.dot(&w.w)
    }

    pub fn disturbance(&self, agent: usize, w: &ExoState) -> DVector<f64> {
        &self.disturbance_readouts[agent] * &w.w
    }

    pub fn with_b_y(mut self, b_y: DVector<f64>) -> Result<Self> {
        if b_y.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "b_y has {} entries, signal model has dimension {}",
                b_y.len(),
                self.dim()
            )));
        }
        self.b_y = b_y;
        Ok(self)
    }
}

/// Merges the reference block with per-agent disturbance blocks.
///
/// Disturbance generators that are entrywise equal share one block of the
/// merged state; each agent's `P_i` selects its block and is zero elsewhere.
pub fn merge(
    reference: (DMatrix<f64>, DVector<f64>),
    disturbances: &[DisturbanceBlock],
) -> Result<ExoModel> {
    let (s_r, p_r) = reference;
    let n_r = s_r.nrows();
    if p_r.len() != n_r || s_r.ncols() != n_r {
        return Err(Error::InvalidArgument("reference block dimensions disagree".into()));
    }
    let mut distinct: Vec<&DMatrix<f64>> = Vec::new();
    let mut assignment = Vec::with_capacity(disturbances.len());
    for block in disturbances {
        let g = &block.generator;
        if g.nrows() != g.ncols() || block.readout.ncols() != g.nrows() {
            return Err(Error::InvalidArgument("disturbance block dimensions disagree".into()));
        }
        let idx = match distinct.iter().position(|d| *d == g) {
            Some(i) => i,
            None => {
                distinct.push(g);
                distinct.len() - 1
            }
        };
        assignment.push(idx);
    }
    let mut ranges = Vec::with_capacity(distinct.len());
    let mut offset = n_r;
    for d in &distinct {
        ranges.push(offset..offset + d.nrows());
        offset += d.nrows();
    }
    let n_w = offset;
    let mut s = DMatrix::zeros(n_w, n_w);
    s.view_mut((0, 0), (n_r, n_r)).copy_from(&s_r);
    for (d, r) in distinct.iter().zip(&ranges) {
        s.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(*d);
    }
    let mut p = DVector::zeros(n_w);
    p.rows_mut(0, n_r).copy_from(&p_r);
    let readouts = disturbances
        .iter()
        .zip(&assignment)
        .map(|(block, &idx)| {
            let r = &ranges[idx];
            let mut pi = DMatrix::zeros(block.readout.nrows(), n_w);
            pi.view_mut((0, r.start), (block.readout.nrows(), r.len()))
                .copy_from(&block.readout);
            pi
        })
        .collect();
    Ok(ExoModel {
        b_y: DVector::from_element(n_w, 1.0),
        s,
        p,
        disturbance_readouts: readouts,
        reference_range: 0..n_r,
        disturbance_ranges: ranges,
    })
}

/// Like [`merge`] but every agent keeps its own disturbance state, so agents
/// with equal generators may still start from different states.
pub fn stack(reference: (DMatrix<f64>, DVector<f64>), disturbances: &[DisturbanceBlock]) -> Result<ExoModel> {
    let (s_r, p_r) = reference;
    let n_r = s_r.nrows();
    if p_r.len() != n_r || s_r.ncols() != n_r {
        return Err(Error::InvalidArgument("reference block dimensions disagree".into()));
    }
    let mut ranges = Vec::with_capacity(disturbances.len());
    let mut offset = n_r;
    for block in disturbances {
        let g = &block.generator;
        if g.nrows() != g.ncols() || block.readout.ncols() != g.nrows() {
            return Err(Error::InvalidArgument("disturbance block dimensions disagree".into()));
        }
        ranges.push(offset..offset + g.nrows());
        offset += g.nrows();
    }
    let mut s = DMatrix::zeros(offset, offset);
    s.view_mut((0, 0), (n_r, n_r)).copy_from(&s_r);
    let mut p = DVector::zeros(offset);
    p.rows_mut(0, n_r).copy_from(&p_r);
    let mut readouts = Vec::with_capacity(disturbances.len());
    for (block, r) in disturbances.iter().zip(&ranges) {
        s.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&block.generator);
        let mut pi = DMatrix::zeros(block.readout.nrows(), offset);
        pi.view_mut((0, r.start), (block.readout.nrows(), r.len())).copy_from(&block.readout);
        readouts.push(pi);
    }
    Ok(ExoModel {
        b_y: DVector::from_element(offset, 1.0),
        s,
        p,
        disturbance_readouts: readouts,
        reference_range: 0..n_r,
        disturbance_ranges: ranges,
    })
}

/// Kalman rank test for `(S, b)`.
pub fn check_controllable(s: &DMatrix<f64>, b: &DVector<f64>) -> bool {
    let n = s.nrows();
    n > 0 && linalg::rank(&linalg::controllability_matrix(s, b), RANK_TOL) == n
}

/// Kalman rank test for `(C, S)` with a multi-row read-out.
pub fn check_observable(c: &DMatrix<f64>, s: &DMatrix<f64>) -> bool {
    let n = s.nrows();
    let mut obs = DMatrix::zeros(c.nrows() * n, n);
    let mut block = c.clone();
    for k in 0..n {
        obs.view_mut((k * c.nrows(), 0), (c.nrows(), n)).copy_from(&block);
        block = &block * s;
    }
    linalg::rank(&obs, RANK_TOL) == n
}

/// True when every eigenvalue of `s` lies on the imaginary axis within `tol`.
pub fn spectrum_on_imaginary_axis(s: &DMatrix<f64>, tol: f64) -> bool {
    linalg::eigenvalues(s).iter().all(|l| l.re.abs() <= tol)
}

/// Exosystem state.
#[derive(Debug, Clone, PartialEq)]
pub struct ExoState {
    pub w: DVector<f64>,
}

/// Exact propagator `w ↦ e^{S dt} w`, precomputed for a fixed step.
#[derive(Debug, Clone)]
pub struct ExoPropagator {
    transition: DMatrix<f64>,
}

impl ExoPropagator {
    pub fn new(s: &DMatrix<f64>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
        }
        Ok(ExoPropagator {
            transition: linalg::expm(s, dt),
        })
    }

    pub fn step(&self, w: &ExoState) -> ExoState {
        ExoState {
            w: &self.transition * &w.w,
        }
    }
}

/// Advances the exosystem by `dt` with the matrix exponential.
pub fn exo_step(model: &ExoModel, w: &ExoState, dt: f64) -> Result<ExoState> {
    Ok(ExoPropagator::new(&model.s, dt)?.step(w))
}
