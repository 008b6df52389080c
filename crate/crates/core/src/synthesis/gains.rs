use nalgebra::{DMatrix, DVector};

use super::decoupling::DecouplingSolution;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::TriangularKernel;

/// Everything the networked controller needs at run time.
#[derive(Debug, Clone, PartialEq)]
pub struct RegulatorGains {
    pub k_v: DVector<f64>,
    pub k_1: f64,
    pub k_x: GridFunction,
    pub r_x: GridFunction,
    pub b_y: DVector<f64>,
    pub s: DMatrix<f64>,
    pub mu_c: f64,
}

impl RegulatorGains {
    pub fn n_w(&self) -> usize {
        self.s.nrows()
    }

    pub fn intervals(&self) -> usize {
        self.k_x.intervals()
    }

    /// The same gains sampled on another grid.
    pub fn resample(&self, intervals: usize) -> RegulatorGains {
        RegulatorGains {
            k_x: self.k_x.resample(intervals),
            r_x: self.r_x.resample(intervals),
            ..self.clone()
        }
    }
}

/// `k_1 = q_1 − k(1,1)`, `k_x(ζ) = −k_z(1,ζ)`, `r_x(ζ) = −k_vᵀ q(ζ)`.
pub fn assemble_gains(
    kernel: &TriangularKernel,
    decoupling: &DecouplingSolution,
    q1: f64,
    k_v: &DVector<f64>,
    b_y: &DVector<f64>,
    s: &DMatrix<f64>,
    mu_c: f64,
) -> Result<RegulatorGains> {
    let m = kernel.intervals();
    if decoupling.intervals() != m {
        return Err(Error::GridMismatch {
            expected: m + 1,
            found: decoupling.intervals() + 1,
        });
    }
    let n = s.nrows();
    if k_v.len() != n || b_y.len() != n || decoupling.q.nrows() != n {
        return Err(Error::InvalidArgument("gain dimensions disagree with the signal model".into()));
    }
    let r_x = (0..=m).map(|j| -k_v.dot(&decoupling.q.column(j))).collect();
    Ok(RegulatorGains {
        k_v: k_v.clone(),
        k_1: q1 - kernel.get(m, m),
        k_x: kernel.top_row_z_derivative().map(|v| -v),
        r_x: GridFunction::new(r_x)?,
        b_y: b_y.clone(),
        s: s.clone(),
        mu_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_kernel_and_decoupling() {
        let m = 32;
        let dec = DecouplingSolution {
            q_tilde: DMatrix::zeros(2, m + 1),
            q: DMatrix::zeros(2, m + 1),
            q_tilde_at_1: DVector::zeros(2),
        };
        let g = assemble_gains(
            &TriangularKernel::zeros(m),
            &dec,
            0.7,
            &DVector::from_element(2, 1.0),
            &DVector::from_element(2, 1.0),
            &DMatrix::zeros(2, 2),
            1.0,
        )
        .unwrap();
        assert_eq!(g.k_1, 0.7);
        assert_eq!(g.k_x.sup_norm(), 0.0);
        assert_eq!(g.r_x.sup_norm(), 0.0);
    }

    #[test]
    fn z_derivative_is_exact_on_quadratics() {
        let m = 32;
        let k = TriangularKernel::from_fn(m, |z, s| z * z - 2.0 * z * s + 0.5 * s);
        let dz = k.top_row_z_derivative();
        for (j, v) in dz.values().iter().enumerate() {
            let s = j as f64 / m as f64;
            assert!((v - (2.0 - 2.0 * s)).abs() < 1e-10, "column {j}");
        }
    }
}
