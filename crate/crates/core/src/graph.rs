//! Weighted communication digraphs and the matrices derived from them.
//!
//! An entry `a_ij > 0` of the adjacency matrix means agent `i` receives
//! information from agent `j`; `leader_links[i] = a_i0 > 0` means agent `i`
//! observes the reference (leader, node 0) directly.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Eigenvalues closer than this to the origin count as zero.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;

/// Weighted digraph over `N` agents plus the links from the leader.
#[derive(Debug, Clone, PartialEq)]
pub struct CommTopology {
    adjacency: DMatrix<f64>,
    leader_links: DVector<f64>,
}

impl CommTopology {
    pub fn new(adjacency: DMatrix<f64>, leader_links: DVector<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 || adjacency.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "adjacency must be square and nonempty, got {}x{}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        if leader_links.len() != n {
            return Err(Error::InvalidArgument(format!(
                "leader_links has {} entries for {n} agents",
                leader_links.len()
            )));
        }
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!("a_{i}{i} must be zero")));
            }
        }
        if adjacency.iter().chain(leader_links.iter()).any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("edge weights must be finite and nonnegative".into()));
        }
        Ok(CommTopology {
            adjacency,
            leader_links,
        })
    }

    pub fn from_rows(adjacency: &[Vec<f64>], leader_links: &[f64]) -> Result<Self> {
        let n = adjacency.len();
        if adjacency.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidArgument("adjacency rows must all have N entries".into()));
        }
        let flat: Vec<f64> = adjacency.iter().flatten().copied().collect();
        Self::new(
            DMatrix::from_row_slice(n, n, &flat),
            DVector::from_column_slice(leader_links),
        )
    }

    /// Same follower graph with every leader link removed.
    pub fn without_leader(&self) -> Self {
        CommTopology {
            adjacency: self.adjacency.clone(),
            leader_links: DVector::zeros(self.n_agents()),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn leader_links(&self) -> &DVector<f64> {
        &self.leader_links
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    pub fn has_leader(&self) -> bool {
        self.leader_links.iter().any(|&w| w > 0.0)
    }
}

/// `L_G`, `H = L_G + diag(leader_links)` and the degree matrix `D_G`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMatrices {
    pub laplacian: DMatrix<f64>,
    pub leader_follower: DMatrix<f64>,
    pub degree: DMatrix<f64>,
}

pub fn laplacian(topology: &CommTopology) -> GraphMatrices {
    let a = topology.adjacency();
    let n = topology.n_agents();
    let degree = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| a.row(i).sum()));
    let laplacian = &degree - a;
    let leader_follower = &laplacian + DMatrix::from_diagonal(topology.leader_links());
    GraphMatrices {
        laplacian,
        leader_follower,
        degree,
    }
}

/// Reachability test by breadth-first search.
///
/// With `with_root_zero`, every agent must be reachable from the leader
/// (node 0). Otherwise some agent must reach all the others.
pub fn is_connected(topology: &CommTopology, with_root_zero: bool) -> bool {
    let n = topology.n_agents();
    // out[j] lists the agents that receive from j
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if topology.weight(i, j) > 0.0 {
                out[j].push(i);
            }
        }
    }
    let reach_all = |starts: &[usize]| {
        let mut seen = vec![false; n];
        let mut queue: VecDeque<usize> = starts.iter().copied().collect();
        for &s in starts {
            seen[s] = true;
        }
        while let Some(j) = queue.pop_front() {
            for &i in &out[j] {
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(i);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    if with_root_zero {
        let informed: Vec<usize> = (0..n).filter(|&i| topology.leader_links()[i] > 0.0).collect();
        !informed.is_empty() && reach_all(&informed)
    } else {
        (0..n).any(|root| reach_all(&[root]))
    }
}

/// `Θ`, and the blocks `l̃₁₂ᵀ`, `L̃₂₂` of `Θ L_G Θ⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaDecomposition {
    pub theta: DMatrix<f64>,
    pub theta_inv: DMatrix<f64>,
    pub l12: DVector<f64>,
    pub l22: DMatrix<f64>,
}

impl ThetaDecomposition {
    /// `H̃ = Θ⁻¹ [l̃₁₂ᵀ; L̃₂₂]`, an `N × (N−1)` matrix.
    pub fn h_tilde(&self) -> DMatrix<f64> {
        let n = self.theta.nrows();
        let mut stacked = DMatrix::zeros(n, n - 1);
        stacked.row_mut(0).copy_from(&self.l12.transpose());
        stacked.rows_mut(1, n - 1).copy_from(&self.l22);
        &self.theta_inv * stacked
    }
}

pub fn theta_matrix(n: usize) -> DMatrix<f64> {
    let mut theta = DMatrix::identity(n, n);
    for i in 1..n {
        theta[(i, 0)] = -1.0;
    }
    theta
}

pub fn theta_decompose(laplacian: &DMatrix<f64>) -> Result<ThetaDecomposition> {
    let n = laplacian.nrows();
    if n < 2 || laplacian.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "Θ-decomposition needs a square matrix with N ≥ 2, got {}x{}",
            laplacian.nrows(),
            laplacian.ncols()
        )));
    }
    let theta = theta_matrix(n);
    let mut theta_inv = DMatrix::identity(n, n);
    for i in 1..n {
        theta_inv[(i, 0)] = 1.0;
    }
    let transformed = &theta * laplacian * &theta_inv;
    let scale = laplacian.amax().max(1.0);
    let residual = (0..n).map(|i| transformed[(i, 0)].abs()).fold(0.0, f64::max);
    if residual > 1e-12 * scale {
        return Err(Error::BlockStructureViolation { residual });
    }
    Ok(ThetaDecomposition {
        l12: DVector::from_iterator(n - 1, (1..n).map(|j| transformed[(0, j)])),
        l22: transformed.view((1, 1), (n - 1, n - 1)).into_owned(),
        theta,
        theta_inv,
    })
}

/// `min Re λ` over the spectrum of `m`.
pub fn min_real_eigenvalue(m: &DMatrix<f64>) -> f64 {
    linalg::eigenvalues(m)
        .iter()
        .map(|l| l.re)
        .fold(f64::INFINITY, f64::min)
}

/// Like [`min_real_eigenvalue`], but fails with `NonPositiveBound` when the
/// bound is not strictly positive.
pub fn spectral_lower_bound(m: &DMatrix<f64>) -> Result<f64> {
    let bound = min_real_eigenvalue(m);
    if bound <= ZERO_EIGENVALUE_TOL {
        return Err(Error::NonPositiveBound { bound });
    }
    Ok(bound)
}

pub use linalg::kron;
