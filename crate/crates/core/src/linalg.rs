//! Small dense linear-algebra helpers shared by the synthesis modules.
//!
//! All matrices in this problem class are small (the signal-model dimension
//! times the number of agents), so everything here is dense and direct.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Largest real part over the spectrum of `m`.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    eigenvalues(m)
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_hurwitz(m: &DMatrix<f64>) -> bool {
    spectral_abscissa(m) < 0.0
}

/// Numerical rank from singular values with threshold `rel_tol · σ_max`.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Kalman controllability matrix `[b, Sb, …, S^{n−1}b]`.
pub fn controllability_matrix(s: &DMatrix<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let mut k = DMatrix::zeros(n, n);
    let mut col = b.clone();
    for j in 0..n {
        k.set_column(j, &col);
        col = s * &col;
    }
    k
}

/// Smallest normalized PBH margin `min_λ σ_min([S − λI, g]) / ‖[S, g]‖` over `λ ∈ σ(S)`.
pub fn pbh_margin(s: &DMatrix<f64>, g: &DVector<f64>) -> f64 {
    let n = s.nrows();
    let scale = s.norm().max(g.norm()).max(f64::MIN_POSITIVE);
    let mut margin = f64::INFINITY;
    for lambda in eigenvalues(s) {
        let mut m = DMatrix::<C64>::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = C64::new(s[(i, j)], 0.0);
            }
            m[(i, i)] -= lambda;
            m[(i, n)] = C64::new(g[i], 0.0);
        }
        let sv = m.svd(false, false).singular_values;
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        margin = margin.min(smin / scale);
    }
    margin
}

/// Solves `A X + X B = C` by Kronecker vectorization.
pub fn solve_sylvester(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (m, n) = (a.nrows(), b.nrows());
    if c.shape() != (m, n) {
        return Err(Error::InvalidArgument(format!(
            "Sylvester right-hand side is {:?}, expected ({m}, {n})",
            c.shape()
        )));
    }
    // vec(AX) = (I ⊗ A) vec X, vec(XB) = (Bᵀ ⊗ I) vec X (column-major vec).
    let op = kron(&DMatrix::identity(n, n), a) + kron(&b.transpose(), &DMatrix::identity(m, m));
    let rhs = DVector::from_column_slice(c.as_slice());
    let x = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("Sylvester operator is singular (σ(A) ∩ σ(−B) ≠ ∅)".into()))?;
    Ok(DMatrix::from_column_slice(m, n, x.as_slice()))
}

/// Solves the Lyapunov equation `Aᵀ X + X A = −C`.
pub fn solve_lyapunov(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let x = solve_sylvester(&a.transpose(), a, &(-c))?;
    Ok(symmetrize(&x))
}

pub fn symmetrize(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x + x.transpose()) * 0.5
}

/// Matrix exponential `e^{A t}`.
pub fn expm(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    (a * t).exp()
}

/// Band matrix with `kl` sub- and `ku` super-diagonals, solved by LU with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // Row-major storage of each row's window [i − kl, i + kl + ku]; the extra
    // `kl` columns on the right absorb fill-in from row swaps.
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.kl + self.ku {
            0.0
        } else {
            self.data[self.slot(i, j)]
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Solves `A x = b` for several right-hand sides (columns of `b`), consuming `self`.
    pub fn solve(mut self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.n;
        assert_eq!(b.nrows(), n);
        let mut x = b.clone();
        let (kl, ku) = (self.kl, self.ku);
        let last_col = |i: usize| (i + kl + ku).min(n - 1);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let rmax = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=rmax {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= 1e-14 * scale {
                return Err(Error::SingularSystem(format!("band LU pivot vanishes at row {k}")));
            }
            if p != k {
                for j in k..=last_col(k) {
                    let (a, c) = (self.get(k, j), self.get(p, j));
                    self.set(k, j, c);
                    self.set(p, j, a);
                }
                x.swap_rows(k, p);
            }
            let pivot = self.get(k, k);
            for r in k + 1..=rmax {
                let f = self.get(r, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                self.set(r, k, 0.0);
                for j in k + 1..=last_col(k) {
                    let v = self.get(r, j) - f * self.get(k, j);
                    self.set(r, j, v);
                }
                for c in 0..x.ncols() {
                    let v = x[(r, c)] - f * x[(k, c)];
                    x[(r, c)] = v;
                }
            }
        }
        for k in (0..n).rev() {
            for c in 0..x.ncols() {
                let mut s = x[(k, c)];
                for j in k + 1..=last_col(k) {
                    s -= self.get(k, j) * x[(j, c)];
                }
                x[(k, c)] = s / self.get(k, k);
            }
        }
        Ok(x)
    }
}

/// Thomas algorithm for a tridiagonal system; `lower[0]` and `upper[n−1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::SingularStep { row: 0 });
    }
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::SingularStep { row: i });
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identity_is_block_diagonal() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let k = kron(&DMatrix::identity(2, 2), &j);
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        );
        assert_eq!(k, expected);
    }

    #[test]
    fn sylvester_solution_satisfies_equation() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 0.0, -3.0]);
        let b = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.0, 2.0, 0.1, 0.3, 0.0, 4.0]);
        let c = DMatrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64 - 1.0);
        let x = solve_sylvester(&a, &b, &c).unwrap();
        assert!((&a * &x + &x * &b - &c).norm() < 1e-12);
    }

    #[test]
    fn band_solver_matches_dense_lu() {
        let n = 12;
        let (kl, ku) = (2, 3);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // small diagonal forces pivoting
                let v = if i == j { 0.01 * (i as f64 + 1.0) } else { ((3 * i + 7 * j) % 5) as f64 - 2.0 };
                band.add(i, j, v);
                dense[(i, j)] = v;
            }
        }
        let b = DMatrix::from_fn(n, 2, |i, c| (i as f64).sin() + c as f64);
        let xb = band.solve(&b).unwrap();
        let xd = dense.lu().solve(&b).unwrap();
        assert!((xb - xd).norm() < 1e-10);
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [0.0, -1.0, -1.0, -1.0];
        let diag = [2.0, 2.5, 2.0, 3.0];
        let upper = [-1.0, -0.5, -1.0, 0.0];
        let mut rhs = [1.0, 2.0, 3.0, 4.0];
        let dense = DMatrix::from_row_slice(
            4,
            4,
            &[2.0, -1.0, 0.0, 0.0, -1.0, 2.5, -0.5, 0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0, -1.0, 3.0],
        );
        let x = dense.lu().solve(&DVector::from_row_slice(&rhs)).unwrap();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs).unwrap();
        for i in 0..4 {
            assert!((x[i] - rhs[i]).abs() < 1e-13);
        }
    }
}
