//! Scalar invariants of (would-be) Hadamard matrices: determinant and
//! entrywise p-norm bounds, the excess and bistochastic forms, and Haar
//! averages of the 1-norm over the orthogonal group.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::exec::{self, Exec};
use crate::matrix::{verify_hadamard, CMat, UnimodularMatrix};
use crate::{Result, TOL_GRAM};

/// `|det H|` against the Hadamard bound `N^{N/2}`.
#[derive(Clone, Copy, Debug)]
pub struct DetReport {
    pub modulus: f64,
    pub bound: f64,
    pub extremal: bool,
}

/// Determinant modulus of a square unit-modulus matrix; the bound is
/// attained exactly by Hadamard matrices.
pub fn det_report(h: &UnimodularMatrix) -> Result<DetReport> {
    if h.rows() != h.cols() {
        return Err(Error::dim("determinant needs a square matrix"));
    }
    let n = h.rows() as f64;
    let modulus = h.cmat().to_na().determinant().norm();
    let bound = n.powf(n / 2.0);
    Ok(DetReport {
        modulus,
        bound,
        extremal: (modulus - bound).abs() <= 1e-6 * bound.max(1.0),
    })
}

/// Entrywise p-norm of a unitary-scale matrix against `N^{2/p - 1/2}`.
#[derive(Clone, Copy, Debug)]
pub struct NormReport {
    pub p: f64,
    pub value: f64,
    pub bound: f64,
    /// For `p < 2` the bound is an upper bound, for `p > 2` a lower bound.
    pub extremal: bool,
}

/// Entrywise p-norm report for a rescaled matrix `U = H/√N`. For
/// `p ∈ [1,2)` the norm is at most `N^{2/p-1/2}`, for `p ∈ (2,∞]` at
/// least, with equality in all cases exactly when all entries have
/// modulus `1/√N`.
pub fn p_norm_report(u: &CMat, p: f64) -> Result<NormReport> {
    if u.rows() != u.cols() {
        return Err(Error::dim("p-norm report needs a square matrix"));
    }
    if !(p >= 1.0) {
        return Err(Error::validation(format!("exponent must be at least 1, got {p}")));
    }
    let n = u.rows() as f64;
    let (value, bound) = if p.is_infinite() {
        (u.max_abs(), n.powf(-0.5))
    } else {
        let sum: f64 = u.data().iter().map(|z| z.norm().powf(p)).sum();
        (sum.powf(1.0 / p), n.powf(2.0 / p - 0.5))
    };
    Ok(NormReport {
        p,
        value,
        bound,
        extremal: (value - bound).abs() <= 1e-8 * bound.max(1.0),
    })
}

/// The excess `E(H) = Σ_ij H_ij` and the row/column sum profile.
#[derive(Clone, Debug)]
pub struct ExcessReport {
    pub excess: C64,
    pub modulus: f64,
    /// `N√N`; attained exactly by bistochastic matrices.
    pub bound: f64,
    pub row_sums: Vec<C64>,
    pub col_sums: Vec<C64>,
    pub bistochastic: bool,
    /// Common row and column sum when bistochastic.
    pub lambda: Option<C64>,
}

fn row_sums(m: &CMat) -> Vec<C64> {
    (0..m.rows())
        .map(|i| m.row(i).iter().sum())
        .collect()
}

fn col_sums(m: &CMat) -> Vec<C64> {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m[(i, j)]).sum())
        .collect()
}

/// Excess report; `tol` is the absolute tolerance on sum comparisons.
pub fn excess_report(h: &UnimodularMatrix, tol: f64) -> Result<ExcessReport> {
    if h.rows() != h.cols() {
        return Err(Error::dim("excess needs a square matrix"));
    }
    let n = h.rows() as f64;
    let rows = row_sums(h.cmat());
    let cols = col_sums(h.cmat());
    let excess: C64 = rows.iter().sum();
    let lambda = rows[0];
    let stochastic = rows.iter().chain(cols.iter()).all(|s| (s - lambda).norm() <= tol);
    let bistochastic = stochastic && (lambda.norm_sqr() - n).abs() <= tol * n;
    Ok(ExcessReport {
        excess,
        modulus: excess.norm(),
        bound: n * n.sqrt(),
        row_sums: rows,
        col_sums: cols,
        bistochastic,
        lambda: bistochastic.then_some(lambda),
    })
}

/// Whether all row and column sums agree and have squared modulus `N`.
/// For a Hadamard matrix, row-stochasticity with `|λ|² = N` already
/// forces column-stochasticity.
pub fn bistochastic_check(h: &UnimodularMatrix, tol: f64) -> Result<(bool, Option<C64>)> {
    let report = excess_report(h, tol)?;
    Ok((report.bistochastic, report.lambda))
}

/// Outcome of the alternating-phase search for a bistochastic form.
#[derive(Clone, Debug)]
pub struct BistochasticSearch {
    /// Row phases of the best equivalent found.
    pub a: Vec<C64>,
    /// Column phases of the best equivalent found.
    pub b: Vec<C64>,
    /// Largest excess modulus reached.
    pub achieved: f64,
    /// `N√N`, the value certifying a bistochastic form.
    pub bound: f64,
    /// Whether `achieved` is within `tol` of the bound.
    pub converged: bool,
}

impl BistochasticSearch {
    /// The rephased matrix `K_ij = a_i b_j H_ij` realizing `achieved`.
    pub fn apply(&self, h: &UnimodularMatrix) -> Result<UnimodularMatrix> {
        UnimodularMatrix::from_fn(h.rows(), h.cols(), |i, j| self.a[i] * self.b[j] * h[(i, j)])
    }
}

fn unit_or_one(z: C64) -> C64 {
    let r = z.norm();
    if r <= 1e-14 {
        C64::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// Search for phase vectors `a, b` maximizing `|Σ_ij a_i b_j H_ij|` by
/// alternating exact coordinate maximization: for fixed `b` the optimum is
/// `a_i = unit((Hb)_i)^*`, and symmetrically for `b`. The excess is
/// nondecreasing along iterations, so each restart converges to a local
/// maximum; restarts are seeded independently.
pub fn bistochastic_search(
    h: &UnimodularMatrix,
    restarts: u32,
    iters: u32,
    tol: f64,
    seed: u64,
) -> Result<BistochasticSearch> {
    use rand::Rng;
    if h.rows() != h.cols() {
        return Err(Error::dim("bistochastic search needs a square matrix"));
    }
    let n = h.rows();
    let bound = (n as f64) * (n as f64).sqrt();
    let m = h.cmat();
    let mt = m.transpose();
    let matvec = |m: &CMat, v: &[C64]| -> Vec<C64> {
        (0..n)
            .map(|i| m.row(i).iter().zip(v).map(|(x, y)| x * y).sum())
            .collect()
    };
    let mut best: Option<BistochasticSearch> = None;
    for restart in 0..restarts {
        let mut rng = exec::stream_rng(seed, restart as u64);
        let mut b: Vec<C64> = (0..n)
            .map(|_| crate::matrix::phase(rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let mut a = vec![C64::new(1.0, 0.0); n];
        let mut achieved = 0.0f64;
        for _ in 0..iters {
            let hb = matvec(m, &b);
            for i in 0..n {
                a[i] = unit_or_one(hb[i]).conj();
            }
            let ha = matvec(&mt, &a);
            for j in 0..n {
                b[j] = unit_or_one(ha[j]).conj();
            }
            let now: f64 = matvec(m, &b).iter().zip(&a).map(|(x, y)| (x * y).re).sum();
            if (now - achieved).abs() < tol {
                achieved = now;
                break;
            }
            achieved = now;
        }
        if best.as_ref().is_none_or(|s| achieved > s.achieved) {
            best = Some(BistochasticSearch {
                a: a.clone(),
                b: b.clone(),
                achieved,
                bound,
                converged: (bound - achieved).abs() <= tol * bound,
            });
        }
        if best.as_ref().is_some_and(|s| s.converged) {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Rephased Fourier self-deformation with parameter matrix `Q`, built so
/// that every row sum lands on the circle of radius `N`: entry at row
/// `(i,a)`, column `(j,b)` is `w^{ij+ab-bj-j} Q_{ib} / Q_{b+1,b}` with
/// `w = e^{2πi/N}`. The output is equivalent to the plain deformation
/// `(i,a),(j,b) -> w^{ij+ab} Q_{ib}`.
pub fn dita_bistochastic_form(n: usize, q: &UnimodularMatrix) -> Result<UnimodularMatrix> {
    if n < 2 {
        return Err(Error::dim("need size at least 2"));
    }
    if q.rows() != n || q.cols() != n {
        return Err(Error::dim(format!(
            "parameter matrix must be {n}x{n}, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    let w = |e: i64| crate::matrix::root_of_unity(e, n as u32);
    let size = n * n;
    let out = UnimodularMatrix::from_fn(size, size, |r, c| {
        let (i, a) = ((r / n) as i64, (r % n) as i64);
        let (j, b) = (c / n, c % n);
        let (ji, bi) = (j as i64, b as i64);
        w(i * ji + a * bi - bi * ji - ji) * q[(i as usize, b)] / q[((b + 1) % n, b)]
    })?;
    let report = verify_hadamard(&out, TOL_GRAM)?;
    if !report.is_hadamard {
        return Err(Error::validation("rephased deformation failed verification"));
    }
    for s in row_sums(out.cmat()) {
        if (s.norm() - n as f64).abs() > 1e-8 * size as f64 {
            return Err(Error::validation(format!(
                "row sum modulus {} is off the circle of radius {n}",
                s.norm()
            )));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Haar averages on the orthogonal group
// ---------------------------------------------------------------------------

/// Exact Haar average of the entrywise 1-norm over the orthogonal group:
/// `N² ∫ |U_11|`, with the entry integral evaluated in closed form,
/// `4^M/(πM) C(2M,M)^{-1}` at `N = 2M` and `4^{-M} C(2M,M)` at `N = 2M+1`.
pub fn exact_onenorm_average(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::dim("need size at least 2"));
    }
    let m = n / 2;
    let mut binom = 1.0f64; // C(2M, M)
    for k in 1..=m {
        binom *= (m + k) as f64 / k as f64;
    }
    let entry = if n % 2 == 0 {
        4f64.powi(m as i32) / (std::f64::consts::PI * m as f64) / binom
    } else {
        binom / 4f64.powi(m as i32)
    };
    Ok((n * n) as f64 * entry)
}

/// One Haar-orthogonal sample: QR of a Gaussian matrix with the R-diagonal
/// sign fixed.
fn haar_orthogonal(n: usize, rng: &mut impl rand::Rng) -> nalgebra::DMatrix<f64> {
    use std::f64::consts::TAU;
    let gauss = nalgebra::DMatrix::from_fn(n, n, |_, _| {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..TAU);
        (-2.0 * u1.ln()).sqrt() * u2.cos()
    });
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Monte Carlo mean and standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        McEstimate {
            mean,
            stderr: (var / n).sqrt(),
            samples: values.len() as u64,
        }
    }
}

/// Monte Carlo Haar average of the 1-norm over the orthogonal group.
/// Sample `i` draws from its own seed stream, so the estimate is
/// bit-identical across execution modes and worker counts.
pub fn haar_onenorm_average(n: usize, samples: u64, seed: u64, exec: Exec) -> Result<McEstimate> {
    if n < 2 {
        return Err(Error::dim("need size at least 2"));
    }
    if samples == 0 {
        return Err(Error::validation("need at least one sample"));
    }
    let values = exec::map_collect(exec, samples as usize, |i| {
        let mut rng = exec::stream_rng(seed, i as u64);
        haar_orthogonal(n, &mut rng).iter().map(|v| v.abs()).sum::<f64>()
    });
    Ok(McEstimate::from_values(&values))
}
