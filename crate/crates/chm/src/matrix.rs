//! Matrix carriers, Hadamard verification, the equivalence relation, and
//! tensor/Diță products.
//!
//! Two carriers coexist: [`CMat`] is a plain dense complex matrix used by
//! every module, and [`UnimodularMatrix`] wraps one whose entries all lie
//! on the unit circle (checked at construction). Matrices whose entries
//! are roots of unity of a fixed order get the exact carrier
//! [`ButsonMatrix`], on which orthogonality is decided with integer
//! arithmetic only.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::Serialize;

use crate::cyclotomic;
use crate::error::Error;
use crate::Result;
use crate::{TOL_ENTRY, TOL_GRAM};

pub type C64 = Complex64;

pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// `e^{iθ}`.
pub fn phase(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// `e^{2πi k/l}`, the `k`-th power of the standard primitive `l`-th root.
pub fn root_of_unity(k: i64, l: u32) -> C64 {
    let k = k.rem_euclid(l as i64);
    phase(TAU * k as f64 / l as f64)
}

// ---------------------------------------------------------------------------
// CMat
// ---------------------------------------------------------------------------

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        CMat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::dim("matrix needs at least one row"));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::dim("ragged rows"));
        }
        Ok(CMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Real matrix promoted entrywise.
    pub fn from_real(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| s * z)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }

    /// Kronecker product in the lexicographic double-index convention:
    /// `(A ⊗ B)_{ia,jb} = A_{ij} B_{ab}` with row index `i·rows(B) + a`.
    pub fn kron(&self, rhs: &CMat) -> CMat {
        CMat::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |r, c| {
            let (i, a) = (r / rhs.rows, r % rhs.rows);
            let (j, b) = (c / rhs.cols, c % rhs.cols);
            self[(i, j)] * rhs[(a, b)]
        })
    }

    /// `⟨row_i, row_j⟩ = Σ_k M_{ik} conj(M_{jk})`.
    pub fn row_inner(&self, i: usize, j: usize) -> C64 {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(&a, &b)| a * b.conj())
            .sum()
    }

    pub fn col_inner(&self, i: usize, j: usize) -> C64 {
        (0..self.rows).map(|k| self[(k, i)] * self[(k, j)].conj()).sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max_{ij} |A_{ij} - B_{ij}|`.
    pub fn max_diff(&self, rhs: &CMat) -> f64 {
        self.sub(rhs).max_abs()
    }

    /// `max_{ij} |A_{ij} - conj(A_{ji})|`.
    pub fn hermitian_error(&self) -> f64 {
        self.max_diff(&self.adjoint())
    }

    pub fn to_na(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    pub fn from_na(m: &nalgebra::DMatrix<C64>) -> Self {
        CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// UnimodularMatrix
// ---------------------------------------------------------------------------

/// Rectangular matrix all of whose entries lie on the unit circle.
#[derive(Clone, PartialEq, Debug)]
pub struct UnimodularMatrix {
    mat: CMat,
}

impl UnimodularMatrix {
    /// Validates `| |entry| - 1 | ≤ TOL_ENTRY` for every entry.
    pub fn new(mat: CMat) -> Result<Self> {
        let worst = mat
            .data()
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if worst > TOL_ENTRY {
            return Err(Error::validation(format!(
                "entry modulus deviates from 1 by {worst:.3e} (tolerance {TOL_ENTRY:.0e})"
            )));
        }
        Ok(UnimodularMatrix { mat })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(CMat::from_fn(rows, cols, f))
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        Self::new(CMat::from_rows(rows)?)
    }

    /// Sign/real matrix promoted entrywise; every entry must be `±1`.
    pub fn from_real(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(CMat::from_real(rows)?)
    }

    pub fn cmat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_cmat(self) -> CMat {
        self.mat
    }

    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    pub fn row(&self, i: usize) -> &[C64] {
        self.mat.row(i)
    }

    /// The rescaling `H/√N ∈ U_N` (unitary when `H` is Hadamard).
    pub fn rescaled(&self) -> CMat {
        self.mat.scale(C64::new(1.0 / (self.cols() as f64).sqrt(), 0.0))
    }
}

impl Index<(usize, usize)> for UnimodularMatrix {
    type Output = C64;
    fn index(&self, ij: (usize, usize)) -> &C64 {
        &self.mat[ij]
    }
}

// ---------------------------------------------------------------------------
// ButsonMatrix
// ---------------------------------------------------------------------------

/// Matrix of `l`-th roots of unity stored as exponents, `entry = w^k` with
/// `w = e^{2πi/l}`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ButsonMatrix {
    rows: usize,
    cols: usize,
    level: u32,
    exponents: Vec<u32>,
}

impl ButsonMatrix {
    pub fn new(rows: usize, cols: usize, level: u32, exponents: Vec<u32>) -> Result<Self> {
        if level < 2 {
            return Err(Error::validation("level must be at least 2"));
        }
        if exponents.len() != rows * cols {
            return Err(Error::dim("exponent count does not match shape"));
        }
        let exponents = exponents.into_iter().map(|k| k % level).collect();
        Ok(ButsonMatrix { rows, cols, level, exponents })
    }

    pub fn from_fn(rows: usize, cols: usize, level: u32, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let exponents = (0..rows * cols).map(|k| f(k / cols, k % cols) % level).collect();
        ButsonMatrix { rows, cols, level, exponents }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn exponent(&self, i: usize, j: usize) -> u32 {
        self.exponents[i * self.cols + j]
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn to_unimodular(&self) -> UnimodularMatrix {
        UnimodularMatrix::from_fn(self.rows, self.cols, |i, j| {
            root_of_unity(self.exponent(i, j) as i64, self.level)
        })
        .expect("roots of unity are unimodular")
    }

    /// Per-pair scalar product as a root multiset: entry `k` counts the
    /// columns where the exponent difference of rows `i, j` is `k`.
    pub fn pair_counts(&self, i: usize, j: usize) -> Vec<i64> {
        let mut counts = vec![0i64; self.level as usize];
        for t in 0..self.cols {
            let d = (self.exponent(i, t) + self.level - self.exponent(j, t)) % self.level;
            counts[d as usize] += 1;
        }
        counts
    }

    /// Exact orthogonality of every row pair, decided by reduction modulo
    /// the `level`-th cyclotomic polynomial. No floating point.
    pub fn verify_exact(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i + 1..self.rows {
                if !cyclotomic::vanishes(&self.pair_counts(i, j), self.level) {
                    return false;
                }
            }
        }
        true
    }
}

/// Exact Butson verification; errors on non-square input.
pub fn verify_butson_exact(b: &ButsonMatrix) -> Result<bool> {
    if b.rows() != b.cols() {
        return Err(Error::dim(format!("{}x{} matrix is not square", b.rows(), b.cols())));
    }
    Ok(b.verify_exact())
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Outcome of a Hadamard check: worst row/column Gram deviations and worst
/// modulus deviation, with the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub n: usize,
    pub max_row_gram_error: f64,
    pub max_col_gram_error: f64,
    pub max_modulus_error: f64,
    pub is_hadamard: bool,
}

/// Checks pairwise row (and column) orthogonality of a square unimodular
/// matrix. Scalar products are compared against `tol·N`; moduli against
/// [`TOL_ENTRY`].
pub fn verify_hadamard(h: &UnimodularMatrix, tol: f64) -> Result<GramReport> {
    if h.rows() != h.cols() {
        return Err(Error::dim(format!("{}x{} matrix is not square", h.rows(), h.cols())));
    }
    Ok(gram_report(h.cmat(), tol))
}

/// [`verify_hadamard`] with the default tolerance.
pub fn is_hadamard(h: &UnimodularMatrix) -> bool {
    verify_hadamard(h, TOL_GRAM).map(|r| r.is_hadamard).unwrap_or(false)
}

/// Gram errors of an arbitrary square matrix (used internally where the
/// unimodular wrapper is not yet available).
pub fn gram_report(m: &CMat, tol: f64) -> GramReport {
    let n = m.rows();
    let mut row_err = 0.0f64;
    let mut col_err = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            row_err = row_err.max(m.row_inner(i, j).norm());
            col_err = col_err.max(m.col_inner(i, j).norm());
        }
    }
    let mod_err = m
        .data()
        .iter()
        .map(|z| (z.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    GramReport {
        n,
        max_row_gram_error: row_err,
        max_col_gram_error: col_err,
        max_modulus_error: mod_err,
        is_hadamard: row_err <= tol * n as f64
            && col_err <= tol * n as f64
            && mod_err <= TOL_ENTRY,
    }
}

// ---------------------------------------------------------------------------
// Equivalence moves
// ---------------------------------------------------------------------------

/// One element of the Hadamard equivalence groupoid: permutations of rows
/// and columns together with unit-scalar row and column multipliers.
///
/// Applying a move to `H` yields
/// `H'_{ij} = row_phases[i] · col_phases[j] · H[row_perm[i], col_perm[j]]`.
#[derive(Clone, Debug)]
pub struct EquivalenceMove {
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub row_phases: Vec<C64>,
    pub col_phases: Vec<C64>,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| {
        if i < p.len() && !seen[i] {
            seen[i] = true;
            true
        } else {
            false
        }
    })
}

impl EquivalenceMove {
    pub fn identity(rows: usize, cols: usize) -> Self {
        EquivalenceMove {
            row_perm: (0..rows).collect(),
            col_perm: (0..cols).collect(),
            row_phases: vec![ONE; rows],
            col_phases: vec![ONE; cols],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.row_perm.iter().enumerate().all(|(i, &p)| i == p)
            && self.col_perm.iter().enumerate().all(|(i, &p)| i == p)
            && self.row_phases.iter().all(|&z| (z - ONE).norm() < TOL_ENTRY)
            && self.col_phases.iter().all(|&z| (z - ONE).norm() < TOL_ENTRY)
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.row_perm.len() != rows || self.col_perm.len() != cols {
            return Err(Error::dim("move shape does not match matrix"));
        }
        if !is_permutation(&self.row_perm) || !is_permutation(&self.col_perm) {
            return Err(Error::validation("row/col maps are not permutations"));
        }
        let unim = |zs: &[C64]| zs.iter().all(|z| (z.norm() - 1.0).abs() <= TOL_ENTRY);
        if !unim(&self.row_phases) || !unim(&self.col_phases) {
            return Err(Error::validation("phases must be unimodular"));
        }
        Ok(())
    }

    pub fn apply(&self, h: &UnimodularMatrix) -> Result<UnimodularMatrix> {
        self.validate(h.rows(), h.cols())?;
        UnimodularMatrix::from_fn(h.rows(), h.cols(), |i, j| {
            self.row_phases[i] * self.col_phases[j] * h[(self.row_perm[i], self.col_perm[j])]
        })
    }

    /// The move undoing this one: apply ∘ inverse = identity on matrices.
    pub fn inverse(&self) -> Self {
        let rows = self.row_perm.len();
        let cols = self.col_perm.len();
        let mut row_perm = vec![0usize; rows];
        let mut col_perm = vec![0usize; cols];
        let mut row_phases = vec![ONE; rows];
        let mut col_phases = vec![ONE; cols];
        for i in 0..rows {
            row_perm[self.row_perm[i]] = i;
            row_phases[self.row_perm[i]] = self.row_phases[i].conj();
        }
        for j in 0..cols {
            col_perm[self.col_perm[j]] = j;
            col_phases[self.col_perm[j]] = self.col_phases[j].conj();
        }
        EquivalenceMove { row_perm, col_perm, row_phases, col_phases }
    }

    /// Uniformly random move (Fisher–Yates permutations, uniform phases).
    pub fn random(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> Self {
        fn perm(rng: &mut impl rand::Rng, n: usize) -> Vec<usize> {
            let mut p: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                p.swap(i, rng.gen_range(0..=i));
            }
            p
        }
        EquivalenceMove {
            row_perm: perm(rng, rows),
            col_perm: perm(rng, cols),
            row_phases: (0..rows).map(|_| phase(rng.gen_range(0.0..TAU))).collect(),
            col_phases: (0..cols).map(|_| phase(rng.gen_range(0.0..TAU))).collect(),
        }
    }
}

/// Normalizes the first row and column to 1 by phase multiplications only.
/// Returns the dephased matrix and the move realizing it.
pub fn dephase(h: &UnimodularMatrix) -> (UnimodularMatrix, EquivalenceMove) {
    let (rows, cols) = (h.rows(), h.cols());
    let col_phases: Vec<C64> = (0..cols).map(|j| h[(0, j)].conj()).collect();
    let row_phases: Vec<C64> = (0..rows).map(|i| h[(i, 0)].conj() * h[(0, 0)]).collect();
    let mv = EquivalenceMove {
        row_perm: (0..rows).collect(),
        col_perm: (0..cols).collect(),
        row_phases,
        col_phases,
    };
    let d = mv.apply(h).expect("dephasing move is valid by construction");
    (d, mv)
}

// ---------------------------------------------------------------------------
// Products
// ---------------------------------------------------------------------------

/// `(H ⊗ K)_{ia,jb} = H_{ij} K_{ab}`, lexicographic double indices.
/// Both factors must verify as Hadamard.
pub fn tensor(h: &UnimodularMatrix, k: &UnimodularMatrix) -> Result<UnimodularMatrix> {
    for (name, m) in [("left", h), ("right", k)] {
        if !verify_hadamard(m, TOL_GRAM)?.is_hadamard {
            return Err(Error::validation(format!("{name} tensor factor is not Hadamard")));
        }
    }
    UnimodularMatrix::new(h.cmat().kron(k.cmat()))
}

/// Which index of the parameter matrix rides along in a Diță deformation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DitaSide {
    /// `(H ⊗_Q K)_{ia,jb} = Q_{ib} H_{ij} K_{ab}`
    Right,
    /// `(H_Q ⊗ K)_{ia,jb} = Q_{ja} H_{ij} K_{ab}`
    Left,
}

/// Diță deformation of `H ⊗ K` by the unimodular parameter matrix
/// `Q ∈ M_{M×N}(𝕋)`, where `H` is `M×M` and `K` is `N×N`. The result is
/// verified Hadamard before being returned.
pub fn dita_deform(
    h: &UnimodularMatrix,
    k: &UnimodularMatrix,
    q: &UnimodularMatrix,
    side: DitaSide,
) -> Result<UnimodularMatrix> {
    let (m, n) = (h.rows(), k.rows());
    if q.rows() != m || q.cols() != n {
        return Err(Error::dim(format!(
            "parameter matrix must be {m}x{n}, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    for (name, mat) in [("left", h), ("right", k)] {
        if !verify_hadamard(mat, TOL_GRAM)?.is_hadamard {
            return Err(Error::validation(format!("{name} factor is not Hadamard")));
        }
    }
    let out = UnimodularMatrix::from_fn(m * n, m * n, |r, c| {
        let (i, a) = (r / n, r % n);
        let (j, b) = (c / n, c % n);
        let twist = match side {
            DitaSide::Right => q[(i, b)],
            DitaSide::Left => q[(j, a)],
        };
        twist * h[(i, j)] * k[(a, b)]
    })?;
    let report = verify_hadamard(&out, TOL_GRAM)?;
    if !report.is_hadamard {
        return Err(Error::validation(format!(
            "deformation failed verification (row gram error {:.3e})",
            report.max_row_gram_error
        )));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Fingerprint
// ---------------------------------------------------------------------------

/// Equivalence-invariant screening string.
///
/// The multiset of quadruple products `H_{ij} H_{kl} conj(H_{il}) conj(H_{kj})`
/// is unchanged by row/column permutations and phase multiplications: the
/// phases cancel in every quadruple and permutations only reorder the
/// multiset. Values are rounded to `digits` decimals, sorted, and hashed.
/// Equal fingerprints are therefore necessary for equivalence (and
/// inconclusive); unequal fingerprints certify inequivalence.
pub fn fingerprint(h: &UnimodularMatrix, digits: u32) -> Result<String> {
    if h.rows() != h.cols() {
        return Err(Error::dim("fingerprint requires a square matrix"));
    }
    let n = h.rows();
    let scale = 10f64.powi(digits as i32);
    let quantize = |x: f64| -> i64 {
        let r = (x * scale).round();
        if r == 0.0 {
            0
        } else {
            r as i64
        }
    };
    let mut quads: Vec<(i64, i64)> = Vec::with_capacity(n * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = h[(i, j)] * h[(k, l)] * h[(i, l)].conj() * h[(k, j)].conj();
                    quads.push((quantize(v.re), quantize(v.im)));
                }
            }
        }
    }
    quads.sort_unstable();
    let mut hash = Fnv64::new();
    hash.write_u64(n as u64);
    hash.write_u64(digits as u64);
    for (re, im) in quads {
        hash.write_u64(re as u64);
        hash.write_u64(im as u64);
    }
    Ok(format!("N{n}d{digits}-{:016x}", hash.finish()))
}

/// FNV-1a, fixed parameters: stable across runs and platforms (the std
/// hasher is randomly keyed per process, which would break report
/// determinism).
struct Fnv64(u64);

impl Fnv64 {
    fn new() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }

    fn write_u64(&mut self, x: u64) {
        for b in x.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

// ---------------------------------------------------------------------------
// Small builders used throughout the tests
// ---------------------------------------------------------------------------

/// The `N×N` Fourier matrix `(w^{ij})`, `w = e^{2πi/N}`, as a float matrix.
/// The exact exponent version lives in the constructions module.
pub fn fourier_unimodular(n: usize) -> UnimodularMatrix {
    UnimodularMatrix::from_fn(n, n, |i, j| root_of_unity((i * j) as i64, n as u32))
        .expect("Fourier entries are unimodular")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> UnimodularMatrix {
        UnimodularMatrix::from_real(vec![vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()
    }

    fn w4() -> UnimodularMatrix {
        UnimodularMatrix::from_real(vec![
            vec![1.0, 1.0, 1.0, 1.0],
            vec![1.0, -1.0, 1.0, -1.0],
            vec![1.0, 1.0, -1.0, -1.0],
            vec![1.0, -1.0, -1.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn fourier_2_and_3_verify() {
        assert!(is_hadamard(&f2()));
        assert!(is_hadamard(&fourier_unimodular(3)));
    }

    #[test]
    fn rank_one_matrix_fails_with_gram_error_two() {
        let ones = UnimodularMatrix::from_real(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let report = verify_hadamard(&ones, TOL_GRAM).unwrap();
        assert!(!report.is_hadamard);
        assert!((report.max_row_gram_error - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_square_verification_is_a_dimension_error() {
        let m = UnimodularMatrix::from_real(vec![vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(matches!(verify_hadamard(&m, TOL_GRAM), Err(Error::Dimension(_))));
    }

    #[test]
    fn butson_fourier_4_is_exactly_hadamard() {
        let b = ButsonMatrix::from_fn(4, 4, 4, |i, j| ((i * j) % 4) as u32);
        assert!(verify_butson_exact(&b).unwrap());
    }

    #[test]
    fn butson_rank_deficient_candidate_fails() {
        let b = ButsonMatrix::new(3, 3, 3, vec![0, 0, 0, 0, 1, 1, 0, 2, 2]).unwrap();
        assert!(!verify_butson_exact(&b).unwrap());
    }

    #[test]
    fn butson_agrees_with_float_verification() {
        use rand::Rng;
        for (n, l) in [(4usize, 4u32), (6, 3), (6, 6)] {
            let mut rng = crate::exec::stream_rng(5, (n as u64) << 8 | l as u64);
            for _ in 0..100 {
                let b = ButsonMatrix::from_fn(n, n, l, |_, _| rng.gen_range(0..l));
                let exact = b.verify_exact();
                let float = verify_hadamard(&b.to_unimodular(), 1e-8)
                    .unwrap()
                    .is_hadamard;
                assert_eq!(exact, float);
            }
        }
    }

    #[test]
    fn dephase_fixes_dephased_input() {
        let f3 = fourier_unimodular(3);
        let (d, mv) = dephase(&f3);
        assert_eq!(d, f3);
        assert!(mv.is_identity());
    }

    #[test]
    fn dephase_undoes_row_phases() {
        let i = C64::new(0.0, 1.0);
        let phased = UnimodularMatrix::from_rows(vec![
            vec![i, i],
            vec![ONE, -ONE],
        ])
        .unwrap();
        let (d, _) = dephase(&phased);
        assert!(d.cmat().max_diff(f2().cmat()) < 1e-12);
    }

    #[test]
    fn dephase_is_idempotent() {
        let mut rng = crate::exec::stream_rng(17, 0);
        let mv = EquivalenceMove::random(&mut rng, 4, 4);
        let h = mv.apply(&w4()).unwrap();
        let (d1, _) = dephase(&h);
        let (d2, mv2) = dephase(&d1);
        assert!(mv2.is_identity());
        assert!(d1.cmat().max_diff(d2.cmat()) < 1e-12);
    }

    #[test]
    fn move_apply_then_inverse_is_identity() {
        let mut rng = crate::exec::stream_rng(3, 0);
        for _ in 0..20 {
            let mv = EquivalenceMove::random(&mut rng, 5, 5);
            let h = fourier_unimodular(5);
            let back = mv.inverse().apply(&mv.apply(&h).unwrap()).unwrap();
            assert!(back.cmat().max_diff(h.cmat()) < 1e-12);
        }
    }

    #[test]
    fn moves_preserve_the_hadamard_property() {
        let mut rng = crate::exec::stream_rng(4, 0);
        for _ in 0..20 {
            let mv = EquivalenceMove::random(&mut rng, 4, 4);
            let h = mv.apply(&w4()).unwrap();
            assert!(is_hadamard(&h));
        }
    }

    #[test]
    fn tensor_of_fourier_2_with_itself_is_walsh_4() {
        let t = tensor(&f2(), &f2()).unwrap();
        assert_eq!(t, w4());
    }

    #[test]
    fn tensor_of_hadamards_is_hadamard() {
        let t = tensor(&f2(), &fourier_unimodular(3)).unwrap();
        assert_eq!(t.rows(), 6);
        assert!(is_hadamard(&t));
        let t8 = tensor(&w4(), &f2()).unwrap();
        assert!(is_hadamard(&t8));
    }

    #[test]
    fn tensor_rejects_non_hadamard_factor() {
        let ones = UnimodularMatrix::from_real(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(tensor(&ones, &f2()).is_err());
    }

    #[test]
    fn dita_right_deformation_matches_the_displayed_pattern() {
        // Q = [[p,q],[r,s]] over F_2 ⊗ F_2 gives rows
        // (p,q,p,q), (p,-q,p,-q), (r,s,-r,-s), (r,-s,-r,s).
        let (p, q, r, s) = (
            phase(0.3),
            phase(1.1),
            phase(2.0),
            phase(4.4),
        );
        let qm = UnimodularMatrix::from_rows(vec![vec![p, q], vec![r, s]]).unwrap();
        let d = dita_deform(&f2(), &f2(), &qm, DitaSide::Right).unwrap();
        let expect = UnimodularMatrix::from_rows(vec![
            vec![p, q, p, q],
            vec![p, -q, p, -q],
            vec![r, s, -r, -s],
            vec![r, -s, -r, s],
        ])
        .unwrap();
        assert!(d.cmat().max_diff(expect.cmat()) < 1e-12);
    }

    #[test]
    fn dita_with_all_ones_parameter_is_the_plain_tensor() {
        let ones = UnimodularMatrix::from_real(vec![vec![1.0; 2]; 2]).unwrap();
        for side in [DitaSide::Right, DitaSide::Left] {
            let d = dita_deform(&f2(), &f2(), &ones, side).unwrap();
            assert_eq!(d, w4());
        }
    }

    #[test]
    fn dita_with_random_parameters_stays_hadamard() {
        use rand::Rng;
        let mut rng = crate::exec::stream_rng(9, 0);
        let f3 = fourier_unimodular(3);
        for _ in 0..50 {
            let angles: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..TAU)).collect();
            let q = UnimodularMatrix::from_fn(2, 3, |i, j| phase(angles[i * 3 + j])).unwrap();
            for side in [DitaSide::Right, DitaSide::Left] {
                let d = dita_deform(&f2(), &f3, &q, side).unwrap();
                assert!(is_hadamard(&d));
            }
        }
    }

    #[test]
    fn fingerprint_distinguishes_fourier_4_from_walsh_4() {
        let ff = fingerprint(&fourier_unimodular(4), 9).unwrap();
        let fw = fingerprint(&w4(), 9).unwrap();
        assert_ne!(ff, fw);
    }

    #[test]
    fn fingerprint_is_equivalence_invariant() {
        let mut rng = crate::exec::stream_rng(21, 0);
        let f4 = fourier_unimodular(4);
        let base = fingerprint(&f4, 9).unwrap();
        for _ in 0..10 {
            let mv = EquivalenceMove::random(&mut rng, 4, 4);
            let h = mv.apply(&f4).unwrap();
            assert_eq!(fingerprint(&h, 9).unwrap(), base);
        }
    }

    #[test]
    fn fingerprint_matches_fourier_4_with_its_dita_form() {
        // F_2 ⊗_Q F_2 at Q = [[1,1],[1,i]] is equivalent to F_4.
        let i = C64::new(0.0, 1.0);
        let q = UnimodularMatrix::from_rows(vec![vec![ONE, ONE], vec![ONE, i]]).unwrap();
        let d = dita_deform(&f2(), &f2(), &q, DitaSide::Right).unwrap();
        let (d, _) = dephase(&d);
        assert_eq!(
            fingerprint(&d, 9).unwrap(),
            fingerprint(&fourier_unimodular(4), 9).unwrap()
        );
    }
}
