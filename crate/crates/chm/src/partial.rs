//! Partial Hadamard matrices: rectangular matrices with pairwise orthogonal
//! rows over signs or roots of unity. Standard forms, exact and asymptotic
//! counting, five-row completability with certificates, polar analysis of
//! Hadamard submatrix splits, and embeddings into Walsh matrices.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64 as C64;

use crate::constructions;
use crate::cyclotomic;
use crate::error::Error;
use crate::exec::{self, Exec};
use crate::matrix::{is_hadamard, ButsonMatrix, CMat, UnimodularMatrix};
use crate::{Result, TOL_ENTRY, TOL_GRAM};

/// Residual bound for the polar factor invariants `U*U = 1` and `UT = D`.
pub const POLAR_TOL: f64 = 1e-9;

/// Agreement bound between the block formulas for `E`, `S` and the factors
/// read off a direct polar decomposition of the lower-right block.
const ROUTE_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// Carrier
// ---------------------------------------------------------------------------

/// Entry storage of a partial matrix: exact signs, exact root-of-unity
/// exponents, or floating unimodular values.
#[derive(Clone, Debug, PartialEq)]
pub enum PartialEntries {
    /// Row-major `±1`.
    Sign(Vec<i8>),
    /// Row-major exponents of `e^{2πi/level}`, reduced modulo `level`.
    Butson { level: u32, exps: Vec<u32> },
    /// Row-major unit-modulus values.
    Complex(Vec<C64>),
}

/// An `M×N` matrix with `M ≤ N` and unimodular entries; the `verified` flag
/// records that the rows were last checked pairwise orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialMatrix {
    rows: usize,
    cols: usize,
    entries: PartialEntries,
    verified: bool,
}

impl PartialMatrix {
    pub fn sign(rows: usize, cols: usize, data: Vec<i8>) -> Result<Self> {
        Self::check_shape(rows, cols, data.len())?;
        if data.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::validation("sign entries must be ±1"));
        }
        Ok(PartialMatrix { rows, cols, entries: PartialEntries::Sign(data), verified: false })
    }

    pub fn butson(rows: usize, cols: usize, level: u32, exps: Vec<u32>) -> Result<Self> {
        Self::check_shape(rows, cols, exps.len())?;
        if level < 2 {
            return Err(Error::validation("level must be at least 2"));
        }
        let exps = exps.into_iter().map(|e| e % level).collect();
        Ok(PartialMatrix { rows, cols, entries: PartialEntries::Butson { level, exps }, verified: false })
    }

    pub fn complex(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Self::check_shape(rows, cols, data.len())?;
        if data.iter().any(|z| (z.norm() - 1.0).abs() > TOL_ENTRY) {
            return Err(Error::validation("entries must have unit modulus"));
        }
        Ok(PartialMatrix { rows, cols, entries: PartialEntries::Complex(data), verified: false })
    }

    /// Upper `m` rows of an exact matrix, keeping the exponent carrier.
    pub fn from_butson_rows(h: &ButsonMatrix, m: usize) -> Result<Self> {
        if m > h.rows() {
            return Err(Error::dim(format!("cannot take {m} rows from {}", h.rows())));
        }
        let exps = (0..m * h.cols()).map(|k| h.exponent(k / h.cols(), k % h.cols())).collect();
        Self::butson(m, h.cols(), h.level(), exps)
    }

    /// Upper `m` rows of a floating matrix.
    pub fn from_unimodular_rows(h: &UnimodularMatrix, m: usize) -> Result<Self> {
        if m > h.rows() {
            return Err(Error::dim(format!("cannot take {m} rows from {}", h.rows())));
        }
        let data = (0..m * h.cols()).map(|k| h[(k / h.cols(), k % h.cols())]).collect();
        Self::complex(m, h.cols(), data)
    }

    fn check_shape(rows: usize, cols: usize, len: usize) -> Result<()> {
        if rows == 0 || cols == 0 {
            return Err(Error::dim("matrix must be nonempty"));
        }
        if rows > cols {
            return Err(Error::dim(format!("{rows} rows exceed {cols} columns")));
        }
        if len != rows * cols {
            return Err(Error::dim("entry count does not match shape"));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &PartialEntries {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        let k = i * self.cols + j;
        match &self.entries {
            PartialEntries::Sign(s) => C64::new(s[k] as f64, 0.0),
            PartialEntries::Butson { level, exps } => {
                crate::matrix::root_of_unity(exps[k] as i64, *level)
            }
            PartialEntries::Complex(z) => z[k],
        }
    }

    pub fn to_cmat(&self) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self.entry(i, j))
    }

    /// Row-major `±1` data; exact carriers convert losslessly, floating
    /// entries must sit within [`TOL_ENTRY`] of a sign.
    pub fn signs(&self) -> Result<Vec<i8>> {
        match &self.entries {
            PartialEntries::Sign(s) => Ok(s.clone()),
            PartialEntries::Butson { level, exps } => exps
                .iter()
                .map(|&e| {
                    if e == 0 {
                        Ok(1)
                    } else if level % 2 == 0 && e == level / 2 {
                        Ok(-1)
                    } else {
                        Err(Error::validation(format!("exponent {e} at level {level} is not real")))
                    }
                })
                .collect(),
            PartialEntries::Complex(z) => z
                .iter()
                .map(|v| {
                    if (v - 1.0).norm() <= TOL_ENTRY {
                        Ok(1)
                    } else if (v + 1.0).norm() <= TOL_ENTRY {
                        Ok(-1)
                    } else {
                        Err(Error::validation("entry is not a sign"))
                    }
                })
                .collect(),
        }
    }

    /// Copy with the entries converted to the sign carrier.
    pub fn to_sign(&self) -> Result<Self> {
        Ok(PartialMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: PartialEntries::Sign(self.signs()?),
            verified: self.verified,
        })
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    /// Rechecks pairwise row orthogonality and stores the verdict.
    pub fn verify(&mut self) -> bool {
        self.verified = verify_phm(self);
        self.verified
    }
}

/// Pairwise row orthogonality: exact integer dots for signs, vanishing-sum
/// reduction for exponent carriers, and `tol·N`-scaled Gram residuals for
/// floating entries.
pub fn verify_phm(p: &PartialMatrix) -> bool {
    let (m, n) = (p.rows, p.cols);
    match &p.entries {
        PartialEntries::Sign(s) => {
            (0..m).all(|i| (i + 1..m).all(|k| sign_dot(s, n, i, k) == 0))
        }
        PartialEntries::Butson { level, exps } => (0..m).all(|i| {
            (i + 1..m).all(|k| {
                let mut counts = vec![0i64; *level as usize];
                for j in 0..n {
                    let d = (exps[i * n + j] + level - exps[k * n + j]) % level;
                    counts[d as usize] += 1;
                }
                cyclotomic::vanishes(&counts, *level)
            })
        }),
        PartialEntries::Complex(_) => {
            let c = p.to_cmat();
            (0..m).all(|i| {
                (i + 1..m).all(|k| c.row_inner(i, k).norm() <= TOL_GRAM * n as f64)
            })
        }
    }
}

fn sign_dot(s: &[i8], n: usize, i: usize, k: usize) -> i64 {
    (0..n).map(|j| s[i * n + j] as i64 * s[k * n + j] as i64).sum()
}

// ---------------------------------------------------------------------------
// Standard form
// ---------------------------------------------------------------------------

/// Canonical representative under column permutations and column
/// dephasings: the first row and column are normalized to 1 and the low
/// powers are moved left, row by row. Four-row sign matrices additionally
/// fix the last-row sign so the sorted matrix is lexicographically
/// extremal, which orders the two block multiplicities. Exact carriers
/// only: floating columns admit no robust total order.
pub fn standard_form(p: &PartialMatrix) -> Result<PartialMatrix> {
    let (m, n) = (p.rows, p.cols);
    match &p.entries {
        PartialEntries::Sign(s) => {
            let mut cols = dephased_sign_cols(s, m, n);
            cols.sort_by(|a, b| b.cmp(a));
            let flips: Vec<i8> = cols[0].clone();
            for col in &mut cols {
                for i in 0..m {
                    col[i] *= flips[i];
                }
            }
            cols.sort_by(|a, b| b.cmp(a));
            if m == 4 {
                let mut alt: Vec<Vec<i8>> = cols
                    .iter()
                    .map(|c| {
                        let mut c = c.clone();
                        c[3] = -c[3];
                        c
                    })
                    .collect();
                alt.sort_by(|a, b| b.cmp(a));
                if row_major_sign(&alt, m) > row_major_sign(&cols, m) {
                    cols = alt;
                }
            }
            let data = row_major_sign(&cols, m);
            Ok(PartialMatrix { rows: m, cols: n, entries: PartialEntries::Sign(data), verified: p.verified })
        }
        PartialEntries::Butson { level, exps } => {
            let q = *level;
            let mut cols: Vec<Vec<u32>> = (0..n)
                .map(|j| (0..m).map(|i| (exps[i * n + j] + q - exps[j]) % q).collect())
                .collect();
            cols.sort();
            let shifts: Vec<u32> = cols[0].clone();
            for col in &mut cols {
                for i in 0..m {
                    col[i] = (col[i] + q - shifts[i]) % q;
                }
            }
            cols.sort();
            if m == 4 && q == 2 {
                let mut alt: Vec<Vec<u32>> = cols
                    .iter()
                    .map(|c| {
                        let mut c = c.clone();
                        c[3] ^= 1;
                        c
                    })
                    .collect();
                alt.sort();
                if row_major_exp(&alt, m) < row_major_exp(&cols, m) {
                    cols = alt;
                }
            }
            let data = row_major_exp(&cols, m);
            Ok(PartialMatrix {
                rows: m,
                cols: n,
                entries: PartialEntries::Butson { level: q, exps: data },
                verified: p.verified,
            })
        }
        PartialEntries::Complex(_) => {
            Err(Error::unsupported("standard form requires an exact carrier"))
        }
    }
}

fn dephased_sign_cols(s: &[i8], m: usize, n: usize) -> Vec<Vec<i8>> {
    (0..n)
        .map(|j| {
            let top = s[j];
            (0..m).map(|i| s[i * n + j] * top).collect()
        })
        .collect()
}

fn row_major_sign(cols: &[Vec<i8>], m: usize) -> Vec<i8> {
    (0..m).flat_map(|i| cols.iter().map(move |c| c[i])).collect()
}

fn row_major_exp(cols: &[Vec<u32>], m: usize) -> Vec<u32> {
    (0..m).flat_map(|i| cols.iter().map(move |c| c[i])).collect()
}

// ---------------------------------------------------------------------------
// Counting
// ---------------------------------------------------------------------------

fn binom_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut r = BigUint::from(1u32);
    for i in 1..=k {
        r = r * (n - k + i) as u64 / i as u64;
    }
    r
}

fn multinom_big(n: usize, parts: &[usize]) -> BigUint {
    debug_assert_eq!(parts.iter().sum::<usize>(), n);
    let mut rem = n;
    let mut acc = BigUint::from(1u32);
    for &p in parts {
        acc *= binom_big(rem, p);
        rem -= p;
    }
    acc
}

fn big_pow(base: u64, exp: usize) -> BigUint {
    let mut r = BigUint::from(1u32);
    for _ in 0..exp {
        r *= base;
    }
    r
}

/// `log2` of a positive big integer, accurate to the 53-bit mantissa.
fn big_log2(x: &BigUint) -> f64 {
    let b = x.bits();
    if b == 0 {
        return f64::NEG_INFINITY;
    }
    let s = b.saturating_sub(53);
    let top = (x >> s).to_u64_digits().first().copied().unwrap_or(0);
    (top as f64).log2() + s as f64
}

/// Exact number of `m×n` sign matrices with pairwise orthogonal rows, for
/// `m ∈ {2, 3, 4}`. The first row is arbitrary; each matrix determines and
/// is determined by a column-class assignment, whence a closed multinomial
/// count times `2^n`.
pub fn count_phm(m: usize, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::validation("length must be positive"));
    }
    let zero = BigUint::from(0u32);
    match m {
        2 => {
            if n % 2 != 0 {
                return Ok(zero);
            }
            Ok(big_pow(2, n) * binom_big(n, n / 2))
        }
        3 => {
            if n % 4 != 0 {
                return Ok(zero);
            }
            Ok(big_pow(2, n) * multinom_big(n, &[n / 4; 4]))
        }
        4 => {
            if n % 4 != 0 {
                return Ok(zero);
            }
            let quarter = n / 4;
            let mut sum = BigUint::from(0u32);
            for a in 0..=quarter {
                let b = quarter - a;
                sum += multinom_big(n, &[a, b, b, a, b, a, a, b]);
            }
            Ok(big_pow(2, n) * sum)
        }
        _ => Err(Error::unsupported("row counts 2, 3, 4 only")),
    }
}

/// Direct enumeration over dephased representatives (first row all ones),
/// times `2^n` for the column dephasings. Rows are bitmasks; a pair is
/// orthogonal iff their XOR has weight `n/2`.
pub fn count_phm_bruteforce(m: usize, n: usize, exec: Exec) -> Result<BigUint> {
    if !(2..=4).contains(&m) {
        return Err(Error::unsupported("row counts 2, 3, 4 only"));
    }
    if n == 0 {
        return Err(Error::validation("length must be positive"));
    }
    if (m - 1) * n > 24 {
        return Err(Error::too_large(format!("enumeration over 2^{} rows", (m - 1) * n)));
    }
    if n % 2 != 0 {
        return Ok(BigUint::from(0u32));
    }
    let half = (n / 2) as u32;
    let size = 1usize << n;
    let ok = move |r: usize| (r as u64).count_ones() == half;
    let pair = move |r: usize, s: usize| ((r ^ s) as u64).count_ones() == half;
    let dephased = match m {
        2 => exec::sum_u64(exec, size, |r| ok(r) as u64),
        3 => exec::sum_u64(exec, size, |r1| {
            if !ok(r1) {
                return 0;
            }
            (0..size).filter(|&r2| ok(r2) && pair(r1, r2)).count() as u64
        }),
        _ => exec::sum_u64(exec, size, |r1| {
            if !ok(r1) {
                return 0;
            }
            let mut count = 0u64;
            for r2 in 0..size {
                if !ok(r2) || !pair(r1, r2) {
                    continue;
                }
                count += (0..size)
                    .filter(|&r3| ok(r3) && pair(r1, r3) && pair(r2, r3))
                    .count() as u64;
            }
            count
        }),
    };
    Ok(BigUint::from(dephased) * big_pow(2, n))
}

/// Probability that a uniformly random `m×n` sign matrix has pairwise
/// orthogonal rows.
pub fn phm_probability(m: usize, n: usize) -> Result<f64> {
    let count = count_phm(m, n)?;
    if count == BigUint::from(0u32) {
        return Ok(0.0);
    }
    Ok((big_log2(&count) - (m * n) as f64).exp2())
}

/// Asymptotic orthogonal-row probability `2^{(m−1)²} / √((2πn)^{m(m−1)/2})`
/// as `n → ∞`; an `m×n` matrix with orthogonal rows is a random walk on
/// `Z^{C(m,2)}` conditioned to return to the origin, one coordinate per
/// row pair.
pub fn dll_asymptotic(m: usize, n: usize) -> f64 {
    let pairs = (m * (m - 1) / 2) as f64;
    let sq = (m as f64 - 1.0).powi(2);
    (sq - pairs / 2.0 * (std::f64::consts::TAU * n as f64).log2()).exp2()
}

/// Exact `Σ C(n; a_1..a_s)^p` over all compositions `a_1+…+a_s = n`.
pub fn multinomial_power_sum(s: usize, p: u32, n: usize) -> Result<BigUint> {
    if s == 0 || p == 0 {
        return Err(Error::validation("parts and power must be positive"));
    }
    if binom_big(n + s - 1, s - 1) > BigUint::from(2_000_000u64) {
        return Err(Error::too_large("composition count exceeds 2e6"));
    }
    let mut acc = BigUint::from(0u32);
    mps_walk(n, s, BigUint::from(1u32), p, &mut acc);
    Ok(acc)
}

fn mps_walk(n_left: usize, parts_left: usize, coeff: BigUint, p: u32, acc: &mut BigUint) {
    if parts_left == 1 {
        let mut t = BigUint::from(1u32);
        for _ in 0..p {
            t *= &coeff;
        }
        *acc += t;
        return;
    }
    for a in 0..=n_left {
        mps_walk(n_left - a, parts_left - 1, &coeff * binom_big(n_left, a), p, acc);
    }
}

/// Laplace estimate `s^{pn} √(s^{s(p−1)} / (p^{s−1} (2πn)^{(s−1)(p−1)}))`
/// for the multinomial power sum; exact at `p = 1`.
pub fn multinomial_power_sum_asymptotic(s: usize, p: u32, n: usize) -> f64 {
    let (sf, pf, nf) = (s as f64, p as f64, n as f64);
    let ln = pf * nf * sf.ln()
        + 0.5
            * (sf * (pf - 1.0) * sf.ln()
                - (sf - 1.0) * pf.ln()
                - (sf - 1.0) * (pf - 1.0) * (std::f64::consts::TAU * nf).ln());
    ln.exp()
}

// ---------------------------------------------------------------------------
// Four-row structure
// ---------------------------------------------------------------------------

fn w4_sign(i: usize, j: usize) -> i8 {
    1 - 2 * ((i & j).count_ones() % 2) as i8
}

fn k4_sign(i: usize, j: usize) -> i8 {
    if i == j {
        -1
    } else {
        1
    }
}

/// Block concatenation of `a` Walsh and `b` anticirculant `4×4` blocks,
/// the canonical four-row partial Hadamard of size `4×4(a+b)`.
pub fn canonical_four_row(a: usize, b: usize) -> Result<PartialMatrix> {
    if a + b == 0 {
        return Err(Error::validation("at least one block required"));
    }
    let n = 4 * (a + b);
    let mut data = vec![0i8; 4 * n];
    for i in 0..4 {
        for blk in 0..a + b {
            for j in 0..4 {
                data[i * n + 4 * blk + j] =
                    if blk < a { w4_sign(i, j) } else { k4_sign(i, j) };
            }
        }
    }
    let mut p = PartialMatrix::sign(4, n, data)?;
    p.verify();
    Ok(p)
}

/// Block profile `(a, b)` of a four-row partial Hadamard: its standard
/// form splits the columns into eight sign classes of sizes
/// `(a, b, b, a, b, a, a, b)` with `a + b = n/4` and `a ≥ b`; the matrix
/// is equivalent to `a` Walsh blocks next to `b` anticirculant blocks.
pub fn four_row_profile(p: &PartialMatrix) -> Result<(usize, usize)> {
    if p.rows != 4 {
        return Err(Error::dim(format!("profile needs 4 rows, got {}", p.rows)));
    }
    let sp = p.to_sign()?;
    if !verify_phm(&sp) {
        return Err(Error::validation("rows are not pairwise orthogonal"));
    }
    let sf = standard_form(&sp)?;
    let s = sf.signs()?;
    let n = sf.cols;
    let mut counts = [0usize; 8];
    for j in 0..n {
        let key = (0..3).fold(0usize, |acc, i| {
            acc << 1 | (s[(i + 1) * n + j] < 0) as usize
        });
        counts[key] += 1;
    }
    let (a, b) = (counts[0], counts[1]);
    if counts != [a, b, b, a, b, a, a, b] || (a + b) * 4 != n || a < b {
        return Err(Error::validation("columns do not form a four-row block pattern"));
    }
    Ok((a, b))
}

// ---------------------------------------------------------------------------
// Five-row completability
// ---------------------------------------------------------------------------

/// Evidence attached to a five-row completability verdict.
#[derive(Clone, Debug, PartialEq)]
pub enum FiveRowCertificate {
    /// A fifth row orthogonal to all four input rows.
    Completion(Vec<i8>),
    /// Profile `(a, 0)` with `a` odd: each coordinate of a candidate
    /// fifth row's block sum is congruent to `a` mod 2, so the zero sum
    /// required by orthogonality is unreachable.
    Parity { a: usize },
    /// The signature search visited every feasible sign assignment and
    /// found no orthogonal fifth row.
    Exhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiveRowReport {
    pub completable: bool,
    /// Exact number of fifth rows orthogonal to the four input rows.
    pub completions: BigUint,
    pub certificate: FiveRowCertificate,
}

/// Decides whether a four-row partial Hadamard extends by a fifth
/// orthogonal `±1` row, counting all extensions exactly. Columns are
/// grouped by their sign pattern; a dynamic program over the per-class
/// plus-counts covers every candidate row, since orthogonality depends on
/// the class counts alone. Profiles `(odd, 0)` are rejected up front by
/// the parity argument.
pub fn five_row_completable(p: &PartialMatrix) -> Result<FiveRowReport> {
    if p.rows != 4 {
        return Err(Error::dim(format!("completion needs 4 rows, got {}", p.rows)));
    }
    let signs = p.signs()?;
    let n = p.cols;
    if !verify_phm(&p.to_sign()?) {
        return Err(Error::validation("rows are not pairwise orthogonal"));
    }
    let (a, b) = four_row_profile(p)?;
    let zero = BigUint::from(0u32);
    if b == 0 && a % 2 == 1 {
        return Ok(FiveRowReport {
            completable: false,
            completions: zero,
            certificate: FiveRowCertificate::Parity { a },
        });
    }

    let mut classes: BTreeMap<[i8; 4], Vec<usize>> = BTreeMap::new();
    for j in 0..n {
        let key = [signs[j], signs[n + j], signs[2 * n + j], signs[3 * n + j]];
        classes.entry(key).or_default().push(j);
    }
    let classes: Vec<([i8; 4], Vec<usize>)> = classes.into_iter().collect();
    let mut remaining: Vec<usize> = vec![0; classes.len() + 1];
    for t in (0..classes.len()).rev() {
        remaining[t] = remaining[t + 1] + classes[t].1.len();
    }

    #[derive(Clone)]
    struct Node {
        ways: BigUint,
        prev: [i32; 4],
        k: usize,
    }
    let mut layers: Vec<BTreeMap<[i32; 4], Node>> = Vec::with_capacity(classes.len() + 1);
    let mut first = BTreeMap::new();
    first.insert([0i32; 4], Node { ways: BigUint::from(1u32), prev: [0; 4], k: 0 });
    layers.push(first);
    for (t, (key, cols)) in classes.iter().enumerate() {
        let nc = cols.len();
        let rem = remaining[t + 1] as i32;
        let mut next: BTreeMap<[i32; 4], Node> = BTreeMap::new();
        for (st, node) in &layers[t] {
            for k in 0..=nc {
                let coef = 2 * k as i32 - nc as i32;
                let mut ns = *st;
                for (x, &s) in ns.iter_mut().zip(key.iter()) {
                    *x += coef * s as i32;
                }
                if ns.iter().any(|&x| x.abs() > rem) {
                    continue;
                }
                let add = &node.ways * binom_big(nc, k);
                next.entry(ns)
                    .and_modify(|e| e.ways += &add)
                    .or_insert(Node { ways: add, prev: *st, k });
            }
        }
        layers.push(next);
    }

    let Some(goal) = layers[classes.len()].get(&[0; 4]).cloned() else {
        return Ok(FiveRowReport {
            completable: false,
            completions: zero,
            certificate: FiveRowCertificate::Exhausted,
        });
    };
    let mut ks = vec![0usize; classes.len()];
    let mut state = [0i32; 4];
    for t in (0..classes.len()).rev() {
        let node = &layers[t + 1][&state];
        ks[t] = node.k;
        state = node.prev;
    }
    let mut row = vec![-1i8; n];
    for (t, (_, cols)) in classes.iter().enumerate() {
        for &j in cols.iter().take(ks[t]) {
            row[j] = 1;
        }
    }
    for i in 0..4 {
        let dot: i64 = (0..n).map(|j| signs[i * n + j] as i64 * row[j] as i64).sum();
        if dot != 0 {
            return Err(Error::validation("internal: reconstructed row fails orthogonality"));
        }
    }
    Ok(FiveRowReport {
        completable: true,
        completions: goal.ways,
        certificate: FiveRowCertificate::Completion(row),
    })
}

// ---------------------------------------------------------------------------
// Polar analysis of Hadamard splits
// ---------------------------------------------------------------------------

/// Exact-formula ingredients of the polar decomposition of the
/// lower-right block `D` of a Hadamard matrix split `[[A, B], [C, D]]`:
/// `Pol(D) = (D − E)/√N` with `E = C·X_A·B`, and `√(D*D) = √N·1 − S` with
/// `S = B*·Y_A·B`.
#[derive(Clone, Debug)]
pub struct PolarPieces {
    pub x_a: CMat,
    pub y_a: CMat,
    pub e: CMat,
    pub s: CMat,
}

impl PolarPieces {
    pub fn e_sup(&self) -> f64 {
        self.e.max_abs()
    }

    pub fn s_sup(&self) -> f64 {
        self.s.max_abs()
    }

    /// The lower-right block is an almost Hadamard sign pattern whenever
    /// every entry of the perturbation `E` stays strictly below 1: the
    /// polar part then has the same sign pattern as the block itself.
    pub fn ahp_verdict(&self) -> bool {
        self.e.max_abs() < 1.0
    }
}

fn na_block(m: &CMat, r0: usize, c0: usize, nr: usize, nc: usize) -> DMatrix<C64> {
    DMatrix::from_fn(nr, nc, |i, j| m[(r0 + i, c0 + j)])
}

fn na_max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Cyclic Jacobi eigendecomposition `g = V Λ V*` of a Hermitian matrix.
/// nalgebra's bidiagonal SVD and tridiagonal eigensolver both return
/// wrong factors for complex matrices with repeated spectra (Walsh Gram
/// blocks reconstruct with errors near 1e-1); unitary 2×2 rotations are
/// exact to rounding on these inputs.
fn jacobi_hermitian(g: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let d = g.nrows();
    let mut a = (g + g.adjoint()).scale(0.5);
    let mut v = DMatrix::<C64>::identity(d, d);
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for _ in 0..50 {
        let off = (0..d)
            .flat_map(|p| (p + 1..d).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm())
            .fold(0.0, f64::max);
        if off <= scale * 1e-15 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let gpq = a[(p, q)];
                let norm = gpq.norm();
                if norm <= scale * 1e-18 {
                    continue;
                }
                let phase = gpq.unscale(norm);
                let zeta = (a[(p, p)].re - a[(q, q)].re) / (2.0 * norm);
                let t = if zeta >= 0.0 {
                    -1.0 / (zeta + (zeta * zeta + 1.0).sqrt())
                } else {
                    1.0 / (-zeta + (zeta * zeta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = phase.scale(t * c);
                for i in 0..d {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = x.scale(c) - y * s.conj();
                    a[(i, q)] = x * s + y.scale(c);
                }
                for j in 0..d {
                    let (x, y) = (a[(p, j)], a[(q, j)]);
                    a[(p, j)] = x.scale(c) - s * y;
                    a[(q, j)] = s.conj() * x + y.scale(c);
                }
                for i in 0..d {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = x.scale(c) - y * s.conj();
                    v[(i, q)] = x * s + y.scale(c);
                }
            }
        }
    }
    ((0..d).map(|i| a[(i, i)].re).collect(), v)
}

fn eigen_apply(vals: &[f64], vecs: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let d = DMatrix::<C64>::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j {
            C64::new(f(vals[i]), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    vecs * d * vecs.adjoint()
}

/// Positive-semidefinite square root, eigenvalues clamped at zero.
fn psd_sqrt(g: DMatrix<C64>) -> DMatrix<C64> {
    let (vals, vecs) = jacobi_hermitian(&g);
    eigen_apply(&vals, &vecs, |l| l.max(0.0).sqrt())
}

fn gram_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    jacobi_hermitian(&(m.adjoint() * m))
}

/// Singular values in descending order, as eigenvalue square roots of the
/// Gram matrix.
fn singular_values_desc(m: &DMatrix<C64>) -> Vec<f64> {
    let (vals, _) = gram_eigen(m);
    let mut sv: Vec<f64> = vals.into_iter().map(|l| l.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Right polar factors `(Pol(m), √(m*m))` of an invertible square matrix,
/// through the Gram eigendecomposition.
fn polar_factors(m: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let (vals, vecs) = gram_eigen(m);
    let lmax = vals.iter().fold(0.0f64, |a, &b| a.max(b));
    if vals.iter().any(|&l| l <= lmax * f64::EPSILON * vals.len() as f64) {
        return Err(Error::validation("polar part requires an invertible matrix"));
    }
    let t = eigen_apply(&vals, &vecs, f64::sqrt);
    let t_inv = eigen_apply(&vals, &vecs, |l| 1.0 / l.sqrt());
    Ok((m * t_inv, t))
}

/// Splits a Hadamard matrix after `r` rows and columns and returns the
/// polar ingredients of the lower-right block, computed from the block
/// formulas and cross-checked against a direct polar decomposition.
/// Requires the leading block `A` to be invertible with operator norm
/// strictly below `√N`; the factors `U = (D − E)/√N`, `T = √N·1 − S` are
/// verified unitary and multiplicative to [`POLAR_TOL`].
pub fn polar_pieces(h: &UnimodularMatrix, r: usize) -> Result<PolarPieces> {
    let n = h.rows();
    if r == 0 || r >= n {
        return Err(Error::validation(format!("split size {r} must lie in 1..{n}")));
    }
    if !is_hadamard(h) {
        return Err(Error::validation("matrix must verify as Hadamard"));
    }
    let d = n - r;
    let m = h.cmat();
    let a = na_block(m, 0, 0, r, r);
    let b = na_block(m, 0, r, r, d);
    let c = na_block(m, r, 0, d, r);
    let dd = na_block(m, r, r, d, d);
    let sn = (n as f64).sqrt();

    let sv_a = singular_values_desc(&a);
    if sv_a[0] >= sn * (1.0 - 1e-12) {
        return Err(Error::validation(
            "leading block must have operator norm strictly below √N",
        ));
    }
    if sv_a[r - 1] <= sn * 1e-12 {
        return Err(Error::validation("leading block is singular"));
    }

    let (pol_a, t_a) = polar_factors(&a)?;
    let x_den = DMatrix::<C64>::identity(r, r).scale(sn) + t_a;
    let x_a = x_den
        .try_inverse()
        .ok_or_else(|| Error::validation("normal factor is not invertible"))?
        * pol_a.adjoint();
    let y_den = DMatrix::<C64>::identity(r, r).scale(sn) + psd_sqrt(&a * a.adjoint());
    let y_a = y_den
        .try_inverse()
        .ok_or_else(|| Error::validation("normal factor is not invertible"))?;
    let e = &c * &x_a * &b;
    let s = b.adjoint() * &y_a * &b;

    let (u_d, t_d) = polar_factors(&dd)?;
    let e_direct = &dd - u_d.scale(sn);
    let s_direct = DMatrix::<C64>::identity(d, d).scale(sn) - t_d;
    if na_max_diff(&e, &e_direct) > ROUTE_TOL || na_max_diff(&s, &s_direct) > ROUTE_TOL {
        return Err(Error::validation(format!(
            "block formulas and direct polar factors disagree: e {:.3e}, s {:.3e}",
            na_max_diff(&e, &e_direct),
            na_max_diff(&s, &s_direct),
        )));
    }

    let u = (&dd - &e).unscale(sn);
    let t = DMatrix::<C64>::identity(d, d).scale(sn) - &s;
    if na_max_diff(&(u.adjoint() * &u), &DMatrix::<C64>::identity(d, d)) > POLAR_TOL {
        return Err(Error::validation("polar factor is not unitary"));
    }
    if na_max_diff(&(&u * &t), &dd) > POLAR_TOL {
        return Err(Error::validation("polar factors do not reproduce the block"));
    }

    Ok(PolarPieces {
        x_a: CMat::from_na(&x_a),
        y_a: CMat::from_na(&y_a),
        e: CMat::from_na(&e),
        s: CMat::from_na(&s),
    })
}

/// Which sup-norm bound on the perturbation `E` applies to a split.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AhpCase {
    /// The leading block is itself Hadamard: `‖E‖_∞ ≤ r√r/(√r + √n)`.
    HadamardBlock,
    /// `c = ‖Pol(A) − A/√n‖_∞` is known: `‖E‖_∞ ≤ r²c√n/(n − r²)`.
    Perturbation { c: f64 },
    /// No structure on `A`: `‖E‖_∞ ≤ r²(1 + √n)/(n − r²)`.
    General,
}

/// A sup-norm bound on `E` for an `r`-row split of an `n×n` Hadamard
/// matrix, with the exact size threshold beyond which it certifies an
/// almost Hadamard sign pattern.
#[derive(Clone, Copy, Debug)]
pub struct AhpBoundReport {
    pub r: usize,
    pub n: usize,
    pub bound: f64,
    /// `bound < 1` exactly when `n` exceeds this value.
    pub threshold_n: f64,
    pub sufficient: bool,
}

pub fn ahp_bound_report(r: usize, n: usize, case: AhpCase) -> Result<AhpBoundReport> {
    if r == 0 || n == 0 {
        return Err(Error::validation("split and matrix sizes must be positive"));
    }
    let (rf, nf) = (r as f64, n as f64);
    let (bound, threshold_n) = match case {
        AhpCase::HadamardBlock => (
            rf * rf.sqrt() / (rf.sqrt() + nf.sqrt()),
            rf * (rf - 1.0).powi(2),
        ),
        AhpCase::Perturbation { c } => {
            if c < 0.0 {
                return Err(Error::validation("perturbation size must be nonnegative"));
            }
            if n <= r * r {
                return Err(Error::validation("bound requires n > r²"));
            }
            let x = rf * c;
            (
                rf * rf * c * nf.sqrt() / (nf - rf * rf),
                rf * rf / 4.0 * (x + (x * x + 4.0).sqrt()).powi(2),
            )
        }
        AhpCase::General => {
            if n <= r * r {
                return Err(Error::validation("bound requires n > r²"));
            }
            (
                rf * rf * (1.0 + nf.sqrt()) / (nf - rf * rf),
                rf * rf / 4.0 * (rf + (rf * rf + 8.0).sqrt()).powi(2),
            )
        }
    };
    Ok(AhpBoundReport { r, n, bound, threshold_n, sufficient: bound < 1.0 })
}

// ---------------------------------------------------------------------------
// Walsh embeddings
// ---------------------------------------------------------------------------

/// Row and column indices realizing a sign matrix inside the Walsh matrix
/// of size `2^n`, whose `(x, y)` entry is `(−1)^{⟨x, y⟩}` over bit strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalshEmbedding {
    pub n: u32,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl WalshEmbedding {
    pub fn target(&self) -> Result<ButsonMatrix> {
        constructions::walsh(self.n)
    }
}

/// Embeds a `d×d` sign matrix as a submatrix of a Walsh matrix: rows map
/// to the unit bit strings, columns to the bit strings of their sign
/// patterns. Distinct columns land in the Walsh matrix of size `2^d`;
/// repeated columns are separated by a tensor factor holding an
/// occurrence counter, at size `2^{d + ⌈log2 d⌉}`.
pub fn embed_in_walsh(p: &PartialMatrix) -> Result<WalshEmbedding> {
    if p.rows != p.cols {
        return Err(Error::dim("embedding requires a square matrix"));
    }
    let d = p.rows;
    let s = p.signs()?;
    let pattern: Vec<usize> = (0..d)
        .map(|j| (0..d).fold(0usize, |acc, i| acc | (((s[i * d + j] < 0) as usize) << i)))
        .collect();
    let rows: Vec<usize> = (0..d).map(|i| 1usize << i).collect();
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    let distinct = pattern.iter().all(|&y| seen.insert(y, 0).is_none());
    if distinct {
        return Ok(WalshEmbedding { n: d as u32, rows, cols: pattern });
    }
    let rlog = if d <= 1 { 0 } else { (d - 1).ilog2() + 1 };
    seen.clear();
    let cols = pattern
        .iter()
        .map(|&y| {
            let v = seen.entry(y).or_insert(0);
            let idx = (*v << d) | y;
            *v += 1;
            idx
        })
        .collect();
    Ok(WalshEmbedding { n: d as u32 + rlog, rows, cols })
}

// ---------------------------------------------------------------------------
// Partial Butson counting
// ---------------------------------------------------------------------------

/// Exact census of `m×n` matrices over the `q`-th roots of unity with
/// pairwise orthogonal rows: count over dephased representatives, total
/// with arbitrary first row, and the probability that a uniformly random
/// matrix qualifies.
#[derive(Clone, Debug, PartialEq)]
pub struct PbmCount {
    pub dephased: BigUint,
    pub total: BigUint,
    pub probability: f64,
}

fn pbm_assemble(q: u64, m: usize, n: usize, dephased: BigUint) -> PbmCount {
    let total = big_pow(q, n) * &dephased;
    let probability = if dephased == BigUint::from(0u32) {
        0.0
    } else {
        (big_log2(&dephased) - ((m - 1) * n) as f64 * (q as f64).log2()).exp2()
    };
    PbmCount { dephased, total, probability }
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if p * p > q {
        return Some((q, 1));
    }
    let mut rest = q;
    let mut k = 0;
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    if rest == 1 {
        Some((p, k))
    } else {
        None
    }
}

/// Closed-form count of partial Butson matrices at level `q`. Two rows:
/// `q` must be a prime power `p^k`; a vanishing sum of `q`-th roots is a
/// union of `p`-cycles, so the dephased second rows are indexed by
/// multiplicity vectors constant on residues mod `q/p`. Three rows:
/// prime levels 2 and 3, where the column classes are counted by
/// tristochastic matrices — forced square at `p = 2`, circulant at
/// `p = 3`.
pub fn pbm_count(q: u64, m: usize, n: usize) -> Result<PbmCount> {
    if q < 2 {
        return Err(Error::validation("level must be at least 2"));
    }
    if n == 0 {
        return Err(Error::validation("length must be positive"));
    }
    let zero = BigUint::from(0u32);
    let dephased = match m {
        2 => {
            let Some((p, _)) = prime_power(q) else {
                return Err(Error::unsupported(
                    "two-row counts need a prime-power level",
                ));
            };
            if n as u64 % p != 0 {
                zero
            } else {
                let c = (q / p) as usize;
                let target = n / p as usize;
                if binom_big(target + c - 1, c - 1) > BigUint::from(2_000_000u64) {
                    return Err(Error::too_large("multiplicity enumeration exceeds 2e6"));
                }
                let mut sum = BigUint::from(0u32);
                let mut a = vec![0usize; c];
                pbm_two_row_walk(&mut a, 0, target, q as usize, p as usize, n, &mut sum);
                sum
            }
        }
        3 => match q {
            2 => {
                if n % 4 != 0 {
                    zero
                } else {
                    multinom_big(n, &[n / 4; 4])
                }
            }
            3 => {
                if n % 3 != 0 {
                    zero
                } else {
                    let third = n / 3;
                    let mut sum = BigUint::from(0u32);
                    for a in 0..=third {
                        for b in 0..=third - a {
                            let c = third - a - b;
                            sum += multinom_big(n, &[a, b, c, b, c, a, c, a, b]);
                        }
                    }
                    sum
                }
            }
            _ => {
                return Err(Error::unsupported("three-row counts cover levels 2 and 3"));
            }
        },
        _ => return Err(Error::unsupported("row counts 2 and 3 only")),
    };
    Ok(pbm_assemble(q, m, n, dephased))
}

fn pbm_two_row_walk(
    a: &mut Vec<usize>,
    i: usize,
    left: usize,
    q: usize,
    p: usize,
    n: usize,
    sum: &mut BigUint,
) {
    if i + 1 == a.len() {
        a[i] = left;
        let parts: Vec<usize> = (0..q).map(|j| a[j % a.len()]).collect();
        debug_assert_eq!(parts.iter().sum::<usize>(), p * left + (n - p * left));
        *sum += multinom_big(n, &parts);
        return;
    }
    for v in 0..=left {
        a[i] = v;
        pbm_two_row_walk(a, i + 1, left - v, q, p, n, sum);
    }
}

/// Direct enumeration of dephased partial Butson matrices, exact via
/// cyclotomic reduction of the pairwise exponent-difference multisets.
pub fn pbm_count_bruteforce(q: u64, m: usize, n: usize, exec: Exec) -> Result<PbmCount> {
    if q < 2 {
        return Err(Error::validation("level must be at least 2"));
    }
    if !(2..=3).contains(&m) {
        return Err(Error::unsupported("row counts 2 and 3 only"));
    }
    if n == 0 || n > 16 {
        return Err(Error::validation("length must lie in 1..=16"));
    }
    if ((m - 1) * n) as f64 * (q as f64).log2() > 24.0 + 1e-9 {
        return Err(Error::too_large("enumeration exceeds 2^24 rows"));
    }
    let size = (q as usize).pow(n as u32);
    let decode = move |mut idx: usize| -> Vec<u32> {
        let mut digits = vec![0u32; n];
        for d in digits.iter_mut() {
            *d = (idx % q as usize) as u32;
            idx /= q as usize;
        }
        digits
    };
    let row_valid = move |digits: &[u32]| -> bool {
        let mut counts = vec![0i64; q as usize];
        for &d in digits {
            counts[d as usize] += 1;
        }
        cyclotomic::vanishes(&counts, q as u32)
    };
    let dephased = match m {
        2 => exec::sum_u64(exec, size, |idx| row_valid(&decode(idx)) as u64),
        _ => {
            let valid: Vec<Vec<u32>> =
                (0..size).map(decode).filter(|r| row_valid(r)).collect();
            let v = valid.len();
            exec::sum_u64(exec, v * v, |ij| {
                let (x, y) = (&valid[ij / v], &valid[ij % v]);
                let mut counts = vec![0i64; q as usize];
                for (&dx, &dy) in x.iter().zip(y.iter()) {
                    counts[((dx + q as u32 - dy) % q as u32) as usize] += 1;
                }
                cyclotomic::vanishes(&counts, q as u32) as u64
            })
        }
    };
    Ok(pbm_assemble(q, m, n, BigUint::from(dephased)))
}
