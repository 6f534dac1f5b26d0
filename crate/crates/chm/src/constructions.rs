//! Parametrized builders for the classical Hadamard matrix families:
//! Fourier and Walsh matrices, Paley and Williamson real constructions, the
//! named small-size complex matrices, the Szöllősi reduction, the
//! McNulty–Weigert Gauss-sum construction, and master matrices `λ_i^{n_j}`.
//!
//! Every builder verifies its output before returning it.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::group::FiniteAbelianGroup;
use crate::matrix::{
    phase, root_of_unity, verify_hadamard, ButsonMatrix, CMat, UnimodularMatrix, ONE,
};
use crate::{Result, TOL_ENTRY, TOL_GRAM};

const IM: C64 = C64::new(0.0, 1.0);

fn check_unit_params(params: &[(&str, C64)]) -> Result<()> {
    for (name, p) in params {
        if (p.norm() - 1.0).abs() > TOL_ENTRY {
            return Err(Error::validation(format!(
                "parameter {name} must have unit modulus, got |{name}| = {}",
                p.norm()
            )));
        }
    }
    Ok(())
}

fn verified(mat: CMat, what: &str) -> Result<UnimodularMatrix> {
    let h = UnimodularMatrix::new(mat)
        .map_err(|e| Error::validation(format!("{what}: {e}")))?;
    let report = verify_hadamard(&h, TOL_GRAM)?;
    if !report.is_hadamard {
        return Err(Error::validation(format!(
            "{what} failed verification (row gram error {:.3e})",
            report.max_row_gram_error
        )));
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Fourier and Walsh
// ---------------------------------------------------------------------------

/// Fourier matrix of a finite abelian group, as an exponent matrix at level
/// `lcm(orders)`. Rows and columns are indexed by the group elements in
/// lexicographic order, so a product decomposition yields the tensor product
/// of the factors' Fourier matrices.
pub fn fourier(g: &FiniteAbelianGroup) -> ButsonMatrix {
    let n = g.size() as usize;
    let level = g.exponent().max(2) as u32;
    ButsonMatrix::from_fn(n, n, level, |r, c| {
        let x = g.element(r as u64);
        let y = g.element(c as u64);
        let mut e = 0u64;
        for (k, &ord) in g.orders().iter().enumerate() {
            e = (e + (level as u64 / ord) * x[k] * y[k]) % level as u64;
        }
        e as u32
    })
}

/// Fourier matrix of the cyclic group, exponents `ij mod n`.
pub fn fourier_cyclic(n: u64) -> Result<ButsonMatrix> {
    Ok(fourier(&FiniteAbelianGroup::cyclic(n)?))
}

/// `n`-fold tensor power of the 2x2 Fourier matrix: size `2^n`, level 2.
pub fn walsh(n: u32) -> Result<ButsonMatrix> {
    if n == 0 {
        return Err(Error::validation("walsh power must be at least 1"));
    }
    if n > 20 {
        return Err(Error::too_large(format!("walsh power {n} exceeds 20")));
    }
    let size = 1usize << n;
    Ok(ButsonMatrix::from_fn(size, size, 2, |i, j| {
        (i & j).count_ones() % 2
    }))
}

// ---------------------------------------------------------------------------
// Paley
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PaleyKind {
    /// Size `q+1`, requires `q ≡ 3 (mod 4)`; output is skew: `H + H^t = 2·Id`.
    One,
    /// Size `2q+2`, requires `q ≡ 1 (mod 4)`; output is symmetric.
    Two,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Quadratic character mod an odd prime: 0 at 0, +1 on nonzero squares,
/// -1 otherwise.
fn legendre(a: u64, q: u64) -> i64 {
    let a = a % q;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (q - 1) / 2, q) == 1 {
        1
    } else {
        -1
    }
}

/// First row of the quadratic-character circulant: `chi(0), chi(1), …`.
pub fn quadratic_character_row(q: u64) -> Result<Vec<i64>> {
    if !is_prime(q) || q == 2 {
        return Err(Error::validation(format!("{q} is not an odd prime")));
    }
    Ok((0..q).map(|a| legendre(a, q)).collect())
}

/// Paley Hadamard matrix over the prime field `F_q`, as a sign matrix at
/// level 2. Kind one bordes the character circulant `Q_{ab} = chi(b-a)` and
/// adds the identity; kind two doubles it through the 2x2 substitution
/// `0 -> [[1,-1],[-1,-1]]`, `±1 -> ±[[1,1],[1,-1]]`.
pub fn paley(q: u64, kind: PaleyKind) -> Result<ButsonMatrix> {
    if !is_prime(q) || q == 2 {
        return Err(Error::validation(format!(
            "paley requires an odd prime, got {q}"
        )));
    }
    match kind {
        PaleyKind::One if q % 4 != 3 => {
            return Err(Error::validation(format!(
                "paley kind 1 requires q = 3 (mod 4), got {q}"
            )));
        }
        PaleyKind::Two if q % 4 != 1 => {
            return Err(Error::validation(format!(
                "paley kind 2 requires q = 1 (mod 4), got {q}"
            )));
        }
        _ => {}
    }
    let qi = q as usize;
    // Bordered character matrix: row and column 0 are the border, the core
    // is Q_{ab} = chi(b - a) with zero diagonal.
    let bordered = |i: usize, j: usize| -> i64 {
        match (i, j) {
            (0, 0) => 0,
            (0, _) => 1,
            (_, 0) => {
                if matches!(kind, PaleyKind::One) {
                    -1
                } else {
                    1
                }
            }
            _ => legendre((j as u64 + q - i as u64) % q, q),
        }
    };
    let signs: Vec<Vec<i64>> = match kind {
        PaleyKind::One => (0..=qi)
            .map(|i| {
                (0..=qi)
                    .map(|j| bordered(i, j) + i64::from(i == j))
                    .collect()
            })
            .collect(),
        PaleyKind::Two => {
            let g = [[1i64, -1], [-1, -1]];
            let f = [[1i64, 1], [1, -1]];
            (0..2 * (qi + 1))
                .map(|r| {
                    (0..2 * (qi + 1))
                        .map(|c| {
                            let (i, u) = (r / 2, r % 2);
                            let (j, v) = (c / 2, c % 2);
                            let b = bordered(i, j);
                            if b == 0 {
                                g[u][v]
                            } else {
                                b * f[u][v]
                            }
                        })
                        .collect()
                })
                .collect()
        }
    };
    let out = sign_matrix_to_butson(&signs)?;
    if !out.verify_exact() {
        return Err(Error::validation("paley output failed verification"));
    }
    Ok(out)
}

fn sign_matrix_to_butson(signs: &[Vec<i64>]) -> Result<ButsonMatrix> {
    let n = signs.len();
    let mut exps = Vec::with_capacity(n * n);
    for row in signs {
        if row.len() != n {
            return Err(Error::dim("sign matrix is not square"));
        }
        for &v in row {
            match v {
                1 => exps.push(0),
                -1 => exps.push(1),
                _ => return Err(Error::validation(format!("entry {v} is not ±1"))),
            }
        }
    }
    ButsonMatrix::new(n, n, 2, exps)
}

// ---------------------------------------------------------------------------
// Williamson
// ---------------------------------------------------------------------------

/// Sign matrices used as Williamson blocks.
pub type SignMat = Vec<Vec<i64>>;

/// Circulant sign matrix with the given first row.
pub fn circulant_sign(first_row: &[i64]) -> SignMat {
    let k = first_row.len();
    (0..k)
        .map(|i| (0..k).map(|j| first_row[(j + k - i) % k]).collect())
        .collect()
}

fn sign_mat_mul(a: &SignMat, b: &SignMat) -> SignMat {
    let k = a.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum())
                .collect()
        })
        .collect()
}

/// Williamson array: given four symmetric circulant commuting sign matrices
/// with `A² + B² + C² + D² = 4K·Id`, assembles the 4Kx4K Hadamard matrix
/// whose block pattern follows the quaternion units,
/// `(A,B,C,D; -B,A,-D,C; -C,D,A,-B; -D,-C,B,A)`. All preconditions are
/// checked, and violations name the failing identity.
pub fn williamson(a: &SignMat, b: &SignMat, c: &SignMat, d: &SignMat) -> Result<ButsonMatrix> {
    let blocks = [("A", a), ("B", b), ("C", c), ("D", d)];
    let k = a.len();
    if k == 0 {
        return Err(Error::dim("empty Williamson block"));
    }
    for (name, m) in &blocks {
        if m.len() != k || m.iter().any(|row| row.len() != k) {
            return Err(Error::dim(format!("block {name} is not {k}x{k}")));
        }
        for row in m.iter() {
            if row.iter().any(|&v| v != 1 && v != -1) {
                return Err(Error::validation(format!("block {name} has entries outside ±1")));
            }
        }
        for i in 0..k {
            for j in 0..k {
                if m[i][j] != m[0][(j + k - i) % k] {
                    return Err(Error::validation(format!("block {name} is not circulant")));
                }
                if m[i][j] != m[j][i] {
                    return Err(Error::validation(format!("block {name} is not symmetric")));
                }
            }
        }
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let (ni, mi) = blocks[i];
            let (nj, mj) = blocks[j];
            if sign_mat_mul(mi, mj) != sign_mat_mul(mj, mi) {
                return Err(Error::validation(format!("blocks {ni} and {nj} do not commute")));
            }
        }
    }
    let mut sum = vec![vec![0i64; k]; k];
    for (_, m) in &blocks {
        let sq = sign_mat_mul(m, m);
        for i in 0..k {
            for j in 0..k {
                sum[i][j] += sq[i][j];
            }
        }
    }
    let target = 4 * k as i64;
    for i in 0..k {
        for j in 0..k {
            let want = if i == j { target } else { 0 };
            if sum[i][j] != want {
                return Err(Error::validation(format!(
                    "A² + B² + C² + D² is not {target}·Id (entry ({i},{j}) = {})",
                    sum[i][j]
                )));
            }
        }
    }
    // Block pattern: entry (bi, bj) holds PATTERN[bi][bj] applied to (A,B,C,D).
    const PATTERN: [[(usize, i64); 4]; 4] = [
        [(0, 1), (1, 1), (2, 1), (3, 1)],
        [(1, -1), (0, 1), (3, -1), (2, 1)],
        [(2, -1), (3, 1), (0, 1), (1, -1)],
        [(3, -1), (2, -1), (1, 1), (0, 1)],
    ];
    let n = 4 * k;
    let signs: Vec<Vec<i64>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let (which, coeff) = PATTERN[r / k][c / k];
                    coeff * blocks[which].1[r % k][c % k]
                })
                .collect()
        })
        .collect();
    let out = sign_matrix_to_butson(&signs)?;
    if !out.verify_exact() {
        return Err(Error::validation("williamson output failed verification"));
    }
    Ok(out)
}

/// Exhaustive search over symmetric circulant first rows for Williamson
/// quadruples of size `k`, returning the first rows `(A,B,C,D)` found.
pub fn williamson_search(k: usize) -> Result<Vec<[Vec<i64>; 4]>> {
    if k == 0 || k > 7 {
        return Err(Error::too_large(format!(
            "williamson search supports 1 ≤ K ≤ 7, got {k}"
        )));
    }
    // Symmetric circulant first rows satisfy row[j] = row[k-j]; free choices
    // are the first half.
    let free = k / 2 + 1;
    let rows: Vec<Vec<i64>> = (0..1u32 << free)
        .map(|bits| {
            (0..k)
                .map(|j| {
                    let idx = j.min(k - j);
                    if bits >> idx & 1 == 1 {
                        -1
                    } else {
                        1
                    }
                })
                .collect()
        })
        .collect();
    let mut found = Vec::new();
    for a in &rows {
        for b in &rows {
            for c in &rows {
                for d in &rows {
                    let quad = [a.clone(), b.clone(), c.clone(), d.clone()];
                    let ok = williamson(
                        &circulant_sign(a),
                        &circulant_sign(b),
                        &circulant_sign(c),
                        &circulant_sign(d),
                    )
                    .is_ok();
                    if ok {
                        found.push(quad);
                    }
                }
            }
        }
    }
    Ok(found)
}

// ---------------------------------------------------------------------------
// Named matrices
// ---------------------------------------------------------------------------

/// The displayed small-size matrices, keyed by family and unit-modulus
/// parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NamedMatrix {
    /// 4x4 sign matrix with -1 diagonal, +1 off-diagonal.
    K4,
    /// One-parameter 4x4 family; `s = 1` recovers the second Walsh matrix.
    F4s(C64),
    /// Deformation of the 2x3 Fourier tensor, parameters in rows.
    F6Rs(C64, C64),
    /// Deformation of the 3x2 Fourier tensor, parameters in rows.
    F6RsLeft(C64, C64),
    /// Haagerup one-parameter 6x6 family.
    H6Q(C64),
    /// Tao matrix: 6x6 over the cube roots of unity.
    T6,
    /// Petrescu one-parameter 7x7 family.
    P7Q(C64),
    /// Björck–Fröberg circulant 6x6 matrix.
    Bf6,
    /// 10x10 matrix over the sixth roots of unity.
    X106,
}

/// Tao matrix as an exact exponent matrix at level 3.
pub fn tao() -> ButsonMatrix {
    let rows: [[u32; 6]; 6] = [
        [0, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 2, 2],
        [0, 1, 0, 2, 2, 1],
        [0, 1, 2, 0, 1, 2],
        [0, 2, 2, 1, 0, 1],
        [0, 2, 1, 2, 1, 0],
    ];
    ButsonMatrix::from_fn(6, 6, 3, |i, j| rows[i][j])
}

/// The 10x10 matrix over sixth roots of unity, as an exact exponent matrix.
pub fn x10_6() -> ButsonMatrix {
    let rows: [[u32; 10]; 10] = [
        [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 4, 1, 5, 3, 1, 3, 3, 5, 1],
        [0, 1, 2, 3, 5, 5, 1, 3, 5, 3],
        [0, 5, 3, 2, 1, 5, 3, 5, 3, 1],
        [0, 3, 5, 1, 4, 1, 1, 5, 3, 3],
        [0, 3, 3, 3, 3, 3, 0, 0, 0, 0],
        [0, 1, 1, 5, 3, 4, 3, 0, 2, 4],
        [0, 1, 5, 3, 5, 2, 4, 3, 2, 0],
        [0, 5, 3, 5, 1, 2, 0, 2, 3, 4],
        [0, 3, 5, 1, 1, 4, 4, 2, 0, 3],
    ];
    ButsonMatrix::from_fn(10, 10, 6, |i, j| rows[i][j])
}

/// Root of `a² + (√3 - 1)a + 1 = 0` with positive imaginary part; both
/// roots lie on the unit circle.
pub fn bjorck_froberg_root() -> C64 {
    let re = (1.0 - 3f64.sqrt()) / 2.0;
    C64::new(re, (1.0 - re * re).sqrt())
}

/// Build a named matrix, validating parameters and verifying the output.
pub fn named(which: NamedMatrix) -> Result<UnimodularMatrix> {
    let w = root_of_unity(1, 3);
    let w2 = root_of_unity(2, 3);
    let mat = match which {
        NamedMatrix::K4 => CMat::from_real(vec![
            vec![-1.0, 1.0, 1.0, 1.0],
            vec![1.0, -1.0, 1.0, 1.0],
            vec![1.0, 1.0, -1.0, 1.0],
            vec![1.0, 1.0, 1.0, -1.0],
        ])?,
        NamedMatrix::F4s(s) => {
            check_unit_params(&[("s", s)])?;
            CMat::from_rows(vec![
                vec![ONE, ONE, ONE, ONE],
                vec![ONE, -ONE, ONE, -ONE],
                vec![ONE, s, -ONE, -s],
                vec![ONE, -s, -ONE, s],
            ])?
        }
        NamedMatrix::F6Rs(r, s) => {
            check_unit_params(&[("r", r), ("s", s)])?;
            CMat::from_rows(vec![
                vec![ONE, ONE, ONE, ONE, ONE, ONE],
                vec![ONE, w, w2, ONE, w, w2],
                vec![ONE, w2, w, ONE, w2, w],
                vec![ONE, r, s, -ONE, -r, -s],
                vec![ONE, w * r, w2 * s, -ONE, -w * r, -w2 * s],
                vec![ONE, w2 * r, w * s, -ONE, -w2 * r, -w * s],
            ])?
        }
        NamedMatrix::F6RsLeft(r, s) => {
            check_unit_params(&[("r", r), ("s", s)])?;
            CMat::from_rows(vec![
                vec![ONE, ONE, ONE, ONE, ONE, ONE],
                vec![ONE, -ONE, ONE, -ONE, ONE, -ONE],
                vec![ONE, r, w, w * r, w2, w2 * r],
                vec![ONE, -r, w, -w * r, w2, -w2 * r],
                vec![ONE, s, w2, w2 * s, w, w * s],
                vec![ONE, -s, w2, -w2 * s, w, -w * s],
            ])?
        }
        NamedMatrix::H6Q(q) => {
            check_unit_params(&[("q", q)])?;
            let qc = q.conj();
            CMat::from_rows(vec![
                vec![ONE, ONE, ONE, ONE, ONE, ONE],
                vec![ONE, -ONE, IM, IM, -IM, -IM],
                vec![ONE, IM, -ONE, -IM, q, -q],
                vec![ONE, IM, -IM, -ONE, -q, q],
                vec![ONE, -IM, qc, -qc, IM, -ONE],
                vec![ONE, -IM, -qc, qc, -ONE, IM],
            ])?
        }
        NamedMatrix::T6 => tao().to_unimodular().into_cmat(),
        NamedMatrix::P7Q(q) => {
            check_unit_params(&[("q", q)])?;
            let qc = q.conj();
            CMat::from_rows(vec![
                vec![-q, q, w, ONE, w, ONE, w],
                vec![q, -q, w, ONE, ONE, w, w],
                vec![w, w, -w, ONE, w, w, ONE],
                vec![ONE, ONE, ONE, -ONE, w, w, w],
                vec![w, ONE, w, w, -qc * w, qc * w, ONE],
                vec![ONE, w, w, w, qc * w, -qc * w, ONE],
                vec![w, w, ONE, w, ONE, ONE, -ONE],
            ])?
        }
        NamedMatrix::Bf6 => {
            let a = bjorck_froberg_root();
            let ac = a.conj();
            let gamma = [ONE, IM * a, -a, -IM, -ac, IM * ac];
            CMat::from_fn(6, 6, |i, j| gamma[(j + 6 - i) % 6])
        }
        NamedMatrix::X106 => x10_6().to_unimodular().into_cmat(),
    };
    verified(mat, "named matrix")
}

// ---------------------------------------------------------------------------
// Szöllősi reduction
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Shrink a dephased symmetric real Hadamard matrix of size `N ≥ 8` to an
/// `(N-1)x(N-1)` complex Hadamard matrix: drop the first row and column,
/// then replace diagonal `1 -> -w` and off-diagonal `-1 -> w`, where
/// `w = (1 ± i√(N-5))² / (N-4)`.
pub fn szollosi(h: &ButsonMatrix, sign: Sign) -> Result<UnimodularMatrix> {
    if h.level() != 2 {
        return Err(Error::validation("input must be a sign matrix (level 2)"));
    }
    let n = h.rows();
    if h.cols() != n {
        return Err(Error::dim("input must be square"));
    }
    if n < 8 {
        return Err(Error::validation(format!("size must be at least 8, got {n}")));
    }
    for i in 0..n {
        for j in 0..n {
            if h.exponent(i, j) != h.exponent(j, i) {
                return Err(Error::validation("input is not symmetric"));
            }
        }
    }
    if (0..n).any(|j| h.exponent(0, j) != 0) || (0..n).any(|i| h.exponent(i, 0) != 0) {
        return Err(Error::validation("input is not dephased"));
    }
    if !h.verify_exact() {
        return Err(Error::validation("input is not Hadamard"));
    }
    let root = ((n - 5) as f64).sqrt();
    let z = match sign {
        Sign::Plus => C64::new(1.0, root),
        Sign::Minus => C64::new(1.0, -root),
    };
    let w = z * z / (n - 4) as f64;
    let mat = CMat::from_fn(n - 1, n - 1, |i, j| {
        let plus = h.exponent(i + 1, j + 1) == 0;
        match (i == j, plus) {
            (true, true) => -w,
            (true, false) => -ONE,
            (false, true) => ONE,
            (false, false) => w,
        }
    });
    verified(mat, "szollosi output")
}

// ---------------------------------------------------------------------------
// McNulty–Weigert
// ---------------------------------------------------------------------------

/// `c(c-1)/2 mod q`; the product is even, so the division is exact.
fn triangular_mod(c: u64, q: u64) -> u64 {
    if c == 0 {
        0
    } else {
        c * (c - 1) / 2 % q
    }
}

/// First row of the circulant `(1/√q) F_q^* D^k F_q` with the quadratic
/// diagonal `D_c = w^{c(c-1)/2}`, evaluated through the Gauss-sum closed
/// form: `V_i^k = δ_q (k/2 | q) w^{k(q²-1)/8} w^{-k·m(m-1)/2}` with
/// `m = i k^{-1} mod q`, `δ_q = 1` for `q = 1 (4)` and `i` for `q = 3 (4)`.
pub fn mw_row_closed(q: u64, k: u64) -> Result<Vec<C64>> {
    if !is_prime(q) || q == 2 {
        return Err(Error::validation(format!("{q} is not an odd prime")));
    }
    let k = k % q;
    if k == 0 {
        return Err(Error::validation("row index k must be nonzero mod q"));
    }
    let delta = if q % 4 == 1 { ONE } else { IM };
    let half = (q + 1) / 2;
    let leg = legendre(k * half % q, q);
    let lead = delta * leg as f64 * root_of_unity(((q * q - 1) / 8 * k % q) as i64, q as u32);
    let k_inv = pow_mod(k, q - 2, q);
    Ok((0..q)
        .map(|i| {
            let m = i * k_inv % q;
            let e = k * triangular_mod(m, q) % q;
            lead * root_of_unity(-(e as i64), q as u32)
        })
        .collect())
}

/// Same row evaluated directly from its defining sum,
/// `V_i^k = (1/√q) Σ_c w^{k c(c-1)/2 + ic}`.
pub fn mw_row_gauss(q: u64, k: u64) -> Result<Vec<C64>> {
    if !is_prime(q) || q == 2 {
        return Err(Error::validation(format!("{q} is not an odd prime")));
    }
    let scale = 1.0 / (q as f64).sqrt();
    Ok((0..q)
        .map(|i| {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..q {
                let e = (k * triangular_mod(c, q) + i * c) % q;
                acc += root_of_unity(e as i64, q as u32);
            }
            acc * scale
        })
        .collect())
}

/// Gauss-sum extension of a Hadamard matrix: for an odd prime `q`, disjoint
/// equal-size subsets `S, T` of `Z_q` and a Hadamard `K` of size `|S|`, the
/// `|S|q x |S|q` matrix `H_{ia,jb} = K_{ij} V^{t_j - s_i}_{b-a}` is Hadamard.
pub fn mcnulty_weigert(
    q: u64,
    s: &[u64],
    t: &[u64],
    k: &UnimodularMatrix,
) -> Result<UnimodularMatrix> {
    if !is_prime(q) || q == 2 {
        return Err(Error::validation(format!(
            "mcnulty_weigert requires an odd prime, got {q}"
        )));
    }
    let n = s.len();
    if n == 0 || t.len() != n {
        return Err(Error::validation("subsets must be nonempty and of equal size"));
    }
    for set in [s, t] {
        if set.iter().any(|&x| x >= q) {
            return Err(Error::validation("subset elements must lie in 0..q"));
        }
        for i in 0..set.len() {
            if set[i + 1..].contains(&set[i]) {
                return Err(Error::validation("subsets must not repeat elements"));
            }
        }
    }
    if s.iter().any(|x| t.contains(x)) {
        return Err(Error::validation("subsets must be disjoint"));
    }
    if k.rows() != n || k.cols() != n {
        return Err(Error::dim(format!(
            "core matrix must be {n}x{n}, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    if !verify_hadamard(k, TOL_GRAM)?.is_hadamard {
        return Err(Error::validation("core matrix is not Hadamard"));
    }
    let mut v: Vec<Option<Vec<C64>>> = vec![None; q as usize];
    for &ti in t {
        for &si in s {
            let d = (ti + q - si) % q;
            if v[d as usize].is_none() {
                v[d as usize] = Some(mw_row_closed(q, d)?);
            }
        }
    }
    let qi = q as usize;
    let mat = CMat::from_fn(n * qi, n * qi, |r, c| {
        let (i, a) = (r / qi, r % qi);
        let (j, b) = (c / qi, c % qi);
        let d = (t[j] + q - s[i]) % q;
        let row = v[d as usize].as_ref().expect("difference precomputed");
        k[(i, j)] * row[(b + qi - a) % qi]
    });
    verified(mat, "mcnulty_weigert output")
}

// ---------------------------------------------------------------------------
// Master matrices
// ---------------------------------------------------------------------------

/// A matrix `H_{ij} = λ_i^{n_j}` with unit-modulus bases and real exponents,
/// powers taken on the principal branch `(e^{it})^r = e^{itr}`, `t ∈ [0, 2π)`.
#[derive(Clone, Debug)]
pub struct MasterSpec {
    lambdas: Vec<C64>,
    exponents: Vec<f64>,
}

fn principal_arg(z: C64) -> f64 {
    let t = z.arg();
    if t < 0.0 {
        t + std::f64::consts::TAU
    } else {
        t
    }
}

impl MasterSpec {
    pub fn new(lambdas: Vec<C64>, exponents: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() != exponents.len() {
            return Err(Error::dim("base and exponent counts must match and be nonzero"));
        }
        for l in &lambdas {
            if (l.norm() - 1.0).abs() > TOL_ENTRY {
                return Err(Error::validation(format!(
                    "base {l} does not have unit modulus"
                )));
            }
        }
        Ok(Self { lambdas, exponents })
    }

    pub fn size(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[C64] {
        &self.lambdas
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// Master function `f(z) = Σ_j z^{n_j}` on the principal branch.
    pub fn f(&self, z: C64) -> C64 {
        let t = principal_arg(z);
        self.exponents.iter().map(|&n| phase(t * n)).sum()
    }
}

/// Build `H_{ij} = λ_i^{n_j}`.
pub fn master_build(spec: &MasterSpec) -> Result<UnimodularMatrix> {
    let n = spec.size();
    let args: Vec<f64> = spec.lambdas.iter().map(|&l| principal_arg(l)).collect();
    UnimodularMatrix::from_fn(n, n, |i, j| phase(args[i] * spec.exponents[j]))
}

/// Worst deviation of `f(λ_i / λ_j)` from `N δ_{ij}`.
pub fn master_deviation(spec: &MasterSpec) -> f64 {
    let n = spec.size();
    let mut worst = 0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { n as f64 } else { 0.0 };
            let val = spec.f(spec.lambdas[i] * spec.lambdas[j].conj());
            worst = worst.max((val - target).norm());
        }
    }
    worst
}

/// Whether the master function certifies the Hadamard property,
/// `f(λ_i / λ_j) = N δ_{ij}` within `tol`.
pub fn master_check(spec: &MasterSpec, tol: f64) -> bool {
    master_deviation(spec) <= tol
}
