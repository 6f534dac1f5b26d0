//! Almost Hadamard matrices: local maximizers of the 1-norm on the
//! orthogonal and unitary groups, the explicit circulant and two-entry
//! families, and the second-order functional that separates the real and
//! complex cases.

use num_complex::Complex64 as C64;

use crate::defect::{numeric_rank, tangent_system};
use crate::error::Error;
use crate::exec;
use crate::matrix::{CMat, UnimodularMatrix};
use crate::Result;

/// Entries at or below this modulus count as zero.
const ZERO_ENTRY: f64 = 1e-12;
/// Self-adjointness and reassembly slack.
const SYM_TOL: f64 = 1e-9;
/// Eigenvalue sums must clear this to count as positive.
const EIG_TOL: f64 = 1e-10;

fn check_unitary(u: &CMat, tol: f64) -> Result<()> {
    let n = u.rows();
    if u.cols() != n {
        return Err(Error::dim("needs a square matrix"));
    }
    for i in 0..n {
        for j in 0..n {
            let inner: C64 = (0..n).map(|k| u[(i, k)] * u[(j, k)].conj()).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (inner - want).norm() > tol {
                return Err(Error::validation("matrix is not unitary"));
            }
        }
    }
    Ok(())
}

fn check_real(u: &CMat) -> Result<()> {
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            if u[(i, j)].im.abs() > SYM_TOL {
                return Err(Error::validation("matrix has complex entries"));
            }
        }
    }
    Ok(())
}

fn has_zero_entry(u: &CMat) -> bool {
    (0..u.rows()).any(|i| (0..u.cols()).any(|j| u[(i, j)].norm() <= ZERO_ENTRY))
}

/// Entrywise phases, with 0 kept at zero entries.
fn sign_matrix(u: &CMat) -> CMat {
    u.map(|z| {
        if z.norm() <= ZERO_ENTRY {
            C64::new(0.0, 0.0)
        } else {
            z / z.norm()
        }
    })
}

fn self_adjoint_deviation(x: &CMat) -> f64 {
    let n = x.rows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((x[(i, j)] - x[(j, i)].conj()).norm());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Color decomposition
// ---------------------------------------------------------------------------

/// The decomposition `U = Σ_r r·U_r` of a matrix into its entry phases,
/// grouped by modulus: `sign_matrix` holds every phase, and each color
/// component holds the phases of one modulus class, zero elsewhere.
#[derive(Clone, Debug)]
pub struct SignDecomposition {
    sign_matrix: CMat,
    color_components: Vec<(f64, CMat)>,
}

impl SignDecomposition {
    /// Groups entry moduli within `1e-9` of each other into one radius.
    pub fn new(u: &CMat) -> Self {
        let (m, n) = (u.rows(), u.cols());
        let mut moduli: Vec<f64> = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| u[(i, j)].norm())
            .filter(|&r| r > ZERO_ENTRY)
            .collect();
        moduli.sort_by(f64::total_cmp);
        let mut radii: Vec<(f64, f64)> = Vec::new();
        for r in moduli {
            match radii.last_mut() {
                Some((_, hi)) if r - *hi < SYM_TOL => *hi = r,
                _ => radii.push((r, r)),
            }
        }
        let signs = sign_matrix(u);
        let color_components = radii
            .into_iter()
            .map(|(lo, hi)| {
                let component = CMat::from_fn(m, n, |i, j| {
                    let r = u[(i, j)].norm();
                    if r >= lo - SYM_TOL && r <= hi + SYM_TOL {
                        signs[(i, j)]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                ((lo + hi) / 2.0, component)
            })
            .collect();
        SignDecomposition { sign_matrix: signs, color_components }
    }

    pub fn sign_matrix(&self) -> &CMat {
        &self.sign_matrix
    }

    /// Radius and phase matrix of each modulus class, ascending.
    pub fn components(&self) -> &[(f64, CMat)] {
        &self.color_components
    }

    /// `Σ_r r·U_r`, which recovers the original matrix.
    pub fn reassemble(&self) -> CMat {
        let (m, n) = (self.sign_matrix.rows(), self.sign_matrix.cols());
        CMat::from_fn(m, n, |i, j| {
            self.color_components
                .iter()
                .map(|(r, c)| c[(i, j)] * *r)
                .sum()
        })
    }
}

// ---------------------------------------------------------------------------
// Critical points and local maximizers
// ---------------------------------------------------------------------------

/// Which group the 1-norm is maximized over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormDomain {
    Orthogonal,
    Unitary,
}

/// Whether `U` is a critical point of the 1-norm: `S U^t` symmetric in
/// the orthogonal case, `S U*` self-adjoint in the unitary case, where
/// `S` holds the entry phases. A zero entry rules out a local maximizer
/// outright, so it reports false.
pub fn critical_check(u: &CMat, domain: NormDomain) -> Result<bool> {
    check_unitary(u, 1e-8)?;
    if domain == NormDomain::Orthogonal {
        check_real(u)?;
    }
    if has_zero_entry(u) {
        return Ok(false);
    }
    let s = sign_matrix(u);
    let x = s.mul(&u.adjoint());
    Ok(self_adjoint_deviation(&x) < SYM_TOL)
}

/// Whether `U` locally maximizes the 1-norm on the orthogonal group:
/// nonzero entries, `X = S^t U` symmetric, and the sum of the two
/// smallest eigenvalues of `X` strictly positive.
pub fn local_max_check_real(u: &CMat) -> Result<bool> {
    check_unitary(u, 1e-8)?;
    check_real(u)?;
    let n = u.rows();
    if n < 2 {
        return Err(Error::dim("needs size at least 2"));
    }
    if has_zero_entry(u) {
        return Ok(false);
    }
    let s = sign_matrix(u);
    let x = s.transpose().mul(u);
    if self_adjoint_deviation(&x) >= SYM_TOL {
        return Ok(false);
    }
    let sym = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        (x[(i, j)].re + x[(j, i)].re) / 2.0
    });
    let mut eigs: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    Ok(eigs[0] + eigs[1] > EIG_TOL)
}

// ---------------------------------------------------------------------------
// Explicit families
// ---------------------------------------------------------------------------

/// The two-entry matrix `(2·ones − N·id)/√N`, an almost Hadamard matrix
/// for every `N ≥ 3`.
pub fn build_k_n(n: usize) -> CMat {
    let scale = (n as f64).sqrt();
    CMat::from_fn(n, n, |i, j| {
        let v = if i == j { 2.0 - n as f64 } else { 2.0 };
        C64::new(v / scale, 0.0)
    })
}

/// The circulant symmetric matrix with first row
/// `(-1)^k / cos(kπ/N) / √N`, an almost Hadamard matrix for odd `N`.
/// The builder checks the positivity certificate: the Fourier transform
/// of the sign-correlation vector must be strictly positive.
pub fn build_l_n(n: usize) -> Result<CMat> {
    if n % 2 == 0 || n < 3 {
        return Err(Error::validation("needs odd size at least 3"));
    }
    let nf = n as f64;
    let gamma: Vec<f64> = (0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign / (k as f64 * std::f64::consts::PI / nf).cos() / nf.sqrt()
        })
        .collect();
    let rho: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|r| gamma[r].signum() * gamma[(i + r) % n])
                .sum()
        })
        .collect();
    for l in 0..n {
        let nu: C64 = (0..n)
            .map(|i| crate::matrix::phase(-std::f64::consts::TAU * (l * i) as f64 / nf) * rho[i])
            .sum();
        if nu.im.abs() > 1e-8 || nu.re <= 0.0 {
            return Err(Error::validation(format!(
                "positivity certificate fails at index {l}"
            )));
        }
    }
    Ok(CMat::from_fn(n, n, |i, j| {
        C64::new(gamma[(n + j - i) % n], 0.0)
    }))
}

// ---------------------------------------------------------------------------
// Two-entry patterns
// ---------------------------------------------------------------------------

/// An orthogonal two-entry matrix built on a combinatorial pattern: any
/// two rows share `a` columns where both hold `x`, twice `b` mixed
/// columns, and `c` columns where both hold `y`.
#[derive(Clone, Debug)]
pub struct TwoEntryMatrix {
    pub x: f64,
    pub y: f64,
    pub matrix: CMat,
    /// The sign criterion `(N(a-b)+2b)|x| + (N(c-b)+2b)|y| ≥ 0` that
    /// promotes the rescaled matrix to almost Hadamard.
    pub criterion: bool,
}

/// 0/1 incidence of lines and points of the projective plane over the
/// integers mod `q`, for prime `q`: `N = q² + q + 1` on each side, every
/// line holding `q + 1` points, every pair of lines meeting once.
fn projective_incidence(q: u64) -> Result<Vec<Vec<bool>>> {
    if q < 2 || (2..q).any(|d| q % d == 0) {
        return Err(Error::unsupported(format!("{q} is not prime")));
    }
    let mut points: Vec<[u64; 3]> = Vec::new();
    // Canonical representatives: first nonzero coordinate equals 1.
    points.push([1, 0, 0]);
    for y in 0..q {
        points.push([y, 1, 0]);
    }
    for y in 0..q {
        for z in 0..q {
            points.push([y, z, 1]);
        }
    }
    let n = points.len();
    let incidence = points
        .iter()
        .map(|line| {
            points
                .iter()
                .map(|p| (line[0] * p[0] + line[1] * p[1] + line[2] * p[2]) % q == 0)
                .collect()
        })
        .collect::<Vec<Vec<bool>>>();
    debug_assert_eq!(n as u64, q * q + q + 1);
    Ok(incidence)
}

/// Circulant pattern from the quadratic residues mod a prime `p ≡ 3
/// (mod 4)`: cell `(i, j)` is marked when `j - i` is a nonzero square.
fn residue_incidence(p: u64) -> Vec<Vec<bool>> {
    let mut square = vec![false; p as usize];
    for v in 1..p {
        square[((v * v) % p) as usize] = true;
    }
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| square[((p + j - i) % p) as usize])
                .collect()
        })
        .collect()
}

fn pattern_for(a: u64, b: u64, c: u64) -> Result<Vec<Vec<bool>>> {
    let n = a + 2 * b + c;
    if a == 0 && b == 1 {
        return Ok((0..n).map(|i| (0..n).map(|j| i == j).collect()).collect());
    }
    if a == 1 && c == b * b - b && (2..b).all(|d| b % d != 0) && b >= 2 {
        return Ok(projective_incidence(b)?);
    }
    if n % 4 == 3 && a + 1 == b && b == c && (2..n).all(|d| n % d != 0) {
        return Ok(residue_incidence(n));
    }
    Err(Error::unsupported(format!(
        "no pattern builder for ({a}, {b}, {c})"
    )))
}

fn verify_pattern(cells: &[Vec<bool>], a: u64, b: u64, c: u64) -> Result<()> {
    let n = cells.len();
    for i in 0..n {
        for j in i + 1..n {
            let mut counts = [0u64; 4];
            for k in 0..n {
                counts[2 * cells[i][k] as usize + cells[j][k] as usize] += 1;
            }
            if counts != [c, b, b, a] {
                return Err(Error::validation(format!(
                    "rows {i} and {j} break the pattern"
                )));
            }
        }
    }
    Ok(())
}

/// Builds the orthogonal matrix on an `(a, b, c)` pattern, with `x` on
/// the marked cells: solving `ax² + 2bxy + cy² = 0` under row norm one
/// requires `b² ≥ ac`, and gives `x = -t/(√b(t+1))`, `y = 1/(√b(t+1))`
/// with `t` a root of `at² - 2bt + c`. Patterns are available for
/// `(0, 1, N-2)`, for the projective planes `(1, q, q²-q)` with `q`
/// prime, and for the quadratic-residue patterns at primes `N ≡ 3
/// (mod 4)`.
pub fn abc_pattern_matrix(a: u64, b: u64, c: u64) -> Result<TwoEntryMatrix> {
    if b == 0 {
        return Err(Error::validation("needs b ≥ 1"));
    }
    if b * b < a * c {
        return Err(Error::validation("needs b² ≥ ac"));
    }
    let (af, bf, cf) = (a as f64, b as f64, c as f64);
    let t = if a == 0 {
        cf / (2.0 * bf)
    } else {
        (bf - (bf * bf - af * cf).sqrt()) / af
    };
    let x = -t / (bf.sqrt() * (t + 1.0));
    let y = 1.0 / (bf.sqrt() * (t + 1.0));
    let cells = pattern_for(a, b, c)?;
    verify_pattern(&cells, a, b, c)?;
    let n = cells.len();
    let matrix = CMat::from_fn(n, n, |i, j| {
        C64::new(if cells[i][j] { x } else { y }, 0.0)
    });
    let nf = n as f64;
    let criterion =
        (nf * (af - bf) + 2.0 * bf) * x.abs() + (nf * (cf - bf) + 2.0 * bf) * y.abs() >= 0.0;
    Ok(TwoEntryMatrix { x, y, matrix, criterion })
}

/// The almost Hadamard matrix of the projective plane over the integers
/// mod a prime `q`: the `(1, q, q²-q)` pattern filled with
/// `x = (1-q√q)/√N` and `y = (q+(q+1)√q)/(q√N)`, where `N = q²+q+1`.
pub fn projective_ahm(q: u64) -> Result<CMat> {
    let two_entry = abc_pattern_matrix(1, q, q * q - q)?;
    let n = (q * q + q + 1) as f64;
    Ok(two_entry.matrix.map(|z| z * n.sqrt()))
}

// ---------------------------------------------------------------------------
// Balance
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BalanceStrength {
    /// `U_r U*` and `U* U_r` self-adjoint for every radius.
    Semi,
    /// `U_r U_s*` and `U_r* U_s` self-adjoint for every pair of radii.
    Full,
}

/// Whether the color components of `U` multiply symmetrically, which
/// makes `U` a critical point of every entrywise functional at once.
pub fn balanced_check(u: &CMat, strength: BalanceStrength) -> Result<bool> {
    check_unitary(u, 1e-8)?;
    let decomposition = SignDecomposition::new(u);
    let components = decomposition.components();
    for (idx, (_, ur)) in components.iter().enumerate() {
        let partners: Vec<&CMat> = match strength {
            BalanceStrength::Semi => vec![u],
            BalanceStrength::Full => {
                components[idx..].iter().map(|(_, us)| us).collect()
            }
        };
        for us in partners {
            if self_adjoint_deviation(&ur.mul(&us.adjoint())) >= SYM_TOL
                || self_adjoint_deviation(&ur.adjoint().mul(us)) >= SYM_TOL
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// The second-order functional
// ---------------------------------------------------------------------------

/// The second derivative of the 1-norm at `U` along a hermitian
/// direction `B`: `Re Tr(S*U B²) - Σ_ij Re[(UB)_ij conj(S_ij)]²/|U_ij|`.
/// Nonnegative for every `B` exactly when `U` locally maximizes the
/// 1-norm on the unitary group.
pub fn complex_phi(u: &CMat, b: &CMat) -> Result<f64> {
    check_unitary(u, 1e-8)?;
    let n = u.rows();
    if b.rows() != n || b.cols() != n {
        return Err(Error::dim("direction must match the matrix size"));
    }
    if self_adjoint_deviation(b) > SYM_TOL {
        return Err(Error::validation("direction must be hermitian"));
    }
    if has_zero_entry(u) {
        return Err(Error::validation("matrix has a zero entry"));
    }
    let s = sign_matrix(u);
    let ub = u.mul(b);
    let b2 = b.mul(b);
    let trace: f64 = (0..n)
        .map(|i| {
            (0..n)
                .map(|k| (s[(k, i)].conj() * (u.mul(&b2))[(k, i)]).re)
                .sum::<f64>()
        })
        .sum();
    let penalty: f64 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let r = (ub[(i, j)] * s[(i, j)].conj()).re;
                    r * r / u[(i, j)].norm()
                })
                .sum::<f64>()
        })
        .sum();
    Ok(trace - penalty)
}

/// Samples random hermitian directions and returns the first with a
/// negative functional value, as a certificate that `U` is not a local
/// maximizer over the unitary group.
pub fn phi_negative_witness(
    u: &CMat,
    draws: usize,
    seed: u64,
) -> Result<Option<(CMat, f64)>> {
    use rand::Rng;
    let n = u.rows();
    let mut rng = exec::stream_rng(seed, 0);
    let gaussian = |rng: &mut rand_chacha::ChaCha8Rng| {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u1.ln()).sqrt() * t.cos()
    };
    for _ in 0..draws {
        let g = CMat::from_fn(n, n, |_, _| {
            C64::new(gaussian(&mut rng), gaussian(&mut rng))
        });
        let b = CMat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) / 2.0);
        let value = complex_phi(u, &b)?;
        if value < -SYM_TOL {
            return Ok(Some((b, value)));
        }
    }
    Ok(None)
}

/// For a Hadamard matrix, the hermitian directions with vanishing
/// functional match the first-order deformation space: this checks that
/// the two dimensions agree.
pub fn defect_equivalence_check(h: &UnimodularMatrix) -> Result<bool> {
    if !crate::matrix::is_hadamard(h) {
        return Err(Error::validation("matrix must be Hadamard"));
    }
    let n = h.rows();
    let scale = (n as f64).sqrt();
    let u = CMat::from_fn(n, n, |i, j| h[(i, j)] / scale);

    // Hermitian directions B with Im[(UB)_ij conj(U_ij)] = 0, over the N²
    // real parameters (diagonal, then re/im of each upper cell).
    let param = |i: usize, j: usize| -> (usize, usize) {
        // Offsets of (re, im) for the upper cell i < j.
        let base = n + 2 * (i * n - i * (i + 1) / 2 + (j - i - 1));
        (base, base + 1)
    };
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![0.0; n * n];
            for s in 0..n {
                let factor = u[(i, s)] * u[(i, j)].conj();
                if s == j {
                    row[j] += factor.im;
                } else if s < j {
                    let (re, im) = param(s, j);
                    row[re] += factor.im;
                    row[im] += factor.re;
                } else {
                    let (re, im) = param(j, s);
                    row[re] += factor.im;
                    row[im] -= factor.re;
                }
            }
            rows.push(row);
        }
    }
    let (rank, _) = numeric_rank(&rows, 1e-8);
    let dim_directions = n * n - rank;

    // Real matrices A with Σ_k conj(U_ki) U_kj (A_ki - A_kj) = 0: the
    // deformation system over column pairs.
    let transpose = UnimodularMatrix::from_fn(n, n, |i, j| h[(j, i)])?;
    let sys = tangent_system(&transpose);
    let (rank_t, _) = numeric_rank(sys.rows(), 1e-8);
    let dim_deformations = n * n - rank_t;

    Ok(dim_directions == dim_deformations)
}
