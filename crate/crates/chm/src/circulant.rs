//! Circulant matrices: first-row specifications, cyclic root equations,
//! Fourier diagonalization, and the quartic functional `Φ` whose minimum
//! `N²` detects the circulant Hadamard property.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::matrix::{is_hadamard, phase, CMat, UnimodularMatrix, ONE, ZERO};
use crate::Result;

/// Per-equation residual bound under which a cyclic root is accepted.
pub const ROOT_TOL: f64 = 1e-9;

/// Modulus and symmetry slack accepted on `Φ` inputs.
const UNIT_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Circulant matrices by first row
// ---------------------------------------------------------------------------

/// A circulant matrix stored by its first row: `H_{ij} = γ_{j-i}`, indices
/// mod `N`. Entries are arbitrary complex numbers; being circulant is a
/// property of the storage, not a condition to verify.
#[derive(Clone, Debug)]
pub struct CirculantSpec {
    gamma: Vec<C64>,
}

impl CirculantSpec {
    pub fn new(gamma: Vec<C64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::validation("first row must be nonempty"));
        }
        Ok(CirculantSpec { gamma })
    }

    pub fn size(&self) -> usize {
        self.gamma.len()
    }

    pub fn first_row(&self) -> &[C64] {
        &self.gamma
    }

    /// The full matrix, `H_{ij} = γ_{j-i mod N}`.
    pub fn build(&self) -> CMat {
        let n = self.gamma.len();
        CMat::from_fn(n, n, |i, j| self.gamma[(n + j - i) % n])
    }

    /// `γ_k = γ_{-k}` within `tol`, entrywise; equivalent to symmetry of
    /// the built matrix.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.gamma.len();
        (1..n).all(|k| (self.gamma[k] - self.gamma[n - k]).norm() <= tol)
    }

    pub fn to_unimodular(&self) -> Result<UnimodularMatrix> {
        UnimodularMatrix::new(self.build())
    }

    /// Unimodular entries and pairwise orthogonal rows.
    pub fn is_hadamard(&self) -> bool {
        self.to_unimodular().map(|h| is_hadamard(&h)).unwrap_or(false)
    }
}

// ---------------------------------------------------------------------------
// Fourier diagonalization
// ---------------------------------------------------------------------------

/// Eigenvalues of the circulant matrix with first row `γ`: the transform
/// values `q_j = Σ_r w^{jr} γ_r` with `w = e^{2πi/N}`. The matrix equals
/// `F diag(q) F*` for the unitary Fourier matrix `F_{jk} = w^{jk}/√N`; it
/// is unitary exactly when all `|q_j| = 1`, and real exactly when
/// `conj(q_j) = q_{-j}`.
pub fn fourier_diagonalize(spec: &CirculantSpec) -> Vec<C64> {
    let n = spec.size();
    let g = spec.first_row();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|r| phase(TAU * ((j * r) % n) as f64 / n as f64) * g[r])
                .sum()
        })
        .collect()
}

/// Inverse of [`fourier_diagonalize`]: the circulant matrix `F diag(q) F*`
/// with the given eigenvalues, as its first row `γ_m = (1/N) Σ_k w^{-mk} q_k`.
pub fn circulant_from_eigenvalues(q: &[C64]) -> Result<CirculantSpec> {
    let n = q.len();
    if n == 0 {
        return Err(Error::validation("eigenvalue vector must be nonempty"));
    }
    let gamma = (0..n)
        .map(|m| {
            (0..n)
                .map(|k| phase(-TAU * ((m * k) % n) as f64 / n as f64) * q[k])
                .sum::<C64>()
                / n as f64
        })
        .collect();
    CirculantSpec::new(gamma)
}

// ---------------------------------------------------------------------------
// Cyclic roots
// ---------------------------------------------------------------------------

/// A candidate solution of the cyclic root system: for each window length
/// `K = 1..N-1` the sum of cyclically consecutive products
/// `Σ_i z_{i+1}···z_{i+K}` must vanish, and the full product `z_0···z_{N-1}`
/// must equal 1. All `N` equation residuals and the worst modulus deviation
/// are recorded; the root is valid when every one of them is at most `tol`.
/// The circulant matrix with first row `(z_0, z_0z_1, …, z_0···z_{N-1})` is
/// Hadamard exactly when the root is valid.
#[derive(Clone, Debug)]
pub struct CyclicRoot {
    z: Vec<C64>,
    sum_residuals: Vec<f64>,
    product_residual: f64,
    modulus_deviation: f64,
    tol: f64,
}

impl CyclicRoot {
    pub fn new(z: Vec<C64>) -> Result<Self> {
        Self::with_tol(z, ROOT_TOL)
    }

    pub fn with_tol(z: Vec<C64>, tol: f64) -> Result<Self> {
        let n = z.len();
        if n == 0 {
            return Err(Error::validation("root must be nonempty"));
        }
        if z.iter().any(|v| v.norm() == 0.0) {
            return Err(Error::validation("root entries must be nonzero"));
        }
        let modulus_deviation = z
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        // Window products of length K, grown in place from length K-1.
        let mut windows = vec![ONE; n];
        let mut sum_residuals = Vec::with_capacity(n - 1);
        for k in 1..n {
            for (i, w) in windows.iter_mut().enumerate() {
                *w *= z[(i + k) % n];
            }
            sum_residuals.push(windows.iter().sum::<C64>().norm());
        }
        // Product equation in log space: the real parts of the entry logs
        // must sum to 0, and the arguments to a multiple of 2π.
        let log_sum = z
            .iter()
            .map(|v| C64::new(v.norm().ln(), v.arg()))
            .sum::<C64>();
        let wrapped = log_sum.im - TAU * (log_sum.im / TAU).round();
        let product_residual = log_sum.re.hypot(wrapped);
        Ok(CyclicRoot { z, sum_residuals, product_residual, modulus_deviation, tol })
    }

    pub fn size(&self) -> usize {
        self.z.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.z
    }

    /// Residuals of the window-sum equations, indexed by `K - 1`.
    pub fn sum_residuals(&self) -> &[f64] {
        &self.sum_residuals
    }

    pub fn product_residual(&self) -> f64 {
        self.product_residual
    }

    pub fn modulus_deviation(&self) -> f64 {
        self.modulus_deviation
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn valid(&self) -> bool {
        self.modulus_deviation <= self.tol
            && self.product_residual <= self.tol
            && self.sum_residuals.iter().all(|&r| r <= self.tol)
    }

    /// The circulant matrix generated by the root.
    pub fn circulant(&self) -> CirculantSpec {
        circulant_from_root(&self.z).expect("root is nonempty")
    }
}

/// Whether `z` satisfies all cyclic root equations within [`ROOT_TOL`].
pub fn cyclic_root_check(z: &[C64]) -> bool {
    CyclicRoot::new(z.to_vec()).map(|r| r.valid()).unwrap_or(false)
}

/// First row from a root by partial products, `γ_k = z_0 z_1 ··· z_k`.
pub fn circulant_from_root(z: &[C64]) -> Result<CirculantSpec> {
    if z.is_empty() {
        return Err(Error::validation("root must be nonempty"));
    }
    let mut acc = ONE;
    let gamma = z
        .iter()
        .map(|&v| {
            acc *= v;
            acc
        })
        .collect();
    CirculantSpec::new(gamma)
}

/// Quotients of consecutive first-row entries, `z_i = γ_i / γ_{i-1}`. On a
/// circulant Hadamard matrix this is a valid cyclic root, and
/// [`circulant_from_root`] rebuilds the first row divided by `γ_{N-1}`.
pub fn root_from_circulant(spec: &CirculantSpec) -> Result<Vec<C64>> {
    let g = spec.first_row();
    let n = g.len();
    if g.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::validation("first row has a zero entry"));
    }
    Ok((0..n).map(|i| g[i] / g[(i + n - 1) % n]).collect())
}

// ---------------------------------------------------------------------------
// The circulant form of the Fourier matrix
// ---------------------------------------------------------------------------

/// The circulant form of the Fourier matrix: built from the cyclic root
/// `(q, qw, qw², …, qw^{N-1})` with `ν = e^{iπ/N}`, `q = ν^{N-1}`, `w = ν²`.
/// The result has first row `γ_k = ν^{(k+1)(N+k-1)}`; it is symmetric,
/// Hadamard, and equivalent to the Fourier matrix of the same size.
pub fn fourier_circulant_form(n: usize) -> Result<CirculantSpec> {
    if n == 0 {
        return Err(Error::validation("size must be positive"));
    }
    let z: Vec<C64> = (0..n)
        .map(|j| phase(PI * ((n - 1 + 2 * j) % (2 * n)) as f64 / n as f64))
        .collect();
    circulant_from_root(&z)
}

// ---------------------------------------------------------------------------
// Roots with block structure
// ---------------------------------------------------------------------------

/// The length-`M·N` cyclic root `(q_1…q_M, q_1w…q_Mw, …, q_1w^{N-1}…q_Mw^{N-1})`
/// with `w = e^{2πi/N}`, for `M` dividing `N`. Such a vector is a valid root
/// exactly when `(q_1···q_M)^N = (-1)^{M(N-1)}`, so the builder rejects
/// parameters violating that identity; the residuals of the returned root
/// certify validity independently.
pub fn backelin(m: usize, n: usize, qs: &[C64]) -> Result<CyclicRoot> {
    check_block_params(m, n, qs)?;
    // Power condition in log space: N Σ arg(q_i) must be M(N-1)π mod 2π.
    let arg_sum: f64 = qs.iter().map(|q| q.arg()).sum();
    let target = if (m * (n - 1)) % 2 == 0 { 0.0 } else { PI };
    let dev = angle_distance(n as f64 * arg_sum, target);
    if dev > ROOT_TOL {
        return Err(Error::validation(format!(
            "(q_1···q_M)^N must equal (-1)^(M(N-1)); phase deviates by {dev:.3e}"
        )));
    }
    let z = (0..n)
        .flat_map(|r| {
            let block = phase(TAU * r as f64 / n as f64);
            qs.iter().map(move |&q| q * block)
        })
        .collect();
    CyclicRoot::new(z)
}

/// The symmetry conditions on [`backelin`] parameters: `q_1 q_2 = 1` and
/// `q_3 q_M = q_4 q_{M-1} = … = w`, with the `M = 1` case reading
/// `q_1² w = 1`. When they hold, the generated circulant matrix is
/// symmetric.
pub fn backelin_symmetric(m: usize, n: usize, qs: &[C64]) -> Result<bool> {
    check_block_params(m, n, qs)?;
    let w = phase(TAU / n as f64);
    if m == 1 {
        return Ok((qs[0] * qs[0] * w - ONE).norm() <= ROOT_TOL);
    }
    if (qs[0] * qs[1] - ONE).norm() > ROOT_TOL {
        return Ok(false);
    }
    let (mut a, mut b) = (2, m - 1);
    while a <= b {
        if (qs[a] * qs[b] - w).norm() > ROOT_TOL {
            return Ok(false);
        }
        a += 1;
        b -= 1;
    }
    Ok(true)
}

fn check_block_params(m: usize, n: usize, qs: &[C64]) -> Result<()> {
    if m == 0 || n == 0 || n % m != 0 {
        return Err(Error::validation("block count must divide the period"));
    }
    if qs.len() != m {
        return Err(Error::dim(format!("expected {m} parameters, got {}", qs.len())));
    }
    let worst = qs
        .iter()
        .map(|q| (q.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if worst > ROOT_TOL {
        return Err(Error::validation(format!(
            "parameter modulus deviates from 1 by {worst:.3e}"
        )));
    }
    Ok(())
}

/// Distance from `a` to `b` modulo 2π.
fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

// ---------------------------------------------------------------------------
// The quartic functional Φ
// ---------------------------------------------------------------------------

/// Validates unit moduli within 1e-9 and rescales entries to exact modulus
/// 1, so that conjugation inverts them exactly.
fn unit_vector(q: &[C64]) -> Result<Vec<C64>> {
    if q.is_empty() {
        return Err(Error::validation("phase vector must be nonempty"));
    }
    let worst = q
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if worst > UNIT_TOL {
        return Err(Error::validation(format!(
            "entry modulus deviates from 1 by {worst:.3e}"
        )));
    }
    Ok(q.iter().map(|v| v / v.norm()).collect())
}

/// Cyclic pair sums `c_s = Σ_{i+k=s} q_i q_k`.
fn pair_sums(q: &[C64]) -> Vec<C64> {
    let n = q.len();
    let mut c = vec![ZERO; n];
    for i in 0..n {
        for k in 0..n {
            c[(i + k) % n] += q[i] * q[k];
        }
    }
    c
}

/// The quartic functional `Φ = Σ_{i+k=j+l} q_i q_k / (q_j q_l)` over unit
/// phases, indices mod `N`, grouped as `Σ_s |c_s|²` with
/// `c_s = Σ_{i+k=s} q_i q_k`. Always `Φ ≥ N²`, with equality exactly when
/// `√N q` is the eigenvalue vector of a circulant Hadamard matrix.
pub fn phi_functional(q: &[C64]) -> Result<f64> {
    let q = unit_vector(q)?;
    Ok(pair_sums(&q).iter().map(|c| c.norm_sqr()).sum())
}

/// The split `Φ = Φ_0 + … + Φ_{N-1}` with the first index held fixed:
/// `Φ_i = q_i Σ_k q_k conj(c_{i+k})`. Components are complex in general;
/// all are real exactly at the critical points of `Φ`, and all equal `N`
/// in the Hadamard case.
pub fn phi_components(q: &[C64]) -> Result<Vec<C64>> {
    let q = unit_vector(q)?;
    let n = q.len();
    let c = pair_sums(&q);
    Ok((0..n)
        .map(|i| {
            q[i] * (0..n)
                .map(|k| q[k] * c[(i + k) % n].conj())
                .sum::<C64>()
        })
        .collect())
}

/// Alternate route to [`phi_functional`] through the diagonalization: with
/// `ν` the unitary Fourier transform of `q`,
/// `Φ = N² + Σ_{i<j} (|ν_i|² - |ν_j|²)²`.
pub fn phi_via_spread(q: &[C64]) -> Result<f64> {
    let q = unit_vector(q)?;
    let n = q.len();
    let moduli: Vec<f64> = (0..n)
        .map(|m| {
            (0..n)
                .map(|k| phase(TAU * ((m * k) % n) as f64 / n as f64) * q[k])
                .sum::<C64>()
                .norm_sqr()
                / n as f64
        })
        .collect();
    let mut spread = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            spread += (moduli[i] - moduli[j]).powi(2);
        }
    }
    Ok((n * n) as f64 + spread)
}

/// `Φ` in the self-conjugate case `conj(q_i) = q_{-i}`, where it reduces to
/// the quartic sum `Σ_{i+j+k+l=0} q_i q_j q_k q_l`; inputs violating the
/// symmetry are rejected. Equality `Φ = N²` makes `√N q` the eigenvalue
/// vector of a REAL circulant Hadamard matrix; `(1,-1,-1,-1)` attains it at
/// `N = 4`.
pub fn real_phi_check(q: &[C64]) -> Result<f64> {
    let q = unit_vector(q)?;
    let n = q.len();
    let sym = (0..n)
        .map(|i| (q[i].conj() - q[(n - i) % n]).norm())
        .fold(0.0, f64::max);
    if sym > UNIT_TOL {
        return Err(Error::validation(format!(
            "conj(q_i) = q_(-i) fails by {sym:.3e}"
        )));
    }
    let c = pair_sums(&q);
    let total: C64 = (0..n).map(|s| c[s] * c[(n - s) % n]).sum();
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{named, NamedMatrix};
    use crate::exec;
    use crate::matrix::{fingerprint, fourier_unimodular};
    use rand::Rng;

    const SEED: u64 = 0xC19C;

    fn random_phases(n: usize, stream: u64) -> Vec<C64> {
        let mut rng = exec::stream_rng(SEED, stream);
        (0..n).map(|_| phase(TAU * rng.gen::<f64>())).collect()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Literal quadruple sum over `i + k = j + l`, with actual division.
    fn phi_bruteforce(q: &[C64]) -> C64 {
        let n = q.len();
        let mut total = ZERO;
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    let l = (i + k + n - j) % n;
                    total += q[i] * q[k] / (q[j] * q[l]);
                }
            }
        }
        total
    }

    #[test]
    fn spec_build_and_symmetry() {
        assert!(CirculantSpec::new(vec![]).is_err());
        let k4 = CirculantSpec::new(vec![c(-1.0, 0.0), ONE, ONE, ONE]).unwrap();
        let built = k4.build();
        assert_eq!(built.rows(), 4);
        assert!(built.max_diff(named(NamedMatrix::K4).unwrap().cmat()) < 1e-15);
        assert_eq!(built[(1, 3)], k4.first_row()[2]);
        assert_eq!(built[(3, 1)], k4.first_row()[2]);
        assert!(k4.is_symmetric(0.0));
        let sym = CirculantSpec::new(vec![ONE, c(0.0, 1.0), -ONE, c(0.0, 1.0)]).unwrap();
        assert!(sym.is_symmetric(1e-12));
        assert!(sym.build().max_diff(&sym.build().transpose()) < 1e-12);
        let asym = CirculantSpec::new(vec![ONE, c(0.0, 1.0), ONE, ONE]).unwrap();
        assert!(!asym.is_symmetric(1e-12));
    }

    #[test]
    fn diagonalization_round_trips() {
        // Identity circulant: eigenvalues all one.
        let id = CirculantSpec::new(vec![ONE, ZERO, ZERO, ZERO, ZERO]).unwrap();
        for v in fourier_diagonalize(&id) {
            assert!((v - ONE).norm() < 1e-12);
        }
        // The symmetric real Hadamard matrix of size 4: one positive
        // eigenvalue 2, three copies of -2.
        let k4 = CirculantSpec::new(vec![-ONE, ONE, ONE, ONE]).unwrap();
        let q = fourier_diagonalize(&k4);
        assert!((q[0] - c(2.0, 0.0)).norm() < 1e-12);
        for j in 1..4 {
            assert!((q[j] + c(2.0, 0.0)).norm() < 1e-12);
        }
        // Eigenvalue formula against the literal product F diag(q) F*.
        let general = CirculantSpec::new(
            random_phases(6, 40)
                .iter()
                .enumerate()
                .map(|(k, v)| v * (0.5 + 0.1 * k as f64))
                .collect(),
        )
        .unwrap();
        for spec in [fourier_circulant_form(3).unwrap(), general] {
            let n = spec.size();
            let q = fourier_diagonalize(&spec);
            let f = fourier_unimodular(n);
            let scale = 1.0 / (n as f64).sqrt();
            let fu = CMat::from_fn(n, n, |i, j| f.cmat()[(i, j)] * scale);
            let mut diag = CMat::zeros(n, n);
            for (i, &v) in q.iter().enumerate() {
                diag[(i, i)] = v;
            }
            let rebuilt = fu.mul(&diag).mul(&fu.adjoint());
            assert!(rebuilt.max_diff(&spec.build()) < 1e-10);
            // Closed-form inverse agrees with the matrix product route.
            let back = circulant_from_eigenvalues(&q).unwrap();
            assert!(back.build().max_diff(&spec.build()) < 1e-10);
        }
        // Random eigenvalues round-trip the other way.
        let q = random_phases(7, 3);
        let spec = circulant_from_eigenvalues(&q).unwrap();
        let q2 = fourier_diagonalize(&spec);
        for (a, b) in q.iter().zip(&q2) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn unitarity_and_reality_match_eigenvalue_conditions() {
        // Rescaled Hadamard: unit eigenvalues and a unitary matrix.
        let quarter = CirculantSpec::new(vec![c(-0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)])
            .unwrap();
        let q = fourier_diagonalize(&quarter);
        assert!(q.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        let u = quarter.build();
        assert!(u.mul(&u.adjoint()).max_diff(&CMat::identity(4)) < 1e-12);
        // A zero entry in the first row breaks unitarity and unit moduli.
        let flat = CirculantSpec::new(vec![ONE, ONE, ZERO]).unwrap();
        let q = fourier_diagonalize(&flat);
        assert!(q.iter().any(|v| (v.norm() - 1.0).abs() > 0.5));
        let u = flat.build();
        assert!(u.mul(&u.adjoint()).max_diff(&CMat::identity(3)) > 0.5);
        // Real first row forces conj(q_i) = q_{-i} ...
        let k4 = CirculantSpec::new(vec![-ONE, ONE, ONE, ONE]).unwrap();
        let q = fourier_diagonalize(&k4);
        for i in 0..4 {
            assert!((q[i].conj() - q[(4 - i) % 4]).norm() < 1e-12);
        }
        // ... and conversely such eigenvalues build a real matrix.
        let mut rng = exec::stream_rng(SEED, 7);
        let mut q = vec![ONE; 6];
        q[0] = if rng.gen::<bool>() { ONE } else { -ONE };
        q[3] = if rng.gen::<bool>() { ONE } else { -ONE };
        for i in 1..3 {
            q[i] = phase(TAU * rng.gen::<f64>());
            q[6 - i] = q[i].conj();
        }
        let spec = circulant_from_eigenvalues(&q).unwrap();
        for v in spec.first_row() {
            assert!(v.im.abs() < 1e-12);
        }
        // The Fourier circulant form is not real, and its eigenvalues
        // break the conjugation symmetry.
        let f3 = fourier_circulant_form(3).unwrap();
        let q = fourier_diagonalize(&f3);
        assert!((0..3).any(|i| (q[i].conj() - q[(3 - i) % 3]).norm() > 0.5));
    }

    #[test]
    fn cyclic_root_catalogue_examples() {
        let w = phase(TAU / 3.0);
        // Period 3: root (w, w², 1) generates first row (w, 1, 1).
        let root = CyclicRoot::new(vec![w, w * w, ONE]).unwrap();
        assert!(root.valid());
        let spec = root.circulant();
        assert!((spec.first_row()[0] - w).norm() < 1e-12);
        assert!((spec.first_row()[1] - ONE).norm() < 1e-12);
        assert!((spec.first_row()[2] - ONE).norm() < 1e-12);
        assert!(spec.is_hadamard());
        assert!(
            spec.build()
                .max_diff(&fourier_circulant_form(3).unwrap().build())
                < 1e-12
        );
        // Period 2: root (i, -i) generates the matrix with diagonal i.
        let i = c(0.0, 1.0);
        assert!(cyclic_root_check(&[i, -i]));
        let spec = circulant_from_root(&[i, -i]).unwrap();
        let expect = CMat::from_rows(vec![vec![i, ONE], vec![ONE, i]]).unwrap();
        assert!(spec.build().max_diff(&expect) < 1e-12);
        assert!(spec.build().max_diff(&fourier_circulant_form(2).unwrap().build()) < 1e-12);
        // The all-ones vector fails every window equation but has product 1.
        let flat = CyclicRoot::new(vec![ONE, ONE, ONE]).unwrap();
        assert!(!flat.valid());
        assert!(!cyclic_root_check(&[ONE, ONE, ONE]));
        assert_eq!(flat.sum_residuals().len(), 2);
        assert!((flat.sum_residuals()[0] - 3.0).abs() < 1e-12);
        assert!((flat.sum_residuals()[1] - 3.0).abs() < 1e-12);
        assert!(flat.product_residual() < 1e-12);
        assert!(!flat.circulant().is_hadamard());
        // Zero entries are rejected outright.
        assert!(CyclicRoot::new(vec![ONE, ZERO]).is_err());
    }

    #[test]
    fn root_validity_iff_hadamard() {
        let mut cases: Vec<CyclicRoot> = (2..=10)
            .map(|n| {
                CyclicRoot::new(
                    root_from_circulant(&fourier_circulant_form(n).unwrap()).unwrap(),
                )
                .unwrap()
            })
            .collect();
        // Interior perturbation: breaks window sums and the matrix alike.
        let mut z = cases[3].entries().to_vec();
        z[1] *= phase(1e-3);
        cases.push(CyclicRoot::new(z).unwrap());
        // Constant phase on every entry: window sums stay zero, only the
        // product equation fails, and the wrap-around entry breaks the
        // matrix.
        let z: Vec<C64> = cases[3]
            .entries()
            .iter()
            .map(|&v| v * phase(0.7 / 5.0))
            .collect();
        let orbit = CyclicRoot::new(z).unwrap();
        assert!(orbit.sum_residuals().iter().all(|&r| r < 1e-12));
        assert!((orbit.product_residual() - 0.7).abs() < 1e-9);
        cases.push(orbit);
        // Generic unimodular vectors are not roots.
        cases.push(CyclicRoot::new(random_phases(6, 11)).unwrap());
        cases.push(CyclicRoot::new(random_phases(9, 12)).unwrap());
        let mut seen_invalid = 0;
        for root in &cases {
            assert_eq!(root.valid(), root.circulant().is_hadamard());
            seen_invalid += usize::from(!root.valid());
        }
        assert_eq!(seen_invalid, 4);
    }

    #[test]
    fn fourier_form_first_rows() {
        // Size 2: diagonal i.
        let f2 = fourier_circulant_form(2).unwrap().build();
        let i = c(0.0, 1.0);
        let expect = CMat::from_rows(vec![vec![i, ONE], vec![ONE, i]]).unwrap();
        assert!(f2.max_diff(&expect) < 1e-12);
        // Size 4: first row (ν³, 1, ν⁷, 1) with ν = e^{iπ/4}.
        let nu = phase(PI / 4.0);
        let f4 = fourier_circulant_form(4).unwrap();
        let expect = [nu.powi(3), ONE, nu.powi(7), ONE];
        for (a, b) in f4.first_row().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
        // Size 5: first row (w², 1, w⁴, w⁴, 1) with w = e^{2πi/5}.
        let w = phase(TAU / 5.0);
        let f5 = fourier_circulant_form(5).unwrap();
        let expect = [w.powi(2), ONE, w.powi(4), w.powi(4), ONE];
        for (a, b) in f5.first_row().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
        // Closed form for the whole catalogue range.
        for n in 1..=16usize {
            let spec = fourier_circulant_form(n).unwrap();
            for (k, v) in spec.first_row().iter().enumerate() {
                let e = ((k + 1) * (n + k - 1)) % (2 * n);
                let expect = phase(PI * e as f64 / n as f64);
                assert!((v - expect).norm() < 1e-12);
            }
            let root = CyclicRoot::new(root_from_circulant(&spec).unwrap()).unwrap();
            assert!(root.valid());
        }
    }

    #[test]
    fn fourier_form_symmetric_hadamard_equivalent() {
        for n in 1..=16usize {
            let spec = fourier_circulant_form(n).unwrap();
            assert!(spec.is_symmetric(1e-12), "size {n} not symmetric");
            assert!(spec.is_hadamard(), "size {n} not Hadamard");
        }
        for n in 2..=16usize {
            let spec = fourier_circulant_form(n).unwrap();
            let lhs = fingerprint(&spec.to_unimodular().unwrap(), 9).unwrap();
            let rhs = fingerprint(&fourier_unimodular(n), 9).unwrap();
            assert_eq!(lhs, rhs, "size {n} fingerprint mismatch");
        }
    }

    #[test]
    fn backelin_single_block_reduces_to_fourier_form() {
        for n in 2..=8usize {
            let q = phase(PI * (n - 1) as f64 / n as f64);
            let root = backelin(1, n, &[q]).unwrap();
            assert!(root.valid());
            let expect = root_from_circulant(&fourier_circulant_form(n).unwrap()).unwrap();
            for (a, b) in root.entries().iter().zip(&expect) {
                assert!((a - b).norm() < 1e-12);
            }
            assert!(
                root.circulant()
                    .build()
                    .max_diff(&fourier_circulant_form(n).unwrap().build())
                    < 1e-12
            );
            assert!(backelin_symmetric(1, n, &[q]).unwrap());
        }
    }

    #[test]
    fn backelin_blocks_and_preconditions() {
        let i = c(0.0, 1.0);
        // Two blocks of period two: a valid root of length four.
        let root = backelin(2, 2, &[i, i]).unwrap();
        assert_eq!(root.size(), 4);
        assert!(root.valid());
        let expect = [i, i, -i, -i];
        for (a, b) in root.entries().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(root.circulant().is_hadamard());
        // This parameter pair is not in the symmetric family, and the
        // matrix indeed is not symmetric.
        assert!(!backelin_symmetric(2, 2, &[i, i]).unwrap());
        assert!(!root.circulant().is_symmetric(1e-12));
        // Three blocks of period three.
        let root = backelin(3, 3, &[ONE, ONE, ONE]).unwrap();
        assert_eq!(root.size(), 9);
        assert!(root.valid());
        assert!(root.circulant().is_hadamard());
        // Power condition violations and malformed parameters.
        assert!(backelin(2, 2, &[ONE, i]).is_err());
        assert!(backelin(2, 3, &[i, i]).is_err());
        assert!(backelin(2, 4, &[i]).is_err());
        assert!(backelin(0, 4, &[]).is_err());
        assert!(backelin(1, 3, &[c(1.1, 0.0)]).is_err());
    }

    #[test]
    fn backelin_symmetric_families() {
        let i = c(0.0, 1.0);
        // Period two: first row (i, 1, -i, 1).
        assert!(backelin_symmetric(2, 2, &[i, -i]).unwrap());
        let spec = backelin(2, 2, &[i, -i]).unwrap().circulant();
        assert!(spec.is_symmetric(1e-12));
        assert!(spec.is_hadamard());
        let expect = [i, ONE, -i, ONE];
        for (a, b) in spec.first_row().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
        // A one-parameter family of symmetric 8x8 circulant Hadamard
        // matrices.
        let qs = [phase(0.3), phase(-0.3)];
        assert!(backelin_symmetric(2, 4, &qs).unwrap());
        let root = backelin(2, 4, &qs).unwrap();
        assert!(root.valid());
        let spec = root.circulant();
        assert_eq!(spec.size(), 8);
        assert!(spec.is_symmetric(1e-12));
        assert!(spec.is_hadamard());
        // Three blocks: q_3 must be a square root of w with cube one.
        let qs = [phase(0.4), phase(-0.4), phase(4.0 * PI / 3.0)];
        assert!(backelin_symmetric(3, 3, &qs).unwrap());
        let root = backelin(3, 3, &qs).unwrap();
        assert!(root.valid());
        let spec = root.circulant();
        assert_eq!(spec.size(), 9);
        assert!(spec.is_symmetric(1e-12));
        assert!(spec.is_hadamard());
    }

    #[test]
    fn phi_equality_cases_and_components() {
        // Eigenphases of the size-4 real circulant Hadamard matrix.
        let q = [ONE, -ONE, -ONE, -ONE];
        assert!((phi_functional(&q).unwrap() - 16.0).abs() < 1e-12);
        for comp in phi_components(&q).unwrap() {
            assert!((comp - c(4.0, 0.0)).norm() < 1e-12);
        }
        // The all-ones vector at size 3 sits strictly above the bound.
        let q = [ONE, ONE, ONE];
        assert!((phi_functional(&q).unwrap() - 27.0).abs() < 1e-12);
        assert!((phi_via_spread(&q).unwrap() - 27.0).abs() < 1e-12);
        // Eigenphases of the circulant Fourier form attain equality.
        let spec = fourier_circulant_form(6).unwrap();
        let scale = 1.0 / 6f64.sqrt();
        let q: Vec<C64> = fourier_diagonalize(&spec).iter().map(|v| v * scale).collect();
        assert!((phi_functional(&q).unwrap() - 36.0).abs() < 1e-9);
        for comp in phi_components(&q).unwrap() {
            assert!((comp - c(6.0, 0.0)).norm() < 1e-9);
        }
        // Components always sum to the functional.
        for n in [3usize, 5, 8] {
            let q = random_phases(n, 20 + n as u64);
            let total: C64 = phi_components(&q).unwrap().into_iter().sum();
            assert!((total.re - phi_functional(&q).unwrap()).abs() < 1e-9);
            assert!(total.im.abs() < 1e-9);
        }
        // Malformed inputs.
        assert!(phi_functional(&[]).is_err());
        assert!(phi_functional(&[c(0.5, 0.0)]).is_err());
    }

    #[test]
    fn phi_routes_agree_and_bound_holds() {
        for n in 2..=7usize {
            for draw in 0..10u64 {
                let q = random_phases(n, 100 + 10 * n as u64 + draw);
                let fast = phi_functional(&q).unwrap();
                let spread = phi_via_spread(&q).unwrap();
                let brute = phi_bruteforce(&q);
                assert!(brute.im.abs() < 1e-10);
                assert!((fast - brute.re).abs() < 1e-9);
                assert!((fast - spread).abs() < 1e-9);
                assert!(fast >= (n * n) as f64 - 1e-9);
            }
        }
    }

    #[test]
    fn phi_invariances() {
        let q = random_phases(6, 55);
        let base = phi_functional(&q).unwrap();
        // Cyclic shift.
        let shifted: Vec<C64> = (0..6).map(|k| q[(k + 1) % 6]).collect();
        assert!((phi_functional(&shifted).unwrap() - base).abs() < 1e-9);
        // Global phase.
        let rotated: Vec<C64> = q.iter().map(|v| v * phase(0.7)).collect();
        assert!((phi_functional(&rotated).unwrap() - base).abs() < 1e-9);
        // Fourth power of the 4-norm of the circulant unitary built from q.
        let u = circulant_from_eigenvalues(&q).unwrap().build();
        let norm4: f64 = (0..6)
            .flat_map(|i| (0..6).map(move |j| (i, j)))
            .map(|(i, j)| u[(i, j)].norm_sqr().powi(2))
            .sum();
        assert!((base - 36.0 * norm4).abs() < 1e-9);
    }

    #[test]
    fn real_phi_cases() {
        // The size-4 equality case, tied back to the matrix eigenphases.
        let q = [ONE, -ONE, -ONE, -ONE];
        assert!((real_phi_check(&q).unwrap() - 16.0).abs() < 1e-12);
        let k4 = CirculantSpec::new(vec![-ONE, ONE, ONE, ONE]).unwrap();
        let eig: Vec<C64> = fourier_diagonalize(&k4).iter().map(|v| v / 2.0).collect();
        assert!((real_phi_check(&eig).unwrap() - 16.0).abs() < 1e-12);
        // Size 2: the constraint forces sign vectors, all of value 8.
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                let q = [c(a, 0.0), c(b, 0.0)];
                let val = real_phi_check(&q).unwrap();
                assert!((val - 8.0).abs() < 1e-12);
                assert!(val >= 4.0);
            }
        }
        // Size 8: sampled self-conjugate vectors stay strictly above 64.
        let mut rng = exec::stream_rng(SEED, 77);
        let mut min_phi = f64::INFINITY;
        for draw in 0..10_000 {
            let mut q = vec![ONE; 8];
            q[0] = if rng.gen::<bool>() { ONE } else { -ONE };
            q[4] = if rng.gen::<bool>() { ONE } else { -ONE };
            for i in 1..4 {
                q[i] = phase(TAU * rng.gen::<f64>());
                q[8 - i] = q[i].conj();
            }
            let val = real_phi_check(&q).unwrap();
            if draw < 100 {
                assert!((val - phi_functional(&q).unwrap()).abs() < 1e-9);
            }
            min_phi = min_phi.min(val);
        }
        assert!(min_phi > 64.0);
        assert!(min_phi <= 512.0);
        // Vectors violating the symmetry are rejected.
        assert!(real_phi_check(&[ONE, c(0.0, 1.0)]).is_err());
    }

    #[test]
    fn root_extraction_round_trips() {
        for n in [3usize, 5, 8, 12] {
            let spec = fourier_circulant_form(n).unwrap();
            let z = root_from_circulant(&spec).unwrap();
            assert!(cyclic_root_check(&z));
            let rebuilt = circulant_from_root(&z).unwrap();
            let last = spec.first_row()[n - 1];
            for (a, b) in rebuilt.first_row().iter().zip(spec.first_row()) {
                assert!((a * last - b).norm() < 1e-12);
            }
            // Extraction is exactly inverse on the generated row.
            let z2 = root_from_circulant(&rebuilt).unwrap();
            for (a, b) in z.iter().zip(&z2) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        let family = backelin(2, 4, &[phase(0.3), phase(-0.3)]).unwrap();
        let spec = family.circulant();
        let z = root_from_circulant(&spec).unwrap();
        for (a, b) in z.iter().zip(family.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
        // Zero entries block extraction.
        let id = CirculantSpec::new(vec![ONE, ZERO, ZERO]).unwrap();
        assert!(root_from_circulant(&id).is_err());
    }
}
