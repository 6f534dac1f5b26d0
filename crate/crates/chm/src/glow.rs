//! The glow: the distribution of the total entry sum over independent row
//! and column phase switches. Exact moments come from a partition-indexed
//! expansion; Monte Carlo estimators cover everything else.

use std::collections::HashMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Error;
use crate::exec::{self, Exec};
use crate::group::FiniteAbelianGroup;
use crate::matrix::{is_hadamard, phase, root_of_unity, UnimodularMatrix};
use crate::Result;

/// Largest index-tuple enumeration accepted by the exact routines.
const ENUM_BUDGET: u128 = 100_000_000;

// ---------------------------------------------------------------------------
// Set partitions
// ---------------------------------------------------------------------------

/// A set partition of `{0, …, n-1}`. Blocks are kept sorted internally and
/// ordered by least element, so equal partitions compare equal. The order
/// used throughout puts the one-block partition at the bottom and the
/// all-singletons partition at the top.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from blocks, which must disjointly cover
    /// `{0, …, n-1}`.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("partitions of the empty set are not used"));
        }
        let mut seen = vec![false; n];
        let mut canon: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
        for block in blocks {
            if block.is_empty() {
                return Err(Error::validation("empty block"));
            }
            let mut b = block;
            b.sort_unstable();
            for &x in &b {
                if x >= n {
                    return Err(Error::validation(format!("index {x} out of range")));
                }
                if seen[x] {
                    return Err(Error::validation(format!("index {x} appears twice")));
                }
                seen[x] = true;
            }
            canon.push(b);
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::validation("blocks do not cover the ground set"));
        }
        canon.sort_by_key(|b| b[0]);
        Ok(Partition { n, blocks: canon })
    }

    /// The partition with a single block.
    pub fn one_block(n: usize) -> Self {
        Partition { n, blocks: vec![(0..n).collect()] }
    }

    /// The partition into singletons.
    pub fn singletons(n: usize) -> Self {
        Partition { n, blocks: (0..n).map(|i| vec![i]).collect() }
    }

    /// From a restricted growth string: `rgs[i]` names the block of `i`.
    pub fn from_rgs(rgs: &[usize]) -> Self {
        let count = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i);
        }
        Partition { n: rgs.len(), blocks }
    }

    /// All partitions of `{0, …, n-1}`, enumerated via restricted growth
    /// strings.
    pub fn enumerate(n: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut rgs = vec![0usize; n];
        fn walk(rgs: &mut Vec<usize>, pos: usize, max: usize, out: &mut Vec<Partition>) {
            if pos == rgs.len() {
                out.push(Partition::from_rgs(rgs));
                return;
            }
            for v in 0..=max + 1 {
                rgs[pos] = v;
                walk(rgs, pos + 1, max.max(v), out);
            }
        }
        if n == 0 {
            return out;
        }
        walk(&mut rgs, 1, 0, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_lengths(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Order test: `self ≤ other` when every block of `other` lies inside a
    /// block of `self` (the one-block partition is minimal).
    pub fn leq(&self, other: &Partition) -> bool {
        if self.n != other.n {
            return false;
        }
        let mut owner = vec![0usize; self.n];
        for (bi, block) in self.blocks.iter().enumerate() {
            for &x in block {
                owner[x] = bi;
            }
        }
        other
            .blocks
            .iter()
            .all(|block| block.iter().all(|&x| owner[x] == owner[block[0]]))
    }

    /// Disjoint concatenation: the blocks of `other` are shifted past
    /// `self`'s ground set.
    pub fn concat(&self, other: &Partition) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.extend(
            other
                .blocks
                .iter()
                .map(|b| b.iter().map(|&x| x + self.n).collect::<Vec<_>>()),
        );
        Partition { n: self.n + other.n, blocks }
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let mut v = 1i64;
    for i in 0..k.min(n - k) {
        v = v * (n - i) as i64 / (i as i64 + 1);
    }
    v
}

/// Stirling set numbers S(n, k) up to `n`.
fn stirling_table(n: usize) -> Vec<Vec<i64>> {
    let mut s = vec![vec![0i64; n + 1]; n + 1];
    s[0][0] = 1;
    for i in 1..=n {
        for k in 1..=i {
            s[i][k] = s[i - 1][k - 1] + k as i64 * s[i - 1][k];
        }
    }
    s
}

/// Möbius value of the full interval in the partition order of a k-block
/// ground set, from the recursive definition: the value at the bottom pair
/// is 1, and every longer interval sums to zero.
fn mobius_full(k: usize) -> i64 {
    let s = stirling_table(k);
    let mut memo = vec![0i64; k + 1];
    memo[1] = 1;
    for m in 2..=k {
        let mut acc = 0i64;
        for r in 1..m {
            acc += s[m][r] * memo[r];
        }
        memo[m] = -acc;
    }
    memo[k]
}

/// Möbius function of the partition order. The interval `[π, σ]`
/// factorizes over the blocks of π, each contributing the full-interval
/// value on its count of σ-blocks.
pub fn mobius(pi: &Partition, sigma: &Partition) -> i64 {
    if !pi.leq(sigma) {
        return 0;
    }
    let mut owner = vec![0usize; pi.n];
    for (bi, block) in pi.blocks.iter().enumerate() {
        for &x in block {
            owner[x] = bi;
        }
    }
    let mut counts = vec![0usize; pi.block_count()];
    for block in &sigma.blocks {
        counts[owner[block[0]]] += 1;
    }
    counts.into_iter().map(mobius_full).product()
}

/// The multinomial coefficient of a partition's block lengths.
pub fn multinomial(pi: &Partition) -> i64 {
    let mut v = factorial(pi.size());
    for b in &pi.blocks {
        v /= factorial(b.len());
    }
    v
}

/// Moment-expansion coefficient `K(π) = Σ_{σ ≥ π} μ(π,σ)·multinomial(σ)`.
/// `K(π)/p!` is multiplicative under disjoint concatenation.
pub fn k_coeff(pi: &Partition) -> i64 {
    Partition::enumerate(pi.size())
        .iter()
        .filter(|sigma| pi.leq(sigma))
        .map(|sigma| mobius(pi, sigma) * multinomial(sigma))
        .sum()
}

// ---------------------------------------------------------------------------
// Exact moment machinery
// ---------------------------------------------------------------------------

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

fn tuple_budget(n: usize, p: usize) -> Result<()> {
    let tuples = (n as u128).checked_pow(p as u32).unwrap_or(u128::MAX);
    let work = tuples.saturating_mul(factorial(p) as u128);
    if work > ENUM_BUDGET {
        return Err(Error::too_large(format!(
            "enumeration needs ~{work} steps (budget {ENUM_BUDGET}); use the Monte Carlo path"
        )));
    }
    Ok(())
}

/// Partition-indexed count for a group's character matrix: the number of
/// pairs of tuples `(i, j)` in `G^p × G^p` that agree as multisets and have
/// equal block sums for every block of π.
pub fn i_fourier(g: &FiniteAbelianGroup, pi: &Partition) -> Result<i128> {
    let n = g.size() as usize;
    let p = pi.size();
    tuple_budget(n, p)?;
    let elems: Vec<Vec<u64>> = g.elements().collect();
    let mut table = vec![0usize; n * n];
    for a in 0..n {
        for b in 0..n {
            table[a * n + b] = g.index_of(&g.add(&elems[a], &elems[b])) as usize;
        }
    }
    // Index 0 is the identity.
    let block_sum = |tuple: &[usize], block: &[usize]| -> usize {
        block.iter().fold(0usize, |acc, &r| table[acc * n + tuple[r]])
    };
    let mut count: i128 = 0;
    let mut i = vec![0usize; p];
    loop {
        let sums: Vec<usize> = pi.blocks.iter().map(|b| block_sum(&i, b)).collect();
        let mut j = i.clone();
        j.sort_unstable();
        loop {
            if pi
                .blocks
                .iter()
                .zip(&sums)
                .all(|(b, &s)| block_sum(&j, b) == s)
            {
                count += 1;
            }
            if !next_permutation(&mut j) {
                break;
            }
        }
        if !advance(&mut i, n) {
            break;
        }
    }
    Ok(count)
}

/// Partition-indexed contribution for a general unit-modulus matrix:
/// `(1/N^{|π|}) Σ_{[i]=[j]} Π_β ⟨Π_{r∈β} row_{i_r}, Π_{r∈β} row_{j_r}⟩`
/// with entrywise row products. Real and integer for a Hadamard matrix.
pub fn i_rows(h: &UnimodularMatrix, pi: &Partition) -> Result<C64> {
    if h.rows() != h.cols() {
        return Err(Error::dim("needs a square matrix"));
    }
    let n = h.rows();
    let p = pi.size();
    tuple_budget(n, p)?;
    let product = |tuple: &[usize], block: &[usize]| -> Vec<C64> {
        let mut v = vec![C64::new(1.0, 0.0); n];
        for &r in block {
            for (x, slot) in v.iter_mut().enumerate() {
                *slot *= h[(tuple[r], x)];
            }
        }
        v
    };
    let mut total = C64::new(0.0, 0.0);
    let mut i = vec![0usize; p];
    loop {
        let left: Vec<Vec<C64>> = pi.blocks.iter().map(|b| product(&i, b)).collect();
        let mut j = i.clone();
        j.sort_unstable();
        loop {
            let mut term = C64::new(1.0, 0.0);
            for (b, lv) in pi.blocks.iter().zip(&left) {
                let rv = product(&j, b);
                let inner: C64 = lv.iter().zip(&rv).map(|(u, v)| u * v.conj()).sum();
                term *= inner / n as f64;
            }
            total += term;
            if !next_permutation(&mut j) {
                break;
            }
        }
        if !advance(&mut i, n) {
            break;
        }
    }
    Ok(total)
}

/// Exact even moment `∫|E|^{2p}` over full phase switches, by grouping the
/// expansion of `E^p` into monomials: the moment is the sum of squared
/// moduli of monomial coefficients, one per pair of index multisets.
pub fn glow_moment_bruteforce(h: &UnimodularMatrix, p: usize) -> Result<f64> {
    if h.rows() != h.cols() {
        return Err(Error::dim("needs a square matrix"));
    }
    if p == 0 {
        return Ok(1.0);
    }
    let n = h.rows();
    let tuples = (n as u128).checked_pow(2 * p as u32).unwrap_or(u128::MAX);
    if tuples > ENUM_BUDGET {
        return Err(Error::too_large(format!(
            "enumeration needs {tuples} steps (budget {ENUM_BUDGET}); use the Monte Carlo path"
        )));
    }
    let mut coeff: HashMap<(Vec<u16>, Vec<u16>), C64> = HashMap::new();
    let mut digits = vec![0usize; 2 * p];
    loop {
        let (i, j) = digits.split_at(p);
        let mut term = C64::new(1.0, 0.0);
        for r in 0..p {
            term *= h[(i[r], j[r])];
        }
        let mut ik: Vec<u16> = i.iter().map(|&x| x as u16).collect();
        let mut jk: Vec<u16> = j.iter().map(|&x| x as u16).collect();
        ik.sort_unstable();
        jk.sort_unstable();
        *coeff.entry((ik, jk)).or_insert(C64::new(0.0, 0.0)) += term;
        if !advance(&mut digits, n) {
            break;
        }
    }
    Ok(coeff.values().map(|c| c.norm_sqr()).sum())
}

/// Exact even moment for a group's character matrix via the partition
/// expansion `Σ_π K(π)·N^{|π|}·I(π)`.
pub fn moment_via_partitions(g: &FiniteAbelianGroup, p: usize) -> Result<i128> {
    if p == 0 {
        return Ok(1);
    }
    let n = g.size() as i128;
    let mut total: i128 = 0;
    for pi in Partition::enumerate(p) {
        let weight = k_coeff(&pi) as i128 * n.pow(pi.block_count() as u32);
        total += weight * i_fourier(g, &pi)?;
    }
    Ok(total)
}

/// Predicted normalized moment `(1/p!)·∫(|E|/N)^{2p}` from the large-size
/// expansion, truncated after the `N^{-order}` term (`order ≤ 3`).
pub fn universality_prediction(p: usize, n: usize, order: usize) -> Result<f64> {
    if order > 3 {
        return Err(Error::unsupported("expansion coefficients are known up to order 3"));
    }
    let nf = n as f64;
    let pf = p as f64;
    let k1 = binomial(p, 2) as f64;
    let k2 = binomial(p, 2) as f64 * (3.0 * pf * pf + pf - 8.0) / 12.0;
    let k3 = binomial(p, 3) as f64 * (pf * pf * pf + 4.0 * pf * pf + pf - 18.0) / 8.0;
    let terms = [1.0, -k1 / nf, k2 / (nf * nf), -k3 / (nf * nf * nf)];
    Ok(terms[..=order].iter().sum())
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Monte Carlo picture of the glow at switch level `s` (`None` for full
/// phases): a histogram of `|E|` over `[0, N√N]`, a histogram of `arg E`,
/// and the first four even moments of `|E|`.
#[derive(Clone, Debug, Serialize)]
pub struct GlowReport {
    pub s: Option<u32>,
    pub samples: u64,
    /// `N√N`, the top of the histogram range.
    pub bound: f64,
    pub histogram: Vec<u64>,
    pub arg_histogram: Vec<u64>,
    /// Mean of `|E|^{2p}` for `p = 1..=4`.
    pub moments: [f64; 4],
    pub moment_stderr: [f64; 4],
}

impl GlowReport {
    /// Chi-square statistic of the `arg E` histogram against uniformity,
    /// with its degrees of freedom.
    pub fn arg_chi_square(&self) -> (f64, usize) {
        let bins = self.arg_histogram.len();
        let expected = self.samples as f64 / bins as f64;
        let stat = self
            .arg_histogram
            .iter()
            .map(|&o| {
                let d = o as f64 - expected;
                d * d / expected
            })
            .sum();
        (stat, bins - 1)
    }
}

fn sample_excess(h: &UnimodularMatrix, s: Option<u32>, rng: &mut impl rand::Rng) -> C64 {
    use std::f64::consts::TAU;
    let n = h.rows();
    let draw = |rng: &mut dyn FnMut() -> C64| -> Vec<C64> { (0..n).map(|_| rng()).collect() };
    let (a, b) = match s {
        Some(s) => {
            let mut gen = || root_of_unity(rng.gen_range(0..s) as i64, s);
            (draw(&mut gen), draw(&mut gen))
        }
        None => {
            let mut gen = || phase(rng.gen_range(0.0..TAU));
            (draw(&mut gen), draw(&mut gen))
        }
    };
    let mut e = C64::new(0.0, 0.0);
    for i in 0..n {
        let mut row_sum = C64::new(0.0, 0.0);
        for j in 0..n {
            row_sum += h[(i, j)] * b[j];
        }
        e += a[i] * row_sum;
    }
    e
}

/// Samples the glow of `h` at level `s` (`None` = full phases). Each
/// sample draws from its own seed stream, so the report is identical
/// across execution modes.
pub fn glow_mc(
    h: &UnimodularMatrix,
    s: Option<u32>,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<GlowReport> {
    if h.rows() != h.cols() {
        return Err(Error::dim("needs a square matrix"));
    }
    if samples == 0 {
        return Err(Error::validation("need at least one sample"));
    }
    if s == Some(0) {
        return Err(Error::validation("switch level must be positive"));
    }
    let n = h.rows() as f64;
    let bound = n * n.sqrt();
    let values = exec::map_collect(exec, samples as usize, |k| {
        let mut rng = exec::stream_rng(seed, k as u64);
        sample_excess(h, s, &mut rng)
    });
    let mut histogram = vec![0u64; 256];
    let mut arg_histogram = vec![0u64; 64];
    let mut sums = [0.0f64; 4];
    let mut squares = [0.0f64; 4];
    for e in &values {
        let r = e.norm();
        let bin = ((r / bound) * 256.0) as usize;
        histogram[bin.min(255)] += 1;
        let abin = ((e.arg() + std::f64::consts::PI) / std::f64::consts::TAU * 64.0) as usize;
        arg_histogram[abin.min(63)] += 1;
        let mut power = 1.0;
        for p in 0..4 {
            power *= r * r;
            sums[p] += power;
            squares[p] += power * power;
        }
    }
    let count = samples as f64;
    let mut moments = [0.0f64; 4];
    let mut moment_stderr = [0.0f64; 4];
    for p in 0..4 {
        moments[p] = sums[p] / count;
        let var = (squares[p] - count * moments[p] * moments[p]) / (count - 1.0).max(1.0);
        moment_stderr[p] = (var.max(0.0) / count).sqrt();
    }
    Ok(GlowReport {
        s,
        samples,
        bound,
        histogram,
        arg_histogram,
        moments,
        moment_stderr,
    })
}

/// Every excess value over the full switch group at finite level `s`,
/// with multiplicity (`s^{2N}` values).
pub fn glow_support_exhaustive(h: &UnimodularMatrix, s: u32) -> Result<Vec<C64>> {
    if h.rows() != h.cols() {
        return Err(Error::dim("needs a square matrix"));
    }
    if s == 0 {
        return Err(Error::validation("switch level must be positive"));
    }
    let n = h.rows();
    let total = (s as u128).checked_pow(2 * n as u32).unwrap_or(u128::MAX);
    if total > 1 << 22 {
        return Err(Error::too_large(format!(
            "{total} switch pairs; sample with glow_mc instead"
        )));
    }
    let roots: Vec<C64> = (0..s).map(|k| root_of_unity(k as i64, s)).collect();
    let mut out = Vec::with_capacity(total as usize);
    let mut digits = vec![0usize; 2 * n];
    loop {
        let (a, b) = digits.split_at(n);
        let mut e = C64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += h[(i, j)] * roots[b[j]];
            }
            e += roots[a[i]] * row;
        }
        out.push(e);
        if !advance(&mut digits, s as usize) {
            break;
        }
    }
    Ok(out)
}

/// One even moment of the glow: exact value when enumeration is feasible,
/// plus a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GlowMomentTable {
    pub p: usize,
    pub exact: Option<f64>,
    pub mc_estimate: f64,
    pub mc_stderr: f64,
}

/// Builds the moment table for `∫|E|^{2p}` at full phase switches,
/// `p ≤ 4`.
pub fn moment_table(
    h: &UnimodularMatrix,
    p: usize,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<GlowMomentTable> {
    if !(1..=4).contains(&p) {
        return Err(Error::validation("moment order must be between 1 and 4"));
    }
    let report = glow_mc(h, None, samples, seed, exec)?;
    Ok(GlowMomentTable {
        p,
        exact: glow_moment_bruteforce(h, p).ok(),
        mc_estimate: report.moments[p - 1],
        mc_stderr: report.moment_stderr[p - 1],
    })
}

// ---------------------------------------------------------------------------
// Sign matrices: the parity split
// ---------------------------------------------------------------------------

/// Masses of the sign-switch glow of a real Hadamard matrix on the two
/// residue classes it can reach: multiples of 8, and 4 plus multiples
/// of 8.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParitySplit {
    pub even_mass: f64,
    pub odd_mass: f64,
    pub even_count: u64,
    pub odd_count: u64,
    pub total: u64,
}

fn sign_rows(h: &UnimodularMatrix) -> Result<Vec<Vec<i64>>> {
    let n = h.rows();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(h.cols());
        for j in 0..h.cols() {
            let z = h[(i, j)];
            if z.im.abs() > 1e-9 || (z.re.abs() - 1.0).abs() > 1e-9 {
                return Err(Error::validation("entries must be plus or minus one"));
            }
            row.push(if z.re > 0.0 { 1 } else { -1 });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Exhaustive parity split over all `4^N` sign-switch pairs, organized as
/// an outer walk over column switches and a residue walk over row
/// switches. Requires a real Hadamard matrix with `N ≤ 12`; the excess
/// always lands on multiples of 4.
pub fn real_parity_split(h: &UnimodularMatrix) -> Result<ParitySplit> {
    let n = h.rows();
    if n != h.cols() || n < 4 {
        return Err(Error::dim("needs a square matrix of size at least 4"));
    }
    if n > 12 {
        return Err(Error::too_large(
            "exhaustive split is limited to size 12; use real_parity_split_mc",
        ));
    }
    if !is_hadamard(h) {
        return Err(Error::validation("matrix must be Hadamard"));
    }
    let rows = sign_rows(h)?;
    let mut counts = [0u64; 8];
    for b in 0..1u32 << n {
        let col_sign = |j: usize| if b >> j & 1 == 0 { 1i64 } else { -1 };
        let sums: Vec<i64> = rows
            .iter()
            .map(|row| (0..n).map(|j| row[j] * col_sign(j)).sum())
            .collect();
        // Residue distribution of Σ ±S_i mod 8 over all row switches.
        let mut dist = [0u64; 8];
        dist[0] = 1;
        for &s in &sums {
            let r = s.rem_euclid(8) as usize;
            let mut next = [0u64; 8];
            for (start, &c) in dist.iter().enumerate() {
                next[(start + r) % 8] += c;
                next[(start + 8 - r) % 8] += c;
            }
            dist = next;
        }
        for (r, &c) in dist.iter().enumerate() {
            counts[r] += c;
        }
    }
    if counts.iter().enumerate().any(|(r, &c)| r % 4 != 0 && c > 0) {
        return Err(Error::validation("excess left the multiples of 4"));
    }
    let total = 1u64 << (2 * n);
    Ok(ParitySplit {
        even_mass: counts[0] as f64 / total as f64,
        odd_mass: counts[4] as f64 / total as f64,
        even_count: counts[0],
        odd_count: counts[4],
        total,
    })
}

/// Sampled parity split for a real Hadamard matrix of any size.
pub fn real_parity_split_mc(
    h: &UnimodularMatrix,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<ParitySplit> {
    let n = h.rows();
    if n != h.cols() || n < 4 {
        return Err(Error::dim("needs a square matrix of size at least 4"));
    }
    if samples == 0 {
        return Err(Error::validation("need at least one sample"));
    }
    if !is_hadamard(h) {
        return Err(Error::validation("matrix must be Hadamard"));
    }
    let rows = sign_rows(h)?;
    let classes = exec::map_collect(exec, samples as usize, |k| {
        use rand::Rng;
        let mut rng = exec::stream_rng(seed, k as u64);
        let a: Vec<i64> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let b: Vec<i64> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let e: i64 = rows
            .iter()
            .zip(&a)
            .map(|(row, &ai)| ai * row.iter().zip(&b).map(|(&h, &bj)| h * bj).sum::<i64>())
            .sum();
        e.rem_euclid(8)
    });
    let mut even = 0u64;
    let mut odd = 0u64;
    for r in classes {
        match r {
            0 => even += 1,
            4 => odd += 1,
            _ => return Err(Error::validation("excess left the multiples of 4")),
        }
    }
    Ok(ParitySplit {
        even_mass: even as f64 / samples as f64,
        odd_mass: odd as f64 / samples as f64,
        even_count: even,
        odd_count: odd,
        total: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{fourier_cyclic, named, walsh, NamedMatrix};

    fn bell(n: usize) -> usize {
        Partition::enumerate(n).len()
    }

    #[test]
    fn enumeration_counts_and_canonical_form() {
        assert_eq!(
            (1..=8).map(bell).collect::<Vec<_>>(),
            vec![1, 2, 5, 15, 52, 203, 877, 4140]
        );
        let p = Partition::new(4, vec![vec![3, 1], vec![2], vec![0]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0], vec![1, 3], vec![2]]);
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        for pi in Partition::enumerate(5) {
            assert!(Partition::one_block(5).leq(&pi));
            assert!(pi.leq(&Partition::singletons(5)));
        }
    }

    #[test]
    fn mobius_full_interval_closed_form() {
        for k in 1..=8usize {
            let got = mobius(&Partition::one_block(k), &Partition::singletons(k));
            let want = if k % 2 == 1 { 1 } else { -1 } * factorial(k - 1);
            assert_eq!(got, want, "k={k}");
        }
    }

    #[test]
    fn mobius_convolution_is_delta() {
        for p in 1..=5 {
            let all = Partition::enumerate(p);
            for pi in &all {
                for sigma in &all {
                    if !pi.leq(sigma) {
                        assert_eq!(mobius(pi, sigma), 0);
                        continue;
                    }
                    let sum: i64 = all
                        .iter()
                        .filter(|tau| pi.leq(tau) && tau.leq(sigma))
                        .map(|tau| mobius(pi, tau))
                        .sum();
                    assert_eq!(sum, i64::from(pi == sigma));
                }
            }
        }
        // Spot checks at p = 6.
        let all = Partition::enumerate(6);
        let mut rng = crate::exec::stream_rng(5, 0);
        use rand::seq::SliceRandom;
        for _ in 0..60 {
            let pi = all.choose(&mut rng).unwrap();
            let sigma = all.choose(&mut rng).unwrap();
            if !pi.leq(sigma) {
                continue;
            }
            let sum: i64 = all
                .iter()
                .filter(|tau| pi.leq(tau) && tau.leq(sigma))
                .map(|tau| mobius(pi, tau))
                .sum();
            assert_eq!(sum, i64::from(pi == sigma));
        }
    }

    #[test]
    fn expansion_coefficients() {
        // K/p! on one-block partitions: 1, -1/2, 2/3, -11/8.
        assert_eq!(k_coeff(&Partition::one_block(1)), 1);
        assert_eq!(k_coeff(&Partition::one_block(2)), -1);
        assert_eq!(k_coeff(&Partition::one_block(3)), 4);
        assert_eq!(k_coeff(&Partition::one_block(4)), -33);
        for p in 1..=5 {
            assert_eq!(k_coeff(&Partition::singletons(p)), factorial(p));
        }
        // Multiplicativity of K/p! over disjoint concatenation.
        for a in 1..=4usize {
            for b in 1..=4usize {
                if a + b > 5 {
                    continue;
                }
                for pi in Partition::enumerate(a) {
                    for rho in Partition::enumerate(b) {
                        let joint = pi.concat(&rho);
                        assert_eq!(joint.size(), a + b);
                        assert_eq!(
                            k_coeff(&joint) * factorial(a) * factorial(b),
                            k_coeff(&pi) * k_coeff(&rho) * factorial(a + b)
                        );
                    }
                }
            }
        }
    }

    /// Sum of multinomials over partitions with exactly r blocks.
    fn c_coeff(p: usize, r: usize) -> i64 {
        Partition::enumerate(p)
            .iter()
            .filter(|pi| pi.block_count() == r)
            .map(multinomial)
            .sum()
    }

    #[test]
    fn block_count_multinomial_sums() {
        for p in 1..=6 {
            assert_eq!(c_coeff(p, 1), 1);
            assert_eq!(c_coeff(p, p), factorial(p));
            if p >= 2 {
                assert_eq!(c_coeff(p, 2), binomial(2 * p, p) / 2 - 1);
                assert_eq!(c_coeff(p, p - 1), factorial(p) / 2 * binomial(p, 2));
            }
        }
    }

    #[test]
    fn fourier_counts_one_block_and_singletons() {
        let groups = [
            FiniteAbelianGroup::cyclic(2).unwrap(),
            FiniteAbelianGroup::cyclic(3).unwrap(),
            FiniteAbelianGroup::cyclic(5).unwrap(),
            FiniteAbelianGroup::cyclic(6).unwrap(),
            FiniteAbelianGroup::new(vec![2, 2]).unwrap(),
        ];
        for g in &groups {
            let n = g.size() as i128;
            for p in 1..=4usize {
                let counted = i_fourier(g, &Partition::one_block(p)).unwrap();
                // Multiset equality forces equal sums, so the one-block
                // count only sees the multiset structure.
                let formula: i128 = (1..=p)
                    .map(|r| {
                        let falling: i128 = (0..r as i128).map(|k| n - k).product();
                        c_coeff(p, r) as i128 * falling
                    })
                    .sum();
                assert_eq!(counted, formula, "one block p={p}");
                assert_eq!(
                    i_fourier(g, &Partition::singletons(p)).unwrap(),
                    n.pow(p as u32),
                    "singletons p={p}"
                );
            }
        }
    }

    #[test]
    fn fourier_count_two_pair_blocks() {
        let pairs = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let cases = [
            (FiniteAbelianGroup::cyclic(3).unwrap(), 0u32),
            (FiniteAbelianGroup::cyclic(4).unwrap(), 1),
            (FiniteAbelianGroup::cyclic(5).unwrap(), 0),
            (FiniteAbelianGroup::new(vec![2, 2]).unwrap(), 2),
        ];
        for (g, e) in &cases {
            let n = g.size() as i128;
            let want = n * (4 * n * n * n - 11 * n + (1 << e) + 7);
            assert_eq!(i_fourier(g, &pairs).unwrap(), want, "|G|={n}, e={e}");
        }
        assert_eq!(
            i_fourier(&FiniteAbelianGroup::cyclic(4).unwrap(), &pairs).unwrap(),
            884
        );
    }

    #[test]
    fn row_products_match_fourier_counts() {
        let g = FiniteAbelianGroup::cyclic(4).unwrap();
        let f4 = fourier_cyclic(4).unwrap().to_unimodular();
        for p in 1..=3usize {
            for pi in Partition::enumerate(p) {
                let counted = i_fourier(&g, &pi).unwrap();
                let summed = i_rows(&f4, &pi).unwrap();
                assert!((summed.re - counted as f64).abs() < 1e-6, "{pi:?}");
                assert!(summed.im.abs() < 1e-6);
            }
        }
        let pairs = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let summed = i_rows(&f4, &pairs).unwrap();
        assert!((summed.re - 884.0).abs() < 1e-4);
    }

    #[test]
    fn row_products_on_a_real_hadamard_one_block() {
        // The one-block value only depends on the size, for any Hadamard.
        let w4 = walsh(2).unwrap().to_unimodular();
        for p in 1..=3usize {
            let got = i_rows(&w4, &Partition::one_block(p)).unwrap();
            let want: f64 = (1..=p)
                .map(|r| {
                    let falling: i128 = (0..r as i128).map(|k| 4 - k).product();
                    (c_coeff(p, r) as i128 * falling) as f64
                })
                .sum();
            assert!((got.re - want).abs() < 1e-6, "p={p}");
        }
    }

    #[test]
    fn appending_singletons_scales_by_n() {
        let h = named(NamedMatrix::H6Q(phase(0.9))).unwrap();
        for p in 1..=2usize {
            for pi in Partition::enumerate(p) {
                let base = i_rows(&h, &pi).unwrap();
                for a in 1..=(4 - p).min(2) {
                    let padded = Partition::singletons(a).concat(&pi);
                    let got = i_rows(&h, &padded).unwrap();
                    let scale = 6f64.powi(a as i32);
                    assert!((got - base * scale).norm() < 1e-4 * scale, "p={p}, a={a}");
                }
            }
        }
    }

    #[test]
    fn bruteforce_first_moment_is_n_squared() {
        let f3 = fourier_cyclic(3).unwrap().to_unimodular();
        let w4 = walsh(2).unwrap().to_unimodular();
        let mut rng = crate::exec::stream_rng(8, 0);
        use rand::Rng;
        let random = UnimodularMatrix::from_fn(5, 5, |_, _| {
            phase(rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .unwrap();
        for h in [&f3, &w4, &random] {
            let n = h.rows() as f64;
            assert!((glow_moment_bruteforce(h, 1).unwrap() - n * n).abs() < 1e-9);
        }
    }

    #[test]
    fn bruteforce_matches_partition_expansion() {
        let groups = [
            FiniteAbelianGroup::cyclic(2).unwrap(),
            FiniteAbelianGroup::cyclic(3).unwrap(),
            FiniteAbelianGroup::cyclic(4).unwrap(),
            FiniteAbelianGroup::new(vec![2, 2]).unwrap(),
        ];
        for g in &groups {
            let h = crate::constructions::fourier(g).to_unimodular();
            for p in 1..=3usize {
                let exact = moment_via_partitions(g, p).unwrap();
                let brute = glow_moment_bruteforce(&h, p).unwrap();
                let tol = 1e-9 * (exact as f64).max(1.0);
                assert!((brute - exact as f64).abs() < tol, "|G|={}, p={p}", g.size());
            }
        }
    }

    #[test]
    fn parity_of_group_structure_enters_at_order_four() {
        // Degree-eight moments distinguish Z_4 from Z_2 x Z_2; lower
        // moments cannot.
        let z4 = FiniteAbelianGroup::cyclic(4).unwrap();
        let klein = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        for p in 1..=3usize {
            assert_eq!(
                moment_via_partitions(&z4, p).unwrap(),
                moment_via_partitions(&klein, p).unwrap()
            );
        }
        let m4_z4 = moment_via_partitions(&z4, 4).unwrap();
        let m4_klein = moment_via_partitions(&klein, 4).unwrap();
        assert_ne!(m4_z4, m4_klein);
        for (g, want) in [(&z4, m4_z4), (&klein, m4_klein)] {
            let h = crate::constructions::fourier(g).to_unimodular();
            let brute = glow_moment_bruteforce(&h, 4).unwrap();
            assert!((brute - want as f64).abs() < 1e-6 * want as f64);
        }
    }

    #[test]
    fn universality_expansion_is_exact_at_p_two() {
        for n in [5usize, 6, 8, 11] {
            let g = FiniteAbelianGroup::cyclic(n as u64).unwrap();
            let m = moment_via_partitions(&g, 2).unwrap() as f64;
            let normalized = m / (2.0 * (n as f64).powi(4));
            let first = universality_prediction(2, n, 1).unwrap();
            assert!((first - (1.0 - 1.0 / n as f64)).abs() < 1e-15);
            assert!((normalized - first - 0.5 / (n as f64).powi(2)).abs() < 1e-12);
            let second = universality_prediction(2, n, 2).unwrap();
            assert!((normalized - second).abs() < 1e-12);
        }
    }

    #[test]
    fn universality_error_scales_at_p_three() {
        // After the order-3 truncation the residual decays like N^{-4},
        // with a coefficient near 8/3.
        for n in [7usize, 9, 11] {
            let g = FiniteAbelianGroup::cyclic(n as u64).unwrap();
            let m = moment_via_partitions(&g, 3).unwrap() as f64;
            let normalized = m / (6.0 * (n as f64).powi(6));
            let pred = universality_prediction(3, n, 3).unwrap();
            let scaled = (normalized - pred).abs() * (n as f64).powi(4);
            assert!((2.0..3.5).contains(&scaled), "N={n}: {scaled}");
        }
    }

    #[test]
    fn sign_switches_of_the_smallest_fourier_matrix() {
        let f2 = fourier_cyclic(2).unwrap().to_unimodular();
        let values = glow_support_exhaustive(&f2, 2).unwrap();
        assert_eq!(values.len(), 16);
        for e in values {
            assert!((e.norm() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_switch_support_lands_on_multiples_of_four() {
        let w4 = walsh(2).unwrap().to_unimodular();
        let values = glow_support_exhaustive(&w4, 2).unwrap();
        assert_eq!(values.len(), 256);
        for e in values {
            assert!(e.im.abs() < 1e-12);
            let r = e.re.round();
            assert!((e.re - r).abs() < 1e-12);
            assert_eq!(r as i64 % 4, 0);
        }
    }

    #[test]
    fn sampled_second_moment_matches_n_squared() {
        let f5 = fourier_cyclic(5).unwrap().to_unimodular();
        let report = glow_mc(&f5, None, 20_000, 17, Exec::default()).unwrap();
        assert!((report.moments[0] - 25.0).abs() < 4.0 * report.moment_stderr[0]);
        // Fourth moment against the exact expansion value.
        let exact = glow_moment_bruteforce(&f5, 2).unwrap();
        assert!((report.moments[1] - exact).abs() < 4.0 * report.moment_stderr[1]);
    }

    #[test]
    fn argument_is_uniform_under_full_switches() {
        let f4 = fourier_cyclic(4).unwrap().to_unimodular();
        let report = glow_mc(&f4, None, 50_000, 29, Exec::default()).unwrap();
        let (stat, dof) = report.arg_chi_square();
        assert_eq!(dof, 63);
        // 99th percentile of chi-square with 63 degrees of freedom.
        assert!(stat < 92.01, "chi-square statistic {stat}");
    }

    #[test]
    fn moment_table_combines_exact_and_sampled() {
        let f2 = fourier_cyclic(2).unwrap().to_unimodular();
        let table = moment_table(&f2, 2, 40_000, 3, Exec::default()).unwrap();
        assert_eq!(table.exact, Some(20.0));
        assert!((table.mc_estimate - 20.0).abs() < 4.0 * table.mc_stderr);
    }

    #[test]
    fn parity_split_small_walsh_and_circulant() {
        let w4 = walsh(2).unwrap().to_unimodular();
        let split = real_parity_split(&w4).unwrap();
        assert_eq!(split.total, 256);
        assert_eq!(split.even_count * 4, split.total);
        assert_eq!(split.odd_count * 4, split.total * 3);

        let k4 = named(NamedMatrix::K4).unwrap();
        let split = real_parity_split(&k4).unwrap();
        assert_eq!(split.even_count * 4, split.total);

        let w8 = walsh(3).unwrap().to_unimodular();
        let split = real_parity_split(&w8).unwrap();
        assert_eq!(split.even_count * 4, split.total * 3);
        assert_eq!(split.odd_count * 4, split.total);

        let sampled = real_parity_split_mc(&w8, 50_000, 11, Exec::default()).unwrap();
        assert!((sampled.even_mass - 0.75).abs() < 0.02);

        assert!(real_parity_split(&walsh(4).unwrap().to_unimodular()).is_err());
    }

    #[test]
    fn enumeration_guards_reject_oversized_inputs() {
        let f6 = fourier_cyclic(6).unwrap().to_unimodular();
        assert!(glow_moment_bruteforce(&f6, 6).is_err());
        let g = FiniteAbelianGroup::cyclic(12).unwrap();
        assert!(i_fourier(&g, &Partition::one_block(9)).is_err());
    }

    #[test]
    fn reports_are_identical_across_exec_modes() {
        let f4 = fourier_cyclic(4).unwrap().to_unimodular();
        let a = glow_mc(&f4, Some(4), 2_000, 7, Exec::Sequential).unwrap();
        let b = glow_mc(&f4, Some(4), 2_000, 7, Exec::Parallel).unwrap();
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.moments[3].to_bits(), b.moments[3].to_bits());
    }
}
