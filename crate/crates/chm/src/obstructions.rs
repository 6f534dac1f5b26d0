//! Exact arithmetic obstructions to the existence of Butson, circulant
//! Butson, and bistochastic Butson matrices.
//!
//! The common engine is the combinatorics of vanishing sums of roots of
//! unity: scalar products between rows of a level-`l` matrix are such sums,
//! and for prime-power `l` every vanishing sum decomposes into rotated full
//! sums of `p`-th roots ("cycles"). Everything here is integer-exact.

use std::collections::HashSet;

use crate::cyclotomic;
use crate::error::Error;
use crate::matrix::ButsonMatrix;
use crate::Result;

/// Multiset of `l`-th roots of unity, one count per exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootMultiset {
    level: u32,
    counts: Vec<u64>,
}

impl RootMultiset {
    pub fn new(level: u32, counts: Vec<u64>) -> Result<Self> {
        if level < 2 {
            return Err(Error::validation("level must be at least 2"));
        }
        if counts.len() != level as usize {
            return Err(Error::dim(format!(
                "expected {level} counts, got {}",
                counts.len()
            )));
        }
        Ok(Self { level, counts })
    }

    /// Count multiset of the exponents in a list.
    pub fn from_exponents(level: u32, exponents: &[u32]) -> Result<Self> {
        if level < 2 {
            return Err(Error::validation("level must be at least 2"));
        }
        let mut counts = vec![0u64; level as usize];
        for &e in exponents {
            counts[(e % level) as usize] += 1;
        }
        Ok(Self { level, counts })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of roots in the multiset, counted with multiplicity.
    pub fn len(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Exact vanishing test for the represented sum of roots of unity.
pub fn vanishes(m: &RootMultiset) -> bool {
    let counts: Vec<i64> = m.counts.iter().map(|&c| c as i64).collect();
    cyclotomic::vanishes(&counts, m.level)
}

/// `l = p^a` with `p` prime, if it is a prime power.
fn prime_power(l: u32) -> Option<(u32, u32)> {
    let factors = prime_factorization(l as u64);
    match factors.as_slice() {
        [(p, a)] => Some((*p as u32, *a)),
        _ => None,
    }
}

fn prime_factorization(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut a = 0;
            while n % d == 0 {
                n /= d;
                a += 1;
            }
            out.push((d, a));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// A rotated full sum of `prime`-th roots inside the `level`-th roots:
/// support `{rotation + k·level/prime : k}`, repeated `multiplicity` times.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub prime: u32,
    pub rotation: u32,
    pub multiplicity: u64,
}

/// A multiset written as a formal sum of cycles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleDecomposition {
    level: u32,
    cycles: Vec<Cycle>,
}

impl CycleDecomposition {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    /// Cycle lengths with multiplicity, sorted descending (`3+3` is `[3,3]`).
    pub fn lengths(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for c in &self.cycles {
            for _ in 0..c.multiplicity {
                out.push(c.prime);
            }
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// Rebuild the count multiset the cycles add up to.
    pub fn reassemble(&self) -> RootMultiset {
        let l = self.level as usize;
        let mut counts = vec![0u64; l];
        for c in &self.cycles {
            let stride = l / c.prime as usize;
            for k in 0..c.prime as usize {
                counts[(c.rotation as usize + k * stride) % l] += c.multiplicity;
            }
        }
        RootMultiset {
            level: self.level,
            counts,
        }
    }
}

/// Decompose a vanishing sum at prime-power level `p^a` into rotated
/// `p`-cycles. The kernel of the evaluation map is spanned by the full
/// residue classes modulo `p^{a-1}`, so a sum vanishes iff its counts are
/// constant on each class; the common values are the multiplicities.
pub fn cycle_decompose(m: &RootMultiset) -> Result<CycleDecomposition> {
    let (p, _) = prime_power(m.level).ok_or_else(|| {
        Error::unsupported(format!(
            "cycle decomposition needs a prime-power level, got {}",
            m.level
        ))
    })?;
    let l = m.level as usize;
    let stride = l / p as usize;
    let mut cycles = Vec::new();
    for rotation in 0..stride {
        let class: Vec<u64> = (0..p as usize)
            .map(|k| m.counts[rotation + k * stride])
            .collect();
        if class.iter().any(|&c| c != class[0]) {
            return Err(Error::validation(format!(
                "sum does not vanish: counts differ on the class of {rotation}"
            )));
        }
        if class[0] > 0 {
            cycles.push(Cycle {
                prime: p,
                rotation: rotation as u32,
                multiplicity: class[0],
            });
        }
    }
    Ok(CycleDecomposition {
        level: m.level,
        cycles,
    })
}

/// Length obstruction: a vanishing sum of `l`-th roots has the same length
/// as some sum of cycles, so `N` must lie in the numerical semigroup
/// generated by the prime divisors of `l`.
pub fn lam_leung(n: u64, l: u32) -> bool {
    let primes: Vec<u64> = prime_factorization(l as u64)
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    let n = n as usize;
    let mut reachable = vec![false; n + 1];
    reachable[0] = true;
    for i in 1..=n {
        reachable[i] = primes
            .iter()
            .any(|&p| i >= p as usize && reachable[i - p as usize]);
    }
    reachable[n]
}

/// Real-size obstruction from the orthogonality of the first three rows:
/// sizes other than `{1, 2} ∪ 4ℕ` carry no real Hadamard matrix. Sizes
/// below 3 are unobstructed.
pub fn sylvester(n: u64) -> bool {
    n == 1 || n == 2 || n % 4 == 0
}

/// Prime-power level obstruction from the first two rows: at level `p^a`
/// the size must be divisible by `p`.
pub fn butson_prime_power(n: u64, l: u32) -> Result<bool> {
    match prime_power(l) {
        Some((p, _)) => Ok(n % p as u64 == 0),
        None => Err(Error::unsupported(format!(
            "level {l} is not a prime power"
        ))),
    }
}

/// Determinant obstruction at levels 3 and 6, modulo 5: `|d|² = N^N` has no
/// solution in the ring of integers of the sixth cyclotomic field when
/// `5 | N`, because `x + y + z = 0`, `x² + y² + z² = 0` has no nonzero
/// solution mod 5. Returns false when the size is obstructed.
pub fn de_launey_l3_mod5(n: u64) -> bool {
    n % 5 != 0
}

/// Exact row-sum obstruction for circulant matrices at any level: if
/// `a_k` counts the `k`-th roots in the first row, the autocorrelation
/// must satisfy `Σ_k w^k Σ_i a_i a_{i+k} = N`, tested by cyclotomic
/// reduction.
pub fn turyn_exact(counts: &[u64]) -> Result<bool> {
    let l = counts.len();
    if l < 2 {
        return Err(Error::dim("need at least two root counts"));
    }
    let n: u64 = counts.iter().sum();
    let mut corr: Vec<i64> = (0..l)
        .map(|k| {
            (0..l)
                .map(|i| (counts[i] * counts[(i + k) % l]) as i64)
                .sum()
        })
        .collect();
    corr[0] -= n as i64;
    Ok(cyclotomic::vanishes(&corr, l as u32))
}

/// Closed-form row-sum obstruction for circulant matrices: for prime `l`
/// the condition is `Σ_i (a_i - a_{i+k})² = 2N` for every `k ≠ 0`; at
/// `l = 4` it is `(a_0 - a_2)² + (a_1 - a_3)² = N` (so at `l = 2` a real
/// circulant Hadamard matrix forces `N` to be a perfect square).
pub fn turyn_circulant(counts: &[u64]) -> Result<bool> {
    let l = counts.len();
    let n: u64 = counts.iter().sum();
    let a: Vec<i64> = counts.iter().map(|&c| c as i64).collect();
    if l == 4 {
        let lhs = (a[0] - a[2]).pow(2) + (a[1] - a[3]).pow(2);
        return Ok(lhs == n as i64);
    }
    if l >= 2 && prime_power(l as u32).is_some_and(|(p, e)| p as usize == l && e == 1) {
        for k in 1..l {
            let lhs: i64 = (0..l).map(|i| (a[i] - a[(i + k) % l]).pow(2)).sum();
            if lhs != 2 * n as i64 {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    Err(Error::unsupported(format!(
        "closed forms cover prime levels and level 4, got {l}"
    )))
}

/// Row-sum obstruction for bistochastic matrices over the eighth roots of
/// unity: the row sum `x + wy + iz + iwt` has squared modulus
/// `x² + y² + z² + t² + √2(xy + yz + zt - xt)`, so an integer value `N`
/// forces both displayed identities.
pub fn turyn_8roots(x: i64, y: i64, z: i64, t: i64, n: u64) -> bool {
    x * x + y * y + z * z + t * t == n as i64 && x * y + y * z + z * t == x * t
}

/// Solvability of the bistochastic row-sum equations at levels 2, 3, 4 by
/// bounded integer search; all solutions lie in `|x| ≤ ⌈√(2N)⌉`.
pub fn bistochastic_butson_obstruction(n: u64, l: u32) -> Result<bool> {
    let bound = (2.0 * n as f64).sqrt().ceil() as i64;
    match l {
        2 => {
            // N = 4m².
            Ok((0..=bound).any(|m| 4 * m * m == n as i64))
        }
        3 => {
            // x + y + z = 0 with x² + y² + z² = 2N.
            for x in -bound..=bound {
                for y in -bound..=bound {
                    let z = -x - y;
                    if x * x + y * y + z * z == 2 * n as i64 {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        4 => {
            // N = a² + b².
            for a in 0..=bound {
                for b in a..=bound {
                    if a * a + b * b == n as i64 {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        _ => Err(Error::unsupported(format!(
            "bistochastic obstruction is implemented for levels 2, 3, 4, got {l}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Regularity
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularity {
    /// Every row-pair product decomposes into cycles.
    Regular,
    /// Some row-pair product does not even vanish.
    Irregular,
    /// Vanishing established, but no decomposition found within budget
    /// (composite levels only; decompositions may genuinely not exist).
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct PairRegularity {
    pub rows: (usize, usize),
    pub status: Regularity,
    /// Cycle lengths when a decomposition was found, sorted descending.
    pub cycle_lengths: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub level: u32,
    pub pairs: Vec<PairRegularity>,
    pub overall: Regularity,
}

impl RegularityReport {
    /// Distinct cycle-length profiles over the decomposed pairs.
    pub fn structures(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = Vec::new();
        for p in &self.pairs {
            if p.status == Regularity::Regular && !out.contains(&p.cycle_lengths) {
                out.push(p.cycle_lengths.clone());
            }
        }
        out.sort();
        out
    }
}

/// Backtracking search for a cycle decomposition at composite level:
/// repeatedly peel a rotated full sum of `p`-th roots, largest prime
/// first, abandoning explored dead ends. Exact failure cannot be certified
/// this way, so callers report exhaustion as inconclusive.
fn peel_cycles(counts: &[u64], level: u32, budget: &mut usize) -> Option<Vec<u32>> {
    if counts.iter().all(|&c| c == 0) {
        return Some(Vec::new());
    }
    let mut primes: Vec<u64> = prime_factorization(level as u64)
        .into_iter()
        .map(|(p, _)| p)
        .collect();
    primes.sort_unstable_by(|a, b| b.cmp(a));
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut lengths = Vec::new();
    let mut state = counts.to_vec();
    if dfs(&mut state, level as usize, &primes, &mut seen, &mut lengths, budget) {
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        Some(lengths)
    } else {
        None
    }
}

fn dfs(
    counts: &mut Vec<u64>,
    l: usize,
    primes: &[u64],
    seen: &mut HashSet<Vec<u64>>,
    lengths: &mut Vec<u32>,
    budget: &mut usize,
) -> bool {
    if counts.iter().all(|&c| c == 0) {
        return true;
    }
    if *budget == 0 || !seen.insert(counts.clone()) {
        return false;
    }
    *budget -= 1;
    for &p in primes {
        let stride = l / p as usize;
        for r in 0..stride {
            let support: Vec<usize> = (0..p as usize).map(|k| r + k * stride).collect();
            if support.iter().all(|&s| counts[s] > 0) {
                for &s in &support {
                    counts[s] -= 1;
                }
                lengths.push(p as u32);
                if dfs(counts, l, primes, seen, lengths, budget) {
                    return true;
                }
                lengths.pop();
                for &s in &support {
                    counts[s] += 1;
                }
            }
        }
    }
    false
}

/// Per-row-pair cycle decomposition of the scalar products of a Butson
/// matrix. Prime-power levels are decided exactly; composite levels use a
/// bounded search and report inconclusive on exhaustion.
pub fn regularity_check(b: &ButsonMatrix) -> Result<RegularityReport> {
    if b.rows() != b.cols() {
        return Err(Error::dim("regularity check needs a square matrix"));
    }
    let level = b.level();
    let exact = prime_power(level).is_some();
    let mut pairs = Vec::new();
    for i in 0..b.rows() {
        for j in i + 1..b.rows() {
            let signed = b.pair_counts(i, j);
            let counts: Vec<u64> = signed.iter().map(|&c| c as u64).collect();
            let m = RootMultiset::new(level, counts.clone())?;
            let pair = if !vanishes(&m) {
                PairRegularity {
                    rows: (i, j),
                    status: Regularity::Irregular,
                    cycle_lengths: Vec::new(),
                }
            } else if exact {
                let dec = cycle_decompose(&m)?;
                PairRegularity {
                    rows: (i, j),
                    status: Regularity::Regular,
                    cycle_lengths: dec.lengths(),
                }
            } else {
                let mut budget = 200_000;
                match peel_cycles(&counts, level, &mut budget) {
                    Some(lengths) => PairRegularity {
                        rows: (i, j),
                        status: Regularity::Regular,
                        cycle_lengths: lengths,
                    },
                    None => PairRegularity {
                        rows: (i, j),
                        status: Regularity::Inconclusive,
                        cycle_lengths: Vec::new(),
                    },
                }
            };
            pairs.push(pair);
        }
    }
    let overall = if pairs.iter().any(|p| p.status == Regularity::Irregular) {
        Regularity::Irregular
    } else if pairs.iter().any(|p| p.status == Regularity::Inconclusive) {
        Regularity::Inconclusive
    } else {
        Regularity::Regular
    };
    Ok(RegularityReport {
        level,
        pairs,
        overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{fourier_cyclic, tao};
    use rand::Rng;

    fn multiset(level: u32, counts: &[u64]) -> RootMultiset {
        RootMultiset::new(level, counts.to_vec()).unwrap()
    }

    #[test]
    fn vanishing_detects_full_sparse_and_non_sums() {
        assert!(vanishes(&multiset(4, &[1, 1, 1, 1])));
        let mut sparse = vec![0u64; 30];
        for k in [5, 6, 12, 18, 24, 25] {
            sparse[k] = 1;
        }
        assert!(vanishes(&multiset(30, &sparse)));
        assert!(!vanishes(&multiset(3, &[1, 2, 0])));
    }

    #[test]
    fn cycle_decomposition_at_prime_power_levels() {
        let dec = cycle_decompose(&multiset(4, &[1, 1, 1, 1])).unwrap();
        assert_eq!(dec.lengths(), vec![2, 2]);
        assert_eq!(
            dec.cycles(),
            &[
                Cycle { prime: 2, rotation: 0, multiplicity: 1 },
                Cycle { prime: 2, rotation: 1, multiplicity: 1 },
            ]
        );

        let dec = cycle_decompose(&multiset(9, &[1; 9])).unwrap();
        assert_eq!(dec.lengths(), vec![3, 3, 3]);

        let dec = cycle_decompose(&multiset(2, &[3, 3])).unwrap();
        assert_eq!(dec.lengths(), vec![2, 2, 2]);

        assert!(cycle_decompose(&multiset(6, &[1; 6])).is_err());
        assert!(cycle_decompose(&multiset(4, &[2, 1, 1, 1])).is_err());
    }

    #[test]
    fn decomposition_reassembles_to_the_input() {
        let mut rng = crate::exec::stream_rng(5, 0);
        for level in [4u32, 8, 9, 25] {
            let (p, _) = prime_power(level).unwrap();
            let stride = (level / p) as usize;
            for _ in 0..50 {
                // Build a guaranteed-vanishing multiset from random cycles.
                let mut counts = vec![0u64; level as usize];
                for r in 0..stride {
                    let m = rng.gen_range(0..3u64);
                    for k in 0..p as usize {
                        counts[r + k * stride] += m;
                    }
                }
                let m = multiset(level, &counts);
                assert!(vanishes(&m));
                let dec = cycle_decompose(&m).unwrap();
                assert_eq!(dec.reassemble(), m);
            }
        }
    }

    #[test]
    fn vanishing_and_decomposability_agree_at_prime_powers() {
        let mut rng = crate::exec::stream_rng(6, 0);
        for level in [4u32, 8, 9] {
            for _ in 0..200 {
                let counts: Vec<u64> =
                    (0..level).map(|_| rng.gen_range(0..3u64)).collect();
                let m = multiset(level, &counts);
                assert_eq!(vanishes(&m), cycle_decompose(&m).is_ok());
            }
        }
    }

    #[test]
    fn length_semigroup_membership() {
        assert!(lam_leung(5, 6));
        assert!(!lam_leung(8, 9));
        assert!(lam_leung(6, 2));
        assert!(!sylvester(6));
        assert!(!lam_leung(1, 6));
        assert!(lam_leung(12, 30));
        assert!(!lam_leung(1, 30));
    }

    #[test]
    fn small_size_obstructions() {
        assert!(sylvester(2));
        assert!(!sylvester(3));
        assert!(sylvester(4));
        assert!(!sylvester(6));
        assert!(sylvester(12));

        assert!(butson_prime_power(15, 9).unwrap());
        assert!(!butson_prime_power(10, 9).unwrap());
        assert!(butson_prime_power(6, 2).unwrap());
        assert!(butson_prime_power(15, 9).is_ok());
        assert!(butson_prime_power(10, 6).is_err());
    }

    #[test]
    fn mod5_determinant_obstruction() {
        assert!(!de_launey_l3_mod5(15));
        assert!(de_launey_l3_mod5(12));
        assert!(!de_launey_l3_mod5(30));
        // The underlying mod-5 system has no nonzero solution.
        for x in 0i64..5 {
            for y in 0..5 {
                for z in 0..5 {
                    if (x, y, z) == (0, 0, 0) {
                        continue;
                    }
                    let linear = (x + y + z) % 5 == 0;
                    let quadratic = (x * x + y * y + z * z) % 5 == 0;
                    assert!(!(linear && quadratic), "({x},{y},{z})");
                }
            }
        }
    }

    #[test]
    fn circulant_row_sum_obstruction() {
        // One -1 among four ±1 entries: the real 4x4 case.
        assert!(turyn_circulant(&[3, 1]).unwrap());
        // Size 8 splits all fail: 8 is not a perfect square.
        for a in 0..=8u64 {
            assert!(!turyn_circulant(&[a, 8 - a]).unwrap());
        }
        // Level 3: first row of the circulant 3x3 Fourier form.
        assert!(turyn_circulant(&[2, 1, 0]).unwrap());
        assert!(!turyn_circulant(&[1, 1, 1]).unwrap());
        // Level 4, size 12: no split works since 12 is not a sum of two
        // squares.
        for a0 in 0..=12u64 {
            for a1 in 0..=(12 - a0) {
                for a2 in 0..=(12 - a0 - a1) {
                    let a3 = 12 - a0 - a1 - a2;
                    assert!(!turyn_circulant(&[a0, a1, a2, a3]).unwrap());
                }
            }
        }
        assert!(turyn_circulant(&[1, 1, 1, 1, 1, 1]).is_err());
    }

    #[test]
    fn closed_forms_match_the_exact_identity() {
        let mut rng = crate::exec::stream_rng(7, 0);
        for l in [2usize, 3, 4, 5, 7] {
            for _ in 0..300 {
                let counts: Vec<u64> = (0..l).map(|_| rng.gen_range(0..5u64)).collect();
                if counts.iter().sum::<u64>() == 0 {
                    continue;
                }
                assert_eq!(
                    turyn_circulant(&counts).unwrap(),
                    turyn_exact(&counts).unwrap(),
                    "l={l} counts={counts:?}"
                );
            }
        }
    }

    #[test]
    fn eighth_root_row_sum_identity() {
        assert!(turyn_8roots(0, 2, -2, -2, 12));
        assert!(!turyn_8roots(0, 2, -2, 2, 12));
        assert!(turyn_8roots(2, 0, 0, 0, 4));
        assert!(!turyn_8roots(1, 1, 1, 1, 4));
        // Numeric cross-check of the squared-modulus expansion.
        let w = crate::matrix::root_of_unity(1, 8);
        let i = crate::matrix::root_of_unity(2, 8);
        let mut rng = crate::exec::stream_rng(8, 0);
        for _ in 0..100 {
            let (x, y, z, t): (i64, i64, i64, i64) = (
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
            );
            let sum = x as f64 + w * y as f64 + i * z as f64 + i * w * t as f64;
            let expect = (x * x + y * y + z * z + t * t) as f64
                + 2f64.sqrt() * (x * y + y * z + z * t - x * t) as f64;
            assert!((sum.norm_sqr() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn bistochastic_solvability_by_bounded_search() {
        assert!(bistochastic_butson_obstruction(12, 3).unwrap());
        assert!(!bistochastic_butson_obstruction(12, 4).unwrap());
        assert!(bistochastic_butson_obstruction(16, 2).unwrap());
        assert!(!bistochastic_butson_obstruction(8, 2).unwrap());
        assert!(bistochastic_butson_obstruction(4, 2).unwrap());
        assert!(bistochastic_butson_obstruction(13, 4).unwrap());
        assert!(bistochastic_butson_obstruction(5, 5).is_err());
        // 4² + (-2)² + (-2)² = 24 is the witness at size 12, level 3.
        assert_eq!(4 * 4 + 4 + 4, 24);
    }

    #[test]
    fn regularity_of_the_level_three_six_by_six() {
        let report = regularity_check(&tao()).unwrap();
        assert_eq!(report.overall, Regularity::Regular);
        for p in &report.pairs {
            assert_eq!(p.cycle_lengths, vec![3, 3], "pair {:?}", p.rows);
        }
    }

    #[test]
    fn regularity_of_the_level_four_six_by_six() {
        // The one-parameter 6x6 family at parameter 1 lands in level 4.
        let rows: [[u32; 6]; 6] = [
            [0, 0, 0, 0, 0, 0],
            [0, 2, 1, 1, 3, 3],
            [0, 1, 2, 3, 0, 2],
            [0, 1, 3, 2, 2, 0],
            [0, 3, 0, 2, 1, 2],
            [0, 3, 2, 0, 2, 1],
        ];
        let b = ButsonMatrix::from_fn(6, 6, 4, |i, j| rows[i][j]);
        assert!(b.verify_exact());
        let report = regularity_check(&b).unwrap();
        assert_eq!(report.overall, Regularity::Regular);
        for p in &report.pairs {
            assert_eq!(p.cycle_lengths, vec![2, 2, 2], "pair {:?}", p.rows);
        }
    }

    #[test]
    fn regularity_of_fourier_matrices() {
        let report = regularity_check(&fourier_cyclic(5).unwrap()).unwrap();
        assert_eq!(report.overall, Regularity::Regular);
        for p in &report.pairs {
            assert_eq!(p.cycle_lengths, vec![5]);
        }
        // Composite level: six by six Fourier mixes both structures.
        let report = regularity_check(&fourier_cyclic(6).unwrap()).unwrap();
        assert_eq!(report.overall, Regularity::Regular);
        let structures = report.structures();
        assert!(structures.contains(&vec![3, 3]), "got {structures:?}");
        assert!(structures.contains(&vec![2, 2, 2]), "got {structures:?}");
    }

    #[test]
    fn regularity_flags_non_orthogonal_rows() {
        let b = ButsonMatrix::new(3, 3, 3, vec![0, 0, 0, 0, 1, 1, 0, 2, 2]).unwrap();
        let report = regularity_check(&b).unwrap();
        assert_eq!(report.overall, Regularity::Irregular);
        assert!(report
            .pairs
            .iter()
            .any(|p| p.status == Regularity::Irregular));
    }

    #[test]
    fn composite_level_peeling_survives_greedy_dead_ends() {
        // Peeling the long cycle first strands a short remainder; the
        // search must backtrack to the all-pairs decomposition.
        let m = multiset(6, &[2, 1, 1, 2, 1, 1]);
        assert!(vanishes(&m));
        let mut budget = 200_000;
        let lengths = peel_cycles(m.counts(), 6, &mut budget).unwrap();
        assert_eq!(lengths.iter().sum::<u32>(), 8);
    }
}
