//! Exact vanishing tests for sums of roots of unity.
//!
//! A sum `Σ_k c_k w^k` with `w = e^{2πi/l}` vanishes iff the polynomial
//! `Σ_k c_k x^k` is divisible by the `l`-th cyclotomic polynomial `Φ_l`.
//! Everything here is integer arithmetic; no floating point is involved,
//! so these tests are usable as exact existence obstructions.

/// Coefficients of `Φ_l`, lowest degree first.
///
/// Computed by exact division: `x^l − 1 = Π_{d|l} Φ_d`, so dividing
/// `x^l − 1` by `Φ_d` for every proper divisor `d` of `l` leaves `Φ_l`.
pub fn cyclotomic_poly(l: u32) -> Vec<i64> {
    assert!(l >= 1);
    if l == 1 {
        return vec![-1, 1];
    }
    // x^l - 1
    let mut num = vec![0i64; l as usize + 1];
    num[0] = -1;
    num[l as usize] = 1;
    for d in 1..l {
        if l % d == 0 {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    num
}

/// Exact quotient of integer polynomials; `div` must be monic and divide
/// `num` exactly (true along the cyclotomic tower).
fn poly_div_exact(num: &[i64], div: &[i64]) -> Vec<i64> {
    let dn = num.len() - 1;
    let dd = div.len() - 1;
    assert!(*div.last().unwrap() == 1 && dn >= dd);
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; dn - dd + 1];
    for k in (0..=dn - dd).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for j in 0..=dd {
                rem[k + j] -= c * div[j];
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "inexact cyclotomic division");
    quot
}

/// Remainder of `Σ_k counts[k]·x^k` modulo `Φ_l`; the zero vector iff the
/// corresponding sum of `l`-th roots of unity vanishes.
pub fn reduce_mod_cyclotomic(counts: &[i64], l: u32) -> Vec<i64> {
    let phi = cyclotomic_poly(l);
    let dd = phi.len() - 1;
    let mut rem = counts.to_vec();
    if rem.len() < dd {
        rem.resize(dd, 0);
        return rem;
    }
    for k in (0..=rem.len() - 1 - dd).rev() {
        let c = rem[k + dd];
        if c != 0 {
            for j in 0..=dd {
                rem[k + j] -= c * phi[j];
            }
        }
    }
    rem.truncate(dd);
    rem
}

/// Exact test: does `Σ_k counts[k]·w^k` vanish, `w = e^{2πi/l}`?
///
/// `counts` is indexed by exponent and may be shorter than `l`; entries may
/// be negative (formal differences of multisets are allowed).
pub fn vanishes(counts: &[i64], l: u32) -> bool {
    reduce_mod_cyclotomic(counts, l).iter().all(|&c| c == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::TAU;

    fn float_sum(counts: &[i64], l: u32) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (k, &c) in counts.iter().enumerate() {
            s += (c as f64) * Complex64::from_polar(1.0, TAU * k as f64 / l as f64);
        }
        s.norm()
    }

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_poly(30), vec![1, 1, 0, -1, -1, -1, 0, 1, 1]);
    }

    #[test]
    fn full_sums_vanish() {
        for l in 2..=12u32 {
            let counts = vec![1i64; l as usize];
            assert!(vanishes(&counts, l), "full sum of {l}-th roots");
        }
    }

    #[test]
    fn non_vanishing_sum_is_detected() {
        // 1 + 2w over cube roots of unity.
        assert!(!vanishes(&[1, 2, 0], 3));
        // 1 + w^2 + w^2, the row-product of the spec's 3x3 counterexample.
        assert!(!vanishes(&[1, 0, 2], 3));
    }

    #[test]
    fn level_30_sparse_vanishing_sum() {
        // w^5 + w^6 + w^12 + w^18 + w^24 + w^25 = 0: a vanishing sum that
        // is not a nonnegative combination of full prime sums.
        let mut counts = vec![0i64; 30];
        for k in [5, 6, 12, 18, 24, 25] {
            counts[k] += 1;
        }
        assert!(vanishes(&counts, 30));
        assert!(float_sum(&counts, 30) < 1e-9);
    }

    #[test]
    fn exact_and_float_tests_agree_on_random_multisets() {
        use rand::Rng;
        let mut rng = crate::exec::stream_rng(11, 0);
        for l in [4u32, 6, 9, 12] {
            for _ in 0..200 {
                let counts: Vec<i64> =
                    (0..l).map(|_| rng.gen_range(0..4) as i64).collect();
                let exact = vanishes(&counts, l);
                let float = float_sum(&counts, l) < 1e-9;
                assert_eq!(exact, float, "l={l} counts={counts:?}");
            }
        }
    }
}
