//! Finite abelian groups presented as products of cyclic factors.
//!
//! A group is stored as its list of cycle orders `N_1, …, N_k`; elements are
//! tuples reduced componentwise. This is all the structure needed by the
//! Fourier-matrix builders and the closed-form defect counts.

use crate::error::Error;
use crate::Result;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// `Z_{N_1} × … × Z_{N_k}` with componentwise arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    orders: Vec<u64>,
}

impl FiniteAbelianGroup {
    /// Every cycle order must be at least 2. The empty product is the
    /// trivial group.
    pub fn new(orders: Vec<u64>) -> Result<Self> {
        if let Some(bad) = orders.iter().find(|&&n| n < 2) {
            return Err(Error::validation(format!(
                "cycle orders must be at least 2, got {bad}"
            )));
        }
        Ok(Self { orders })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    /// Number of elements.
    pub fn size(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Least common multiple of the cycle orders: the largest element order.
    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1, |acc, &n| lcm(acc, n))
    }

    /// Elements in lexicographic order, first coordinate slowest. The
    /// enumeration index is the mixed-radix value of the tuple, so
    /// `elements().nth(k)` inverts `index_of`.
    pub fn elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let total = self.size();
        (0..total).map(move |idx| self.element(idx))
    }

    /// Element with mixed-radix index `idx`, first coordinate slowest.
    pub fn element(&self, idx: u64) -> Vec<u64> {
        let mut rem = idx;
        let mut out = vec![0; self.orders.len()];
        for (k, &n) in self.orders.iter().enumerate().rev() {
            out[k] = rem % n;
            rem /= n;
        }
        out
    }

    pub fn index_of(&self, g: &[u64]) -> u64 {
        let mut idx = 0;
        for (k, &n) in self.orders.iter().enumerate() {
            idx = idx * n + g[k] % n;
        }
        idx
    }

    pub fn add(&self, g: &[u64], h: &[u64]) -> Vec<u64> {
        self.orders
            .iter()
            .enumerate()
            .map(|(k, &n)| (g[k] + h[k]) % n)
            .collect()
    }

    pub fn neg(&self, g: &[u64]) -> Vec<u64> {
        self.orders
            .iter()
            .enumerate()
            .map(|(k, &n)| (n - g[k] % n) % n)
            .collect()
    }

    /// Order of an element: the lcm of its componentwise orders
    /// `N_k / gcd(N_k, g_k)`.
    pub fn element_order(&self, g: &[u64]) -> u64 {
        self.orders
            .iter()
            .enumerate()
            .map(|(k, &n)| n / gcd(n, g[k] % n))
            .fold(1, lcm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_exponent_and_rank() {
        let g = FiniteAbelianGroup::new(vec![2, 3, 4]).unwrap();
        assert_eq!(g.size(), 24);
        assert_eq!(g.exponent(), 12);
        assert_eq!(g.rank(), 3);
        let trivial = FiniteAbelianGroup::new(vec![]).unwrap();
        assert_eq!(trivial.size(), 1);
        assert_eq!(trivial.exponent(), 1);
        assert!(FiniteAbelianGroup::new(vec![2, 1]).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_indexable() {
        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        let all: Vec<_> = g.elements().collect();
        assert_eq!(
            all,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        for (idx, e) in all.iter().enumerate() {
            assert_eq!(g.index_of(e), idx as u64);
        }
    }

    #[test]
    fn componentwise_arithmetic() {
        let g = FiniteAbelianGroup::new(vec![4, 6]).unwrap();
        assert_eq!(g.add(&[3, 5], &[2, 2]), vec![1, 1]);
        assert_eq!(g.neg(&[1, 0]), vec![3, 0]);
        assert_eq!(g.add(&[1, 4], &g.neg(&[1, 4])), vec![0, 0]);
    }

    #[test]
    fn element_orders_are_lcms() {
        let z4 = FiniteAbelianGroup::cyclic(4).unwrap();
        let orders: Vec<u64> = z4.elements().map(|g| z4.element_order(&g)).collect();
        assert_eq!(orders, vec![1, 4, 2, 4]);

        let g = FiniteAbelianGroup::new(vec![2, 3]).unwrap();
        assert_eq!(g.element_order(&[1, 1]), 6);
        assert_eq!(g.element_order(&[0, 2]), 3);
        assert_eq!(g.element_order(&[1, 0]), 2);
        assert_eq!(g.element_order(&[0, 0]), 1);
    }
}
