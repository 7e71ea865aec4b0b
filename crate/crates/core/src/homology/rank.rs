//! Exact rational rank by fraction-free row reduction. Rows are reduced into an
//! echelon basis one at a time and divided by their content after each step, which
//! keeps entries tiny for chain-complex matrices. Machine integers are used until
//! an operation would overflow, at which point the whole computation restarts on
//! big integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Incremental echelon basis over the rationals.
#[derive(Clone, Debug)]
pub struct Echelon {
    cols: usize,
    pivots: Vec<(usize, Vec<i64>)>,
    big: Option<Vec<(usize, Vec<BigInt>)>>,
    history: Vec<Vec<i64>>,
}

impl Echelon {
    pub fn new(cols: usize) -> Echelon {
        Echelon { cols, pivots: Vec::new(), big: None, history: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        match &self.big {
            Some(b) => b.len(),
            None => self.pivots.len(),
        }
    }

    /// Adds a row; returns `true` if it increased the rank.
    pub fn insert(&mut self, row: &[i64]) -> bool {
        assert_eq!(row.len(), self.cols);
        self.history.push(row.to_vec());
        if self.big.is_none() {
            match reduce_small(&self.pivots, row) {
                Some(Some((p, r))) => {
                    insert_sorted(&mut self.pivots, p, r);
                    return true;
                }
                Some(None) => return false,
                None => self.promote(),
            }
        }
        let big = self.big.as_mut().unwrap();
        let r: Vec<BigInt> = row.iter().map(|&x| BigInt::from(x)).collect();
        match reduce_big(big, r) {
            Some((p, r)) => {
                insert_sorted(big, p, r);
                true
            }
            None => false,
        }
    }

    fn promote(&mut self) {
        let mut big: Vec<(usize, Vec<BigInt>)> = Vec::new();
        // replay every row seen so far except the one that overflowed
        let rows = self.history[..self.history.len() - 1].to_vec();
        for row in rows {
            let r: Vec<BigInt> = row.iter().map(|&x| BigInt::from(x)).collect();
            if let Some((p, r)) = reduce_big(&big, r) {
                insert_sorted(&mut big, p, r);
            }
        }
        self.pivots.clear();
        self.big = Some(big);
    }

    pub fn is_big(&self) -> bool {
        self.big.is_some()
    }
}

fn insert_sorted<T>(pivots: &mut Vec<(usize, T)>, p: usize, r: T) {
    let at = pivots.partition_point(|(q, _)| *q < p);
    pivots.insert(at, (p, r));
}

fn gcd_normalize_small(r: &mut [i64]) {
    let mut g = 0i64;
    for &x in r.iter() {
        if x != 0 {
            g = g.gcd(&x);
            if g == 1 {
                break;
            }
        }
    }
    let lead = r.iter().find(|&&x| x != 0).copied().unwrap_or(1);
    if lead < 0 {
        g = -g.abs();
    }
    if g != 0 && g != 1 {
        for x in r.iter_mut() {
            *x /= g;
        }
    }
}

/// `None` on overflow, `Some(None)` if the row reduces to zero.
fn reduce_small(pivots: &[(usize, Vec<i64>)], row: &[i64]) -> Option<Option<(usize, Vec<i64>)>> {
    let mut r = row.to_vec();
    for (p, pr) in pivots {
        let c = r[*p];
        if c == 0 {
            continue;
        }
        let a = pr[*p];
        let g = a.gcd(&c);
        let (fa, fc) = (a / g, c / g);
        for j in 0..r.len() {
            let v = (r[j] as i128) * (fa as i128) - (pr[j] as i128) * (fc as i128);
            if v > i64::MAX as i128 || v < i64::MIN as i128 {
                return None;
            }
            r[j] = v as i64;
        }
        gcd_normalize_small(&mut r);
    }
    match r.iter().position(|&x| x != 0) {
        Some(p) => Some(Some((p, r))),
        None => Some(None),
    }
}

fn reduce_big(pivots: &[(usize, Vec<BigInt>)], mut r: Vec<BigInt>) -> Option<(usize, Vec<BigInt>)> {
    for (p, pr) in pivots {
        if r[*p].is_zero() {
            continue;
        }
        let a = pr[*p].clone();
        let c = r[*p].clone();
        let g = a.gcd(&c);
        let (fa, fc) = (&a / &g, &c / &g);
        for j in 0..r.len() {
            r[j] = &r[j] * &fa - &pr[j] * &fc;
        }
        let mut g = BigInt::zero();
        for x in r.iter().filter(|x| !x.is_zero()) {
            g = g.gcd(x);
        }
        if !g.is_zero() {
            if r.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
                g = -g.abs();
            }
            for x in r.iter_mut() {
                *x = &*x / &g;
            }
        }
    }
    r.iter().position(|x| !x.is_zero()).map(|p| (p, r))
}

/// Exact rank of an integer matrix given by rows.
pub fn exact_rank(rows: &[Vec<i64>]) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut e = Echelon::new(cols);
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Rank over the prime field `F_p`. Never exceeds the rational rank.
pub fn rank_mod_p(rows: &[Vec<i64>], p: u64) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut mat: Vec<Vec<u64>> =
        rows.iter().map(|r| r.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect()).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..mat.len()).find(|&i| mat[i][c] != 0) else { continue };
        mat.swap(rank, piv);
        let inv = pow_mod(mat[rank][c], p - 2, p);
        for j in c..cols {
            mat[rank][j] = mat[rank][j] * inv % p;
        }
        for i in 0..mat.len() {
            if i != rank && mat[i][c] != 0 {
                let f = mat[i][c];
                for j in c..cols {
                    mat[i][j] = (mat[i][j] + p * p - f * mat[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_examples() {
        assert_eq!(exact_rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(exact_rank(&[vec![1, 2], vec![2, 5]]), 2);
        assert_eq!(exact_rank(&[vec![0, 0], vec![0, 0]]), 0);
        // rank 2 over Q but 1 over F_2
        assert_eq!(exact_rank(&[vec![1, 1], vec![1, -1]]), 2);
        assert_eq!(rank_mod_p(&[vec![1, 1], vec![1, -1]], 2), 1);
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = 1i64 << 40;
        let rows = vec![vec![big, 1, 0], vec![1, big, 1], vec![big + 1, big + 1, 1]];
        let mut e = Echelon::new(3);
        for r in &rows {
            e.insert(r);
        }
        assert!(e.is_big());
        assert_eq!(e.rank(), 2);
        let rows = vec![vec![big, 3, 0], vec![7, big, 1], vec![5, 1, big]];
        assert_eq!(exact_rank(&rows), 3);
    }

    proptest! {
        #[test]
        fn agrees_with_large_prime(rows in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 7), 1..9)) {
            // over a large prime the ranks agree for such small entries
            prop_assert_eq!(exact_rank(&rows), rank_mod_p(&rows, 1_000_000_007));
        }

        #[test]
        fn invariant_under_row_order(mut rows in proptest::collection::vec(proptest::collection::vec(-2i64..=2, 6), 1..8)) {
            let r1 = exact_rank(&rows);
            rows.reverse();
            prop_assert_eq!(r1, exact_rank(&rows));
        }
    }
}
