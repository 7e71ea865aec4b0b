//! Fixed-width bitset over systole indices (n <= 256, enough for m <= 8).

use std::fmt;

pub const WORDS: usize = 4;
pub const CAPACITY: usize = 64 * WORDS;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Bits(pub [u64; WORDS]);

impl Bits {
    pub const EMPTY: Bits = Bits([0; WORDS]);

    pub fn full(n: usize) -> Bits {
        let mut b = Bits::EMPTY;
        for i in 0..n {
            b.insert(i);
        }
        b
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Bits {
        let mut b = Bits::EMPTY;
        for i in it {
            b.insert(i);
        }
        b
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.0[i >> 6] &= !(1 << (i & 63));
    }

    #[inline]
    pub fn with(mut self, i: usize) -> Bits {
        self.insert(i);
        self
    }

    #[inline]
    pub fn without(mut self, i: usize) -> Bits {
        self.remove(i);
        self
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn and(&self, o: &Bits) -> Bits {
        let mut r = *self;
        for k in 0..WORDS {
            r.0[k] &= o.0[k];
        }
        r
    }

    #[inline]
    pub fn or(&self, o: &Bits) -> Bits {
        let mut r = *self;
        for k in 0..WORDS {
            r.0[k] |= o.0[k];
        }
        r
    }

    #[inline]
    pub fn minus(&self, o: &Bits) -> Bits {
        let mut r = *self;
        for k in 0..WORDS {
            r.0[k] &= !o.0[k];
        }
        r
    }

    #[inline]
    pub fn xor(&self, o: &Bits) -> Bits {
        let mut r = *self;
        for k in 0..WORDS {
            r.0[k] ^= o.0[k];
        }
        r
    }

    #[inline]
    pub fn intersects(&self, o: &Bits) -> bool {
        (0..WORDS).any(|k| self.0[k] & o.0[k] != 0)
    }

    #[inline]
    pub fn is_subset(&self, o: &Bits) -> bool {
        (0..WORDS).all(|k| self.0[k] & !o.0[k] == 0)
    }

    /// Complement within `0..n`.
    pub fn complement(&self, n: usize) -> Bits {
        Bits::full(n).minus(self)
    }

    pub fn first(&self) -> Option<usize> {
        for k in 0..WORDS {
            if self.0[k] != 0 {
                return Some(64 * k + self.0[k].trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn last(&self) -> Option<usize> {
        for k in (0..WORDS).rev() {
            if self.0[k] != 0 {
                return Some(64 * k + 63 - self.0[k].leading_zeros() as usize);
            }
        }
        None
    }

    pub fn iter(&self) -> BitsIter {
        BitsIter { words: self.0, k: 0 }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Compare two sets by their sorted index lists (lexicographic).
    pub fn lex_cmp(&self, o: &Bits) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        let mut a = self.iter();
        let mut b = o.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) if x != y => return x.cmp(&y),
                _ => {}
            }
        }
    }
}

pub struct BitsIter {
    words: [u64; WORDS],
    k: usize,
}

impl Iterator for BitsIter {
    type Item = usize;
    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.k < WORDS {
            let w = self.words[self.k];
            if w != 0 {
                let t = w.trailing_zeros() as usize;
                self.words[self.k] &= w - 1;
                return Some(64 * self.k + t);
            }
            self.k += 1;
        }
        None
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for Bits {
    fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Bits {
        Bits::from_indices(it)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn lex_cmp_matches_sorted_vectors(a in proptest::collection::btree_set(0usize..256, 0..12),
                                          b in proptest::collection::btree_set(0usize..256, 0..12)) {
            let x = Bits::from_indices(a.iter().copied());
            let y = Bits::from_indices(b.iter().copied());
            let va: Vec<usize> = a.into_iter().collect();
            let vb: Vec<usize> = b.into_iter().collect();
            prop_assert_eq!(x.lex_cmp(&y), va.cmp(&vb));
            prop_assert_eq!(x.to_vec(), va);
        }

        #[test]
        fn set_algebra(a in proptest::collection::btree_set(0usize..256, 0..40),
                       b in proptest::collection::btree_set(0usize..256, 0..40)) {
            let x = Bits::from_indices(a.iter().copied());
            let y = Bits::from_indices(b.iter().copied());
            prop_assert_eq!(x.and(&y).len(), a.intersection(&b).count());
            prop_assert_eq!(x.or(&y).len(), a.union(&b).count());
            prop_assert_eq!(x.minus(&y).len(), a.difference(&b).count());
            prop_assert_eq!(x.is_subset(&y), a.is_subset(&b));
            prop_assert_eq!(x.first(), a.iter().next().copied());
            prop_assert_eq!(x.last(), a.iter().next_back().copied());
        }
    }
}
