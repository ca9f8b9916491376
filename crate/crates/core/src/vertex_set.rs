//! Word-packed vertex sets.
//!
//! Graphs with at most [`INLINE_VERTICES`] vertices keep a set in a single
//! machine word; larger graphs spill to a heap-allocated multi-word bitset.
//! The universe size is part of the value, so sets over different vertex
//! counts never compare equal.

use smallvec::SmallVec;
use std::fmt;

/// Number of vertices a set can address without heap allocation.
pub const INLINE_VERTICES: usize = 64;

type Words = SmallVec<[u64; 1]>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    universe: usize,
    words: Words,
}

#[inline]
fn word_count(universe: usize) -> usize {
    universe.div_ceil(64)
}

impl VertexSet {
    /// The empty subset of `0..universe`.
    pub fn empty(universe: usize) -> Self {
        let mut words = Words::new();
        words.resize(word_count(universe), 0);
        VertexSet { universe, words }
    }

    /// The whole vertex set `0..universe`.
    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for (i, w) in s.words.iter_mut().enumerate() {
            let lo = i * 64;
            let hi = (lo + 64).min(universe);
            let bits = hi - lo;
            *w = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        }
        s
    }

    pub fn from_vertices<I: IntoIterator<Item = usize>>(universe: usize, vs: I) -> Self {
        let mut s = Self::empty(universe);
        for v in vs {
            s.insert(v);
        }
        s
    }

    /// Builds a set from the low bits of `mask`. Bits at or above `universe` are dropped.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        let mut s = Self::empty(universe);
        if universe > 0 {
            let keep = if universe >= 64 { u64::MAX } else { (1u64 << universe) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    /// Low word of the set; exact when `universe <= 64`.
    pub fn low_word(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && (self.words[v / 64] >> (v % 64)) & 1 == 1
    }

    /// Inserts `v`; panics when `v` lies outside the universe.
    #[inline]
    pub fn insert(&mut self, v: usize) -> bool {
        assert!(v < self.universe, "vertex {v} outside universe {}", self.universe);
        let before = self.contains(v);
        self.words[v / 64] |= 1u64 << (v % 64);
        !before
    }

    #[inline]
    pub fn remove(&mut self, v: usize) -> bool {
        if v >= self.universe {
            return false;
        }
        let before = self.contains(v);
        self.words[v / 64] &= !(1u64 << (v % 64));
        before
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter { words: &self.words, idx: 0, cur: self.words.first().copied().unwrap_or(0) }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.universe, other.universe, "vertex sets over different universes");
    }

    pub fn union(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.check_same(other);
        let mut out = self.clone();
        out.subtract(other);
        out
    }

    pub fn complement(&self) -> Self {
        Self::full(self.universe).difference(self)
    }

    pub fn union_with(&mut self, other: &Self) {
        self.check_same(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Self) {
        self.check_same(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, other: &Self) {
        self.check_same(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn intersection_len(&self, other: &Self) -> usize {
        self.check_same(other);
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.check_same(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection_len(other) == 0
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let bit = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * 64 + bit);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

impl<'a> IntoIterator for &'a VertexSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_complement_agree_across_word_boundary() {
        for n in [0, 1, 63, 64, 65, 130] {
            let full = VertexSet::full(n);
            assert_eq!(full.len(), n);
            assert!(full.complement().is_empty());
            let evens = VertexSet::from_vertices(n, (0..n).step_by(2));
            assert_eq!(evens.len() + evens.complement().len(), n);
        }
    }

    #[test]
    fn iteration_is_sorted() {
        let s = VertexSet::from_vertices(200, [199, 3, 64, 0, 127, 128]);
        assert_eq!(s.to_vec(), vec![0, 3, 64, 127, 128, 199]);
        assert_eq!(s.first(), Some(0));
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn mask_round_trip() {
        let s = VertexSet::from_mask(5, 0b1111_0110);
        assert_eq!(s.to_vec(), vec![1, 2, 4]);
        assert_eq!(s.low_word(), 0b10110);
    }
}
