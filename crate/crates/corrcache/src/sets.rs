//! Small sets of 1-based indices packed into a `u64`.
//!
//! Files and users are numbered from 1, so every index set fits into a word
//! as long as the ground set has at most [`MAX_ELEMENT`] elements. Ordering
//! is lexicographic over the ascending element sequence; this matches the
//! enumeration order of blocks and cache tags used throughout the crate and
//! is *not* the numeric order of the underlying words.

use std::cmp::Ordering;
use std::fmt;

/// Largest index a [`SmallSet`] can hold.
pub const MAX_ELEMENT: u32 = 64;

/// A set of indices from `1..=64`, stored as a bit mask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SmallSet(u64);

impl SmallSet {
    /// The empty set.
    pub const EMPTY: SmallSet = SmallSet(0);

    /// Set containing exactly `elem`.
    pub fn singleton(elem: u32) -> Self {
        let mut s = SmallSet::EMPTY;
        s.insert(elem);
        s
    }

    /// Set `{1, 2, ..., n}`.
    pub fn full(n: u32) -> Self {
        assert!(n <= MAX_ELEMENT, "ground set larger than {MAX_ELEMENT}");
        if n == 0 {
            SmallSet::EMPTY
        } else {
            SmallSet(u64::MAX >> (64 - n))
        }
    }

    /// Collects elements from an iterator; duplicates are harmless.
    pub fn from_elems<I: IntoIterator<Item = u32>>(elems: I) -> Self {
        let mut s = SmallSet::EMPTY;
        for e in elems {
            s.insert(e);
        }
        s
    }

    fn bit(elem: u32) -> u64 {
        assert!(
            (1..=MAX_ELEMENT).contains(&elem),
            "index {elem} outside 1..={MAX_ELEMENT}"
        );
        1u64 << (elem - 1)
    }

    pub fn contains(self, elem: u32) -> bool {
        self.0 & Self::bit(elem) != 0
    }

    pub fn insert(&mut self, elem: u32) {
        self.0 |= Self::bit(elem);
    }

    pub fn remove(&mut self, elem: u32) {
        self.0 &= !Self::bit(elem);
    }

    /// Copy of `self` without `elem`.
    pub fn without(self, elem: u32) -> Self {
        let mut s = self;
        s.remove(elem);
        s
    }

    /// Copy of `self` with `elem` added.
    pub fn with(self, elem: u32) -> Self {
        let mut s = self;
        s.insert(elem);
        s
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        SmallSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        SmallSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        SmallSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Elements in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    /// Elements collected into a vector, ascending.
    pub fn elems(self) -> Vec<u32> {
        self.iter().collect()
    }
}

/// Ascending iterator over set elements.
pub struct Iter(u64);

impl Iterator for Iter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(tz + 1)
    }
}

impl Ord for SmallSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for SmallSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SmallSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SmallSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All `k`-element subsets of `ground`, in lexicographic order of their
/// ascending element sequences. `k = 0` yields exactly the empty set.
pub fn k_subsets(ground: SmallSet, k: usize) -> Vec<SmallSet> {
    let elems = ground.elems();
    let n = elems.len();
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![SmallSet::EMPTY];
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    loop {
        out.push(SmallSet::from_elems(idx.iter().map(|&i| elems[i])));
        // Advance the index combination to its lexicographic successor.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
