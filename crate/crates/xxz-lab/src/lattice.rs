//! Integer-interval geometry and particle-configuration combinatorics.
//!
//! Sites live on `Z`; every ambient region is a finite interval. A basis
//! state of the spin-1/2 chain is labelled by the set of occupied
//! (spin-down) sites, stored either as a sorted site list ([`SiteSet`]) or,
//! on hot paths, as a bit mask relative to the ambient interval.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::OnceLock;

/// A finite interval `[lo, hi]` of lattice sites (inclusive), possibly empty.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SiteInterval {
    lo: i32,
    hi: i32,
}

impl SiteInterval {
    /// Nonempty interval `[lo, hi]`. Panics if `lo > hi`.
    pub fn new(lo: i32, hi: i32) -> Self {
        assert!(lo <= hi, "interval [{lo}, {hi}] is empty; use SiteInterval::empty()");
        SiteInterval { lo, hi }
    }

    /// The empty interval.
    pub fn empty() -> Self {
        SiteInterval { lo: 0, hi: -1 }
    }

    /// Interval of `len` sites starting at 0.
    pub fn of_len(len: usize) -> Self {
        assert!(len > 0);
        SiteInterval::new(0, len as i32 - 1)
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn contains(&self, site: i32) -> bool {
        self.lo <= site && site <= self.hi
    }

    pub fn contains_interval(&self, other: &SiteInterval) -> bool {
        other.is_empty() || (self.contains(other.lo) && self.contains(other.hi))
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }

    pub fn intersect(&self, other: &SiteInterval) -> SiteInterval {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            SiteInterval::empty()
        } else {
            SiteInterval { lo, hi }
        }
    }

    /// `[A]_s` for an interval `A`, clamped to `ambient`. Requires `s >= 0`.
    pub fn enlarge_within(&self, ambient: &SiteInterval, s: i32) -> SiteInterval {
        assert!(s >= 0);
        if self.is_empty() {
            return SiteInterval::empty();
        }
        SiteInterval {
            lo: (self.lo - s).max(ambient.lo),
            hi: (self.hi + s).min(ambient.hi),
        }
    }

    /// Offset of `site` from the left end; the bit index in mask form.
    pub fn offset(&self, site: i32) -> usize {
        debug_assert!(self.contains(site));
        (site - self.lo) as usize
    }
}

impl fmt::Debug for SiteInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[]")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl fmt::Display for SiteInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A finite set of sites, kept sorted and deduplicated.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SiteSet {
    sites: Vec<i32>,
}

impl SiteSet {
    pub fn new(mut sites: Vec<i32>) -> Self {
        sites.sort_unstable();
        sites.dedup();
        SiteSet { sites }
    }

    pub fn empty() -> Self {
        SiteSet { sites: Vec::new() }
    }

    pub fn from_interval(iv: &SiteInterval) -> Self {
        SiteSet {
            sites: iv.iter().collect(),
        }
    }

    /// Decode a bit mask relative to `ambient` (bit `b` = site `ambient.lo() + b`).
    pub fn from_mask(mask: u64, ambient: &SiteInterval) -> Self {
        let mut sites = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            let b = m.trailing_zeros() as i32;
            sites.push(ambient.lo() + b);
            m &= m - 1;
        }
        SiteSet { sites }
    }

    /// Encode as a bit mask relative to `ambient`. All sites must lie inside.
    pub fn mask(&self, ambient: &SiteInterval) -> u64 {
        assert!(ambient.len() <= 64);
        let mut m = 0u64;
        for &s in &self.sites {
            assert!(ambient.contains(s), "site {s} outside ambient {ambient}");
            m |= 1u64 << ambient.offset(s);
        }
        m
    }

    pub fn sites(&self) -> &[i32] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: i32) -> bool {
        self.sites.binary_search(&site).is_ok()
    }

    pub fn is_subset_of(&self, ambient: &SiteInterval) -> bool {
        self.sites.iter().all(|&s| ambient.contains(s))
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        let mut v = self.sites.clone();
        v.extend_from_slice(&other.sites);
        SiteSet::new(v)
    }

    pub fn minus(&self, other: &SiteSet) -> SiteSet {
        SiteSet {
            sites: self
                .sites
                .iter()
                .copied()
                .filter(|s| !other.contains(*s))
                .collect(),
        }
    }

    fn dist_to(&self, site: i32) -> Option<i32> {
        self.sites.iter().map(|&s| (s - site).abs()).min()
    }
}

impl fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, s) in self.sites.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// `[A]_s` inside the interval `ambient`.
///
/// For `s >= 0` this is the set of sites within distance `s` of `A`; for
/// `s < 0` it strips the inner collar: `A` minus the `|s|`-neighborhood of
/// the complement.
pub fn enlarge(a: &SiteSet, s: i32, ambient: &SiteInterval) -> SiteSet {
    assert!(a.is_subset_of(ambient), "A must lie inside the ambient interval");
    if s >= 0 {
        if a.is_empty() {
            return SiteSet::empty();
        }
        SiteSet {
            sites: ambient
                .iter()
                .filter(|&i| a.dist_to(i).map(|d| d <= s).unwrap_or(false))
                .collect(),
        }
    } else {
        let complement = SiteSet {
            sites: ambient.iter().filter(|i| !a.contains(*i)).collect(),
        };
        let collar = enlarge(&complement, -s, ambient);
        a.minus(&collar)
    }
}

/// Inner, outer, and full `s`-boundaries of `A` inside `ambient`.
pub fn boundary_sets(a: &SiteSet, s: i32, ambient: &SiteInterval) -> (SiteSet, SiteSet, SiteSet) {
    assert!(s > 0);
    let outer = enlarge(a, s, ambient).minus(a);
    let inner = a.minus(&enlarge(a, -s, ambient));
    let full = inner.union(&outer);
    (inner, outer, full)
}

/// Number of connected components of `A` as a subgraph of `Z`.
pub fn cluster_count(a: &SiteSet) -> usize {
    let mut count = 0;
    let mut prev: Option<i32> = None;
    for &s in a.sites() {
        if prev != Some(s - 1) {
            count += 1;
        }
        prev = Some(s);
    }
    count
}

/// Cluster count of a configuration mask, counting adjacency only across
/// the bonds whose left offsets are set in `bond_mask` (bit `p` = bond
/// between offsets `p` and `p+1`).
pub fn mask_cluster_count(config: u64, bond_mask: u64) -> usize {
    let merged = (config & (config >> 1) & bond_mask).count_ones();
    config.count_ones() as usize - merged as usize
}

const MAX_SITES: usize = 64;

fn binomial_table() -> &'static Vec<[u64; MAX_SITES + 1]> {
    static TABLE: OnceLock<Vec<[u64; MAX_SITES + 1]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![[0u64; MAX_SITES + 1]; MAX_SITES + 1];
        for n in 0..=MAX_SITES {
            t[n][0] = 1;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1].saturating_add(t[n - 1][k]);
            }
        }
        t
    })
}

/// Binomial coefficient `C(n, k)`; 0 when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n || n > MAX_SITES {
        if n > MAX_SITES {
            panic!("binomial table capped at n = {MAX_SITES}");
        }
        return 0;
    }
    binomial_table()[n][k]
}

/// Ranked enumeration of the `n`-particle configurations on an interval.
///
/// Configurations are bit masks relative to the ambient interval and are
/// ordered colexicographically, which for fixed particle number coincides
/// with increasing numeric value of the mask. Ranking uses the
/// combinatorial number system: `rank(A) = sum_j C(p_j, j + 1)` over the
/// set bit positions `p_0 < p_1 < ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    ambient: SiteInterval,
    n: usize,
    dim: usize,
}

impl SectorBasis {
    pub fn new(ambient: SiteInterval, n: usize) -> Self {
        let len = ambient.len();
        assert!(len <= MAX_SITES, "ambient too large for mask representation");
        assert!(n <= len, "particle count {n} exceeds {len} sites");
        let dim = binomial(len, n) as usize;
        SectorBasis { ambient, n, dim }
    }

    pub fn ambient(&self) -> &SiteInterval {
        &self.ambient
    }

    pub fn particle_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Colex rank of a configuration mask. Errors on cardinality mismatch.
    pub fn rank(&self, config: u64) -> Result<usize> {
        if config.count_ones() as usize != self.n {
            return Err(Error::CardinalityMismatch {
                expected: self.n,
                got: config.count_ones() as usize,
            });
        }
        if config >> self.ambient.len() != 0 {
            return Err(Error::SiteOutsideAmbient);
        }
        let mut r = 0u64;
        let mut m = config;
        let mut j = 0usize;
        while m != 0 {
            let p = m.trailing_zeros() as usize;
            j += 1;
            r += binomial(p, j);
            m &= m - 1;
        }
        Ok(r as usize)
    }

    /// Configuration mask at colex rank `index`.
    pub fn unrank(&self, index: usize) -> Result<u64> {
        if index >= self.dim {
            return Err(Error::IndexOutOfRange {
                index,
                dim: self.dim,
            });
        }
        let mut rem = index as u64;
        let mut mask = 0u64;
        let mut hi = self.ambient.len();
        for j in (1..=self.n).rev() {
            // largest p with C(p, j) <= rem
            let mut p = hi - 1;
            while binomial(p, j) > rem {
                p -= 1;
            }
            rem -= binomial(p, j);
            mask |= 1u64 << p;
            hi = p;
        }
        Ok(mask)
    }

    pub fn rank_set(&self, a: &SiteSet) -> Result<usize> {
        self.rank(a.mask(&self.ambient))
    }

    pub fn unrank_set(&self, index: usize) -> Result<SiteSet> {
        Ok(SiteSet::from_mask(self.unrank(index)?, &self.ambient))
    }

    /// Configurations in rank order (Gosper iteration over fixed popcount).
    pub fn iter_masks(&self) -> SectorMaskIter {
        let first = if self.n == 0 { 0 } else { (1u64 << self.n) - 1 };
        SectorMaskIter {
            next: Some(first),
            remaining: self.dim,
        }
    }
}

pub struct SectorMaskIter {
    next: Option<u64>,
    remaining: usize,
}

impl Iterator for SectorMaskIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            // next mask with the same popcount, numerically increasing
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[i32]) -> SiteSet {
        SiteSet::new(v.to_vec())
    }

    #[test]
    fn enlarge_identity_and_growth() {
        let amb = SiteInterval::new(0, 9);
        let a = set(&[3, 4]);
        assert_eq!(enlarge(&a, 0, &amb), a);
        assert_eq!(enlarge(&a, 2, &amb), set(&[1, 2, 3, 4, 5, 6]));
    }

    #[test]
    fn enlarge_negative_inner_collar() {
        let amb = SiteInterval::new(0, 9);
        let a = set(&[2, 3, 4, 5, 6, 7]);
        assert_eq!(enlarge(&a, -2, &amb), set(&[4, 5]));
    }

    #[test]
    fn enlarge_negative_brute_force() {
        // against a direct scan of the two-case definition on every subset
        let amb = SiteInterval::new(0, 7);
        for bits in 0u64..256 {
            let a = SiteSet::from_mask(bits, &amb);
            for s in 1..4i32 {
                let got = enlarge(&a, -s, &amb);
                let want: Vec<i32> = amb
                    .iter()
                    .filter(|&i| {
                        let comp: Vec<i32> = amb.iter().filter(|j| !a.contains(*j)).collect();
                        let d = comp.iter().map(|&j| (j - i).abs()).min();
                        a.contains(i) && d.map(|d| d >= 1 + s).unwrap_or(true)
                    })
                    .collect();
                assert_eq!(got, SiteSet::new(want), "A={a:?} s={s}");
            }
        }
    }

    #[test]
    fn boundary_examples() {
        let amb = SiteInterval::new(0, 9);
        let a = SiteSet::from_interval(&SiteInterval::new(3, 6));
        let (inner, outer, full) = boundary_sets(&a, 1, &amb);
        assert_eq!(inner, set(&[3, 6]));
        assert_eq!(outer, set(&[2, 7]));
        assert_eq!(full, set(&[2, 3, 6, 7]));

        let whole = SiteSet::from_interval(&amb);
        let (_, outer, _) = boundary_sets(&whole, 1, &amb);
        assert!(outer.is_empty());

        let a = set(&[4, 5]);
        let (inner, outer, _) = boundary_sets(&a, 3, &amb);
        assert_eq!(inner, set(&[4, 5]));
        assert_eq!(outer, set(&[1, 2, 3, 6, 7, 8]));
    }

    #[test]
    fn cluster_count_examples() {
        assert_eq!(cluster_count(&SiteSet::empty()), 0);
        assert_eq!(cluster_count(&set(&[1, 2, 4])), 2);
    }

    #[test]
    fn cluster_count_flood_fill_oracle() {
        let amb = SiteInterval::new(0, 9);
        for bits in 0u64..1024 {
            let a = SiteSet::from_mask(bits, &amb);
            // flood fill over Z adjacency
            let mut seen = vec![false; a.len()];
            let mut comps = 0;
            for i in 0..a.len() {
                if seen[i] {
                    continue;
                }
                comps += 1;
                let mut stack = vec![i];
                while let Some(j) = stack.pop() {
                    if seen[j] {
                        continue;
                    }
                    seen[j] = true;
                    for k in 0..a.len() {
                        if !seen[k] && (a.sites()[k] - a.sites()[j]).abs() == 1 {
                            stack.push(k);
                        }
                    }
                }
            }
            assert_eq!(cluster_count(&a), comps);
            assert_eq!(mask_cluster_count(bits, u64::MAX), comps);
        }
    }

    #[test]
    fn rank_unrank_exhaustive() {
        for l in 1..=12usize {
            let amb = SiteInterval::of_len(l);
            let mut total = 0usize;
            for n in 0..=l {
                let basis = SectorBasis::new(amb, n);
                total += basis.dim();
                for (i, m) in basis.iter_masks().enumerate() {
                    assert_eq!(basis.unrank(i).unwrap(), m);
                    assert_eq!(basis.rank(m).unwrap(), i);
                }
            }
            assert_eq!(total, 1 << l);
        }
    }

    #[test]
    fn rank_errors() {
        let basis = SectorBasis::new(SiteInterval::of_len(4), 2);
        assert!(basis.rank(0b0111).is_err());
        assert!(basis.unrank(6).is_err());
        let empty = SectorBasis::new(SiteInterval::of_len(4), 0);
        assert_eq!(empty.dim(), 1);
        assert_eq!(empty.unrank(0).unwrap(), 0);
    }

    proptest! {
        #[test]
        fn prop_enlarge_contains(bits in 0u64..1024, s in 0i32..5) {
            let amb = SiteInterval::new(0, 9);
            let a = SiteSet::from_mask(bits, &amb);
            let e = enlarge(&a, s, &amb);
            for &x in a.sites() {
                prop_assert!(e.contains(x));
            }
        }

        #[test]
        fn prop_enlarge_interval_size(lo in 0i32..8, len in 1i32..4, s in 0i32..5) {
            let amb = SiteInterval::new(0, 9);
            let hi = (lo + len - 1).min(9);
            let a = SiteSet::from_interval(&SiteInterval::new(lo, hi));
            let e = enlarge(&a, s, &amb);
            prop_assert!(e.len() <= a.len() + 2 * s as usize);
        }

        #[test]
        fn prop_cluster_translation_invariant(bits in 0u64..1024, shift in -3i32..4) {
            let amb = SiteInterval::new(0, 9);
            let a = SiteSet::from_mask(bits, &amb);
            let b = SiteSet::new(a.sites().iter().map(|s| s + shift).collect());
            prop_assert_eq!(cluster_count(&a), cluster_count(&b));
        }
    }
}
