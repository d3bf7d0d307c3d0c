//! Finite weighted ground spaces and their configurations.
//!
//! A site is an atom of the discretized ground set; a configuration is a set
//! of sites stored as a bitmask; a multiconfiguration counts repeated sites.
//! All enumeration is in a fixed total order: ascending cardinality first,
//! ascending mask value inside a rank. Every downstream module relies on that
//! order being reproducible.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::{Result, MASK_SITE_LIMIT};

/// One atom of the ground space.
#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub label: String,
    /// Reference weight of the site (the discretized intensity mass).
    pub weight: f64,
    /// Optional coordinates, only used to describe regions externally.
    pub coords: Vec<f64>,
}

impl Site {
    pub fn new(label: impl Into<String>, weight: f64) -> Self {
        Site {
            label: label.into(),
            weight,
            coords: Vec::new(),
        }
    }
}

/// Finite weighted ground set plus named regions.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundSpace {
    sites: Vec<Site>,
    regions: BTreeMap<String, u64>,
}

impl GroundSpace {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        if sites.len() > MASK_SITE_LIMIT {
            return Err(Error::TooManySites {
                sites: sites.len(),
                limit: MASK_SITE_LIMIT,
            });
        }
        Ok(GroundSpace {
            sites,
            regions: BTreeMap::new(),
        })
    }

    /// Space of `n` sites labelled `s0..`, all with unit weight.
    pub fn with_unit_weights(n: usize) -> Result<Self> {
        GroundSpace::new((0..n).map(|i| Site::new(format!("s{i}"), 1.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn weight(&self, site: usize) -> f64 {
        self.sites[site].weight
    }

    pub fn full_mask(&self) -> u64 {
        mask_of_width(self.sites.len())
    }

    pub fn add_region(&mut self, name: impl Into<String>, mask: u64) -> Result<()> {
        let stray = mask & !self.full_mask();
        if stray != 0 {
            return Err(Error::RegionOutOfRange {
                site: stray.trailing_zeros() as usize,
                sites: self.sites.len(),
            });
        }
        self.regions.insert(name.into(), mask);
        Ok(())
    }

    pub fn regions(&self) -> &BTreeMap<String, u64> {
        &self.regions
    }

    /// Mask of a named region; `None` means the whole space.
    pub fn region_mask(&self, region: Option<&str>) -> Result<u64> {
        match region {
            None => Ok(self.full_mask()),
            Some(name) => self
                .regions
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownRegion(name.to_string())),
        }
    }

    /// All configurations inside `region` with at most `max_points` sites,
    /// ordered by (cardinality, mask).
    pub fn enumerate_configurations(
        &self,
        max_points: usize,
        region: Option<&str>,
    ) -> Result<Vec<Configuration>> {
        let mask = self.region_mask(region)?;
        Ok(enumerate_in_mask(mask, max_points))
    }

    /// Human-readable `{label,label}` rendering of a configuration.
    pub fn config_labels(&self, cfg: Configuration) -> String {
        let labels: Vec<&str> = cfg
            .iter_sites()
            .map(|s| self.sites[s].label.as_str())
            .collect();
        format!("{{{}}}", labels.join(","))
    }
}

fn mask_of_width(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Simple configuration: a set of sites as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Configuration(pub u64);

impl Configuration {
    pub const EMPTY: Configuration = Configuration(0);

    pub fn from_sites(sites: &[usize]) -> Self {
        let mut mask = 0u64;
        for &s in sites {
            debug_assert!(s < MASK_SITE_LIMIT);
            mask |= 1u64 << s;
        }
        Configuration(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    /// Number of occupied sites.
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, site: usize) -> bool {
        self.0 >> site & 1 == 1
    }

    pub fn union(self, other: Configuration) -> Configuration {
        Configuration(self.0 | other.0)
    }

    pub fn intersection(self, other: Configuration) -> Configuration {
        Configuration(self.0 & other.0)
    }

    pub fn minus(self, other: Configuration) -> Configuration {
        Configuration(self.0 & !other.0)
    }

    pub fn insert(self, site: usize) -> Configuration {
        Configuration(self.0 | 1u64 << site)
    }

    pub fn remove(self, site: usize) -> Configuration {
        Configuration(self.0 & !(1u64 << site))
    }

    pub fn is_subset_of(self, other: Configuration) -> bool {
        self.0 & !other.0 == 0
    }

    /// Occupied sites in ascending order.
    pub fn iter_sites(self) -> impl Iterator<Item = usize> {
        let mut mask = self.0;
        std::iter::from_fn(move || {
            if mask == 0 {
                None
            } else {
                let s = mask.trailing_zeros() as usize;
                mask &= mask - 1;
                Some(s)
            }
        })
    }

    /// All `k`-point sub-configurations in ascending mask order.
    pub fn sub_configurations(self, k: usize) -> Vec<Configuration> {
        let bits: Vec<usize> = self.iter_sites().collect();
        combinations_as_masks(&bits, k)
    }
}

/// All subsets of `mask` with at most `max_points` bits, ordered by
/// (cardinality, mask).
pub fn enumerate_in_mask(mask: u64, max_points: usize) -> Vec<Configuration> {
    let bits: Vec<usize> = Configuration(mask).iter_sites().collect();
    let cap = max_points.min(bits.len());
    let mut out = Vec::new();
    for k in 0..=cap {
        out.extend(combinations_as_masks(&bits, k));
    }
    out
}

/// Masks of all `k`-subsets of `bits` (bit positions, ascending), in
/// ascending mask order. Colexicographic enumeration of index tuples gives
/// exactly that order.
fn combinations_as_masks(bits: &[usize], k: usize) -> Vec<Configuration> {
    let n = bits.len();
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![Configuration::EMPTY];
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    loop {
        let mut mask = 0u64;
        for &i in &idx {
            mask |= 1u64 << bits[i];
        }
        out.push(Configuration(mask));
        // Next tuple in colex order: bump the lowest index that has room
        // before its successor, reset everything below it.
        let mut j = 0;
        loop {
            if j == k {
                return out;
            }
            let limit = if j + 1 < k { idx[j + 1] } else { n };
            if idx[j] + 1 < limit {
                idx[j] += 1;
                for (r, slot) in idx.iter_mut().enumerate().take(j) {
                    *slot = r;
                }
                break;
            }
            j += 1;
        }
    }
}

/// Configuration with multiplicities: a finite multiset of sites.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct MultiConfiguration {
    counts: BTreeMap<usize, u32>,
}

impl MultiConfiguration {
    pub fn new() -> Self {
        MultiConfiguration::default()
    }

    pub fn from_configuration(cfg: Configuration) -> Self {
        let mut counts = BTreeMap::new();
        for s in cfg.iter_sites() {
            counts.insert(s, 1);
        }
        MultiConfiguration { counts }
    }

    pub fn from_points(points: &[usize]) -> Self {
        let mut m = MultiConfiguration::new();
        for &p in points {
            m.push(p);
        }
        m
    }

    pub fn push(&mut self, site: usize) {
        *self.counts.entry(site).or_insert(0) += 1;
    }

    pub fn multiplicity(&self, site: usize) -> u32 {
        self.counts.get(&site).copied().unwrap_or(0)
    }

    /// Total number of points, multiplicities included.
    pub fn total_points(&self) -> usize {
        self.counts.values().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// True when every multiplicity is one.
    pub fn is_simple(&self) -> bool {
        self.counts.values().all(|&c| c == 1)
    }

    /// Mask of the support.
    pub fn support(&self) -> Configuration {
        let mut mask = 0u64;
        for &s in self.counts.keys() {
            mask |= 1u64 << s;
        }
        Configuration(mask)
    }

    /// The simple configuration, if no site repeats.
    pub fn to_configuration(&self) -> Option<Configuration> {
        if self.is_simple() {
            Some(self.support())
        } else {
            None
        }
    }

    /// Multiset sum (disjoint union of points).
    pub fn sum(&self, other: &MultiConfiguration) -> MultiConfiguration {
        let mut counts = self.counts.clone();
        for (&s, &c) in &other.counts {
            *counts.entry(s).or_insert(0) += c;
        }
        MultiConfiguration { counts }
    }

    /// Remove one point at `site`; no-op result is `None` if absent.
    pub fn minus_one(&self, site: usize) -> Option<MultiConfiguration> {
        let c = self.multiplicity(site);
        if c == 0 {
            return None;
        }
        let mut counts = self.counts.clone();
        if c == 1 {
            counts.remove(&site);
        } else {
            counts.insert(site, c - 1);
        }
        Some(MultiConfiguration { counts })
    }

    /// Pointwise minimum with `other`.
    pub fn min_with(&self, other: &MultiConfiguration) -> MultiConfiguration {
        let mut counts = BTreeMap::new();
        for (&s, &c) in &self.counts {
            let m = c.min(other.multiplicity(s));
            if m > 0 {
                counts.insert(s, m);
            }
        }
        MultiConfiguration { counts }
    }

    /// Pointwise difference `self - other` (assumes `other <= self`).
    pub fn minus(&self, other: &MultiConfiguration) -> MultiConfiguration {
        let mut counts = BTreeMap::new();
        for (&s, &c) in &self.counts {
            let o = other.multiplicity(s);
            debug_assert!(o <= c);
            if c - o > 0 {
                counts.insert(s, c - o);
            }
        }
        MultiConfiguration { counts }
    }

    /// All sub-multisets, smallest first (by point count, then order).
    pub fn sub_multisets(&self) -> Vec<MultiConfiguration> {
        let entries: Vec<(usize, u32)> = self.counts.iter().map(|(&s, &c)| (s, c)).collect();
        let mut out = vec![MultiConfiguration::new()];
        for (site, mult) in entries {
            let mut next = Vec::with_capacity(out.len() * (mult as usize + 1));
            for base in &out {
                for take in 0..=mult {
                    let mut m = base.clone();
                    if take > 0 {
                        m.counts.insert(site, take);
                    }
                    next.push(m);
                }
            }
            out = next;
        }
        out.sort_by_key(|m| m.total_points());
        out
    }

    pub fn iter_counts(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.counts.iter().map(|(&s, &c)| (s, c))
    }

    /// Labeled point list: each site repeated by its multiplicity.
    pub fn points(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total_points());
        for (&s, &c) in &self.counts {
            for _ in 0..c {
                out.push(s);
            }
        }
        out
    }
}

/// All ordered triples of multisets `(p1, p2, p3)` with `p1 + p2 + p3 = eta`,
/// enumerated by labeling every point of `eta` with one of three parts.
///
/// The result has exactly `3^|eta|` entries (repeated points produce repeated
/// triples: the enumeration is over labeled points, not distinct splittings).
/// Size grows fast; keep `|eta|` small.
pub fn partitions3(eta: &MultiConfiguration) -> Vec<[MultiConfiguration; 3]> {
    let points = eta.points();
    let k = points.len();
    let total = 3usize.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut parts = [
            MultiConfiguration::new(),
            MultiConfiguration::new(),
            MultiConfiguration::new(),
        ];
        let mut c = code;
        for &p in &points {
            parts[c % 3].push(p);
            c /= 3;
        }
        out.push(parts);
    }
    out
}

/// Binomial coefficient, used as an independent counting oracle in tests.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_small_spaces() {
        let two = GroundSpace::with_unit_weights(2).unwrap();
        let cfgs = two.enumerate_configurations(2, None).unwrap();
        assert_eq!(
            cfgs,
            vec![
                Configuration(0b00),
                Configuration(0b01),
                Configuration(0b10),
                Configuration(0b11)
            ]
        );

        let three = GroundSpace::with_unit_weights(3).unwrap();
        let rank1 = three.enumerate_configurations(1, None).unwrap();
        assert_eq!(
            rank1,
            vec![
                Configuration(0b000),
                Configuration(0b001),
                Configuration(0b010),
                Configuration(0b100)
            ]
        );
        assert_eq!(three.enumerate_configurations(2, None).unwrap().len(), 7);
    }

    #[test]
    fn enumeration_counts_match_binomial_sums() {
        let space = GroundSpace::with_unit_weights(12).unwrap();
        for max in [0usize, 1, 3, 7, 12] {
            let expected: u64 = (0..=max).map(|k| binomial(12, k)).sum();
            let got = space.enumerate_configurations(max, None).unwrap().len();
            assert_eq!(got as u64, expected, "max_points={max}");
        }
    }

    #[test]
    fn enumeration_is_ordered_and_reproducible() {
        let mut space = GroundSpace::with_unit_weights(9).unwrap();
        space.add_region("left", 0b000_011_101).unwrap();
        let a = space.enumerate_configurations(4, Some("left")).unwrap();
        let b = space.enumerate_configurations(4, Some("left")).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            let key0 = (w[0].len(), w[0].mask());
            let key1 = (w[1].len(), w[1].mask());
            assert!(key0 < key1, "order violated: {key0:?} !< {key1:?}");
        }
        for cfg in &a {
            assert!(cfg.is_subset_of(Configuration(0b000_011_101)));
        }
    }

    #[test]
    fn unknown_region_is_an_error() {
        let space = GroundSpace::with_unit_weights(3).unwrap();
        let err = space.enumerate_configurations(1, Some("nowhere")).unwrap_err();
        assert!(matches!(err, Error::UnknownRegion(name) if name == "nowhere"));
    }

    #[test]
    fn region_mask_must_fit_the_space() {
        let mut space = GroundSpace::with_unit_weights(3).unwrap();
        let err = space.add_region("bad", 0b1000).unwrap_err();
        assert!(matches!(err, Error::RegionOutOfRange { site: 3, sites: 3 }));
    }

    #[test]
    fn sub_configurations_in_mask_order() {
        let ab = Configuration::from_sites(&[0, 1]);
        assert_eq!(
            ab.sub_configurations(1),
            vec![Configuration(0b01), Configuration(0b10)]
        );
        let big = Configuration::from_sites(&[0, 2, 3, 5, 7, 8, 9, 11]);
        for k in 0..=8 {
            let subs = big.sub_configurations(k);
            assert_eq!(subs.len() as u64, binomial(8, k));
            for w in subs.windows(2) {
                assert!(w[0].mask() < w[1].mask());
            }
            for s in subs {
                assert!(s.is_subset_of(big));
                assert_eq!(s.len(), k);
            }
        }
    }

    #[test]
    fn partitions3_counts_and_reassembly() {
        for pts in [vec![], vec![0], vec![0, 2], vec![0, 1, 4], vec![0, 0], vec![1, 1, 3]] {
            let eta = MultiConfiguration::from_points(&pts);
            let parts = partitions3(&eta);
            assert_eq!(parts.len(), 3usize.pow(pts.len() as u32));
            for [p1, p2, p3] in &parts {
                assert_eq!(p1.sum(p2).sum(p3), eta);
            }
        }
        // 8 labeled points: exactly 3^8 assignments.
        let eta = MultiConfiguration::from_points(&[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(partitions3(&eta).len(), 6561);
    }

    #[test]
    fn multiset_helpers() {
        let m = MultiConfiguration::from_points(&[2, 2, 5]);
        assert_eq!(m.total_points(), 3);
        assert!(!m.is_simple());
        assert_eq!(m.support(), Configuration::from_sites(&[2, 5]));
        assert_eq!(m.to_configuration(), None);
        let one_less = m.minus_one(2).unwrap();
        assert_eq!(one_less, MultiConfiguration::from_points(&[2, 5]));
        assert_eq!(m.minus_one(4), None);
        assert_eq!(m.sub_multisets().len(), 6); // (0..=2 copies of 2) x (0..=1 copies of 5)
        let simple = MultiConfiguration::from_points(&[1, 3]);
        assert_eq!(simple.to_configuration(), Some(Configuration::from_sites(&[1, 3])));
    }

    #[test]
    fn space_rejects_too_many_sites() {
        let err = GroundSpace::with_unit_weights(65).unwrap_err();
        assert!(matches!(err, Error::TooManySites { sites: 65, limit: 64 }));
    }
}
