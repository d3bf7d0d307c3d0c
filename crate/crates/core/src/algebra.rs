//! Ranked quasi-observables and the star convolution.
//!
//! A ranked function assigns a scalar to every configuration up to a finite
//! rank. The star product of two ranked functions sums, for every labeled
//! three-part splitting `(p1, p2, p3)` of the argument, the product
//! `G1(p1 + p2) * G2(p2 + p3)`. On simple configurations the splittings of
//! `eta` biject with pairs `(A, B)` of subsets satisfying `A v B = eta` via
//! `A = p1 + p2`, `B = p2 + p3`, which is what the support-pair loop below
//! exploits; the multiset path enumerates labeled splittings directly.
//!
//! Multiset tables exist for validation: the algebraic laws hold on the full
//! multiset domain and the exact-arithmetic tests exercise them there. The
//! fast transform path is restricted to simple configurations, which is the
//! domain correlation measures live on.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Error;
use crate::ground::{partitions3, Configuration, MultiConfiguration};
use crate::numeric::Scalar;
use crate::transforms;
use crate::{Result, DENSE_SITE_LIMIT};

/// Scratch buffers for the naive product stay dense up to this many sites.
const NAIVE_DENSE_SCRATCH_LIMIT: usize = 24;

/// Function of a single site, the rank-one building block.
#[derive(Clone, Debug, PartialEq)]
pub struct OneParticleFunction<S> {
    values: Vec<S>,
}

impl<S: Scalar> OneParticleFunction<S> {
    pub fn new(values: Vec<S>) -> Self {
        OneParticleFunction { values }
    }

    pub fn zero(sites: usize) -> Self {
        OneParticleFunction {
            values: vec![S::zero(); sites],
        }
    }

    pub fn sites(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, site: usize) -> S {
        self.values[site].clone()
    }

    pub fn set(&mut self, site: usize, v: S) {
        self.values[site] = v;
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Sum of values over the sites of a configuration.
    pub fn sum_over(&self, cfg: Configuration) -> S {
        cfg.iter_sites()
            .fold(S::zero(), |acc, s| acc + self.value(s))
    }

    /// Embed as a ranked function: rank one carries the site values, rank
    /// zero is zero.
    pub fn lift(&self) -> RankedFunction<S> {
        let mut g = RankedFunction::zero(self.sites(), 1.min(self.sites()));
        if self.sites() == 0 {
            return g;
        }
        for (site, v) in self.values.iter().enumerate() {
            if !v.is_zero() {
                g.set(Configuration::from_sites(&[site]), v.clone());
            }
        }
        g
    }
}

/// Scalar-valued function on configurations up to a maximal rank.
///
/// Absent entries are zero. `multi` is the optional multiset extension: when
/// present, the function is understood on multiconfigurations, with strictly
/// repeated configurations stored there and simple ones in the rank tables.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedFunction<S> {
    sites: usize,
    max_rank: usize,
    ranks: Vec<BTreeMap<u64, S>>,
    multi: Option<BTreeMap<MultiConfiguration, S>>,
}

impl<S: Scalar> RankedFunction<S> {
    pub fn zero(sites: usize, max_rank: usize) -> Self {
        RankedFunction {
            sites,
            max_rank,
            ranks: vec![BTreeMap::new(); max_rank + 1],
            multi: None,
        }
    }

    /// The unit of the star algebra: one at the empty configuration.
    pub fn vacuum(sites: usize) -> Self {
        let mut g = RankedFunction::zero(sites, 0);
        g.set(Configuration::EMPTY, S::one());
        g
    }

    /// Indicator of a single configuration.
    pub fn indicator(sites: usize, cfg: Configuration) -> Self {
        let mut g = RankedFunction::zero(sites, cfg.len());
        g.set(cfg, S::one());
        g
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn max_rank(&self) -> usize {
        self.max_rank
    }

    /// Switch on the multiset extension (idempotent).
    pub fn into_multiset_mode(mut self) -> Self {
        if self.multi.is_none() {
            self.multi = Some(BTreeMap::new());
        }
        self
    }

    pub fn has_multiset_tables(&self) -> bool {
        self.multi.is_some()
    }

    pub fn value(&self, cfg: Configuration) -> S {
        let rank = cfg.len();
        if rank > self.max_rank {
            return S::zero();
        }
        self.ranks[rank]
            .get(&cfg.mask())
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn set(&mut self, cfg: Configuration, v: S) {
        let rank = cfg.len();
        assert!(
            rank <= self.max_rank,
            "rank {rank} exceeds max_rank {}",
            self.max_rank
        );
        self.ranks[rank].insert(cfg.mask(), v);
    }

    /// Value on a multiconfiguration; simple arguments read the rank tables.
    pub fn value_multi(&self, m: &MultiConfiguration) -> S {
        match m.to_configuration() {
            Some(cfg) => self.value(cfg),
            None => match &self.multi {
                Some(table) => table.get(m).cloned().unwrap_or_else(S::zero),
                None => S::zero(),
            },
        }
    }

    /// Store a value at a multiconfiguration, routing simple ones to the
    /// rank tables and enabling multiset mode otherwise.
    pub fn set_multi(&mut self, m: MultiConfiguration, v: S) {
        match m.to_configuration() {
            Some(cfg) => self.set(cfg, v),
            None => {
                assert!(
                    m.total_points() <= self.max_rank,
                    "rank {} exceeds max_rank {}",
                    m.total_points(),
                    self.max_rank
                );
                self.multi.get_or_insert_with(BTreeMap::new).insert(m, v);
            }
        }
    }

    /// Simple entries in (rank, mask) order.
    pub fn simple_entries(&self) -> impl Iterator<Item = (Configuration, &S)> {
        self.ranks
            .iter()
            .flat_map(|table| table.iter().map(|(&m, v)| (Configuration(m), v)))
    }

    pub fn multi_entries(&self) -> impl Iterator<Item = (&MultiConfiguration, &S)> {
        self.multi.iter().flat_map(|t| t.iter())
    }

    /// Support as multiconfigurations, simple entries included.
    fn support_multisets(&self) -> Vec<MultiConfiguration> {
        let mut out: Vec<MultiConfiguration> = self
            .simple_entries()
            .map(|(cfg, _)| MultiConfiguration::from_configuration(cfg))
            .collect();
        out.extend(self.multi_entries().map(|(m, _)| m.clone()));
        out
    }

    /// Dense table over all `2^sites` masks.
    pub fn to_dense(&self) -> Result<Vec<S>> {
        if self.sites > DENSE_SITE_LIMIT {
            return Err(Error::DenseLimit {
                op: "dense table",
                sites: self.sites,
                limit: DENSE_SITE_LIMIT,
            });
        }
        let mut out = vec![S::zero(); 1usize << self.sites];
        for (cfg, v) in self.simple_entries() {
            out[cfg.mask() as usize] = v.clone();
        }
        Ok(out)
    }

    /// Rebuild from a dense table, dropping exact zeros.
    pub fn from_dense(sites: usize, values: &[S]) -> Result<Self> {
        if values.len() != 1usize << sites {
            return Err(Error::NotPowerOfTwo(values.len()));
        }
        let mut g = RankedFunction::zero(sites, sites);
        for (mask, v) in values.iter().enumerate() {
            if !v.is_zero() {
                g.set(Configuration(mask as u64), v.clone());
            }
        }
        Ok(g)
    }

    /// Largest absolute difference against `other`, over the union of both
    /// supports (simple and multiset entries).
    pub fn max_abs_diff(&self, other: &RankedFunction<S>) -> f64 {
        let mut worst: f64 = 0.0;
        let mut masks: BTreeSet<u64> = self.simple_entries().map(|(c, _)| c.mask()).collect();
        masks.extend(other.simple_entries().map(|(c, _)| c.mask()));
        for mask in masks {
            let d = self.value(Configuration(mask)) - other.value(Configuration(mask));
            worst = worst.max(d.modulus());
        }
        let mut multis: BTreeSet<MultiConfiguration> =
            self.multi_entries().map(|(m, _)| m.clone()).collect();
        multis.extend(other.multi_entries().map(|(m, _)| m.clone()));
        for m in multis {
            let d = self.value_multi(&m) - other.value_multi(&m);
            worst = worst.max(d.modulus());
        }
        worst
    }

    /// Exact equality as functions (both simple and multiset entries).
    pub fn fn_eq(&self, other: &RankedFunction<S>) -> bool {
        let mut masks: BTreeSet<u64> = self.simple_entries().map(|(c, _)| c.mask()).collect();
        masks.extend(other.simple_entries().map(|(c, _)| c.mask()));
        for mask in masks {
            if self.value(Configuration(mask)) != other.value(Configuration(mask)) {
                return false;
            }
        }
        let mut multis: BTreeSet<MultiConfiguration> =
            self.multi_entries().map(|(m, _)| m.clone()).collect();
        multis.extend(other.multi_entries().map(|(m, _)| m.clone()));
        multis
            .into_iter()
            .all(|m| self.value_multi(&m) == other.value_multi(&m))
    }
}

fn check_spaces<S: Scalar>(a: &RankedFunction<S>, b: &RankedFunction<S>) -> Result<()> {
    if a.sites != b.sites {
        return Err(Error::SpaceMismatch {
            left: a.sites,
            right: b.sites,
        });
    }
    Ok(())
}

/// Pointwise sum.
pub fn add<S: Scalar>(a: &RankedFunction<S>, b: &RankedFunction<S>) -> Result<RankedFunction<S>> {
    check_spaces(a, b)?;
    let mut out = RankedFunction::zero(a.sites, a.max_rank.max(b.max_rank));
    if a.multi.is_some() || b.multi.is_some() {
        out = out.into_multiset_mode();
    }
    for g in [a, b] {
        for (cfg, v) in g.simple_entries() {
            let cur = out.value(cfg);
            out.set(cfg, cur + v.clone());
        }
        for (m, v) in g.multi_entries() {
            let cur = out.value_multi(m);
            out.set_multi(m.clone(), cur + v.clone());
        }
    }
    Ok(out)
}

/// Scalar multiple.
pub fn scale<S: Scalar>(c: S, g: &RankedFunction<S>) -> RankedFunction<S> {
    let mut out = RankedFunction::zero(g.sites, g.max_rank);
    if g.multi.is_some() {
        out = out.into_multiset_mode();
    }
    for (cfg, v) in g.simple_entries() {
        out.set(cfg, c.clone() * v.clone());
    }
    for (m, v) in g.multi_entries() {
        out.set_multi(m.clone(), c.clone() * v.clone());
    }
    out
}

/// Complex conjugate, entrywise.
pub fn conjugate<S: Scalar>(g: &RankedFunction<S>) -> RankedFunction<S> {
    let mut out = RankedFunction::zero(g.sites, g.max_rank);
    if g.multi.is_some() {
        out = out.into_multiset_mode();
    }
    for (cfg, v) in g.simple_entries() {
        out.set(cfg, v.conj());
    }
    for (m, v) in g.multi_entries() {
        out.set_multi(m.clone(), v.conj());
    }
    out
}

/// Star product by direct enumeration.
///
/// Simple inputs take the support-pair loop; if either factor carries
/// multiset tables the labeled-splitting sum is evaluated on every reachable
/// multiconfiguration. Quadratic in the support sizes; serves as the oracle
/// for [`star_fast`].
pub fn star_naive<S: Scalar>(
    a: &RankedFunction<S>,
    b: &RankedFunction<S>,
) -> Result<RankedFunction<S>> {
    check_spaces(a, b)?;
    if a.multi.is_some() || b.multi.is_some() {
        return Ok(star_naive_multiset(a, b));
    }
    let max_rank = (a.max_rank + b.max_rank).min(a.sites);
    let mut out = RankedFunction::zero(a.sites, max_rank);
    let a_entries: Vec<(u64, &S)> = a.simple_entries().map(|(c, v)| (c.mask(), v)).collect();
    let b_entries: Vec<(u64, &S)> = b.simple_entries().map(|(c, v)| (c.mask(), v)).collect();
    if a.sites <= NAIVE_DENSE_SCRATCH_LIMIT {
        let mut dense = vec![S::zero(); 1usize << a.sites];
        for (ma, va) in &a_entries {
            for (mb, vb) in &b_entries {
                let slot = &mut dense[(ma | mb) as usize];
                *slot = slot.clone() + (*va).clone() * (*vb).clone();
            }
        }
        for (mask, v) in dense.into_iter().enumerate() {
            if !v.is_zero() {
                out.set(Configuration(mask as u64), v);
            }
        }
    } else {
        let mut acc: BTreeMap<u64, S> = BTreeMap::new();
        for (ma, va) in &a_entries {
            for (mb, vb) in &b_entries {
                let entry = acc.entry(ma | mb).or_insert_with(S::zero);
                *entry = entry.clone() + (*va).clone() * (*vb).clone();
            }
        }
        for (mask, v) in acc {
            if !v.is_zero() {
                out.set(Configuration(mask), v);
            }
        }
    }
    Ok(out)
}

fn star_naive_multiset<S: Scalar>(
    a: &RankedFunction<S>,
    b: &RankedFunction<S>,
) -> RankedFunction<S> {
    let max_rank = a.max_rank + b.max_rank;
    let mut out = RankedFunction::zero(a.sites, max_rank).into_multiset_mode();
    // Any configuration with a nonzero splitting is A + B - D for supported
    // A, B and an overlap D below both; everything else is zero.
    let mut candidates: BTreeSet<MultiConfiguration> = BTreeSet::new();
    let supp_a = a.support_multisets();
    let supp_b = b.support_multisets();
    for ca in &supp_a {
        for cb in &supp_b {
            let cap = ca.min_with(cb);
            for d in cap.sub_multisets() {
                candidates.insert(ca.sum(cb).minus(&d));
            }
        }
    }
    for eta in candidates {
        let mut acc = S::zero();
        for [p1, p2, p3] in partitions3(&eta) {
            let left = a.value_multi(&p1.sum(&p2));
            if left.is_zero() {
                continue;
            }
            let right = b.value_multi(&p2.sum(&p3));
            acc = acc + left * right;
        }
        if !acc.is_zero() {
            out.set_multi(eta, acc);
        }
    }
    out
}

/// Star product through the subset lattice: transform both factors, multiply
/// pointwise, invert. `O(2^n * n)` against the naive `O(4^n)`.
pub fn star_fast<S: Scalar>(
    a: &RankedFunction<S>,
    b: &RankedFunction<S>,
) -> Result<RankedFunction<S>> {
    check_spaces(a, b)?;
    if a.multi.is_some() || b.multi.is_some() {
        return Err(Error::MultisetUnsupported("star_fast"));
    }
    if a.sites > DENSE_SITE_LIMIT {
        return Err(Error::DenseLimit {
            op: "star_fast",
            sites: a.sites,
            limit: DENSE_SITE_LIMIT,
        });
    }
    let mut da = a.to_dense()?;
    let mut db = b.to_dense()?;
    transforms::zeta_kernel(&mut da)?;
    transforms::zeta_kernel(&mut db)?;
    for (x, y) in da.iter_mut().zip(db) {
        *x = x.clone() * y;
    }
    transforms::moebius_kernel(&mut da)?;
    let mut out = RankedFunction::from_dense(a.sites, &da)?;
    out.max_rank = (a.max_rank + b.max_rank).min(a.sites);
    out.ranks.truncate(out.max_rank + 1);
    Ok(out)
}

/// Star product with a lifted one-particle function, rank by rank.
///
/// A rank-`n` table contributes `f(x) * R(eta - x)` summed over the points of
/// the rank-`n+1` argument, plus the same-rank term `(sum of f over eta) *
/// R(eta)`. Equals `star_naive(r, f.lift())` entry for entry.
pub fn star_single<S: Scalar>(
    r: &RankedFunction<S>,
    f: &OneParticleFunction<S>,
) -> Result<RankedFunction<S>> {
    if r.sites != f.sites() {
        return Err(Error::SpaceMismatch {
            left: r.sites,
            right: f.sites(),
        });
    }
    let max_rank = (r.max_rank + 1).min(if r.multi.is_some() {
        r.max_rank + 1
    } else {
        r.sites
    });
    let mut out = RankedFunction::zero(r.sites, max_rank);
    if r.multi.is_some() {
        out = out.into_multiset_mode();
    }
    for (cfg, v) in r.simple_entries() {
        // Same rank: multiply by the sum of f over the occupied sites.
        let neutral = f.sum_over(cfg) * v.clone();
        if !neutral.is_zero() {
            let cur = out.value(cfg);
            out.set(cfg, cur + neutral);
        }
        for site in 0..r.sites {
            let fv = f.value(site);
            if fv.is_zero() {
                continue;
            }
            if cfg.contains(site) {
                if r.multi.is_some() {
                    // Doubling an occupied site leaves the simple lattice.
                    let mut m = MultiConfiguration::from_configuration(cfg);
                    m.push(site);
                    let coeff = S::from_int(2);
                    let cur = out.value_multi(&m);
                    out.set_multi(m, cur + coeff * fv * v.clone());
                }
            } else {
                let up = cfg.insert(site);
                let cur = out.value(up);
                out.set(up, cur + fv * v.clone());
            }
        }
    }
    for (m, v) in r.multi_entries() {
        let mut neutral_sum = S::zero();
        for (site, mult) in m.iter_counts() {
            neutral_sum = neutral_sum + S::from_int(mult as i64) * f.value(site);
        }
        let neutral = neutral_sum * v.clone();
        if !neutral.is_zero() {
            let cur = out.value_multi(m);
            out.set_multi(m.clone(), cur + neutral);
        }
        for site in 0..r.sites {
            let fv = f.value(site);
            if fv.is_zero() {
                continue;
            }
            let mut up = m.clone();
            up.push(site);
            let coeff = S::from_int(up.multiplicity(site) as i64);
            let cur = out.value_multi(&up);
            out.set_multi(up, cur + coeff * fv * v.clone());
        }
    }
    Ok(out)
}
