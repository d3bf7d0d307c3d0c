//! Measures on finite configurations, correlation functions, and the
//! realizability checks relating them.
//!
//! A measure assigns a (possibly signed) mass to every subset of the ground
//! set; its correlation function sums the masses of all supersets. The two
//! determine each other by superset zeta/Moebius sweeps, and
//! [`reconstruct_process`] inverts a correlation function over a window and
//! reports whether the result is a genuine probability law.

use std::fmt;

use nalgebra::DMatrix;

use crate::algebra::RankedFunction;
use crate::error::Error;
use crate::ground::{enumerate_in_mask, Configuration};
use crate::numeric::{Scalar, Weight};
use crate::{Result, DENSE_SITE_LIMIT};

/// Signed measure on the `2^sites` simple configurations, stored densely and
/// indexed by bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteConfigMeasure<W> {
    sites: usize,
    entries: Vec<W>,
}

impl<W: Weight> FiniteConfigMeasure<W> {
    pub fn zero(sites: usize) -> Result<Self> {
        check_dense(sites)?;
        Ok(FiniteConfigMeasure {
            sites,
            entries: vec![W::zero(); 1 << sites],
        })
    }

    pub fn from_entries(sites: usize, entries: Vec<W>) -> Result<Self> {
        check_dense(sites)?;
        if entries.len() != 1 << sites {
            return Err(Error::NotPowerOfTwo(entries.len()));
        }
        Ok(FiniteConfigMeasure { sites, entries })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn value(&self, gamma: Configuration) -> W {
        self.entries[gamma.mask() as usize].clone()
    }

    pub fn set(&mut self, gamma: Configuration, value: W) {
        self.entries[gamma.mask() as usize] = value;
    }

    pub fn entries(&self) -> &[W] {
        &self.entries
    }

    /// Total mass over all configurations.
    pub fn total(&self) -> W {
        self.entries
            .iter()
            .fold(W::zero(), |acc, v| acc + v.clone())
    }

    pub fn max_abs(&self) -> W {
        self.entries
            .iter()
            .map(|v| v.abs())
            .fold(W::zero(), |acc, v| if v > acc { v } else { acc })
    }
}

/// Product measure with one intensity per site: a configuration's mass is
/// the product of the intensities of its points, the empty one has mass 1.
///
/// On a discrete ground set every point of a configuration is distinct, so
/// the usual ordering factor of the continuum construction cancels and the
/// plain product remains.
pub fn lebesgue_poisson<W: Weight>(intensity: &[W]) -> Result<FiniteConfigMeasure<W>> {
    let sites = intensity.len();
    check_dense(sites)?;
    let mut entries = vec![W::zero(); 1 << sites];
    entries[0] = W::one();
    for mask in 1..(1u64 << sites) {
        let low = mask.trailing_zeros() as usize;
        let rest = entries[(mask & (mask - 1)) as usize].clone();
        entries[mask as usize] = rest * intensity[low].clone();
    }
    Ok(FiniteConfigMeasure { sites, entries })
}

/// Correlation function: for each simple configuration the summed mass of
/// all configurations containing it. Dense, indexed by bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationFunction<W> {
    sites: usize,
    entries: Vec<W>,
}

impl<W: Weight> CorrelationFunction<W> {
    pub fn from_entries(sites: usize, entries: Vec<W>) -> Result<Self> {
        check_dense(sites)?;
        if entries.len() != 1 << sites {
            return Err(Error::NotPowerOfTwo(entries.len()));
        }
        Ok(CorrelationFunction { sites, entries })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn value(&self, eta: Configuration) -> W {
        self.entries[eta.mask() as usize].clone()
    }

    pub fn entries(&self) -> &[W] {
        &self.entries
    }

    pub fn max_abs(&self) -> W {
        self.entries
            .iter()
            .map(|v| v.abs())
            .fold(W::zero(), |acc, v| if v > acc { v } else { acc })
    }
}

/// `rho(eta) = sum of mu(gamma) over gamma containing eta`: a superset zeta
/// sweep over the measure's table.
pub fn correlation_measure<W: Weight>(mu: &FiniteConfigMeasure<W>) -> CorrelationFunction<W> {
    let mut entries = mu.entries.clone();
    superset_zeta(&mut entries);
    CorrelationFunction {
        sites: mu.sites,
        entries,
    }
}

fn superset_zeta<W: Weight>(a: &mut [W]) {
    let n = a.len();
    let mut bit = 1usize;
    while bit < n {
        for mask in 0..n {
            if mask & bit == 0 {
                a[mask] = a[mask].clone() + a[mask | bit].clone();
            }
        }
        bit <<= 1;
    }
}

fn superset_moebius<W: Weight>(a: &mut [W]) {
    let n = a.len();
    let mut bit = 1usize;
    while bit < n {
        for mask in 0..n {
            if mask & bit == 0 {
                a[mask] = a[mask].clone() - a[mask | bit].clone();
            }
        }
        bit <<= 1;
    }
}

/// Normalized, nonnegative law on the `2^sites` configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessLaw<W> {
    measure: FiniteConfigMeasure<W>,
}

impl<W: Weight> ProcessLaw<W> {
    /// Strict constructor: entries must be nonnegative up to `1e-12` in
    /// floating point (exactly in exact arithmetic) and sum to one up to the
    /// same slack. Tiny negatives are clamped, and only then is the table
    /// renormalized; an already-clean table is stored bit for bit.
    pub fn new(measure: FiniteConfigMeasure<W>) -> Result<Self> {
        let slack = if W::EXACT {
            W::zero()
        } else {
            W::from_ratio(1, 1_000_000_000_000)
        };
        Self::with_slack(measure, slack)
    }

    fn with_slack(mut measure: FiniteConfigMeasure<W>, slack: W) -> Result<Self> {
        let neg = W::zero() - slack.clone();
        let mut clamped = false;
        for (mask, v) in measure.entries.iter_mut().enumerate() {
            if *v < W::zero() {
                if *v < neg {
                    return Err(Error::InvalidLaw(format!(
                        "entry for configuration {mask:#b} is {}",
                        v.to_f64()
                    )));
                }
                *v = W::zero();
                clamped = true;
            }
        }
        let total = measure.total();
        let gap = (total.clone() - W::one()).abs();
        if gap > slack {
            return Err(Error::InvalidLaw(format!(
                "total mass is {}, not 1",
                total.to_f64()
            )));
        }
        if clamped && !(total == W::one()) {
            // Restore the unit sum disturbed by clamping; the slack bound
            // keeps this a perturbation far below any tolerance downstream.
            let entries = measure
                .entries
                .iter()
                .map(|v| W::div(v.clone(), total.clone()))
                .collect();
            measure = FiniteConfigMeasure {
                sites: measure.sites,
                entries,
            };
        }
        Ok(ProcessLaw { measure })
    }

    /// Independent occupation with probability `p` per site.
    pub fn bernoulli(sites: usize, p: W) -> Result<Self> {
        let q = W::one() - p.clone();
        if p < W::zero() || q < W::zero() {
            return Err(Error::InvalidLaw(format!(
                "occupation probability {} outside [0, 1]",
                p.to_f64()
            )));
        }
        let mut mu = FiniteConfigMeasure::zero(sites)?;
        for mask in 0..(1u64 << sites) {
            let k = mask.count_ones() as usize;
            let mut v = W::one();
            for _ in 0..k {
                v = v * p.clone();
            }
            for _ in 0..sites - k {
                v = v * q.clone();
            }
            mu.entries[mask as usize] = v;
        }
        Ok(ProcessLaw { measure: mu })
    }

    /// Point mass at one configuration.
    pub fn delta(sites: usize, gamma: Configuration) -> Result<Self> {
        let mut mu = FiniteConfigMeasure::zero(sites)?;
        mu.set(gamma, W::one());
        Ok(ProcessLaw { measure: mu })
    }

    pub fn sites(&self) -> usize {
        self.measure.sites
    }

    pub fn value(&self, gamma: Configuration) -> W {
        self.measure.value(gamma)
    }

    pub fn as_measure(&self) -> &FiniteConfigMeasure<W> {
        &self.measure
    }

    pub fn correlation(&self) -> CorrelationFunction<W> {
        correlation_measure(&self.measure)
    }

    /// Half the summed absolute difference of the two tables.
    pub fn total_variation(&self, other: &ProcessLaw<W>) -> f64 {
        assert_eq!(self.sites(), other.sites());
        let sum: f64 = self
            .measure
            .entries
            .iter()
            .zip(&other.measure.entries)
            .map(|(a, b)| (a.clone() - b.clone()).abs().to_f64())
            .sum();
        0.5 * sum
    }
}

/// Outcome of inverting a correlation function over a window.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<W> {
    Realizable,
    NotRealizable {
        witness: Configuration,
        value: W,
    },
}

impl<W> Verdict<W> {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Verdict::Realizable)
    }
}

impl<W: Weight> fmt::Display for Verdict<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Realizable => write!(f, "REALIZABLE"),
            Verdict::NotRealizable { witness, value } => write!(
                f,
                "NOT_REALIZABLE witness={:#b} value={}",
                witness.mask(),
                value.to_f64()
            ),
        }
    }
}

/// Signed inversion table plus the verdict and, when realizable, the law.
#[derive(Clone, Debug)]
pub struct Reconstruction<W> {
    pub window: Configuration,
    pub verdict: Verdict<W>,
    /// Signed masses `(gamma, value)` for every `gamma` inside the window,
    /// in (cardinality, mask) order, before any clamping.
    pub signed: Vec<(Configuration, W)>,
    pub law: Option<ProcessLaw<W>>,
}

/// Inverts `rho` on the sublattice of subsets of `window` by an alternating
/// superset sum. The signed result is the exact marginal candidate; it is a
/// law precisely when the correlation function is realizable on the window.
pub fn reconstruct_process<W: Weight>(
    rho: &CorrelationFunction<W>,
    window: Configuration,
) -> Result<Reconstruction<W>> {
    if window.mask() >> rho.sites != 0 {
        return Err(Error::RegionOutOfRange {
            site: 63 - window.mask().leading_zeros() as usize,
            sites: rho.sites,
        });
    }
    let window_sites: Vec<usize> = window.iter_sites().collect();
    let k = window_sites.len();
    // Compact the window bits into the low lattice, sweep there, expand back.
    let mut table: Vec<W> = (0..(1usize << k))
        .map(|sub| {
            let mut mask = 0u64;
            for (j, &site) in window_sites.iter().enumerate() {
                if sub >> j & 1 == 1 {
                    mask |= 1 << site;
                }
            }
            rho.entries[mask as usize].clone()
        })
        .collect();
    superset_moebius(&mut table);

    let scale = rho.max_abs();
    let tol = W::realizability_tol(&scale);
    let neg = W::zero() - tol.clone();
    let mut worst: Option<(usize, W)> = None;
    for (sub, v) in table.iter().enumerate() {
        if *v < neg {
            let beat = match &worst {
                Some((_, w)) => *v < *w,
                None => true,
            };
            if beat {
                worst = Some((sub, v.clone()));
            }
        }
    }
    let total = table
        .iter()
        .fold(W::zero(), |acc, v| acc + v.clone());
    if worst.is_none() && (total.clone() - W::one()).abs() > tol {
        // The signed table always sums to rho(empty); a bad sum with no
        // negative entry still rules out a probability law.
        worst = Some((0, total.clone()));
    }

    let expand = |sub: usize| {
        let mut mask = 0u64;
        for (j, &site) in window_sites.iter().enumerate() {
            if sub >> j & 1 == 1 {
                mask |= 1 << site;
            }
        }
        Configuration(mask)
    };
    let mut signed: Vec<(Configuration, W)> = (0..(1usize << k))
        .map(|sub| (expand(sub), table[sub].clone()))
        .collect();
    signed.sort_by_key(|(c, _)| (c.len(), c.mask()));

    match worst {
        Some((sub, value)) => Ok(Reconstruction {
            window,
            verdict: Verdict::NotRealizable {
                witness: expand(sub),
                value,
            },
            signed,
            law: None,
        }),
        None => {
            // Lay the compact table out on the full lattice so the law lives
            // on the same ground set as the input.
            let mut entries = vec![W::zero(); 1 << rho.sites];
            for (sub, v) in table.iter().enumerate() {
                entries[expand(sub).mask() as usize] = v.clone();
            }
            let mu = FiniteConfigMeasure {
                sites: rho.sites,
                entries,
            };
            let law = ProcessLaw::with_slack(mu, tol)?;
            Ok(Reconstruction {
                window,
                verdict: Verdict::Realizable,
                signed,
                law: Some(law),
            })
        }
    }
}

/// Normalization check: the empty-configuration correlation must be 1.
#[derive(Clone, Debug)]
pub struct NormalizationReport {
    pub value: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn check_a1(rho: &CorrelationFunction<f64>) -> NormalizationReport {
    let value = rho.entries[0];
    let deviation = (value - 1.0).abs();
    let tolerance = 1e-12;
    NormalizationReport {
        value,
        deviation,
        tolerance,
        passed: deviation <= tolerance,
    }
}

/// Growth check: the smallest constant `C` with
/// `sum of rho over the rank-n subsets of the window <= C^n` for all n >= 1.
#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub constant: f64,
    /// `rank_sums[n - 1]` is the summed correlation over rank-n subsets.
    pub rank_sums: Vec<f64>,
}

pub fn check_a2prime(rho: &CorrelationFunction<f64>, window: Configuration) -> GrowthReport {
    let k = window.len();
    let mut rank_sums = vec![0.0f64; k];
    let mut sub = window.mask();
    loop {
        let len = sub.count_ones() as usize;
        if len > 0 {
            rank_sums[len - 1] += rho.entries[sub as usize];
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & window.mask();
    }
    let constant = rank_sums
        .iter()
        .enumerate()
        .map(|(i, s)| s.max(0.0).powf(1.0 / (i + 1) as f64))
        .fold(0.0f64, f64::max);
    GrowthReport {
        constant,
        rank_sums,
    }
}

/// Positivity check: the Gram matrix of the correlation function over all
/// subsets of the window must have no eigenvalue below `-threshold`.
#[derive(Clone, Debug)]
pub struct PositivityReport {
    pub min_eigenvalue: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Eigenvector of the smallest eigenvalue, as coefficients over the
    /// window subsets in (cardinality, mask) order; a concrete certificate
    /// when the check fails.
    pub witness: Vec<f64>,
    pub basis: Vec<Configuration>,
}

pub const GRAM_SIZE_LIMIT: usize = 1 << 12;

pub fn check_a3(
    rho: &CorrelationFunction<f64>,
    window: Configuration,
    threshold: f64,
) -> Result<PositivityReport> {
    let basis = enumerate_in_mask(window.mask(), window.len());
    let dim = basis.len();
    if dim > GRAM_SIZE_LIMIT {
        return Err(Error::GramTooLarge {
            size: dim,
            limit: GRAM_SIZE_LIMIT,
        });
    }
    let gram = DMatrix::from_fn(dim, dim, |i, j| rho.value(basis[i].union(basis[j])));
    let eigen = gram.symmetric_eigen();
    let mut min_index = 0;
    for i in 1..dim {
        if eigen.eigenvalues[i] < eigen.eigenvalues[min_index] {
            min_index = i;
        }
    }
    let min_eigenvalue = eigen.eigenvalues[min_index];
    let witness = eigen.eigenvectors.column(min_index).iter().copied().collect();
    Ok(PositivityReport {
        min_eigenvalue,
        threshold,
        passed: min_eigenvalue >= -threshold,
        witness,
        basis,
    })
}

/// Density check over a cover of the window: inside every cover region the
/// summed rank-n correlation must stay below `(2 + epsilon)^(-n)`.
#[derive(Clone, Debug)]
pub struct DensityReport {
    pub epsilon: f64,
    pub passed: bool,
    /// Regions whose rank sums break the bound, with the offending rank.
    pub violations: Vec<(usize, usize, f64)>,
    /// Largest epsilon the given cover would satisfy (infinite when every
    /// rank sum vanishes).
    pub best_epsilon: f64,
    pub covered: bool,
}

pub fn check_a4(
    rho: &CorrelationFunction<f64>,
    window: Configuration,
    regions: &[Configuration],
    epsilon: f64,
) -> DensityReport {
    let mut union = Configuration::EMPTY;
    for r in regions {
        union = union.union(*r);
    }
    let covered = window.is_subset_of(union);
    let mut violations = Vec::new();
    let mut best = f64::INFINITY;
    for (i, region) in regions.iter().enumerate() {
        let sums = check_a2prime(rho, *region).rank_sums;
        for (n0, s) in sums.iter().enumerate() {
            let n = n0 + 1;
            if *s <= 0.0 {
                continue;
            }
            // s <= (2 + e)^(-n)  <=>  e <= s^(-1/n) - 2.
            best = best.min(s.powf(-1.0 / n as f64) - 2.0);
            if *s > (2.0 + epsilon).powi(-(n as i32)) {
                violations.push((i, n, *s));
            }
        }
    }
    DensityReport {
        epsilon,
        passed: covered && violations.is_empty(),
        violations,
        best_epsilon: best,
        covered,
    }
}

/// `sum over simple eta of G(eta) rho(eta)`; the observable side of the
/// duality between ranked functions and correlation functions.
pub fn pairing_integral<S: Scalar>(
    g: &RankedFunction<S>,
    rho: &CorrelationFunction<S::Real>,
) -> Result<S> {
    if g.sites() != rho.sites {
        return Err(Error::SpaceMismatch {
            left: g.sites(),
            right: rho.sites,
        });
    }
    let mut acc = S::zero();
    for (cfg, v) in g.simple_entries() {
        acc = acc + v.clone() * S::from_real(rho.value(cfg));
    }
    Ok(acc)
}

/// Both sides of the exponential-moment identity: the measure side pairs
/// `exp` of the additive statistic with the law, the correlation side pairs
/// the product function `prod(1 + (exp(phi) - 1))` with `rho`.
#[derive(Clone, Debug)]
pub struct LaplaceReport {
    pub measure_side: f64,
    pub correlation_side: f64,
    pub deviation: f64,
}

pub fn laplace_identity_check(law: &ProcessLaw<f64>, phi: &[f64]) -> Result<LaplaceReport> {
    if phi.len() != law.sites() {
        return Err(Error::SpaceMismatch {
            left: phi.len(),
            right: law.sites(),
        });
    }
    let rho = law.correlation();
    let mut measure_side = 0.0;
    let mut correlation_side = 0.0;
    for mask in 0..(1u64 << law.sites()) {
        let cfg = Configuration(mask);
        let additive: f64 = cfg.iter_sites().map(|x| phi[x]).sum();
        measure_side += additive.exp() * law.value(cfg);
        let product: f64 = cfg.iter_sites().map(|x| phi[x].exp_m1()).product();
        correlation_side += product * rho.value(cfg);
    }
    Ok(LaplaceReport {
        measure_side,
        correlation_side,
        deviation: (measure_side - correlation_side).abs(),
    })
}

fn check_dense(sites: usize) -> Result<()> {
    if sites > DENSE_SITE_LIMIT {
        return Err(Error::DenseLimit {
            op: "dense measure table",
            sites,
            limit: DENSE_SITE_LIMIT,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn random_law(rng: &mut ChaCha8Rng, sites: usize) -> ProcessLaw<f64> {
        let raw: Vec<f64> = (0..(1usize << sites)).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let entries = raw.into_iter().map(|v| v / total).collect();
        ProcessLaw::new(FiniteConfigMeasure::from_entries(sites, entries).unwrap()).unwrap()
    }

    #[test]
    fn product_measure_values() {
        let mu = lebesgue_poisson(&[rat(2, 1), rat(1, 1), rat(2, 3)]).unwrap();
        assert_eq!(mu.value(Configuration::EMPTY), rat(1, 1));
        assert_eq!(mu.value(Configuration::from_sites(&[0])), rat(2, 1));
        assert_eq!(mu.value(Configuration::from_sites(&[0, 2])), rat(4, 3));
        assert_eq!(mu.value(Configuration::from_sites(&[0, 1, 2])), rat(4, 3));
        assert_eq!(mu.total(), rat(1, 1) + rat(2, 1) + rat(1, 1) + rat(2, 3) + rat(2, 1) + rat(4, 3) + rat(2, 3) + rat(4, 3));
    }

    #[test]
    fn bernoulli_correlation_is_a_power() {
        let law = ProcessLaw::bernoulli(5, rat(3, 10)).unwrap();
        assert_eq!(law.as_measure().total(), rat(1, 1));
        let rho = law.correlation();
        for mask in 0..(1u64 << 5) {
            let k = mask.count_ones();
            let mut expect = rat(1, 1);
            for _ in 0..k {
                expect = expect * rat(3, 10);
            }
            assert_eq!(rho.value(Configuration(mask)), expect, "mask {mask:b}");
        }
    }

    #[test]
    fn delta_correlation_flags_subsets() {
        let gamma = Configuration::from_sites(&[0, 2, 3]);
        let law = ProcessLaw::<f64>::delta(4, gamma).unwrap();
        let rho = law.correlation();
        for mask in 0..(1u64 << 4) {
            let cfg = Configuration(mask);
            let expect = if cfg.is_subset_of(gamma) { 1.0 } else { 0.0 };
            assert_eq!(rho.value(cfg), expect);
        }
    }

    #[test]
    fn exact_roundtrip_on_the_full_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let sites = 6;
        let mut raw: Vec<BigRational> = (0..(1usize << sites))
            .map(|_| rat(rng.gen_range(0..40), 40))
            .collect();
        let total = raw.iter().fold(rat(0, 1), |a, v| a + v.clone());
        for v in &mut raw {
            *v = v.clone() / total.clone();
        }
        let law = ProcessLaw::new(FiniteConfigMeasure::from_entries(sites, raw).unwrap()).unwrap();
        let rho = law.correlation();
        let rec = reconstruct_process(&rho, Configuration((1u64 << sites) - 1)).unwrap();
        assert_eq!(rec.verdict, Verdict::Realizable);
        assert_eq!(rec.law.unwrap(), law);
    }

    #[test]
    fn float_roundtrip_stays_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let sites = rng.gen_range(1..=8);
            let law = random_law(&mut rng, sites);
            let rec =
                reconstruct_process(&law.correlation(), Configuration((1u64 << sites) - 1))
                    .unwrap();
            assert!(rec.verdict.is_realizable());
            let tv = rec.law.unwrap().total_variation(&law);
            assert!(tv <= 1e-12, "sites {sites}: tv {tv}");
        }
    }

    #[test]
    fn window_reconstruction_is_the_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let law = random_law(&mut rng, 4);
        let window = Configuration::from_sites(&[0, 2]);
        let rec = reconstruct_process(&law.correlation(), window).unwrap();
        assert!(rec.verdict.is_realizable());
        let marginal = rec.law.unwrap();
        for sub in [0u64, 0b1, 0b100, 0b101] {
            let mut expect = 0.0;
            for mask in 0..(1u64 << 4) {
                if mask & window.mask() == sub {
                    expect += law.value(Configuration(mask));
                }
            }
            let got = marginal.value(Configuration(sub));
            assert!((got - expect).abs() <= 1e-14, "sub {sub:b}");
        }
    }

    #[test]
    fn inconsistent_correlation_is_rejected_with_a_witness() {
        // Pair correlation too heavy for the one-point functions.
        let entries = vec![1.0, 0.3, 0.3, 0.9];
        let rho = CorrelationFunction::from_entries(2, entries).unwrap();
        let rec = reconstruct_process(&rho, Configuration(0b11)).unwrap();
        match rec.verdict {
            Verdict::NotRealizable { witness, value } => {
                assert!(witness == Configuration(0b01) || witness == Configuration(0b10));
                assert!((value - (-0.6)).abs() <= 1e-12);
            }
            Verdict::Realizable => panic!("expected a rejection"),
        }
        assert!(rec.law.is_none());
    }

    #[test]
    fn law_validation_rejects_bad_tables() {
        let mu = FiniteConfigMeasure::from_entries(1, vec![0.7, 0.2]).unwrap();
        assert!(matches!(ProcessLaw::new(mu), Err(Error::InvalidLaw(_))));
        let mu = FiniteConfigMeasure::from_entries(1, vec![1.1, -0.1]).unwrap();
        assert!(matches!(ProcessLaw::new(mu), Err(Error::InvalidLaw(_))));
        // A parts-per-1e13 negative is clamped, not rejected.
        let mu = FiniteConfigMeasure::from_entries(1, vec![1.0, -1e-13]).unwrap();
        let law = ProcessLaw::new(mu).unwrap();
        assert_eq!(law.value(Configuration(0b1)), 0.0);
        assert_eq!(law.value(Configuration(0b0)), 1.0);
    }

    #[test]
    fn normalization_check() {
        let law = ProcessLaw::bernoulli(3, 0.4).unwrap();
        let report = check_a1(&law.correlation());
        assert!(report.passed);
        assert_eq!(report.value, 1.0);
        let rho = CorrelationFunction::from_entries(1, vec![1.0 + 1e-6, 0.5]).unwrap();
        assert!(!check_a1(&rho).passed);
    }

    #[test]
    fn growth_constant_matches_the_binomial_closed_form() {
        let n = 7usize;
        let p = 0.3f64;
        let law = ProcessLaw::bernoulli(n, p).unwrap();
        let report = check_a2prime(&law.correlation(), Configuration((1 << n) - 1));
        let expect = (1..=n)
            .map(|k| (crate::ground::binomial(n, k) as f64).powf(1.0 / k as f64) * p)
            .fold(0.0f64, f64::max);
        assert!((report.constant - expect).abs() <= 1e-12);
        assert_eq!(report.rank_sums.len(), n);
        assert!((report.rank_sums[0] - n as f64 * p).abs() <= 1e-12);
    }

    #[test]
    fn positivity_check_separates_good_from_bad() {
        let law = ProcessLaw::bernoulli(4, 0.35).unwrap();
        let report = check_a3(&law.correlation(), Configuration(0b1111), 1e-9).unwrap();
        assert!(report.passed, "min eigenvalue {}", report.min_eigenvalue);
        assert!(report.min_eigenvalue > 0.0);
        assert_eq!(report.basis.len(), 16);

        let rho = CorrelationFunction::from_entries(2, vec![1.0, 0.3, 0.3, 0.9]).unwrap();
        let report = check_a3(&rho, Configuration(0b11), 1e-9).unwrap();
        assert!(!report.passed);
        assert!(report.min_eigenvalue < -1e-3);
        let norm: f64 = report.witness.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn density_check_on_singleton_cover() {
        let n = 6;
        let p = 0.3f64;
        let law = ProcessLaw::bernoulli(n, p).unwrap();
        let rho = law.correlation();
        let window = Configuration((1 << n) - 1);
        let regions: Vec<Configuration> =
            (0..n).map(|i| Configuration(1 << i)).collect();
        // p = 0.3 <= (2 + 0.5)^-1 = 0.4.
        let report = check_a4(&rho, window, &regions, 0.5);
        assert!(report.passed);
        assert!((report.best_epsilon - (1.0 / p - 2.0)).abs() <= 1e-12);
        // (2 + 2)^-1 = 0.25 < 0.3: same cover fails for a larger epsilon.
        let report = check_a4(&rho, window, &regions, 2.0);
        assert!(!report.passed);
        assert_eq!(report.violations.len(), n);
        // Dropping a region breaks the cover even if bounds hold.
        let report = check_a4(&rho, window, &regions[1..], 0.5);
        assert!(!report.covered && !report.passed);
    }

    #[test]
    fn pairing_integral_reads_off_correlations() {
        let law = ProcessLaw::bernoulli(3, 0.25).unwrap();
        let rho = law.correlation();
        let alpha = Configuration::from_sites(&[0, 2]);
        let g = RankedFunction::<num::complex::Complex64>::indicator(3, alpha);
        let got = pairing_integral(&g, &rho).unwrap();
        assert!((got.re - 0.0625).abs() <= 1e-15 && got.im == 0.0);
    }

    #[test]
    fn exponential_moment_identity() {
        // Closed form for the independent law with a constant statistic.
        let n = 5;
        let p = 0.3f64;
        let c = 0.7f64;
        let law = ProcessLaw::bernoulli(n, p).unwrap();
        let report = laplace_identity_check(&law, &[c; 5]).unwrap();
        let closed = (1.0 - p + p * c.exp()).powi(n as i32);
        assert!((report.measure_side - closed).abs() <= 1e-12);
        assert!(report.deviation <= 1e-12);

        // And for arbitrary laws and statistics.
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let sites = rng.gen_range(1..=7);
            let law = random_law(&mut rng, sites);
            let phi: Vec<f64> = (0..sites).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let report = laplace_identity_check(&law, &phi).unwrap();
            assert!(report.deviation <= 1e-12, "deviation {}", report.deviation);
        }
    }

    #[test]
    fn empty_ground_set_degenerates_cleanly() {
        let law = ProcessLaw::bernoulli(0, 0.5f64).unwrap();
        let rho = law.correlation();
        assert_eq!(rho.value(Configuration::EMPTY), 1.0);
        let rec = reconstruct_process(&rho, Configuration::EMPTY).unwrap();
        assert!(rec.verdict.is_realizable());
    }
}
