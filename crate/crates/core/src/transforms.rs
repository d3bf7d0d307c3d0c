//! Subset-lattice transforms.
//!
//! `k_transform` turns a ranked function into its cumulative observable,
//! summing over all sub-configurations; `r_transform` is its inverse,
//! the signed sum over subsets. Both reduce to in-place Yates sweeps over a
//! dense table of length `2^n`, one bit per pass, `O(2^n * n)` total. The
//! sweeps are the workhorse behind [`crate::algebra::star_fast`]: the star
//! product becomes a pointwise product after the forward sweep.

use crate::algebra::{OneParticleFunction, RankedFunction};
use crate::error::Error;
use crate::ground::Configuration;
use crate::numeric::Scalar;
use crate::{Result, DENSE_SITE_LIMIT};

/// Function on the full configuration lattice, stored densely by mask.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableFunction<S> {
    sites: usize,
    values: Vec<S>,
}

impl<S: Scalar> ObservableFunction<S> {
    pub fn new(sites: usize, values: Vec<S>) -> Result<Self> {
        if sites > DENSE_SITE_LIMIT {
            return Err(Error::DenseLimit {
                op: "observable table",
                sites,
                limit: DENSE_SITE_LIMIT,
            });
        }
        if values.len() != 1usize << sites {
            return Err(Error::NotPowerOfTwo(values.len()));
        }
        Ok(ObservableFunction { sites, values })
    }

    pub fn constant(sites: usize, v: S) -> Result<Self> {
        let len = 1usize
            .checked_shl(sites as u32)
            .filter(|_| sites <= DENSE_SITE_LIMIT)
            .ok_or(Error::DenseLimit {
                op: "observable table",
                sites,
                limit: DENSE_SITE_LIMIT,
            })?;
        ObservableFunction::new(sites, vec![v; len])
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn value(&self, cfg: Configuration) -> S {
        self.values[cfg.mask() as usize].clone()
    }

    pub fn set(&mut self, cfg: Configuration, v: S) {
        self.values[cfg.mask() as usize] = v;
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn max_abs_diff(&self, other: &ObservableFunction<S>) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.clone() - b.clone()).modulus())
            .fold(0.0, f64::max)
    }
}

/// Pointwise product of two observables on the same space.
pub fn pointwise_product<S: Scalar>(
    a: &ObservableFunction<S>,
    b: &ObservableFunction<S>,
) -> Result<ObservableFunction<S>> {
    if a.sites != b.sites {
        return Err(Error::SpaceMismatch {
            left: a.sites,
            right: b.sites,
        });
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x.clone() * y.clone())
        .collect();
    ObservableFunction::new(a.sites, values)
}

/// In-place forward sweep: `out[mask] = sum over submasks of the input`.
pub fn zeta_kernel<S: Scalar>(table: &mut [S]) -> Result<()> {
    let n = check_pow2(table.len())?;
    for bit in 0..n {
        let step = 1usize << bit;
        for mask in 0..table.len() {
            if mask & step != 0 {
                table[mask] = table[mask].clone() + table[mask ^ step].clone();
            }
        }
    }
    Ok(())
}

/// In-place inverse sweep: signed sum over submasks, undoing [`zeta_kernel`].
pub fn moebius_kernel<S: Scalar>(table: &mut [S]) -> Result<()> {
    let n = check_pow2(table.len())?;
    for bit in 0..n {
        let step = 1usize << bit;
        for mask in 0..table.len() {
            if mask & step != 0 {
                table[mask] = table[mask].clone() - table[mask ^ step].clone();
            }
        }
    }
    Ok(())
}

fn check_pow2(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Cumulative observable of a ranked function.
pub fn k_transform<S: Scalar>(g: &RankedFunction<S>) -> Result<ObservableFunction<S>> {
    if g.has_multiset_tables() {
        return Err(Error::MultisetUnsupported("k_transform"));
    }
    let mut table = g.to_dense()?;
    zeta_kernel(&mut table)?;
    ObservableFunction::new(g.sites(), table)
}

/// Inverse transform: ranked coefficients of an observable.
pub fn r_transform<S: Scalar>(f: &ObservableFunction<S>) -> Result<RankedFunction<S>> {
    let mut table = f.values.clone();
    moebius_kernel(&mut table)?;
    RankedFunction::from_dense(f.sites, &table)
}

/// Product vector `e(phi, eta) = prod of phi over the sites of eta`.
///
/// Defined on every configuration, so the table is dense and `max_rank`
/// equals the site count.
pub fn exp_vector<S: Scalar>(phi: &OneParticleFunction<S>) -> Result<RankedFunction<S>> {
    let sites = phi.sites();
    if sites > DENSE_SITE_LIMIT {
        return Err(Error::DenseLimit {
            op: "exp_vector",
            sites,
            limit: DENSE_SITE_LIMIT,
        });
    }
    let mut table = vec![S::zero(); 1usize << sites];
    table[0] = S::one();
    for mask in 1..table.len() {
        let low = mask.trailing_zeros() as usize;
        table[mask] = table[mask & (mask - 1)].clone() * phi.value(low);
    }
    RankedFunction::from_dense(sites, &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{star_fast, star_naive};
    use crate::numeric::RatComplex;
    use num::complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Quadratic reference: explicit double loop over (mask, submask).
    fn naive_zeta<S: Scalar>(table: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); table.len()];
        for (mask, slot) in out.iter_mut().enumerate() {
            for (sub, v) in table.iter().enumerate() {
                if sub & !mask == 0 {
                    *slot = slot.clone() + v.clone();
                }
            }
        }
        out
    }

    /// Quadratic reference with alternating signs by dropped-bit parity.
    fn naive_moebius<S: Scalar>(table: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); table.len()];
        for (mask, slot) in out.iter_mut().enumerate() {
            for (sub, v) in table.iter().enumerate() {
                if sub & !mask == 0 {
                    let dropped = (mask ^ sub).count_ones();
                    let signed = if dropped % 2 == 0 {
                        v.clone()
                    } else {
                        -v.clone()
                    };
                    *slot = slot.clone() + signed;
                }
            }
        }
        out
    }

    #[test]
    fn zeta_unit_vectors() {
        let mut t = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        zeta_kernel(&mut t).unwrap();
        assert_eq!(t, vec![c(1.0, 0.0); 4]);

        let mut t = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        zeta_kernel(&mut t).unwrap();
        assert_eq!(
            t,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]
        );
    }

    #[test]
    fn kernels_match_naive_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for sites in 0..=8usize {
            let len = 1usize << sites;
            let table: Vec<Complex64> = (0..len)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut fast = table.clone();
            zeta_kernel(&mut fast).unwrap();
            let slow = naive_zeta(&table);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() <= 1e-12);
            }
            let mut inv = table.clone();
            moebius_kernel(&mut inv).unwrap();
            let slow_inv = naive_moebius(&table);
            for (a, b) in inv.iter().zip(&slow_inv) {
                assert!((a - b).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn kernels_invert_each_other_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for sites in 0..=6usize {
            let len = 1usize << sites;
            let table: Vec<RatComplex> = (0..len)
                .map(|_| {
                    RatComplex::from_ratios(
                        (rng.gen_range(-9..=9), rng.gen_range(1..=9)),
                        (rng.gen_range(-9..=9), rng.gen_range(1..=9)),
                    )
                })
                .collect();
            let mut round = table.clone();
            zeta_kernel(&mut round).unwrap();
            moebius_kernel(&mut round).unwrap();
            assert_eq!(round, table);
            let mut round = table.clone();
            moebius_kernel(&mut round).unwrap();
            zeta_kernel(&mut round).unwrap();
            assert_eq!(round, table);
        }
    }

    #[test]
    fn kernel_length_must_be_power_of_two() {
        let mut t = vec![c(0.0, 0.0); 3];
        assert!(matches!(
            zeta_kernel(&mut t),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn k_of_vacuum_is_constant_one() {
        let kv = k_transform(&RankedFunction::<Complex64>::vacuum(5)).unwrap();
        assert!(kv.values().iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn k_of_lift_counts_weighted_points() {
        let phi = OneParticleFunction::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]);
        let k = k_transform(&phi.lift()).unwrap();
        for mask in 0u64..8 {
            let cfg = Configuration(mask);
            let expect: f64 = cfg.iter_sites().map(|s| [1.0, 2.0, 4.0][s]).sum();
            assert_eq!(k.value(cfg), c(expect, 0.0));
        }
    }

    #[test]
    fn k_of_indicator_flags_supersets() {
        let alpha = Configuration::from_sites(&[0, 2]);
        let k = k_transform(&RankedFunction::<Complex64>::indicator(3, alpha)).unwrap();
        for mask in 0u64..8 {
            let cfg = Configuration(mask);
            let expect = if alpha.is_subset_of(cfg) { 1.0 } else { 0.0 };
            assert_eq!(k.value(cfg), c(expect, 0.0));
        }
    }

    #[test]
    fn r_of_constant_one_is_the_vacuum() {
        let ones = ObservableFunction::constant(4, c(1.0, 0.0)).unwrap();
        let r = r_transform(&ones).unwrap();
        assert!(r.max_abs_diff(&RankedFunction::vacuum(4)) == 0.0);
    }

    #[test]
    fn transform_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for _ in 0..10 {
            let sites = rng.gen_range(0..=9);
            let mut g = RankedFunction::zero(sites, sites);
            for mask in 0..(1u64 << sites) {
                if rng.gen_bool(0.5) {
                    g.set(
                        Configuration(mask),
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    );
                }
            }
            let back = r_transform(&k_transform(&g).unwrap()).unwrap();
            let diff = back.max_abs_diff(&g);
            assert!(diff <= 1e-13, "round trip diff {diff}");

            let obs = ObservableFunction::new(
                sites,
                (0..1usize << sites)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
            .unwrap();
            let back = k_transform(&r_transform(&obs).unwrap()).unwrap();
            let diff = back.max_abs_diff(&obs);
            assert!(diff <= 1e-13, "observable round trip diff {diff}");
        }
    }

    #[test]
    fn k_is_a_homomorphism_onto_pointwise_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        for _ in 0..10 {
            let sites = rng.gen_range(0..=8);
            let mut g1 = RankedFunction::zero(sites, sites);
            let mut g2 = RankedFunction::zero(sites, sites);
            for mask in 0..(1u64 << sites) {
                if rng.gen_bool(0.4) {
                    g1.set(Configuration(mask), c(rng.gen_range(-1.0..1.0), 0.0));
                }
                if rng.gen_bool(0.4) {
                    g2.set(Configuration(mask), c(rng.gen_range(-1.0..1.0), 0.0));
                }
            }
            let lhs = k_transform(&star_naive(&g1, &g2).unwrap()).unwrap();
            let rhs = pointwise_product(&k_transform(&g1).unwrap(), &k_transform(&g2).unwrap())
                .unwrap();
            let diff = lhs.max_abs_diff(&rhs);
            assert!(diff <= 1e-12, "homomorphism diff {diff}");
        }
    }

    #[test]
    fn exp_vector_values_and_degenerate_cases() {
        let phi = OneParticleFunction::new(vec![c(2.0, 0.0), c(0.5, 0.5), c(-1.0, 0.0)]);
        let e = exp_vector(&phi).unwrap();
        assert_eq!(e.value(Configuration::EMPTY), c(1.0, 0.0));
        assert_eq!(e.value(Configuration(0b101)), c(2.0, 0.0) * c(-1.0, 0.0));
        assert_eq!(
            e.value(Configuration(0b111)),
            c(2.0, 0.0) * c(0.5, 0.5) * c(-1.0, 0.0)
        );
        // phi = 0 collapses to the vacuum.
        let zero = exp_vector(&OneParticleFunction::<Complex64>::zero(3)).unwrap();
        assert!(zero.max_abs_diff(&RankedFunction::vacuum(3)) == 0.0);
    }

    #[test]
    fn exp_vectors_multiply_by_overlap_inclusion() {
        // e(f) * e(g) = e(f + g + f g), exactly in rational arithmetic.
        let f = OneParticleFunction::new(vec![
            RatComplex::from_ratios((1, 2), (1, 5)),
            RatComplex::from_ratios((-1, 3), (0, 1)),
            RatComplex::from_ratios((2, 7), (1, 4)),
        ]);
        let g = OneParticleFunction::new(vec![
            RatComplex::from_ratios((3, 4), (-1, 6)),
            RatComplex::from_ratios((1, 9), (1, 2)),
            RatComplex::from_ratios((0, 1), (2, 3)),
        ]);
        let mut combined = OneParticleFunction::zero(3);
        for s in 0..3 {
            combined.set(
                s,
                f.value(s) + g.value(s) + f.value(s) * g.value(s),
            );
        }
        let lhs = star_naive(&exp_vector(&f).unwrap(), &exp_vector(&g).unwrap()).unwrap();
        let rhs = exp_vector(&combined).unwrap();
        assert!(lhs.fn_eq(&rhs));
    }

    #[test]
    fn exp_of_exponential_field_inverts_to_product_form() {
        // With F(gamma) = exp(sum of phi over gamma), the inverse transform
        // is the product vector of exp(phi) - 1.
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let sites = 6;
        let phi: Vec<f64> = (0..sites).map(|_| rng.gen_range(-0.8..0.8)).collect();
        let mut obs = ObservableFunction::constant(sites, c(0.0, 0.0)).unwrap();
        for mask in 0..(1u64 << sites) {
            let s: f64 = Configuration(mask).iter_sites().map(|x| phi[x]).sum();
            obs.set(Configuration(mask), c(s.exp(), 0.0));
        }
        let lhs = r_transform(&obs).unwrap();
        let shifted = OneParticleFunction::new(
            phi.iter().map(|p| c(p.exp() - 1.0, 0.0)).collect(),
        );
        let rhs = exp_vector(&shifted).unwrap();
        let diff = lhs.max_abs_diff(&rhs);
        assert!(diff <= 1e-12, "diff {diff}");

        // And forward: K(e(exp(phi) - 1)) = exp(pairing).
        let k = k_transform(&rhs).unwrap();
        let diff = k.max_abs_diff(&obs);
        assert!(diff <= 1e-12, "forward diff {diff}");
    }

    #[test]
    fn fast_star_agrees_through_transform_identity() {
        // moebius(K(g1) . K(g2)) computed by star_fast matches star_naive on
        // a space large enough to exercise several sweeps.
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let sites = 9;
        let mut g1 = RankedFunction::zero(sites, 4);
        let mut g2 = RankedFunction::zero(sites, 4);
        for _ in 0..40 {
            let m1 = rng.gen_range(0..(1u64 << sites));
            if Configuration(m1).len() <= 4 {
                g1.set(Configuration(m1), c(rng.gen_range(-1.0..1.0), 0.0));
            }
            let m2 = rng.gen_range(0..(1u64 << sites));
            if Configuration(m2).len() <= 4 {
                g2.set(Configuration(m2), c(rng.gen_range(-1.0..1.0), 0.0));
            }
        }
        let fast = star_fast(&g1, &g2).unwrap();
        let naive = star_naive(&g1, &g2).unwrap();
        assert!(fast.max_abs_diff(&naive) <= 1e-12);
    }
}
