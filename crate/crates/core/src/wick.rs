//! Wick power pairings against a field.
//!
//! `wick_pairing(phi, omega, n)` is the pairing of the n-th tensor power of a
//! one-particle function with the n-th Wick power of the field `omega`. It is
//! computed by the renormalization recurrence: the (n+1)-st pairing is the
//! n-th times the first, minus n corrections in which two factors merge into
//! their pointwise product, all divided by n+1. Since merged factors are
//! always powers of `phi`, the recursion state is an integer partition of
//! exponents and the whole table memoizes over partitions.
//!
//! When `omega` is (the indicator of) a configuration the pairing collapses
//! to the elementary symmetric polynomial of the site values, which
//! `wick_config` evaluates directly and independently.

use std::collections::BTreeMap;

use num::complex::Complex64;

use crate::algebra::OneParticleFunction;
use crate::error::Error;
use crate::ground::Configuration;
use crate::numeric::Scalar;
use crate::Result;

/// Discrete field: one (complex) mass per site.
///
/// Pairings against a field are unweighted sums over sites; the field carries
/// its own mass, the ground-space weights never enter here.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVector<S> {
    values: Vec<S>,
    is_configuration: bool,
}

impl<S: Scalar> FieldVector<S> {
    pub fn new(values: Vec<S>) -> Self {
        FieldVector {
            values,
            is_configuration: false,
        }
    }

    /// Field of unit masses on the occupied sites of `cfg`.
    pub fn from_configuration(sites: usize, cfg: Configuration) -> Self {
        let mut values = vec![S::zero(); sites];
        for s in cfg.iter_sites() {
            values[s] = S::one();
        }
        FieldVector {
            values,
            is_configuration: true,
        }
    }

    pub fn sites(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, site: usize) -> S {
        self.values[site].clone()
    }

    pub fn is_configuration(&self) -> bool {
        self.is_configuration
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }
}

/// Unweighted pairing `sum over x of phi(x) omega(x)`.
pub fn pairing<S: Scalar>(phi: &OneParticleFunction<S>, omega: &FieldVector<S>) -> Result<S> {
    check_sites(phi, omega)?;
    Ok(phi
        .values()
        .iter()
        .zip(omega.values())
        .fold(S::zero(), |acc, (p, w)| acc + p.clone() * w.clone()))
}

fn check_sites<S: Scalar>(phi: &OneParticleFunction<S>, omega: &FieldVector<S>) -> Result<()> {
    if phi.sites() != omega.sites() {
        return Err(Error::SpaceMismatch {
            left: phi.sites(),
            right: omega.sites(),
        });
    }
    Ok(())
}

/// Pairings of powers of `phi` against a partition of factor exponents.
struct PartitionTable<S> {
    /// `power_sums[k]` is the pairing of `phi^(k+1)` with the field.
    power_sums: Vec<S>,
    memo: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> PartitionTable<S> {
    fn new(phi: &OneParticleFunction<S>, omega: &FieldVector<S>, max_power: usize) -> Self {
        let mut power_sums = Vec::with_capacity(max_power);
        let mut powers: Vec<S> = vec![S::one(); phi.sites()];
        for _ in 0..max_power {
            let mut sum = S::zero();
            for (site, p) in powers.iter_mut().enumerate() {
                *p = p.clone() * phi.value(site);
                sum = sum + p.clone() * omega.value(site);
            }
            power_sums.push(sum);
        }
        PartitionTable {
            power_sums,
            memo: BTreeMap::new(),
        }
    }

    fn power_sum(&self, exponent: u32) -> S {
        self.power_sums[exponent as usize - 1].clone()
    }

    /// Pairing of the symmetrized product of `phi^a` over the parts `a` of
    /// the (sorted) partition with the Wick power of the field.
    fn eval(&mut self, partition: &[u32]) -> S {
        let m = partition.len();
        if m == 0 {
            return S::one();
        }
        if m == 1 {
            return self.power_sum(partition[0]);
        }
        if let Some(v) = self.memo.get(partition) {
            return v.clone();
        }
        // Remove one factor and pair it directly, or merge two factors into
        // one of summed exponent; ordered pairs count each merge twice.
        let mut acc = S::zero();
        for j in 0..m {
            let mut rest: Vec<u32> = Vec::with_capacity(m - 1);
            rest.extend_from_slice(&partition[..j]);
            rest.extend_from_slice(&partition[j + 1..]);
            acc = acc + self.eval(&rest) * self.power_sum(partition[j]);
        }
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let mut merged: Vec<u32> = Vec::with_capacity(m - 1);
                for (k, &a) in partition.iter().enumerate() {
                    if k != i && k != j {
                        merged.push(a);
                    }
                }
                merged.push(partition[i] + partition[j]);
                merged.sort_unstable();
                acc = acc - self.eval(&merged);
            }
        }
        let value = acc.div_int((m * m) as i64);
        self.memo.insert(partition.to_vec(), value.clone());
        value
    }
}

/// Pairing of the n-th power of `phi` with the n-th Wick power of the field.
pub fn wick_pairing<S: Scalar>(
    phi: &OneParticleFunction<S>,
    omega: &FieldVector<S>,
    n: usize,
) -> Result<S> {
    Ok(wick_pairings_up_to(phi, omega, n)?.pop().expect("n + 1 entries"))
}

/// All pairings for orders `0..=n`, sharing one recursion table.
pub fn wick_pairings_up_to<S: Scalar>(
    phi: &OneParticleFunction<S>,
    omega: &FieldVector<S>,
    n: usize,
) -> Result<Vec<S>> {
    check_sites(phi, omega)?;
    let mut table = PartitionTable::new(phi, omega, n.max(1));
    Ok((0..=n).map(|k| table.eval(&vec![1u32; k])).collect())
}

/// Elementary symmetric polynomial of `phi` over the points of `gamma`:
/// the closed form of the Wick pairing when the field is a configuration.
pub fn wick_config<S: Scalar>(
    phi: &OneParticleFunction<S>,
    gamma: Configuration,
    n: usize,
) -> S {
    let mut e = vec![S::zero(); n + 1];
    e[0] = S::one();
    for x in gamma.iter_sites() {
        let v = phi.value(x);
        for j in (1..=n.min(gamma.len())).rev() {
            e[j] = e[j].clone() + v.clone() * e[j - 1].clone();
        }
    }
    e[n].clone()
}

/// Exponential generating functional of the Wick pairings:
/// `exp(sum over x of omega(x) log(1 + phi(x)))`.
pub fn generating_functional(
    phi: &OneParticleFunction<Complex64>,
    omega: &FieldVector<Complex64>,
) -> Result<Complex64> {
    check_sites(phi, omega)?;
    let mut exponent = Complex64::new(0.0, 0.0);
    for site in 0..phi.sites() {
        let w = omega.value(site);
        if w.norm() == 0.0 {
            continue;
        }
        let shifted = Complex64::new(1.0, 0.0) + phi.value(site);
        if shifted.norm() == 0.0 {
            return Err(Error::LogSingularity { site });
        }
        exponent += w * shifted.ln();
    }
    Ok(exponent.exp())
}
