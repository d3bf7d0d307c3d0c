//! Ready-made laws, models, and correlation tables used across the test
//! suites and the command-line examples. Everything here is deterministic:
//! fixed parameters or an explicit seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ground::Configuration;
use crate::measures::{CorrelationFunction, FiniteConfigMeasure, ProcessLaw};
use crate::sampler::{GibbsModel, PairPotential};

/// Six independent sites, occupation probability 0.3.
pub fn bernoulli6() -> ProcessLaw<f64> {
    ProcessLaw::bernoulli(6, 0.3).expect("valid probability")
}

/// Point mass on `{0, 2, 4}` in a five-site space.
pub fn delta5() -> ProcessLaw<f64> {
    ProcessLaw::delta(5, Configuration::from_sites(&[0, 2, 4])).expect("5 sites")
}

/// Repulsive nearest-neighbour ring on eight sites, activity 0.6,
/// inverse temperature 0.7.
pub fn gibbs8() -> GibbsModel {
    GibbsModel::new(PairPotential::ring(8, 1.0), 0.6, 0.7).expect("positive activity")
}

/// Seeded random mixture of four atoms on four sites; its Gram form is
/// singular, which exercises the null-space handling in the spectral code.
pub fn mixture4(seed: u64) -> ProcessLaw<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mu = FiniteConfigMeasure::zero(4).expect("4 sites");
    let mut total = 0.0;
    let mut weights = Vec::new();
    for _ in 0..4 {
        let w = 0.1 + rng.gen_range(0.0..1.0);
        weights.push(w);
        total += w;
    }
    for w in &mut weights {
        *w /= total;
    }
    let mut placed = 0;
    while placed < 4 {
        let gamma = Configuration(rng.gen_range(0..16u64));
        if mu.value(gamma) == 0.0 {
            mu.set(gamma, weights[placed]);
            placed += 1;
        }
    }
    ProcessLaw::new(mu).expect("convex combination")
}

/// Correlation table on two sites that no law can produce: the pair
/// correlation 0.9 exceeds what one-point correlations of 0.3 allow, so the
/// inversion has the negative entry 0.3 - 0.9 on each singleton.
pub fn counterexample2() -> CorrelationFunction<f64> {
    CorrelationFunction::from_entries(2, vec![1.0, 0.3, 0.3, 0.9]).expect("4 entries")
}

/// Law paired with a singleton cover on which the rank-n correlation sums
/// stay below `(2 + 1/2)^(-n)`: eight independent sites at occupation 0.3.
pub fn density_bounded() -> (ProcessLaw<f64>, Vec<Configuration>) {
    let law = ProcessLaw::bernoulli(8, 0.3).expect("valid probability");
    let cover = (0..8).map(|x| Configuration(1 << x)).collect();
    (law, cover)
}
