//! One function per verb. Every verb writes deterministic text: numbers are
//! formatted with fixed precision, tables come out in (cardinality, mask)
//! order, and anything timing-dependent is routed to the CSV sink instead
//! of stdout.

use std::fs;
use std::path::Path;

use num::complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use confstar::algebra::{star_fast, star_naive, OneParticleFunction, RankedFunction};
use confstar::bench::benchmark_star;
use confstar::formats;
use confstar::measures::{
    check_a1, check_a2prime, check_a3, check_a4, reconstruct_process, CorrelationFunction,
    FiniteConfigMeasure,
};
use confstar::sampler::{self, EmpiricalCorrelation};
use confstar::scenarios;
use confstar::spectral::{cyclic_rank, joint_spectrum, verify_k_unitary, QuotientSpace};
use confstar::transforms::{exp_vector, k_transform, r_transform};
use confstar::wick::{generating_functional, wick_pairings_up_to, FieldVector};
use confstar::{Configuration, Error, Result};

use crate::Route;

/// What the verb concluded; the process exit code follows it.
pub enum Outcome {
    Pass,
    Negative,
}

const ROUTE_CHECK_TOL: f64 = 1e-10;
const NULL_THRESHOLD: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-10;
const SEPARATOR_ATTEMPTS: usize = 32;

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            fs::write(path, text)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn arg_error(message: impl Into<String>) -> Error {
    Error::Format {
        path: "<arguments>".into(),
        line: 0,
        message: message.into(),
    }
}

fn parse_config_token(token: &str, sites: usize) -> Result<Configuration> {
    if token.trim() == "-" {
        return Ok(Configuration::EMPTY);
    }
    let mut mask = 0u64;
    for part in token.split(',') {
        let site: usize = part
            .trim()
            .parse()
            .map_err(|_| arg_error(format!("bad site index `{part}` in `{token}`")))?;
        if site >= sites {
            return Err(Error::RegionOutOfRange { site, sites });
        }
        mask |= 1 << site;
    }
    Ok(Configuration(mask))
}

fn config_token(cfg: Configuration) -> String {
    if cfg.is_empty() {
        "-".to_string()
    } else {
        let parts: Vec<String> = cfg.iter_sites().map(|s| s.to_string()).collect();
        parts.join(",")
    }
}

fn window_or_full(window: Option<&str>, sites: usize) -> Result<Configuration> {
    match window {
        Some(token) => parse_config_token(token, sites),
        None => Ok(Configuration(full_mask(sites))),
    }
}

fn full_mask(sites: usize) -> u64 {
    if sites == 64 {
        u64::MAX
    } else {
        (1u64 << sites) - 1
    }
}

/// Measure files double as correlation tables; they share the dense layout.
fn read_correlation(path: &Path) -> Result<CorrelationFunction<f64>> {
    let m = formats::read_measure(path)?;
    CorrelationFunction::from_entries(m.sites(), m.entries().to_vec())
}

pub fn star(a: &Path, b: &Path, route: Route, output: Option<&Path>) -> Result<Outcome> {
    let ga = formats::read_ranked(a)?;
    let gb = formats::read_ranked(b)?;
    match route {
        Route::Naive => {
            emit(output, &formats::render_ranked(&star_naive(&ga, &gb)?))?;
            Ok(Outcome::Pass)
        }
        Route::Fast => {
            emit(output, &formats::render_ranked(&star_fast(&ga, &gb)?))?;
            Ok(Outcome::Pass)
        }
        Route::Check => {
            let slow = star_naive(&ga, &gb)?;
            let fast = star_fast(&ga, &gb)?;
            let delta = slow.max_abs_diff(&fast);
            let ok = delta <= ROUTE_CHECK_TOL;
            println!(
                "routes {}: max |delta| = {delta:.3e} (tolerance {ROUTE_CHECK_TOL:.0e})",
                if ok { "agree" } else { "disagree" }
            );
            if let Some(path) = output {
                fs::write(path, formats::render_ranked(&fast))?;
                println!("wrote {}", path.display());
            }
            Ok(if ok { Outcome::Pass } else { Outcome::Negative })
        }
    }
}

pub fn ktrans(input: &Path, output: Option<&Path>) -> Result<Outcome> {
    let g = formats::read_ranked(input)?;
    emit(output, &formats::render_observable(&k_transform(&g)?))?;
    Ok(Outcome::Pass)
}

pub fn rtrans(input: &Path, output: Option<&Path>) -> Result<Outcome> {
    let f = formats::read_observable(input)?;
    emit(output, &formats::render_ranked(&r_transform(&f)?))?;
    Ok(Outcome::Pass)
}

pub fn wick(
    phi_path: &Path,
    omega: Option<&Path>,
    gamma: Option<&str>,
    order: usize,
) -> Result<Outcome> {
    let phi = formats::read_sitefn(phi_path)?;
    let field = match (omega, gamma) {
        (Some(path), None) => FieldVector::new(formats::read_sitefn(path)?.values().to_vec()),
        (None, Some(token)) => {
            FieldVector::from_configuration(phi.sites(), parse_config_token(token, phi.sites())?)
        }
        _ => return Err(arg_error("give exactly one of --omega or --gamma")),
    };
    for (n, w) in wick_pairings_up_to(&phi, &field, order)?.iter().enumerate() {
        println!("order {n} {:.16e} {:.16e}", w.re, w.im);
    }
    match generating_functional(&phi, &field) {
        Ok(l) => println!("functional {:.16e} {:.16e}", l.re, l.im),
        Err(Error::LogSingularity { site }) => {
            println!("functional undefined: 1 + phi vanishes at site {site}");
        }
        Err(e) => return Err(e),
    }
    Ok(Outcome::Pass)
}

pub fn corr(law_path: &Path, output: Option<&Path>) -> Result<Outcome> {
    let law = formats::read_law(law_path)?;
    let rho = law.correlation();
    let table = FiniteConfigMeasure::from_entries(rho.sites(), rho.entries().to_vec())?;
    emit(output, &formats::render_measure(&table))?;
    Ok(Outcome::Pass)
}

pub fn invert(rho_path: &Path, window: Option<&str>, output: Option<&Path>) -> Result<Outcome> {
    let rho = read_correlation(rho_path)?;
    let window = window_or_full(window, rho.sites())?;
    let rec = reconstruct_process(&rho, window)?;
    println!("verdict: {}", rec.verdict);
    match rec.law {
        Some(law) => {
            emit(output, &formats::render_law(&law))?;
            Ok(Outcome::Pass)
        }
        None => Ok(Outcome::Negative),
    }
}

pub fn check(rho_path: &Path, window: Option<&str>, epsilon: f64) -> Result<Outcome> {
    let rho = read_correlation(rho_path)?;
    let window = window_or_full(window, rho.sites())?;

    let a1 = check_a1(&rho);
    println!(
        "a1 normalization: value = {:.16e}, deviation = {:.3e} (tolerance {:.0e}) -> {}",
        a1.value,
        a1.deviation,
        a1.tolerance,
        verdict_word(a1.passed)
    );

    let a2 = check_a2prime(&rho, window);
    println!("a2' growth: constant = {:.12e}", a2.constant);

    let a3 = check_a3(&rho, window, 1e-9)?;
    println!(
        "a3 positivity: min eigenvalue = {:.12e} (threshold -{:.0e}) -> {}",
        a3.min_eigenvalue,
        a3.threshold,
        verdict_word(a3.passed)
    );

    let cover: Vec<Configuration> = window.iter_sites().map(|x| Configuration(1 << x)).collect();
    let a4 = check_a4(&rho, window, &cover, epsilon);
    println!(
        "a4 density: epsilon = {}, best epsilon = {:.12e}, violations = {} -> {}",
        a4.epsilon,
        a4.best_epsilon,
        a4.violations.len(),
        verdict_word(a4.passed)
    );

    let ok = a1.passed && a3.passed && a4.passed;
    println!("overall: {}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { Outcome::Pass } else { Outcome::Negative })
}

fn verdict_word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn spectrum(rho_path: &Path, seed: u64) -> Result<Outcome> {
    let rho = read_correlation(rho_path)?;
    let space = QuotientSpace::build(&rho, NULL_THRESHOLD)?;
    println!("sites {} dim {}", space.sites(), space.dim());
    println!("orthonormality residual = {:.3e}", space.orthonormality_residual());

    let ops = space.site_operators();
    let rank = cyclic_rank(&space, &ops);
    println!("cyclic rank {} of {}", rank, space.dim());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let joint = joint_spectrum(&space, &ops, &mut rng, SEPARATOR_ATTEMPTS)?;
    for &(cfg, weight) in &joint.atoms {
        println!("atom {} {:.12e}", config_token(cfg), weight);
    }
    println!(
        "total weight = {:.12e} over {} atoms (separator attempts: {})",
        joint.total_weight(),
        joint.atoms.len(),
        joint.attempts
    );

    let window = Configuration(full_mask(rho.sites()));
    let rec = reconstruct_process(&rho, window)?;
    let law = match rec.law {
        Some(law) => law,
        None => {
            println!("verdict: {}", rec.verdict);
            return Ok(Outcome::Negative);
        }
    };
    let report = verify_k_unitary(&law, &mut rng, UNITARITY_TOL)?;
    println!(
        "parseval = {:.3e}, duality = {:.3e}, vacuum = {:.3e}, covariance = {:.3e} \
         (tolerance {:.0e}) -> {}",
        report.parseval_dev,
        report.duality_dev,
        report.vacuum_dev,
        report.covariance_dev,
        report.tolerance,
        verdict_word(report.passed)
    );
    Ok(if report.passed { Outcome::Pass } else { Outcome::Negative })
}

fn emit_samples_or_stats(
    samples: &[Configuration],
    sites: usize,
    corr_rank: Option<usize>,
    law: Option<&Path>,
    output: Option<&Path>,
) -> Result<Outcome> {
    match corr_rank {
        None => {
            let mut text = String::new();
            for s in samples {
                text.push_str(&config_token(*s));
                text.push('\n');
            }
            emit(output, &text)?;
        }
        Some(rank) => {
            let est = sampler::empirical_correlation(samples, sites, rank)?;
            let reference = match law {
                Some(path) => Some(formats::read_law(path)?.correlation()),
                None => None,
            };
            emit(output, &stats_csv(&est, reference.as_ref()))?;
        }
    }
    Ok(Outcome::Pass)
}

fn stats_csv(est: &EmpiricalCorrelation, reference: Option<&CorrelationFunction<f64>>) -> String {
    let mut text = String::new();
    if reference.is_some() {
        text.push_str("configuration,estimate,se,truth,z\n");
    } else {
        text.push_str("configuration,estimate,se\n");
    }
    for &(eta, estimate, se) in est.entries() {
        match reference {
            Some(rho) => {
                let truth = rho.value(eta);
                // Floor keeps the boundary rows (se = 0) finite.
                let z = (estimate - truth) / se.max(1e-12);
                text.push_str(&format!(
                    "{},{:.16e},{:.16e},{:.16e},{:.6e}\n",
                    config_token(eta),
                    estimate,
                    se,
                    truth,
                    z
                ));
            }
            None => {
                text.push_str(&format!(
                    "{},{:.16e},{:.16e}\n",
                    config_token(eta),
                    estimate,
                    se
                ));
            }
        }
    }
    text
}

#[allow(clippy::too_many_arguments)]
pub fn sample_bernoulli(
    sites: usize,
    prob: f64,
    samples: usize,
    seed: u64,
    corr_rank: Option<usize>,
    law: Option<&Path>,
    output: Option<&Path>,
) -> Result<Outcome> {
    let draws = sampler::sample_bernoulli(sites, prob, samples, seed)?;
    emit_samples_or_stats(&draws, sites, corr_rank, law, output)
}

#[allow(clippy::too_many_arguments)]
pub fn sample_gibbs(
    model_path: &Path,
    samples: usize,
    sweeps: usize,
    seed: u64,
    corr_rank: Option<usize>,
    law: Option<&Path>,
    output: Option<&Path>,
) -> Result<Outcome> {
    let model = formats::read_potential(model_path)?;
    let draws = sampler::sample_gibbs(&model, samples, sweeps, seed)?;
    emit_samples_or_stats(&draws, model.sites(), corr_rank, law, output)
}

pub fn bench(sizes: &str, pairs: usize, seed: u64, csv: Option<&Path>) -> Result<Outcome> {
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| arg_error(format!("bad size `{part}` in `{sizes}`")))
        })
        .collect::<Result<_>>()?;
    let report = benchmark_star(&sizes, pairs, seed)?;
    let size_list: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    println!("sizes {} pairs-per-size {pairs}", size_list.join(","));
    println!("max route disagreement = {:.3e}", report.max_disagreement);
    match csv {
        Some(path) => {
            fs::write(path, report.to_csv())?;
            println!("timings written to {}", path.display());
        }
        None => eprint!("{}", report.to_csv()),
    }
    Ok(Outcome::Pass)
}

/// End-to-end property suite over the bundled scenarios: algebra laws in
/// exact arithmetic, transform identities, inversion round trips, spectral
/// reconstruction, and a sampler agreement check. One line per property.
pub fn verify(seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let line = |name: &str, ok: bool| {
        println!("{name}: {}", verdict_word(ok));
        ok
    };

    let mut all = true;
    all &= line("rational star laws", rational_star_laws(&mut rng)?);
    all &= line("rational transform inversion", rational_inversion(&mut rng)?);
    all &= line("exponential-vector product rule", exp_vector_rule()?);
    all &= line("bernoulli6 inversion round trip", bernoulli6_round_trip()?);
    all &= line("delta5 spectrum is a point mass", delta5_point_mass(&mut rng)?);
    all &= line("counterexample gets a negative witness", counterexample_witness()?);
    all &= line("gibbs8 law passes the checks", gibbs8_checks()?);
    all &= line("mixture4 spectral weights match inversion", mixture4_weights(&mut rng)?);
    all &= line("transform is unitary for bernoulli6", bernoulli6_unitary(&mut rng)?);
    all &= line("sampler agrees with bernoulli6", sampler_agreement()?);

    println!("verify: {}", if all { "PASS" } else { "FAIL" });
    Ok(if all { Outcome::Pass } else { Outcome::Negative })
}

fn random_rational(rng: &mut ChaCha8Rng) -> confstar::numeric::RatComplex {
    use rand::Rng;
    confstar::numeric::RatComplex::from_ratios(
        (rng.gen_range(-3..=3), rng.gen_range(1..=4)),
        (rng.gen_range(-3..=3), rng.gen_range(1..=4)),
    )
}

fn rational_star_laws(rng: &mut ChaCha8Rng) -> Result<bool> {
    use confstar::MultiConfiguration;
    use rand::Rng;
    let sites = 4;
    let mut ok = true;
    for trial in 0..20 {
        let make = |rng: &mut ChaCha8Rng| {
            if trial % 4 == 0 {
                let mut g = RankedFunction::zero(sites, 2).into_multiset_mode();
                let points: Vec<usize> =
                    (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..sites)).collect();
                g.set_multi(MultiConfiguration::from_points(&points), random_rational(rng));
                g
            } else {
                let mut g = RankedFunction::zero(sites, sites);
                for _ in 0..3 {
                    g.set(Configuration(rng.gen_range(0..16)), random_rational(rng));
                }
                g
            }
        };
        let (a, b, c) = (make(rng), make(rng), make(rng));
        let ab = star_naive(&a, &b)?;
        ok &= ab.fn_eq(&star_naive(&b, &a)?);
        ok &= star_naive(&ab, &c)?.fn_eq(&star_naive(&a, &star_naive(&b, &c)?)?);
        ok &= star_naive(&a, &RankedFunction::vacuum(sites))?.fn_eq(&a);
    }
    Ok(ok)
}

fn rational_inversion(rng: &mut ChaCha8Rng) -> Result<bool> {
    let mut ok = true;
    for trial in 0..20 {
        let sites = 1 + trial % 8;
        let values: Vec<_> = (0..1usize << sites).map(|_| random_rational(rng)).collect();
        let g = RankedFunction::from_dense(sites, &values)?;
        ok &= r_transform(&k_transform(&g)?)?.fn_eq(&g);
    }
    Ok(ok)
}

fn exp_vector_rule() -> Result<bool> {
    let sites = 6;
    let f = OneParticleFunction::new(
        (0..sites).map(|x| Complex64::new(0.1 + 0.05 * x as f64, 0.02 * x as f64)).collect(),
    );
    let g = OneParticleFunction::new(
        (0..sites).map(|x| Complex64::new(0.2 - 0.03 * x as f64, -0.04 * x as f64)).collect(),
    );
    let mut h = OneParticleFunction::zero(sites);
    for x in 0..sites {
        let (a, b) = (f.value(x), g.value(x));
        h.set(x, a + b + a * b);
    }
    let lhs = star_fast(&exp_vector(&f)?, &exp_vector(&g)?)?;
    Ok(lhs.max_abs_diff(&exp_vector(&h)?) <= 1e-12)
}

fn bernoulli6_round_trip() -> Result<bool> {
    let law = scenarios::bernoulli6();
    let rec = reconstruct_process(&law.correlation(), Configuration(full_mask(6)))?;
    Ok(match rec.law {
        Some(back) => law.total_variation(&back) <= 1e-12,
        None => false,
    })
}

fn delta5_point_mass(rng: &mut ChaCha8Rng) -> Result<bool> {
    let law = scenarios::delta5();
    let space = QuotientSpace::build(&law.correlation(), NULL_THRESHOLD)?;
    let joint = joint_spectrum(&space, &space.site_operators(), rng, SEPARATOR_ATTEMPTS)?;
    Ok(joint.atoms.len() == 1
        && joint.atoms[0].0 == Configuration::from_sites(&[0, 2, 4])
        && (joint.atoms[0].1 - 1.0).abs() <= 1e-9)
}

fn counterexample_witness() -> Result<bool> {
    use confstar::measures::Verdict;
    let rec = reconstruct_process(&scenarios::counterexample2(), Configuration(0b11))?;
    Ok(match rec.verdict {
        Verdict::NotRealizable { witness, value } => witness.len() == 1 && value < 0.0,
        Verdict::Realizable => false,
    })
}

fn gibbs8_checks() -> Result<bool> {
    let law = scenarios::gibbs8().exact_law()?;
    let rho = law.correlation();
    let a1 = check_a1(&rho);
    let a3 = check_a3(&rho, Configuration(full_mask(8)), 1e-9)?;
    Ok(a1.passed && a3.passed)
}

fn mixture4_weights(rng: &mut ChaCha8Rng) -> Result<bool> {
    let law = scenarios::mixture4(11);
    let space = QuotientSpace::build(&law.correlation(), NULL_THRESHOLD)?;
    let joint = joint_spectrum(&space, &space.site_operators(), rng, SEPARATOR_ATTEMPTS)?;
    let mut worst = 0.0f64;
    for &(cfg, weight) in &joint.atoms {
        worst = worst.max((weight - law.value(cfg)).abs());
    }
    Ok(joint.atoms.len() == space.dim() && worst <= 1e-9)
}

fn bernoulli6_unitary(rng: &mut ChaCha8Rng) -> Result<bool> {
    Ok(verify_k_unitary(&scenarios::bernoulli6(), rng, UNITARITY_TOL)?.passed)
}

fn sampler_agreement() -> Result<bool> {
    let law = scenarios::bernoulli6();
    let draws = sampler::sample_bernoulli(6, 0.3, 5000, 20240)?;
    let est = sampler::empirical_correlation(&draws, 6, 2)?;
    Ok(est.fraction_within(&law.correlation(), 4.0) >= 0.95)
}
