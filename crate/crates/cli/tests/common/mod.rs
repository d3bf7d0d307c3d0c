//! Shared plumbing for the binary tests: scratch directories, process
//! invocation, and deterministic input fixtures written through the library
//! writers.
//!
//! Each test binary compiles this module separately and touches a different
//! subset of the fixtures, so per-binary dead-code analysis is meaningless.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use confstar::algebra::RankedFunction;
use confstar::formats;
use confstar::measures::FiniteConfigMeasure;
use confstar::scenarios;
use confstar::Configuration;
use num::complex::Complex64;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_confstar")
}

pub fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("confstar-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

pub fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub struct Fixtures {
    pub dir: PathBuf,
    pub ranked_a: PathBuf,
    pub ranked_b: PathBuf,
    pub ranked_multiset: PathBuf,
    pub phi: PathBuf,
    pub omega: PathBuf,
    pub law: PathBuf,
    pub bad_measure: PathBuf,
    pub potential: PathBuf,
}

pub fn fixtures(name: &str) -> Fixtures {
    let dir = scratch(name);
    let path = |file: &str| dir.join(file);

    let mut a = RankedFunction::zero(5, 5);
    a.set(Configuration(0b00001), c(0.4, -0.2));
    a.set(Configuration(0b00110), c(-0.3, 0.1));
    a.set(Configuration(0b10100), c(0.25, 0.05));
    let ranked_a = path("a.fn");
    formats::write_ranked(&ranked_a, &a).unwrap();

    let mut b = RankedFunction::zero(5, 5);
    b.set(Configuration::EMPTY, c(1.0, 0.0));
    b.set(Configuration(0b01001), c(0.2, 0.3));
    b.set(Configuration(0b00011), c(-0.15, -0.05));
    let ranked_b = path("b.fn");
    formats::write_ranked(&ranked_b, &b).unwrap();

    let mut m = RankedFunction::zero(3, 2).into_multiset_mode();
    m.set_multi(confstar::MultiConfiguration::from_points(&[1, 1]), c(0.5, 0.0));
    m.set_multi(confstar::MultiConfiguration::from_points(&[0, 2]), c(0.0, -0.4));
    let ranked_multiset = path("m.fn");
    formats::write_ranked(&ranked_multiset, &m).unwrap();

    let phi_values = vec![
        c(0.3, 0.1),
        c(-0.2, 0.05),
        c(0.15, -0.1),
        c(0.05, 0.2),
        c(-0.1, -0.15),
    ];
    let phi = path("phi.sitefn");
    formats::write_sitefn(&phi, &confstar::algebra::OneParticleFunction::new(phi_values)).unwrap();

    let omega_values = vec![c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.25, 0.0)];
    let omega = path("omega.sitefn");
    formats::write_sitefn(&omega, &confstar::algebra::OneParticleFunction::new(omega_values))
        .unwrap();

    let law = path("bern6.law");
    formats::write_law(&law, &scenarios::bernoulli6()).unwrap();

    let bad_measure = path("bad.measure");
    let bad = FiniteConfigMeasure::from_entries(2, vec![1.0, 0.3, 0.3, 0.9]).unwrap();
    formats::write_measure(&bad_measure, &bad).unwrap();

    let potential = path("ring8.potential");
    formats::write_potential(&potential, &scenarios::gibbs8()).unwrap();

    Fixtures {
        dir,
        ranked_a,
        ranked_b,
        ranked_multiset,
        phi,
        omega,
        law,
        bad_measure,
        potential,
    }
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}
