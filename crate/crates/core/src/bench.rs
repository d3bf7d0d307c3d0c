//! Wall-clock comparison of the two star-product evaluation routes.
//!
//! Timings are environment-dependent, so they belong in the report struct
//! and its CSV rendering, never in deterministic program output. The report
//! also carries the largest disagreement between the two routes over the
//! inputs it timed, which is deterministic and safe to assert on.

use std::time::Instant;

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{star_fast, star_naive, RankedFunction};
use crate::ground::Configuration;
use crate::Result;

/// Largest site count the pairwise-splitting route is asked to handle; on
/// the dense inputs timed here its cost is the square of the table size, so
/// larger inputs are reported as skipped.
pub const NAIVE_SIZE_LIMIT: usize = 16;

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub sites: usize,
    pub algorithm: &'static str,
    pub pairs: usize,
    pub total_nanos: u128,
    pub skipped: bool,
}

impl BenchRow {
    pub fn mean_nanos(&self) -> u128 {
        if self.pairs == 0 || self.skipped {
            0
        } else {
            self.total_nanos / self.pairs as u128
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Largest entrywise difference between the two routes where both ran.
    pub max_disagreement: f64,
}

impl BenchReport {
    /// One line per row: `sites,algorithm,pairs,total_nanos,mean_nanos,skipped`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sites,algorithm,pairs,total_nanos,mean_nanos,skipped\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.sites,
                row.algorithm,
                row.pairs,
                row.total_nanos,
                row.mean_nanos(),
                row.skipped
            ));
        }
        out
    }

    /// Total nanoseconds for one algorithm at one size, if that row ran.
    pub fn total_for(&self, sites: usize, algorithm: &str) -> Option<u128> {
        self.rows
            .iter()
            .find(|r| r.sites == sites && r.algorithm == algorithm && !r.skipped)
            .map(|r| r.total_nanos)
    }
}

/// Dense random table: every configuration carries a value, which is the
/// regime where the two routes genuinely trade off.
fn random_input(rng: &mut ChaCha8Rng, sites: usize) -> RankedFunction<Complex64> {
    let mut g = RankedFunction::zero(sites, sites);
    for mask in 0..(1u64 << sites) {
        g.set(
            Configuration(mask),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
    }
    g
}

/// Times both routes on `pairs_per_size` random sparse pairs at each site
/// count. Two rows per size; the pairwise route is marked skipped above
/// [`NAIVE_SIZE_LIMIT`].
pub fn benchmark_star(
    sizes: &[usize],
    pairs_per_size: usize,
    seed: u64,
) -> Result<BenchReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(sizes.len() * 2);
    let mut max_disagreement = 0.0f64;
    for &sites in sizes {
        let inputs: Vec<_> = (0..pairs_per_size)
            .map(|_| (random_input(&mut rng, sites), random_input(&mut rng, sites)))
            .collect();

        let run_naive = sites <= NAIVE_SIZE_LIMIT;
        let mut naive_outputs = Vec::new();
        let naive_nanos = if run_naive {
            let start = Instant::now();
            for (a, b) in &inputs {
                naive_outputs.push(star_naive(a, b)?);
            }
            start.elapsed().as_nanos()
        } else {
            0
        };
        rows.push(BenchRow {
            sites,
            algorithm: "naive",
            pairs: pairs_per_size,
            total_nanos: naive_nanos,
            skipped: !run_naive,
        });

        let start = Instant::now();
        let mut fast_outputs = Vec::with_capacity(inputs.len());
        for (a, b) in &inputs {
            fast_outputs.push(star_fast(a, b)?);
        }
        let fast_nanos = start.elapsed().as_nanos();
        rows.push(BenchRow {
            sites,
            algorithm: "fast",
            pairs: pairs_per_size,
            total_nanos: fast_nanos,
            skipped: false,
        });

        for (n, f) in naive_outputs.iter().zip(&fast_outputs) {
            max_disagreement = max_disagreement.max(n.max_abs_diff(f));
        }
    }
    Ok(BenchReport {
        rows,
        max_disagreement,
    })
}
