//! Command-line driver for the configuration-space calculus library.
//!
//! Exit codes: 0 when the requested computation succeeds and every verdict
//! is positive; 1 when the mathematics says no (a table is not realizable,
//! a condition check fails, the Gram form is not positive, a route check
//! disagrees); 2 for usage and input-format problems. All randomized verbs
//! take `--seed` with a fixed default, and a given input/seed combination
//! produces byte-identical output.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use confstar::Error;

mod commands;

use commands::Outcome;

#[derive(Parser)]
#[command(name = "confstar", version, about = "Configuration-space calculus on finite ground sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    /// Pairwise union-of-supports sum.
    Naive,
    /// Subset transform, multiply, invert.
    Fast,
    /// Run both and compare.
    Check,
}

#[derive(Subcommand)]
enum Command {
    /// Star-convolve two ranked function files.
    Star {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Route::Fast)]
        route: Route,
        /// Write the result here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply the subset-sum transform to a ranked function.
    Ktrans {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply the alternating inverse transform to an observable.
    Rtrans {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Wick pairings of a one-particle function against a field, plus the
    /// generating functional.
    Wick {
        /// One-particle function file.
        #[arg(long)]
        phi: PathBuf,
        /// Field as a one-particle function file.
        #[arg(long, conflicts_with = "gamma")]
        omega: Option<PathBuf>,
        /// Field as a configuration token, e.g. `0,2,4` or `-`.
        #[arg(long)]
        gamma: Option<String>,
        /// Highest pairing order to report.
        #[arg(long, default_value_t = 12)]
        order: usize,
    },
    /// Correlation function of a process law, written as a measure table.
    Corr {
        law: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Invert a correlation table back to a law on a window; exits 1 with a
    /// witness when the table is not realizable.
    Invert {
        rho: PathBuf,
        /// Window as a configuration token; defaults to every site.
        #[arg(long)]
        window: Option<String>,
        /// Write the reconstructed law here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Normalization, growth, positivity, and density report for a
    /// correlation table.
    Check {
        rho: PathBuf,
        #[arg(long)]
        window: Option<String>,
        /// Density margin for the singleton-cover bound.
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
    },
    /// Quotient space, site operators, joint spectrum, and the unitarity
    /// report for a correlation table.
    Spectrum {
        rho: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Draw configurations from a model and emit samples or statistics.
    Sample {
        #[command(subcommand)]
        model: SampleModel,
    },
    /// Time both convolution routes on dense random tables.
    Bench {
        /// Comma-separated site counts.
        #[arg(long, default_value = "8,10,12,14")]
        sizes: String,
        #[arg(long, default_value_t = 3)]
        pairs: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write the timing table here; without it the CSV goes to stderr.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the bundled end-to-end property suite.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum SampleModel {
    /// Independent sites with a common occupation probability.
    Bernoulli {
        #[arg(long)]
        sites: usize,
        #[arg(long)]
        prob: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Emit an estimate/error CSV up to this rank instead of raw samples.
        #[arg(long)]
        corr_rank: Option<usize>,
        /// Law file supplying reference values and z-scores for the CSV.
        #[arg(long, requires = "corr_rank")]
        law: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Metropolis chain for a pair potential file.
    Gibbs {
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Sweeps between kept states.
        #[arg(long, default_value_t = 5)]
        sweeps: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        corr_rank: Option<usize>,
        #[arg(long, requires = "corr_rank")]
        law: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Errors carrying a mathematical verdict, as opposed to bad input.
fn is_negative_verdict(e: &Error) -> bool {
    matches!(
        e,
        Error::GramNotPositive { .. }
            | Error::SeparatorDegenerate { .. }
            | Error::InvalidLaw(_)
            | Error::LogSingularity { .. }
    )
}

fn run(cli: Cli) -> confstar::Result<Outcome> {
    match cli.command {
        Command::Star { a, b, route, output } => commands::star(&a, &b, route, output.as_deref()),
        Command::Ktrans { input, output } => commands::ktrans(&input, output.as_deref()),
        Command::Rtrans { input, output } => commands::rtrans(&input, output.as_deref()),
        Command::Wick { phi, omega, gamma, order } => {
            commands::wick(&phi, omega.as_deref(), gamma.as_deref(), order)
        }
        Command::Corr { law, output } => commands::corr(&law, output.as_deref()),
        Command::Invert { rho, window, output } => {
            commands::invert(&rho, window.as_deref(), output.as_deref())
        }
        Command::Check { rho, window, epsilon } => {
            commands::check(&rho, window.as_deref(), epsilon)
        }
        Command::Spectrum { rho, seed } => commands::spectrum(&rho, seed),
        Command::Sample { model } => match model {
            SampleModel::Bernoulli {
                sites,
                prob,
                samples,
                seed,
                corr_rank,
                law,
                output,
            } => commands::sample_bernoulli(
                sites,
                prob,
                samples,
                seed,
                corr_rank,
                law.as_deref(),
                output.as_deref(),
            ),
            SampleModel::Gibbs {
                model,
                samples,
                sweeps,
                seed,
                corr_rank,
                law,
                output,
            } => commands::sample_gibbs(
                &model,
                samples,
                sweeps,
                seed,
                corr_rank,
                law.as_deref(),
                output.as_deref(),
            ),
        },
        Command::Bench { sizes, pairs, seed, csv } => {
            commands::bench(&sizes, pairs as usize, seed, csv.as_deref())
        }
        Command::Verify { seed } => commands::verify(seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(1),
        Err(e) if is_negative_verdict(&e) => {
            println!("verdict: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
