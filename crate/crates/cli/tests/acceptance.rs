//! Acceptance gate for the binary: repeated runs of every verb with the same
//! inputs and seeds must produce byte-identical stdout, stderr, exit codes,
//! and output files. Timing data is exempt by design: it goes to the CSV
//! sink, never to stdout, and the CSV file is the one artifact not compared.

mod common;

use std::fs;
use std::path::PathBuf;

use common::{code, fixtures, path_str, run};

struct Case {
    name: &'static str,
    args: Vec<String>,
    /// Output files whose bytes must match across runs.
    artifacts: Vec<PathBuf>,
}

#[test]
fn criterion_9_byte_identical_runs() {
    let fx = fixtures("accept");
    let p = |f: &str| fx.dir.join(f);
    let s = |p: &PathBuf| path_str(p).to_string();

    // Fixture prep that itself goes through the binary: an observable for
    // rtrans and a correlation table for invert/check/spectrum.
    let observable = p("a.obs");
    let first = run(&["ktrans", path_str(&fx.ranked_a), "-o", path_str(&observable)]);
    assert_eq!(code(&first), 0, "ktrans prep failed: {first:?}");
    let rho = p("bern6.measure");
    let first = run(&["corr", path_str(&fx.law), "-o", path_str(&rho)]);
    assert_eq!(code(&first), 0, "corr prep failed: {first:?}");

    let star_out = p("ab.fn");
    let law_out = p("recovered.law");
    let csv_out = p("timings.csv");
    let stats_out = p("stats.csv");

    let cases = vec![
        Case {
            name: "star-naive",
            args: vec![
                "star".into(),
                s(&fx.ranked_a),
                s(&fx.ranked_b),
                "--route".into(),
                "naive".into(),
            ],
            artifacts: vec![],
        },
        Case {
            name: "star-fast-to-file",
            args: vec![
                "star".into(),
                s(&fx.ranked_a),
                s(&fx.ranked_b),
                "--route".into(),
                "fast".into(),
                "-o".into(),
                s(&star_out),
            ],
            artifacts: vec![star_out.clone()],
        },
        Case {
            name: "star-check",
            args: vec![
                "star".into(),
                s(&fx.ranked_a),
                s(&fx.ranked_b),
                "--route".into(),
                "check".into(),
            ],
            artifacts: vec![],
        },
        Case {
            name: "ktrans",
            args: vec!["ktrans".into(), s(&fx.ranked_a)],
            artifacts: vec![],
        },
        Case {
            name: "rtrans",
            args: vec!["rtrans".into(), s(&observable)],
            artifacts: vec![],
        },
        Case {
            name: "wick-gamma",
            args: vec![
                "wick".into(),
                "--phi".into(),
                s(&fx.phi),
                "--gamma".into(),
                "0,2,4".into(),
                "--order".into(),
                "6".into(),
            ],
            artifacts: vec![],
        },
        Case {
            name: "wick-omega",
            args: vec![
                "wick".into(),
                "--phi".into(),
                s(&fx.phi),
                "--omega".into(),
                s(&fx.omega),
                "--order".into(),
                "5".into(),
            ],
            artifacts: vec![],
        },
        Case {
            name: "corr",
            args: vec!["corr".into(), s(&fx.law)],
            artifacts: vec![],
        },
        Case {
            name: "invert",
            args: vec!["invert".into(), s(&rho), "-o".into(), s(&law_out)],
            artifacts: vec![law_out.clone()],
        },
        Case {
            name: "invert-negative",
            args: vec!["invert".into(), s(&fx.bad_measure)],
            artifacts: vec![],
        },
        Case {
            name: "check",
            args: vec!["check".into(), s(&rho), "--epsilon".into(), "0.5".into()],
            artifacts: vec![],
        },
        Case {
            name: "spectrum",
            args: vec!["spectrum".into(), s(&rho), "--seed".into(), "11".into()],
            artifacts: vec![],
        },
        Case {
            name: "sample-bernoulli",
            args: vec![
                "sample".into(),
                "bernoulli".into(),
                "--sites".into(),
                "6".into(),
                "--prob".into(),
                "0.3".into(),
                "--samples".into(),
                "200".into(),
                "--seed".into(),
                "5".into(),
            ],
            artifacts: vec![],
        },
        Case {
            name: "sample-bernoulli-stats",
            args: vec![
                "sample".into(),
                "bernoulli".into(),
                "--sites".into(),
                "6".into(),
                "--prob".into(),
                "0.3".into(),
                "--samples".into(),
                "500".into(),
                "--seed".into(),
                "5".into(),
                "--corr-rank".into(),
                "2".into(),
                "--law".into(),
                s(&fx.law),
                "-o".into(),
                s(&stats_out),
            ],
            artifacts: vec![stats_out.clone()],
        },
        Case {
            name: "sample-gibbs",
            args: vec![
                "sample".into(),
                "gibbs".into(),
                s(&fx.potential),
                "--samples".into(),
                "50".into(),
                "--sweeps".into(),
                "2".into(),
                "--seed".into(),
                "9".into(),
            ],
            artifacts: vec![],
        },
        Case {
            name: "bench",
            args: vec![
                "bench".into(),
                "--sizes".into(),
                "6,8".into(),
                "--pairs".into(),
                "2".into(),
                "--seed".into(),
                "3".into(),
                "--csv".into(),
                s(&csv_out),
            ],
            artifacts: vec![], // the CSV holds timings and is exempt
        },
        Case {
            name: "verify",
            args: vec!["verify".into(), "--seed".into(), "7".into()],
            artifacts: vec![],
        },
    ];

    let mut ok = true;
    for case in &cases {
        let args: Vec<&str> = case.args.iter().map(String::as_str).collect();
        let first = run(&args);
        let first_files: Vec<Vec<u8>> =
            case.artifacts.iter().map(|p| fs::read(p).expect("artifact written")).collect();
        let second = run(&args);
        let second_files: Vec<Vec<u8>> =
            case.artifacts.iter().map(|p| fs::read(p).expect("artifact written")).collect();

        let same = first.stdout == second.stdout
            && first.stderr == second.stderr
            && first.status == second.status
            && first_files == second_files;
        if !same {
            println!("verb {} differed across identical runs", case.name);
        }
        assert!(
            !first.stdout.is_empty() || !case.artifacts.is_empty(),
            "verb {} produced nothing to compare",
            case.name
        );
        ok &= same;
    }

    println!(
        "criterion 9 (determinism): {} -- {} verb invocations, stdout/stderr/exit/artifact \
         bytes identical across repeated runs",
        if ok { "PASS" } else { "FAIL" },
        cases.len()
    );
    assert!(ok, "criterion 9 (determinism) failed");
}
