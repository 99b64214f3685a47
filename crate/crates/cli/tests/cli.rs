//! End-to-end tests driving the compiled `q3p` binary: artifact layout,
//! byte-level determinism, exit codes, and agreement with the library API.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use q3p_core::ising::{exact_solve, Placement, PlacementProblem};

fn q3p(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_q3p"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawning q3p")
}

/// Run and require success, surfacing stderr on failure.
fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = q3p(dir, args);
    assert!(
        out.status.success(),
        "q3p {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {path:?}: {e}"));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {path:?}: {e}"))
}

/// Build a small two-lobe density, a 6-site register, and a compiled problem
/// inside `dir`, returning relative artifact names.
fn build_fixture(dir: &Path) -> (&'static str, &'static str, &'static str) {
    let mix = serde_json::json!({
        "grid": {"shape": [41, 41], "spacing": [0.5, 0.5], "origin": [0.0, 0.0]},
        "components": [
            {"center": [6.0, 10.0], "variance": 2.0},
            {"center": [14.0, 10.0], "variance": 2.0}
        ]
    });
    fs::write(dir.join("mix.json"), serde_json::to_string(&mix).unwrap()).unwrap();
    ok(
        dir,
        &[
            "synth",
            "--components",
            "mix.json",
            "--normalize",
            "--out",
            "density.json",
        ],
    );
    ok(
        dir,
        &[
            "register",
            "--density",
            "density.json",
            "--threshold",
            "0.45",
            "--spacing",
            "6.0",
            "--pitch",
            "2.0",
            "--out",
            "reg.json",
        ],
    );
    ok(
        dir,
        &[
            "compile",
            "--density",
            "density.json",
            "--register",
            "reg.json",
            "--variance",
            "4.0",
            "--out",
            "prob.json",
        ],
    );
    ("density.json", "reg.json", "prob.json")
}

const QAE_ARGS: &[&str] = &[
    "qae",
    "--problem",
    "prob.json",
    "--register",
    "reg.json",
    "--seed",
    "7",
    "--shots",
    "300",
    "--duration",
    "1e-6",
    "--svg",
    "--out-prefix",
    "run",
];

#[test]
fn pipeline_matches_the_library_solver() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, problem_file) = build_fixture(dir.path());
    ok(
        dir.path(),
        &["exact", "--problem", problem_file, "--out", "exact.json"],
    );

    let problem: PlacementProblem = read_json(&dir.path().join(problem_file));
    let via_cli: Placement = read_json(&dir.path().join("exact.json"));
    let via_library = exact_solve(&problem, true);
    assert_eq!(via_cli, via_library);
    assert!(
        via_library.count >= 2,
        "fixture should place molecules in both lobes, got {}",
        via_library.count
    );

    // The manifest records the run and itself as the final output.
    let manifest: serde_json::Value = read_json(&dir.path().join("exact.manifest.json"));
    assert_eq!(manifest["tool"], "q3p");
    assert_eq!(manifest["subcommand"], "exact");
    assert_eq!(manifest["inputs"][0], "prob.json");
    assert_eq!(manifest["outputs"][0], "exact.json");
    assert_eq!(manifest["outputs"][1], "exact.manifest.json");
}

#[test]
fn seeded_runs_are_byte_identical_across_reruns_and_threads() {
    let base = tempfile::tempdir().unwrap();
    let variants: &[&[&str]] = &[&[], &["--threads", "1"], &["--threads", "8"]];

    let mut artifact_sets: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for (k, extra) in std::iter::repeat(variants[0])
        .take(2) // same command twice: rerun determinism
        .chain(variants[1..].iter().copied())
        .enumerate()
    {
        let dir = base.path().join(format!("v{k}"));
        fs::create_dir(&dir).unwrap();
        build_fixture(&dir);
        let mut args: Vec<&str> = QAE_ARGS.to_vec();
        args.extend_from_slice(extra);
        ok(&dir, &args);

        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap())
            .filter(|e| e.file_name().to_string_lossy().starts_with("run."))
            .map(|e| {
                (
                    e.file_name().to_string_lossy().into_owned(),
                    fs::read(e.path()).unwrap(),
                )
            })
            .collect();
        files.sort();
        assert_eq!(files.len(), 4, "hist.csv, winner.json, svg, manifest");
        artifact_sets.push(files);
    }

    for (k, set) in artifact_sets.iter().enumerate().skip(1) {
        for ((name_a, bytes_a), (name_b, bytes_b)) in artifact_sets[0].iter().zip(set) {
            assert_eq!(name_a, name_b);
            assert!(
                bytes_a == bytes_b,
                "{name_a} differs between variant 0 and variant {k}"
            );
        }
    }
}

#[test]
fn histogram_plot_flags_the_declared_winner() {
    let dir = tempfile::tempdir().unwrap();
    build_fixture(dir.path());
    ok(dir.path(), QAE_ARGS);

    let winner: Placement = read_json(&dir.path().join("run.winner.json"));
    let winner = winner.bitstring.to_string();
    ok(
        dir.path(),
        &[
            "plot",
            "--hist",
            "run.hist.csv",
            "--winner",
            &winner,
            "--out",
            "replot.svg",
        ],
    );

    let svg = fs::read_to_string(dir.path().join("replot.svg")).unwrap();
    assert!(svg.contains(&format!("<metadata>winner={winner}</metadata>")));
    assert_eq!(svg.matches("data-winner=\"true\"").count(), 1);
    // The binary's own --svg output highlights the same winner.
    let direct = fs::read_to_string(dir.path().join("run.svg")).unwrap();
    assert!(direct.contains(&format!("<metadata>winner={winner}</metadata>")));
}

#[test]
fn vqa_artifacts_are_complete() {
    let dir = tempfile::tempdir().unwrap();
    build_fixture(dir.path());
    ok(
        dir.path(),
        &[
            "vqa",
            "--problem",
            "prob.json",
            "--register",
            "reg.json",
            "--seed",
            "3",
            "--control-points",
            "3",
            "--cycles",
            "6",
            "--warmup",
            "2",
            "--shots",
            "100",
            "--duration",
            "1e-6",
            "--format",
            "json",
            "--out-prefix",
            "opt",
        ],
    );

    let trace = fs::read_to_string(dir.path().join("opt.trace.jsonl")).unwrap();
    let lines: Vec<&str> = trace.lines().collect();
    assert_eq!(lines.len(), 6, "one record per optimization cycle");
    for line in &lines {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(record["params"].as_array().unwrap().len(), 6); // 2m
        assert!(record["cost_estimate"].is_number());
    }

    let summary: serde_json::Value = read_json(&dir.path().join("opt.winner.json"));
    assert_eq!(summary["placement"]["bitstring"].as_str().unwrap().len(), 6);
    assert_eq!(summary["modal"].as_str().unwrap().len(), 6);
    assert!(summary["best_cost"].is_number());
    assert_eq!(summary["best_params"].as_array().unwrap().len(), 6);

    let hist: serde_json::Value = read_json(&dir.path().join("opt.hist.json"));
    assert_eq!(
        hist["counts"]
            .as_object()
            .unwrap()
            .values()
            .map(|v| v.as_u64().unwrap())
            .sum::<u64>(),
        100
    );

    let manifest: serde_json::Value = read_json(&dir.path().join("opt.manifest.json"));
    let outputs: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(
        outputs,
        [
            "opt.trace.jsonl",
            "opt.hist.json",
            "opt.winner.json",
            "opt.manifest.json"
        ]
    );
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["parameters"]["config"]["cycles"], 6);
}

#[test]
fn landscape_scan_writes_axes_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    build_fixture(dir.path());
    ok(
        dir.path(),
        &[
            "landscape",
            "--register",
            "reg.json",
            "--target",
            "000011",
            "--rows",
            "3",
            "--cols",
            "4",
            "--t-max",
            "4e-7",
            "--shots",
            "50",
            "--seed",
            "5",
            "--out",
            "land.csv",
        ],
    );
    let text = fs::read_to_string(dir.path().join("land.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2 + 3, "two axis rows plus one row per detuning");
    assert!(lines[0].starts_with("deltas,"));
    assert!(lines[1].starts_with("durations,"));
    assert_eq!(lines[2].split(',').count(), 4);
    // Zero-duration column: the all-ground state never matches a target
    // with excitations.
    for row in &lines[2..] {
        assert_eq!(row.split(',').next().unwrap(), "0");
    }

    ok(
        dir.path(),
        &["plot", "--landscape", "land.csv", "--out", "land.svg"],
    );
    let svg = fs::read_to_string(dir.path().join("land.svg")).unwrap();
    assert!(svg.contains("<svg"));
    assert!(svg.ends_with("</svg>\n") || svg.ends_with("</svg>"));
}

#[test]
fn usage_errors_exit_two_and_domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();

    // Usage errors: unknown flag, missing required flag, conflicting plot
    // sources, malformed numeric value.
    for args in [
        vec!["exact", "--bogus-flag"],
        vec!["qae", "--problem", "p.json", "--register", "r.json"], // no --seed
        vec![
            "plot",
            "--hist",
            "h.csv",
            "--landscape",
            "l.csv",
            "--out",
            "o.svg",
        ],
        vec!["exact", "--problem", "p.json", "--out", "x.json", "--threads", "abc"],
    ] {
        let out = q3p(dir.path(), &args);
        assert_eq!(exit_code(&out), 2, "expected usage error for {args:?}");
        assert!(!out.stderr.is_empty());
    }

    // Domain errors: missing input file, invalid bitstring content.
    build_fixture(dir.path());
    for args in [
        vec!["exact", "--problem", "missing.json", "--out", "x.json"],
        vec![
            "landscape",
            "--register",
            "reg.json",
            "--target",
            "01x0",
            "--seed",
            "1",
            "--out",
            "l.csv",
        ],
    ] {
        let out = q3p(dir.path(), &args);
        assert_eq!(exit_code(&out), 1, "expected domain error for {args:?}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.starts_with("error: "), "got: {stderr}");
    }

    // Success paths for the informational flags.
    for args in [vec!["--help"], vec!["--version"], vec!["qae", "--help"]] {
        let out = q3p(dir.path(), &args);
        assert_eq!(exit_code(&out), 0, "expected success for {args:?}");
    }
}

#[test]
fn help_lists_every_subcommand_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let top = ok(dir.path(), &["--help"]);
    let text = String::from_utf8_lossy(&top.stdout);
    for name in [
        "synth",
        "slice",
        "register",
        "compile",
        "exact",
        "qae",
        "vqa",
        "landscape",
        "plot",
    ] {
        assert!(text.contains(name), "top-level help missing {name}");
    }

    let qae_help = ok(dir.path(), &["qae", "--help"]);
    let text = String::from_utf8_lossy(&qae_help.stdout);
    for needle in [
        "--shots",
        "[default: 1000]",
        "--noise",
        "--format",
        "[default: csv]",
        "--seed",
    ] {
        assert!(text.contains(needle), "qae help missing {needle}");
    }
}

#[test]
fn volume_slices_feed_the_register_builder() {
    let dir = tempfile::tempdir().unwrap();
    let mix = serde_json::json!({
        "grid": {"shape": [25, 25, 9], "spacing": [0.5, 0.5, 0.5], "origin": [0.0, 0.0, 0.0]},
        "components": [
            {"center": [4.0, 6.0, 2.0], "variance": 1.5},
            {"center": [8.0, 6.0, 2.0], "variance": 1.5}
        ]
    });
    fs::write(
        dir.path().join("mix3d.json"),
        serde_json::to_string(&mix).unwrap(),
    )
    .unwrap();
    ok(
        dir.path(),
        &["synth", "--components", "mix3d.json", "--out", "vol.json"],
    );

    let plane = serde_json::json!({
        "origin": [0.0, 0.0, 2.0],
        "ax1": [1.0, 0.0, 0.0],
        "ax2": [0.0, 1.0, 0.0],
        "shape": [25, 25],
        "spacing": [0.5, 0.5]
    });
    fs::write(
        dir.path().join("plane.json"),
        serde_json::to_string(&plane).unwrap(),
    )
    .unwrap();
    ok(
        dir.path(),
        &[
            "slice",
            "--density",
            "vol.json",
            "--plane",
            "plane.json",
            "--slices",
            "2",
            "--spacing",
            "0.5",
            "--out-prefix",
            "cut",
        ],
    );

    for k in 0..2 {
        let slice: serde_json::Value = read_json(&dir.path().join(format!("cut_{k}.json")));
        assert!(
            slice["frame"].is_object(),
            "slice {k} should carry its 3D frame"
        );
        assert_eq!(slice["dims"], 2);
    }
    let manifest: serde_json::Value = read_json(&dir.path().join("cut.manifest.json"));
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);

    // The through-the-centers slice supports the full downstream pipeline.
    ok(
        dir.path(),
        &[
            "register",
            "--density",
            "cut_0.json",
            "--threshold",
            "0.5",
            "--spacing",
            "6.0",
            "--pitch",
            "2.0",
            "--out",
            "sreg.json",
        ],
    );
    ok(
        dir.path(),
        &[
            "compile",
            "--density",
            "cut_0.json",
            "--register",
            "sreg.json",
            "--variance",
            "3.0",
            "--out",
            "sprob.json",
        ],
    );
    ok(
        dir.path(),
        &["exact", "--problem", "sprob.json", "--out", "sexact.json"],
    );
    let placement: Placement = read_json(&dir.path().join("sexact.json"));
    assert_eq!(placement.positions.len(), placement.count);
}
