//! End-to-end tests of the `pdm` binary.

use std::path::Path;
use std::process::{Command, Output};

use pdm::rollcall::save_wide_csv;
use pdm::sim::{simulate, SimConfig};

fn pdm_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdm"))
}

fn run(args: &[&str]) -> Output {
    pdm_bin().args(args).output().expect("spawn pdm")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "pdm failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_dir_sorted(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn dirs_byte_identical(a: &Path, b: &Path) {
    let names_a = read_dir_sorted(a);
    assert_eq!(names_a, read_dir_sorted(b));
    for name in names_a {
        let bytes_a = std::fs::read(a.join(&name)).unwrap();
        let bytes_b = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(bytes_a, bytes_b, "{name} differs between runs");
    }
}

fn write_fixture_csv(path: &Path) {
    let sim = simulate(&SimConfig {
        n_members: 24,
        n_votes: 80,
        alpha: 12.0,
        rng_seed: 5,
        ..SimConfig::default()
    })
    .unwrap();
    save_wide_csv(&sim.vote_matrix, path).unwrap();
}

#[test]
fn analyze_writes_all_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("votes.csv");
    write_fixture_csv(&input);

    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for out in [&out1, &out2] {
        let output = run(&[
            "analyze",
            "--input",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "3",
        ]);
        assert_success(&output);
    }
    for required in [
        "manifest.json",
        "decomposition.json",
        "dims.csv",
        "eval.csv",
        "separating_votes.csv",
        "plot_layer1.csv",
    ] {
        assert!(out1.join(required).exists(), "{required} missing");
    }
    dirs_byte_identical(&out1, &out2);

    // eval re-scores the stored decomposition to the same table.
    let eval_out = dir.path().join("eval");
    let output = run(&[
        "eval",
        "--input",
        input.to_str().unwrap(),
        "--decomposition",
        out1.join("decomposition.json").to_str().unwrap(),
        "--out",
        eval_out.to_str().unwrap(),
        "--seed",
        "3",
    ]);
    assert_success(&output);
    assert_eq!(
        std::fs::read(out1.join("eval.csv")).unwrap(),
        std::fs::read(eval_out.join("eval.csv")).unwrap()
    );

    let eval_csv = std::fs::read_to_string(eval_out.join("eval.csv")).unwrap();
    let minority_row = eval_csv
        .lines()
        .find(|l| l.starts_with("minority,"))
        .expect("minority row");
    let apre: f64 = minority_row.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(apre, 0.0);
}

#[test]
fn analyze_perfect_loyalty_predicts_over_99_percent() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("votes.csv");
    let sim = simulate(&SimConfig {
        n_members: 30,
        n_votes: 100,
        alpha: 1e9, // loyalty is one to within rounding
        rng_seed: 8,
        ..SimConfig::default()
    })
    .unwrap();
    save_wide_csv(&sim.vote_matrix, &input).unwrap();
    let out = dir.path().join("run");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_success(&output);
    let eval_csv = std::fs::read_to_string(out.join("eval.csv")).unwrap();
    let row = eval_csv
        .lines()
        .find(|l| l.starts_with("pdm_one_layer,"))
        .expect("one-layer row");
    let pc: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!(pc >= 99.0, "one-layer percent correct {pc}");
}

#[test]
fn analyze_max_layers_one_has_no_layer2_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("votes.csv");
    write_fixture_csv(&input);
    let out = dir.path().join("run");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--max-layers",
        "1",
    ]);
    assert_success(&output);
    assert!(!out.join("plot_layer2.csv").exists());
    assert!(!out.join("separating_votes_layer2.csv").exists());
    let dims = std::fs::read_to_string(out.join("dims.csv")).unwrap();
    let series: Vec<&str> = dims
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(series, vec!["layer1"]);
}

#[test]
fn analyze_dump_spectral_writes_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("votes.csv");
    write_fixture_csv(&input);
    let out = dir.path().join("run");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--dump-spectral",
    ]);
    assert_success(&output);
    for name in [
        "spectral_correlation.csv",
        "spectral_affinity.csv",
        "spectral_laplacian.csv",
        "spectral_eigenvalues.csv",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
}

#[test]
fn analyze_reports_bad_cell_location() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("votes.csv");
    std::fs::write(
        &input,
        "id,name,party,region,v1,v2\na,Alice,D,,1,2\nb,Bob,R,,-1,1\n",
    )
    .unwrap();
    let out = dir.path().join("run");
    let output = run(&[
        "analyze",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).expect("JSON error output");
    let msg = err["error"].as_str().unwrap();
    assert!(msg.contains("row 1"), "missing row location: {msg}");
    assert!(msg.contains("v2"), "missing column name: {msg}");
    assert_eq!(err["kind"], "input");
}

#[test]
fn voteview_format_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let members = dir.path().join("members.csv");
    let votes = dir.path().join("votes.csv");
    // Six members, ten contested roll calls split along two blocs.
    let mut members_csv = String::from("icpsr,bioname,party_code,state_abbrev\n");
    for i in 0..6 {
        members_csv.push_str(&format!("{},MEMBER {i},{},ST\n", 100 + i, 100 + (i % 2)));
    }
    std::fs::write(&members, members_csv).unwrap();
    let mut votes_csv = String::from("icpsr,rollnumber,cast_code\n");
    for roll in 1..=10 {
        for i in 0..6 {
            // Bloc = parity of member index; direction alternates by roll.
            let yea = (i % 2 == 0) == (roll % 2 == 0);
            let cast = if yea { 1 } else { 6 };
            votes_csv.push_str(&format!("{},{roll},{cast}\n", 100 + i));
        }
    }
    std::fs::write(&votes, votes_csv).unwrap();

    let out = dir.path().join("run");
    let output = run(&[
        "analyze",
        "--format",
        "voteview",
        "--members",
        members.to_str().unwrap(),
        "--votes",
        votes.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_success(&output);
    assert!(out.join("decomposition.json").exists());
}

#[test]
fn simulate_deterministic_and_validates_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("s1");
    let out2 = dir.path().join("s2");
    for out in [&out1, &out2] {
        let output = run(&[
            "simulate",
            "--alpha-grid",
            "2:8:3",
            "--trials",
            "2",
            "--members",
            "16",
            "--votes",
            "40",
            "--seed",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_success(&output);
    }
    dirs_byte_identical(&out1, &out2);
    for name in ["experiment.csv", "fiedler_plot.csv", "stats.json"] {
        assert!(out1.join(name).exists(), "{name} missing");
    }

    // Invalid grid (alpha must be positive).
    let output = run(&[
        "simulate",
        "--alpha-grid",
        "0:5:1",
        "--out",
        dir.path().join("bad").to_str().unwrap(),
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("alpha grid") || stderr.contains("grid"));
}

#[test]
fn eval_missing_decomposition_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("votes.csv");
    write_fixture_csv(&input);
    let output = run(&[
        "eval",
        "--input",
        input.to_str().unwrap(),
        "--decomposition",
        dir.path().join("nope.json").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(err["kind"], "io");
}

#[test]
fn seed_env_var_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let out_env = dir.path().join("env");
    let out_flag = dir.path().join("flag");
    let output = pdm_bin()
        .args([
            "simulate",
            "--alpha-grid",
            "3:3:1",
            "--trials",
            "1",
            "--members",
            "12",
            "--votes",
            "30",
            "--out",
            out_env.to_str().unwrap(),
        ])
        .env("PDM_SEED", "42")
        .output()
        .unwrap();
    assert_success(&output);
    let output = run(&[
        "simulate",
        "--alpha-grid",
        "3:3:1",
        "--trials",
        "1",
        "--members",
        "12",
        "--votes",
        "30",
        "--seed",
        "42",
        "--out",
        out_flag.to_str().unwrap(),
    ]);
    assert_success(&output);
    dirs_byte_identical(&out_env, &out_flag);
}
