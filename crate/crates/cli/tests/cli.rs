mod common;

use std::fs;

use common::*;
use serde_json::Value;
use sparsify_core::mtx::{read_dense, read_sparse, write_dense};
use sparsify_core::{
    compute_bins, diagnostics, gen_test_matrix, lp_pattern, sparsify, GenOptions, MatrixType, ScalarKind,
    SparsifyConfig, TestMatrixKind,
};

#[test]
fn gen_sparsify_diagnose_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mtx");
    let x = dir.path().join("x.mtx");
    let report = dir.path().join("r.json");
    run_ok(&["gen", "--kind", "paper40", "--n", "40", "--output", path_str(&a)]);
    run_ok(&[
        "sparsify", "--input", path_str(&a), "--output", path_str(&x), "--ratio", "0.8", "--p", "1",
        "--max-bins", "1000", "--impose-nullspaces", "--report", path_str(&report),
    ]);
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["report"]["rank"], 40);
    assert_eq!(r["report"]["nnz"], 597);
    assert!(r["metadata"]["timings"]["total"].is_number());

    let out = run_ok(&["diagnose", "--input", path_str(&a), "--sparse", path_str(&x)]);
    let d: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(d["diagnostics"]["rank"], 40);
    assert!(d["diagnostics"]["cond_pinv_x"].as_f64().unwrap().is_finite());
}

#[test]
fn cli_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let opts = GenOptions { seed: 3, ..GenOptions::new(9) };
    let a = gen_test_matrix(TestMatrixKind::Hermitian, &opts).unwrap();
    let input = dir.path().join("a.mtx");
    write_dense(&input, &a).unwrap();
    let out = dir.path().join("x.mtx");
    run_ok(&[
        "sparsify", "--input", path_str(&input), "--output", path_str(&out), "--ratio", "0.7", "--p", "2",
        "--max-bins", "5", "--matrix-type", "hermitian",
    ]);
    let cfg = SparsifyConfig {
        sparsity_ratio: 0.7,
        sparsity_norm_p: 2.0,
        max_num_bins: 5,
        impose_null_spaces: false,
        matrix_type: MatrixType::Hermitian,
        ..Default::default()
    };
    let (x, _) = sparsify(&read_dense(&input).unwrap(), &cfg).unwrap();
    assert_eq!(read_sparse(&out).unwrap(), x);

    let d = run_ok(&["diagnose", "--input", path_str(&input), "--sparse", path_str(&out), "--hessian"]);
    let d: Value = serde_json::from_slice(&d.stdout).unwrap();
    let lib = diagnostics(&a, &x, true).unwrap();
    assert_eq!(d["diagnostics"]["cond_pinv_x"].as_f64().unwrap(), lib.cond_pinv_x);
    assert_eq!(d["diagnostics"]["hessian_condition"].as_f64().unwrap(), lib.hessian_condition.unwrap());
}

#[test]
fn outputs_are_deterministic_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.mtx");
    run_ok(&["gen", "--kind", "rankdef", "--n", "12", "--rank", "9", "--seed", "5", "--output", path_str(&input)]);
    let mut files = Vec::new();
    for k in 0..2 {
        let x = dir.path().join(format!("x{k}.mtx"));
        let r = dir.path().join(format!("r{k}.json"));
        run_ok(&[
            "sparsify", "--input", path_str(&input), "--output", path_str(&x), "--ratio", "0.8", "--p", "1",
            "--max-bins", "16", "--impose-nullspaces", "--report", path_str(&r), "--no-timing",
        ]);
        files.push((fs::read(&x).unwrap(), fs::read(&r).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let r: Value = serde_json::from_slice(&files[0].1).unwrap();
    assert!(r.get("metadata").is_none());
    assert_eq!(r["report"]["rank"], 9);
    assert_eq!(r["report"]["null_space_imposed"], true);
}

#[test]
fn invalid_flags_fail_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.mtx");
    let out = dir.path().join("x.mtx");
    run_ok(&["gen", "--kind", "paper40", "--n", "6", "--output", path_str(&input)]);
    let cases: [(&[&str], &str); 4] = [
        (&["--ratio", "1.5", "--p", "1", "--max-bins", "3"], "--ratio"),
        (&["--ratio", "0.5", "--p", "-1", "--max-bins", "3"], "--p"),
        (&["--ratio", "0.5", "--p", "1", "--max-bins", "-2"], "--max-bins"),
        (&["--ratio", "0.5", "--p", "1", "--max-bins", "3", "--matrix-type", "banana"], "--matrix-type"),
    ];
    for (extra, flag) in cases {
        let mut args = vec!["sparsify", "--input", path_str(&input), "--output", path_str(&out)];
        args.extend_from_slice(extra);
        let res = run(&args);
        assert!(!res.status.success());
        let err = String::from_utf8_lossy(&res.stderr);
        assert!(err.contains(flag), "{flag}: {err}");
        assert!(!out.exists());
    }
    let res = run(&["sparsify", "--input", path_str(&input), "--output", path_str(&out), "--ratio", "0.5", "--p", "1", "--max-bins", "3", "--bogus"]);
    assert!(!res.status.success());
    let missing = dir.path().join("missing.mtx");
    let res = run(&["pattern", "--input", path_str(&missing), "--output", path_str(&out), "--ratio", "0.5", "--p", "1"]);
    assert!(!res.status.success());
    assert!(!out.exists());
    let res = run(&["gen", "--kind", "nope", "--output", path_str(&out)]);
    assert!(!res.status.success());
    assert!(fs::read_dir(dir.path()).unwrap().count() == 1);
}

#[test]
fn structure_violation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.mtx");
    let out = dir.path().join("x.mtx");
    run_ok(&["gen", "--kind", "paper40", "--n", "5", "--output", path_str(&input)]);
    let res = run(&[
        "sparsify", "--input", path_str(&input), "--output", path_str(&out), "--ratio", "0.5", "--p", "1",
        "--max-bins", "3", "--matrix-type", "hermitian",
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("structure"));
    assert!(!out.exists());
}

#[test]
fn pattern_and_bins_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("w.mtx");
    fs::write(&input, WORKED_EXAMPLE).unwrap();
    let pat = dir.path().join("p.mtx");
    run_ok(&["pattern", "--input", path_str(&input), "--output", path_str(&pat), "--ratio", "0.6", "--p", "1"]);
    let text = fs::read_to_string(&pat).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate pattern general\n3 4 9\n"));

    let bins = dir.path().join("b.mtx");
    run_ok(&["bins", "--input", path_str(&input), "--output", path_str(&bins), "--ratio", "0.6", "--p", "1", "--max-bins", "8"]);
    let a = read_dense(&input).unwrap();
    let lib = compute_bins(&a, &lp_pattern(&a, 0.6, 1.0).unwrap(), 8).unwrap();
    let ids: Vec<usize> = fs::read_to_string(&bins)
        .unwrap()
        .lines()
        .skip(2)
        .map(|l| l.split_whitespace().nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ids, lib.real_ids());
}

#[test]
fn complex_bins_have_two_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("c.mtx");
    run_ok(&["gen", "--kind", "complexsym", "--n", "4", "--output", path_str(&input)]);
    assert!(read_dense(&input).unwrap().kind() == ScalarKind::Complex);
    let bins = dir.path().join("b.mtx");
    run_ok(&["bins", "--input", path_str(&input), "--output", path_str(&bins), "--ratio", "1", "--p", "1", "--max-bins", "0"]);
    let text = fs::read_to_string(&bins).unwrap();
    let line = text.lines().nth(2).unwrap();
    assert_eq!(line.split_whitespace().count(), 4);
    assert!(text.lines().skip(2).any(|l| l.ends_with(" 32")));
}

#[test]
fn sweep_csv_is_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.mtx");
    run_ok(&["gen", "--kind", "paper40", "--n", "20", "--output", path_str(&input)]);
    let out = run_ok(&["sweep-bins", "--input", path_str(&input), "--ratio", "0.8", "--p", "1", "--bins", "64,4,16", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "max_bins,n_bins,cond_pinv_x,rel_pinv_diff,objective");
    let first: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(first, vec![4, 16, 64]);
}

#[test]
fn text_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.mtx");
    let x = dir.path().join("x.mtx");
    let r = dir.path().join("r.txt");
    run_ok(&["gen", "--kind", "paper40", "--n", "8", "--output", path_str(&input)]);
    run_ok(&[
        "sparsify", "--input", path_str(&input), "--output", path_str(&x), "--ratio", "0.8", "--p", "1",
        "--max-bins", "4", "--report", path_str(&r), "--report-format", "text",
    ]);
    let text = fs::read_to_string(&r).unwrap();
    assert!(text.contains("schema_version: 1"));
    assert!(text.contains("report.rank: 8"));
}
