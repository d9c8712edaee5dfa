use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn npc_minres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npc-minres"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn write(path: &Path, text: &str) -> String {
    std::fs::write(path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn read_vector(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.trim().parse().unwrap())
        .collect()
}

const IDENTITY: &str =
    "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n";
const NEG_IDENTITY: &str =
    "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 -1\n2 2 -1\n3 3 -1\n";

#[test]
fn identity_is_solved_in_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir.path().join("identity.mtx"), IDENTITY);
    let b = write(&dir.path().join("e1.txt"), "1\n0\n0\n");
    let x = dir.path().join("x.txt");
    let out = npc_minres(&["solve", &a, &b, "--out", x.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("outcome: solution\n"), "{text}");
    assert!(text.contains("iterations: 1\n"), "{text}");
    assert_eq!(read_vector(&x), vec![1.0, 0.0, 0.0]);
}

#[test]
fn negative_identity_returns_rhs_as_npc_direction() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir.path().join("neg_identity.mtx"), NEG_IDENTITY);
    let b = write(&dir.path().join("b.txt"), "1\n-2\n0.5\n");
    let p = dir.path().join("npc.txt");
    let out = npc_minres(&[
        "solve",
        &a,
        &b,
        "--stop-on-npc",
        "--out",
        p.to_str().unwrap(),
        "--json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rec = json(&out);
    assert_eq!(rec["summary"]["outcome"], "npc_direction");
    assert_eq!(rec["summary"]["iterations"], 1);
    assert_eq!(rec["summary"]["first_npc"], 1);
    assert_eq!(read_vector(&p), vec![1.0, -2.0, 0.5]);
}

#[test]
fn dense_text_matrices_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(&dir.path().join("a.txt"), "# diag(2, 4)\n2 0\n0 4\n");
    let out = npc_minres(&["solve", &a, "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rec = json(&out);
    assert_eq!(rec["summary"]["outcome"], "solution");
    assert!(
        rec["summary"]["explicit_relative_residual"]
            .as_f64()
            .unwrap()
            < 1e-12
    );
}

#[test]
fn input_errors_name_the_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        &dir.path().join("bad.mtx"),
        "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n2 2 oops\n",
    );
    let out = npc_minres(&["solve", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.mtx") && err.contains("line 4"), "{err}");

    let a = write(&dir.path().join("identity.mtx"), IDENTITY);
    let b = write(&dir.path().join("short.txt"), "1\n2\n");
    let out = npc_minres(&["solve", &a, &b]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("2 entries"), "{}", stderr(&out));
}

#[test]
fn fig1_export_round_trips_through_solve() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("fig1");
    let out = npc_minres(&["fig1", "--seed", "3", "--out", outdir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rec = json(&out);
    assert_eq!(rec["config"]["seed"], 3);
    let runs = rec["summary"].as_array().unwrap();
    assert_eq!(runs.len(), 3);
    for run in runs {
        assert_eq!(run["violations"], 0, "{run}");
    }
    for path in rec["outputs"].as_array().unwrap() {
        assert!(Path::new(path.as_str().unwrap()).exists());
    }

    for run in runs {
        let name = run["system"].as_str().unwrap();
        let mtx = outdir.join(format!("fig1_{name}.mtx"));
        let rhs = outdir.join("fig1_rhs.txt");
        let out = npc_minres(&[
            "solve",
            mtx.to_str().unwrap(),
            rhs.to_str().unwrap(),
            "--continue",
            "--rtol",
            "0",
            "--reorth",
            "--json",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let s = &json(&out)["summary"];
        assert_eq!(s["outcome"], run["outcome"], "{name}");
        assert_eq!(s["iterations"], run["iterations"], "{name}");
        assert_eq!(s["first_npc"], run["first_npc"], "{name}");
        assert_eq!(s["relative_residual"], run["final_rel_residual"], "{name}");
    }
}

#[test]
fn verify_exit_status_reflects_violations() {
    let out = npc_minres(&["verify", "--seed", "1", "--trials", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let rec = json(&out);
    assert_eq!(rec["summary"]["passed"], true);
    assert_eq!(rec["summary"]["instances"], 7);

    let out = npc_minres(&["verify", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["summary"]["instances"], 3);

    let out = npc_minres(&["verify", "--trials", "4", "--inject-givens-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let rec = json(&out);
    assert_eq!(rec["summary"]["passed"], false);
    let first = &rec["summary"]["first_violations"][0];
    assert!(first["check"].as_str().unwrap().contains('.'), "{first}");
}

#[test]
fn newton_runs_a_small_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir.path().join("small.toml"),
        "seed = 4\nregularizers = [\"l2\", \"nonconvex\"]\n\n[data]\nn = 80\nd = 6\n",
    );
    let outdir = dir.path().join("newton");
    let out = npc_minres(&["newton", &cfg, "--out", outdir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rec = json(&out);
    assert_eq!(rec["config"]["seed"], 4);
    let runs = rec["summary"]["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    for run in runs {
        assert_eq!(run["status"], "converged", "{run}");
        // only the NPC variant backtracks on f itself
        if run["variant"] == "newton_mr" {
            assert_eq!(run["f_decreasing"], true, "{run}");
        }
    }
    let csv = std::fs::read_to_string(outdir.join("newton_l2_newton_mr.csv")).unwrap();
    assert!(csv.starts_with("iter,f,grad_norm,step,"), "{csv}");
}

#[test]
fn newton_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir.path().join("typo.toml"),
        "seeed = 1\n[data]\nsamples = 10\nd = 3\n",
    );
    let out = npc_minres(&[
        "newton",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("seeed") && err.contains("data.samples"),
        "{err}"
    );
    assert!(!dir.path().join("o").exists());
}
