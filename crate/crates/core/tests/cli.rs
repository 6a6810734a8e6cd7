use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use plato_cone::io::{read_path, Record};

const BIN: &str = env!("CARGO_BIN_EXE_plato-cone");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("PLATO_CONE_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn sample_gamma_writes_files_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "sample", "gamma", "--theta", "1", "--window", "0,1", "--epsilon", "1e-8", "--seed", "7",
        "--count", "3", "--out", out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec![
            "sample-7.jsonl",
            "sample-7.report.json",
            "sample-8.jsonl",
            "sample-8.report.json",
            "sample-9.jsonl",
            "sample-9.report.json"
        ]
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sample-8.report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 8);
    assert_eq!(report["epsilon"], 1e-8);
    let measure = read_path(&dir.path().join("sample-8.jsonl")).unwrap();
    let Record::Measure(m) = measure else { panic!("expected a measure") };
    assert_eq!(report["atom_count"], m.len());
}

#[test]
fn negative_theta_names_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sample", "gamma", "--theta", "-1", "--window", "0,1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--theta"));
}

#[test]
fn bad_window_and_epsilon_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["sample", "gamma", "--window", "1,0", "--out", out])), 2);
    assert_eq!(code(&run(&["sample", "gamma", "--window", "0,1", "--epsilon", "2", "--out", out])), 2);
    assert_eq!(code(&run(&["sample", "gamma", "--window", "0,1", "--dim", "2", "--out", out])), 2);
    assert_eq!(code(&run(&["sample", "bogus", "--window", "0,1"])), 2);
}

#[test]
fn seed_env_overrides_flag() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args(["sample", "poisson", "--window", "0,1,0,1", "--seed", "1", "--out", a.path().to_str().unwrap()])
        .env("PLATO_CONE_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(a.path().join("sample-99.jsonl").exists());
    let o = run(&["sample", "poisson", "--window", "0,1,0,1", "--seed", "99", "--out", b.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(a.path().join("sample-99.jsonl")).unwrap(),
        fs::read(b.path().join("sample-99.jsonl")).unwrap()
    );
}

#[test]
fn reflect_round_trip_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    // unsorted input; canonical output sorts by position
    write(
        &p("in.jsonl"),
        "{\"d\":1,\"kind\":\"plato\"}\n{\"s\":2.0,\"x\":[1.0]}\n{\"s\":0.5,\"x\":[-1.0]}\n",
    );
    let ps = |n: &str| p(n).to_str().unwrap().to_owned();
    assert_eq!(code(&run(&["reflect", "--in", &ps("in.jsonl"), "--out", &ps("m.jsonl")])), 0);
    assert_eq!(
        fs::read_to_string(p("m.jsonl")).unwrap(),
        "{\"d\":1,\"kind\":\"measure\"}\n{\"w\":0.5,\"x\":[-1.0]}\n{\"w\":2.0,\"x\":[1.0]}\n"
    );
    assert_eq!(code(&run(&["reflect", "--in", &ps("m.jsonl"), "--out", &ps("back.jsonl")])), 0);
    let canonical = Record::Plato(match read_path(&p("in.jsonl")).unwrap() {
        Record::Plato(x) => x,
        _ => unreachable!(),
    })
    .to_jsonl();
    assert_eq!(fs::read_to_string(p("back.jsonl")).unwrap(), canonical);

    write(&p("bad.jsonl"), "{\"d\":1,\"kind\":\"configuration\"}\n{\"s\":1.0,\"x\":[0.0]}\n{\"s\":2.0,\"x\":[0.0]}\n");
    let o = run(&["reflect", "--in", &ps("bad.jsonl"), "--out", &ps("x.jsonl")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[0.0]"));

    write(&p("empty.jsonl"), "{\"d\":2,\"kind\":\"configuration\"}\n");
    assert_eq!(code(&run(&["reflect", "--in", &ps("empty.jsonl"), "--out", &ps("z.jsonl")])), 0);
    assert_eq!(fs::read_to_string(p("z.jsonl")).unwrap(), "{\"d\":2,\"kind\":\"measure\"}\n");

    write(&p("garbage.jsonl"), "not json\n");
    assert_eq!(code(&run(&["reflect", "--in", &ps("garbage.jsonl"), "--out", &ps("g.jsonl")])), 3);
    assert_eq!(code(&run(&["reflect", "--in", &ps("missing.jsonl"), "--out", &ps("g.jsonl")])), 3);
}

#[test]
fn restrict_and_pair() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();
    write(
        Path::new(&p("g.jsonl")),
        "{\"d\":1,\"kind\":\"configuration\"}\n{\"s\":1.5,\"x\":[0.2]}\n{\"s\":0.25,\"x\":[0.8]}\n{\"s\":3.0,\"x\":[5.0]}\n",
    );
    assert_eq!(code(&run(&["restrict", "--in", &p("g.jsonl"), "--window", "0,1", "--out", &p("r.jsonl")])), 0);
    let Record::Configuration(r) = read_path(Path::new(&p("r.jsonl"))).unwrap() else { panic!() };
    assert_eq!(r.len(), 2);

    let o = run(&["pair", "--in", &p("g.jsonl"), "--function", "one"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["value"], 3.0);
    let o = run(&["pair", "--in", &p("g.jsonl"), "--function", "mark", "--window", "0,1"]);
    assert_eq!(json(&o)["value"], 1.75);

    assert_eq!(code(&run(&["reflect", "--in", &p("g.jsonl"), "--out", &p("m.jsonl")])), 0);
    let o = run(&["pair", "--in", &p("m.jsonl"), "--function", "mark", "--window", "0,1"]);
    assert_eq!(json(&o)["value"], 1.75);
    assert_eq!(json(&o)["kind"], "measure");

    assert_eq!(code(&run(&["pair", "--in", &p("g.jsonl"), "--function", "bump"])), 2);
    assert_eq!(code(&run(&["restrict", "--in", &p("g.jsonl"), "--window", "0,1,0,1", "--out", &p("q.jsonl")])), 2);
}

#[test]
fn stats_small_sample_and_mixed_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let outs = out.to_str().unwrap();
    assert_eq!(code(&run(&["sample", "gamma", "--window", "0,1", "--count", "10", "--out", outs])), 0);
    let o = run(&["stats", "--in", outs, "--window", "0,1", "--theta", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["n"], 10);
    assert!(r["note"].as_str().unwrap().contains("insufficient n"));
    assert!(r["ks_pass"].is_null());

    write(&out.join("zz.jsonl"), "{\"d\":1,\"kind\":\"configuration\"}\n");
    assert_eq!(code(&run(&["stats", "--in", outs, "--window", "0,1"])), 2);
}

#[test]
fn converge_defaults_and_guards() {
    let o = run(&["converge"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["converged"], true);
    assert_eq!(r["limit_pinpointing"], false);
    assert_eq!(r["terms_pinpointing"], true);
    assert_eq!(r["verdict"], "consistent with convergence");
    assert_eq!(r["discrepancies"].as_array().unwrap().len(), 1000);

    let o = run(&["converge", "--tol", "1e-9", "--n-max", "10"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["converged"], false);

    let o = run(&["converge", "--s1", "1", "--s2", "1"]);
    assert_eq!(code(&o), 2);

    let o = run(&["converge", "--x0", "0.5,-1", "--n-max", "300"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["converged"], true);
}
