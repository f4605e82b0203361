use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use specdamp::report::Report;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_specdamp"));
    c.env_remove("SPECDAMP_SEED");
    c
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn beam(a: f64, analyses: &str) -> String {
    format!(
        r#"{{"model":{{"type":"beam","E":1.0,"N":16,"patches":[{{"a":{a},"from":0.0,"to":1.0}}]}},
            "analyses":[{analyses}],"tolerances":{{}},"seed":0}}"#
    )
}

const ALL: &str = r#""spectrum","krein","conditions","semigroup","accumulation""#;

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn analyze_beam_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "beam.json", &beam(2.0, ALL));
    let out = dir.path().join("report");
    let o = run("analyze", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let r = read_json(&out.join("report.json"));
    let iii = &r["conditions"]["report"]["condition_iii"];
    assert_eq!(iii["holds"], true);
    assert!((iii["rhs"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let acc = &r["accumulation"];
    assert_eq!(acc["points"][0].as_f64().unwrap(), -0.5);
    let counts: Vec<u64> = acc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["counts"][0].as_u64().unwrap())
        .collect();
    assert_eq!(counts.len(), 3);
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    assert!(counts[1] >= 14);

    let csv = std::fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "index,re_lambda,im_lambda,residual,sign_type,jordan_defect,gram_min_eig"
    );
    assert_eq!(lines.count(), 32);

    let svg = std::fs::read_to_string(out.join("spectrum.svg")).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains("version=\"1.1\""));
    assert!(svg.contains("stroke-dasharray"));
    assert!(svg.contains("−E/a = -0.5000"));
    assert_eq!(svg.matches("<circle").count(), 32 + 4);
}

#[test]
fn spectrum_only_omits_other_sections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &beam(2.0, r#""spectrum""#));
    let o = run("analyze", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_json(&dir.path().join("report.json"));
    let mut keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(keys, ["model", "seed", "spectrum", "tolerances"]);
}

#[test]
fn stiffness_not_positive_definite_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"model":{"type":"generic","K":[[1.0,2.0],[2.0,1.0]],"C":[[1.0,0.0],[0.0,1.0]]},"analyses":["spectrum"]}"#,
    );
    for cmd in ["analyze", "check", "simulate"] {
        let o = run(cmd, &cfg, &dir.path().join("o"), &[]);
        assert_eq!(o.status.code(), Some(2), "{cmd}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("(A1)"), "{cmd}");
    }
    assert!(!dir.path().join("o").join("report.json").exists());
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_config(dir.path(), "ok.json", &beam(0.85, r#""conditions""#));
    let o = run("check", &ok, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.lines().any(|l| l.starts_with("(i) overdamping") && l.contains("holds")));

    let fail = write_config(dir.path(), "fail.json", &beam(0.3, r#""conditions""#));
    let o = run("check", &fail, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let table = String::from_utf8_lossy(&o.stdout);
    let row = table.lines().find(|l| l.starts_with("(iii)")).unwrap();
    assert!(row.contains("fails") && row.contains("lhs = 0.405"), "{row}");
    let c = read_json(&dir.path().join("conditions.json"));
    assert_eq!(c["all_hold"], false);
}

#[test]
fn malformed_and_unknown_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "{\"model\": ",
        r#"{"model":{"type":"beam","E":1.0,"N":16,"patches":[{"a":2.0,"from":0.0,"to":1.0}]},"analyses":["spectrum"],"colour":1}"#,
        r#"{"model":{"type":"beam","E":1.0,"N":16,"patches":[{"a":2.0,"from":0.0,"to":1.0}]},"analyses":[]}"#,
        r#"{"model":{"type":"generic","K":[[1.0]],"C":[[0.0]]},"analyses":["accumulation"]}"#,
        r#"{"model":{"type":"beam","E":1.0,"N":16,"patches":[{"a":2.0,"from":0.0,"to":0.5}]},"analyses":["spectrum"]}"#,
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{i}.json"), body);
        for cmd in ["analyze", "check"] {
            let o = run(cmd, &cfg, dir.path(), &[]);
            assert_eq!(o.status.code(), Some(2), "case {i} {cmd}: {}", String::from_utf8_lossy(&o.stderr));
            assert!(!o.stderr.is_empty());
        }
    }
    let o = run("check", &dir.path().join("missing.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "beam.json", &beam(2.0, ALL));
    assert_eq!(run("analyze", &cfg, dir.path(), &[]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let report: Report = serde_json::from_str(&text).unwrap();
    let again = specdamp::output::to_json(&report).unwrap();
    assert_eq!(again, text);

    // Every number parses to the same bits through an untyped reader too.
    fn walk(v: &serde_json::Value, out: &mut Vec<u64>) {
        match v {
            serde_json::Value::Number(n) => out.push(n.as_f64().unwrap().to_bits()),
            serde_json::Value::Array(a) => a.iter().for_each(|x| walk(x, out)),
            serde_json::Value::Object(m) => m.values().for_each(|x| walk(x, out)),
            _ => {}
        }
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    walk(&serde_json::from_str(&text).unwrap(), &mut a);
    walk(&serde_json::to_value(&report).unwrap(), &mut b);
    assert!(a.len() > 1000);
    assert_eq!(a, b);
}

#[test]
fn output_is_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "beam.json", &beam(2.0, ALL));
    let mut outputs = Vec::new();
    for threads in ["1", "4", "4"] {
        let out = dir.path().join(format!("o{}", outputs.len()));
        let o = bin()
            .env("RAYON_NUM_THREADS", threads)
            .args(["analyze", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outputs.push((
            std::fs::read(out.join("report.json")).unwrap(),
            std::fs::read(out.join("eigenvalues.csv")).unwrap(),
            std::fs::read(out.join("spectrum.svg")).unwrap(),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn seed_precedence_flag_env_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.json",
        r#"{"model":{"type":"generic","K":[[1.0]],"C":[[3.0]]},"analyses":["conditions"],"seed":7}"#,
    );
    let seed_of = |env: Option<&str>, flag: Option<&str>| {
        let out = dir.path().join("s");
        let mut c = bin();
        c.args(["analyze", "--config"]).arg(&cfg).arg("--out").arg(&out);
        if let Some(e) = env {
            c.env("SPECDAMP_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        assert_eq!(c.output().unwrap().status.code(), Some(0));
        let r = read_json(&out.join("report.json"));
        assert_eq!(r["seed"], r["conditions"]["report"]["overdamping"]["seed"]);
        r["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(None, None), 7);
    assert_eq!(seed_of(Some("11"), None), 11);
    assert_eq!(seed_of(Some("11"), Some("13")), 13);
}

fn energies(out: &Path) -> Vec<(f64, f64, String)> {
    let mut r = csv::Reader::from_path(out.join("energy.csv")).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["t", "energy", "method"]);
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap(), rec[2].to_string())
        })
        .collect()
}

#[test]
fn simulate_undamped_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "u.json",
        r#"{"model":{"type":"generic","K":[[1.0]],"C":[[0.0]]},"analyses":["semigroup"],
            "simulate":{"x0":{"vector":[1.0,0.0]},"t_max":6.283185307179586,"samples":50}}"#,
    );
    let o = run("simulate", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let e = energies(dir.path());
    assert_eq!(e.len(), 50);
    let e0 = e[0].1;
    assert!(e.iter().all(|(_, x, _)| (x - e0).abs() <= 1e-10 * e0));
    assert!(std::fs::read_to_string(dir.path().join("energy.svg")).unwrap().contains("<polyline"));
}

#[test]
fn simulate_critically_damped_eigenvector_decays_like_exp_minus_2t() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model":{"type":"generic","K":[[1.0]],"C":[[2.0]]},"analyses":["semigroup"],
            "simulate":{"x0":{"eigenvector":0},"t_max":3.0,"samples":31}}"#,
    );
    assert_eq!(run("simulate", &cfg, dir.path(), &[]).status.code(), Some(0));
    let e = energies(dir.path());
    let e0 = e[0].1;
    // The double root leaves only the stepping fallback, whose error is O(dt²).
    let rel = if e[0].2 == "exact_modal" { 1e-10 } else { 1e-5 };
    for (t, x, _) in &e {
        let want = e0 * (-2.0 * t).exp();
        assert!((x - want).abs() <= rel * e0, "t={t}: {x} vs {want}");
    }
}

#[test]
fn simulate_beam_energy_decreases_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.json",
        r#"{"model":{"type":"beam","E":1.0,"N":8,"patches":[{"a":2.0,"from":0.0,"to":1.0}]},"analyses":["semigroup"],
            "simulate":{"x0":{"modal_weights":[1,0,1,0,1,0,1,0,1,0,1,0,1,0,1,0]},"t_max":1.0}}"#,
    );
    let o = run("simulate", &cfg, dir.path(), &["--t-max", "4", "--samples", "81"]);
    assert_eq!(o.status.code(), Some(0));
    let e = energies(dir.path());
    assert_eq!(e.len(), 81);
    assert_eq!(e.last().unwrap().0, 4.0);
    assert!(e.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-12)));
    assert!(e.last().unwrap().1 < e[0].1);
}

#[test]
fn simulate_rejects_bad_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "x.json",
        r#"{"model":{"type":"generic","K":[[1.0]],"C":[[1.0]]},"analyses":["semigroup"],
            "simulate":{"x0":{"vector":[1.0]},"t_max":1.0}}"#,
    );
    assert_eq!(run("simulate", &cfg, dir.path(), &[]).status.code(), Some(2));
}
