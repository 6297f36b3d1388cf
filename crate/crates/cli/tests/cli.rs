use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lfpp(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfpp")).env("LFPP_CACHE", cache).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn manifest(out: &Path) -> Value {
    json(&out.with_file_name(format!("{}.manifest.json", out.file_name().unwrap().to_str().unwrap())))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const A_EPS: [&str; 11] = ["a-eps", "--xi", "0.2", "--eps", "0.0625", "--n", "256", "--trials", "20", "--seed", "1"];

#[test]
fn a_eps_happy_path_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let o = lfpp(&dir.path().join("cache"), &[&A_EPS[..], &["--out", s(&out)]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let est = json(&out);
    assert!(est["median"].as_f64().unwrap() > 0.0);
    assert_eq!(est["master_seed"], 1);
    let m = manifest(&out);
    assert_eq!(m["command"], "a-eps");
    assert_eq!(m["master_seed"], 1);
    assert_eq!(m["resolved_params"]["mc"]["seed"], 1);
    assert_eq!(m["resolved_params"]["mc"]["spacing"], 4.0 / 256.0);
    assert_eq!(m["supercritical"], false);
    for key in ["version", "started_at", "runtime_secs"] {
        assert!(m.get(key).is_some());
    }
}

#[test]
fn missing_xi_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lfpp(dir.path(), &["a-eps", "--eps", "0.0625", "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--xi"));
    let o = lfpp(dir.path(), &["a-eps", "--xi", "0.2", "--eps", "0.0625", "--out", "x.json", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn supercritical_xi_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.json");
    let args = ["a-eps", "--xi", "0.5", "--eps", "0.125", "--n", "128", "--trials", "20", "--out", s(&out)];
    let o = lfpp(&dir.path().join("cache"), &args);
    assert!(o.status.success());
    let m = manifest(&out);
    assert_eq!(m["supercritical"], true);
    assert!(!m["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn cache_hits_misses_and_evicts() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    assert!(lfpp(&cache, &[&A_EPS[..], &["--out", s(&a)]].concat()).status.success());
    assert_eq!(manifest(&a)["cache_hits"], 0);
    assert!(lfpp(&cache, &[&A_EPS[..], &["--out", s(&b)]].concat()).status.success());
    assert_eq!(manifest(&b)["cache_hits"], 1);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // one ulp away is a different key
    let nudged = format!("{:?}", f64::from_bits(0.0625f64.to_bits() + 1));
    let mut args = A_EPS.to_vec();
    args[4] = &nudged;
    let c = dir.path().join("c.json");
    assert!(lfpp(&cache, &[&args[..], &["--out", s(&c)]].concat()).status.success());
    assert_eq!(manifest(&c)["cache_hits"], 0);

    let info = lfpp(&cache, &["cache", "info"]);
    let index: Value = serde_json::from_slice(&info.stdout).unwrap();
    assert_eq!(index["entries"].as_array().unwrap().len(), 2);

    // truncate every artifact: the next lookup misses, evicts and recomputes
    for e in std::fs::read_dir(&cache).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "lfpc") {
            let bytes = std::fs::read(&p).unwrap();
            std::fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
        }
    }
    let d = dir.path().join("d.json");
    let o = lfpp(&cache, &[&A_EPS[..], &["--out", s(&d)]].concat());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("evicting"));
    assert_eq!(manifest(&d)["cache_hits"], 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&d).unwrap());
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let base = ["--no-cache", "--eps", "0.125,0.0625"];
    let mut one = A_EPS.to_vec();
    one.splice(3..5, []);
    let o1 = lfpp(dir.path(), &[&one[..], &base, &["--threads", "1", "--out", s(&a)]].concat());
    let o2 = lfpp(dir.path(), &[&one[..], &base, &["--threads", "3", "--out", s(&b)]].concat());
    assert!(o1.status.success() && o2.status.success(), "{}", String::from_utf8_lossy(&o1.stderr));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(manifest(&a)["threads"], 1);
    assert_eq!(manifest(&b)["threads"], 3);
}

#[test]
fn field_sample_then_dist_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("f.lfpf");
    let o = lfpp(dir.path(), &["field", "sample", "--n", "128", "--seed", "7", "--out", s(&field)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(&std::fs::read(&field).unwrap()[..4], b"LFPF");

    let (out, path) = (dir.path().join("d.json"), dir.path().join("p.csv"));
    let o = lfpp(
        dir.path(),
        &[
            "dist",
            "--field",
            s(&field),
            "--eps",
            "0.0625",
            "--xi",
            "0.2",
            "--from",
            "0.25,0.25",
            "--to",
            "0.75,0.75",
            "--emit-path",
            s(&path),
            "--out",
            s(&out),
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = json(&out)["value"].as_f64().unwrap();
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("idx,x,y,cum_length"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert!((last[3] - d).abs() <= 1e-12 * d);

    let within = lfpp(
        dir.path(),
        &[
            "dist",
            "--field",
            s(&field),
            "--eps",
            "0.0625",
            "--xi",
            "0.2",
            "--from",
            "0.7,0.5",
            "--to",
            "0.3,0.5",
            "--within",
            "annulus:0.5,0.5,0.1,0.3",
        ],
    );
    assert!(within.status.success(), "{}", String::from_utf8_lossy(&within.stderr));
    let v: Value = serde_json::from_slice(&within.stdout).unwrap();
    assert!(v["value"].as_f64().unwrap() > 0.0);

    let outside = lfpp(
        dir.path(),
        &[
            "dist",
            "--field",
            s(&field),
            "--eps",
            "0.0625",
            "--xi",
            "0.2",
            "--from",
            "0.5,0.5",
            "--to",
            "0.3,0.5",
            "--within",
            "annulus:0.5,0.5,0.1,0.3",
        ],
    );
    assert_eq!(outside.status.code(), Some(1));
}

#[test]
fn fit_reads_a_directory_of_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let ests = dir.path().join("ests");
    std::fs::create_dir(&ests).unwrap();
    let (xi, q) = (0.2, 2.5);
    for k in 3..=6 {
        let e = 2f64.powi(-k);
        let est = serde_json::json!({
            "epsilon": e, "median": e.powf(1.0 - xi * q), "trials": 200, "ci_lo": 0.0, "ci_hi": 1.0,
            "master_seed": 1, "xi": xi, "n": 512, "spacing": 4.0 / 512.0, "localized": false,
        });
        std::fs::write(ests.join(format!("a{k}.json")), est.to_string()).unwrap();
    }
    std::fs::write(ests.join("a3.json.manifest.json"), "{}").unwrap();
    let out = dir.path().join("fit.json");
    let o = lfpp(dir.path(), &["fit", "--in", s(&ests), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit = json(&out);
    assert!((fit["q_hat"].as_f64().unwrap() - q).abs() < 1e-9);

    std::fs::remove_file(ests.join("a6.json")).unwrap();
    std::fs::remove_file(ests.join("a5.json")).unwrap();
    let o = lfpp(dir.path(), &["fit", "--in", s(&ests), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn experiment_reports_csv_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(&cfg, r#"{"field": {"n": 128, "seed": 3}, "eps_ladder": [0.25, 0.125, 0.0625]}"#).unwrap();
    let (out, csv) = (dir.path().join("r.json"), dir.path().join("rows.csv"));
    let args = ["exp", "field_sup_bound", "--config", s(&cfg), "--out", s(&out), "--csv", s(&csv), "--emit-gnuplot"];
    let o = lfpp(dir.path(), &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&out);
    assert_eq!(rep["name"], "field_sup_bound");
    assert_eq!(rep["params"]["config"]["eta"], 0.1);
    assert!(rep.get("runtime_secs").is_none());
    assert_eq!(manifest(&out)["master_seed"], 3);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("epsilon,sup,sup_localized,log_term,c"));
    assert_eq!(text.lines().count(), 4);
    assert!(dir.path().join("rows.gp").exists());

    let first = std::fs::read(&out).unwrap();
    assert!(lfpp(dir.path(), &args).status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());

    std::fs::write(&cfg, "{\n  \"eta\": 0.1,\n  oops\n}").unwrap();
    let o = lfpp(dir.path(), &args);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = lfpp(dir.path(), &["exp", "nonexistent", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unreadable_field_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lfpf");
    std::fs::write(&bad, b"LFPX0000").unwrap();
    let o =
        lfpp(dir.path(), &["dist", "--field", s(&bad), "--eps", "0.1", "--xi", "0.2", "--from", "0,0", "--to", "1,1"]);
    assert_eq!(o.status.code(), Some(2));
}
