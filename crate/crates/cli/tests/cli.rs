use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mrfuq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrfuq"))
        .current_dir(dir)
        .args(args)
        .env_remove("MRFUQ_ENUM_CAP")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = mrfuq(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn csv_schemas_are_pinned() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["medical", "--a", "-1:1:0.5", "--out", "m"]);
    ok(d, &["ising", "band", "--h", "-0.5:0.5:0.5", "--out", "b"]);
    ok(d, &["ising", "finite", "--L", "6", "--h", "0", "--out", "f"]);
    ok(d, &["ising", "coarse", "--gamma", "0.25", "--out", "c"]);
    ok(d, &["ising", "longrange", "--out", "l"]);
    let golden = [
        ("m/medical.csv", "a,p_ii,p_u,type1_kl,type1_lower,type1_upper,type2_kl,type2_lower,type2_upper"),
        ("b/band.csv", "h,m_baseline,m_baseline_minus,m_baseline_plus,lower,upper,method,lambda_star_lower,lambda_star_upper"),
        (
            "f/finite.csv",
            "h,method,baseline,lower,upper,perturbed,inside,eta,prefactor,script_f,r_f,lambda_star_lower,lambda_star_upper",
        ),
        (
            "c/coarse.csv",
            "gamma,block_side,side,delta1,delta2,max_offblock_deviation,max_diagonal_deviation,delta1_holds,delta2_holds,max_energy_ratio,ratio_bound,pairs_checked,pairs_skipped",
        ),
        ("l/longrange.csv", "gamma,a,per_site,c,kappa_bound"),
    ];
    for (file, want) in golden {
        assert_eq!(header(&d.join(file)), want, "{file}");
        let dir = Path::new(file).parent().unwrap();
        let m = json(&d.join(dir).join("manifest.json"));
        for key in ["command_line", "version", "seed", "enumeration_cap", "inputs", "outputs", "wall_time_seconds"] {
            assert!(m.get(key).is_some(), "{file}: manifest lacks {key}");
        }
        let listed = &m["outputs"][0];
        let bytes = fs::read(d.join(file)).unwrap();
        assert_eq!(listed["path"], Path::new(file).file_name().unwrap().to_str().unwrap());
        assert_eq!(listed["sha256"].as_str().unwrap().len(), 64);
        assert!(!bytes.is_empty());
    }
}

#[test]
fn repeated_runs_give_identical_digests() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    for out in ["r1", "r2"] {
        ok(d, &["ising", "coarse", "--gamma", "0.25,0.0625", "--seed", "9", "--out", out]);
        ok(d, &["medical", "--p-ii", "0:0.8:0.1", "--a", "0", "--out", &format!("{out}m")]);
    }
    let digests = |dir: &str| json(&d.join(dir).join("manifest.json"))["outputs"].clone();
    assert_eq!(digests("r1"), digests("r2"));
    assert_eq!(digests("r1m"), digests("r2m"));
    assert_eq!(json(&d.join("r1/manifest.json"))["seed"], 9);
}

#[test]
fn band_has_both_branches_at_zero() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["ising", "band", "--beta", "1.1", "--J", "1", "--a", "0.1", "--h", "-2:2:0.02", "--svg", "--out", "b"]);
    let r = rows(&d.join("b/band.csv"));
    assert_eq!(r.len(), 402);
    let zero: Vec<_> = r.iter().filter(|x| x[0] == "0").collect();
    assert_eq!(zero.len(), 2);
    for z in zero {
        assert_eq!(z[1], "");
        assert!((f(&z[2]) + f(&z[3])).abs() < 1e-12 && f(&z[3]) > 0.5);
        assert!(f(&z[4]) <= f(&z[2]) && f(&z[3]) <= f(&z[5]));
    }
    assert!(fs::read_to_string(d.join("b/band.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn finite_report_is_sandwich_verified() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["ising", "finite", "--d", "1", "--L", "12", "--gamma", "0.25", "--out", "f"]);
    for r in rows(&d.join("f/finite.csv")) {
        assert_eq!(r[6], "true", "{r:?}");
    }
}

#[test]
fn bound_against_identical_alternative_collapses() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["medical", "--a", "0.3", "--export-models", "--out", "m"]);
    ok(d, &["bound", "--model", "m/base.mrf", "--alt", "m/base.mrf", "--qoi", "indicator:A=0", "--out", "b"]);
    let b = json(&d.join("b/bound.json"));
    assert_eq!(b["kl"], 0.0);
    let mean = b["base_mean"].as_f64().unwrap();
    assert!((b["lower"]["value"].as_f64().unwrap() - mean).abs() < 1e-9);
    assert!((b["upper"]["value"].as_f64().unwrap() - mean).abs() < 1e-9);
    assert_eq!(json(&d.join("b/manifest.json"))["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn medical_fixtures_match_closed_form() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["medical", "--a", "0.3", "--p-u", "0.05", "--export-models", "--out", "m"]);
    let row = &rows(&d.join("m/medical.csv"))[0];
    for (alt, cols) in [("type1", (3, 4, 5)), ("type2", (6, 7, 8))] {
        let out = format!("b{alt}");
        ok(d, &["bound", "--model", "m/base.mrf", "--alt", &format!("m/{alt}.mrf"), "--qoi", "indicator:A=0", "--out", &out]);
        let b = json(&d.join(&out).join("bound.json"));
        assert!((b["kl"].as_f64().unwrap() - f(&row[cols.0])).abs() < 1e-10, "{alt}");
        assert!((b["lower"]["value"].as_f64().unwrap() - f(&row[cols.1])).abs() < 1e-8, "{alt}");
        assert!((b["upper"]["value"].as_f64().unwrap() - f(&row[cols.2])).abs() < 1e-8, "{alt}");
        let alt_mean = b["alt_mean"].as_f64().unwrap();
        assert!(b["lower"]["value"].as_f64().unwrap() <= alt_mean && alt_mean <= b["upper"]["value"].as_f64().unwrap());
    }
}

#[test]
fn eta_mode_matches_grid_scan() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(d, &["medical", "--a", "0", "--export-models", "--out", "m"]);
    ok(d, &["bound", "--model", "m/base.mrf", "--eta", "0.05", "--qoi", "indicator:A=0", "--out", "b"]);
    let b = json(&d.join("b/bound.json"));
    // Event of probability 0.3: Λ(λ) = log(0.3 e^λ + 0.7).
    let (p, eta) = (0.3f64, 0.05);
    let scan = |s: f64| {
        (0..10_000)
            .map(|k| {
                let l = (1e-8f64.ln() + (1e8f64.ln() - 1e-8f64.ln()) * k as f64 / 9999.0).exp();
                ((p * (s * l).exp() + (1.0 - p)).ln() + eta) / l
            })
            .fold(f64::INFINITY, f64::min)
    };
    assert!((b["upper"]["value"].as_f64().unwrap() - scan(1.0)).abs() < 1e-6);
    assert!((b["lower"]["value"].as_f64().unwrap() + scan(-1.0)).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    fs::write(d.join("bad.mrf"), "nodes 2\ncards 2 x\n").unwrap();
    fs::write(d.join("a.mrf"), "nodes 3\ncards 2 2 2\nedge 0 1\nedge 1 2\nfactor 0 1\nweight 1\ntable 0 1 1 0\nfactor 1 2\nweight 1\ntable 0 1 1 0\n").unwrap();
    fs::write(d.join("b.mrf"), "nodes 3\ncards 2 2 2\nedge 0 1\nedge 0 2\nfactor 0 1\nweight 1\ntable 0 1 1 0\nfactor 0 2\nweight 1\ntable 0 1 1 0\n").unwrap();
    let code = |args: &[&str]| mrfuq(d, args).status.code().unwrap();
    assert_eq!(code(&["bound", "--model", "bad.mrf", "--eta", "0.1", "--qoi", "sum"]), 2);
    assert_eq!(code(&["bound", "--model", "missing.mrf", "--eta", "0.1", "--qoi", "sum"]), 2);
    assert_eq!(code(&["bound", "--model", "a.mrf", "--eta", "0.1", "--qoi", "state:7"]), 2);
    assert_eq!(code(&["bound", "--model", "a.mrf", "--alt", "b.mrf", "--qoi", "sum"]), 4);
    assert_eq!(code(&["medical", "--a", "1.5"]), 2);
    assert_eq!(code(&["ising", "band", "--h-offset", "1", "--method", "theorem", "--out", "x"]), 4);
    assert_eq!(code(&["ising", "band", "--h", "1:0:0.1"]), 2);
    let capped = Command::new(env!("CARGO_BIN_EXE_mrfuq"))
        .current_dir(d)
        .args(["ising", "finite", "--L", "12", "--out", "x"])
        .env("MRFUQ_ENUM_CAP", "1000")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
}
