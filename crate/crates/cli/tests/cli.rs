use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fqrig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fqrig")).args(args).output().unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", s(&out)]);
    let o = fqrig(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn extract(dir: &TempDir, config: &Path) -> PathBuf {
    let cert = path(dir, "cert.json");
    let o = fqrig(&["extract", s(config), "-o", s(&cert)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    cert
}

#[test]
fn round_trip_for_every_kind() {
    let dir = TempDir::new().unwrap();
    for (kind, np) in [
        ("uniform-random", "30"),
        ("hyperplane-planted", "49"),
        ("quadric-planted", "42"),
        ("reflected-pairs", "49"),
    ] {
        let config = gen(&dir, "c.json", &["--kind", kind, "--q", "7", "--np", np, "--ns", "14", "--seed", "1"]);
        let analyze = fqrig(&["analyze", s(&config)]);
        assert!(analyze.status.success());
        let stats: serde_json::Value = serde_json::from_slice(&analyze.stdout).unwrap();
        assert_eq!(stats["points"], serde_json::json!(np.parse::<u64>().unwrap()));
        let cert = extract(&dir, &config);
        let v = fqrig(&["verify", s(&config), s(&cert)]);
        assert_eq!(v.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&v.stderr));
        assert!(String::from_utf8_lossy(&v.stdout).starts_with("OK:"));
    }
}

#[test]
fn reflected_pairs_certificate_names_the_plant() {
    let dir = TempDir::new().unwrap();
    let config = gen(&dir, "c.json", &["--kind", "reflected-pairs", "--q", "7", "--d", "3", "--np", "49", "--ns", "20", "--seed", "1"]);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&config).unwrap()).unwrap();
    let cert: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(extract(&dir, &config)).unwrap()).unwrap();
    assert_ne!(cert["case"], "no-signal");
    let plant = &meta["meta"]["planted_hyperplane"];
    assert_eq!(cert["hyperplane"]["normal"], plant["normal"]);
    assert_eq!(cert["hyperplane"]["offset"], plant["offset"]);
}

#[test]
fn gen_and_analyze_are_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let args = ["--kind", "reflected-pairs", "--q", "7", "--d", "3", "--np", "49", "--ns", "20", "--seed", "1"];
    let a = std::fs::read(gen(&dir, "a.json", &args)).unwrap();
    let b = std::fs::read(gen(&dir, "b.json", &args)).unwrap();
    assert_eq!(a, b);
    let x = fqrig(&["analyze", s(&path(&dir, "a.json"))]).stdout;
    let y = fqrig(&["analyze", s(&path(&dir, "a.json"))]).stdout;
    assert_eq!(x, y);
}

#[test]
fn spec_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let spec = path(&dir, "spec.json");
    std::fs::write(&spec, r#"{"kind":"uniform-random","q":5,"d":3,"np":10,"ns":4,"seed":9}"#).unwrap();
    let a = gen(&dir, "a.json", &["--spec", s(&spec), "--np", "12"]);
    let b = gen(&dir, "b.json", &["--kind", "uniform-random", "--q", "5", "--np", "12", "--ns", "4", "--seed", "9"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn bad_input_exits_two() {
    let o = fqrig(&["gen", "--kind", "uniform-random", "--q", "4", "--np", "5", "--ns", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q"));
    let o = fqrig(&["gen", "--kind", "uniform-random", "--q", "7", "--d", "2", "--np", "5", "--ns", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d"));

    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(fqrig(&["analyze", s(&bad)]).status.code(), Some(2));
    std::fs::write(&bad, r#"{"q":7,"d":3,"points":[[1,2,9]],"spheres":[]}"#).unwrap();
    let o = fqrig(&["analyze", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("points[0]"));
}

fn tampered(dir: &TempDir, f: impl FnOnce(&mut serde_json::Value)) -> (PathBuf, PathBuf) {
    let config = gen(dir, "c.json", &["--kind", "reflected-pairs", "--q", "7", "--np", "49", "--ns", "20", "--seed", "1"]);
    let cert = extract(dir, &config);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    f(&mut v);
    std::fs::write(&cert, serde_json::to_string(&v).unwrap()).unwrap();
    (config, cert)
}

#[test]
fn tampered_point_index_fails_verification() {
    let dir = TempDir::new().unwrap();
    let (config, cert) = tampered(&dir, |v| v["points"][0] = serde_json::json!(10_000));
    let o = fqrig(&["verify", s(&config), s(&cert)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn zero_polynomial_fails_verification() {
    let dir = TempDir::new().unwrap();
    let (config, cert) = tampered(&dir, |v| v["F"] = serde_json::json!([]));
    let o = fqrig(&["verify", s(&config), s(&cert)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("F must be nonzero"));
}

#[test]
fn empty_points_analyze_to_zero() {
    let dir = TempDir::new().unwrap();
    let c = path(&dir, "empty.json");
    std::fs::write(&c, r#"{"q":5,"d":3,"points":[],"spheres":[{"center":[0,0,0],"r":1}]}"#).unwrap();
    let o = fqrig(&["analyze", s(&c)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["points", "I", "E", "E_star", "E_off"] {
        assert_eq!(v[key], serde_json::json!(0), "{key}");
    }
    assert_eq!(v["K"], serde_json::json!(0.0));
}

fn csv_rows(text: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text).records().map(|r| r.unwrap()).collect()
}

fn experiment(dir: &TempDir, grid: &str) -> Output {
    let g = path(dir, "grid.json");
    std::fs::write(&g, grid).unwrap();
    Command::new(env!("CARGO_BIN_EXE_fqrig"))
        .args(["experiment", s(&g)])
        .env("FQRIG_WORKERS", "2")
        .output()
        .unwrap()
}

#[test]
fn one_cell_grid() {
    let dir = TempDir::new().unwrap();
    let o = experiment(&dir, r#"{"q":[5],"kinds":["uniform-random"],"sizes":[{"np":10,"ns":5}],"seeds":[0]}"#);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with("q,d,kind,np,ns,noise,seed,"));
}

#[test]
fn grid_over_seeds_differs_only_in_seed_columns() {
    let dir = TempDir::new().unwrap();
    let o = experiment(&dir, r#"{"q":[7],"kinds":["reflected-pairs"],"sizes":[{"np":"q^2","ns":14}],"seeds":[1,2,3]}"#);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 3);
    // columns fixed by the grid axes: q d kind np ns noise c_const b0_option
    for i in [0, 1, 2, 3, 4, 5, 7, 8] {
        assert!(rows.iter().all(|r| r[i] == rows[0][i]), "column {i}");
    }
    let seeds: Vec<&str> = rows.iter().map(|r| &r[6]).collect();
    assert_eq!(seeds, ["1", "2", "3"]);
    assert_eq!(&rows[0][3], "49");
}

#[test]
fn planted_rows_recover_at_zero_noise() {
    let dir = TempDir::new().unwrap();
    let o = experiment(
        &dir,
        r#"{"q":[5,7],"kinds":["reflected-pairs"],"sizes":[{"np":"q^2","ns":"q^1"}],"seeds":[0,1,2,3,4]}"#,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| &r[16] == "true"));
}

#[test]
fn grid_over_cap_exits_two() {
    let dir = TempDir::new().unwrap();
    let o = experiment(&dir, r#"{"q":[5,7],"kinds":["uniform-random"],"sizes":[{"np":5,"ns":5}],"seeds":[0,1],"cap":3}"#);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}
