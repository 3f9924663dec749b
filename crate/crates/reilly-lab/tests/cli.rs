use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reilly_lab::cli::{parse_config, parse_levels, Expectation, LevelRange};
use reilly_lab::immersion::{gallery, GallerySpec};
use reilly_lab::meshfem::{triangulate, write_off};

fn manifest(p: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(p)
}

fn lab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reilly-lab"))
        .env_remove("REILLY_LAB_SEED")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

fn csv_records(path: &Path) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut rd = csv::Reader::from_path(path).unwrap();
    let header = rd.headers().unwrap().clone();
    let rows = rd.records().map(|r| r.unwrap()).collect();
    (header, rows)
}

#[test]
fn bundled_equality_cases_pass_with_five_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = manifest("configs/equality_cases.json");
    let o = lab(tmp.path(), &["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", text(&o.stdout), text(&o.stderr));
    let dirs: Vec<_> = fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 5);
    for d in dirs {
        let (header, rows) = csv_records(&d.join("report.csv"));
        assert_eq!(
            header.iter().collect::<Vec<_>>(),
            ["name", "c", "operator", "lambda2", "rhs", "gap", "trT_min", "Tprime_min", "radius", "backend"]
        );
        assert_eq!(rows.len(), 1);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
        let tol = json["assertion"]["tolerance"].as_f64().unwrap();
        let gap: f64 = rows[0][5].parse().unwrap();
        let rhs: f64 = rows[0][4].parse().unwrap();
        assert!(gap.abs() <= tol * rhs.abs(), "{}: gap {gap} tol {tol}", d.display());
        assert_eq!(json["assertion"]["passed"], true);
    }
    assert_eq!(text(&o.stdout).lines().filter(|l| l.starts_with("PASS ")).count(), 5);
}

#[test]
fn config_errors_exit_one_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(tmp.path(), &["run", manifest("tests/fixtures/bad_torus.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = text(&o.stderr);
    assert!(err.contains("bad_torus.json:4"), "{err}");
    assert!(err.contains("scenarios[0].geometry"), "{err}");
    assert!(err.contains("(0,1)"), "{err}");

    let o = lab(tmp.path(), &["run", manifest("tests/fixtures/malformed.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = text(&o.stderr);
    assert!(err.contains("malformed.json:6:"), "{err}");
    assert!(err.contains("unknown field `radius`"), "{err}");

    let o = lab(tmp.path(), &["run", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let o = lab(tmp.path(), &["--tol", "-1", "gallery", "--list"]);
    assert_eq!(code(&o), 1);
    let o = lab(tmp.path(), &["frobnicate"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn failed_assertion_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(tmp.path(), &["run", manifest("tests/fixtures/lambda2_above_rhs.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", text(&o.stdout));
    assert!(text(&o.stdout).starts_with("FAIL ellipsoid_wrong_claim"));
    assert!(tmp.path().join("ellipsoid_wrong_claim/report.csv").exists());
}

#[test]
fn identities_with_zero_count() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(tmp.path(), &["verify-identities", "--seed", "3", "--count", "0"]);
    assert_eq!(code(&o), 0);
    assert!(text(&o.stdout).contains("0 identities"));
    let body = fs::read_to_string(tmp.path().join("identities/identities.csv")).unwrap();
    assert!(body.trim().is_empty(), "{body:?}");
}

#[test]
fn identities_are_deterministic_and_seeded() {
    let run = |seed: Option<&str>, env: Option<&str>| {
        let tmp = tempfile::tempdir().unwrap();
        let mut args = vec!["verify-identities", "--count", "5"];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_reilly-lab"));
        cmd.env_remove("REILLY_LAB_SEED").arg("--out").arg(tmp.path()).args(&args);
        if let Some(e) = env {
            cmd.env("REILLY_LAB_SEED", e);
        }
        let o = cmd.output().unwrap();
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
        (text(&o.stdout), fs::read(tmp.path().join("identities/identities.csv")).unwrap())
    };
    let a = run(Some("9"), None);
    assert_eq!(a, run(Some("9"), None));
    assert!(a.0.starts_with("seed 9,"));
    let env = run(None, Some("9"));
    assert_eq!(env, a);
    let flag_wins = run(Some("9"), Some("10"));
    assert_eq!(flag_wins, a);
    assert!(run(None, None).0.starts_with("seed 42,"));
    assert_ne!(run(Some("10"), None).1, a.1);
}

const SMALL: &str = r#"{
  "seed": 5,
  "scenarios": [
    { "name": "s2", "geometry": { "name": "sphere", "n": 2, "a": 1.0 }, "levels": [3] },
    { "name": "torus", "geometry": { "name": "torus_of_revolution", "big": 2.0, "small": 0.7 },
      "levels": [2, 3, 4], "outputs": ["report", "convergence", "balance"] },
    { "name": "clifford", "geometry": { "name": "clifford_torus", "m": 1, "n": 3, "a": 0.6, "c": 0 },
      "outputs": ["report", "identities"], "identity_count": 2 }
  ]
}"#;

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            for f in fs::read_dir(&p).unwrap() {
                let f = f.unwrap().path();
                files.push((f.strip_prefix(dir).unwrap().display().to_string(), fs::read(&f).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn runs_are_byte_identical_sequential_or_parallel() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let outs: Vec<_> = [&[][..], &["--parallel"][..], &[][..]]
        .iter()
        .enumerate()
        .map(|(i, extra)| {
            let out = tmp.path().join(format!("out{i}"));
            let mut args: Vec<&str> = extra.to_vec();
            args.extend(["run", cfg.to_str().unwrap()]);
            let o = lab(&out, &args);
            assert_eq!(code(&o), 0, "{}{}", text(&o.stdout), text(&o.stderr));
            (text(&o.stdout), snapshot(&out))
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
    let names: Vec<&str> = outs[0].1.iter().map(|(n, _)| n.as_str()).collect();
    for want in ["s2/report.csv", "s2/report.json", "torus/convergence.csv", "torus/plot.svg", "torus/balance.csv", "clifford/identities.csv"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
}

#[test]
fn tolerance_flag_overrides_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"[{ "name": "s2", "geometry": { "name": "sphere", "n": 2, "a": 1.0 }, "levels": [3], "expect": "equality" }]"#,
    );
    assert_eq!(code(&lab(tmp.path(), &["run", cfg.to_str().unwrap()])), 0);
    assert_eq!(code(&lab(tmp.path(), &["--tol", "1e-9", "run", cfg.to_str().unwrap()])), 2);
}

#[test]
fn convergence_command() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = manifest("configs/convergence.json");
    let o = lab(tmp.path(), &["convergence", cfg.to_str().unwrap(), "--levels", "3..5", "--scenario", "sphere_convergence"]);
    assert_eq!(code(&o), 0, "{}{}", text(&o.stdout), text(&o.stderr));
    let dir = tmp.path().join("sphere_convergence");
    let (header, rows) = csv_records(&dir.join("convergence.csv"));
    assert_eq!(header.iter().collect::<Vec<_>>(), ["level", "vertices", "lambda2", "rhs", "gap"]);
    assert_eq!(rows.iter().map(|r| r[0].to_string()).collect::<Vec<_>>(), ["3", "4", "5"]);
    let svg = fs::read_to_string(dir.join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("fitted slope"));
    let slope: f64 = text(&o.stdout)
        .split("fitted slope ")
        .nth(1)
        .and_then(|s| s.trim().split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(slope >= 1.8, "slope {slope}");

    let single = tmp.path().join("single");
    let o = lab(&single, &["convergence", cfg.to_str().unwrap(), "--levels", "3", "--scenario", "sphere_convergence"]);
    assert_eq!(code(&o), 0);
    assert!(single.join("sphere_convergence/convergence.csv").exists());
    assert!(!single.join("sphere_convergence/plot.svg").exists());

    let closed = write_config(
        tmp.path(),
        r#"[{ "name": "s3", "geometry": { "name": "sphere", "n": 3, "a": 1.0 } }]"#,
    );
    assert_eq!(code(&lab(tmp.path(), &["convergence", closed.to_str().unwrap(), "--levels", "2..3"])), 1);
    assert_eq!(code(&lab(tmp.path(), &["convergence", cfg.to_str().unwrap(), "--levels", "5..3"])), 1);
    assert_eq!(code(&lab(tmp.path(), &["convergence", cfg.to_str().unwrap(), "--scenario", "nope"])), 1);
}

#[test]
fn balance_command_on_written_mesh() {
    let tmp = tempfile::tempdir().unwrap();
    let imm = gallery(&GallerySpec::Sphere { n: 2, a: 1.0, codim: 1, c: 0 }).unwrap();
    let mesh = triangulate(&imm, 2).unwrap();
    let path = tmp.path().join("ico.off");
    write_off(&mesh, fs::File::create(&path).unwrap()).unwrap();
    let out = tmp.path().join("out");
    let o = lab(&out, &["balance", path.to_str().unwrap(), "--ambient", "sphere"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let (header, rows) = csv_records(&out.join("ico/balance.csv"));
    assert_eq!(header.iter().collect::<Vec<_>>(), ["iteration", "residual", "gnorm", "step"]);
    assert!(!rows.is_empty());
    assert_eq!(code(&lab(&out, &["balance", path.to_str().unwrap(), "--ambient", "hyperbolic"])), 1);
    assert_eq!(code(&lab(&out, &["balance", path.to_str().unwrap(), "--ambient", "elliptic"])), 1);
}

#[test]
fn gallery_listing() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lab(tmp.path(), &["gallery", "--list"]);
    assert_eq!(code(&o), 0);
    let out = text(&o.stdout);
    for name in ["sphere", "clifford_torus", "veronese_rp2", "ellipsoid", "hyperbolic_geodesic_sphere", "flat_torus", "torus_of_revolution"] {
        assert!(out.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
}

#[test]
fn level_ranges() {
    assert_eq!(parse_levels("3..6").unwrap(), LevelRange(vec![3, 4, 5, 6]));
    assert_eq!(parse_levels("3..=4").unwrap(), LevelRange(vec![3, 4]));
    assert_eq!(parse_levels("5").unwrap(), LevelRange(vec![5]));
    assert!(parse_levels("6..3").is_err());
    assert!(parse_levels("a..3").is_err());
}

#[test]
fn config_validation() {
    let ok = parse_config(SMALL, "small.json").unwrap();
    assert_eq!(ok.seed, Some(5));
    assert_eq!(ok.scenarios.len(), 3);
    assert_eq!(ok.scenarios[0].expect, Expectation::Holds);

    let err = |body: &str| parse_config(body, "c.json").unwrap_err();
    let dup = err(r#"[{"name": "x", "geometry": {"name": "veronese_rp2"}},
{"name": "x", "geometry": {"name": "veronese_rp2"}}]"#);
    assert_eq!(dup.field.as_deref(), Some("scenarios[1].name"));
    assert_eq!(dup.line, Some(1));

    let levels = err(r#"[{"name": "x", "geometry": {"name": "veronese_rp2"}, "levels": [3, 3]}]"#);
    assert_eq!(levels.field.as_deref(), Some("scenarios[0].levels"));

    let op = err(r#"{"scenarios": [{"name": "x", "geometry": {"name": "veronese_rp2"}, "operator": {"kind": "bogus", "c": 0}}]}"#);
    assert!(op.field.as_deref().unwrap().starts_with("scenarios[0].operator"), "{op}");

    let curv = err(r#"[{"name": "x", "geometry": {"name": "veronese_rp2"}, "operator": {"kind": "identity", "c": 1}}]"#);
    assert_eq!(curv.field.as_deref(), Some("scenarios[0].operator.c"));

    let fem3 = err(r#"[{"name": "x", "geometry": {"name": "sphere", "n": 3}, "backend": "fem"}]"#);
    assert_eq!(fem3.field.as_deref(), Some("scenarios[0].backend"));

    let factors = err(r#"[{"name": "x", "geometry": {"name": "veronese_rp2"}, "outputs": ["factors"]}]"#);
    assert_eq!(factors.field.as_deref(), Some("scenarios[0].outputs"));

    let schr = err(r#"[{"name": "x", "geometry": {"name": "veronese_rp2"}, "method": "schrodinger"}]"#);
    assert_eq!(schr.field.as_deref(), Some("scenarios[0].operator.potential"));

    let name = err(r#"[{"name": "../x", "geometry": {"name": "veronese_rp2"}}]"#);
    assert!(name.message.contains("name"));

    let syntax = err("{\n  \"scenarios\": [\n");
    assert!(syntax.line.is_some());
    assert!(err("[]").message.contains("no scenarios"));
    assert!(format!("{dup}").starts_with("c.json:1: field `scenarios[1].name`"));
}
