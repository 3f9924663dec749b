//! Runs an inline scenario config through the same path as `reilly-lab run`.

use reilly_lab::cli::config::parse_config;
use reilly_lab::cli::run::{run_config, RunOptions};

const CONFIG: &str = r#"{
  "scenarios": [
    { "name": "sphere", "geometry": { "name": "sphere" }, "levels": [4], "expect": "equality" },
    { "name": "ellipsoid", "geometry": { "name": "ellipsoid", "axes": [1.0, 1.0, 1.3] }, "levels": [4], "expect": "strict" },
    { "name": "flat_torus", "geometry": { "name": "flat_torus", "lengths": [6.283185307179586, 6.283185307179586] },
      "levels": [4], "expect": "holds" }
  ]
}"#;

fn main() {
    let cfg = match parse_config(CONFIG, "inline") {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let opts = RunOptions { out: "out/run_scenarios".into(), parallel: true, tol: None, seed: 42 };
    for res in run_config(&cfg, &opts) {
        match res {
            Ok(o) => println!("{:<12} {} {}", o.scenario, if o.passed() { "pass" } else { "FAIL" }, o.assertion.detail),
            Err(e) => println!("error: {e}"),
        }
    }
}
