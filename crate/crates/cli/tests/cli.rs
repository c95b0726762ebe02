use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::Command;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

struct Run {
    code: i32,
    stdout: String,
    out: tempfile::TempDir,
}

impl Run {
    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.out.path().join(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }

    fn csv(&self, name: &str) -> (Vec<String>, Vec<Vec<f64>>) {
        let text = self.read(name);
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        (header, rows)
    }
}

fn run_with(args: &[&str], config: &Path) -> Run {
    let out = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_fermiflux"))
        .args(&args[..1])
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out.path())
        .args(&args[1..])
        .env("FERMIFLUX_THREADS", "1")
        .output()
        .unwrap();
    Run { code: output.status.code().unwrap(), stdout: String::from_utf8_lossy(&output.stdout).into_owned(), out }
}

fn run_json(args: &[&str], config: &Value) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, config.to_string()).unwrap();
    run_with(args, &path)
}

fn two_level(densities: Value) -> Value {
    json!({
        "model": { "coupling": {
            "w": [[[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [-0.6, 0.8]]],
            "a": [[[0.7, 0.0], [0.1, 0.2]], [[0.3, -0.1], [0.5, 0.0]]],
            "alpha": 0.9
        }},
        "reservoirs": { "densities": densities },
        "numerics": { "grid": 64, "truncation": 40, "t_max": 30 }
    })
}

#[test]
fn validate_reference_cycle_passes() {
    let r = run_with(&["validate"], &configs().join("cycle.json"));
    assert_eq!(r.code, 0, "{}", r.stdout);
    let report = r.json("validation.json");
    assert_eq!(report["pass"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 6);
}

#[test]
fn decoupled_model_fails_validation() {
    let mut cfg = two_level(json!([{ "type": "constant", "value": 0.4 }, { "type": "constant", "value": 0.6 }]));
    cfg["model"]["coupling"]["alpha"] = json!(0.0);
    let r = run_json(&["validate"], &cfg);
    assert_eq!(r.code, 2);
    let report = r.json("validation.json");
    let sp = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "spectral_radius").unwrap();
    assert_eq!(sp["pass"], false);
}

#[test]
fn malformed_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ \"model\": ").unwrap();
    assert_eq!(run_with(&["steady"], &path).code, 1);
    let mut cfg = two_level(json!([{ "type": "constant", "value": 0.4 }]));
    cfg["model"]["preset"] = json!("cycle");
    assert_eq!(run_json(&["steady"], &cfg).code, 1);
    let cfg = json!({ "model": { "preset": "cycle", "params": { "n": 8, "phi": 1.0, "beta": 0.1, "alpha": 0.3 } } });
    assert_eq!(run_json(&["validate"], &cfg).code, 1);
}

#[test]
fn steady_cycle_snapshot() {
    let r = run_with(&["steady"], &configs().join("cycle.json"));
    assert_eq!(r.code, 0);
    let s = r.json("summary.json");
    let j: Vec<f64> = s["currents"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((j[1] - 3.62614353290622e-2).abs() < 1e-12);
    assert!((j[0] + j[1]).abs() < 1e-12);
    assert!((s["sigma"].as_f64().unwrap() - 1.5934903382900578e-1).abs() < 1e-12);
    assert_eq!(s["delta_inf"].as_array().unwrap().len(), 16);
    let (header, rows) = r.csv("integrands.csv");
    assert_eq!(header, ["theta", "jhat_1", "jhat_2", "entropy_integrand"]);
    assert_eq!(rows.len(), 256);
}

#[test]
fn steady_outputs_are_deterministic() {
    let a = run_with(&["steady"], &configs().join("two_level.json"));
    let b = run_with(&["steady"], &configs().join("two_level.json"));
    assert_eq!(a.read("summary.json"), b.read("summary.json"));
    assert_eq!(a.read("integrands.csv"), b.read("integrands.csv"));
    let first = a.read("integrands.csv").lines().nth(1).unwrap().split(',').next().unwrap().to_string();
    assert_eq!(first, "0.0000000000000000e0");
}

#[test]
fn equilibrium_and_single_reservoir_carry_no_current() {
    let eq = two_level(json!([{ "type": "constant", "value": 0.35 }, { "type": "constant", "value": 0.35 }]));
    let r = run_json(&["steady"], &eq);
    assert_eq!(r.code, 0);
    for j in r.json("summary.json")["currents"].as_array().unwrap() {
        assert!(j.as_f64().unwrap().abs() <= 1e-12);
    }
    let mut single = two_level(json!([{ "type": "fourier", "cos": [0.5, 0.2], "sin": [0.0, 0.1] }]));
    single["model"]["coupling"]["a"] = json!([[[0.7, 0.0]], [[0.3, -0.1]]]);
    let r = run_json(&["steady"], &single);
    assert_eq!(r.code, 0);
    assert!(r.json("summary.json")["currents"][0].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn evolve_initial_row_only() {
    let r = run_with(&["evolve", "--t-max", "0"], &configs().join("two_level.json"));
    assert_eq!(r.code, 0);
    let (header, rows) = r.csv("evolution.csv");
    assert_eq!(header, ["t", "flux_1", "flux_2", "sigma_t", "dist_to_Dinf"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][..4], &[0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn evolve_equilibrium_produces_no_entropy() {
    let mut eq = two_level(json!([{ "type": "constant", "value": 0.35 }, { "type": "constant", "value": 0.35 }]));
    eq["numerics"]["delta0"] = json!([[[0.35, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.35, 0.0]]]);
    let r = run_json(&["evolve"], &eq);
    assert_eq!(r.code, 0);
    let (_, rows) = r.csv("evolution.csv");
    assert_eq!(rows.len(), 31);
    assert!(rows.iter().all(|row| row[3].abs() <= 1e-10));
}

#[test]
fn evolve_beyond_horizon_is_rejected() {
    let r = run_with(&["evolve", "--t-max", "60"], &configs().join("two_level.json"));
    assert_eq!(r.code, 1);
}

#[test]
fn evolve_fast_model_settles() {
    let r = run_with(&["evolve"], &configs().join("two_level.json"));
    assert_eq!(r.code, 0);
    let (_, rows) = r.csv("evolution.csv");
    let last = rows.last().unwrap();
    assert_eq!(last[0], 50.0);
    assert!(last[4] < 1e-6);
    assert!(last[4] < rows[10][4]);
}

#[test]
fn evolve_reference_cycle_settles() {
    let r = run_with(&["evolve"], &configs().join("cycle.json"));
    assert_eq!(r.code, 0);
    let (_, rows) = r.csv("evolution.csv");
    let last = rows.last().unwrap();
    assert_eq!(last[0], 150.0);
    assert!(last[4] <= 1e-5, "final distance {}", last[4]);
}

#[test]
fn lattice_dump_has_dimension_header() {
    let mut cfg: Value = serde_json::from_str(&std::fs::read_to_string(configs().join("two_level.json")).unwrap()).unwrap();
    cfg["numerics"]["truncation"] = json!(5);
    cfg["numerics"]["t_max"] = json!(3);
    cfg["outputs"] = json!({ "lattice_dump": "lattice.bin" });
    let r = run_json(&["evolve"], &cfg);
    assert_eq!(r.code, 0);
    let bytes = std::fs::read(r.out.path().join("lattice.bin")).unwrap();
    let dim = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    assert_eq!(dim, 11 * 2 + 2);
    assert_eq!(bytes.len(), 16 + dim * dim * 16);
}

#[test]
fn sweep_reports_orders_and_circuits() {
    let r = run_with(&["sweep"], &configs().join("cycle.json"));
    assert_eq!(r.code, 0, "{}", r.stdout);
    let s = r.json("sweep.json");
    assert!((s["current_residual_slope"].as_f64().unwrap() - 4.0).abs() < 0.5);
    assert!((s["delta_residual_slope"].as_f64().unwrap() - 2.0).abs() < 0.4);
    let circuits = r.json("circuits.json");
    assert_eq!(circuits.as_array().unwrap().len(), 16);
    for c in circuits.as_array().unwrap() {
        let sum: f64 = c["currents"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
        assert!(sum.abs() < 1e-12);
    }
    let (header, rows) = r.csv("sweep.csv");
    assert_eq!(header.len(), 9);
    assert_eq!(rows.len(), 3);
}

#[test]
fn sweep_at_equilibrium_is_flat() {
    let cfg = json!({
        "model": { "preset": "cycle", "params": { "n": 4, "phi": 0.7, "beta": 0.3, "alpha": 0.1 } },
        "reservoirs": { "densities": [{ "type": "constant", "value": 0.4 }, { "type": "constant", "value": 0.4 }] }
    });
    let r = run_json(&["sweep"], &cfg);
    assert_eq!(r.code, 0);
    let (_, rows) = r.csv("sweep.csv");
    for row in rows {
        assert!(row[1..].iter().all(|v| v.abs() < 1e-10), "{row:?}");
    }
}
