use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sfield(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sfield"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SF_THREADS", t),
        None => cmd.env_remove("SF_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

const SQUARE_RUN: [&str; 9] = [
    "sample",
    "--mesh",
    "rect:1,1,32,32",
    "--gamma",
    "matern:kappa=10,nu=1,sigma2=1",
    "--n",
    "100",
    "--seed",
    "7",
];

#[test]
fn sample_writes_one_row_per_vertex_and_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = SQUARE_RUN.to_vec();
    let out_a = a.path().to_str().unwrap();
    args.extend(["--out", out_a]);
    let first = sfield(&args, Some("1"));
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));

    let csv = std::fs::read_to_string(a.path().join("weights.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1089);
    assert!(csv.lines().all(|l| l.split(',').count() == 100));

    let run = json(a.path().join("run.json"));
    assert_eq!(run["seed"], 7);
    assert_eq!(run["n_vertices"], 1089);
    assert!(run["order"].as_u64().unwrap() >= 16);
    let sidecar = json(a.path().join("weights.bin.json"));
    assert_eq!(sidecar["n_samples"], 100);
    let vtk = std::fs::read_to_string(a.path().join("sample.vtk")).unwrap();
    assert!(vtk.contains("POINT_DATA 1089"));

    let out_b = b.path().to_str().unwrap();
    *args.last_mut().unwrap() = out_b;
    let second = sfield(&args, Some("3"));
    assert!(second.status.success());
    for file in ["weights.csv", "weights.bin", "weights.bin.json", "sample.vtk"] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap(),
            "{file} differs between runs"
        );
    }
}

#[test]
fn zero_gamma_gives_zeros_and_a_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = sfield(
        &["sample", "--mesh", "interval:0,1,10", "--gamma", "const:value=0", "--n", "5", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let csv = std::fs::read_to_string(dir.path().join("weights.csv")).unwrap();
    assert!(csv.split([',', '\n']).filter(|v| !v.is_empty()).all(|v| v.parse::<f64>().unwrap() == 0.0));
}

#[test]
fn oracle_check_passes_and_degrades_with_a_loose_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let base = ["oracle-check", "--mesh", "interval:0,pi,51", "--gamma", "matern:kappa=5,nu=1,sigma2=1", "--seed", "7", "--out", out_dir];

    let mut args = base.to_vec();
    args.extend(["--n", "200000"]);
    let out = sfield(&args, None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(dir.path().join("oracle_check.json"));
    assert_eq!(report["pass"], true);
    assert!(report["frobenius_rel"].as_f64().unwrap() <= 0.02);

    // the exit code follows the verdict either way
    let mut loose = base.to_vec();
    loose.extend(["--n", "20000", "--tol", "0.5"]);
    let out = sfield(&loose, None);
    let report = json(dir.path().join("oracle_check.json"));
    let pass = report["pass"].as_bool().unwrap();
    assert_eq!(out.status.code(), Some(if pass { 0 } else { 1 }));
    assert!(report["max_abs_err"].as_f64().unwrap() > 0.0);
}

#[test]
fn white_noise_oracle_check_uses_the_lumped_inverse() {
    let dir = tempfile::tempdir().unwrap();
    let out = sfield(
        &["oracle-check", "--mesh", "interval:0,pi,6", "--gamma", "const:value=1", "--n", "40000", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(dir.path().join("oracle_check.json"))["pass"], true);
}

#[test]
fn convergence_reports_parse() {
    let dir = tempfile::tempdir().unwrap();
    let out = sfield(
        &["convergence", "--mesh", "interval:0,pi,16", "--gamma", "power:exponent=1", "--levels", "4", "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let truncation = json(dir.path().join("truncation.json"));
    let slope = truncation["slope"].as_f64().unwrap();
    assert!((slope + 3.0).abs() <= 0.45, "{slope}");
    let eig = json(dir.path().join("fem_eigenvalue_error.json"));
    assert!((eig["slope"].as_f64().unwrap() - 2.0).abs() <= 0.3);
    for stem in ["fem_total", "fem_eigenvalue_part", "fem_eigenvector_part"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap();
        assert_eq!(csv.lines().next(), Some("h,error"));
        assert_eq!(csv.lines().count(), 5);
    }
    assert!(json(dir.path().join("fem_levels.json")).as_array().unwrap().len() == 4);
    assert!(json(dir.path().join("audit.json"))["fitted_dof_exponent"].is_number());
}

#[test]
fn mesh_info_counts() {
    for (spec, vertices, elements) in [("rect:1,1,2,2", 9, 8), ("icosphere:1,1", 42, 80)] {
        let out = sfield(&["mesh-info", "--mesh", spec], None);
        assert!(out.status.success());
        let stats: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(stats["n_vertices"], vertices, "{spec}");
        assert_eq!(stats["n_elements"], elements, "{spec}");
    }
    let out = sfield(&["mesh-info", "--mesh", &fixture("tetrahedron.off")], None);
    let stats: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["n_interior"], 4);
}

#[test]
fn input_errors_exit_with_two() {
    let missing = sfield(&["mesh-info", "--mesh", "/no/such/mesh.off"], None);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/mesh.off"));

    let dangling = sfield(&["mesh-info", "--mesh", &fixture("dangling.off")], None);
    assert_eq!(dangling.status.code(), Some(2));

    let bad_gamma = sfield(&["sample", "--mesh", "rect:1,1,4,4", "--gamma", "matern:kappa=-1,nu=1"], None);
    assert_eq!(bad_gamma.status.code(), Some(2));

    let bad_threads = sfield(&["mesh-info", "--mesh", "rect:1,1,2,2"], Some("zero"));
    assert_eq!(bad_threads.status.code(), Some(2));

    assert_eq!(sfield(&["frobnicate"], None).status.code(), Some(2));
}
