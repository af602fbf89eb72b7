use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const COARSE: &str = "n_r_inner = 2\nn_r_outer = 2\nn_theta = 32\nplot_scripts = false\n";

fn robininv(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.conf");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_robininv"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("ROBININV_THREADS")
        .output()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = robininv(dir.path(), &["mesh"], "n_theta = 32\nmesh_size = 3\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("mesh_size"), "{}", stderr(&out));
}

#[test]
fn bad_values_and_arguments_are_parameter_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = robininv(dir.path(), &["mesh"], "n_theta = many\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("n_theta"));

    let out = robininv(dir.path(), &["forward"], &format!("{COARSE}gamma = const:-1\n"));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("positive"));

    let out = robininv(dir.path(), &["frobnicate"], COARSE);
    assert_eq!(out.status.code(), Some(1));

    let missing = Command::new(env!("CARGO_BIN_EXE_robininv"))
        .args(["mesh", "--config", "/nonexistent/robininv.conf"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let cfg = dir.path().join("run.conf");
    let threads = Command::new(env!("CARGO_BIN_EXE_robininv"))
        .args(["mesh", "--config"])
        .arg(&cfg)
        .env("ROBININV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(1));
    assert!(stderr(&threads).contains("ROBININV_THREADS"));
}

#[test]
fn monotonicity_columns_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let out = robininv(
        dir.path(),
        &["monotonicity", "--seed", "5"],
        &format!("{COARSE}n_modes = 10\n"),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = read(dir.path(), "monotonicity.csv");
    let mut lines = text.lines();
    let stamp = lines.next().unwrap();
    assert!(
        stamp.starts_with("# robininv config_hash=") && stamp.ends_with(" seed=5"),
        "{stamp}"
    );
    assert_eq!(lines.next(), Some("i,nd_gamma1,nd_gamma2"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 10);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (i + 1) as f64);
        assert!(r[1] >= r[2], "row {}: {} < {}", i + 1, r[1], r[2]);
    }
}

#[test]
fn forward_writes_field_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = robininv(
        dir.path(),
        &["forward"],
        &format!("{COARSE}gamma = const:2\nflux = const:1\n"),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let field = data_rows(&read(dir.path(), "forward_field.csv"));
    assert_eq!(field.len(), 1 + 4 * 32);
    let boundary = data_rows(&read(dir.path(), "forward_boundary.csv"));
    assert_eq!(boundary.len(), 32);
    for r in &boundary {
        assert!((r[1] - 1.0 - std::f64::consts::LN_2).abs() < 2e-2);
    }
    assert!(read(dir.path(), "forward_summary.txt").contains("energy:"));
}

#[test]
fn mesh_file_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = robininv(dir.path(), &["mesh"], COARSE);
    assert_eq!(out.status.code(), Some(0));
    let text = read(dir.path(), "mesh.txt");
    let mesh = robininv_core::mesh::read_mesh(text.as_bytes()).unwrap();
    let fresh = robininv_core::mesh::generate_disk_mesh(2, 2, 32).unwrap();
    assert_eq!(mesh.nodes(), fresh.nodes());
    assert_eq!(mesh.triangles(), fresh.triangles());
}

#[test]
fn ndmap_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let out = robininv(dir.path(), &["ndmap"], &format!("{COARSE}n_modes = 3\n"));
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(&read(dir.path(), "ndmap.csv"));
    assert_eq!(rows.len(), 49);
    for r in &rows {
        let t = rows.iter().find(|s| s[0] == r[1] && s[1] == r[0]).unwrap();
        assert!((r[2] - t[2]).abs() <= 1e-12 * r[2].abs().max(1.0));
    }
}

#[test]
fn non_achievement_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = robininv(
        dir.path(),
        &["locpot"],
        &format!("{COARSE}cgne_max_iter = 1\nalpha = 100\n"),
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(read(dir.path(), "locpot_summary.txt").contains("achieved: false"));

    let out = robininv(dir.path(), &["lipschitz"], &format!("{COARSE}cgne_max_iter = 1\n"));
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("out/lipschitz_gkm.csv").exists());
}

#[test]
fn lipschitz_reports_both_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = robininv(
        dir.path(),
        &["lipschitz"],
        &format!("{COARSE}verify_samples = 5\nn_modes = 8\n"),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = read(dir.path(), "lipschitz_summary.csv");
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("K,M,G,constant_proof,constant_stated"));
    let row = &data_rows(&text.replace("true", "1").replace("false", "0"))[0];
    assert_eq!(row[0], 5.0);
    assert_eq!(row[2], row[3]);
    assert!((row[4] * row[3] - 1.0).abs() < 1e-12);
    assert_eq!(
        data_rows(&read(dir.path(), "lipschitz_gkm.csv").replace("true", "1")).len(),
        20
    );
}

#[test]
fn example1_is_deterministic_and_monotone() {
    let config = format!("{COARSE}max_iter = 25\nseed = 3\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(robininv(a.path(), &["example1"], &config).status.code(), Some(0));
    assert_eq!(robininv(b.path(), &["example1"], &config).status.code(), Some(0));
    let summary = read(a.path(), "example1_summary.csv");
    assert_eq!(summary, read(b.path(), "example1_summary.csv"));
    for eps in ["0", "0.01", "0.03", "0.05", "0.1"] {
        for init in ["expcos", "one"] {
            let name = format!("example1_eps{eps}_{init}_history.csv");
            let text = read(a.path(), &name);
            assert_eq!(text, read(b.path(), &name));
            let costs: Vec<f64> = data_rows(&text).iter().map(|r| r[1]).collect();
            assert!(costs.windows(2).all(|w| w[1] <= w[0]), "{name}");
            assert!(a
                .path()
                .join("out")
                .join(name.replace("history", "coefficient"))
                .exists());
        }
    }
}

#[test]
fn output_dir_does_not_change_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    robininv(dir.path(), &["mesh"], &format!("{COARSE}output_dir = elsewhere\n"));
    let first = read(dir.path(), "mesh_summary.txt");
    robininv(dir.path(), &["mesh"], COARSE);
    assert_eq!(first, read(dir.path(), "mesh_summary.txt"));
}
