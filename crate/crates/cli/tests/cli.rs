use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dgeeg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgeeg"))
        .args(args)
        .current_dir(dir)
        .env("DGEEG_OUTPUT_ROOT", dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn dgeeg")
}

fn ok(out: &Output) -> String {
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(out.status.success(), "exit {:?}\nstdout:\n{stdout}\nstderr:\n{}", out.status, String::from_utf8_lossy(&out.stderr));
    stdout
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn genseg_then_leaks_reads_the_written_file() {
    let dir = TempDir::new().unwrap();
    ok(&dgeeg(dir.path(), &["genseg"]));
    let seg = dir.path().join("out/seg-4-h-4.seg");
    assert!(seg.exists());
    // the 6 mm skull at 4 mm voxels touches CSF and skin diagonally
    let stdout = ok(&dgeeg(dir.path(), &["leaks", "--seg", seg.to_str().unwrap()]));
    assert!(stdout.contains(": 368 leak vertices"), "{stdout}");
    let rows = data_rows(&dir.path().join("out/seg-4-h-4-leaks.csv"));
    assert_eq!(rows.len(), 368);
    assert!(rows.iter().all(|r| r[4].split(';').any(|l| l == "4")));
}

#[test]
fn thick_skull_has_no_leaks_at_2mm() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&dgeeg(dir.path(), &["--set", "resolution.seg_mm=2", "--set", "model.skull_outer_mm=84", "leaks"]));
    assert!(stdout.contains(": 0 leak vertices"), "{stdout}");
}

#[test]
fn reduced_skull_leaks_at_2mm() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&dgeeg(dir.path(), &["--set", "resolution.seg_mm=2", "--set", "model.skull_outer_mm=82", "leaks"]));
    assert!(stdout.contains("10080 leak vertices"), "{stdout}");
}

#[test]
fn mesh_reports_counts_and_writes_vtk() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&dgeeg(dir.path(), &["mesh"]));
    assert!(stdout.contains("56235 vertices, 51104 elements"), "{stdout}");
    let vtk = fs::read_to_string(dir.path().join("out/seg-4-h-4-mesh.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile"));
    assert!(vtk.contains("CELL_DATA 51104"));
}

#[test]
fn invalid_radius_ordering_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dgeeg(dir.path(), &["--set", "model.radii_mm=[78, 86, 80, 92]", "genseg"]);
    assert!(!out.status.success());
    assert!(!stderr(&out).trim().is_empty());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_without_units_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[resolution]\nseg_mm = 4\n").unwrap();
    let out = dgeeg(dir.path(), &["--config", cfg.to_str().unwrap(), "genseg"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("units"), "{}", stderr(&out));

    fs::write(&cfg, "[units]\nlength = \"m\"\nconductivity = \"S/m\"\n").unwrap();
    let out = dgeeg(dir.path(), &["--config", cfg.to_str().unwrap(), "genseg"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("mm"), "{}", stderr(&out));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dgeeg(dir.path(), &["--set", "solver.tolerence=1e-6", "genseg"]);
    assert!(!out.status.success());
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[units]\nlength = \"mm\"\nconductivity = \"S/m\"\n[model]\nname = \"coarse\"\n[output]\ndir = \"results\"\nseg_encoding = \"ascii\"\n",
    )
    .unwrap();
    ok(&dgeeg(dir.path(), &["--config", cfg.to_str().unwrap(), "--set", "resolution.seg_mm=4", "genseg"]));
    let seg = fs::read(dir.path().join("results/coarse.seg")).unwrap();
    assert!(seg.starts_with(b"SEGv1"));
}

#[test]
fn dg_forward_writes_one_value_per_skin_face() {
    let dir = TempDir::new().unwrap();
    let stdout =
        ok(&dgeeg(dir.path(), &["--set", "discretization.scheme=dg", "--set", "sources.eccentricities=[0.5]", "forward"]));
    let points: usize = stdout
        .split_whitespace()
        .zip(stdout.split_whitespace().skip(1))
        .find(|(_, w)| *w == "skin")
        .map(|(n, _)| n.parse().unwrap())
        .expect("skin point count in output");
    let rows = data_rows(&dir.path().join("out/seg-4-h-4-dg-forward.csv"));
    assert_eq!(rows.len(), points);
    assert!(points > 1000);
    let u = column(&rows, 4);
    assert!(u.iter().all(|v| v.is_finite()));
}

#[test]
fn cg_and_dg_agree_on_a_homogeneous_model() {
    let dir = TempDir::new().unwrap();
    let common = [
        "--set",
        "model.conductivities=[0.33, 0.33, 0.33, 0.33]",
        "--set",
        "sources.position=[5.0, -7.0, 30.0]",
        "--set",
        "sources.moment=[0.3, 0.5, 0.8]",
    ];
    let mut u = Vec::new();
    for scheme in ["cg", "dg"] {
        let set = format!("discretization.scheme={scheme}");
        let mut args = common.to_vec();
        args.extend(["--set", &set, "forward"]);
        ok(&dgeeg(dir.path(), &args));
        let rows = data_rows(&dir.path().join(format!("out/seg-4-h-4-{scheme}-forward.csv")));
        u.push(column(&rows, 4));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let normalized = |v: &[f64]| {
        let m = mean(v);
        let c: Vec<f64> = v.iter().map(|x| x - m).collect();
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.into_iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let (a, b) = (normalized(&u[0]), normalized(&u[1]));
    let rdm = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    assert!(rdm < 0.02, "rdm(cg, dg) = {rdm}");
}

#[test]
fn zero_penalty_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dgeeg(dir.path(), &["--set", "discretization.eta=0", "--set", "sources.eccentricities=[0.5]", "forward"]);
    assert!(!out.status.success());
    assert!(stderr(&out).to_lowercase().contains("indefinite"), "{}", stderr(&out));
}

#[test]
fn reference_matches_forward_sampling() {
    let dir = TempDir::new().unwrap();
    ok(&dgeeg(dir.path(), &["--set", "sources.eccentricities=[0.3]", "reference"]));
    let rows = data_rows(&dir.path().join("out/seg-4-h-4-reference.csv"));
    assert!(rows.len() > 1000);
    let u = column(&rows, 4);
    assert!(u.iter().all(|v| v.is_finite()) && u.iter().any(|v| *v != 0.0));
}

#[test]
fn sweep_writes_one_row_per_dipole_and_scheme() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&dgeeg(
        dir.path(),
        &["--set", "sources.eccentricities=[0.2, 0.6]", "--set", "sources.count=2", "--set", "solver.tolerance=1e-6", "sweep"],
    ));
    assert!(stdout.contains("(8 rows)"), "{stdout}");
    assert_eq!(data_rows(&dir.path().join("out/metrics.csv")).len(), 8);
    let meta: toml::Table = fs::read_to_string(dir.path().join("out/metrics.meta.toml")).unwrap().parse().unwrap();
    assert_eq!(meta["eccentricities_assumed"].as_bool(), Some(false));
    assert!(meta["failures"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_failures_need_allow_partial() {
    let dir = TempDir::new().unwrap();
    let args = [
        "--set",
        "sources.eccentricities=[0.5]",
        "--set",
        "sources.count=1",
        "--set",
        "sweep.schemes=[\"dg\"]",
        "--set",
        "solver.max_iterations=1",
        "sweep",
    ];
    let out = dgeeg(dir.path(), &args);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(dir.path().join("out/metrics.csv").exists());
    let meta: toml::Table = fs::read_to_string(dir.path().join("out/metrics.meta.toml")).unwrap().parse().unwrap();
    assert_eq!(meta["failures"].as_array().unwrap().len(), 1);

    let mut partial = vec!["--allow-partial"];
    partial.extend(args);
    ok(&dgeeg(dir.path(), &partial));
}

#[test]
fn fluxvis_writes_both_schemes_with_difference_arrays() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&dgeeg(dir.path(), &["fluxvis"]));
    assert!(stdout.contains("max |j|"), "{stdout}");
    for scheme in ["cg", "dg"] {
        let vtk = fs::read_to_string(dir.path().join(format!("out/seg-4-h-4-fluxvis-{scheme}.vtk"))).unwrap();
        for array in ["label", "j ", "j_valid", "lnMAGloc ", "lnMAGloc_valid", "totDIFF ", "totDIFF_valid"] {
            assert!(vtk.contains(array), "{scheme}: missing {array}");
        }
    }
}

#[test]
fn transfer_writes_matrix_and_sensor_list() {
    let dir = TempDir::new().unwrap();
    let stdout = ok(&dgeeg(dir.path(), &["--set", "transfer.sensors=8", "--set", "discretization.scheme=cg", "transfer"]));
    assert!(stdout.contains("8 x "), "{stdout}");
    assert!(dir.path().join("out/seg-4-h-4-cg.transfer").exists());
    let sensors = data_rows(&dir.path().join("out/seg-4-h-4-cg-sensors.csv"));
    assert_eq!(sensors.len(), 8);
    assert_eq!(sensors.iter().filter(|r| r[4] == "1").count(), 1);
}

#[test]
fn output_root_applies_to_relative_dirs_only() {
    let dir = TempDir::new().unwrap();
    let abs = dir.path().join("elsewhere");
    let set = format!("output.dir=\"{}\"", abs.display());
    ok(&dgeeg(dir.path(), &["--set", &set, "genseg"]));
    assert!(abs.join("seg-4-h-4.seg").exists());

    let root = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dgeeg"))
        .arg("genseg")
        .current_dir(dir.path())
        .env("DGEEG_OUTPUT_ROOT", root.path())
        .output()
        .unwrap();
    ok(&out);
    assert!(root.path().join("out/seg-4-h-4.seg").exists());
}
