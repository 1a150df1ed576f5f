//! End-to-end tests of the `thermo1d` binary: config parsing, exit codes,
//! CSV schemas, and output determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermo1d"))
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

const BASE_CONFIG: &str = "\
# base test config
[grid]
a = 0
b = 1
n_cells = 32

[time]
dt = 2e-3
t_end = 0.05

[physics]
mu = 1
nu = 1e-2

[data]
theta0_kind = constant:2

[output]
emit_fields = true
";

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

#[test]
fn run_happy_path_writes_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.conf");
    write(&cfg, BASE_CONFIG);
    let out = run_in(tmp.path(), &["run", "--config", "c.conf", "--out", "o"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let energy = fs::read_to_string(tmp.path().join("o/energy.csv")).unwrap();
    assert!(energy.starts_with("step,t,kinetic,elastic,thermal_l1,dissipation_cum,residual\n"));
    let fields = fs::read_to_string(tmp.path().join("o/fields_0.csv")).unwrap();
    assert!(fields.starts_with("x,u,v,theta\n"));
    assert!(tmp.path().join("o/norms.csv").exists());

    // One-line summary with the run vitals.
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("min_theta"), "summary missing: {stdout}");
    assert!(stdout.contains("picard_iters"), "summary missing: {stdout}");

    // No temp files left behind.
    let leftovers: Vec<_> = fs::read_dir(tmp.path().join("o"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with(".tmp-"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.conf");
    write(&cfg, BASE_CONFIG);
    assert!(run_in(tmp.path(), &["run", "--config", "c.conf", "--out", "o1"]).status.success());
    assert!(run_in(tmp.path(), &["run", "--config", "c.conf", "--out", "o2"]).status.success());
    for name in ["energy.csv", "norms.csv", "fields_0.csv"] {
        let a = fs::read(tmp.path().join("o1").join(name)).unwrap();
        let b = fs::read(tmp.path().join("o2").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn scientific_notation_parses_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.conf");
    // nu = 1e-3 must behave exactly like nu = 0.001.
    let with_sci = BASE_CONFIG.replace("nu = 1e-2", "nu = 1e-3");
    let with_dec = BASE_CONFIG.replace("nu = 1e-2", "nu = 0.001");
    write(&cfg, &with_sci);
    assert!(run_in(tmp.path(), &["run", "--config", "c.conf", "--out", "a"]).status.success());
    write(&cfg, &with_dec);
    assert!(run_in(tmp.path(), &["run", "--config", "c.conf", "--out", "b"]).status.success());
    assert_eq!(
        fs::read(tmp.path().join("a/energy.csv")).unwrap(),
        fs::read(tmp.path().join("b/energy.csv")).unwrap()
    );
}

#[test]
fn minimal_config_uses_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("m.conf");
    write(
        &cfg,
        "[grid]\na = 0\nb = 1\nn_cells = 64\n[time]\ndt = 0.001\nt_end = 0.01\n",
    );
    let out = run_in(tmp.path(), &["check-data", "--config", "m.conf"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("n_cells = 64"), "{stdout}");
}

#[test]
fn validation_failures_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.conf");

    // Constraint violation: too few cells.
    write(&cfg, "[grid]\na = 0\nb = 1\nn_cells = 1\n[time]\ndt = 0.001\nt_end = 0.1\n");
    let out = run_in(tmp.path(), &["run", "--config", "c.conf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_cells"));

    // Unknown key with its line number.
    write(&cfg, "[grid]\na = 0\nb = 1\nn_cells = 8\nbogus = 3\n[time]\ndt = 0.001\nt_end = 0.1\n");
    let out = run_in(tmp.path(), &["run", "--config", "c.conf"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5") && err.contains("bogus"), "{err}");

    // Missing config file names the flag.
    let out = run_in(tmp.path(), &["run", "--config", "nope.conf"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));

    // Missing required flag: clap usage error remapped from 2 to 1.
    let out = run_in(tmp.path(), &["run"]);
    assert_eq!(out.status.code(), Some(1));

    // Non-decreasing sweep list.
    write(&cfg, BASE_CONFIG);
    let out = run_in(tmp.path(), &["sweep", "--config", "c.conf", "--nu-list", "0.1,0.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("decreasing"));
}

#[test]
fn sweep_writes_pinned_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.conf");
    write(&cfg, BASE_CONFIG);
    let out = run_in(
        tmp.path(),
        &["sweep", "--config", "c.conf", "--out", "s", "--nu-list", "0.1,0.05,0.025"],
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert!(csv.starts_with("nu_hi,nu_lo,dist_u,dist_v,dist_theta\n"));
    assert_eq!(csv.lines().count(), 3, "header + one row per adjacent pair");
}

#[test]
fn stability_and_mms_produce_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.conf");
    write(&cfg, BASE_CONFIG);
    let out = run_in(tmp.path(), &["stability", "--config", "c.conf", "--out", "st"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("slope"));
    let csv = fs::read_to_string(tmp.path().join("st/stability.csv")).unwrap();
    assert!(csv.starts_with("delta,final_dtheta_l2,final_dv_l2,sup_dv_l2,response_constant\n"));

    let out = run_in(tmp.path(), &["mms", "--config", "c.conf", "--out", "m"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("m/mms.csv")).unwrap();
    assert!(csv.starts_with("study,n_cells,dt,error_u_l2,error_theta_l2,order_u,order_theta\n"));
    assert!(csv.contains("spatial,") && csv.contains("temporal,"));
}

#[test]
fn thread_cap_env_var_is_respected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.conf");
    write(&cfg, BASE_CONFIG);
    let out = bin()
        .current_dir(tmp.path())
        .env("THERMO1D_THREADS", "1")
        .args(["sweep", "--config", "c.conf", "--out", "s", "--nu-list", "0.1,0.05"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
