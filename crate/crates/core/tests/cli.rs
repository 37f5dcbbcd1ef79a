use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const KDV: &str = r#"
[model]
kind = "kdv"
alpha = 0.0013020833
beta = 1.0

[initial]
kind = "kdv-one-soliton"

[grid]
points = [64]

[scheme]
scheme = "esav-cn"
tau = 0.01

[run]
t_end = 0.2
energy_every = 5
snapshot_times = [0.1, 0.2]
"#;

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("esav-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn esav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esav"))
        .args(args)
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_every_artifact() {
    let dir = workdir("run");
    let cfg = write_config(&dir, KDV);
    let out = dir.join("out");
    let o = esav(&["run", path(&cfg), "--output", path(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "energy.csv",
        "errors.csv",
        "iters.csv",
        "summary.json",
        "plot.gp",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    assert_eq!(fs::read_dir(out.join("snapshots")).unwrap().count(), 2);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    let energy = fs::read_to_string(out.join("energy.csv")).unwrap();
    assert!(energy.starts_with("t,H_modified,H_true,drift"));
}

#[test]
fn identical_runs_give_identical_numbers() {
    let dir = workdir("determinism");
    let cfg = write_config(&dir, KDV);
    let (a, b) = (dir.join("a"), dir.join("b"));
    assert_eq!(
        esav(&["run", path(&cfg), "-o", path(&a)]).status.code(),
        Some(0)
    );
    assert_eq!(
        esav(&["run", path(&cfg), "-o", path(&b)]).status.code(),
        Some(0)
    );
    for f in ["energy.csv", "errors.csv", "iters.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn converge_and_compare_succeed() {
    let dir = workdir("study");
    let cfg = write_config(&dir, KDV);
    let out = dir.join("converge");
    let o = esav(&[
        "converge",
        path(&cfg),
        "--tau-list",
        "0.02,0.01",
        "-o",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let errors = fs::read_to_string(out.join("errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 3);
    assert!(errors.starts_with("scheme,tau,steps,l2_error,linf_error,l2_order,linf_order"));

    let out = dir.join("compare");
    let o = esav(&[
        "compare",
        path(&cfg),
        "--schemes",
        "sav-cn,esav-gauss:2,esav-gauss-pc:3",
        "-o",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(out.join("summary.json").is_file());
}

#[test]
fn configuration_problems_exit_with_two() {
    let dir = workdir("config");
    let missing = dir.join("absent.toml");
    assert_eq!(esav(&["run", path(&missing)]).status.code(), Some(2));

    let cfg = write_config(&dir, &KDV.replace("tau = 0.01", "tau = 0.01\nbogus = 1"));
    assert_eq!(esav(&["run", path(&cfg)]).status.code(), Some(2));

    let cfg = write_config(&dir, &KDV.replace("tau = 0.01", "tau = 0.03"));
    assert_eq!(esav(&["run", path(&cfg)]).status.code(), Some(2));

    let cfg = write_config(&dir, KDV);
    let o = esav(&["compare", path(&cfg), "--schemes", "leapfrog"]);
    assert_eq!(o.status.code(), Some(2));
    let o = esav(&["converge", path(&cfg), "--tau-list", "0.03"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(esav(&["run"]).status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_one_and_are_recorded() {
    let dir = workdir("failure");
    let body = format!("{KDV}\n[reformulation]\nesav_c0 = 1e-6\n");
    let cfg = write_config(&dir, &body);
    let out = dir.join("out");
    let o = esav(&["run", path(&cfg), "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "failed");
}

#[test]
fn selftest_passes_and_help_documents_outputs() {
    let o = esav(&["selftest", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 5 && text.lines().all(|l| l.starts_with("PASS")));

    let help = String::from_utf8(esav(&["--help"]).stdout).unwrap();
    for column in [
        "energy.csv",
        "l2_order",
        "iters.csv",
        "summary.json",
        "Exit codes",
    ] {
        assert!(help.contains(column), "{column}");
    }
}
