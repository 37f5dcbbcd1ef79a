//! Artifact writers.
//!
//! | file          | columns                                                         |
//! |---------------|-----------------------------------------------------------------|
//! | `energy.csv`  | `t, H_modified, H_true, drift`                                  |
//! | `errors.csv`  | `scheme, tau, steps, l2_error, linf_error, l2_order, linf_order` |
//! | `iters.csv`   | `step, t, iterations, converged`                                |
//!
//! Orders are left blank where they are undefined. `errors.csv` holds only
//! numerical results, so identical configurations give identical bytes;
//! timings go to `summary.json`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::integrators::EnergySample;
use crate::spectral::{FieldState, Grid};

use super::config::{Problem, RunConfig, SnapshotFormat};
use super::study::{grid_meta, ErrorRow, ExperimentReport, RunRecord, StepIterations};

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_rows<T: Serialize>(
    path: &Path,
    rows: impl IntoIterator<Item = T>,
    header: &[&str],
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy_csv(path: &Path, samples: &[EnergySample]) -> Result<()> {
    write_rows(
        path,
        samples
            .iter()
            .map(|s| (s.t, s.modified, s.hamiltonian, s.drift)),
        &["t", "H_modified", "H_true", "drift"],
    )
}

pub fn write_errors_csv(path: &Path, rows: &[(String, ErrorRow)]) -> Result<()> {
    write_rows(
        path,
        rows.iter().map(|(label, r)| {
            (
                label,
                r.tau,
                r.steps,
                r.l2_error,
                r.linf_error,
                r.l2_order,
                r.linf_order,
            )
        }),
        &[
            "scheme",
            "tau",
            "steps",
            "l2_error",
            "linf_error",
            "l2_order",
            "linf_order",
        ],
    )
}

pub fn write_iters_csv(path: &Path, steps: &[StepIterations]) -> Result<()> {
    write_rows(
        path,
        steps
            .iter()
            .map(|s| (s.step, s.t, s.iterations, s.converged)),
        &["step", "t", "iterations", "converged"],
    )
}

/// Writes each snapshot as `step_NNNNNNNN.txt`, or as `.bin` plus a `.json`
/// header. Text files hold one `Nx x Ny` matrix per component separated by a
/// blank line; binary files hold the components back to back in row-major
/// order.
pub fn write_snapshots(
    dir: &Path,
    grid: &Grid,
    tau: f64,
    snapshots: &[(f64, FieldState)],
    format: SnapshotFormat,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (_, ny) = grid.shape();
    for (t, z) in snapshots {
        let step = (t / tau).round() as u64;
        let stem = format!("step_{step:08}");
        match format {
            SnapshotFormat::Text => {
                let mut out = String::new();
                out.push_str(&format!("# t = {t}\n"));
                for (c, comp) in z.components().iter().enumerate() {
                    if c > 0 {
                        out.push('\n');
                    }
                    for row in comp.chunks(ny) {
                        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                        out.push_str(&line.join(" "));
                        out.push('\n');
                    }
                }
                fs::write(dir.join(format!("{stem}.txt")), out)?;
            }
            SnapshotFormat::Binary => {
                let mut bytes = Vec::with_capacity(8 * z.count() * z.len());
                for v in z.values() {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
                fs::write(dir.join(format!("{stem}.bin")), bytes)?;
                let header = json!({
                    "t": t,
                    "step": step,
                    "components": z.count(),
                    "shape": grid.axes().iter().map(|a| a.points).collect::<Vec<_>>(),
                    "dtype": "f64",
                    "endianness": "little",
                    "layout": "component-major, then row-major (x slowest)",
                });
                fs::write(
                    dir.join(format!("{stem}.json")),
                    serde_json::to_string_pretty(&header).unwrap(),
                )?;
            }
        }
    }
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(serde_json::to_string_pretty(value).unwrap().as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

const PLOT_PREAMBLE: &str = "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\nset grid\n";

fn run_plot_script() -> String {
    format!(
        "{PLOT_PREAMBLE}\
set output 'energy.png'\n\
set xlabel 't'\n\
set ylabel 'H_modified - H_modified(0)'\n\
plot 'energy.csv' using 1:4 with lines title 'modified energy drift'\n\
set output 'hamiltonian.png'\n\
set ylabel 'H'\n\
plot 'energy.csv' using 1:3 with lines title 'original energy', \\\n\
     'energy.csv' using 1:2 with lines title 'modified energy'\n\
set output 'iterations.png'\n\
set ylabel 'iterations per step'\n\
plot 'iters.csv' using 2:3 with steps title 'iterations'\n"
    )
}

fn study_plot_script() -> String {
    format!(
        "{PLOT_PREAMBLE}\
set output 'convergence.png'\n\
set logscale xy\n\
set xlabel 'tau'\n\
set ylabel 'error at t_end'\n\
plot 'errors.csv' using 2:4 with linespoints title 'L2', \\\n\
     'errors.csv' using 2:5 with linespoints title 'Linf'\n"
    )
}

fn compare_plot_script(labels: &[(String, PathBuf)]) -> String {
    let mut s = format!(
        "{PLOT_PREAMBLE}set output 'energy.png'\nset xlabel 't'\nset ylabel 'H_modified - H_modified(0)'\nplot "
    );
    let parts: Vec<String> = labels
        .iter()
        .map(|(label, dir)| {
            format!(
                "'{}/energy.csv' using 1:4 with lines title '{label}'",
                dir.display()
            )
        })
        .collect();
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}

fn model_meta(problem: &Problem) -> serde_json::Value {
    json!({
        "name": problem.model.name(),
        "parameters": problem.model.parameters().iter().map(|(k, v)| (k.to_string(), *v)).collect::<Vec<_>>(),
    })
}

fn record_summary(record: &RunRecord) -> serde_json::Value {
    json!({
        "status": if record.succeeded() { "ok" } else { "failed" },
        "error": record.failure,
        "scheme": record.scheme,
        "label": record.label,
        "t_end": record.t_end,
        "steps_planned": record.steps_planned,
        "steps_completed": record.steps_completed,
        "max_energy_drift": record.max_energy_drift,
        "max_step_residual": record.max_step_residual,
        "max_iterations": record.max_iterations(),
        "unconverged_steps": record.unconverged_steps(),
        "final_error": record.final_error,
        "cpu_seconds": record.cpu_seconds,
    })
}

fn write_record_files(
    dir: &Path,
    problem: &Problem,
    config: &RunConfig,
    record: &RunRecord,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_energy_csv(&dir.join("energy.csv"), &record.energy)?;
    let rows: Vec<(String, ErrorRow)> = record
        .final_error
        .map(|e| {
            vec![(
                record.label.clone(),
                ErrorRow {
                    tau: record.scheme.tau,
                    steps: record.steps_completed,
                    l2_error: e.l2,
                    linf_error: e.linf,
                    l2_order: None,
                    linf_order: None,
                    cpu_seconds: record.cpu_seconds,
                },
            )]
        })
        .unwrap_or_default();
    write_errors_csv(&dir.join("errors.csv"), &rows)?;
    write_iters_csv(&dir.join("iters.csv"), &record.iterations)?;
    write_snapshots(
        &dir.join("snapshots"),
        problem.grid(),
        record.scheme.tau,
        &record.snapshots,
        config.run.snapshot_format,
    )?;
    fs::write(dir.join("plot.gp"), run_plot_script())?;
    Ok(())
}

/// Writes the artifacts of a single run into `dir`.
pub fn write_run(
    dir: &Path,
    config: &RunConfig,
    problem: &Problem,
    record: &RunRecord,
) -> Result<()> {
    write_record_files(dir, problem, config, record)?;
    let mut summary = record_summary(record);
    summary["model"] = model_meta(problem);
    summary["grid"] = serde_json::to_value(grid_meta(problem)).unwrap();
    summary["config"] = serde_json::to_value(config).unwrap();
    write_json(&dir.join("summary.json"), &summary)
}

/// Writes a convergence study: the table at the top level and one run
/// directory per step size under `runs/`.
pub fn write_study(
    dir: &Path,
    config: &RunConfig,
    problem: &Problem,
    report: &ExperimentReport,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let rows: Vec<(String, ErrorRow)> = report
        .errors
        .iter()
        .map(|r| (report.scheme.clone(), *r))
        .collect();
    write_errors_csv(&dir.join("errors.csv"), &rows)?;
    let mut run_dirs = Vec::new();
    for (i, record) in report.runs.iter().enumerate() {
        let sub = dir.join("runs").join(format!("tau_{i:02}"));
        write_record_files(&sub, problem, config, record)?;
        run_dirs.push(sub);
    }
    // The finest run's series doubles as the top-level energy and iteration files.
    if let Some(last) = report.runs.last() {
        write_energy_csv(&dir.join("energy.csv"), &last.energy)?;
        write_iters_csv(&dir.join("iters.csv"), &last.iterations)?;
    }
    fs::create_dir_all(dir.join("snapshots"))?;
    fs::write(dir.join("plot.gp"), study_plot_script())?;
    let mut summary = serde_json::to_value(report).unwrap();
    summary["status"] = json!("ok");
    summary["runs"] = report.runs.iter().map(record_summary).collect();
    summary["config"] = serde_json::to_value(config).unwrap();
    write_json(&dir.join("summary.json"), &summary)
}

/// Writes a scheme comparison: one run directory per scheme and a combined
/// error table, summary and plot script.
pub fn write_comparison(
    dir: &Path,
    config: &RunConfig,
    problem: &Problem,
    records: &[RunRecord],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for record in records {
        let name = record.label.replace(['(', ')', '='], "_");
        let sub = PathBuf::from(name.trim_end_matches('_'));
        write_record_files(&dir.join(&sub), problem, config, record)?;
        if let Some(e) = record.final_error {
            rows.push((
                record.label.clone(),
                ErrorRow {
                    tau: record.scheme.tau,
                    steps: record.steps_completed,
                    l2_error: e.l2,
                    linf_error: e.linf,
                    l2_order: None,
                    linf_order: None,
                    cpu_seconds: record.cpu_seconds,
                },
            ));
        }
        labels.push((record.label.clone(), sub));
    }
    write_errors_csv(&dir.join("errors.csv"), &rows)?;
    if let Some(first) = records.first() {
        write_energy_csv(&dir.join("energy.csv"), &first.energy)?;
        write_iters_csv(&dir.join("iters.csv"), &first.iterations)?;
    }
    fs::create_dir_all(dir.join("snapshots"))?;
    fs::write(dir.join("plot.gp"), compare_plot_script(&labels))?;
    let failed = records.iter().any(|r| !r.succeeded());
    let summary = json!({
        "status": if failed { "failed" } else { "ok" },
        "model": model_meta(problem),
        "grid": grid_meta(problem),
        "runs": records.iter().map(record_summary).collect::<Vec<_>>(),
        "config": config,
    });
    write_json(&dir.join("summary.json"), &summary)
}
