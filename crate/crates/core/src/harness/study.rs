//! Single runs, convergence studies and scheme comparisons.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrators::{
    field_errors, step_count, EnergySample, ErrorSample, Integrator, SchemeConfig,
};
use crate::spectral::FieldState;

use super::config::{Problem, RunConfig};

/// Iteration count of one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepIterations {
    pub step: usize,
    pub t: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Everything recorded while integrating one problem with one scheme.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub label: String,
    pub scheme: SchemeConfig,
    pub t_end: f64,
    pub steps_planned: usize,
    pub steps_completed: usize,
    pub energy: Vec<EnergySample>,
    /// `max_n |H(n) - H(0)|`
    pub max_energy_drift: f64,
    /// `max_n |H(n+1) - H(n)| / (1 + |H(n)|)`
    pub max_step_residual: f64,
    pub iterations: Vec<StepIterations>,
    #[serde(skip)]
    pub snapshots: Vec<(f64, FieldState)>,
    #[serde(skip)]
    pub final_state: FieldState,
    pub final_error: Option<ErrorSample>,
    pub cpu_seconds: f64,
    /// Diagnostic of the error that stopped the run early.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    pub fn max_iterations(&self) -> usize {
        self.iterations
            .iter()
            .map(|s| s.iterations)
            .max()
            .unwrap_or(0)
    }

    pub fn unconverged_steps(&self) -> usize {
        self.iterations.iter().filter(|s| !s.converged).count()
    }
}

/// Integrates `problem` to `t_end`. Scheme failures end the run early and
/// are reported in [`RunRecord::failure`]; the caller decides what they mean.
pub fn run_scheme(
    problem: &Problem,
    scheme: SchemeConfig,
    t_end: f64,
    energy_every: usize,
    snapshot_times: &[f64],
) -> Result<RunRecord> {
    let steps = step_count(t_end, scheme.tau)?;
    let snapshot_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|&t| step_count(t, scheme.tau))
        .collect::<Result<_>>()?;
    let mut record = RunRecord {
        label: scheme.label(),
        scheme: scheme.clone(),
        t_end,
        steps_planned: steps,
        steps_completed: 0,
        energy: Vec::new(),
        max_energy_drift: 0.0,
        max_step_residual: 0.0,
        iterations: Vec::with_capacity(steps),
        snapshots: Vec::new(),
        final_state: problem.initial.clone(),
        final_error: None,
        cpu_seconds: 0.0,
        failure: None,
    };
    let started = Instant::now();
    let mut integ = match Integrator::new(&problem.model, scheme, problem.initial.clone()) {
        Ok(i) => i,
        Err(e) => {
            record.failure = Some(e.to_string());
            return Ok(record);
        }
    };
    let h0 = integ.modified_energy();
    let sample = |integ: &Integrator, record: &mut RunRecord| {
        let n = integ.steps();
        if n.is_multiple_of(energy_every) || n == steps {
            let modified = integ.modified_energy();
            record.energy.push(EnergySample {
                t: integ.time(),
                modified,
                hamiltonian: integ.hamiltonian(),
                drift: modified - h0,
            });
        }
        if snapshot_steps.contains(&n) {
            record.snapshots.push((integ.time(), integ.state().clone()));
        }
    };
    sample(&integ, &mut record);
    let mut previous = h0;
    for _ in 0..steps {
        match integ.step() {
            Ok(report) => {
                record.iterations.push(StepIterations {
                    step: integ.steps(),
                    t: integ.time(),
                    iterations: report.iterations,
                    converged: report.converged,
                });
                let h = integ.modified_energy();
                record.max_energy_drift = record.max_energy_drift.max((h - h0).abs());
                record.max_step_residual = record
                    .max_step_residual
                    .max((h - previous).abs() / (1.0 + previous.abs()));
                previous = h;
                sample(&integ, &mut record);
                if !integ.state().is_finite() || !h.is_finite() {
                    record.failure =
                        Some(format!("state became non-finite at t = {}", integ.time()));
                    break;
                }
            }
            Err(e) => {
                record.failure = Some(format!("step {} failed: {e}", integ.steps() + 1));
                break;
            }
        }
    }
    record.cpu_seconds = started.elapsed().as_secs_f64();
    record.steps_completed = integ.steps();
    record.final_state = integ.state().clone();
    if record.succeeded() {
        if let Some(exact) = problem.exact(integ.time()) {
            let (l2, linf) = field_errors(problem.grid(), integ.state(), &exact?)?;
            record.final_error = Some(ErrorSample {
                t: integ.time(),
                l2,
                linf,
            });
        }
    }
    Ok(record)
}

/// Observed order between two adjacent rows; `None` when either error is
/// zero or not finite.
///
/// ```
/// use esav::harness::observed_order;
/// assert_eq!(observed_order(0.2, 4e-6, 0.1, 1e-6), Some(2.0));
/// assert_eq!(observed_order(0.2, 0.0, 0.1, 0.0), None);
/// ```
pub fn observed_order(
    tau_coarse: f64,
    err_coarse: f64,
    tau_fine: f64,
    err_fine: f64,
) -> Option<f64> {
    if !(err_coarse > 0.0 && err_fine > 0.0) || !err_coarse.is_finite() || !err_fine.is_finite() {
        return None;
    }
    Some((err_coarse / err_fine).ln() / (tau_coarse / tau_fine).ln())
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub tau: f64,
    pub steps: usize,
    pub l2_error: f64,
    pub linf_error: f64,
    pub l2_order: Option<f64>,
    pub linf_order: Option<f64>,
    pub cpu_seconds: f64,
}

/// Fills in the order columns from adjacent rows.
pub fn error_table(samples: &[(f64, usize, ErrorSample, f64)]) -> Vec<ErrorRow> {
    let mut rows: Vec<ErrorRow> = Vec::with_capacity(samples.len());
    for &(tau, steps, e, cpu) in samples {
        let (l2_order, linf_order) = match rows.last() {
            Some(p) => (
                observed_order(p.tau, p.l2_error, tau, e.l2),
                observed_order(p.tau, p.linf_error, tau, e.linf),
            ),
            None => (None, None),
        };
        rows.push(ErrorRow {
            tau,
            steps,
            l2_error: e.l2,
            linf_error: e.linf,
            l2_order,
            linf_order,
            cpu_seconds: cpu,
        });
    }
    rows
}

/// Per-run iteration statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRow {
    pub tau: f64,
    pub max_iterations: usize,
    pub mean_iterations: f64,
    pub unconverged_steps: usize,
}

impl IterationRow {
    fn from_record(r: &RunRecord) -> Self {
        let total: usize = r.iterations.iter().map(|s| s.iterations).sum();
        IterationRow {
            tau: r.scheme.tau,
            max_iterations: r.max_iterations(),
            mean_iterations: total as f64 / r.iterations.len().max(1) as f64,
            unconverged_steps: r.unconverged_steps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub points: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
}

/// Result of a convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub model: String,
    pub parameters: Vec<(String, f64)>,
    pub grid: GridMeta,
    pub scheme: String,
    pub t_end: f64,
    pub errors: Vec<ErrorRow>,
    pub iterations: Vec<IterationRow>,
    /// `(tau, max |H(n) - H(0)|)` per run.
    pub energy_drift: Vec<(f64, f64)>,
    #[serde(skip)]
    pub runs: Vec<RunRecord>,
}

pub(crate) fn grid_meta(problem: &Problem) -> GridMeta {
    let axes = problem.grid().axes();
    GridMeta {
        points: axes.iter().map(|a| a.points).collect(),
        bounds: axes.iter().map(|a| (a.lower, a.upper)).collect(),
    }
}

/// Runs the configured scheme once per `tau` and tabulates the errors at
/// `t_end` against the exact solution.
pub fn convergence_study(config: &RunConfig, taus: &[f64]) -> Result<ExperimentReport> {
    if taus.is_empty() {
        return Err(Error::Config("the tau list is empty".into()));
    }
    for &tau in taus {
        let scheme = config.scheme_config(config.scheme.scheme, config.scheme.stages, tau);
        scheme
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        step_count(config.run.t_end, tau).map_err(|e| Error::Config(e.to_string()))?;
    }
    let problem = config.problem()?;
    if !problem.has_exact() {
        return Err(Error::Config(
            "a convergence study needs an initial condition with an exact solution".into(),
        ));
    }
    let mut runs = Vec::with_capacity(taus.len());
    for &tau in taus {
        let scheme = config.scheme_config(config.scheme.scheme, config.scheme.stages, tau);
        let record = run_scheme(
            &problem,
            scheme,
            config.run.t_end,
            config.run.energy_every,
            &[],
        )?;
        if let Some(f) = &record.failure {
            return Err(Error::Precondition(format!(
                "run with tau = {tau} failed: {f}"
            )));
        }
        runs.push(record);
    }
    let samples: Vec<_> = runs
        .iter()
        .map(|r| {
            (
                r.scheme.tau,
                r.steps_completed,
                r.final_error.expect("exact solution available"),
                r.cpu_seconds,
            )
        })
        .collect();
    Ok(ExperimentReport {
        model: problem.model.name().to_string(),
        parameters: problem
            .model
            .parameters()
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        grid: grid_meta(&problem),
        scheme: config.primary_scheme().label(),
        t_end: config.run.t_end,
        errors: error_table(&samples),
        iterations: runs.iter().map(IterationRow::from_record).collect(),
        energy_drift: runs
            .iter()
            .map(|r| (r.scheme.tau, r.max_energy_drift))
            .collect(),
        runs,
    })
}

/// Runs several schemes on the same problem and step size.
pub fn compare_schemes(
    config: &RunConfig,
    schemes: &[(crate::integrators::SchemeKind, usize)],
) -> Result<Vec<RunRecord>> {
    let problem = config.problem()?;
    schemes
        .iter()
        .map(|&(kind, stages)| {
            let scheme = config.scheme_config(kind, stages, config.scheme.tau);
            scheme
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
            run_scheme(
                &problem,
                scheme,
                config.run.t_end,
                config.run.energy_every,
                &config.run.snapshot_times,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::presets;
    use crate::integrators::SchemeKind;

    #[test]
    fn orders_only_between_adjacent_rows() {
        let e = |l2: f64| ErrorSample {
            t: 1.0,
            l2,
            linf: l2 / 2.0,
        };
        let rows = error_table(&[
            (0.1, 10, e(4e-4), 0.0),
            (0.05, 20, e(1e-4), 0.0),
            (0.025, 40, e(0.0), 0.0),
        ]);
        assert_eq!(rows[0].l2_order, None);
        assert!((rows[1].l2_order.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(rows[2].l2_order, None);
    }

    #[test]
    fn exact_solution_as_numerical_result_has_zero_error() {
        let cfg = presets::kdv_two_soliton(64, SchemeKind::EsavCn, 0.5, 1.0);
        let p = cfg.problem().unwrap();
        let z = p.exact(1.0).unwrap().unwrap();
        let (l2, linf) = field_errors(p.grid(), &z, &z).unwrap();
        assert_eq!((l2, linf), (0.0, 0.0));
        let rows = error_table(&[
            (0.5, 2, ErrorSample { t: 1.0, l2, linf }, 0.0),
            (0.25, 4, ErrorSample { t: 1.0, l2, linf }, 0.0),
        ]);
        assert_eq!(rows[1].l2_order, None);
    }

    #[test]
    fn small_study_is_second_order() {
        let cfg = presets::nls_plane_wave(8, SchemeKind::EsavCn, 1e-3, 1.0);
        let report = convergence_study(&cfg, &[1e-3, 5e-4]).unwrap();
        let order = report.errors[1].l2_order.unwrap();
        assert!((order - 2.0).abs() < 0.01, "{order}");
        assert_eq!(report.iterations.len(), 2);
    }

    #[test]
    fn failed_runs_keep_a_diagnostic() {
        // SAV with C0 = 0 in the default orientation: H2 < 0 makes it infeasible.
        let mut cfg = presets::nls_plane_wave(8, SchemeKind::SavCn, 0.1, 0.2);
        cfg.reformulation.energy_sign = crate::reformulation::EnergySign::Positive;
        let p = cfg.problem().unwrap();
        let r = run_scheme(&p, cfg.primary_scheme(), 0.2, 1, &[]).unwrap();
        assert!(!r.succeeded());
        assert!(r.failure.unwrap().contains("infeasible"));
    }

    #[test]
    fn bad_tau_in_study_is_a_config_error() {
        let cfg = presets::nls_plane_wave(8, SchemeKind::EsavCn, 1e-3, 1.0);
        assert!(matches!(
            convergence_study(&cfg, &[0.3]),
            Err(Error::Config(_))
        ));
    }
}
