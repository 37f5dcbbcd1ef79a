use crate::error::{Error, Result};
use crate::linsolve::{CnSolver, StageSolver};
use crate::models::{energy, HamiltonianModel};
use crate::reformulation::{
    esav_init, modified_energy_esav, modified_energy_sav, sav_init, EsavState, SavState,
};
use crate::spectral::FieldState;
use crate::tableaux::{extrapolation_coeffs, gauss_tableau, ExtrapolationMatrix};

use super::cn::{sav_cn_update, step_esav_cn, step_sav_cn};
use super::gauss::{
    step_esav_gauss, step_esav_gauss_pc, step_gauss_implicit, StageStep, StepMemory,
};
use super::observe::Observer;
use super::{Auxiliary, SchemeConfig, SchemeKind};

enum Kernel {
    SavCn {
        solver: CnSolver,
    },
    EsavCn {
        solver: CnSolver,
        bootstrap: StageSolver,
    },
    Gauss {
        solver: StageSolver,
        extrapolation: ExtrapolationMatrix,
    },
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepReport {
    /// Linear solves (or fixed-point sweeps) spent on the step.
    pub iterations: usize,
    pub converged: bool,
    /// The step was the fully implicit start-up step.
    pub bootstrap: bool,
}

/// Stateful fixed-step integrator for one model and scheme.
///
/// Schemes that extrapolate from the previous step start with one fully
/// implicit step: implicit midpoint on the SAV system for SAV-CN, the
/// one-stage Gauss method for ESAV-CN, and the `s`-stage Gauss method for
/// the ESAV-Gauss family. Each is solved by fixed-point iteration to `tol`.
pub struct Integrator {
    model: HamiltonianModel,
    config: SchemeConfig,
    kernel: Kernel,
    z: FieldState,
    aux: Auxiliary,
    memory: Option<StepMemory>,
    steps: usize,
    initial_modified: f64,
}

impl Integrator {
    pub fn new(model: &HamiltonianModel, config: SchemeConfig, z0: FieldState) -> Result<Self> {
        config.validate()?;
        model.check_state(&z0)?;
        if !z0.is_finite() {
            return Err(Error::invalid("initial state has non-finite entries"));
        }
        let tau = config.tau;
        let (kernel, aux) = match config.scheme {
            SchemeKind::SavCn => (
                Kernel::SavCn {
                    solver: CnSolver::new(model, tau, 0.5)?,
                },
                Auxiliary::Sav(sav_init(model, &z0, config.c0, config.energy_sign)?),
            ),
            SchemeKind::EsavCn => (
                Kernel::EsavCn {
                    solver: CnSolver::new(model, tau, 0.5)?,
                    bootstrap: StageSolver::new(model, &gauss_tableau(1)?, tau)?,
                },
                Auxiliary::Esav(esav_init(model, &z0, config.c0, config.energy_sign)?),
            ),
            SchemeKind::EsavGauss | SchemeKind::EsavGaussPc | SchemeKind::GaussImplicit => {
                let tableau = gauss_tableau(config.stages)?;
                (
                    Kernel::Gauss {
                        solver: StageSolver::new(model, &tableau, tau)?,
                        extrapolation: extrapolation_coeffs(tableau.c())?,
                    },
                    Auxiliary::Esav(esav_init(model, &z0, config.c0, config.energy_sign)?),
                )
            }
        };
        let mut integrator = Integrator {
            model: model.clone(),
            config,
            kernel,
            z: z0,
            aux,
            memory: None,
            steps: 0,
            initial_modified: 0.0,
        };
        integrator.initial_modified = integrator.modified_energy();
        Ok(integrator)
    }

    pub fn model(&self) -> &HamiltonianModel {
        &self.model
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn state(&self) -> &FieldState {
        &self.z
    }

    pub fn auxiliary(&self) -> Auxiliary {
        self.aux
    }

    pub fn memory(&self) -> Option<&StepMemory> {
        self.memory.as_ref()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.config.tau
    }

    /// The scheme's conserved quantity at the current state.
    pub fn modified_energy(&self) -> f64 {
        match self.aux {
            Auxiliary::Sav(s) => modified_energy_sav(&self.model, &self.z, s.w, s.sign),
            Auxiliary::Esav(s) => modified_energy_esav(&self.model, &self.z, s.r, s.c0),
        }
    }

    pub fn initial_modified_energy(&self) -> f64 {
        self.initial_modified
    }

    /// The original Hamiltonian `H(z)`.
    pub fn hamiltonian(&self) -> f64 {
        energy(&self.model, &self.z).total
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let report = match (&self.kernel, self.aux) {
            (Kernel::SavCn { solver }, Auxiliary::Sav(s)) => {
                let (z, w, report) = match &self.memory {
                    None => {
                        let (z, w, iterations) = self.sav_bootstrap(solver, s)?;
                        (
                            z,
                            w,
                            StepReport {
                                iterations,
                                converged: true,
                                bootstrap: true,
                            },
                        )
                    }
                    Some(mem) => {
                        let (z, w) = step_sav_cn(&self.model, solver, &self.z, s, &mem.z_prev)?;
                        (
                            z,
                            w,
                            StepReport {
                                iterations: 1,
                                converged: true,
                                bootstrap: false,
                            },
                        )
                    }
                };
                let z_prev = std::mem::replace(&mut self.z, z);
                self.memory = Some(StepMemory {
                    z_prev,
                    r_prev: s.w,
                    stages: Vec::new(),
                    stage_r: Vec::new(),
                });
                self.aux = Auxiliary::Sav(SavState { w, ..s });
                report
            }
            (Kernel::EsavCn { solver, bootstrap }, Auxiliary::Esav(s)) => {
                let (z, r, report) = match &self.memory {
                    None => {
                        let st = step_gauss_implicit(
                            &self.model,
                            bootstrap,
                            &self.z,
                            s.r,
                            s.c0,
                            self.config.tol,
                            self.config.max_iter,
                        )?;
                        let rep = StepReport {
                            iterations: st.iterations,
                            converged: true,
                            bootstrap: true,
                        };
                        (st.z, st.r, rep)
                    }
                    Some(mem) => {
                        let (z, r) = step_esav_cn(
                            &self.model,
                            solver,
                            &self.z,
                            s.r,
                            s.c0,
                            &mem.z_prev,
                            mem.r_prev,
                        )?;
                        (
                            z,
                            r,
                            StepReport {
                                iterations: 1,
                                converged: true,
                                bootstrap: false,
                            },
                        )
                    }
                };
                let z_prev = std::mem::replace(&mut self.z, z);
                self.memory = Some(StepMemory {
                    z_prev,
                    r_prev: s.r,
                    stages: Vec::new(),
                    stage_r: Vec::new(),
                });
                self.aux = Auxiliary::Esav(EsavState { r, c0: s.c0 });
                report
            }
            (
                Kernel::Gauss {
                    solver,
                    extrapolation,
                },
                Auxiliary::Esav(s),
            ) => {
                let (tol, max_iter) = (self.config.tol, self.config.max_iter);
                let (st, bootstrap): (StageStep, bool) = match (&self.memory, self.config.scheme) {
                    (None, _) | (_, SchemeKind::GaussImplicit) => (
                        step_gauss_implicit(
                            &self.model,
                            solver,
                            &self.z,
                            s.r,
                            s.c0,
                            tol,
                            max_iter,
                        )?,
                        self.memory.is_none(),
                    ),
                    (Some(mem), SchemeKind::EsavGauss) => (
                        step_esav_gauss(
                            &self.model,
                            solver,
                            extrapolation,
                            &self.z,
                            s.r,
                            s.c0,
                            mem,
                        )?,
                        false,
                    ),
                    (Some(mem), _) => {
                        let (tol, max_iter) = match self.config.pc_sweeps {
                            Some(n) => (0.0, n),
                            None => (tol, max_iter),
                        };
                        (
                            step_esav_gauss_pc(
                                &self.model,
                                solver,
                                extrapolation,
                                &self.z,
                                s.r,
                                s.c0,
                                mem,
                                tol,
                                max_iter,
                            )?,
                            false,
                        )
                    }
                };
                let report = StepReport {
                    iterations: st.iterations,
                    converged: st.converged,
                    bootstrap,
                };
                let z_prev = std::mem::replace(&mut self.z, st.z);
                self.memory = Some(StepMemory {
                    z_prev,
                    r_prev: s.r,
                    stages: st.stages,
                    stage_r: st.stage_r,
                });
                self.aux = Auxiliary::Esav(EsavState { r: st.r, c0: s.c0 });
                report
            }
            _ => unreachable!("kernel and auxiliary variable are created together"),
        };
        self.steps += 1;
        Ok(report)
    }

    /// Implicit midpoint on the SAV system: iterate the SAV-CN update with
    /// the nonlinear term frozen at `(z^0 + z^1) / 2`.
    fn sav_bootstrap(&self, solver: &CnSolver, s: SavState) -> Result<(FieldState, f64, usize)> {
        let mut z_bar = self.z.clone();
        let mut previous: Option<FieldState> = None;
        let mut residual = f64::INFINITY;
        for iteration in 1..=self.config.max_iter {
            let (z1, w1) = sav_cn_update(&self.model, solver, &self.z, s, &z_bar)?;
            if let Some(p) = &previous {
                residual = z1.max_abs_diff(p);
            }
            if residual < self.config.tol {
                return Ok((z1, w1, iteration));
            }
            z_bar = FieldState::combination(&[0.5, 0.5], &[&self.z, &z1]);
            previous = Some(z1);
        }
        Err(Error::NonConvergence {
            iterations: self.config.max_iter,
            residual,
        })
    }
}

/// Summary of an [`integrate`] run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub state: FieldState,
    pub auxiliary: Auxiliary,
    pub time: f64,
    pub steps: usize,
    /// Iterations of every step, in order.
    pub iterations: Vec<usize>,
    /// Prediction-correction steps that hit `max_iter` before `tol`.
    pub unconverged_steps: usize,
    pub initial_modified_energy: f64,
    pub final_modified_energy: f64,
}

/// Number of steps of size `tau` that reach `t_end`.
pub fn step_count(t_end: f64, tau: f64) -> Result<usize> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(format!(
            "t_end must be non-negative, got {t_end}"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    let n = (t_end / tau).round();
    if (n * tau - t_end).abs() > 1e-12 * t_end.max(1.0) {
        return Err(Error::invalid(format!(
            "t_end = {t_end} is not an integer multiple of tau = {tau}"
        )));
    }
    Ok(n as usize)
}

/// Advance `z0` to `t_end`, calling every observer after each step (and once
/// before the first step).
pub fn integrate(
    model: &HamiltonianModel,
    config: SchemeConfig,
    z0: FieldState,
    t_end: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    let n = step_count(t_end, config.tau)?;
    let mut integ = Integrator::new(model, config, z0)?;
    let mut iterations = Vec::with_capacity(n);
    let mut unconverged = 0;
    if n > 0 {
        for obs in observers.iter_mut() {
            obs.observe(&integ, None)?;
        }
    }
    for _ in 0..n {
        let report = integ.step()?;
        iterations.push(report.iterations);
        if !report.converged {
            unconverged += 1;
        }
        for obs in observers.iter_mut() {
            obs.observe(&integ, Some(&report))?;
        }
    }
    Ok(Trajectory {
        state: integ.state().clone(),
        auxiliary: integ.auxiliary(),
        time: integ.time(),
        steps: integ.steps(),
        iterations,
        unconverged_steps: unconverged,
        initial_modified_energy: integ.initial_modified_energy(),
        final_modified_energy: integ.modified_energy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::nls_model;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn setup() -> (HamiltonianModel, FieldState) {
        let g = make_grid(&[(0.0, 2.0 * PI), (0.0, 2.0 * PI)], &[8, 8]).unwrap();
        let m = nls_model(1.0, &g).unwrap();
        let z = FieldState::new(vec![
            g.sample(|x, y| (x + y).cos()),
            g.sample(|x, y| (x + y).sin()),
        ])
        .unwrap();
        (m, z)
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let (m, z) = setup();
        let mut rec = super::super::EnergyRecorder::every(1);
        let traj = integrate(
            &m,
            SchemeConfig::new(SchemeKind::EsavCn, 1, 0.1),
            z.clone(),
            0.0,
            &mut [&mut rec],
        )
        .unwrap();
        assert_eq!(traj.state, z);
        assert_eq!(traj.steps, 0);
        assert!(rec.samples().is_empty());
    }

    #[test]
    fn non_integer_step_count_is_rejected() {
        assert!(step_count(1.0, 0.3).is_err());
        assert_eq!(step_count(1.0, 0.001 / 4.0).unwrap(), 4000);
        assert_eq!(step_count(100.0, 0.2).unwrap(), 500);
    }

    #[test]
    fn every_scheme_conserves_its_energy_over_a_few_steps() {
        let (m, z) = setup();
        for scheme in SchemeKind::ALL {
            let mut integ =
                Integrator::new(&m, SchemeConfig::new(scheme, 2, 0.05), z.clone()).unwrap();
            let h0 = integ.modified_energy();
            for _ in 0..5 {
                integ.step().unwrap();
            }
            let h = integ.modified_energy();
            assert!(
                (h - h0).abs() < 1e-11 * (1.0 + h0.abs()),
                "{scheme}: {h0} -> {h}"
            );
        }
    }

    #[test]
    fn bootstrap_is_reported_once() {
        let (m, z) = setup();
        let mut integ =
            Integrator::new(&m, SchemeConfig::new(SchemeKind::EsavGaussPc, 2, 0.05), z).unwrap();
        assert!(integ.step().unwrap().bootstrap);
        assert!(!integ.step().unwrap().bootstrap);
        assert!(integ.memory().is_some());
    }

    #[test]
    fn fixed_sweep_count_is_honoured_after_bootstrap() {
        let (m, z) = setup();
        for n in [1, 3] {
            let cfg = SchemeConfig::new(SchemeKind::EsavGaussPc, 2, 0.05).with_pc_sweeps(n);
            let mut integ = Integrator::new(&m, cfg, z.clone()).unwrap();
            let h0 = integ.modified_energy();
            assert!(integ.step().unwrap().converged);
            for _ in 0..5 {
                let rep = integ.step().unwrap();
                assert_eq!(rep.iterations, n);
            }
            assert!((integ.modified_energy() - h0).abs() < 1e-12 * (1.0 + h0.abs()));
        }
    }
}
