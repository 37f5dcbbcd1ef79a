//! Gauss collocation applied to the ESAV system.
//!
//! All three Gauss-based schemes share one building block: a *sweep* that
//! freezes the nonlinear term `B` at given stage guesses, solves the linear
//! stage equations, and updates the stage logarithms
//! `r_i = r^n + tau sum_j a_ij l_j` with `l_i = (B_i, k_i)_h / C0`. The step is
//! then closed with the quadrature weights. Since `(k_i, L z_i)_h = -C0 l_i`
//! for any frozen `B_i`, every sweep conserves `(z, Lz)_h / 2 + C0 r`.
//!
//! * ESAV-Gauss: one sweep, guesses extrapolated from the previous step.
//! * ESAV-Gauss-PC: sweeps until stage changes drop below `tol`, starting
//!   from the extrapolated guesses.
//! * Gauss (fully implicit): same iteration, started from `(z^n, e^n)`.

use crate::error::{Error, Result};
use crate::linsolve::StageSolver;
use crate::models::HamiltonianModel;
use crate::reformulation::esav_b;
use crate::spectral::FieldState;
use crate::tableaux::ExtrapolationMatrix;

/// What the previous step leaves behind for extrapolation.
#[derive(Debug, Clone)]
pub struct StepMemory {
    pub z_prev: FieldState,
    pub r_prev: f64,
    /// Stage values of the previous step (empty for Crank-Nicolson schemes).
    pub stages: Vec<FieldState>,
    /// Stage logarithms `ln e_i` of the previous step.
    pub stage_r: Vec<f64>,
}

/// Result of one Gauss-family step.
#[derive(Debug, Clone)]
pub struct StageStep {
    pub z: FieldState,
    pub r: f64,
    pub stages: Vec<FieldState>,
    pub stage_r: Vec<f64>,
    /// Linear stage solves performed.
    pub iterations: usize,
    pub converged: bool,
    /// Last observed max stage change (zero for single-sweep steps).
    pub residual: f64,
}

struct Sweep {
    stages: Vec<FieldState>,
    slopes: Vec<FieldState>,
    l: Vec<f64>,
    stage_r: Vec<f64>,
}

fn sweep(
    model: &HamiltonianModel,
    solver: &StageSolver,
    zn: &FieldState,
    rn: f64,
    c0: f64,
    guess_z: &[FieldState],
    guess_e: &[f64],
) -> Result<Sweep> {
    let forcing = guess_z
        .iter()
        .zip(guess_e)
        .map(|(z, &e)| esav_b(model, z, e, c0))
        .collect::<Result<Vec<_>>>()?;
    let sol = solver.solve(zn, &forcing)?;
    let l: Vec<f64> = forcing
        .iter()
        .zip(&sol.slopes)
        .map(|(b, k)| model.inner(b, k) / c0)
        .collect();
    let t = solver.tableau();
    let tau = solver.tau();
    let stage_r = (0..t.stages())
        .map(|i| rn + tau * t.a_row(i).iter().zip(&l).map(|(a, li)| a * li).sum::<f64>())
        .collect();
    Ok(Sweep {
        stages: sol.stages,
        slopes: sol.slopes,
        l,
        stage_r,
    })
}

fn close(
    solver: &StageSolver,
    zn: &FieldState,
    rn: f64,
    sw: Sweep,
    iterations: usize,
    converged: bool,
    residual: f64,
) -> StageStep {
    let t = solver.tableau();
    let tau = solver.tau();
    let mut z = zn.clone();
    for (b, k) in t.b().iter().zip(&sw.slopes) {
        z.axpy(tau * b, k);
    }
    let r = rn + tau * t.b().iter().zip(&sw.l).map(|(b, l)| b * l).sum::<f64>();
    StageStep {
        z,
        r,
        stages: sw.stages,
        stage_r: sw.stage_r,
        iterations,
        converged,
        residual,
    }
}

/// Fixed-point iteration on the stage equations from the given guesses.
///
/// Stops once `max_i max(|z_i' - z_i|_inf, |e_i' - e_i|) < tol` or after
/// `max_iter` sweeps; in the latter case `converged` is false and the last
/// sweep is used.
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_stages(
    model: &HamiltonianModel,
    solver: &StageSolver,
    zn: &FieldState,
    rn: f64,
    c0: f64,
    mut guess_z: Vec<FieldState>,
    mut guess_e: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<StageStep> {
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        let sw = sweep(model, solver, zn, rn, c0, &guess_z, &guess_e)?;
        let new_e: Vec<f64> = sw.stage_r.iter().map(|r| r.exp()).collect();
        residual = sw
            .stages
            .iter()
            .zip(&guess_z)
            .map(|(a, b)| a.max_abs_diff(b))
            .chain(new_e.iter().zip(&guess_e).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if residual < tol || iteration == max_iter {
            return Ok(close(
                solver,
                zn,
                rn,
                sw,
                iteration,
                residual < tol,
                residual,
            ));
        }
        guess_z = sw.stages;
        guess_e = new_e;
    }
    unreachable!("max_iter is at least one: residual {residual}")
}

/// Fully implicit Gauss step seeded with `(z^n, e^n)` on every stage.
pub fn step_gauss_implicit(
    model: &HamiltonianModel,
    solver: &StageSolver,
    zn: &FieldState,
    rn: f64,
    c0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<StageStep> {
    let s = solver.tableau().stages();
    let step = fixed_point_stages(
        model,
        solver,
        zn,
        rn,
        c0,
        vec![zn.clone(); s],
        vec![rn.exp(); s],
        tol,
        max_iter,
    )?;
    if !step.converged {
        return Err(Error::NonConvergence {
            iterations: step.iterations,
            residual: step.residual,
        });
    }
    Ok(step)
}

/// Stage predictions `(z_{s,i}, e_{s,i})` from the previous step.
pub fn predict_stages(
    extrapolation: &ExtrapolationMatrix,
    memory: &StepMemory,
) -> Result<(Vec<FieldState>, Vec<f64>)> {
    let s = extrapolation.stages();
    if memory.stages.len() != s || memory.stage_r.len() != s {
        return Err(Error::Precondition(format!(
            "step memory holds {} stages, the scheme needs {s}",
            memory.stages.len()
        )));
    }
    let stage_e: Vec<f64> = memory.stage_r.iter().map(|r| r.exp()).collect();
    let e_prev = memory.r_prev.exp();
    let mut fields: Vec<&FieldState> = Vec::with_capacity(s + 1);
    fields.push(&memory.z_prev);
    fields.extend(memory.stages.iter());
    let z = (0..s)
        .map(|i| FieldState::combination(extrapolation.row(i), &fields))
        .collect();
    let e = (0..s)
        .map(|i| extrapolation.apply_scalar(i, e_prev, &stage_e))
        .collect();
    Ok((z, e))
}

/// Linearly implicit ESAV-Gauss step: one stage solve with extrapolated `B`.
pub fn step_esav_gauss(
    model: &HamiltonianModel,
    solver: &StageSolver,
    extrapolation: &ExtrapolationMatrix,
    zn: &FieldState,
    rn: f64,
    c0: f64,
    memory: &StepMemory,
) -> Result<StageStep> {
    let (gz, ge) = predict_stages(extrapolation, memory)?;
    let sw = sweep(model, solver, zn, rn, c0, &gz, &ge)?;
    Ok(close(solver, zn, rn, sw, 1, true, 0.0))
}

/// Prediction-correction step: extrapolated guesses refined by conservative
/// fixed-point sweeps. Non-convergence is reported through `converged`.
#[allow(clippy::too_many_arguments)]
pub fn step_esav_gauss_pc(
    model: &HamiltonianModel,
    solver: &StageSolver,
    extrapolation: &ExtrapolationMatrix,
    zn: &FieldState,
    rn: f64,
    c0: f64,
    memory: &StepMemory,
    tol: f64,
    max_iter: usize,
) -> Result<StageStep> {
    let (gz, ge) = predict_stages(extrapolation, memory)?;
    fixed_point_stages(model, solver, zn, rn, c0, gz, ge, tol, max_iter)
}
