use serde::Serialize;

use crate::error::Result;
use crate::spectral::{norm_h, FieldState};

use super::driver::{Integrator, StepReport};

/// Hook invoked by [`integrate`](super::integrate).
///
/// `report` is `None` for the call made on the initial state.
pub trait Observer {
    fn observe(&mut self, integrator: &Integrator, report: Option<&StepReport>) -> Result<()>;
}

fn due(integrator: &Integrator, every: usize) -> bool {
    every > 0 && integrator.steps().is_multiple_of(every)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    pub modified: f64,
    pub hamiltonian: f64,
    /// `modified - modified(0)`
    pub drift: f64,
}

/// Records the modified and original energies every `every` steps.
#[derive(Debug, Clone, Default)]
pub struct EnergyRecorder {
    every: usize,
    samples: Vec<EnergySample>,
    max_step_jump: f64,
    last: Option<f64>,
}

impl EnergyRecorder {
    pub fn every(every: usize) -> Self {
        EnergyRecorder {
            every,
            ..Default::default()
        }
    }

    pub fn samples(&self) -> &[EnergySample] {
        &self.samples
    }

    /// Largest `|H(n+1) - H(n)|` between consecutive steps.
    pub fn max_step_jump(&self) -> f64 {
        self.max_step_jump
    }

    pub fn max_drift(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.drift.abs()))
    }
}

impl Observer for EnergyRecorder {
    fn observe(&mut self, integ: &Integrator, _report: Option<&StepReport>) -> Result<()> {
        let modified = integ.modified_energy();
        if let Some(prev) = self.last {
            self.max_step_jump = self.max_step_jump.max((modified - prev).abs());
        }
        self.last = Some(modified);
        if due(integ, self.every) {
            self.samples.push(EnergySample {
                t: integ.time(),
                modified,
                hamiltonian: integ.hamiltonian(),
                drift: modified - integ.initial_modified_energy(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorSample {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Discrete L2 error over all components and the max of the pointwise
/// Euclidean norm across components (the complex modulus for NLS).
pub fn field_errors(
    grid: &crate::spectral::Grid,
    z: &FieldState,
    exact: &FieldState,
) -> Result<(f64, f64)> {
    let diff = z.sub(exact);
    let l2 = norm_h(grid, &diff)?;
    let linf = (0..diff.len())
        .map(|i| {
            diff.components()
                .iter()
                .map(|c| c[i] * c[i])
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    Ok((l2, linf))
}

/// Compares against an exact solution every `every` steps.
pub struct ErrorRecorder<F> {
    every: usize,
    exact: F,
    samples: Vec<ErrorSample>,
}

impl<F: Fn(f64) -> FieldState> ErrorRecorder<F> {
    pub fn new(every: usize, exact: F) -> Self {
        ErrorRecorder {
            every,
            exact,
            samples: Vec::new(),
        }
    }

    pub fn samples(&self) -> &[ErrorSample] {
        &self.samples
    }
}

impl<F: Fn(f64) -> FieldState> Observer for ErrorRecorder<F> {
    fn observe(&mut self, integ: &Integrator, _report: Option<&StepReport>) -> Result<()> {
        if due(integ, self.every) {
            let t = integ.time();
            let (l2, linf) = field_errors(integ.model().grid(), integ.state(), &(self.exact)(t))?;
            self.samples.push(ErrorSample { t, l2, linf });
        }
        Ok(())
    }
}

/// Keeps copies of the state at the requested step indices.
#[derive(Debug, Clone, Default)]
pub struct SnapshotRecorder {
    at_steps: Vec<usize>,
    snapshots: Vec<(f64, FieldState)>,
}

impl SnapshotRecorder {
    pub fn at_steps(mut at_steps: Vec<usize>) -> Self {
        at_steps.sort_unstable();
        at_steps.dedup();
        SnapshotRecorder {
            at_steps,
            snapshots: Vec::new(),
        }
    }

    pub fn snapshots(&self) -> &[(f64, FieldState)] {
        &self.snapshots
    }
}

impl Observer for SnapshotRecorder {
    fn observe(&mut self, integ: &Integrator, _report: Option<&StepReport>) -> Result<()> {
        if self.at_steps.binary_search(&integ.steps()).is_ok() {
            self.snapshots.push((integ.time(), integ.state().clone()));
        }
        Ok(())
    }
}
