//! Time integrators that conserve a discrete modified energy exactly.
//!
//! | scheme           | conserved quantity          | nonlinear solve           |
//! |------------------|-----------------------------|---------------------------|
//! | `SavCn`          | `(z, Lz)/2 + w^2`           | none (two linear solves)  |
//! | `EsavCn`         | `(z, Lz)/2 + C0 ln e`       | none (one linear solve)   |
//! | `EsavGauss`      | `(z, Lz)/2 + C0 ln e`       | none (one stage solve)    |
//! | `EsavGaussPc`    | `(z, Lz)/2 + C0 ln e`       | fixed point, seeded by extrapolation |
//! | `GaussImplicit`  | `(z, Lz)/2 + C0 ln e`       | fixed point, seeded by `z^n` |
//!
//! The two-step schemes need the previous step (and, for the Gauss family,
//! its stage values). The very first step is therefore always taken with a
//! fully implicit method; see [`Integrator`].

mod cn;
mod driver;
mod gauss;
mod observe;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reformulation::EnergySign;

pub use cn::{esav_cn_update, sav_cn_update, step_esav_cn, step_sav_cn};
pub use driver::step_count;
pub use driver::{integrate, Integrator, StepReport, Trajectory};
pub use gauss::{
    fixed_point_stages, predict_stages, step_esav_gauss, step_esav_gauss_pc, step_gauss_implicit,
    StageStep, StepMemory,
};
pub use observe::{
    field_errors, EnergyRecorder, EnergySample, ErrorRecorder, ErrorSample, Observer,
    SnapshotRecorder,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    SavCn,
    EsavCn,
    EsavGauss,
    EsavGaussPc,
    GaussImplicit,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::SavCn,
        SchemeKind::EsavCn,
        SchemeKind::EsavGauss,
        SchemeKind::EsavGaussPc,
        SchemeKind::GaussImplicit,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::SavCn => "sav-cn",
            SchemeKind::EsavCn => "esav-cn",
            SchemeKind::EsavGauss => "esav-gauss",
            SchemeKind::EsavGaussPc => "esav-gauss-pc",
            SchemeKind::GaussImplicit => "gauss-implicit",
        }
    }

    /// Whether the scheme runs Runge-Kutta stages (and so uses `stages`).
    pub fn is_runge_kutta(&self) -> bool {
        matches!(
            self,
            SchemeKind::EsavGauss | SchemeKind::EsavGaussPc | SchemeKind::GaussImplicit
        )
    }

    pub fn uses_sav(&self) -> bool {
        matches!(self, SchemeKind::SavCn)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        match key.as_str() {
            "sav-cn" => Ok(SchemeKind::SavCn),
            "esav-cn" => Ok(SchemeKind::EsavCn),
            "esav-gauss" => Ok(SchemeKind::EsavGauss),
            "esav-gauss-pc" => Ok(SchemeKind::EsavGaussPc),
            "gauss-implicit" | "gauss" => Ok(SchemeKind::GaussImplicit),
            _ => Err(Error::invalid(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Default fixed-point tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default cap on fixed-point sweeps.
pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    /// Gauss stages for the Runge-Kutta schemes; ignored otherwise.
    #[serde(default = "default_stages")]
    pub stages: usize,
    pub tau: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Auxiliary-variable constant; the reformulation default when absent.
    #[serde(default)]
    pub c0: Option<f64>,
    /// Orientation of the energy the auxiliary variable is built from.
    #[serde(default)]
    pub energy_sign: EnergySign,
    /// Runs exactly this many correction sweeps on every prediction-correction
    /// step instead of iterating to `tol`. The bootstrap step is unaffected.
    #[serde(default)]
    pub pc_sweeps: Option<usize>,
}

fn default_stages() -> usize {
    2
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, stages: usize, tau: f64) -> Self {
        SchemeConfig {
            scheme,
            stages,
            tau,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            c0: None,
            energy_sign: EnergySign::Positive,
            pc_sweeps: None,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = Some(c0);
        self
    }

    pub fn with_energy_sign(mut self, sign: EnergySign) -> Self {
        self.energy_sign = sign;
        self
    }

    pub fn with_pc_sweeps(mut self, sweeps: usize) -> Self {
        self.pc_sweeps = Some(sweeps);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::invalid(format!(
                "tol must be non-negative, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if self.pc_sweeps == Some(0) {
            return Err(Error::invalid("pc_sweeps must be at least 1"));
        }
        if self.scheme.is_runge_kutta() && !(1..=3).contains(&self.stages) {
            return Err(Error::invalid(format!(
                "Gauss schemes support 1 to 3 stages, got {}",
                self.stages
            )));
        }
        if let Some(c0) = self.c0 {
            if !c0.is_finite() {
                return Err(Error::invalid("c0 must be finite"));
            }
        }
        Ok(())
    }

    /// Display name such as `esav-gauss-pc(s=2)`.
    pub fn label(&self) -> String {
        if self.scheme.is_runge_kutta() {
            format!("{}(s={})", self.scheme, self.stages)
        } else {
            self.scheme.to_string()
        }
    }
}

/// Scalar auxiliary state carried alongside `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Auxiliary {
    Sav(crate::reformulation::SavState),
    Esav(crate::reformulation::EsavState),
}

impl Auxiliary {
    pub fn c0(&self) -> f64 {
        match self {
            Auxiliary::Sav(s) => s.c0,
            Auxiliary::Esav(s) => s.c0,
        }
    }
}
