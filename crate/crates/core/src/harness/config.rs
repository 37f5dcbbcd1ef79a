//! TOML run configuration.
//!
//! ```toml
//! [model]
//! kind = "nls"            # nls | sg | kdv
//! beta = 1.0
//!
//! [initial]
//! kind = "plane-wave"     # plane-wave | nls-singular | sg-ring | sg-four-collision
//! amplitude = 1.0         #   | kdv-one-soliton | kdv-two-soliton
//! c1 = 1.0
//! c2 = 1.0
//!
//! [grid]
//! points = [64, 64]
//! # bounds = [[0.0, 6.283185307179586], [0.0, 6.283185307179586]]
//!
//! [scheme]
//! scheme = "esav-cn"
//! tau = 0.001
//!
//! [reformulation]
//! energy_sign = -1
//! sav_c0 = 0.0
//!
//! [run]
//! t_end = 1.0
//! output_dir = "out/plane-wave"
//! ```
//!
//! Bounds default to the domain the initial condition is defined on.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrators::{step_count, SchemeConfig, SchemeKind, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::models::{kdv_model, nls_model, sg_model, HamiltonianModel};
use crate::reformulation::EnergySign;
use crate::spectral::{make_grid, FieldState, Grid};

use super::exact::{
    exact_kdv_one_soliton, exact_kdv_two_soliton, kdv_state, nls_singular_initial, sg_initial,
    PlaneWave, SgInitial, KDV_ONE_SOLITON_ALPHA, KDV_ONE_SOLITON_BOUNDS, KDV_ONE_SOLITON_GAMMA,
    KDV_TWO_SOLITON_BOUNDS, NLS_BOUNDS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Nls {
        beta: f64,
    },
    Sg {
        #[serde(default = "one")]
        phi: f64,
    },
    Kdv {
        alpha: f64,
        beta: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    PlaneWave {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        c1: f64,
        #[serde(default = "one")]
        c2: f64,
    },
    NlsSingular,
    SgRing,
    SgFourCollision,
    KdvOneSoliton {
        #[serde(default = "one_soliton_gamma")]
        gamma: f64,
    },
    KdvTwoSoliton,
}

fn one_soliton_gamma() -> f64 {
    KDV_ONE_SOLITON_GAMMA
}

impl InitialSpec {
    fn default_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            InitialSpec::PlaneWave { .. } | InitialSpec::NlsSingular => vec![NLS_BOUNDS; 2],
            InitialSpec::SgRing => vec![SgInitial::Ring.bounds(); 2],
            InitialSpec::SgFourCollision => vec![SgInitial::FourCollision.bounds(); 2],
            InitialSpec::KdvOneSoliton { .. } => vec![KDV_ONE_SOLITON_BOUNDS],
            InitialSpec::KdvTwoSoliton => vec![KDV_TWO_SOLITON_BOUNDS],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: Vec<usize>,
    #[serde(default)]
    pub bounds: Option<Vec<(f64, f64)>>,
}

/// Scheme section; the auxiliary constants live in [`ReformulationSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub scheme: SchemeKind,
    #[serde(default = "two")]
    pub stages: usize,
    pub tau: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Fixed number of correction sweeps for `esav-gauss-pc`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pc_sweeps: Option<usize>,
}

fn two() -> usize {
    2
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReformulationSpec {
    #[serde(default)]
    pub energy_sign: EnergySign,
    #[serde(default)]
    pub sav_c0: Option<f64>,
    #[serde(default)]
    pub esav_c0: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotFormat {
    /// One whitespace-separated matrix per component.
    #[default]
    Text,
    /// Raw little-endian `f64` with a JSON sidecar header.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub t_end: f64,
    /// Steps between energy samples.
    #[serde(default = "one_usize")]
    pub energy_every: usize,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub snapshot_format: SnapshotFormat,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn one_usize() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub initial: InitialSpec,
    pub grid: GridSpec,
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub reformulation: ReformulationSpec,
    pub run: RunSpec,
}

/// A configured model with its initial state and, when known, exact solution.
pub struct Problem {
    pub model: HamiltonianModel,
    pub initial: FieldState,
    exact: Option<Box<dyn Fn(f64) -> Result<FieldState> + Send + Sync>>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("model", &self.model.name())
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl Problem {
    pub fn grid(&self) -> &Grid {
        self.model.grid()
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact state at time `t`, when the initial condition has one.
    pub fn exact(&self, t: f64) -> Option<Result<FieldState>> {
        self.exact.as_ref().map(|f| f(t))
    }
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(config_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configurations serialize")
    }

    /// Scheme settings for `scheme`, with the matching auxiliary constant.
    pub fn scheme_config(&self, scheme: SchemeKind, stages: usize, tau: f64) -> SchemeConfig {
        let mut cfg = SchemeConfig::new(scheme, stages, tau)
            .with_tol(self.scheme.tol)
            .with_max_iter(self.scheme.max_iter)
            .with_energy_sign(self.reformulation.energy_sign);
        cfg.pc_sweeps = self.scheme.pc_sweeps;
        cfg.c0 = if scheme.uses_sav() {
            self.reformulation.sav_c0
        } else {
            self.reformulation.esav_c0
        };
        cfg
    }

    /// The configured scheme.
    pub fn primary_scheme(&self) -> SchemeConfig {
        self.scheme_config(self.scheme.scheme, self.scheme.stages, self.scheme.tau)
    }

    /// Checks everything that can be checked without integrating. All
    /// failures are reported as [`Error::Config`].
    pub fn validate(&self) -> Result<()> {
        self.primary_scheme().validate().map_err(config_error)?;
        step_count(self.run.t_end, self.scheme.tau).map_err(config_error)?;
        if self.run.energy_every == 0 {
            return Err(config_error("run.energy_every must be at least 1"));
        }
        for &t in &self.run.snapshot_times {
            if !(0.0..=self.run.t_end).contains(&t) {
                return Err(config_error(format!(
                    "snapshot time {t} lies outside [0, t_end]"
                )));
            }
            step_count(t, self.scheme.tau).map_err(config_error)?;
        }
        let compatible = matches!(
            (&self.model, &self.initial),
            (
                ModelSpec::Nls { .. },
                InitialSpec::PlaneWave { .. } | InitialSpec::NlsSingular
            ) | (
                ModelSpec::Sg { .. },
                InitialSpec::SgRing | InitialSpec::SgFourCollision
            ) | (
                ModelSpec::Kdv { .. },
                InitialSpec::KdvOneSoliton { .. } | InitialSpec::KdvTwoSoliton
            )
        );
        if !compatible {
            return Err(config_error(
                "initial condition does not belong to the chosen model",
            ));
        }
        self.problem().map(|_| ())
    }

    pub fn make_grid(&self) -> Result<Grid> {
        let bounds = self
            .grid
            .bounds
            .clone()
            .unwrap_or_else(|| self.initial.default_bounds());
        make_grid(&bounds, &self.grid.points).map_err(config_error)
    }

    /// Builds the model, initial state and exact solution.
    pub fn problem(&self) -> Result<Problem> {
        let grid = self.make_grid()?;
        let model = match self.model {
            ModelSpec::Nls { beta } => nls_model(beta, &grid),
            ModelSpec::Sg { phi } => sg_model(&[phi], &grid),
            ModelSpec::Kdv { alpha, beta } => kdv_model(alpha, beta, &grid),
        }
        .map_err(config_error)?;
        let (initial, exact): (
            Result<FieldState>,
            Option<Box<dyn Fn(f64) -> Result<FieldState> + Send + Sync>>,
        ) = match (&self.initial, &self.model) {
            (&InitialSpec::PlaneWave { amplitude, c1, c2 }, &ModelSpec::Nls { beta }) => {
                let wave = PlaneWave {
                    amplitude,
                    c1,
                    c2,
                    beta,
                };
                let g = grid.clone();
                (
                    wave.state(&grid, 0.0),
                    Some(Box::new(move |t| wave.state(&g, t))),
                )
            }
            (InitialSpec::NlsSingular, _) => (nls_singular_initial(&grid), None),
            (InitialSpec::SgRing, _) => (sg_initial(SgInitial::Ring, &grid), None),
            (InitialSpec::SgFourCollision, _) => {
                (sg_initial(SgInitial::FourCollision, &grid), None)
            }
            (&InitialSpec::KdvOneSoliton { gamma }, &ModelSpec::Kdv { alpha, beta }) => {
                if (beta - 1.0).abs() > 1e-15 {
                    return Err(config_error("the one-soliton solution assumes beta = 1"));
                }
                let axis = grid.axes()[0];
                let bounds = (axis.lower, axis.upper);
                let g = grid.clone();
                let f = move |t: f64| {
                    kdv_state(&g, |x| exact_kdv_one_soliton(gamma, alpha, bounds, x, t))
                };
                (f(0.0), Some(Box::new(f)))
            }
            (InitialSpec::KdvTwoSoliton, &ModelSpec::Kdv { alpha, beta }) => {
                if (alpha - 1.0).abs() > 1e-15 || (beta - 1.0).abs() > 1e-15 {
                    return Err(config_error(
                        "the two-soliton solution assumes alpha = beta = 1",
                    ));
                }
                let g = grid.clone();
                let f = move |t: f64| kdv_state(&g, |x| exact_kdv_two_soliton(x, t));
                (f(0.0), Some(Box::new(f)))
            }
            _ => {
                return Err(config_error(
                    "initial condition does not belong to the chosen model",
                ))
            }
        };
        Ok(Problem {
            model,
            initial: initial.map_err(config_error)?,
            exact,
        })
    }
}

/// Ready-made configurations for the benchmark problems.
pub mod presets {
    use super::*;

    fn base(
        model: ModelSpec,
        initial: InitialSpec,
        points: Vec<usize>,
        scheme: SchemeKind,
        tau: f64,
        t_end: f64,
    ) -> RunConfig {
        RunConfig {
            model,
            initial,
            grid: GridSpec {
                points,
                bounds: None,
            },
            scheme: SchemeSpec {
                scheme,
                stages: 2,
                tau,
                tol: DEFAULT_TOL,
                max_iter: DEFAULT_MAX_ITER,
                pc_sweeps: None,
            },
            reformulation: ReformulationSpec::default(),
            run: RunSpec {
                t_end,
                energy_every: 1,
                snapshot_times: Vec::new(),
                snapshot_format: SnapshotFormat::Text,
                output_dir: default_output(),
                seed: 0,
            },
        }
    }

    /// NLS reformulation in the orientation used by the published accuracy
    /// tables: auxiliary variables built from `-H`, SAV with `C0 = 0`.
    pub fn nls_reformulation() -> ReformulationSpec {
        ReformulationSpec {
            energy_sign: EnergySign::Negative,
            sav_c0: Some(0.0),
            esav_c0: None,
        }
    }

    /// Plane wave with `A = c1 = c2 = beta = 1` on `[0, 2 pi)^2`.
    pub fn nls_plane_wave(n: usize, scheme: SchemeKind, tau: f64, t_end: f64) -> RunConfig {
        let mut cfg = base(
            ModelSpec::Nls { beta: 1.0 },
            InitialSpec::PlaneWave {
                amplitude: 1.0,
                c1: 1.0,
                c2: 1.0,
            },
            vec![n, n],
            scheme,
            tau,
            t_end,
        );
        cfg.reformulation = nls_reformulation();
        cfg
    }

    /// Focusing data that blows up near `t = 0.108`.
    pub fn nls_singular(n: usize, scheme: SchemeKind, tau: f64, t_end: f64) -> RunConfig {
        let mut cfg = base(
            ModelSpec::Nls { beta: 1.0 },
            InitialSpec::NlsSingular,
            vec![n, n],
            scheme,
            tau,
            t_end,
        );
        cfg.reformulation = nls_reformulation();
        cfg
    }

    pub fn sg_ring(n: usize, scheme: SchemeKind, tau: f64, t_end: f64) -> RunConfig {
        base(
            ModelSpec::Sg { phi: 1.0 },
            InitialSpec::SgRing,
            vec![n, n],
            scheme,
            tau,
            t_end,
        )
    }

    pub fn sg_four_collision(n: usize, scheme: SchemeKind, tau: f64, t_end: f64) -> RunConfig {
        base(
            ModelSpec::Sg { phi: 1.0 },
            InitialSpec::SgFourCollision,
            vec![n, n],
            scheme,
            tau,
            t_end,
        )
    }

    /// One soliton on `[-3, 5]`; it returns to its start every 24 time units.
    pub fn kdv_one_soliton(n: usize, scheme: SchemeKind, tau: f64, t_end: f64) -> RunConfig {
        base(
            ModelSpec::Kdv {
                alpha: KDV_ONE_SOLITON_ALPHA,
                beta: 1.0,
            },
            InitialSpec::KdvOneSoliton {
                gamma: KDV_ONE_SOLITON_GAMMA,
            },
            vec![n],
            scheme,
            tau,
            t_end,
        )
    }

    /// Two solitons on `[-40, 40]` that collide near `t = 80`.
    pub fn kdv_two_soliton(n: usize, scheme: SchemeKind, tau: f64, t_end: f64) -> RunConfig {
        base(
            ModelSpec::Kdv {
                alpha: 1.0,
                beta: 1.0,
            },
            InitialSpec::KdvTwoSoliton,
            vec![n],
            scheme,
            tau,
            t_end,
        )
    }
}
