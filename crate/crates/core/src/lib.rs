//! Linearly implicit, energy-preserving time integrators for Hamiltonian
//! PDEs on periodic Fourier pseudo-spectral grids.
//!
//! A model is written as `z_t = D (L z + N'(z))` with a skew-adjoint `D`, a
//! self-adjoint positive semi-definite `L` and a local nonlinear energy
//! density `N`. The nonlinear energy is replaced by an auxiliary scalar (SAV
//! or exponential SAV), which turns each step into linear solves that are
//! diagonal in Fourier space.
//!
//! ```
//! use esav::integrators::{Integrator, SchemeConfig, SchemeKind};
//! use esav::models::kdv_model;
//! use esav::spectral::{make_grid, FieldState};
//!
//! let grid = make_grid(&[(0.0, 2.0 * std::f64::consts::PI)], &[32]).unwrap();
//! let model = kdv_model(0.01, 1.0, &grid).unwrap();
//! let z0 = FieldState::new(vec![grid.sample(|x, _| x.sin())]).unwrap();
//! let mut integ = Integrator::new(&model, SchemeConfig::new(SchemeKind::EsavCn, 1, 0.01), z0).unwrap();
//! let before = integ.modified_energy();
//! for _ in 0..10 {
//!     integ.step().unwrap();
//! }
//! assert!((integ.modified_energy() - before).abs() < 1e-12);
//! ```

pub mod error;
pub mod harness;
pub mod integrators;
pub mod linsolve;
pub mod models;
pub mod reformulation;
pub mod spectral;
pub mod tableaux;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/auxiliary.md")]
    mod auxiliary {}
    #[doc = include_str!("../../../book/src/tableaux.md")]
    mod tableaux {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/integrators.md")]
    mod integrators {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
