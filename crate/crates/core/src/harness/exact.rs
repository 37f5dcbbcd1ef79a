//! Exact solutions and initial conditions of the benchmark problems.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{FieldState, Grid};

/// Dispersion coefficient of the one-soliton benchmark.
pub const KDV_ONE_SOLITON_ALPHA: f64 = 0.0013020833;
/// Speed (and a third of the height) of the one-soliton benchmark.
pub const KDV_ONE_SOLITON_GAMMA: f64 = 1.0 / 3.0;
pub const KDV_ONE_SOLITON_BOUNDS: (f64, f64) = (-3.0, 5.0);
pub const KDV_TWO_SOLITON_BOUNDS: (f64, f64) = (-40.0, 40.0);
pub const SG_RING_BOUNDS: (f64, f64) = (-7.0, 7.0);
pub const SG_FOUR_COLLISION_BOUNDS: (f64, f64) = (-30.0, 10.0);
pub const NLS_BOUNDS: (f64, f64) = (0.0, 2.0 * PI);

/// `A exp(i (c1 x + c2 y - omega t))` with `omega = c1^2 + c2^2 - beta A^2`.
pub fn exact_nls_plane_wave(
    a: f64,
    c1: f64,
    c2: f64,
    beta: f64,
    x: f64,
    y: f64,
    t: f64,
) -> Complex64 {
    let omega = c1 * c1 + c2 * c2 - beta * a * a;
    Complex64::from_polar(a, c1 * x + c2 * y - omega * t)
}

/// Plane-wave solution of `i u_t + Lap u + beta |u|^2 u = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub amplitude: f64,
    pub c1: f64,
    pub c2: f64,
    pub beta: f64,
}

impl PlaneWave {
    pub fn omega(&self) -> f64 {
        self.c1 * self.c1 + self.c2 * self.c2 - self.beta * self.amplitude * self.amplitude
    }

    pub fn value(&self, x: f64, y: f64, t: f64) -> Complex64 {
        exact_nls_plane_wave(self.amplitude, self.c1, self.c2, self.beta, x, y, t)
    }

    /// `(Re u, Im u)` sampled on a 2D grid at time `t`.
    ///
    /// When the wave is periodic on the grid, the phase of node `(j, k)` is
    /// reduced in integer arithmetic, so nodes on the same wave front get
    /// bit-identical values. A plane wave of the focusing equation is
    /// modulationally unstable, and rounding noise across a wave front is
    /// enough to seed that instability in long runs.
    pub fn state(&self, grid: &Grid, t: f64) -> Result<FieldState> {
        if grid.dim() != 2 {
            return Err(Error::invalid("the plane wave lives on a 2D grid"));
        }
        let (ax, ay) = (&grid.axes()[0], &grid.axes()[1]);
        let (nx, ny) = grid.shape();
        let mx = self.c1 * ax.length() / (2.0 * PI);
        let my = self.c2 * ay.length() / (2.0 * PI);
        let integral = |m: f64| (m - m.round()).abs() < 1e-12 * m.abs().max(1.0);
        let offset = self.c1 * ax.lower + self.c2 * ay.lower - self.omega() * t;
        let phase: Vec<f64> = if integral(mx) && integral(my) {
            let (mx, my) = (mx.round() as i64, my.round() as i64);
            let period = (nx * ny) as i64;
            (0..grid.len())
                .map(|idx| {
                    let (j, k) = ((idx / ny) as i64, (idx % ny) as i64);
                    let turns = (mx * j * ny as i64 + my * k * nx as i64).rem_euclid(period);
                    2.0 * PI * turns as f64 / period as f64 + offset
                })
                .collect()
        } else {
            grid.sample(|x, y| self.c1 * x + self.c2 * y - self.omega() * t)
        };
        let a = self.amplitude;
        FieldState::new(vec![
            phase.iter().map(|p| a * p.cos()).collect(),
            phase.iter().map(|p| a * p.sin()).collect(),
        ])
    }
}

/// Wraps `theta` into `[lower, upper]` by the remainder rule.
///
/// ```
/// use esav::harness::wrap_into;
/// assert_eq!(wrap_into(5.5, -3.0, 5.0), -2.5);
/// assert_eq!(wrap_into(1.25, -3.0, 5.0), 1.25);
/// ```
pub fn wrap_into(theta: f64, lower: f64, upper: f64) -> f64 {
    let length = upper - lower;
    if theta < lower {
        upper - (upper - theta) % length
    } else if theta > upper {
        lower + (theta - lower) % length
    } else {
        theta
    }
}

/// `3 gamma sech^2( sqrt(gamma / (4 alpha)) (x - gamma t)_Omega )`
pub fn exact_kdv_one_soliton(gamma: f64, alpha: f64, bounds: (f64, f64), x: f64, t: f64) -> f64 {
    let theta = wrap_into(x - gamma * t, bounds.0, bounds.1);
    let s = 1.0 / ((gamma / (4.0 * alpha)).sqrt() * theta).cosh();
    3.0 * gamma * s * s
}

/// Two-soliton solution of `u_t + u_xxx + u u_x = 0`.
pub fn exact_kdv_two_soliton(x: f64, t: f64) -> f64 {
    let (k1, k2) = (0.4_f64, 0.6_f64);
    let rho = (k1 - k2) / (k1 + k2);
    let xi1 = k1 * x - k1.powi(3) * t + 4.0;
    let xi2 = k2 * x - k2.powi(3) * t + 15.0;
    // Divide through by the dominant exponential so that nothing overflows
    // far from the solitons.
    let m = xi1.max(xi2).max(xi1 + xi2).max(0.0);
    let e1 = (xi1 - m).exp();
    let e2 = (xi2 - m).exp();
    let e12 = (xi1 + xi2 - m).exp();
    let e0 = (-m).exp();
    let num = (k1 * k1 * e1 + k2 * k2 * e2 + 2.0 * (k2 - k1).powi(2) * e12) * e0
        + rho * rho * (k2 * k2 * e1 + k1 * k1 * e2) * e12;
    let den = e0 + e1 + e2 + rho * rho * e12;
    12.0 * num / (den * den)
}

/// Samples a one-component KdV state.
pub fn kdv_state(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<FieldState> {
    if grid.dim() != 1 {
        return Err(Error::invalid("KdV states live on a 1D grid"));
    }
    FieldState::new(vec![grid.sample(|x, _| f(x))])
}

/// Initial data of the sine-Gordon benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgInitial {
    /// Circular ring soliton on `[-7, 7)^2`, at rest.
    Ring,
    /// Expanding ring whose periodic images collide, on `[-30, 10)^2`.
    FourCollision,
}

impl SgInitial {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            SgInitial::Ring => SG_RING_BOUNDS,
            SgInitial::FourCollision => SG_FOUR_COLLISION_BOUNDS,
        }
    }
}

fn check_square_domain(grid: &Grid, bounds: (f64, f64), what: &str) -> Result<()> {
    let ok = grid.dim() == 2
        && grid
            .axes()
            .iter()
            .all(|a| (a.lower - bounds.0).abs() < 1e-12 && (a.upper - bounds.1).abs() < 1e-12);
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} is defined on [{}, {})^2",
            bounds.0, bounds.1
        )))
    }
}

/// `(u, u_t)` of the sine-Gordon benchmark `kind`.
pub fn sg_initial(kind: SgInitial, grid: &Grid) -> Result<FieldState> {
    check_square_domain(grid, kind.bounds(), "this sine-Gordon initial condition")?;
    match kind {
        SgInitial::Ring => FieldState::new(vec![
            grid.sample(|x, y| 4.0 * (3.0 - x.hypot(y)).exp().atan()),
            vec![0.0; grid.len()],
        ]),
        SgInitial::FourCollision => {
            let g = |x: f64, y: f64| (3.0 - (x + 3.0).hypot(y + 7.0)).exp() / 0.436;
            FieldState::new(vec![
                grid.sample(|x, y| 4.0 * g(x, y).atan()),
                grid.sample(|x, y| 4.13 / g(x, y).cosh()),
            ])
        }
    }
}

/// `u(x, y, 0) = (1 + sin x)(2 + sin y)`, which focuses into a singularity
/// near `t = 0.108` for `beta = 1`.
pub fn nls_singular_initial(grid: &Grid) -> Result<FieldState> {
    check_square_domain(grid, NLS_BOUNDS, "the singular NLS initial condition")?;
    FieldState::new(vec![
        grid.sample(|x, y| (1.0 + x.sin()) * (2.0 + y.sin())),
        vec![0.0; grid.len()],
    ])
}
