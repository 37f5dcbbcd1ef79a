use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// One periodic direction `[lower, upper)` sampled at `points` equispaced nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Axis {
    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Mesh size `h = (upper - lower) / N`.
    pub fn h(&self) -> f64 {
        self.length() / self.points as f64
    }

    /// Correction factor `mu = 2 pi / (upper - lower)`.
    pub fn mu(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length()
    }

    /// Node `j` (0-based); the upper endpoint is never a node.
    pub fn node(&self, j: usize) -> f64 {
        self.lower + j as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.node(j)).collect()
    }

    /// Signed wavenumber of FFT bin `j`. The Nyquist bin reports `+N/2`.
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        2 * j == self.points
    }
}

struct Plans {
    forward: [Arc<dyn Fft<f64>>; 2],
    inverse: [Arc<dyn Fft<f64>>; 2],
}

/// Periodic tensor-product grid in one or two dimensions.
///
/// Fields on the grid are stored row-major: point `(j, k)` lives at
/// `j * ny + k`, so the last axis is contiguous. A 1D grid behaves like an
/// `nx x 1` grid.
#[derive(Clone)]
pub struct Grid {
    axes: Vec<Axis>,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("axes", &self.axes).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

/// Build a periodic grid from per-dimension bounds and point counts.
pub fn make_grid(bounds: &[(f64, f64)], counts: &[usize]) -> Result<Grid> {
    if bounds.len() != counts.len() {
        return Err(Error::invalid(
            "bounds and counts must have the same length",
        ));
    }
    if !(1..=2).contains(&bounds.len()) {
        return Err(Error::invalid(format!(
            "grids must be 1D or 2D, got {} dimensions",
            bounds.len()
        )));
    }
    let mut axes = Vec::with_capacity(bounds.len());
    for (&(lower, upper), &points) in bounds.iter().zip(counts) {
        if !(lower.is_finite() && upper.is_finite()) || upper <= lower {
            return Err(Error::invalid(format!(
                "domain bounds must satisfy lower < upper, got [{lower}, {upper})"
            )));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::invalid(format!(
                "point counts must be even and at least 4, got {points}"
            )));
        }
        axes.push(Axis {
            lower,
            upper,
            points,
        });
    }
    let mut planner = FftPlanner::new();
    let n0 = axes[0].points;
    let n1 = axes.get(1).map_or(1, |a| a.points);
    let plans = Plans {
        forward: [planner.plan_fft_forward(n0), planner.plan_fft_forward(n1)],
        inverse: [planner.plan_fft_inverse(n0), planner.plan_fft_inverse(n1)],
    };
    Ok(Grid {
        axes,
        plans: Arc::new(plans),
    })
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, dim: usize) -> Result<&Axis> {
        self.axes
            .get(dim)
            .ok_or_else(|| Error::invalid(format!("grid has no dimension {dim}")))
    }

    /// `(nx, ny)` with `ny = 1` on 1D grids.
    pub fn shape(&self) -> (usize, usize) {
        (
            self.axes[0].points,
            self.axes.get(1).map_or(1, |a| a.points),
        )
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        let (nx, ny) = self.shape();
        nx * ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Product of the mesh sizes, the weight of the discrete inner product.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::h).product()
    }

    /// Coordinates of the flat point index.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let (_, ny) = self.shape();
        let (j, k) = (idx / ny, idx % ny);
        let x = self.axes[0].node(j);
        let y = self.axes.get(1).map_or(0.0, |a| a.node(k));
        (x, y)
    }

    /// Sample `f(x, y)` at every node (`y = 0` on 1D grids).
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (x, y) = self.point(i);
                f(x, y)
            })
            .collect()
    }

    /// Per-dimension FFT bin indices of a flat mode index.
    pub fn mode_bins(&self, mode: usize) -> (usize, usize) {
        let (_, ny) = self.shape();
        (mode / ny, mode % ny)
    }

    /// Unnormalized forward DFT of a real field.
    pub fn forward(&self, field: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse DFT (normalized by `1/N`) returning the complex result.
    pub fn inverse_complex(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut spectrum, true);
        let scale = 1.0 / self.len() as f64;
        for v in &mut spectrum {
            *v *= scale;
        }
        spectrum
    }

    /// Inverse DFT of a spectrum known to represent a real field.
    ///
    /// The imaginary residue is checked in debug builds and then dropped.
    pub fn inverse(&self, spectrum: Vec<Complex64>) -> Vec<f64> {
        let values = self.inverse_complex(spectrum);
        debug_assert!(
            {
                let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.re.abs()));
                values.iter().all(|v| v.im.abs() <= 1e-12 * scale)
            },
            "inverse transform left a non-negligible imaginary part"
        );
        values.into_iter().map(|v| v.re).collect()
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len(), "field length does not match grid");
        let (nx, ny) = self.shape();
        let plans = if inverse {
            &self.plans.inverse
        } else {
            &self.plans.forward
        };
        if ny > 1 {
            for row in data.chunks_exact_mut(ny) {
                plans[1].process(row);
            }
        }
        if ny == 1 {
            plans[0].process(data);
            return;
        }
        let mut column = vec![Complex64::new(0.0, 0.0); nx];
        for k in 0..ny {
            for j in 0..nx {
                column[j] = data[j * ny + k];
            }
            plans[0].process(&mut column);
            for j in 0..nx {
                data[j * ny + k] = column[j];
            }
        }
    }
}
