//! Linear solves for the implicit part of every scheme.
//!
//! `D` and `L` are Fourier multipliers, so `(I - gamma tau D L)` and the
//! stage-coupled operator `(I - tau A (x) D L)` split into one small dense
//! block per Fourier mode (at most `3 * 2 = 6` unknowns). Blocks are LU
//! factored once per time step size and reused.
//!
//! [`DenseOracle`] assembles the same systems from the dense differentiation
//! matrices and solves them directly; it exists to check the fast path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::HamiltonianModel;
use crate::spectral::FieldState;
use crate::tableaux::ButcherTableau;

/// LU factorization with partial pivoting of a small complex matrix.
#[derive(Debug, Clone)]
struct SmallLu {
    n: usize,
    lu: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl SmallLu {
    fn factor(mut a: Vec<Complex64>, n: usize) -> Option<Self> {
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.norm()));
        let mut pivots = vec![0; n];
        for col in 0..n {
            let (p, best) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= 1e-14 * scale {
                return None;
            }
            pivots[col] = p;
            if p != col {
                for k in 0..n {
                    a.swap(col * n + k, p * n + k);
                }
            }
            let inv = 1.0 / a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] * inv;
                a[r * n + col] = f;
                for k in col + 1..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= f * v;
                }
            }
        }
        Some(SmallLu { n, lu: a, pivots })
    }

    fn solve(&self, x: &mut [Complex64]) {
        let n = self.n;
        for col in 0..n {
            x.swap(col, self.pivots[col]);
        }
        for r in 1..n {
            let mut acc = x[r];
            for k in 0..r {
                acc -= self.lu[r * n + k] * x[k];
            }
            x[r] = acc;
        }
        for r in (0..n).rev() {
            let mut acc = x[r];
            for k in r + 1..n {
                acc -= self.lu[r * n + k] * x[k];
            }
            x[r] = acc / self.lu[r * n + r];
        }
    }
}

/// `D-hat L-hat` at one mode, row-major `m x m`.
fn mode_dl(model: &HamiltonianModel, mode: usize) -> Vec<Complex64> {
    let m = model.components();
    let d = model.mode_d(mode);
    let l = model.mode_l(mode);
    (0..m * m).map(|idx| d[idx] * l[idx % m]).collect()
}

/// Per-mode factorization of `I - gamma tau D L`.
#[derive(Debug, Clone)]
pub struct CnSolver {
    model: HamiltonianModel,
    tau: f64,
    gamma: f64,
    blocks: Vec<SmallLu>,
}

impl CnSolver {
    pub fn new(model: &HamiltonianModel, tau: f64, gamma: f64) -> Result<Self> {
        let m = model.components();
        let blocks = (0..model.grid().len())
            .map(|mode| {
                let dl = mode_dl(model, mode);
                let mat = (0..m * m)
                    .map(|idx| {
                        let id = if idx / m == idx % m { 1.0 } else { 0.0 };
                        Complex64::new(id, 0.0) - gamma * tau * dl[idx]
                    })
                    .collect();
                SmallLu::factor(mat, m).ok_or(Error::SingularOperator { mode })
            })
            .collect::<Result<_>>()?;
        Ok(CnSolver {
            model: model.clone(),
            tau,
            gamma,
            blocks,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Solve in place on per-component spectra.
    pub fn solve_spectrum(&self, spectra: &mut [Vec<Complex64>]) {
        let m = spectra.len();
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        for (mode, lu) in self.blocks.iter().enumerate() {
            for c in 0..m {
                x[c] = spectra[c][mode];
            }
            lu.solve(&mut x);
            for c in 0..m {
                spectra[c][mode] = x[c];
            }
        }
    }

    /// `x` with `(I - gamma tau D L) x = rhs`.
    pub fn solve(&self, rhs: &FieldState) -> Result<FieldState> {
        self.model.check_state(rhs)?;
        let mut spectra = self.model.forward(rhs);
        self.solve_spectrum(&mut spectra);
        Ok(self.model.inverse(spectra))
    }
}

/// One-shot `(I - gamma tau D L) x = rhs`.
pub fn solve_cn(
    model: &HamiltonianModel,
    rhs: &FieldState,
    tau: f64,
    gamma: f64,
) -> Result<FieldState> {
    CnSolver::new(model, tau, gamma)?.solve(rhs)
}

/// Stage values and slopes `k_i = D(L z_i + f_i)` of one linear stage solve.
#[derive(Debug, Clone)]
pub struct StageSolution {
    pub stages: Vec<FieldState>,
    pub slopes: Vec<FieldState>,
}

/// Per-mode factorization of `I - tau (A (x) D L)` for an `s`-stage tableau.
#[derive(Debug, Clone)]
pub struct StageSolver {
    model: HamiltonianModel,
    tableau: ButcherTableau,
    tau: f64,
    blocks: Vec<SmallLu>,
}

impl StageSolver {
    pub fn new(model: &HamiltonianModel, tableau: &ButcherTableau, tau: f64) -> Result<Self> {
        let m = model.components();
        let s = tableau.stages();
        let n = s * m;
        let blocks = (0..model.grid().len())
            .map(|mode| {
                let dl = mode_dl(model, mode);
                let mut mat = vec![Complex64::new(0.0, 0.0); n * n];
                for i in 0..s {
                    for a in 0..m {
                        let row = i * m + a;
                        mat[row * n + row] += 1.0;
                        for j in 0..s {
                            for b in 0..m {
                                mat[row * n + j * m + b] -= tau * tableau.a(i, j) * dl[a * m + b];
                            }
                        }
                    }
                }
                SmallLu::factor(mat, n).ok_or(Error::SingularOperator { mode })
            })
            .collect::<Result<_>>()?;
        Ok(StageSolver {
            model: model.clone(),
            tableau: tableau.clone(),
            tau,
            blocks,
        })
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Solve `z_i = z^n + tau sum_j a_ij D(L z_j + f_j)` for the stage values.
    pub fn solve(&self, zn: &FieldState, forcing: &[FieldState]) -> Result<StageSolution> {
        let s = self.tableau.stages();
        let m = self.model.components();
        if forcing.len() != s {
            return Err(Error::invalid(format!(
                "expected {s} forcing fields, got {}",
                forcing.len()
            )));
        }
        self.model.check_state(zn)?;
        for f in forcing {
            self.model.check_state(f)?;
        }
        let zn_hat = self.model.forward(zn);
        // D-hat f-hat per stage.
        let df_hat: Vec<Vec<Vec<Complex64>>> = forcing
            .iter()
            .map(|f| {
                let mut spec = self.model.forward(f);
                self.model.apply_d_spectrum(&mut spec);
                spec
            })
            .collect();
        let f_hat: Vec<Vec<Vec<Complex64>>> =
            forcing.iter().map(|f| self.model.forward(f)).collect();

        let len = self.model.grid().len();
        let mut stage_hat = vec![vec![vec![Complex64::new(0.0, 0.0); len]; m]; s];
        let mut x = vec![Complex64::new(0.0, 0.0); s * m];
        for (mode, lu) in self.blocks.iter().enumerate() {
            for i in 0..s {
                for c in 0..m {
                    let mut v = zn_hat[c][mode];
                    for j in 0..s {
                        v += self.tau * self.tableau.a(i, j) * df_hat[j][c][mode];
                    }
                    x[i * m + c] = v;
                }
            }
            lu.solve(&mut x);
            for i in 0..s {
                for c in 0..m {
                    stage_hat[i][c][mode] = x[i * m + c];
                }
            }
        }

        let mut stages = Vec::with_capacity(s);
        let mut slopes = Vec::with_capacity(s);
        for (zi_hat, fi_hat) in stage_hat.into_iter().zip(f_hat) {
            let mut mu = zi_hat.clone();
            self.model.apply_l_spectrum(&mut mu);
            for (mc, fc) in mu.iter_mut().zip(&fi_hat) {
                for (a, b) in mc.iter_mut().zip(fc) {
                    *a += b;
                }
            }
            self.model.apply_d_spectrum(&mut mu);
            stages.push(self.model.inverse(zi_hat));
            slopes.push(self.model.inverse(mu));
        }
        Ok(StageSolution { stages, slopes })
    }
}

/// One-shot stage solve returning the stage values.
pub fn solve_stage_system(
    model: &HamiltonianModel,
    tableau: &ButcherTableau,
    tau: f64,
    zn: &FieldState,
    forcing: &[FieldState],
) -> Result<Vec<FieldState>> {
    Ok(StageSolver::new(model, tableau, tau)?
        .solve(zn, forcing)?
        .stages)
}

/// Which implicit system the dense oracle assembles.
#[derive(Debug, Clone)]
pub enum OracleSystem {
    /// `I - gamma tau D L`
    Cn { gamma: f64 },
    /// `I - tau (A (x) D L)`
    Stages(ButcherTableau),
}

/// Largest system the dense oracle will assemble.
pub const ORACLE_MAX_UNKNOWNS: usize = 4096;

/// Direct LU solve of the fully assembled real system.
pub struct DenseOracle {
    model: HamiltonianModel,
    system: OracleSystem,
    tau: f64,
    d: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DenseOracle {
    pub fn new(model: &HamiltonianModel, system: OracleSystem, tau: f64) -> Result<Self> {
        let block = model.components() * model.grid().len();
        let s = match &system {
            OracleSystem::Cn { .. } => 1,
            OracleSystem::Stages(t) => t.stages(),
        };
        let unknowns = s * block;
        if unknowns > ORACLE_MAX_UNKNOWNS {
            return Err(Error::invalid(format!(
                "dense oracle refuses {unknowns} unknowns (limit {ORACLE_MAX_UNKNOWNS})"
            )));
        }
        let d = model.dense_d();
        let dl = &d * model.dense_l();
        let mut mat = DMatrix::<f64>::identity(unknowns, unknowns);
        match &system {
            OracleSystem::Cn { gamma } => mat -= dl * (gamma * tau),
            OracleSystem::Stages(t) => {
                for i in 0..s {
                    for j in 0..s {
                        let mut view = mat.view_mut((i * block, j * block), (block, block));
                        view -= &dl * (tau * t.a(i, j));
                    }
                }
            }
        }
        Ok(DenseOracle {
            model: model.clone(),
            system,
            tau,
            d,
            lu: mat.lu(),
        })
    }

    fn stack(z: &FieldState) -> DVector<f64> {
        DVector::from_iterator(z.count() * z.len(), z.values())
    }

    fn unstack(&self, v: &[f64]) -> FieldState {
        let n = self.model.grid().len();
        FieldState::new(v.chunks(n).map(<[f64]>::to_vec).collect()).expect("uniform chunks")
    }

    pub fn solve_cn(&self, rhs: &FieldState) -> Result<FieldState> {
        if !matches!(self.system, OracleSystem::Cn { .. }) {
            return Err(Error::invalid("oracle was assembled for a stage system"));
        }
        let x = self
            .lu
            .solve(&Self::stack(rhs))
            .ok_or(Error::SingularOperator { mode: 0 })?;
        Ok(self.unstack(x.as_slice()))
    }

    pub fn solve_stages(&self, zn: &FieldState, forcing: &[FieldState]) -> Result<Vec<FieldState>> {
        let OracleSystem::Stages(t) = &self.system else {
            return Err(Error::invalid(
                "oracle was assembled for a Crank-Nicolson system",
            ));
        };
        let s = t.stages();
        let block = zn.count() * zn.len();
        let zn_vec = Self::stack(zn);
        let df: Vec<DVector<f64>> = forcing.iter().map(|f| &self.d * Self::stack(f)).collect();
        let mut rhs = DVector::zeros(s * block);
        for i in 0..s {
            let mut seg = rhs.rows_mut(i * block, block);
            seg += &zn_vec;
            for j in 0..s {
                seg += &df[j] * (self.tau * t.a(i, j));
            }
        }
        let x = self
            .lu
            .solve(&rhs)
            .ok_or(Error::SingularOperator { mode: 0 })?;
        Ok(x.as_slice()
            .chunks(block)
            .map(|c| self.unstack(c))
            .collect())
    }
}
