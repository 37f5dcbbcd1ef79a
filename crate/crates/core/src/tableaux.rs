//! Gauss collocation tableaux and the Lagrange coefficients that predict the
//! next step's stage values from the previous step.

use crate::error::{Error, Result};

/// Coefficients `(A, b, c)` of an `s`-stage Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    /// Row-major `s x s`.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::invalid(
                "tableau needs an s x s matrix and s weights",
            ));
        }
        let c = a.iter().map(|row| row.iter().sum()).collect();
        Ok(ButcherTableau {
            a: a.into_iter().flatten().collect(),
            b,
            c,
        })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.stages() + j]
    }

    pub fn a_row(&self, i: usize) -> &[f64] {
        let s = self.stages();
        &self.a[i * s..(i + 1) * s]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}

/// The `s`-stage Gauss method for `s` in `{1, 2, 3}` from closed forms.
pub fn gauss_tableau(s: usize) -> Result<ButcherTableau> {
    let r3 = 3.0_f64.sqrt();
    let r15 = 15.0_f64.sqrt();
    match s {
        1 => ButcherTableau::new(vec![vec![0.5]], vec![1.0]),
        2 => ButcherTableau::new(
            vec![vec![0.25, 0.25 - r3 / 6.0], vec![0.25 + r3 / 6.0, 0.25]],
            vec![0.5, 0.5],
        ),
        3 => ButcherTableau::new(
            vec![
                vec![5.0 / 36.0, 2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0],
                vec![5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r15 / 24.0],
                vec![5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0],
            ],
            vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
        ),
        _ => Err(Error::invalid(format!(
            "Gauss tableaux are provided for 1 to 3 stages, got {s}"
        ))),
    }
}

/// `max_ij |b_i a_ij + b_j a_ji - b_i b_j|`; zero for symplectic methods.
pub fn check_symplectic(t: &ButcherTableau) -> f64 {
    let s = t.stages();
    let b = t.b();
    let mut worst = 0.0_f64;
    for i in 0..s {
        for j in 0..s {
            let r = b[i] * t.a(i, j) + b[j] * t.a(j, i) - b[i] * b[j];
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Weights that predict stage `i` of step `n` from step `n - 1`.
///
/// Row `i` holds `s + 1` entries: the weight of `z^{n-1}` followed by the
/// weights of the previous stage values `z_1^{n-1} .. z_s^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationMatrix {
    rows: Vec<Vec<f64>>,
}

impl ExtrapolationMatrix {
    pub fn stages(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Apply row `i` to scalars `(x^{n-1}, x_1^{n-1}, ..)`.
    pub fn apply_scalar(&self, i: usize, previous: f64, stages: &[f64]) -> f64 {
        let row = &self.rows[i];
        row[0] * previous + row[1..].iter().zip(stages).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Lagrange basis on the abscissae `{0, c_1, .., c_s}` evaluated at `1 + c_i`.
pub fn extrapolation_coeffs(c: &[f64]) -> Result<ExtrapolationMatrix> {
    if c.is_empty() {
        return Err(Error::invalid("at least one node is required"));
    }
    let mut nodes = Vec::with_capacity(c.len() + 1);
    nodes.push(0.0);
    nodes.extend_from_slice(c);
    for i in 0..nodes.len() {
        for j in 0..i {
            if (nodes[i] - nodes[j]).abs() < 1e-14 {
                return Err(Error::invalid(
                    "extrapolation nodes must be distinct and nonzero",
                ));
            }
        }
    }
    let rows = c
        .iter()
        .map(|&ci| {
            let target = 1.0 + ci;
            (0..nodes.len())
                .map(|k| {
                    nodes
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != k)
                        .map(|(_, &xj)| (target - xj) / (nodes[k] - xj))
                        .product()
                })
                .collect()
        })
        .collect();
    Ok(ExtrapolationMatrix { rows })
}
