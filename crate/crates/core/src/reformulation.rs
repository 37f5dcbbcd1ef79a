//! Scalar auxiliary variables that turn the nonlinear energy `H2` into a
//! quadratic (SAV) or logarithmic (ESAV) term.
//!
//! SAV uses `w = sqrt(H2 + C0)` and conserves `(z, L z)_h / 2 + w^2`; it
//! needs `H2` bounded below. ESAV uses `e = exp(H2 / C0)` and conserves
//! `(z, L z)_h / 2 + C0 ln e`, with no sign restriction on `H2`. Only
//! `r = ln e` is ever stored; `e` itself is materialized where a scheme
//! extrapolates it.
//!
//! Negating `D`, `L` and `N` together leaves the flow unchanged but flips the
//! sign of the energy that the auxiliary variable is built from.
//! [`EnergySign::Negative`] applies the reformulation to `-H`; for SAV this
//! turns an `H2` that is bounded above into one that is bounded below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::HamiltonianModel;
use crate::spectral::FieldState;

/// Largest `|H2 / C0|` for which `exp` is evaluated.
pub const EXPONENT_LIMIT: f64 = 700.0;

/// Orientation of the energy the auxiliary variable is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum EnergySign {
    #[default]
    Positive,
    Negative,
}

impl EnergySign {
    pub fn value(self) -> f64 {
        match self {
            EnergySign::Positive => 1.0,
            EnergySign::Negative => -1.0,
        }
    }
}

impl TryFrom<i8> for EnergySign {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(EnergySign::Positive),
            -1 => Ok(EnergySign::Negative),
            _ => Err(format!("energy sign must be 1 or -1, got {v}")),
        }
    }
}

impl From<EnergySign> for i8 {
    fn from(s: EnergySign) -> i8 {
        match s {
            EnergySign::Positive => 1,
            EnergySign::Negative => -1,
        }
    }
}

/// `w = sqrt(s H2 + C0)` for energy sign `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavState {
    pub w: f64,
    pub c0: f64,
    pub sign: EnergySign,
}

/// `r = ln e = H2 / c0`.
///
/// `c0` is stored with the energy sign folded in, so it is negative for
/// [`EnergySign::Negative`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsavState {
    /// `ln e`
    pub r: f64,
    pub c0: f64,
}

impl EsavState {
    pub fn e(&self) -> f64 {
        self.r.exp()
    }
}

pub fn default_sav_c0(h2: f64) -> f64 {
    1.0 + h2.abs()
}

pub fn default_esav_c0(h2: f64) -> f64 {
    h2.abs().max(1.0)
}

fn sav_radicand(
    model: &HamiltonianModel,
    z: &FieldState,
    c0: f64,
    sign: EnergySign,
) -> Result<f64> {
    let radicand = sign.value() * model.nonlinear_energy(z) + c0;
    if radicand > 0.0 {
        Ok(radicand)
    } else {
        Err(Error::ReformulationInfeasible { radicand })
    }
}

/// `w = sqrt(s H2(z0) + C0)`, with `C0 = 1 + |H2(z0)|` unless given.
pub fn sav_init(
    model: &HamiltonianModel,
    z0: &FieldState,
    c0: Option<f64>,
    sign: EnergySign,
) -> Result<SavState> {
    model.check_state(z0)?;
    let c0 = c0.unwrap_or_else(|| default_sav_c0(model.nonlinear_energy(z0)));
    if !c0.is_finite() {
        return Err(Error::invalid(format!("SAV needs a finite C0, got {c0}")));
    }
    let radicand = sav_radicand(model, z0, c0, sign)?;
    Ok(SavState {
        w: radicand.sqrt(),
        c0,
        sign,
    })
}

/// `A(z) = N'(z) / sqrt(s H2(z) + C0)`
pub fn sav_a(
    model: &HamiltonianModel,
    z: &FieldState,
    c0: f64,
    sign: EnergySign,
) -> Result<FieldState> {
    let radicand = sav_radicand(model, z, c0, sign)?;
    Ok(model.gradient(z).scaled(1.0 / radicand.sqrt()))
}

/// `r = s H2(z0) / C0`, with `C0 = max(1, |H2(z0)|)` unless given.
///
/// The returned state carries `s C0`.
pub fn esav_init(
    model: &HamiltonianModel,
    z0: &FieldState,
    c0: Option<f64>,
    sign: EnergySign,
) -> Result<EsavState> {
    model.check_state(z0)?;
    let h2 = model.nonlinear_energy(z0);
    let c0 = c0.unwrap_or_else(|| default_esav_c0(h2));
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::invalid(format!("ESAV needs C0 > 0, got {c0}")));
    }
    let c0 = sign.value() * c0;
    Ok(EsavState { r: h2 / c0, c0 })
}

fn checked_exponent(model: &HamiltonianModel, z: &FieldState, c0: f64) -> Result<f64> {
    let exponent = model.nonlinear_energy(z) / c0;
    if exponent.abs() > EXPONENT_LIMIT || !exponent.is_finite() {
        return Err(Error::Overflow {
            exponent: exponent.abs(),
            limit: EXPONENT_LIMIT,
        });
    }
    Ok(exponent)
}

/// `B(z, e) = N'(z) e / exp(H2(z) / C0)` for a raw (possibly extrapolated) `e`.
pub fn esav_b(model: &HamiltonianModel, z: &FieldState, e: f64, c0: f64) -> Result<FieldState> {
    let exponent = checked_exponent(model, z, c0)?;
    Ok(model.gradient(z).scaled(e * (-exponent).exp()))
}

/// `B(z, e)` with `e` supplied through its logarithm `r`.
pub fn esav_b_log(model: &HamiltonianModel, z: &FieldState, r: f64, c0: f64) -> Result<FieldState> {
    let exponent = checked_exponent(model, z, c0)?;
    Ok(model.gradient(z).scaled((r - exponent).exp()))
}

/// `(z, L z)_h / 2 + s w^2`
pub fn modified_energy_sav(
    model: &HamiltonianModel,
    z: &FieldState,
    w: f64,
    sign: EnergySign,
) -> f64 {
    model.quadratic_energy(z) + sign.value() * w * w
}

/// `(z, L z)_h / 2 + C0 r`
pub fn modified_energy_esav(model: &HamiltonianModel, z: &FieldState, r: f64, c0: f64) -> f64 {
    model.quadratic_energy(z) + c0 * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{energy, kdv_model, nls_model};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn nls() -> HamiltonianModel {
        let g = make_grid(&[(0.0, 2.0 * PI), (0.0, 2.0 * PI)], &[8, 8]).unwrap();
        nls_model(1.0, &g).unwrap()
    }

    fn kdv() -> HamiltonianModel {
        kdv_model(1.0, 1.0, &make_grid(&[(0.0, 1.0)], &[8]).unwrap()).unwrap()
    }

    #[test]
    fn sav_init_on_zero_state() {
        let m = nls();
        let s = sav_init(&m, &m.zero_state(), Some(1.0), EnergySign::Positive).unwrap();
        assert_eq!(s.w, 1.0);
        let s = sav_init(&m, &m.zero_state(), None, EnergySign::Positive).unwrap();
        assert_eq!((s.w, s.c0), (1.0, 1.0));
    }

    #[test]
    fn sav_definition_identity() {
        let m = nls();
        let z = FieldState::new(vec![
            m.grid().sample(|x, _| x.sin()),
            m.grid().sample(|_, y| 0.5 * y.cos()),
        ])
        .unwrap();
        let s = sav_init(&m, &z, None, EnergySign::Positive).unwrap();
        assert!((s.w * s.w - s.c0 - m.nonlinear_energy(&z)).abs() < 1e-12);
    }

    #[test]
    fn sav_rejects_large_kdv_amplitude() {
        let m = kdv();
        let z = FieldState::new(vec![vec![100.0; 8]]).unwrap();
        let err = sav_init(&m, &z, Some(1.0), EnergySign::Positive).unwrap_err();
        assert!(matches!(err, Error::ReformulationInfeasible { .. }));
        assert!(matches!(
            sav_a(&m, &z, 1.0, EnergySign::Positive),
            Err(Error::ReformulationInfeasible { .. })
        ));
    }

    #[test]
    fn sav_a_vanishes_with_gradient_and_scales_with_radicand() {
        let m = nls();
        let a = sav_a(&m, &m.zero_state(), 1.0, EnergySign::Positive).unwrap();
        assert!(a.values().all(|v| v == 0.0));

        let z = FieldState::new(vec![m.grid().sample(|x, _| x.cos()), vec![0.3; 64]]).unwrap();
        let h2 = m.nonlinear_energy(&z);
        let c0 = 5.0 - h2;
        let a1 = sav_a(&m, &z, c0, EnergySign::Positive).unwrap();
        let a2 = sav_a(&m, &z, 4.0 * c0 + 3.0 * h2, EnergySign::Positive).unwrap();
        for (x, y) in a1.values().zip(a2.values()) {
            assert!((x - 2.0 * y).abs() < 1e-13 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn esav_init_defaults() {
        let m = nls();
        let s = esav_init(&m, &m.zero_state(), None, EnergySign::Positive).unwrap();
        assert_eq!((s.r, s.e(), s.c0), (0.0, 1.0, 1.0));
        assert!(esav_init(&m, &m.zero_state(), Some(0.0), EnergySign::Positive).is_err());
        assert!(esav_init(&m, &m.zero_state(), Some(-2.0), EnergySign::Positive).is_err());
    }

    #[test]
    fn esav_default_c0_normalizes_log_to_unit_magnitude() {
        // KdV constant state with H2 = -(1/6) u^3 * |Omega| = -5.
        let m = kdv();
        let u = (30.0_f64).cbrt();
        let z = FieldState::new(vec![vec![u; 8]]).unwrap();
        let s = esav_init(&m, &z, None, EnergySign::Positive).unwrap();
        assert!((s.c0 - 5.0).abs() < 1e-12);
        assert!((s.r + 1.0).abs() < 1e-12);
        // Unbounded-below H2 initializes without complaint.
        let big = FieldState::new(vec![vec![50.0; 8]]).unwrap();
        assert!(esav_init(&m, &big, None, EnergySign::Positive).is_ok());
    }

    #[test]
    fn consistent_pair_recovers_gradient() {
        let m = nls();
        let z = FieldState::new(vec![
            m.grid().sample(|x, y| (x - y).sin()),
            m.grid().sample(|x, _| x.cos()),
        ])
        .unwrap();
        let c0 = 2.0;
        let e = (m.nonlinear_energy(&z) / c0).exp();
        let b = esav_b(&m, &z, e, c0).unwrap();
        let g = m.gradient(&z);
        for (x, y) in b.values().zip(g.values()) {
            assert!((x - y).abs() <= 1e-13 * y.abs().max(1e-300));
        }
        assert!(esav_b(&m, &z, 0.0, c0).unwrap().values().all(|v| v == 0.0));
    }

    #[test]
    fn overflow_is_reported() {
        let m = kdv();
        let z = FieldState::new(vec![vec![1000.0; 8]]).unwrap();
        assert!(matches!(
            esav_b(&m, &z, 1.0, 1.0),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn modified_energies_at_initialization() {
        let m = nls();
        assert_eq!(
            modified_energy_sav(&m, &m.zero_state(), 1.0, EnergySign::Positive),
            1.0
        );
        let z = FieldState::new(vec![
            m.grid().sample(|x, y| (x + y).cos()),
            m.grid().sample(|x, y| (x + y).sin()),
        ])
        .unwrap();
        let h = energy(&m, &z);
        let es = esav_init(&m, &z, None, EnergySign::Positive).unwrap();
        assert!((modified_energy_esav(&m, &z, es.r, es.c0) - h.total).abs() < 1e-12);
        let sv = sav_init(&m, &z, None, EnergySign::Positive).unwrap();
        assert!((modified_energy_sav(&m, &z, sv.w, sv.sign) - (h.total + sv.c0)).abs() < 1e-12);
    }

    #[test]
    fn negative_sign_reformulates_minus_h() {
        let m = nls();
        let z = FieldState::new(vec![
            m.grid().sample(|x, y| (x + y).cos()),
            m.grid().sample(|x, y| (x + y).sin()),
        ])
        .unwrap();
        let h = energy(&m, &z);
        // H2 = -pi^2 < 0, so -H2 is bounded below and C0 = 0 is admissible.
        let sv = sav_init(&m, &z, Some(0.0), EnergySign::Negative).unwrap();
        assert!((sv.w - PI).abs() < 1e-12);
        assert!(sav_init(&m, &z, Some(0.0), EnergySign::Positive).is_err());
        assert!((modified_energy_sav(&m, &z, sv.w, sv.sign) - h.total).abs() < 1e-12);
        let es = esav_init(&m, &z, None, EnergySign::Negative).unwrap();
        assert!((es.c0 + PI * PI).abs() < 1e-12);
        assert!((es.r - 1.0).abs() < 1e-12);
        assert!((modified_energy_esav(&m, &z, es.r, es.c0) - h.total).abs() < 1e-12);
    }

    #[test]
    fn energy_sign_parses_from_integers() {
        assert_eq!(EnergySign::try_from(-1).unwrap(), EnergySign::Negative);
        assert!(EnergySign::try_from(0).is_err());
        assert_eq!(i8::from(EnergySign::Positive), 1);
    }
}
