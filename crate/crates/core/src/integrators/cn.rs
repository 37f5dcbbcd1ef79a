//! Second-order Crank-Nicolson schemes with extrapolated nonlinear terms.

use crate::error::{Error, Result};
use crate::linsolve::CnSolver;
use crate::models::HamiltonianModel;
use crate::reformulation::{esav_b, sav_a, SavState};
use crate::spectral::FieldState;

/// `(3 z^n - z^{n-1}) / 2`
fn extrapolate_half(z: &FieldState, z_prev: &FieldState) -> FieldState {
    FieldState::combination(&[1.5, -0.5], &[z, z_prev])
}

/// `(I + gamma tau D L) z + extra`, returned as per-component spectra.
fn explicit_part(
    model: &HamiltonianModel,
    solver: &CnSolver,
    z: &FieldState,
    extra: Option<&FieldState>,
) -> Vec<Vec<num_complex::Complex64>> {
    let z_hat = model.forward(z);
    let mut dl = z_hat.clone();
    model.apply_l_spectrum(&mut dl);
    model.apply_d_spectrum(&mut dl);
    let w = solver.gamma() * solver.tau();
    let extra_hat = extra.map(|f| model.forward(f));
    z_hat
        .into_iter()
        .zip(dl)
        .enumerate()
        .map(|(c, (zc, dlc))| {
            zc.into_iter()
                .zip(dlc)
                .enumerate()
                .map(|(k, (a, b))| {
                    let e = extra_hat
                        .as_ref()
                        .map_or(num_complex::Complex64::new(0.0, 0.0), |x| x[c][k]);
                    a + w * b + e
                })
                .collect()
        })
        .collect()
}

/// SAV Crank-Nicolson update with the nonlinear term frozen at `z_bar`.
///
/// Eliminating `w^{n+1}` leaves a rank-one correction to a constant
/// coefficient solve; `(A, z^{n+1})_h` is recovered first and then `z^{n+1}`.
/// `solver` must factor `I - tau D L / 2`. With energy sign `s` the
/// auxiliary update is `w^{n+1} - w^n = s (A, z^{n+1} - z^n)_h / 2`.
pub fn sav_cn_update(
    model: &HamiltonianModel,
    solver: &CnSolver,
    z: &FieldState,
    aux: SavState,
    z_bar: &FieldState,
) -> Result<(FieldState, f64)> {
    let tau = solver.tau();
    let (w, s) = (aux.w, aux.sign.value());
    let a = sav_a(model, z_bar, aux.c0, aux.sign)?;
    let da = model.apply_d(&a);
    let coeff = 0.25 * tau * (4.0 * w - s * model.inner(&a, z));
    let mut c_hat = explicit_part(model, solver, z, Some(&da.scaled(coeff)));
    solver.solve_spectrum(&mut c_hat);
    let x1 = model.inverse(c_hat);
    let x2 = solver.solve(&da)?;
    let denominator = 1.0 - s * 0.25 * tau * model.inner(&a, &x2);
    if denominator.abs() < 1e-12 {
        return Err(Error::DegenerateStep { denominator });
    }
    let a_dot = model.inner(&a, &x1) / denominator;
    let mut z_next = x1;
    z_next.axpy(s * 0.25 * tau * a_dot, &x2);
    let w_next = w + s * 0.5 * model.inner(&a, &z_next.sub(z));
    Ok((z_next, w_next))
}

/// One SAV-CN step from `(z^n, w^n)` with `z^{n-1}` for the extrapolation.
pub fn step_sav_cn(
    model: &HamiltonianModel,
    solver: &CnSolver,
    z: &FieldState,
    aux: SavState,
    z_prev: &FieldState,
) -> Result<(FieldState, f64)> {
    sav_cn_update(model, solver, z, aux, &extrapolate_half(z, z_prev))
}

/// ESAV Crank-Nicolson update with a given explicit nonlinear term `b`.
///
/// `z^{n+1} = (I - tau DL/2)^{-1} [(I + tau DL/2) z^n + tau D b]` and
/// `r^{n+1} = r^n + (b, z^{n+1} - z^n)_h / C0`.
pub fn esav_cn_update(
    model: &HamiltonianModel,
    solver: &CnSolver,
    z: &FieldState,
    r: f64,
    c0: f64,
    b: &FieldState,
) -> (FieldState, f64) {
    let tau_db = model.apply_d(b).scaled(solver.tau());
    let mut rhs = explicit_part(model, solver, z, Some(&tau_db));
    solver.solve_spectrum(&mut rhs);
    let z_next = model.inverse(rhs);
    let r_next = r + model.inner(b, &z_next.sub(z)) / c0;
    (z_next, r_next)
}

/// One ESAV-CN step. `e` is extrapolated from the stored logarithms.
pub fn step_esav_cn(
    model: &HamiltonianModel,
    solver: &CnSolver,
    z: &FieldState,
    r: f64,
    c0: f64,
    z_prev: &FieldState,
    r_prev: f64,
) -> Result<(FieldState, f64)> {
    let z_bar = extrapolate_half(z, z_prev);
    let e_bar = 1.5 * r.exp() - 0.5 * r_prev.exp();
    let b = esav_b(model, &z_bar, e_bar, c0)?;
    Ok(esav_cn_update(model, solver, z, r, c0, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{kdv_model, nls_model};
    use crate::reformulation::{modified_energy_esav, modified_energy_sav, sav_init, EnergySign};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn nls() -> HamiltonianModel {
        let g = make_grid(&[(0.0, 2.0 * PI), (0.0, 2.0 * PI)], &[8, 8]).unwrap();
        nls_model(1.0, &g).unwrap()
    }

    fn bump(model: &HamiltonianModel) -> FieldState {
        let g = model.grid();
        FieldState::new(vec![
            g.sample(|x, y| 0.8 * (x + y).cos() + 0.1 * (2.0 * x).sin()),
            g.sample(|x, y| 0.8 * (x + y).sin() - 0.2 * y.cos()),
        ])
        .unwrap()
    }

    #[test]
    fn esav_cn_without_forcing_is_plain_crank_nicolson() {
        let m = nls();
        let solver = CnSolver::new(&m, 0.05, 0.5).unwrap();
        let z = bump(&m);
        let (z1, r1) = esav_cn_update(&m, &solver, &z, 0.3, 2.0, &m.zero_state());
        assert_eq!(r1, 0.3);
        let before = modified_energy_esav(&m, &z, 0.3, 2.0);
        let after = modified_energy_esav(&m, &z1, r1, 2.0);
        assert!((before - after).abs() < 1e-13 * before.abs());
    }

    #[test]
    fn linear_crank_nicolson_is_time_reversible() {
        let m = kdv_model(0.01, 1.0, &make_grid(&[(-1.0, 1.0)], &[32]).unwrap()).unwrap();
        let z = FieldState::new(vec![m.grid().sample(|x, _| (PI * x).sin().powi(3))]).unwrap();
        let fwd = CnSolver::new(&m, 0.1, 0.5).unwrap();
        let bwd = CnSolver::new(&m, -0.1, 0.5).unwrap();
        let (z1, _) = esav_cn_update(&m, &fwd, &z, 0.0, 1.0, &m.zero_state());
        let (z0, _) = esav_cn_update(&m, &bwd, &z1, 0.0, 1.0, &m.zero_state());
        assert!(z0.max_abs_diff(&z) < 1e-12);
    }

    #[test]
    fn sav_cn_step_conserves_modified_energy() {
        let m = nls();
        let solver = CnSolver::new(&m, 0.01, 0.5).unwrap();
        let z = bump(&m);
        let z_prev = z.scaled(0.99);
        for sign in [EnergySign::Positive, EnergySign::Negative] {
            let aux = sav_init(&m, &z, None, sign).unwrap();
            let (z1, w1) = step_sav_cn(&m, &solver, &z, aux, &z_prev).unwrap();
            let h0 = modified_energy_sav(&m, &z, aux.w, sign);
            let h1 = modified_energy_sav(&m, &z1, w1, sign);
            assert!((h0 - h1).abs() < 1e-12 * (1.0 + h0.abs()));
        }
    }

    #[test]
    fn sav_cn_matches_dense_brute_force() {
        // Oracle: assemble the coupled (z, w) system of the SAV-CN step densely
        // and solve it directly.
        let m = nls();
        let tau = 0.02;
        let solver = CnSolver::new(&m, tau, 0.5).unwrap();
        let z = bump(&m);
        let z_bar = z.scaled(1.01);
        for sign in [EnergySign::Positive, EnergySign::Negative] {
            let aux = sav_init(&m, &z, None, sign).unwrap();
            let (z1, w1) = sav_cn_update(&m, &solver, &z, aux, &z_bar).unwrap();
            let a = sav_a(&m, &z_bar, aux.c0, sign).unwrap();
            check_against_dense(&m, tau, &z, &a, aux.w, sign.value(), &z1, w1);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn check_against_dense(
        m: &HamiltonianModel,
        tau: f64,
        z: &FieldState,
        a: &FieldState,
        w: f64,
        s: f64,
        z1: &FieldState,
        w1: f64,
    ) {
        let n = 2 * m.grid().len();
        let h = m.grid().cell_volume();
        let av = nalgebra::DVector::from_iterator(n, a.values());
        let zv = nalgebra::DVector::from_iterator(n, z.values());
        let d = m.dense_d();
        let dl = &d * m.dense_l();
        let da = &d * &av;
        // Unknowns (z1, w1):
        //   z1 - z = tau/2 DL (z1 + z) + tau/2 DA (w1 + w)
        //   w1 - w = s h/2 A.(z1 - z)
        let mut mat = nalgebra::DMatrix::<f64>::identity(n + 1, n + 1);
        let mut rhs = nalgebra::DVector::<f64>::zeros(n + 1);
        {
            let mut top = mat.view_mut((0, 0), (n, n));
            top -= &dl * (tau / 2.0);
        }
        for i in 0..n {
            mat[(i, n)] = -tau / 2.0 * da[i];
            mat[(n, i)] = -s * h / 2.0 * av[i];
        }
        let top_rhs = &zv + (&dl * &zv) * (tau / 2.0) + &da * (tau / 2.0 * w);
        rhs.rows_mut(0, n).copy_from(&top_rhs);
        rhs[n] = w - s * h / 2.0 * av.dot(&zv);
        let sol = mat.lu().solve(&rhs).unwrap();
        let dense_z = FieldState::new(
            sol.as_slice()[..n]
                .chunks(n / 2)
                .map(<[f64]>::to_vec)
                .collect(),
        )
        .unwrap();
        assert!(dense_z.max_abs_diff(z1) < 1e-10);
        assert!((sol[n] - w1).abs() < 1e-10);
    }
}
