use std::f64::consts::PI;

use proptest::prelude::*;

use esav::harness::exact::wrap_into;
use esav::integrators::field_errors;
use esav::linsolve::{solve_cn, solve_stage_system};
use esav::models::{kdv_model, nls_model, sg_model, HamiltonianModel};
use esav::reformulation::{esav_b, esav_init, modified_energy_esav, EnergySign};
use esav::spectral::{
    apply_derivative, diff_matrix, inner_h, inner_h_array, make_grid, FieldState,
};
use esav::tableaux::gauss_tableau;

fn model(kind: usize, n: usize) -> HamiltonianModel {
    match kind {
        0 => nls_model(
            1.0,
            &make_grid(&[(0.0, 2.0 * PI), (0.0, 2.0 * PI)], &[n, n]).unwrap(),
        )
        .unwrap(),
        1 => {
            let g = make_grid(&[(-7.0, 7.0), (-7.0, 7.0)], &[n, n]).unwrap();
            sg_model(&vec![1.0; g.len()], &g).unwrap()
        }
        _ => kdv_model(0.05, 1.0, &make_grid(&[(-3.0, 5.0)], &[n]).unwrap()).unwrap(),
    }
}

/// Deterministic state of the right shape for `m`, filled from `values`.
fn state(m: &HamiltonianModel, values: &[f64]) -> FieldState {
    let len = m.grid().len();
    let comps = (0..m.components())
        .map(|c| {
            (0..len)
                .map(|i| {
                    values[(c * len + i * 7 + c) % values.len()] * (1.0 + 0.1 * i as f64).sin()
                })
                .collect()
        })
        .collect();
    FieldState::new(comps).unwrap()
}

fn sizes() -> impl Strategy<Value = usize> {
    prop_oneof![Just(8usize), Just(16), Just(32)]
}

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fft_and_dense_derivatives_agree(n in sizes(), order in 1u8..=2, lo in -5.0..5.0f64, len in 0.5..20.0f64, v in values()) {
        let g = make_grid(&[(lo, lo + len)], &[n]).unwrap();
        let field: Vec<f64> = (0..n).map(|i| v[i % v.len()]).collect();
        let d = diff_matrix(&g, 0, order).unwrap();
        let dense = &d * nalgebra::DVector::from_vec(field.clone());
        let fast = apply_derivative(&field, &g, 0, order).unwrap();
        let scale = (2.0 * PI / len * n as f64).powi(order as i32);
        for (a, b) in dense.iter().zip(&fast) {
            prop_assert!((a - b).abs() <= 1e-11 * scale.max(1.0));
        }
    }

    #[test]
    fn differentiation_matrices_have_constants_in_their_kernel(n in sizes(), order in 1u8..=2, len in 0.5..20.0f64) {
        let g = make_grid(&[(0.0, len)], &[n]).unwrap();
        let d = diff_matrix(&g, 0, order).unwrap();
        let scale = (2.0 * PI / len * n as f64).powi(order as i32);
        for row in d.row_iter() {
            prop_assert!(row.sum().abs() <= 1e-10 * scale.max(1.0));
        }
        let sign = if order == 1 { -1.0 } else { 1.0 };
        prop_assert!((&d - d.transpose() * sign).abs().max() <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn first_derivative_is_skew_under_the_grid_inner_product(n in sizes(), v in values()) {
        let g = make_grid(&[(0.0, 2.0 * PI), (-1.0, 3.0)], &[n, n]).unwrap();
        let z: Vec<f64> = (0..g.len()).map(|i| v[(i * 5) % v.len()] + 0.3 * (i as f64).cos()).collect();
        let norm2 = inner_h_array(&g, &z, &z).unwrap();
        for dim in 0..2 {
            let dz = apply_derivative(&z, &g, dim, 1).unwrap();
            prop_assert!(inner_h_array(&g, &dz, &z).unwrap().abs() <= 1e-11 * norm2.max(1.0));
        }
    }

    #[test]
    fn structure_operators_are_adjoint_as_required(kind in 0usize..3, a in values(), b in values()) {
        let m = model(kind, 8);
        let (u, v) = (state(&m, &a), state(&m, &b));
        let scale = 1.0 + m.inner(&u, &u) + m.inner(&v, &v);
        // D is skew-adjoint.
        let skew = m.inner(&m.apply_d(&u), &v) + m.inner(&u, &m.apply_d(&v));
        prop_assert!(skew.abs() <= 1e-10 * scale, "{skew}");
        // L is self-adjoint and non-negative.
        let sym = m.inner(&m.apply_l(&u), &v) - m.inner(&u, &m.apply_l(&v));
        prop_assert!(sym.abs() <= 1e-10 * scale, "{sym}");
        prop_assert!(m.inner(&m.apply_l(&u), &u) >= -1e-10 * scale);
    }

    #[test]
    fn gradient_matches_central_differences(kind in 0usize..3, a in values(), node in 0usize..64) {
        let m = model(kind, 8);
        let z = state(&m, &a);
        let grad = m.gradient(&z);
        let h = m.grid().cell_volume();
        let eps = 1e-5;
        for c in 0..m.components() {
            let i = node % m.grid().len();
            let mut plus = z.clone();
            plus.component_mut(c)[i] += eps;
            let mut minus = z.clone();
            minus.component_mut(c)[i] -= eps;
            let fd = (m.nonlinear_energy(&plus) - m.nonlinear_energy(&minus)) / (2.0 * eps * h);
            prop_assert!((fd - grad.component(c)[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn consistent_esav_pair_recovers_the_gradient(kind in 0usize..3, a in values(), negative in any::<bool>()) {
        let m = model(kind, 8);
        let z = state(&m, &a);
        let sign = if negative { EnergySign::Negative } else { EnergySign::Positive };
        let aux = esav_init(&m, &z, None, sign).unwrap();
        let b = esav_b(&m, &z, aux.r.exp(), aux.c0).unwrap();
        let grad = m.gradient(&z);
        let scale = grad.values().fold(1.0_f64, |s, v| s.max(v.abs()));
        prop_assert!(b.max_abs_diff(&grad) <= 1e-13 * scale);
        let h = esav::models::energy(&m, &z).total;
        let modified = modified_energy_esav(&m, &z, aux.r, aux.c0);
        prop_assert!((modified - h).abs() <= 1e-12 * (1.0 + h.abs()));
    }

    #[test]
    fn fast_solves_reproduce_their_right_hand_side(kind in 0usize..3, a in values(), tau in 0.001..1.0f64) {
        let m = model(kind, 8);
        let rhs = state(&m, &a);
        // (I - tau/2 DL) x = rhs
        let x = solve_cn(&m, &rhs, tau, 0.5).unwrap();
        let mut back = x.clone();
        back.axpy(-0.5 * tau, &m.apply_d(&m.apply_l(&x)));
        prop_assert!(back.max_abs_diff(&rhs) <= 1e-11 * (1.0 + rhs.values().fold(0.0_f64, |s, v| s.max(v.abs()))));
    }

    #[test]
    fn stage_solves_satisfy_the_stage_equations(kind in 0usize..3, a in values(), s in 1usize..=3, tau in 0.001..0.5f64) {
        let m = model(kind, 8);
        let t = gauss_tableau(s).unwrap();
        let zn = state(&m, &a);
        let forcing: Vec<FieldState> = (0..s).map(|j| zn.scaled(0.3 * (j as f64 + 1.0))).collect();
        let stages = solve_stage_system(&m, &t, tau, &zn, &forcing).unwrap();
        // z_i = zn + tau sum_j a_ij D(L z_j + f_j)
        for i in 0..s {
            let mut expect = zn.clone();
            for j in 0..s {
                let mut g = m.apply_l(&stages[j]);
                g.axpy(1.0, &forcing[j]);
                expect.axpy(tau * t.a(i, j), &m.apply_d(&g));
            }
            prop_assert!(stages[i].max_abs_diff(&expect) <= 1e-10);
        }
    }

    #[test]
    fn wrap_maps_into_the_period(theta in -1e4..1e4f64, lo in -10.0..10.0f64, len in 0.1..50.0f64) {
        let hi = lo + len;
        let w = wrap_into(theta, lo, hi);
        prop_assert!(w >= lo - 1e-9 && w <= hi + 1e-9, "{w}");
        // Same point modulo the period.
        let k = ((theta - w) / len).round();
        prop_assert!((theta - w - k * len).abs() <= 1e-8 * (1.0 + theta.abs()));
        if (lo..=hi).contains(&theta) {
            prop_assert_eq!(w, theta);
        }
    }

    #[test]
    fn field_error_is_a_metric(a in values(), b in values(), c in values()) {
        let m = model(0, 8);
        let (x, y, z) = (state(&m, &a), state(&m, &b), state(&m, &c));
        let g = m.grid();
        let d = |p: &FieldState, q: &FieldState| field_errors(g, p, q).unwrap();
        prop_assert_eq!(d(&x, &x), (0.0, 0.0));
        let (xy, yz, xz) = (d(&x, &y), d(&y, &z), d(&x, &z));
        prop_assert_eq!(xy, d(&y, &x));
        prop_assert!(xz.0 <= xy.0 + yz.0 + 1e-14);
        prop_assert!(xz.1 <= xy.1 + yz.1 + 1e-14);
        if x != y {
            prop_assert!(xy.0 > 0.0 && xy.1 > 0.0);
        }
    }
}

#[test]
fn resolved_modes_are_differentiated_exactly() {
    for n in [8usize, 16, 32] {
        let (lo, hi) = (-3.0, 5.0);
        let g = make_grid(&[(lo, hi)], &[n]).unwrap();
        let mu = 2.0 * PI / (hi - lo);
        for k in 0..(n / 2) as i32 {
            let w = mu * k as f64;
            let re = g.sample(|x, _| (w * x).cos());
            let im = g.sample(|x, _| (w * x).sin());
            let d_re = apply_derivative(&re, &g, 0, 1).unwrap();
            let d_im = apply_derivative(&im, &g, 0, 1).unwrap();
            for i in 0..n {
                let scale = 1.0 + w;
                assert!((d_re[i] + w * im[i]).abs() <= 1e-11 * scale);
                assert!((d_im[i] - w * re[i]).abs() <= 1e-11 * scale);
            }
        }
    }
}

#[test]
fn grid_inner_product_of_fields_is_symmetric() {
    let m = model(1, 8);
    let u = state(&m, &[0.3, -0.2, 0.9]);
    let v = state(&m, &[0.5, 0.1]);
    let g = m.grid();
    assert_eq!(inner_h(g, &u, &v).unwrap(), inner_h(g, &v, &u).unwrap());
}
