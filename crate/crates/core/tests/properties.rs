use proptest::prelude::*;

use qtm_core::analytics::{
    concurrence_x_state, dissipator_heat_current, is_x_state, reset_heat_current, spin_flipped,
};
use qtm_core::linalg::{self, c, ComplexMatrix};
use qtm_core::models::{
    build_h0, build_hdot, build_hint, dot_rates, flux_rates, flux_two_operator_liouvillian, JumpTerm,
};
use qtm_core::state::partial_trace_matrix;
use qtm_core::*;

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * n)
        .prop_map(move |v| ComplexMatrix::from_fn(n, n, |i, j| c(v[2 * (i * n + j)], v[2 * (i * n + j) + 1])))
}

fn density(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n).prop_map(|x| {
        let m = &x * x.adjoint();
        let t = linalg::trace(&m);
        m / t
    })
}

fn unitary2() -> impl Strategy<Value = ComplexMatrix> {
    matrix(2).prop_map(|x| (x + linalg::identity(2)).qr().q())
}

fn coupling() -> impl Strategy<Value = f64> {
    (-4.0f64..-2.0).prop_map(|e| 10f64.powf(e))
}

fn temp() -> impl Strategy<Value = f64> {
    0.05f64..20.0
}

fn t(v: f64) -> Temperature {
    Temperature::new(v).unwrap()
}

prop_compose! {
    fn reset_params()(g in coupling(), pc in coupling(), ph in coupling(), tc in temp(), th in temp())
        -> ResetParams {
        ResetParams::new(1.0, g, pc, ph, t(tc), t(th)).unwrap()
    }
}

prop_compose! {
    fn flux_params()(g in coupling(), gc in coupling(), gh in coupling(), tc in temp(), th in temp())
        -> FluxParams {
        FluxParams::new(1.0, g, gc, gh, t(tc), t(th)).unwrap()
    }
}

prop_compose! {
    fn dot_params()(f in flux_params(), u in 0.0f64..400.0) -> DotParams {
        DotParams::new(f.energy, f.g, f.gamma_c, f.gamma_h, f.t_c, f.t_h, u).unwrap()
    }
}

fn any_model() -> impl Strategy<Value = ModelParams> {
    prop_oneof![
        reset_params().prop_map(ModelParams::from),
        flux_params().prop_map(ModelParams::from),
        dot_params().prop_map(ModelParams::from),
    ]
}

fn balance_error(jumps: &[JumpTerm], t_c: f64, t_h: f64) -> f64 {
    let (up, down) = jumps.split_at(4);
    up.iter()
        .zip(down)
        .map(|(a, e)| {
            let temp = if a.bath == Bath::Cold { t_c } else { t_h };
            let expected = (-a.transition_energy / temp).exp();
            (a.rate / e.rate - expected).abs() / expected
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kron_is_associative(a in matrix(2), b in matrix(2), d in matrix(2)) {
        let left = linalg::kron(&linalg::kron(&a, &b), &d);
        let right = linalg::kron(&a, &linalg::kron(&b, &d));
        prop_assert!(linalg::max_abs_diff(&left, &right) <= 1e-12);
    }

    #[test]
    fn kron_is_bilinear(a in matrix(2), a2 in matrix(2), b in matrix(2), s in -2.0f64..2.0) {
        let k = c(s, 0.5 * s);
        let lhs = linalg::kron(&(&a * k + &a2), &b);
        let rhs = linalg::kron(&a, &b) * k + linalg::kron(&a2, &b);
        prop_assert!(linalg::max_abs_diff(&lhs, &rhs) <= 1e-12);
        let lhs = linalg::kron(&b, &(&a * k + &a2));
        let rhs = linalg::kron(&b, &a) * k + linalg::kron(&b, &a2);
        prop_assert!(linalg::max_abs_diff(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn partial_trace_of_product(rho in density(2), sigma in density(2)) {
        let joint = linalg::kron(&rho, &sigma);
        prop_assert!(linalg::max_abs_diff(&partial_trace_matrix(&joint, Subsystem::First), &sigma) <= 1e-12);
        prop_assert!(linalg::max_abs_diff(&partial_trace_matrix(&joint, Subsystem::Second), &rho) <= 1e-12);
    }

    #[test]
    fn reduced_states_have_unit_trace(m in density(4)) {
        let rho = DensityMatrix::new(m).unwrap();
        for k in [Subsystem::First, Subsystem::Second] {
            prop_assert!((linalg::trace(&partial_trace(&rho, k)) - c(1.0, 0.0)).norm() <= 1e-12);
        }
    }

    #[test]
    fn vectorization_round_trip_is_exact(m in matrix(4)) {
        let back = linalg::devectorize(&linalg::vectorize(&m).unwrap()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn sandwich_matches_column_stacking(a in matrix(4), b in matrix(4), x in matrix(4)) {
        let direct = linalg::vectorize(&(&a * &x * &b)).unwrap();
        let via = linalg::sandwich(&a, &b) * linalg::vectorize(&x).unwrap();
        prop_assert!((direct - via).camax() <= 1e-12);
    }

    #[test]
    fn spin_flip_products_have_nonnegative_real_spectrum(m in density(4)) {
        let rho = DensityMatrix::new(m).unwrap();
        let product = rho.matrix() * spin_flipped(&rho);
        for z in linalg::eigenvalues(&product).unwrap() {
            prop_assert!(z.im.abs() <= 1e-10, "{z}");
            prop_assert!(z.re >= -1e-10, "{z}");
        }
    }

    #[test]
    fn generators_annihilate_trace_and_preserve_hermiticity(p in any_model(), m in density(4)) {
        let l = p.liouvillian().unwrap();
        let out = l.apply(&m);
        let scale = l.generator().camax();
        prop_assert!(linalg::trace(&out).norm() <= 1e-12 * scale);
        prop_assert!(linalg::hermitian_deviation(&out) <= 1e-12 * scale);
    }

    #[test]
    fn detailed_balance_holds(f in flux_params(), d in dot_params()) {
        prop_assert!(balance_error(&flux_rates(&f).unwrap(), f.t_c.value(), f.t_h.value()) <= 1e-12);
        prop_assert!(balance_error(&dot_rates(&d).unwrap(), d.t_c.value(), d.t_h.value()) <= 1e-12);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(m in density(4), uc in unitary2(), uh in unitary2()) {
        let rho = DensityMatrix::new(m).unwrap();
        let u = linalg::kron(&uc, &uh);
        let rotated = linalg::hermitian_part(&(&u * rho.matrix() * u.adjoint()));
        let rotated = DensityMatrix::new(rotated).unwrap();
        let a = concurrence(&rho).unwrap().raw;
        let b = concurrence(&rotated).unwrap().raw;
        prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }

    #[test]
    fn reset_oracle_and_closed_form(p in reset_params()) {
        let numeric = solve_steady(&ModelParams::from(p).liouvillian().unwrap()).unwrap();
        let exact = analytic_reset_steady(&p).unwrap();
        prop_assert!(linalg::max_abs_diff(numeric.state.matrix(), exact.matrix()) <= 1e-10);
        let w = concurrence(&exact).unwrap().value;
        let cf = concurrence_closed_form(&p).unwrap().value;
        prop_assert!((w - cf).abs() <= 1e-10);
    }

    #[test]
    fn reset_heat_definitions_agree(p in reset_params(), m in density(4)) {
        let rho = DensityMatrix::new(m).unwrap();
        let l = ModelParams::from(p).liouvillian().unwrap();
        for bath in [Bath::Cold, Bath::Hot] {
            let a = reset_heat_current(&rho, &p, bath);
            let b = dissipator_heat_current(&rho, &l, p.energy, bath).unwrap();
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn reset_steady_heat_is_conserved(p in reset_params()) {
        let r = steady_report(&p.into()).unwrap();
        prop_assert!((r.q_c + r.q_h).abs() <= 1e-10);
        if p.t_h.value() > p.t_c.value() && r.concurrence > 0.0 {
            prop_assert!(r.q_c > 0.0);
        }
    }

    #[test]
    fn lindblad_steady_states_are_x_states(f in flux_params(), d in dot_params()) {
        for p in [ModelParams::from(f), ModelParams::from(d)] {
            let rho = solve_steady(&p.liouvillian().unwrap()).unwrap().state;
            prop_assert!(is_x_state(&rho, 1e-10));
            // only the single-excitation coherence survives
            prop_assert!(rho.get(0, 3).norm() <= 1e-10);
            let x = concurrence_x_state(&rho, 1e-10).unwrap().value;
            prop_assert!((x - concurrence(&rho).unwrap().value).abs() <= 1e-10);
        }
    }

    #[test]
    fn equal_temperatures_give_separable_states(p in any_model()) {
        let (t_c, _) = p.temperatures();
        let p = p.with_temperatures(t_c, t_c).unwrap();
        let rho = solve_steady(&p.liouvillian().unwrap()).unwrap().state;
        prop_assert!(concurrence(&rho).unwrap().value <= 1e-8);
    }

    #[test]
    fn reset_equal_temperatures_fix_thermal_product(p in reset_params()) {
        let p = ResetParams { t_h: p.t_c, ..p };
        let tau = DensityMatrix::thermal_product(&p.cold_qubit(), &p.hot_qubit());
        let l = ModelParams::from(p).liouvillian().unwrap();
        let image = linalg::vectorize(&l.apply(tau.matrix())).unwrap();
        prop_assert!(linalg::vector_norm(&image) <= 1e-10);
    }
}

#[test]
fn dot_hamiltonian_at_zero_u_is_flux_hamiltonian() {
    for g in [0.0, 1e-3, 0.3] {
        let flux = build_h0(1.3).unwrap() + build_hint(g);
        assert_eq!(build_hdot(1.3, g, 0.0).unwrap(), flux);
    }
}

#[test]
fn reset_concurrence_grows_with_hot_temperature() {
    let base = |t_h: Temperature| -> ModelParams {
        ResetParams::new(1.0, 1.6e-3, 1e-2, 1.1e-3, Temperature::zero(), t_h).unwrap().into()
    };
    let mut prev = -1.0;
    for k in 0..=20 {
        let t_h = 10f64.powf(-1.0 + 7.0 * k as f64 / 20.0);
        let c = steady_report(&base(t(t_h))).unwrap().concurrence;
        assert!(c >= prev - 1e-12, "T_h = {t_h}: {c} < {prev}");
        prev = c;
    }
    let c_inf = steady_report(&base(Temperature::Infinite)).unwrap().concurrence;
    assert!(c_inf >= prev - 1e-12);
}

/// The main-text jump pair and the four conditional jumps are different
/// models; the gap between their steady states is measured, not assumed.
#[test]
fn two_and_four_operator_forms_are_compared() {
    let mut worst: f64 = 0.0;
    for (g, tc, th) in [(1e-3, 0.1, 5.0), (5e-3, 0.5, 50.0), (1e-4, 1.0, 2.0)] {
        let p = FluxParams::new(1.0, g, 1e-3, 2e-3, t(tc), t(th)).unwrap();
        let four = solve_steady(&ModelParams::from(p).liouvillian().unwrap()).unwrap().state;
        let two = solve_steady(&flux_two_operator_liouvillian(&p).unwrap()).unwrap().state;
        let d = four.trace_distance(&two).unwrap();
        assert!(d.is_finite());
        worst = worst.max(d);
        // both describe the same local thermalization when uncoupled
        let p0 = FluxParams { g: 0.0, ..p };
        let four = solve_steady(&ModelParams::from(p0).liouvillian().unwrap()).unwrap().state;
        let two = solve_steady(&flux_two_operator_liouvillian(&p0).unwrap()).unwrap().state;
        assert!(four.trace_distance(&two).unwrap() <= 1e-10);
    }
    eprintln!("two- vs four-operator steady states: max trace distance {worst:.3e}");
}

#[test]
fn lindblad_heat_current_sum_is_reported() {
    let p = FluxParams::new(1.0, 1e-3, 1e-3, 1e-3, t(0.1), t(5.0)).unwrap();
    let r = steady_report(&p.into()).unwrap();
    assert!(r.q_c > 0.0 && r.q_h < 0.0);
    eprintln!("flux Q_c + Q_h = {:.3e}", r.q_c + r.q_h);
}
