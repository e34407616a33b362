use qtm_core::optimize::{raw_concurrence_at, TemperatureSearch};
use qtm_core::*;

fn reset(t_c: f64, t_h: Temperature) -> ModelParams {
    ResetParams::new(1.0, 1e-3, 1e-3, 1e-3, Temperature::new(t_c).unwrap(), t_h)
        .unwrap()
        .into()
}

fn dot(u: f64, t_h: f64) -> ModelParams {
    DotParams::new(1.0, 1e-3, 1e-3, 1e-3, Temperature::zero(), Temperature::new(t_h).unwrap(), u)
        .unwrap()
        .into()
}

#[test]
fn best_point_is_bounded_and_reproducible() {
    for base in [reset(0.0, Temperature::Infinite), dot(300.0, 30.0)] {
        let prob = OptimizationProblem::new(base).with_bounds(1e-5, 5e-3);
        let res = maximize_concurrence(&prob).unwrap();
        for v in res.best_point {
            assert!(v >= 1e-5 * (1.0 - 1e-12) && v <= 5e-3 * (1.0 + 1e-12), "{v}");
        }
        let again = steady_report(&base.with_couplings(res.best_point).unwrap()).unwrap();
        assert!((again.concurrence - res.best_value).abs() <= 1e-10);
        assert!((res.best_raw.max(0.0) - res.best_value).abs() <= 1e-10);
        let rerun = maximize_concurrence(&prob).unwrap();
        assert_eq!(rerun.best_point, res.best_point);
        assert_eq!(rerun.best_value, res.best_value);
    }
}

#[test]
fn larger_cap_never_lowers_the_maximum() {
    for base in [reset(0.1, Temperature::new(5.0).unwrap()), dot(20.0, 3.0)] {
        let mut last = f64::NEG_INFINITY;
        for upper in [1e-4, 1e-3, 1e-2] {
            let res = maximize_concurrence(&OptimizationProblem::new(base).with_bounds(1e-6, upper)).unwrap();
            assert!(res.best_raw >= last - 1e-9, "cap {upper}: {} < {last}", res.best_raw);
            last = res.best_raw;
        }
    }
}

#[test]
fn hot_cold_equilibrium_is_never_entangled() {
    let res = maximize_concurrence(&OptimizationProblem::new(reset(0.5, Temperature::new(0.5).unwrap()))).unwrap();
    assert!(!res.entangled);
    assert_eq!(res.best_value, 0.0);
}

#[test]
fn reset_threshold_at_zero_cold_temperature_is_zero_plus() {
    // the optimized raw concurrence is positive however cold the hot bath is
    for t_h in [0.05, 0.1, 0.2] {
        let base = reset(0.0, Temperature::new(t_h).unwrap());
        let res = maximize_concurrence(&OptimizationProblem::new(base)).unwrap();
        assert!(res.best_raw > 0.0, "T_h = {t_h}: {}", res.best_raw);
    }
    // and the detected threshold is tied only to the detection floor
    let search = TemperatureSearch::default();
    let th = threshold_hot_temperature(&reset(0.0, Temperature::Infinite), &search).unwrap();
    let t = th.value().unwrap();
    let just_above = reset(0.0, Temperature::new(t).unwrap());
    let res = maximize_concurrence(&OptimizationProblem::new(just_above)).unwrap();
    assert!(res.best_value > search.detection);
    assert!(t < 0.1, "{t}");
}

#[test]
fn reset_threshold_rises_with_cold_temperature_and_ends() {
    let search = TemperatureSearch::default();
    let mut prev = 0.0;
    for t_c in [0.05, 0.1, 0.15, 0.2] {
        let th = threshold_hot_temperature(&reset(t_c, Temperature::Infinite), &search)
            .unwrap()
            .value()
            .unwrap();
        assert!(th > t_c && th > prev, "T_c = {t_c}: {th}");
        prev = th;
    }
    assert_eq!(
        threshold_hot_temperature(&reset(0.25, Temperature::Infinite), &search).unwrap(),
        Threshold::Unreachable
    );
}

#[test]
fn raw_objective_matches_report() {
    let base = dot(1000.0, 100.0);
    let point = [2e-3, 1e-2, 1e-4];
    let raw = raw_concurrence_at(&base, point).unwrap();
    let rec = steady_report(&base.with_couplings(point).unwrap()).unwrap();
    assert!((raw.max(0.0) - rec.concurrence).abs() <= 1e-10);
}

#[test]
fn dot_peak_sits_at_finite_hot_temperature() {
    let search = TemperatureSearch::default();
    let opt = maximize_over_hot_temperature(&dot(1000.0, 1.0), &search).unwrap();
    assert!(opt.t_h < 0.1 * search.t_h_cap, "{}", opt.t_h);
    let far = maximize_concurrence(&OptimizationProblem::new(dot(1000.0, search.t_h_cap))).unwrap();
    assert!(opt.result.best_value > far.best_value + 0.05);
}

#[test]
fn invalid_problems_are_rejected() {
    let base = reset(0.0, Temperature::Infinite);
    let mut p = OptimizationProblem::new(base);
    p.grid_points = 1;
    assert!(maximize_concurrence(&p).is_err());
    assert!(maximize_concurrence(&OptimizationProblem::new(base).with_bounds(1e-2, 1e-3)).is_err());
    let inf_cold = ResetParams::new(1.0, 1e-3, 1e-3, 1e-3, Temperature::Infinite, Temperature::Infinite).unwrap();
    assert!(threshold_hot_temperature(&inf_cold.into(), &TemperatureSearch::default()).is_err());
}
