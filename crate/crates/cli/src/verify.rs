//! Built-in oracle suite behind `qtm verify`.
//!
//! Parameter points come from a Halton sequence, so the suite is the same on
//! every run without needing a random seed.

use qtm_core::analytics::{concurrence_x_state, is_x_state};
use qtm_core::linalg::ZERO;
use qtm_core::models::{dot_rates, flux_rates, JumpTerm};
use qtm_core::{
    analytic_reset_steady, concurrence, concurrence_closed_form, solve_steady, Bath, DotParams, FluxParams,
    ModelParams, ResetParams, Temperature,
};

const DRAWS: usize = 200;

pub struct Check {
    pub group: &'static str,
    pub name: &'static str,
    pub error: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.error.is_finite() && self.error <= self.tolerance
    }
}

fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    i += 1;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

struct Draw {
    g: f64,
    c: f64,
    h: f64,
    t_c: f64,
    t_h: f64,
}

fn draw(k: usize) -> Draw {
    let log = |u: f64| 10f64.powf(-4.0 + 2.0 * u);
    let t_c = 0.05 + 2.0 * halton(k, 7);
    Draw {
        g: log(halton(k, 2)),
        c: log(halton(k, 3)),
        h: log(halton(k, 5)),
        t_c,
        t_h: t_c + 20.0 * halton(k, 11),
    }
}

fn t(v: f64) -> Temperature {
    Temperature::Finite(v)
}

type Outcome = Result<f64, String>;

fn max_over(cases: usize, f: impl Fn(usize) -> Outcome) -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..cases {
        let e = f(k)?;
        if !e.is_finite() {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(e);
    }
    Ok(worst)
}

fn reset(k: usize) -> Result<ResetParams, String> {
    let d = draw(k);
    let t_h = if k % 10 == 0 { Temperature::Infinite } else { t(d.t_h) };
    ResetParams::new(1.0, d.g, d.c, d.h, t(d.t_c), t_h).map_err(|e| e.to_string())
}

fn steady_vs_closed_form(k: usize) -> Outcome {
    let p = reset(k)?;
    let numeric = solve_steady(&ModelParams::from(p).liouvillian().map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let exact = analytic_reset_steady(&p).map_err(|e| e.to_string())?;
    Ok((numeric.state.matrix() - exact.matrix()).camax())
}

fn closed_form_vs_wootters(k: usize) -> Outcome {
    let p = reset(k)?;
    let exact = analytic_reset_steady(&p).map_err(|e| e.to_string())?;
    let w = concurrence(&exact).map_err(|e| e.to_string())?.value;
    let cf = concurrence_closed_form(&p).map_err(|e| e.to_string())?.value;
    Ok((w - cf).abs())
}

fn lindblad(k: usize, equal: bool) -> Result<[ModelParams; 2], String> {
    let d = draw(k);
    let t_h = if equal { d.t_c } else { d.t_h };
    let flux = FluxParams::new(1.0, d.g, d.c, d.h, t(d.t_c), t(t_h)).map_err(|e| e.to_string())?;
    let u = 300.0 * halton(k, 13);
    let dot = DotParams::new(1.0, d.g, d.c, d.h, t(d.t_c), t(t_h), u).map_err(|e| e.to_string())?;
    Ok([flux.into(), dot.into()])
}

fn x_state_vs_wootters(k: usize) -> Outcome {
    let mut worst = 0.0f64;
    for p in lindblad(k, false)? {
        let rho = solve_steady(&p.liouvillian().map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .state;
        if !is_x_state(&rho, 1e-10) {
            return Ok(f64::INFINITY);
        }
        let x = concurrence_x_state(&rho, 1e-10).map_err(|e| e.to_string())?.value;
        let w = concurrence(&rho).map_err(|e| e.to_string())?.value;
        worst = worst.max((x - w).abs());
    }
    Ok(worst)
}

fn balance_error(jumps: &[JumpTerm], t_c: f64, t_h: f64) -> f64 {
    let (up, down) = jumps.split_at(4);
    let mut worst = 0.0f64;
    for (a, e) in up.iter().zip(down) {
        let temp = match a.bath {
            Bath::Cold => t_c,
            Bath::Hot => t_h,
        };
        let expected = (-a.transition_energy / temp).exp();
        worst = worst.max((a.rate / e.rate - expected).abs() / expected);
    }
    worst
}

fn detailed_balance(k: usize) -> Outcome {
    let d = draw(k);
    let [flux, dot] = lindblad(k, false)?;
    let (ModelParams::Flux(f), ModelParams::Dot(q)) = (flux, dot) else {
        unreachable!()
    };
    let a = balance_error(&flux_rates(&f).map_err(|e| e.to_string())?, d.t_c, d.t_h);
    let b = balance_error(&dot_rates(&q).map_err(|e| e.to_string())?, d.t_c, d.t_h);
    Ok(a.max(b))
}

fn equilibrium(k: usize) -> Outcome {
    let d = draw(k);
    let r: ModelParams = ResetParams::new(1.0, d.g, d.c, d.h, t(d.t_c), t(d.t_c))
        .map_err(|e| e.to_string())?
        .into();
    let [flux, dot] = lindblad(k, true)?;
    let mut worst = 0.0f64;
    for p in [r, flux, dot] {
        let rho = solve_steady(&p.liouvillian().map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .state;
        worst = worst.max(concurrence(&rho).map_err(|e| e.to_string())?.value);
    }
    Ok(worst)
}

fn trace_preservation(k: usize) -> Outcome {
    let [flux, dot] = lindblad(k, false)?;
    let mut worst = 0.0f64;
    for p in [ModelParams::from(reset(k)?), flux, dot] {
        let l = p.liouvillian().map_err(|e| e.to_string())?;
        let gen = l.generator();
        let scale = gen.camax().max(f64::MIN_POSITIVE);
        for j in 0..16 {
            let s = (0..4).fold(ZERO, |acc, i| acc + gen[(5 * i, j)]);
            worst = worst.max(s.norm() / scale);
        }
    }
    Ok(worst)
}

type CheckFn = fn(usize) -> Outcome;

const SUITE: &[(&str, &str, f64, CheckFn)] = &[
    ("steady-state oracle", "reset numeric vs closed form (max entry)", 1e-10, steady_vs_closed_form),
    ("concurrence", "reset closed form vs Wootters", 1e-10, closed_form_vs_wootters),
    ("concurrence", "Lindblad X-state formula vs Wootters", 1e-10, x_state_vs_wootters),
    ("detailed balance", "flux and dot rate ratios (relative)", 1e-12, detailed_balance),
    ("equilibrium separability", "concurrence at T_c = T_h, all models", 1e-8, equilibrium),
    ("trace preservation", "trace row of L, all models (relative)", 1e-12, trace_preservation),
];

/// Runs every check; `tolerance` replaces all built-in tolerances.
pub fn run(tolerance: Option<f64>) -> Vec<(Check, Option<String>)> {
    SUITE
        .iter()
        .map(|&(group, name, tol, f)| {
            let (error, failure) = match max_over(DRAWS, f) {
                Ok(e) => (e, None),
                Err(msg) => (f64::INFINITY, Some(msg)),
            };
            let check = Check {
                group,
                name,
                error,
                tolerance: tolerance.unwrap_or(tol),
                cases: DRAWS,
            };
            (check, failure)
        })
        .collect()
}

/// Prints the report table; returns whether every check passed.
pub fn report(results: &[(Check, Option<String>)]) -> bool {
    println!(
        "{:<26} {:<44} {:>6} {:>11} {:>9}  status",
        "group", "check", "cases", "max error", "tolerance"
    );
    let mut passed = 0;
    for (c, failure) in results {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!(
            "{:<26} {:<44} {:>6} {:>11.3e} {:>9.1e}  {status}",
            c.group, c.name, c.cases, c.error, c.tolerance
        );
        if let Some(msg) = failure {
            println!("    error: {msg}");
        }
        passed += usize::from(c.passed());
    }
    let groups: std::collections::BTreeSet<_> = results.iter().map(|(c, _)| c.group).collect();
    println!("{passed}/{} checks passed across {} groups", results.len(), groups.len());
    passed == results.len()
}
