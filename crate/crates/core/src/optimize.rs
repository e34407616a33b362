//! Maximizing steady-state concurrence over the couplings `(g, cold, hot)`
//! and locating the temperatures at which entanglement appears.
//!
//! The objective is the unclipped Wootters value `λ₁ − λ₂ − λ₃ − λ₄`, which
//! stays informative on the separable side where the clipped concurrence is a
//! flat zero. Search runs in log10 coordinates: a coarse grid over the box,
//! then bounded Nelder-Mead from the best few grid points. Everything is
//! deterministic.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::analytics::{concurrence, steady_report, SweepRecord};
use crate::error::{Error, Result};
use crate::models::ModelParams;
use crate::state::{DensityMatrix, Temperature};
use crate::steady::solve_steady_direct;

pub const DEFAULT_LOWER: f64 = 1e-6;
pub const DEFAULT_UPPER: f64 = 1e-2;
/// Concurrence above which a state counts as entangled.
pub const DETECTION_THRESHOLD: f64 = 1e-6;

/// Largest loss accepted when moving an optimum along its ray of equivalent
/// couplings.
const RAY_TOL: f64 = 1e-10;

/// Objective values closer than this are treated as ties.
const TIE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationProblem {
    /// Fixed parameters (energy, temperatures, `U`); its couplings are ignored.
    pub base: ModelParams,
    pub lower: f64,
    pub upper: f64,
    /// Grid points per axis.
    pub grid_points: usize,
    /// Simplex refinement stops once every vertex is within this relative
    /// distance of the best one.
    pub rel_tol: f64,
    pub max_evals: usize,
    /// Number of best grid points used as simplex starts.
    pub starts: usize,
    /// Extra starting points (couplings, not logarithms).
    pub seeds: Vec<[f64; 3]>,
    pub record_trace: bool,
}

impl OptimizationProblem {
    pub fn new(base: ModelParams) -> Self {
        OptimizationProblem {
            base,
            lower: DEFAULT_LOWER,
            upper: DEFAULT_UPPER,
            grid_points: 8,
            rel_tol: 1e-4,
            max_evals: 10_000,
            starts: 3,
            seeds: Vec::new(),
            record_trace: false,
        }
    }

    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.lower > 0.0 && self.lower < self.upper && self.upper.is_finite()) {
            return Err(Error::param(
                "bounds",
                format!("need 0 < lower < upper, got [{}, {}]", self.lower, self.upper),
            ));
        }
        if self.grid_points < 2 {
            return Err(Error::param("grid_points", "need at least 2 points per axis"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::param("rel_tol", "must be > 0"));
        }
        if self.max_evals == 0 || self.starts == 0 {
            return Err(Error::param("max_evals", "evaluation budget and start count must be positive"));
        }
        Ok(())
    }

    fn log_bounds(&self) -> (f64, f64) {
        (self.lower.log10(), self.upper.log10())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Concurrence of the best point, as reported by [`steady_report`].
    pub best_value: f64,
    /// Unclipped Wootters value at the best point.
    pub best_raw: f64,
    /// `(g, cold coupling, hot coupling)`
    pub best_point: [f64; 3],
    pub record: SweepRecord,
    pub evaluations: usize,
    /// False when no point in the box reaches the detection threshold.
    pub entangled: bool,
    /// Best raw value after each simplex iteration, when requested.
    pub trace: Vec<f64>,
}

/// Unclipped concurrence of the steady state at the given couplings.
pub fn raw_concurrence_at(base: &ModelParams, couplings: [f64; 3]) -> Result<f64> {
    let params = base.with_couplings(couplings)?;
    let rho = solve_steady_direct(&params.liouvillian()?)?;
    Ok(concurrence(&DensityMatrix::unchecked(rho))?.raw)
}

struct Objective<'a> {
    base: &'a ModelParams,
    lo: f64,
    hi: f64,
}

impl Objective<'_> {
    fn clamp(&self, x: [f64; 3]) -> [f64; 3] {
        x.map(|v| v.clamp(self.lo, self.hi))
    }

    fn eval(&self, x: [f64; 3]) -> Result<f64> {
        raw_concurrence_at(self.base, self.clamp(x).map(|v| 10f64.powf(v)))
    }
}

/// `a` beats `b`: larger value, ties go to the lexicographically larger point.
fn better(a: (f64, [f64; 3]), b: (f64, [f64; 3])) -> bool {
    if (a.0 - b.0).abs() > TIE_TOL {
        return a.0 > b.0;
    }
    a.1.partial_cmp(&b.1) == Some(Ordering::Greater)
}

/// Best first: descending value, exact ties broken toward larger coordinates.
fn rank(a: &([f64; 3], f64), b: &([f64; 3], f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| {
        b.0.iter()
            .zip(&a.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

struct Simplex {
    vertices: Vec<([f64; 3], f64)>,
}

impl Simplex {
    fn sort(&mut self) {
        self.vertices.sort_by(rank);
    }

    /// Largest coordinate distance from the best vertex, in log10 units.
    fn diameter(&self) -> f64 {
        let best = self.vertices[0].0;
        self.vertices[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [0, 1, 2].map(|k| a[k] + t * (b[k] - a[k]))
}

/// Bounded Nelder-Mead (maximizing) in log10 coordinates; points are projected
/// onto the box.
fn nelder_mead(
    obj: &Objective<'_>,
    start: ([f64; 3], f64),
    step: f64,
    prob: &OptimizationProblem,
    evals: &mut usize,
    trace: &mut Vec<f64>,
) -> Result<([f64; 3], f64)> {
    let mut vertices = vec![start];
    for k in 0..3 {
        let mut x = start.0;
        // step into the box when sitting on the upper face
        x[k] += if x[k] + step > obj.hi { -step } else { step };
        let x = obj.clamp(x);
        vertices.push((x, obj.eval(x)?));
        *evals += 1;
    }
    let mut s = Simplex { vertices };
    // relative change r of a coupling is log10(1 + r) in these coordinates
    let tol = (1.0 + prob.rel_tol).log10();

    while *evals < prob.max_evals {
        s.sort();
        if prob.record_trace {
            trace.push(s.vertices[0].1);
        }
        if s.diameter() < tol {
            break;
        }
        let worst = s.vertices[3];
        let centroid = {
            let mut c = [0.0; 3];
            for (x, _) in &s.vertices[..3] {
                for k in 0..3 {
                    c[k] += x[k] / 3.0;
                }
            }
            c
        };
        let reflect = obj.clamp(lerp(centroid, worst.0, -1.0));
        let f_r = obj.eval(reflect)?;
        *evals += 1;
        if f_r > s.vertices[0].1 {
            let expand = obj.clamp(lerp(centroid, worst.0, -2.0));
            let f_e = obj.eval(expand)?;
            *evals += 1;
            s.vertices[3] = if f_e > f_r { (expand, f_e) } else { (reflect, f_r) };
            continue;
        }
        if f_r > s.vertices[2].1 {
            s.vertices[3] = (reflect, f_r);
            continue;
        }
        let (contract, f_c) = if f_r > worst.1 {
            let x = obj.clamp(lerp(centroid, reflect, 0.5));
            (x, obj.eval(x)?)
        } else {
            let x = obj.clamp(lerp(centroid, worst.0, 0.5));
            (x, obj.eval(x)?)
        };
        *evals += 1;
        if f_c > worst.1.max(if f_r > worst.1 { f_r } else { f64::NEG_INFINITY }) {
            s.vertices[3] = (contract, f_c);
            continue;
        }
        let best = s.vertices[0].0;
        for v in &mut s.vertices[1..] {
            let x = obj.clamp(lerp(best, v.0, 0.5));
            *v = (x, obj.eval(x)?);
            *evals += 1;
        }
    }
    s.sort();
    Ok(s.vertices[0])
}

/// Grid scan over the coupling box followed by simplex refinement from the
/// best grid points (and any seeds). The winning point is re-solved with the
/// rank-revealing steady-state solver for the reported record.
pub fn maximize_concurrence(prob: &OptimizationProblem) -> Result<OptimizationResult> {
    prob.validate()?;
    let (lo, hi) = prob.log_bounds();
    let obj = Objective {
        base: &prob.base,
        lo,
        hi,
    };
    let n = prob.grid_points;
    let spacing = (hi - lo) / (n - 1) as f64;
    let axis: Vec<f64> = (0..n).map(|i| lo + spacing * i as f64).collect();
    let mut grid = Vec::with_capacity(n * n * n);
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                grid.push([a, b, c]);
            }
        }
    }

    let values: Vec<f64> = grid.par_iter().map(|&x| obj.eval(x)).collect::<Result<_>>()?;
    let mut evals = grid.len();

    let mut ranked: Vec<([f64; 3], f64)> = grid.into_iter().zip(values).collect();
    ranked.sort_by(rank);
    let mut starts: Vec<([f64; 3], f64)> = ranked.iter().take(prob.starts).copied().collect();
    for seed in &prob.seeds {
        if seed.iter().all(|v| *v > 0.0 && v.is_finite()) {
            let x = obj.clamp(seed.map(f64::log10));
            starts.push((x, obj.eval(x)?));
            evals += 1;
        }
    }

    let mut trace = Vec::new();
    let mut best = starts[0];
    for &start in &starts {
        if evals >= prob.max_evals {
            break;
        }
        let found = nelder_mead(&obj, start, spacing / 2.0, prob, &mut evals, &mut trace)?;
        if better((found.1, found.0), (best.1, best.0)) {
            best = found;
        }
    }

    // The steady states depend (almost) only on coupling ratios, so optima
    // come as rays; report the member of the ray with the largest couplings.
    let lift = hi - best.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lift > 0.0 {
        let lifted = obj.clamp(best.0.map(|v| v + lift));
        let value = obj.eval(lifted)?;
        evals += 1;
        if value >= best.1 - RAY_TOL {
            best = (lifted, value);
        }
    }

    let best_point = obj.clamp(best.0).map(|v| 10f64.powf(v));
    let params = prob.base.with_couplings(best_point)?;
    let record = steady_report(&params)?;
    Ok(OptimizationResult {
        best_value: record.concurrence,
        best_raw: best.1,
        best_point,
        record,
        evaluations: evals,
        entangled: record.concurrence > DETECTION_THRESHOLD,
        trace,
    })
}

/// Settings shared by the temperature searches.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSearch {
    pub lower: f64,
    pub upper: f64,
    pub grid_points: usize,
    /// Largest hot temperature probed; stands in for `T_h = ∞`.
    pub t_h_cap: f64,
    /// Hot-temperature scan density (points per decade).
    pub scan_per_decade: usize,
    /// Absolute tolerance on the hot threshold (units of E).
    pub t_h_tol: f64,
    /// Absolute tolerance on the critical cold temperature (units of E).
    pub t_c_tol: f64,
    pub detection: f64,
}

impl Default for TemperatureSearch {
    fn default() -> Self {
        TemperatureSearch {
            lower: DEFAULT_LOWER,
            upper: DEFAULT_UPPER,
            grid_points: 8,
            t_h_cap: 1e6,
            scan_per_decade: 2,
            t_h_tol: 1e-3,
            t_c_tol: 5e-3,
            detection: DETECTION_THRESHOLD,
        }
    }
}

impl TemperatureSearch {
    fn problem(&self, base: ModelParams, seed: Option<[f64; 3]>) -> OptimizationProblem {
        let mut p = OptimizationProblem::new(base).with_bounds(self.lower, self.upper);
        p.grid_points = self.grid_points;
        p.seeds.extend(seed);
        p
    }

    /// Log-spaced hot temperatures strictly above `t_c`, ending at the cap.
    fn hot_scan(&self, t_c: f64) -> Vec<f64> {
        let start = (t_c * 1.05).max(0.02);
        if start >= self.t_h_cap {
            return vec![self.t_h_cap];
        }
        let decades = (self.t_h_cap / start).log10();
        let n = ((decades * self.scan_per_decade as f64).ceil() as usize).max(1);
        (0..=n).map(|i| start * 10f64.powf(decades * i as f64 / n as f64)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Found(f64),
    Unreachable,
}

impl Threshold {
    pub fn value(self) -> Option<f64> {
        match self {
            Threshold::Found(t) => Some(t),
            Threshold::Unreachable => None,
        }
    }
}

fn at_temperatures(base: &ModelParams, t_c: f64, t_h: f64) -> Result<ModelParams> {
    base.with_temperatures(Temperature::new(t_c)?, Temperature::new(t_h)?)
}

fn validate_cold(base: &ModelParams) -> Result<f64> {
    match base.temperatures().0 {
        Temperature::Finite(t) => Ok(t),
        Temperature::Infinite => Err(Error::param("t_c", "must be finite for temperature searches")),
    }
}

/// Smallest hot temperature at which the optimized concurrence exceeds the
/// detection threshold, for the cold temperature fixed in `base`.
///
/// Scans log-spaced `T_h` upward to the first entangled point, then bisects
/// the bracket below it.
pub fn threshold_hot_temperature(base: &ModelParams, search: &TemperatureSearch) -> Result<Threshold> {
    let t_c = validate_cold(base)?;
    let mut seed = None;
    let mut below = t_c;
    let mut above = None;
    for t_h in search.hot_scan(t_c) {
        let res = maximize_concurrence(&search.problem(at_temperatures(base, t_c, t_h)?, seed))?;
        seed = Some(res.best_point);
        if res.best_value > search.detection {
            above = Some(t_h);
            break;
        }
        below = t_h;
    }
    let Some(mut above) = above else {
        return Ok(Threshold::Unreachable);
    };
    while above - below > search.t_h_tol {
        let mid = 0.5 * (below + above);
        let res = maximize_concurrence(&search.problem(at_temperatures(base, t_c, mid)?, seed))?;
        if res.best_value > search.detection {
            above = mid;
            seed = Some(res.best_point);
        } else {
            below = mid;
        }
    }
    Ok(Threshold::Found(above))
}

/// Best concurrence over couplings and hot temperature at fixed `T_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct HotOptimum {
    pub t_h: f64,
    pub result: OptimizationResult,
}

/// Maximizes over the couplings at each point of a log-spaced `T_h` scan, then
/// refines the best bracket by golden-section search in `log T_h`.
pub fn maximize_over_hot_temperature(base: &ModelParams, search: &TemperatureSearch) -> Result<HotOptimum> {
    maximize_over_hot_seeded(base, search, None)
}

fn maximize_over_hot_seeded(
    base: &ModelParams,
    search: &TemperatureSearch,
    seed: Option<[f64; 3]>,
) -> Result<HotOptimum> {
    let t_c = validate_cold(base)?;
    let scan = search.hot_scan(t_c);
    let mut seed = seed;
    let mut results = Vec::with_capacity(scan.len());
    for &t_h in &scan {
        let res = maximize_concurrence(&search.problem(at_temperatures(base, t_c, t_h)?, seed))?;
        seed = Some(res.best_point);
        results.push(res);
    }
    let (mut best_idx, mut best_raw) = (0, f64::NEG_INFINITY);
    for (i, r) in results.iter().enumerate() {
        if r.best_raw > best_raw + TIE_TOL {
            best_idx = i;
            best_raw = r.best_raw;
        }
    }
    let mut best = HotOptimum {
        t_h: scan[best_idx],
        result: results[best_idx].clone(),
    };
    if scan.len() < 3 {
        return Ok(best);
    }

    // golden-section refinement on log10 T_h within the neighbouring scan points
    let mut a = scan[best_idx.saturating_sub(1)].log10();
    let mut b = scan[(best_idx + 1).min(scan.len() - 1)].log10();
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let eval = |x: f64, seed: [f64; 3]| -> Result<OptimizationResult> {
        maximize_concurrence(&search.problem(at_temperatures(base, t_c, 10f64.powf(x))?, Some(seed)))
    };
    let seed0 = best.result.best_point;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut r1 = eval(x1, seed0)?;
    let mut r2 = eval(x2, seed0)?;
    while b - a > 1e-3 {
        if r1.best_raw >= r2.best_raw {
            b = x2;
            x2 = x1;
            r2 = r1;
            x1 = b - ratio * (b - a);
            r1 = eval(x1, r2.best_point)?;
        } else {
            a = x1;
            x1 = x2;
            r1 = r2;
            x2 = a + ratio * (b - a);
            r2 = eval(x2, r1.best_point)?;
        }
    }
    for (x, r) in [(x1, r1), (x2, r2)] {
        if r.best_raw > best.result.best_raw + TIE_TOL {
            best = HotOptimum {
                t_h: 10f64.powf(x),
                result: r,
            };
        }
    }
    Ok(best)
}

/// Supremum of cold temperatures at which some coupling choice and hot
/// temperature still yield entanglement, by bisection on `T_c`.
pub fn critical_cold_temperature(base: &ModelParams, search: &TemperatureSearch) -> Result<f64> {
    let mut seed = None;
    let probe = |t_c: f64, seed: &mut Option<[f64; 3]>| -> Result<bool> {
        let params = base.with_temperatures(Temperature::new(t_c)?, base.temperatures().1)?;
        let opt = maximize_over_hot_seeded(&params, search, *seed)?;
        let entangled = opt.result.best_value > search.detection;
        if entangled {
            *seed = Some(opt.result.best_point);
        }
        Ok(entangled)
    };
    if !probe(0.0, &mut seed)? {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 0.25;
    while probe(hi, &mut seed)? {
        lo = hi;
        hi *= 2.0;
        if hi > search.t_h_cap {
            return Err(Error::NoConvergence {
                reason: "entanglement persists up to the hot-temperature cap".into(),
                residual: f64::NAN,
            });
        }
    }
    while hi - lo > search.t_c_tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut seed)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
