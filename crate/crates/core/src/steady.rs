//! Steady states: numerical null-space solve, the closed form of the reset
//! model, and fixed-step time evolution.

use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector, I, ONE};
use crate::models::{Liouvillian, ResetParams};
use crate::state::{DensityMatrix, StateTolerance};

/// Thresholds for [`solve_steady_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    /// Largest accepted `‖L vec ρ‖`.
    pub residual_tol: f64,
    /// Second-smallest singular value of `L` below which the fixed point is
    /// considered degenerate.
    pub uniqueness_tol: f64,
    /// Allowed magnitude of negative eigenvalues of the solution.
    pub psd_tol: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            residual_tol: 1e-10,
            uniqueness_tol: 1e-8,
            psd_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateResult {
    pub state: DensityMatrix,
    /// `‖L vec ρ‖₂`
    pub residual: f64,
    /// Second-smallest singular value of the generator.
    pub uniqueness_gap: f64,
    /// Singular values of the generator, ascending.
    pub singular_values: Vec<f64>,
}

/// Row vector `t` with `t · vec(ρ) = Tr ρ`.
fn trace_row(n: usize) -> ComplexVector {
    let mut t = ComplexVector::zeros(n * n);
    for i in 0..n {
        t[i * n + i] = ONE;
    }
    t
}

const REFINEMENT_STEPS: usize = 4;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// `Σ xᵢyᵢ` with roughly twice the working precision.
fn dot2(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut sum, mut err) = (0.0, 0.0);
    for (x, y) in terms {
        let p = x * y;
        let e = x.mul_add(y, -p);
        let (s, q) = two_sum(sum, p);
        sum = s;
        err += q + e;
    }
    sum + err
}

/// `b − A v`, each entry accumulated in compensated arithmetic.
fn compensated_residual(a: &ComplexMatrix, v: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    ComplexVector::from_fn(a.nrows(), |i, _| {
        let row = a.row(i);
        let re = dot2(
            row.iter()
                .zip(v.iter())
                .flat_map(|(x, y)| [(x.re, y.re), (-x.im, y.im)])
                .chain([(-1.0, b[i].re)]),
        );
        let im = dot2(
            row.iter()
                .zip(v.iter())
                .flat_map(|(x, y)| [(x.re, y.im), (x.im, y.re)])
                .chain([(-1.0, b[i].im)]),
        );
        c(-re, -im)
    })
}

pub fn solve_steady(l: &Liouvillian) -> Result<SteadyStateResult> {
    solve_steady_with(l, &SteadyOptions::default())
}

/// Solves `[L; Tr] v = [0; 1]` in the least-squares sense through an SVD of
/// the stacked system, then checks the residual and the singular-value gap of
/// `L` itself.
pub fn solve_steady_with(l: &Liouvillian, opts: &SteadyOptions) -> Result<SteadyStateResult> {
    let gen = l.generator();
    let n2 = gen.nrows();
    if !linalg::is_finite(gen) {
        return Err(Error::NoConvergence {
            reason: "generator has non-finite entries".into(),
            residual: f64::NAN,
        });
    }

    let mut singular_values = linalg::singular_values(gen)?;
    singular_values.reverse();
    let uniqueness_gap = singular_values[1];
    if uniqueness_gap < opts.uniqueness_tol {
        return Err(Error::NonUniqueSteadyState {
            gap: uniqueness_gap,
            threshold: opts.uniqueness_tol,
        });
    }

    let mut stacked = ComplexMatrix::zeros(n2 + 1, n2);
    stacked.view_mut((0, 0), (n2, n2)).copy_from(gen);
    stacked.row_mut(n2).copy_from(&trace_row(4).transpose());
    let mut rhs = ComplexVector::zeros(n2 + 1);
    rhs[n2] = ONE;

    // Rows are scaled by powers of two (exact) to unit size, which leaves the
    // solution unchanged but stops fast rates from swamping slow ones.
    let scales: Vec<f64> = (0..=n2)
        .map(|i| {
            let m = stacked.row(i).camax();
            if m > 0.0 { (-m.log2().round()).exp2() } else { 1.0 }
        })
        .collect();
    let mut scaled = stacked.clone();
    for (i, s) in scales.iter().enumerate() {
        scaled.row_mut(i).scale_mut(*s);
    }

    let svd = linalg::svd(&scaled)?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let sigma_max = svd.singular_values.max();
    let cutoff = sigma_max * f64::EPSILON * (n2 as f64 + 1.0);
    let apply_pinv = |r: &ComplexVector| -> ComplexVector {
        let projected = u.adjoint() * r;
        let mut coeffs = ComplexVector::zeros(n2);
        for k in 0..svd.singular_values.len() {
            let s = svd.singular_values[k];
            if s > cutoff {
                coeffs[k] = projected[k] / c(s, 0.0);
            }
        }
        v_t.adjoint() * coeffs
    };
    let scale_rows = |mut r: ComplexVector| {
        for (i, s) in scales.iter().enumerate() {
            r[i] *= *s;
        }
        r
    };

    let mut v = apply_pinv(&scale_rows(rhs.clone()));
    // refinement against a compensated residual; converges to working
    // accuracy while cond · ε < 1
    for _ in 0..REFINEMENT_STEPS {
        let r = compensated_residual(&stacked, &v, &rhs);
        let delta = apply_pinv(&scale_rows(r));
        let size = delta.camax();
        v += delta;
        if size <= f64::EPSILON * v.camax() {
            break;
        }
    }

    let raw = linalg::devectorize(&v)?;
    let rho = linalg::hermitian_part(&raw);
    let residual = linalg::vector_norm(&(gen * linalg::vectorize(&rho)?));
    if !residual.is_finite() || residual > opts.residual_tol {
        return Err(Error::NoConvergence {
            reason: "least-squares solution does not annihilate the generator".into(),
            residual,
        });
    }
    let tol = StateTolerance {
        hermitian: 1e-10,
        trace: 1e-10,
        psd: opts.psd_tol,
    };
    let state = DensityMatrix::with_tolerance(rho, tol).map_err(|e| Error::NoConvergence {
        reason: format!("solution is not a valid state: {e}"),
        residual,
    })?;
    Ok(SteadyStateResult {
        state,
        residual,
        uniqueness_gap,
        singular_values,
    })
}

/// Square-system variant for inner optimization loops: the `ρ₀₀` row of `L`
/// (redundant, since `L` conserves trace) is replaced by the trace row and the
/// result is solved by LU. No uniqueness diagnostics; callers that report a
/// point re-solve it with [`solve_steady`].
pub fn solve_steady_direct(l: &Liouvillian) -> Result<ComplexMatrix> {
    let gen = l.generator();
    let n2 = gen.nrows();
    let mut a = gen.clone();
    a.row_mut(0).copy_from(&trace_row(4).transpose());
    let mut rhs = ComplexVector::zeros(n2);
    rhs[0] = ONE;
    let v = a.lu().solve(&rhs).ok_or_else(|| Error::NoConvergence {
        reason: "bordered generator is singular".into(),
        residual: f64::NAN,
    })?;
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence {
            reason: "non-finite solution".into(),
            residual: f64::NAN,
        });
    }
    Ok(linalg::hermitian_part(&linalg::devectorize(&v)?))
}

/// `𝒴 = i|01⟩⟨10| − i|10⟩⟨01|`
pub fn y_operator() -> ComplexMatrix {
    let mut y = linalg::zeros(4);
    y[(1, 2)] = I;
    y[(2, 1)] = -I;
    y
}

/// Closed-form steady state of the reset model,
/// `γ[p_c p_h τ_c⊗τ_h + 2g²/(p_c+p_h)² (p_cτ_c + p_hτ_h)^⊗2 + g p_c p_h (r_c − r_h)/(p_c+p_h) 𝒴]`
/// with `γ = 1/(2g² + p_c p_h)`.
pub fn analytic_reset_steady(p: &ResetParams) -> Result<DensityMatrix> {
    p.validate()?;
    let (cold, hot) = (p.cold_qubit(), p.hot_qubit());
    let (tau_c, tau_h) = (cold.state(), hot.state());
    let (g, pc, ph) = (p.g, p.p_c, p.p_h);
    let gamma = 1.0 / (2.0 * g * g + pc * ph);
    let sum = pc + ph;
    let mix = (tau_c.scale(pc) + tau_h.scale(ph)).unscale(sum);

    let rho = linalg::kron(&tau_c, &tau_h).scale(pc * ph)
        + linalg::kron(&mix, &mix).scale(2.0 * g * g)
        + y_operator().scale(g * pc * ph * (cold.r - hot.r) / sum);
    DensityMatrix::new(rho.scale(gamma))
}

/// Options for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Keep every n-th state (the initial and final states are always kept).
    pub record_every: usize,
    /// Largest tolerated trace or Hermiticity drift.
    pub drift_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            record_every: 1,
            drift_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Largest trace deviation seen at any step.
    pub max_trace_drift: f64,
    /// Largest `‖ρ − ρ†‖_max` seen at any step.
    pub max_hermiticity_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory always holds the initial state")
    }
}

pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, t_final: f64, dt: f64) -> Result<Trajectory> {
    evolve_with(rho0, l, t_final, dt, &EvolveOptions::default())
}

/// Classical fourth-order Runge-Kutta on `∂v/∂t = L v` with a uniform step no
/// larger than `dt`. States are never renormalized; the run fails as soon as
/// trace or Hermiticity drift exceeds the tolerance.
pub fn evolve_with(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::param("t_final", format!("must be ≥ 0, got {t_final}")));
    }
    let record_every = opts.record_every.max(1);
    let steps = (t_final / dt - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let gen = l.generator();
    let snapshot_tol = StateTolerance {
        hermitian: opts.drift_tol,
        trace: opts.drift_tol,
        psd: opts.drift_tol,
    };

    let mut v = linalg::vectorize(rho0.matrix())?;
    let mut out = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
        max_trace_drift: 0.0,
        max_hermiticity_drift: 0.0,
    };
    let half = c(0.5 * h, 0.0);
    let full = c(h, 0.0);
    let sixth = c(h / 6.0, 0.0);
    for step in 1..=steps {
        let k1 = gen * &v;
        let k2 = gen * (&v + &k1 * half);
        let k3 = gen * (&v + &k2 * half);
        let k4 = gen * (&v + &k3 * full);
        v += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * sixth;

        let time = step as f64 * h;
        let m = linalg::devectorize(&v)?;
        let trace_drift = (m.trace() - ONE).norm();
        let herm_drift = linalg::hermitian_deviation(&m);
        let blown_up = m.iter().any(|z| !(z.norm() <= 1.0 + opts.drift_tol));
        out.max_trace_drift = out.max_trace_drift.max(trace_drift);
        out.max_hermiticity_drift = out.max_hermiticity_drift.max(herm_drift);
        let drift = trace_drift.max(herm_drift);
        if drift > opts.drift_tol || blown_up {
            return Err(Error::StepSizeTooLarge {
                time,
                drift: if blown_up { f64::INFINITY } else { drift },
                tolerance: opts.drift_tol,
            });
        }
        if step % record_every == 0 || step == steps {
            let state = DensityMatrix::with_tolerance(m, snapshot_tol).map_err(|_| Error::StepSizeTooLarge {
                time,
                drift,
                tolerance: opts.drift_tol,
            })?;
            out.times.push(time);
            out.states.push(state);
        }
    }
    Ok(out)
}
