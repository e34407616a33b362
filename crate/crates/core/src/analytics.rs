//! Entanglement, purity and heat currents of two-qubit states.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::models::{build_h0, Bath, Liouvillian, ModelParams, ResetParams};
use crate::state::{partial_trace, DensityMatrix, Subsystem};
use crate::steady::{solve_steady_with, SteadyOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConcurrenceMethod {
    GeneralWootters,
    XState,
    ClosedForm,
}

impl fmt::Display for ConcurrenceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConcurrenceMethod::GeneralWootters => "general-wootters",
            ConcurrenceMethod::XState => "x-state",
            ConcurrenceMethod::ClosedForm => "closed-form",
        })
    }
}

/// Intermediate quantities of the reset-model closed form: the coherence
/// magnitude `f` and the `|00⟩`, `|11⟩` populations `h(r_c, r_h)`,
/// `h(1−r_c, 1−r_h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormTerms {
    pub f: f64,
    pub h: f64,
    pub h_flipped: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceBreakdown {
    /// `max(0, raw)`, in `[0, 1]`.
    pub value: f64,
    /// Unclipped value; negative when the state is separable.
    pub raw: f64,
    pub method: ConcurrenceMethod,
    pub terms: Option<ClosedFormTerms>,
}

impl ConcurrenceBreakdown {
    fn from_raw(raw: f64, method: ConcurrenceMethod, terms: Option<ClosedFormTerms>) -> Self {
        ConcurrenceBreakdown {
            value: raw.clamp(0.0, 1.0),
            raw,
            method,
            terms,
        }
    }
}

fn spin_flip() -> ComplexMatrix {
    linalg::kron(&linalg::sigma_y(), &linalg::sigma_y())
}

/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`
pub fn spin_flipped(rho: &DensityMatrix) -> ComplexMatrix {
    let yy = spin_flip();
    &yy * rho.matrix().conjugate() * &yy
}

/// The four Wootters values λᵢ (square roots of the eigenvalues of `ρρ̃`),
/// descending.
///
/// With `ρ = ΨΨ†` they are the singular values of `Ψᵀ(σ_y⊗σ_y)Ψ`; a pivoted
/// Cholesky factor keeps tiny populations accurate, where square roots of
/// eigenvalues near zero would be off by `√ε`.
pub fn wootters_lambdas(rho: &DensityMatrix) -> Result<[f64; 4]> {
    let psi = linalg::psd_factor(rho.matrix());
    let sv = linalg::singular_values(&(psi.transpose() * spin_flip() * &psi))?;
    Ok([sv[0], sv[1], sv[2], sv[3]])
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceBreakdown> {
    let l = wootters_lambdas(rho)?;
    Ok(ConcurrenceBreakdown::from_raw(
        l[0] - l[1] - l[2] - l[3],
        ConcurrenceMethod::GeneralWootters,
        None,
    ))
}

/// True when every entry off the diagonal and anti-diagonal is below `tol`.
pub fn is_x_state(rho: &DensityMatrix, tol: f64) -> bool {
    let m = rho.matrix();
    (0..4).all(|i| (0..4).all(|j| i == j || i + j == 3 || m[(i, j)].norm() <= tol))
}

/// Concurrence of an X state,
/// `2·max{0, |ρ₂₃| − √(ρ₁₁ρ₄₄), |ρ₁₄| − √(ρ₂₂ρ₃₃)}` (1-indexed). Fails for
/// states outside the X pattern.
pub fn concurrence_x_state(rho: &DensityMatrix, tol: f64) -> Result<ConcurrenceBreakdown> {
    if !is_x_state(rho, tol) {
        return Err(Error::InvalidState("not an X state".into()));
    }
    let m = rho.matrix();
    let p = |i: usize| m[(i, i)].re.max(0.0);
    let a = m[(1, 2)].norm() - (p(0) * p(3)).sqrt();
    let b = m[(0, 3)].norm() - (p(1) * p(2)).sqrt();
    Ok(ConcurrenceBreakdown::from_raw(2.0 * a.max(b), ConcurrenceMethod::XState, None))
}

/// Concurrence of the reset-model steady state straight from the
/// parameters, `C = 2·max{0, f − √(h(r_c, r_h) h(1−r_c, 1−r_h))}` with
/// `f = γ g p_c p_h |r_c − r_h| / (p_c + p_h)` and
/// `h(a, b) = γ(p_c p_h a b + 2g² ((p_c a + p_h b)/(p_c + p_h))²)`.
pub fn concurrence_closed_form(p: &ResetParams) -> Result<ConcurrenceBreakdown> {
    p.validate()?;
    let (rc, rh) = (p.cold_qubit().r, p.hot_qubit().r);
    let (g, pc, ph) = (p.g, p.p_c, p.p_h);
    let gamma = 1.0 / (2.0 * g * g + pc * ph);
    let sum = pc + ph;
    let f = gamma * g * pc * ph / sum * (rc - rh).abs();
    let h = |a: f64, b: f64| {
        let mix = (pc * a + ph * b) / sum;
        gamma * (pc * ph * a * b + 2.0 * g * g * mix * mix)
    };
    let terms = ClosedFormTerms {
        f,
        h: h(rc, rh),
        h_flipped: h(1.0 - rc, 1.0 - rh),
    };
    let raw = 2.0 * (f - (terms.h * terms.h_flipped).sqrt());
    Ok(ConcurrenceBreakdown::from_raw(raw, ConcurrenceMethod::ClosedForm, Some(terms)))
}

/// `Tr ρ²`
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    // Tr(ρ²) = Σ|ρ_ij|² for Hermitian ρ
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Energy per unit time flowing from the qubit attached to `bath` into that
/// bath, `−Tr(Ĥ₀ D_k(ρ))`, where `D_k` is the bath's dissipator.
pub fn dissipator_heat_current(rho: &DensityMatrix, l: &Liouvillian, energy: f64, bath: Bath) -> Result<f64> {
    let h0 = build_h0(energy)?;
    let d = l.apply_dissipator(bath, rho.matrix());
    Ok(-(h0 * d).trace().re)
}

/// Reset-model heat current `Q_k = p_k E ⟨1|(ρ_k − τ_k)|1⟩`.
pub fn reset_heat_current(rho: &DensityMatrix, p: &ResetParams, bath: Bath) -> f64 {
    let (reduced, tau, rate) = match bath {
        Bath::Cold => (partial_trace(rho, Subsystem::Second), p.cold_qubit(), p.p_c),
        Bath::Hot => (partial_trace(rho, Subsystem::First), p.hot_qubit(), p.p_h),
    };
    rate * p.energy * (reduced[(1, 1)].re - tau.excited_population())
}

/// Heat current into `bath`; the reset model uses its own definition, the
/// Lindblad models go through their bath dissipators.
pub fn heat_current(rho: &DensityMatrix, params: &ModelParams, l: &Liouvillian, bath: Bath) -> Result<f64> {
    match params {
        ModelParams::Reset(p) => Ok(reset_heat_current(rho, p, bath)),
        _ => dissipator_heat_current(rho, l, params.energy(), bath),
    }
}

/// Steady-state quantities for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub params: ModelParams,
    pub concurrence: f64,
    pub purity: f64,
    pub q_c: f64,
    pub q_h: f64,
    pub residual: f64,
    pub uniqueness_gap: f64,
}

/// Solves for the steady state of `params` and collects concurrence, purity,
/// both heat currents and the solver diagnostics.
pub fn steady_report(params: &ModelParams) -> Result<SweepRecord> {
    steady_report_with(params, &SteadyOptions::default()).map(|(record, _)| record)
}

/// Like [`steady_report`], also returning the state itself.
pub fn steady_report_with(params: &ModelParams, opts: &SteadyOptions) -> Result<(SweepRecord, DensityMatrix)> {
    let l = params.liouvillian()?;
    let res = solve_steady_with(&l, opts)?;
    let rho = res.state;
    let record = SweepRecord {
        params: *params,
        concurrence: concurrence(&rho)?.value,
        purity: purity(&rho),
        q_c: heat_current(&rho, params, &l, Bath::Cold)?,
        q_h: heat_current(&rho, params, &l, Bath::Hot)?,
        residual: res.residual,
        uniqueness_gap: res.uniqueness_gap,
    };
    Ok((record, rho))
}
