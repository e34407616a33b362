//! Hamiltonians, jump operators and Liouvillian generators for the three
//! dissipation models: reset (collision), flux qubits with bosonic baths, and
//! a double quantum dot with fermionic leads.
//!
//! Every generator acts on column-stacked 4×4 density matrices and keeps the
//! dissipative part of each bath separately, so heat currents can be read off
//! a single bath.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, I};
use crate::state::{partial_trace_matrix, thermal_qubit, Subsystem, Temperature, ThermalQubit};

/// Upper limit on couplings and rates (in units of E) inside which the master
/// equations are trusted.
pub const PERTURBATIVE_LIMIT: f64 = 1e-2;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Reset,
    Flux,
    Dot,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Reset => "reset",
            ModelKind::Flux => "flux",
            ModelKind::Dot => "dot",
        }
    }

    /// Names of the two bath couplings for this model.
    pub fn coupling_names(self) -> [&'static str; 2] {
        match self {
            ModelKind::Reset => ["p_c", "p_h"],
            ModelKind::Flux | ModelKind::Dot => ["gamma_c", "gamma_h"],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reset" => Ok(ModelKind::Reset),
            "flux" => Ok(ModelKind::Flux),
            "dot" => Ok(ModelKind::Dot),
            other => Err(Error::param("model", format!("unknown model `{other}` (reset, flux, dot)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bath {
    Cold,
    Hot,
}

impl Bath {
    fn index(self) -> usize {
        match self {
            Bath::Cold => 0,
            Bath::Hot => 1,
        }
    }
}

impl FromStr for Bath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cold" | "c" => Ok(Bath::Cold),
            "hot" | "h" => Ok(Bath::Hot),
            other => Err(Error::param("bath", format!("unknown bath `{other}`"))),
        }
    }
}

fn check_energy(energy: f64) -> Result<()> {
    if energy > 0.0 && energy.is_finite() {
        Ok(())
    } else {
        Err(Error::param("energy", format!("must be > 0, got {energy}")))
    }
}

fn check_nonnegative(name: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be ≥ 0, got {x}")))
    }
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be > 0, got {x}")))
    }
}

/// Parameters of the reset (collision) model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetParams {
    pub energy: f64,
    pub g: f64,
    pub p_c: f64,
    pub p_h: f64,
    pub t_c: Temperature,
    pub t_h: Temperature,
}

impl ResetParams {
    pub fn new(energy: f64, g: f64, p_c: f64, p_h: f64, t_c: Temperature, t_h: Temperature) -> Result<Self> {
        let p = ResetParams {
            energy,
            g,
            p_c,
            p_h,
            t_c,
            t_h,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_energy(self.energy)?;
        check_nonnegative("g", self.g)?;
        check_positive("p_c", self.p_c)?;
        check_positive("p_h", self.p_h)?;
        Ok(())
    }

    pub fn is_perturbative(&self) -> bool {
        let cap = PERTURBATIVE_LIMIT * self.energy;
        self.g <= cap && self.p_c <= cap && self.p_h <= cap
    }

    pub fn cold_qubit(&self) -> ThermalQubit {
        thermal_qubit(self.energy, self.t_c).expect("validated parameters")
    }

    pub fn hot_qubit(&self) -> ThermalQubit {
        thermal_qubit(self.energy, self.t_h).expect("validated parameters")
    }
}

/// Parameters of the flux-qubit model (bosonic baths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxParams {
    pub energy: f64,
    pub g: f64,
    pub gamma_c: f64,
    pub gamma_h: f64,
    pub t_c: Temperature,
    pub t_h: Temperature,
}

impl FluxParams {
    pub fn new(
        energy: f64,
        g: f64,
        gamma_c: f64,
        gamma_h: f64,
        t_c: Temperature,
        t_h: Temperature,
    ) -> Result<Self> {
        let p = FluxParams {
            energy,
            g,
            gamma_c,
            gamma_h,
            t_c,
            t_h,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_energy(self.energy)?;
        check_nonnegative("g", self.g)?;
        check_positive("gamma_c", self.gamma_c)?;
        check_positive("gamma_h", self.gamma_h)?;
        for (name, t) in [("t_c", self.t_c), ("t_h", self.t_h)] {
            if t.is_infinite() {
                return Err(Error::param(
                    name,
                    "the Bose-Einstein occupation diverges at infinite temperature; use a large finite value",
                ));
            }
        }
        Ok(())
    }

    pub fn is_weak_coupling(&self) -> bool {
        let cap = PERTURBATIVE_LIMIT * self.energy;
        self.g <= cap && self.gamma_c <= cap && self.gamma_h <= cap
    }
}

/// Transition energy used for the rates of jumps that fill the second dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DotRateEnergy {
    /// Adding an electron next to an occupied dot costs `E + U`.
    #[default]
    Coulomb,
    /// Every transition is evaluated at the bare gap `E`, which leaves the
    /// steady state independent of `U`.
    Gap,
}

/// Parameters of the double-quantum-dot model (fermionic leads).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotParams {
    pub energy: f64,
    pub g: f64,
    pub gamma_c: f64,
    pub gamma_h: f64,
    pub t_c: Temperature,
    pub t_h: Temperature,
    /// Inter-dot Coulomb energy.
    pub u: f64,
    pub rate_energy: DotRateEnergy,
}

impl DotParams {
    pub fn new(
        energy: f64,
        g: f64,
        gamma_c: f64,
        gamma_h: f64,
        t_c: Temperature,
        t_h: Temperature,
        u: f64,
    ) -> Result<Self> {
        let p = DotParams {
            energy,
            g,
            gamma_c,
            gamma_h,
            t_c,
            t_h,
            u,
            rate_energy: DotRateEnergy::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_energy(self.energy)?;
        check_nonnegative("g", self.g)?;
        check_positive("gamma_c", self.gamma_c)?;
        check_positive("gamma_h", self.gamma_h)?;
        check_nonnegative("u", self.u)?;
        Ok(())
    }

    pub fn is_weak_coupling(&self) -> bool {
        let cap = PERTURBATIVE_LIMIT * self.energy;
        self.g <= cap && self.gamma_c <= cap && self.gamma_h <= cap
    }

    /// Energy of the transitions into `|11⟩`.
    pub fn charging_energy(&self) -> f64 {
        match self.rate_energy {
            DotRateEnergy::Coulomb => self.energy + self.u,
            DotRateEnergy::Gap => self.energy,
        }
    }
}

/// Parameters of any of the three models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelParams {
    Reset(ResetParams),
    Flux(FluxParams),
    Dot(DotParams),
}

impl From<ResetParams> for ModelParams {
    fn from(p: ResetParams) -> Self {
        ModelParams::Reset(p)
    }
}

impl From<FluxParams> for ModelParams {
    fn from(p: FluxParams) -> Self {
        ModelParams::Flux(p)
    }
}

impl From<DotParams> for ModelParams {
    fn from(p: DotParams) -> Self {
        ModelParams::Dot(p)
    }
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Reset(_) => ModelKind::Reset,
            ModelParams::Flux(_) => ModelKind::Flux,
            ModelParams::Dot(_) => ModelKind::Dot,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Reset(p) => p.validate(),
            ModelParams::Flux(p) => p.validate(),
            ModelParams::Dot(p) => p.validate(),
        }
    }

    pub fn energy(&self) -> f64 {
        match self {
            ModelParams::Reset(p) => p.energy,
            ModelParams::Flux(p) => p.energy,
            ModelParams::Dot(p) => p.energy,
        }
    }

    /// `(g, cold coupling, hot coupling)`: `(g, p_c, p_h)` for the reset
    /// model, `(g, Γ_c, Γ_h)` otherwise.
    pub fn couplings(&self) -> [f64; 3] {
        match self {
            ModelParams::Reset(p) => [p.g, p.p_c, p.p_h],
            ModelParams::Flux(p) => [p.g, p.gamma_c, p.gamma_h],
            ModelParams::Dot(p) => [p.g, p.gamma_c, p.gamma_h],
        }
    }

    pub fn with_couplings(&self, [g, c, h]: [f64; 3]) -> Result<Self> {
        let mut out = *self;
        match &mut out {
            ModelParams::Reset(p) => (p.g, p.p_c, p.p_h) = (g, c, h),
            ModelParams::Flux(p) => (p.g, p.gamma_c, p.gamma_h) = (g, c, h),
            ModelParams::Dot(p) => (p.g, p.gamma_c, p.gamma_h) = (g, c, h),
        }
        out.validate()?;
        Ok(out)
    }

    pub fn temperatures(&self) -> (Temperature, Temperature) {
        match self {
            ModelParams::Reset(p) => (p.t_c, p.t_h),
            ModelParams::Flux(p) => (p.t_c, p.t_h),
            ModelParams::Dot(p) => (p.t_c, p.t_h),
        }
    }

    pub fn with_temperatures(&self, t_c: Temperature, t_h: Temperature) -> Result<Self> {
        let mut out = *self;
        match &mut out {
            ModelParams::Reset(p) => (p.t_c, p.t_h) = (t_c, t_h),
            ModelParams::Flux(p) => (p.t_c, p.t_h) = (t_c, t_h),
            ModelParams::Dot(p) => (p.t_c, p.t_h) = (t_c, t_h),
        }
        out.validate()?;
        Ok(out)
    }

    /// Coulomb energy for the dot model, `None` otherwise.
    pub fn coulomb(&self) -> Option<f64> {
        match self {
            ModelParams::Dot(p) => Some(p.u),
            _ => None,
        }
    }

    /// Whether every coupling sits inside the perturbative window.
    pub fn is_perturbative(&self) -> bool {
        match self {
            ModelParams::Reset(p) => p.is_perturbative(),
            ModelParams::Flux(p) => p.is_weak_coupling(),
            ModelParams::Dot(p) => p.is_weak_coupling(),
        }
    }

    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        match self {
            ModelParams::Reset(p) => Ok(build_h0(p.energy)? + build_hint(p.g)),
            ModelParams::Flux(p) => Ok(build_h0(p.energy)? + build_hint(p.g)),
            ModelParams::Dot(p) => build_hdot(p.energy, p.g, p.u),
        }
    }

    /// Canonical generator for this model.
    pub fn liouvillian(&self) -> Result<Liouvillian> {
        match self {
            ModelParams::Reset(p) => reset_liouvillian(p),
            ModelParams::Flux(p) => flux_liouvillian(p),
            ModelParams::Dot(p) => dot_liouvillian(p),
        }
    }
}

/// A jump operator with its rate, the bath that drives it and the energy it
/// exchanges with that bath.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpTerm {
    pub operator: ComplexMatrix,
    pub rate: f64,
    pub bath: Bath,
    pub transition_energy: f64,
}

impl JumpTerm {
    pub fn new(operator: ComplexMatrix, rate: f64, bath: Bath, transition_energy: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::param("rate", format!("must be ≥ 0, got {rate}")));
        }
        if operator.shape() != (4, 4) {
            return Err(Error::DimensionMismatch {
                expected: "4×4 jump operator".into(),
                actual: format!("{}×{}", operator.nrows(), operator.ncols()),
            });
        }
        Ok(JumpTerm {
            operator,
            rate,
            bath,
            transition_energy,
        })
    }
}

/// Which builder produced a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelTag {
    Reset,
    Flux,
    FluxTwoOperator,
    Dot,
    Custom,
}

/// 16×16 generator `L` of `∂vec(ρ)/∂t = L vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    generator: ComplexMatrix,
    tag: ModelTag,
    bath_split: [ComplexMatrix; 2],
}

impl Liouvillian {
    /// Assembles a generator from its coherent part and the two bath
    /// dissipators.
    pub fn from_parts(coherent: ComplexMatrix, cold: ComplexMatrix, hot: ComplexMatrix, tag: ModelTag) -> Result<Self> {
        for m in [&coherent, &cold, &hot] {
            if m.shape() != (16, 16) {
                return Err(Error::DimensionMismatch {
                    expected: "16×16 superoperator".into(),
                    actual: format!("{}×{}", m.nrows(), m.ncols()),
                });
            }
        }
        Ok(Liouvillian {
            generator: coherent + &cold + &hot,
            tag,
            bath_split: [cold, hot],
        })
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    pub fn tag(&self) -> ModelTag {
        self.tag
    }

    /// Dissipative sub-generator belonging to one bath.
    pub fn dissipator(&self, bath: Bath) -> &ComplexMatrix {
        &self.bath_split[bath.index()]
    }

    /// `L(ρ)` as a matrix.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        apply_super(&self.generator, rho)
    }

    /// `D_k(ρ)` for one bath.
    pub fn apply_dissipator(&self, bath: Bath, rho: &ComplexMatrix) -> ComplexMatrix {
        apply_super(self.dissipator(bath), rho)
    }

    /// Generator that is identically zero.
    pub fn zero() -> Self {
        Liouvillian {
            generator: linalg::zeros(16),
            tag: ModelTag::Custom,
            bath_split: [linalg::zeros(16), linalg::zeros(16)],
        }
    }
}

fn apply_super(sup: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let v = linalg::vectorize(rho).expect("square operand");
    linalg::devectorize(&(sup * v)).expect("square superoperator")
}

/// Free Hamiltonian `E(|1⟩⟨1|⊗𝟙 + 𝟙⊗|1⟩⟨1|) = diag(0, E, E, 2E)`.
pub fn build_h0(energy: f64) -> Result<ComplexMatrix> {
    check_energy(energy)?;
    Ok(linalg::diag(&[0.0, energy, energy, 2.0 * energy]))
}

/// Energy-conserving exchange `g(|10⟩⟨01| + |01⟩⟨10|)`.
pub fn build_hint(g: f64) -> ComplexMatrix {
    let mut h = linalg::zeros(4);
    h[(1, 2)] = linalg::c(g, 0.0);
    h[(2, 1)] = linalg::c(g, 0.0);
    h
}

/// Double-dot Hamiltonian `Ĥ₀ + Ĥ_int + U|11⟩⟨11|`.
pub fn build_hdot(energy: f64, g: f64, u: f64) -> Result<ComplexMatrix> {
    check_nonnegative("u", u)?;
    let mut h = build_h0(energy)? + build_hint(g);
    h[(3, 3)] += linalg::c(u, 0.0);
    Ok(h)
}

/// Superoperator of `ρ ↦ i[ρ, H]`.
pub fn commutator_superoperator(h: &ComplexMatrix) -> ComplexMatrix {
    (linalg::right_mul(h) - linalg::left_mul(h)) * I
}

/// Superoperator of the dissipator `Γ(JρJ† − ½{J†J, ρ})`.
pub fn dissipator_superoperator(jump: &ComplexMatrix, rate: f64) -> ComplexMatrix {
    let jdj = jump.adjoint() * jump;
    let gain = linalg::kron(&jump.conjugate(), jump);
    let loss = (linalg::left_mul(&jdj) + linalg::right_mul(&jdj)).scale(0.5);
    (gain - loss).scale(rate)
}

/// Generator of the reset model
/// `∂ρ/∂t = i[ρ, Ĥ₀ + Ĥ_int] + Σ_k p_k (Φ_k(ρ) − ρ)` with
/// `Φ_c(ρ) = τ_c ⊗ Tr_c ρ` and `Φ_h(ρ) = Tr_h ρ ⊗ τ_h`.
pub fn reset_liouvillian(p: &ResetParams) -> Result<Liouvillian> {
    p.validate()?;
    let h = build_h0(p.energy)? + build_hint(p.g);
    let tau_c = p.cold_qubit().state();
    let tau_h = p.hot_qubit().state();
    let id = linalg::identity(16);

    let phi_c = linalg::superoperator_from_fn(4, |m| linalg::kron(&tau_c, &partial_trace_matrix(m, Subsystem::First)));
    let phi_h = linalg::superoperator_from_fn(4, |m| linalg::kron(&partial_trace_matrix(m, Subsystem::Second), &tau_h));

    Liouvillian::from_parts(
        commutator_superoperator(&h),
        (phi_c - &id).scale(p.p_c),
        (phi_h - &id).scale(p.p_h),
        ModelTag::Reset,
    )
}

/// Generator of a Lindblad master equation
/// `∂ρ/∂t = i[ρ, H] + Σᵢ Γᵢ (JᵢρJᵢ† − ½{Jᵢ†Jᵢ, ρ})`, with dissipators grouped
/// by the bath label on each term.
pub fn lindblad_liouvillian(h: &ComplexMatrix, jumps: &[JumpTerm]) -> Result<Liouvillian> {
    if h.shape() != (4, 4) {
        return Err(Error::DimensionMismatch {
            expected: "4×4 Hamiltonian".into(),
            actual: format!("{}×{}", h.nrows(), h.ncols()),
        });
    }
    let dev = linalg::hermitian_deviation(h);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let mut split = [linalg::zeros(16), linalg::zeros(16)];
    for term in jumps {
        if term.rate == 0.0 {
            continue;
        }
        split[term.bath.index()] += dissipator_superoperator(&term.operator, term.rate);
    }
    let [cold, hot] = split;
    Liouvillian::from_parts(commutator_superoperator(h), cold, hot, ModelTag::Custom)
}

/// Bose-Einstein occupation `1/(e^(ε/T) − 1)`; zero at T = 0.
pub fn bose_einstein(energy: f64, t: Temperature) -> f64 {
    match t {
        Temperature::Infinite => f64::INFINITY,
        Temperature::Finite(t) if t == 0.0 => 0.0,
        Temperature::Finite(t) => 1.0 / (energy / t).exp_m1(),
    }
}

/// Fermi-Dirac occupation `1/(e^(ε/T) + 1)`; zero at T = 0, ½ at T = ∞.
pub fn fermi_dirac(energy: f64, t: Temperature) -> f64 {
    match t {
        Temperature::Infinite => 0.5,
        Temperature::Finite(t) if t == 0.0 => {
            if energy > 0.0 {
                0.0
            } else if energy < 0.0 {
                1.0
            } else {
                0.5
            }
        }
        Temperature::Finite(t) => 1.0 / ((energy / t).exp() + 1.0),
    }
}

/// The four conditional raising operators
/// `[J₁, J₂, J₃, J₄] = [|0⟩⟨0|⊗σ₊, σ₊⊗|0⟩⟨0|, |1⟩⟨1|⊗σ₊, σ₊⊗|1⟩⟨1|]`.
/// J₁ and J₃ excite the hot qubit, J₂ and J₄ the cold one.
pub fn conditional_raising_operators() -> [ComplexMatrix; 4] {
    let (p0, p1, sp) = (linalg::proj0(), linalg::proj1(), linalg::sigma_plus());
    [
        linalg::kron(&p0, &sp),
        linalg::kron(&sp, &p0),
        linalg::kron(&p1, &sp),
        linalg::kron(&sp, &p1),
    ]
}

/// Eight jump terms `[J₁..J₄, J₁†..J₄†]` from per-jump absorption and
/// emission rates and transition energies.
fn eight_terms(absorb: [f64; 4], emit: [f64; 4], energies: [f64; 4]) -> Result<Vec<JumpTerm>> {
    let ops = conditional_raising_operators();
    let baths = [Bath::Hot, Bath::Cold, Bath::Hot, Bath::Cold];
    let mut out = Vec::with_capacity(8);
    for k in 0..4 {
        out.push(JumpTerm::new(ops[k].clone(), absorb[k], baths[k], energies[k])?);
    }
    for k in 0..4 {
        out.push(JumpTerm::new(ops[k].adjoint(), emit[k], baths[k], energies[k])?);
    }
    Ok(out)
}

/// Flux-qubit rates: absorption `Γ_k n_B(E, T_k)`, emission
/// `Γ_k (1 + n_B(E, T_k))`, with J₁, J₃ on the hot bath and J₂, J₄ on the cold.
pub fn flux_rates(p: &FluxParams) -> Result<Vec<JumpTerm>> {
    p.validate()?;
    let e = p.energy;
    let (n_c, n_h) = (bose_einstein(e, p.t_c), bose_einstein(e, p.t_h));
    let (up_c, up_h) = (p.gamma_c * n_c, p.gamma_h * n_h);
    let (down_c, down_h) = (p.gamma_c * (1.0 + n_c), p.gamma_h * (1.0 + n_h));
    eight_terms([up_h, up_c, up_h, up_c], [down_h, down_c, down_h, down_c], [e; 4])
}

/// Double-dot rates: absorption `Γ_k n_F(ε, T_k)`, emission
/// `Γ_k (1 − n_F(ε, T_k))`, where ε is the transition energy (`E` for J₁, J₂;
/// [`DotParams::charging_energy`] for J₃, J₄).
pub fn dot_rates(p: &DotParams) -> Result<Vec<JumpTerm>> {
    p.validate()?;
    let energies = [p.energy, p.energy, p.charging_energy(), p.charging_energy()];
    let gammas = [p.gamma_h, p.gamma_c, p.gamma_h, p.gamma_c];
    let temps = [p.t_h, p.t_c, p.t_h, p.t_c];
    let mut absorb = [0.0; 4];
    let mut emit = [0.0; 4];
    for k in 0..4 {
        absorb[k] = gammas[k] * fermi_dirac(energies[k], temps[k]);
        // 1 − n_F(ε) = n_F(−ε), evaluated directly to keep relative accuracy
        emit[k] = gammas[k] * fermi_dirac(-energies[k], temps[k]);
    }
    eight_terms(absorb, emit, energies)
}

/// Canonical flux-qubit generator with the four conditional jump operators.
pub fn flux_liouvillian(p: &FluxParams) -> Result<Liouvillian> {
    let h = build_h0(p.energy)? + build_hint(p.g);
    let mut l = lindblad_liouvillian(&h, &flux_rates(p)?)?;
    l.tag = ModelTag::Flux;
    Ok(l)
}

/// Flux-qubit generator with the local jumps `J_c = σ₊⊗𝟙`, `J_h = 𝟙⊗σ₊`
/// and their conjugates.
pub fn flux_two_operator_liouvillian(p: &FluxParams) -> Result<Liouvillian> {
    p.validate()?;
    let e = p.energy;
    let h = build_h0(e)? + build_hint(p.g);
    let (n_c, n_h) = (bose_einstein(e, p.t_c), bose_einstein(e, p.t_h));
    let j_c = linalg::kron(&linalg::sigma_plus(), &linalg::identity(2));
    let j_h = linalg::kron(&linalg::identity(2), &linalg::sigma_plus());
    let jumps = [
        JumpTerm::new(j_c.clone(), p.gamma_c * n_c, Bath::Cold, e)?,
        JumpTerm::new(j_c.adjoint(), p.gamma_c * (1.0 + n_c), Bath::Cold, e)?,
        JumpTerm::new(j_h.clone(), p.gamma_h * n_h, Bath::Hot, e)?,
        JumpTerm::new(j_h.adjoint(), p.gamma_h * (1.0 + n_h), Bath::Hot, e)?,
    ];
    let mut l = lindblad_liouvillian(&h, &jumps)?;
    l.tag = ModelTag::FluxTwoOperator;
    Ok(l)
}

/// Double-dot generator.
pub fn dot_liouvillian(p: &DotParams) -> Result<Liouvillian> {
    let h = build_hdot(p.energy, p.g, p.u)?;
    let mut l = lindblad_liouvillian(&h, &dot_rates(p)?)?;
    l.tag = ModelTag::Dot;
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{approx_eq, c, diag, ketbra, vectorize, ONE, ZERO};
    use crate::state::DensityMatrix;

    fn t(x: f64) -> Temperature {
        Temperature::Finite(x)
    }

    #[test]
    fn h0_is_diagonal_ladder() {
        assert!(approx_eq(&build_h0(1.0).unwrap(), &diag(&[0.0, 1.0, 1.0, 2.0]), 0.0));
        assert!(approx_eq(&build_h0(2.0).unwrap(), &diag(&[0.0, 2.0, 2.0, 4.0]), 0.0));
        assert!(build_h0(0.0).is_err());
        assert!(build_h0(-1.0).is_err());
    }

    #[test]
    fn h0_commutes_with_exchange() {
        for g in [0.0, 0.3, -1.7] {
            let (h0, hi) = (build_h0(1.3).unwrap(), build_hint(g));
            let comm = &h0 * &hi - &hi * &h0;
            assert!(comm.camax() == 0.0);
        }
    }

    #[test]
    fn exchange_swaps_single_excitations() {
        assert!(approx_eq(&build_hint(0.0), &linalg::zeros(4), 0.0));
        let h = build_hint(1.0);
        let mut ket01 = linalg::ComplexVector::zeros(4);
        ket01[1] = ONE;
        let out = &h * ket01;
        assert_eq!(out.as_slice(), &[ZERO, ZERO, ONE, ZERO]);
        let mut ev = linalg::hermitian_eigenvalues(&build_hint(0.7)).unwrap();
        ev.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip([-0.7, 0.0, 0.0, 0.7]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn dot_hamiltonian_reductions() {
        let flux = build_h0(1.0).unwrap() + build_hint(0.01);
        assert_eq!(build_hdot(1.0, 0.01, 0.0).unwrap(), flux);
        assert!(approx_eq(&build_hdot(1.0, 0.0, 20.0).unwrap(), &diag(&[0.0, 1.0, 1.0, 22.0]), 0.0));
        let ev = linalg::hermitian_eigenvalues(&build_hdot(1.0, 0.01, 20.0).unwrap()).unwrap();
        assert!((ev[3] - 22.0).abs() < 1e-12);
        assert!(build_hdot(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn uncoupled_equal_temperature_product_is_fixed_point() {
        let p = ResetParams::new(1.0, 0.0, 3e-3, 7e-3, t(0.4), t(0.4)).unwrap();
        let l = reset_liouvillian(&p).unwrap();
        let tau = p.cold_qubit();
        let rho = DensityMatrix::thermal_product(&tau, &tau);
        let out = l.generator() * vectorize(rho.matrix()).unwrap();
        assert!(out.camax() < 1e-15);
    }

    #[test]
    fn reset_generator_matches_direct_rhs() {
        let p = ResetParams::new(1.0, 4e-3, 2e-3, 9e-3, t(0.2), t(3.0)).unwrap();
        let l = reset_liouvillian(&p).unwrap();
        let rho = ComplexMatrix::from_fn(4, 4, |i, j| c((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let h = build_h0(1.0).unwrap() + build_hint(p.g);
        let (tc, th) = (p.cold_qubit().state(), p.hot_qubit().state());
        let phi_c = linalg::kron(&tc, &partial_trace_matrix(&rho, Subsystem::First));
        let phi_h = linalg::kron(&partial_trace_matrix(&rho, Subsystem::Second), &th);
        let direct = (&rho * &h - &h * &rho) * I + (phi_c - &rho).scale(p.p_c) + (phi_h - &rho).scale(p.p_h);
        assert!(approx_eq(&l.apply(&rho), &direct, 1e-15));
    }

    #[test]
    fn lindblad_without_jumps_is_commutator() {
        let h = build_h0(1.0).unwrap() + build_hint(0.3);
        let l = lindblad_liouvillian(&h, &[]).unwrap();
        let (_, vecs) = linalg::hermitian_eigen(&h).unwrap();
        for k in 0..4 {
            let v = vecs.column(k);
            let proj = &v * v.adjoint();
            assert!(l.apply(&proj).camax() < 1e-14);
        }
    }

    #[test]
    fn decay_to_ground_has_ground_fixed_point() {
        let jump = linalg::kron(&linalg::sigma_minus(), &linalg::identity(2));
        let term = JumpTerm::new(jump, 1.0, Bath::Cold, 1.0).unwrap();
        let l = lindblad_liouvillian(&linalg::zeros(4), &[term]).unwrap();
        assert!(l.apply(&ketbra(4, 0, 0)).camax() == 0.0);
        // |11⟩ decays, so it is not stationary
        assert!(l.apply(&ketbra(4, 3, 3)).camax() > 0.5);
    }

    #[test]
    fn lindblad_rejects_non_hermitian_hamiltonian() {
        let mut h = linalg::zeros(4);
        h[(0, 1)] = ONE;
        assert!(matches!(lindblad_liouvillian(&h, &[]), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn occupations_at_limits() {
        assert_eq!(bose_einstein(1.0, t(0.0)), 0.0);
        assert!((bose_einstein(1.0, t(1.0)) - 1.0 / (1f64.exp() - 1.0)).abs() < 1e-15);
        assert_eq!(fermi_dirac(1.0, t(0.0)), 0.0);
        assert_eq!(fermi_dirac(1.0, Temperature::Infinite), 0.5);
        assert_eq!(fermi_dirac(-1.0, t(0.0)), 1.0);
    }

    #[test]
    fn flux_rates_vanish_at_zero_temperature() {
        let p = FluxParams::new(1.0, 1e-3, 2e-3, 3e-3, t(0.0), t(0.0)).unwrap();
        let rates = flux_rates(&p).unwrap();
        assert_eq!(rates.len(), 8);
        assert!(rates[..4].iter().all(|j| j.rate == 0.0));
        assert_eq!(rates[4].rate, 3e-3);
        assert_eq!(rates[5].rate, 2e-3);
    }

    #[test]
    fn flux_rejects_infinite_temperature() {
        assert!(FluxParams::new(1.0, 1e-3, 1e-3, 1e-3, t(0.0), Temperature::Infinite).is_err());
    }

    #[test]
    fn dot_rates_limits() {
        let p = DotParams::new(1.0, 1e-3, 2e-3, 4e-3, t(0.0), Temperature::Infinite, 5.0).unwrap();
        let rates = dot_rates(&p).unwrap();
        // hot side: n_F = ½ at infinite temperature
        assert_eq!(rates[0].rate, 2e-3);
        assert_eq!(rates[4].rate, 2e-3);
        // cold side: no absorption, full emission at T = 0
        assert_eq!(rates[1].rate, 0.0);
        assert_eq!(rates[5].rate, 2e-3);
        assert_eq!(rates[2].transition_energy, 6.0);
    }

    #[test]
    fn jump_bath_assignment() {
        let p = FluxParams::new(1.0, 1e-3, 2e-3, 3e-3, t(0.1), t(1.0)).unwrap();
        let baths: Vec<Bath> = flux_rates(&p).unwrap().iter().map(|j| j.bath).collect();
        assert_eq!(
            baths,
            [Bath::Hot, Bath::Cold, Bath::Hot, Bath::Cold, Bath::Hot, Bath::Cold, Bath::Hot, Bath::Cold]
        );
    }

    #[test]
    fn gap_rate_energy_makes_dot_equal_flux_structure() {
        let mut p = DotParams::new(1.0, 1e-3, 2e-3, 3e-3, t(0.1), t(1.0), 20.0).unwrap();
        p.rate_energy = DotRateEnergy::Gap;
        assert!(dot_rates(&p).unwrap().iter().all(|j| j.transition_energy == 1.0));
    }

    #[test]
    fn parsing_model_kind() {
        assert_eq!("Flux".parse::<ModelKind>().unwrap(), ModelKind::Flux);
        assert!("spin".parse::<ModelKind>().is_err());
    }
}
