//! Two-qubit states, thermal single-qubit states and reduced states.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, ComplexMatrix, ComplexVector};

/// Bath temperature in units of the qubit gap (k_B = 1).
///
/// Infinity is a distinct value so that Boltzmann factors can be taken at
/// their limits instead of overflowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Finite(f64),
    Infinite,
}

impl Temperature {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::param("temperature", format!("must be ≥ 0, got {t}")));
        }
        if t == f64::INFINITY {
            Ok(Temperature::Infinite)
        } else {
            Ok(Temperature::Finite(t))
        }
    }

    pub fn zero() -> Self {
        Temperature::Finite(0.0)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Temperature::Infinite)
    }

    pub fn is_zero(self) -> bool {
        self == Temperature::Finite(0.0)
    }

    /// Numeric value, `f64::INFINITY` for the infinite temperature.
    pub fn value(self) -> f64 {
        match self {
            Temperature::Finite(t) => t,
            Temperature::Infinite => f64::INFINITY,
        }
    }

    /// `e^(−energy/T)` with the T = 0 and T = ∞ limits taken exactly.
    pub fn boltzmann(self, energy: f64) -> f64 {
        match self {
            Temperature::Infinite => 1.0,
            Temperature::Finite(t) if t == 0.0 => 0.0,
            Temperature::Finite(t) => (-energy / t).exp(),
        }
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Temperature::Finite(t) => write!(f, "{t}"),
            Temperature::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Temperature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Temperature::Infinite);
        }
        let t: f64 = s
            .parse()
            .map_err(|_| Error::param("temperature", format!("cannot parse `{s}`")))?;
        if t.is_infinite() {
            return Err(Error::param("temperature", "use the token `inf` for infinite temperature"));
        }
        Temperature::new(t)
    }
}

impl From<f64> for Temperature {
    /// Lossy convenience conversion; negative or NaN inputs panic.
    fn from(t: f64) -> Self {
        Temperature::new(t).expect("temperature must be non-negative")
    }
}

/// A qubit in equilibrium with a bath: `τ = r|0⟩⟨0| + (1−r)|1⟩⟨1|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalQubit {
    /// Ground-state occupation probability.
    pub r: f64,
    pub temperature: Temperature,
    pub energy: f64,
}

/// Thermal state of a qubit with gap `energy` at `temperature`;
/// `r = 1/(1 + e^(−E/T))`.
pub fn thermal_qubit(energy: f64, temperature: Temperature) -> Result<ThermalQubit> {
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::param("energy", format!("must be > 0, got {energy}")));
    }
    if let Temperature::Finite(t) = temperature {
        if t.is_nan() || t < 0.0 {
            return Err(Error::param("temperature", format!("must be ≥ 0, got {t}")));
        }
    }
    let r = match temperature {
        Temperature::Infinite => 0.5,
        Temperature::Finite(t) if t == 0.0 => 1.0,
        Temperature::Finite(t) => 1.0 / (1.0 + (-energy / t).exp()),
    };
    Ok(ThermalQubit {
        r,
        temperature,
        energy,
    })
}

impl ThermalQubit {
    pub fn excited_population(&self) -> f64 {
        1.0 - self.r
    }

    /// The 2×2 density matrix τ.
    pub fn state(&self) -> ComplexMatrix {
        linalg::diag(&[self.r, 1.0 - self.r])
    }
}

/// Tolerances applied when validating a [`DensityMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateTolerance {
    pub hermitian: f64,
    pub trace: f64,
    /// Allowed magnitude of negative eigenvalues.
    pub psd: f64,
}

impl Default for StateTolerance {
    fn default() -> Self {
        StateTolerance {
            hermitian: 1e-12,
            trace: 1e-12,
            psd: 1e-10,
        }
    }
}

/// A validated two-qubit state: 4×4, Hermitian, unit trace, positive
/// semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, StateTolerance::default())
    }

    pub fn with_tolerance(mat: ComplexMatrix, tol: StateTolerance) -> Result<Self> {
        if mat.shape() != (4, 4) {
            return Err(Error::DimensionMismatch {
                expected: "4×4".into(),
                actual: format!("{}×{}", mat.nrows(), mat.ncols()),
            });
        }
        if !linalg::is_finite(&mat) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = linalg::hermitian_deviation(&mat);
        if herm > tol.hermitian {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = mat.trace();
        if (tr - c(1.0, 0.0)).norm() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let smallest = linalg::hermitian_eigenvalues(&mat)?[0];
        if smallest < -tol.psd {
            return Err(Error::InvalidState(format!("negative eigenvalue {smallest:.3e}")));
        }
        Ok(DensityMatrix(mat))
    }

    /// Skips validation; for hot loops whose inputs are valid by construction.
    pub(crate) fn unchecked(mat: ComplexMatrix) -> Self {
        debug_assert_eq!(mat.shape(), (4, 4));
        DensityMatrix(mat)
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) 4-component ket.
    pub fn pure(ket: &[Complex64]) -> Result<Self> {
        if ket.len() != 4 {
            return Err(Error::DimensionMismatch {
                expected: "4 amplitudes".into(),
                actual: format!("{}", ket.len()),
            });
        }
        let v = ComplexVector::from_column_slice(ket);
        let norm = linalg::vector_norm(&v);
        if norm == 0.0 {
            return Err(Error::InvalidState("zero ket".into()));
        }
        let v = v.unscale(norm);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(linalg::identity(4).scale(0.25))
    }

    /// `a ⊗ b` for two single-qubit states.
    pub fn product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Self> {
        if a.shape() != (2, 2) || b.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: "two 2×2 factors".into(),
                actual: format!("{:?} and {:?}", a.shape(), b.shape()),
            });
        }
        Self::new(linalg::kron(a, b))
    }

    /// `τ_c ⊗ τ_h`
    pub fn thermal_product(cold: &ThermalQubit, hot: &ThermalQubit) -> Self {
        DensityMatrix(linalg::kron(&cold.state(), &hot.state()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Entry `ρ_ij` in the `{00, 01, 10, 11}` basis.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::hermitian_eigenvalues(&self.0)
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        let diff = &self.0 - &other.0;
        Ok(0.5 * linalg::hermitian_eigenvalues(&diff)?.iter().map(|x| x.abs()).sum::<f64>())
    }
}

/// Which qubit of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    /// The cold qubit.
    First,
    /// The hot qubit.
    Second,
}

/// Reduced state obtained by tracing out `traced`.
pub fn partial_trace(rho: &DensityMatrix, traced: Subsystem) -> ComplexMatrix {
    partial_trace_matrix(rho.matrix(), traced)
}

/// Partial trace of an arbitrary 4×4 operator.
pub fn partial_trace_matrix(m: &ComplexMatrix, traced: Subsystem) -> ComplexMatrix {
    assert_eq!(m.shape(), (4, 4), "partial trace expects a two-qubit operator");
    // index of |ab⟩ is 2a + b
    ComplexMatrix::from_fn(2, 2, |i, j| match traced {
        Subsystem::First => m[(i, j)] + m[(2 + i, 2 + j)],
        Subsystem::Second => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
    })
}
