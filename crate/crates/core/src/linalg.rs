//! Dense complex linear algebra for the fixed small sizes used here: single
//! qubit (2×2), two qubits (4×4) and superoperators (16×16).
//!
//! Two-qubit operators use the basis ordering `{|00⟩, |01⟩, |10⟩, |11⟩}` with
//! the first label belonging to the cold qubit. Vectorization stacks columns,
//! so `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Absolute tolerance used when an operation does not receive one.
pub const DEFAULT_TOL: f64 = 1e-12;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

pub const ZERO: Complex64 = Complex::new(0.0, 0.0);
pub const ONE: Complex64 = Complex::new(1.0, 0.0);
pub const I: Complex64 = Complex::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex::new(re, im)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, n)
}

/// Real diagonal matrix.
pub fn diag(entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        entries.len(),
        entries.iter().map(|&x| c(x, 0.0)),
    ))
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn ketbra(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(n);
    m[(i, j)] = ONE;
    m
}

/// `|0⟩⟨0|`
pub fn proj0() -> ComplexMatrix {
    ketbra(2, 0, 0)
}

/// `|1⟩⟨1|`
pub fn proj1() -> ComplexMatrix {
    ketbra(2, 1, 1)
}

/// Raising operator `σ₊ = |1⟩⟨0|`.
pub fn sigma_plus() -> ComplexMatrix {
    ketbra(2, 1, 0)
}

/// Lowering operator `σ₋ = |0⟩⟨1|`.
pub fn sigma_minus() -> ComplexMatrix {
    ketbra(2, 0, 1)
}

pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    diag(&[1.0, -1.0])
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.trace()
}

/// Largest entrywise modulus of `a − b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Entrywise comparison with an explicit absolute tolerance. Matrices of
/// different shape are never equal.
pub fn approx_eq(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_abs_diff(a, b) <= tol
}

/// `‖m − m†‖_max`
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermitian_deviation(m) <= tol
}

/// `(m + m†) / 2`
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Column-stacking vectorization of a square matrix.
pub fn vectorize(m: &ComplexMatrix) -> Result<ComplexVector> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            actual: format!("{}×{}", m.nrows(), m.ncols()),
        });
    }
    // nalgebra stores matrices column-major, so the storage order is vec(m).
    Ok(ComplexVector::from_column_slice(m.as_slice()))
}

/// Inverse of [`vectorize`]; the vector length must be a perfect square.
pub fn devectorize(v: &ComplexVector) -> Result<ComplexMatrix> {
    let n = (v.len() as f64).sqrt().round() as usize;
    if n * n != v.len() || n == 0 {
        return Err(Error::DimensionMismatch {
            expected: "vector of length n²".into(),
            actual: format!("length {}", v.len()),
        });
    }
    Ok(ComplexMatrix::from_column_slice(n, n, v.as_slice()))
}

/// Superoperator of `ρ ↦ A ρ B` under column stacking.
pub fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    kron(&b.transpose(), a)
}

/// Superoperator of `ρ ↦ A ρ`.
pub fn left_mul(a: &ComplexMatrix) -> ComplexMatrix {
    kron(&identity(a.nrows()), a)
}

/// Superoperator of `ρ ↦ ρ B`.
pub fn right_mul(b: &ComplexMatrix) -> ComplexMatrix {
    kron(&b.transpose(), &identity(b.nrows()))
}

/// Matrix of an arbitrary linear map on n×n matrices, built column by column
/// from its action on the elementary matrices `|i⟩⟨j|`.
pub fn superoperator_from_fn<F>(n: usize, map: F) -> ComplexMatrix
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let mut out = zeros(n * n);
    for j in 0..n {
        for i in 0..n {
            let image = map(&ketbra(n, i, j));
            // column index of |i⟩⟨j| in vec order
            let col = j * n + i;
            out.column_mut(col).copy_from_slice(image.as_slice());
        }
    }
    out
}

/// All eigenvalues (with multiplicity) of a general complex square matrix,
/// via a complex Schur decomposition.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            actual: format!("{}×{}", m.nrows(), m.ncols()),
        });
    }
    let schur = Schur::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNoConvergence)?;
    let values = schur.eigenvalues().ok_or(Error::EigenNoConvergence)?;
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenNoConvergence);
    }
    Ok(values.iter().copied().collect())
}

/// Eigen-decomposition of a Hermitian matrix: real eigenvalues in ascending
/// order and the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let herm = hermitian_part(m);
    let eig = SymmetricEigen::try_new(herm, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNoConvergence)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(m.nrows());
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Ascending real eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|(values, _)| values)
}

/// Principal square root of a positive semidefinite Hermitian matrix; tiny
/// negative eigenvalues from rounding are clamped to zero.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let roots: Vec<f64> = values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let scaled = ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| vectors[(i, j)] * roots[j]);
    Ok(&scaled * vectors.adjoint())
}

/// A factor `Ψ` with `ΨΨ† = m` for positive semidefinite `m`, by Cholesky
/// with diagonal pivoting. Pivots that rounding pushes to zero or below end
/// the factorization, so tiny populations decoupled from the rest come out
/// exactly rather than at the `√ε` level of an eigendecomposition.
pub fn psd_factor(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    let mut a = hermitian_part(m);
    let mut l = ComplexMatrix::zeros(n, n);
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re)).unwrap_or(k);
        if p != k {
            a.swap_rows(k, p);
            a.swap_columns(k, p);
            l.swap_rows(k, p);
            perm.swap(k, p);
        }
        let d = a[(k, k)].re;
        if !(d > 0.0) {
            break;
        }
        let root = d.sqrt();
        l[(k, k)] = c(root, 0.0);
        for i in k + 1..n {
            l[(i, k)] = a[(i, k)] / root;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let update = l[(i, k)] * l[(j, k)].conj();
                a[(i, j)] -= update;
            }
        }
    }
    let mut psi = ComplexMatrix::zeros(n, n);
    for (row, &orig) in perm.iter().enumerate() {
        psi.row_mut(orig).copy_from(&l.row(row));
    }
    psi
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNoConvergence)?;
    let mut values: Vec<f64> = svd.singular_values.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Full SVD, exposed for the steady-state solver.
pub(crate) fn svd(m: &ComplexMatrix) -> Result<SVD<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(m.clone(), true, true, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNoConvergence)
}

/// Frobenius norm of a complex vector.
pub fn vector_norm(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(n: usize, i: usize) -> ComplexVector {
        let mut v = ComplexVector::zeros(n);
        v[i] = ONE;
        v
    }

    fn sample(n: usize, seed: u64) -> ComplexMatrix {
        // small deterministic LCG, enough for fixed test matrices
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()))
    }

    #[test]
    fn kron_of_identities_is_identity() {
        assert!(approx_eq(&kron(&identity(2), &identity(2)), &identity(4), 0.0));
    }

    #[test]
    fn kron_follows_basis_ordering() {
        assert!(approx_eq(&kron(&proj1(), &identity(2)), &diag(&[0.0, 0.0, 1.0, 1.0]), 0.0));
    }

    #[test]
    fn sigma_x_pair_swaps_01_to_10() {
        let xx = kron(&sigma_x(), &sigma_x());
        // σx⊗σx|01⟩ = |10⟩, expanded by hand
        let out = &xx * ket(4, 1);
        assert_eq!(out, ket(4, 2));
    }

    #[test]
    fn vectorize_round_trip_is_exact() {
        let m = sample(4, 3);
        let back = devectorize(&vectorize(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn vectorize_identity_has_four_unit_entries() {
        let v = vectorize(&identity(4)).unwrap();
        assert_eq!(v.iter().filter(|z| **z == ONE).count(), 4);
        assert_eq!(v.iter().filter(|z| **z == ZERO).count(), 12);
        assert_eq!(v[0], ONE);
        assert_eq!(v[5], ONE);
    }

    #[test]
    fn sandwich_matches_column_stacking_identity() {
        let (a, rho, b) = (sample(4, 1), sample(4, 2), sample(4, 7));
        let lhs = vectorize(&(&a * &rho * &b)).unwrap();
        // brute force: entry (i,j) of AρB as an explicit triple sum
        let mut brute = zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = ZERO;
                for k in 0..4 {
                    for l in 0..4 {
                        acc += a[(i, k)] * rho[(k, l)] * b[(l, j)];
                    }
                }
                brute[(i, j)] = acc;
            }
        }
        let rhs = sandwich(&a, &b) * vectorize(&rho).unwrap();
        assert!((&lhs - vectorize(&brute).unwrap()).camax() < 1e-12);
        assert!((&lhs - &rhs).camax() < 1e-12);
    }

    #[test]
    fn devectorize_rejects_bad_length() {
        assert!(matches!(
            devectorize(&ComplexVector::zeros(15)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(vectorize(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn superoperator_from_fn_reproduces_sandwich() {
        let (a, b) = (sample(4, 11), sample(4, 12));
        let direct = superoperator_from_fn(4, |m| &a * m * &b);
        assert!(approx_eq(&direct, &sandwich(&a, &b), 1e-13));
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let mut ev = eigenvalues(&diag(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (k, z) in ev.iter().enumerate() {
            assert!((z - c(k as f64 + 1.0, 0.0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn eigenvalues_of_xx_involution() {
        let mut ev = eigenvalues(&kron(&sigma_x(), &sigma_x())).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (z, e) in ev.iter().zip(expected) {
            assert!((z - c(e, 0.0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn eigenvalues_of_random_hermitian_are_real_and_sum_to_trace() {
        for seed in 0..20 {
            let m = sample(4, seed);
            let h = &m + m.adjoint();
            let ev = eigenvalues(&h).unwrap();
            let sum: Complex64 = ev.iter().sum();
            assert!(ev.iter().all(|z| z.im.abs() <= 1e-10));
            assert!((sum - h.trace()).norm() <= 1e-10);
            let mut re: Vec<f64> = ev.iter().map(|z| z.re).collect();
            re.sort_by(f64::total_cmp);
            let herm = hermitian_eigenvalues(&h).unwrap();
            for (a, b) in re.iter().zip(&herm) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let m = sample(4, 5);
        let psd = &m * m.adjoint();
        let root = sqrt_psd(&psd).unwrap();
        assert!(approx_eq(&(&root * &root), &psd, 1e-12));
        assert!(is_hermitian(&root, 1e-13));
    }

    #[test]
    fn pauli_algebra() {
        let y = sigma_y();
        assert!(approx_eq(&(&y * &y), &identity(2), 0.0));
        assert!(approx_eq(&(sigma_x() * sigma_y()), &(sigma_z() * I), 0.0));
        assert!(approx_eq(&dagger(&sigma_plus()), &sigma_minus(), 0.0));
    }

    #[test]
    fn psd_factor_reconstructs() {
        for seed in 0..20 {
            let x = sample(4, seed);
            let rho = &x * x.adjoint();
            let psi = psd_factor(&rho);
            assert!(max_abs_diff(&(&psi * psi.adjoint()), &rho) < 1e-12);
        }
        let d = diag(&[0.5, 0.5 - 1e-90, 1e-90, 0.0]);
        let psi = psd_factor(&d);
        assert_eq!((&psi * psi.adjoint())[(2, 2)].re, 1e-90);
    }
}
