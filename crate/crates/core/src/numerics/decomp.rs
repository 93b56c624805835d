//! Dense decompositions on [`ComplexMatrix`].
//!
//! Hermitian eigenproblems, Schur, QR and LU come from nalgebra; the SVD is a
//! one-sided Jacobi iteration.
//!
//! Tolerances scale with the dimension and the norm of the input; none of the
//! kernels use raw absolute thresholds.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, LU};

use super::matrix::{frobenius, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Relative hermiticity tolerance applied when the caller does not supply one.
pub const DEFAULT_HERMITICITY_REL: f64 = 1e-10;
/// Negative eigenvalues above `-PSD_CLAMP_REL * ||M||` are clamped to zero.
pub const PSD_CLAMP_REL: f64 = 1e-12;
/// `polar_left` refuses inputs with `sigma_min <= SINGULAR_REL * sigma_max`.
pub const SINGULAR_REL: f64 = 1e-12;

fn iteration_budget(d: usize) -> usize {
    1000 + 200 * d
}

fn ensure_finite(m: &DMatrix<C64>, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalFailure(format!("{what}: non-finite input")))
    }
}

fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.rows())
    } else {
        Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        })
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V f(diag(lambda)) V^H`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.eigenvectors.as_dmatrix();
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= s);
        }
        let r = &scaled * v.adjoint();
        ComplexMatrix::wrap(hermitian_part(&r))
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Hermitian eigendecomposition with the default tolerance
/// `1e-10 * max|M_ij|` on `max|M - M^H|`.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    hermitian_eig_with_tolerance(m, DEFAULT_HERMITICITY_REL * m.max_abs())
}

pub fn hermitian_eig_with_tolerance(m: &ComplexMatrix, tolerance: f64) -> Result<HermitianEig> {
    let d = ensure_square(m)?;
    ensure_finite(m, "hermitian_eig")?;
    let deviation = m.hermiticity_defect();
    if deviation > tolerance {
        return Err(Error::NotHermitian {
            deviation,
            tolerance,
        });
    }
    let sym = hermitian_part(m.as_dmatrix());
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, iteration_budget(d))
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let columns: Vec<DVector<C64>> = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).into_owned())
        .collect();
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors: ComplexMatrix::wrap(DMatrix::from_columns(&columns)),
    })
}

/// Principal square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-12 ||M||, 0)` are clamped to zero; anything lower is
/// rejected with [`Error::NotPsd`].
pub fn sqrtm_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let norm = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let floor = PSD_CLAMP_REL * norm;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -floor {
            return Err(Error::NotPsd {
                eigenvalue: lowest,
                floor: -floor,
            });
        }
    }
    Ok(eig.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Thin singular value decomposition `M = U diag(sigma) V^H`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub u: ComplexMatrix,
    /// `cols x k` with orthonormal columns.
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.last().expect("non-empty")
    }

    pub fn condition_number(&self) -> f64 {
        self.sigma_max() / self.sigma_min()
    }

    /// Number of singular values above `rel * sigma_max`.
    pub fn rank(&self, rel: f64) -> usize {
        let cut = rel * self.sigma_max();
        self.singular_values.iter().filter(|&&s| s > cut).count()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.as_dmatrix().clone();
        for (k, &s) in self.singular_values.iter().enumerate() {
            us.column_mut(k).iter_mut().for_each(|z| *z *= s);
        }
        ComplexMatrix::wrap(us * self.v.as_dmatrix().adjoint())
    }
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Columns of a working copy of `M` are rotated pairwise until every pair is
/// orthogonal to working precision; the column norms are then the singular
/// values. Wide inputs are handled through `M^H`.
pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    ensure_finite(m, "svd")?;
    if m.rows() < m.cols() {
        let t = svd(&m.adjoint())?;
        return Ok(Svd {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        });
    }
    let (rows, cols) = (m.rows(), m.cols());
    let (work, v) = jacobi_orthogonalize(m.as_dmatrix().clone())?;

    let norms: Vec<f64> = (0..cols).map(|j| column_norm(&work, j)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();

    let scale = singular_values[0];
    let mut u_cols: Vec<DVector<C64>> = Vec::with_capacity(cols);
    for &j in &order {
        let n = norms[j];
        if n > 0.0 && n > f64::EPSILON * scale * rows as f64 {
            u_cols.push(work.column(j).into_owned() / C64::new(n, 0.0));
        } else {
            u_cols.push(orthonormal_completion(&u_cols, rows));
        }
    }
    let v_cols: Vec<DVector<C64>> = order.iter().map(|&j| v.column(j).into_owned()).collect();
    Ok(Svd {
        singular_values,
        u: ComplexMatrix::wrap(DMatrix::from_columns(&u_cols)),
        v: ComplexMatrix::wrap(DMatrix::from_columns(&v_cols)),
    })
}

const MAX_JACOBI_SWEEPS: usize = 80;

fn column_norm(m: &DMatrix<C64>, j: usize) -> f64 {
    m.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Rotates the columns of `a` until they are mutually orthogonal; returns the
/// rotated matrix and the accumulated unitary `V` with `a_in V = a_out`.
fn jacobi_orthogonalize(mut a: DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut v = DMatrix::<C64>::identity(cols, cols);
    let tol = f64::EPSILON * (rows as f64).sqrt();
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in (p + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for i in 0..rows {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // [u_p, u_q] diag(1, conj(phase)) is a real symmetric 2x2 Gram
                // problem, diagonalized by a plane rotation.
                let phase_conj = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s, phase_conj);
                rotate_columns(&mut v, p, q, c, s, phase_conj);
            }
        }
        if !rotated {
            return Ok((a, v));
        }
    }
    Err(Error::NumericalFailure(
        "Jacobi SVD did not converge".into(),
    ))
}

fn rotate_columns(m: &mut DMatrix<C64>, p: usize, q: usize, c: f64, s: f64, phase_conj: C64) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)] * phase_conj;
        m[(i, p)] = x * c - y * s;
        m[(i, q)] = x * s + y * c;
    }
}

/// A unit vector orthogonal to `basis`, built from the standard basis vector
/// with the largest residual after projection (two Gram-Schmidt passes).
pub(crate) fn orthonormal_completion(basis: &[DVector<C64>], rows: usize) -> DVector<C64> {
    let mut best: Option<(f64, DVector<C64>)> = None;
    for k in 0..rows {
        let mut w = DVector::<C64>::zeros(rows);
        w[k] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in basis {
                let coeff = b.dotc(&w);
                w -= b * coeff;
            }
        }
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, w / C64::new(n, 0.0)));
        }
    }
    best.expect("rows >= 1").1
}

/// Left polar factors `M = U H` of a non-singular square matrix.
///
/// `H = (M^H M)^{1/2}` is carried together with its eigendecomposition so
/// that callers can form `H^{-1}` from reciprocal eigenvalues.
#[derive(Debug, Clone)]
pub struct Polar {
    pub unitary: ComplexMatrix,
    pub positive: ComplexMatrix,
    /// Eigenvalues of `H`, ascending (the singular values of `M`).
    pub spectrum: Vec<f64>,
    /// Eigenvectors of `H`, column `k` pairs with `spectrum[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl Polar {
    /// `H^{-1}` built from reciprocal eigenvalues; exactly Hermitian.
    pub fn positive_inverse(&self) -> ComplexMatrix {
        HermitianEig {
            eigenvalues: self.spectrum.clone(),
            eigenvectors: self.eigenvectors.clone(),
        }
        .reconstruct_with(|x| 1.0 / x)
    }
}

/// Polar decomposition `M = U H` with `U` unitary and `H = (M^H M)^{1/2}`.
///
/// With `M = W diag(sigma) V^H`, `H = V diag(sigma) V^H` and `U = W V^H`.
pub fn polar_left(m: &ComplexMatrix) -> Result<Polar> {
    ensure_square(m)?;
    let s = svd(m)?;
    let threshold = SINGULAR_REL * s.sigma_max();
    if s.sigma_min() <= threshold || s.sigma_max() == 0.0 {
        return Err(Error::SingularInput {
            sigma_min: s.sigma_min(),
            threshold,
        });
    }
    let w = s.u.as_dmatrix();
    let v = s.v.as_dmatrix();
    let unitary = ComplexMatrix::wrap(w * v.adjoint());

    let d = s.singular_values.len();
    let spectrum: Vec<f64> = s.singular_values.iter().rev().copied().collect();
    let cols: Vec<DVector<C64>> = (0..d).rev().map(|i| v.column(i).into_owned()).collect();
    let eig = HermitianEig {
        eigenvalues: spectrum.clone(),
        eigenvectors: ComplexMatrix::wrap(DMatrix::from_columns(&cols)),
    };
    let positive = eig.reconstruct();
    Ok(Polar {
        unitary,
        positive,
        spectrum,
        eigenvectors: eig.eigenvectors,
    })
}

/// Eigenvalues of a general square matrix from its complex Schur form.
pub fn general_eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let d = ensure_square(m)?;
    ensure_finite(m, "general_eigenvalues")?;
    let schur = Schur::try_new(m.as_dmatrix().clone(), f64::EPSILON, iteration_budget(d))
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..d).map(|i| t[(i, i)]).collect())
}

/// Inverse through LU with partial pivoting.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    ensure_finite(m, "inverse")?;
    LU::new(m.as_dmatrix().clone())
        .try_inverse()
        .map(ComplexMatrix::wrap)
        .ok_or(Error::SingularInput {
            sigma_min: 0.0,
            threshold: 0.0,
        })
}

/// Spectral condition number `sigma_max / sigma_min`.
pub fn condition_number(m: &ComplexMatrix) -> Result<f64> {
    Ok(svd(m)?.condition_number())
}

/// `||A - B||_F`.
pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    frobenius(&(a.as_dmatrix() - b.as_dmatrix()))
}
