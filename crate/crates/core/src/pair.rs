//! Truncated biorthogonal pairs, regularity and transition operators.
//!
//! A pair is stored as two `d x n` matrices whose column `k` holds `phi_k`
//! (resp. `psi_k`), indexed from zero. Density of the spans can only be
//! decided when `n = d`; shorter pairs are reported as indeterminate together
//! with unit vectors orthogonal to each span.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, vector_norm, ComplexMatrix, C64};

/// Singular values at or below `RANK_REL * sigma_max` do not count towards rank.
pub const RANK_REL: f64 = 1e-10;
/// Relative factor of the default biorthogonality tolerance.
pub const BIORTHOGONALITY_REL: f64 = 1e-10;
/// Relative factor of the unitarity check on user-supplied bases.
pub const UNITARITY_REL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPair {
    phi: ComplexMatrix,
    psi: ComplexMatrix,
    label: String,
}

impl TruncatedPair {
    /// Checks shapes (`d x n` each, `n <= d`) and that no column vanishes.
    /// Biorthogonality is measured separately, see [`biorthogonality_residual`].
    pub fn new(phi: ComplexMatrix, psi: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if phi.rows() != psi.rows() || phi.cols() != psi.cols() {
            return Err(Error::DimensionMismatch(format!(
                "phi is {}x{} but psi is {}x{}",
                phi.rows(),
                phi.cols(),
                psi.rows(),
                psi.cols()
            )));
        }
        if phi.cols() > phi.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors exceed the ambient dimension {}",
                phi.cols(),
                phi.rows()
            )));
        }
        for (name, m) in [("phi", &phi), ("psi", &psi)] {
            if let Some(k) = (0..m.cols()).find(|&k| m.column(k).iter().all(|z| z.norm() == 0.0)) {
                return Err(Error::Validation(format!("{name}_{k} is the zero vector")));
            }
        }
        Ok(Self {
            phi,
            psi,
            label: label.into(),
        })
    }

    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.phi.rows()
    }

    /// Number of vectors `n` in each sequence.
    pub fn count(&self) -> usize {
        self.phi.cols()
    }

    pub fn phi(&self) -> &ComplexMatrix {
        &self.phi
    }

    pub fn psi(&self) -> &ComplexMatrix {
        &self.psi
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn phi_vector(&self, k: usize) -> DVector<C64> {
        self.phi.column_vector(k)
    }

    pub fn psi_vector(&self, k: usize) -> DVector<C64> {
        self.psi.column_vector(k)
    }

    /// The pair with the roles of the two sequences exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            phi: self.psi.clone(),
            psi: self.phi.clone(),
            label: format!("swap({})", self.label),
        }
    }

    pub fn is_square(&self) -> bool {
        self.dim() == self.count()
    }
}

/// `max_{k,m} |(phi_k | psi_m) - delta_km|`, i.e. `||Psi^H Phi - I||_max`.
pub fn biorthogonality_residual(pair: &TruncatedPair) -> f64 {
    let gram = pair.psi().adjoint().as_dmatrix() * pair.phi().as_dmatrix();
    gram.iter()
        .enumerate()
        .map(|(idx, z)| {
            let n = gram.nrows();
            let delta = if idx % n == idx / n { 1.0 } else { 0.0 };
            (z - C64::new(delta, 0.0)).norm()
        })
        .fold(0.0, f64::max)
}

/// Default tolerance for [`biorthogonality_residual`]:
/// `1e-10 * d * max_k ||phi_k|| * max_m ||psi_m||`.
pub fn default_biorthogonality_tolerance(pair: &TruncatedPair) -> f64 {
    let max_col = |m: &ComplexMatrix| {
        (0..m.cols())
            .map(|k| vector_norm(&m.column_vector(k)))
            .fold(0.0, f64::max)
    };
    BIORTHOGONALITY_REL * pair.dim() as f64 * max_col(pair.phi()) * max_col(pair.psi())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegularityStatus {
    Regular,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityVerdict {
    pub status: RegularityStatus,
    pub rank_phi: usize,
    pub rank_psi: usize,
    /// Unit vector orthogonal to the span of `Phi` (only when `n < d`).
    pub witness_phi: Option<DVector<C64>>,
    /// Unit vector orthogonal to the span of `Psi` (only when `n < d`).
    pub witness_psi: Option<DVector<C64>>,
}

impl RegularityVerdict {
    pub fn is_regular(&self) -> bool {
        self.status == RegularityStatus::Regular
    }
}

pub fn regularity_check(pair: &TruncatedPair) -> Result<RegularityVerdict> {
    regularity_check_with(pair, default_biorthogonality_tolerance(pair))
}

/// Regular iff `n = d` (square biorthogonal matrices are invertible).
/// Otherwise the verdict is indeterminate and carries witnesses taken from
/// the orthogonal complement of the leading left singular vectors.
pub fn regularity_check_with(pair: &TruncatedPair, tolerance: f64) -> Result<RegularityVerdict> {
    let residual = biorthogonality_residual(pair);
    if residual > tolerance {
        return Err(Error::NotBiorthogonal {
            residual,
            tolerance,
        });
    }
    let svd_phi = numerics::svd(pair.phi())?;
    let svd_psi = numerics::svd(pair.psi())?;
    let rank_phi = svd_phi.rank(RANK_REL);
    let rank_psi = svd_psi.rank(RANK_REL);
    if pair.is_square() {
        return Ok(RegularityVerdict {
            status: RegularityStatus::Regular,
            rank_phi,
            rank_psi,
            witness_phi: None,
            witness_psi: None,
        });
    }
    Ok(RegularityVerdict {
        status: RegularityStatus::Indeterminate,
        rank_phi,
        rank_psi,
        witness_phi: Some(complement_witness(&svd_phi, rank_phi)),
        witness_psi: Some(complement_witness(&svd_psi, rank_psi)),
    })
}

fn complement_witness(svd: &numerics::Svd, rank: usize) -> DVector<C64> {
    let basis: Vec<DVector<C64>> = (0..rank).map(|k| svd.u.column_vector(k)).collect();
    let mut w = numerics::orthonormal_completion(&basis, svd.u.rows());
    // fix the global phase: largest entry real and positive
    if let Some(big) = w
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
    {
        if big.norm() > 0.0 {
            let phase = big.conj() / big.norm();
            w.iter_mut().for_each(|z| *z *= phase);
        }
    }
    w
}

/// `T_e = Phi E^H` and `K_e = Psi E^H`: the operators sending `e_k` to
/// `phi_k` and `psi_k`.
#[derive(Debug, Clone)]
pub struct TransitionOperators {
    pub t_e: ComplexMatrix,
    pub k_e: ComplexMatrix,
    /// Columns are the basis vectors `e_k`.
    pub onb: ComplexMatrix,
}

pub(crate) fn check_unitary(onb: &ComplexMatrix, d: usize) -> Result<()> {
    if onb.rows() != d || onb.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "basis is {}x{}, expected {d}x{d}",
            onb.rows(),
            onb.cols()
        )));
    }
    let deviation = onb.unitarity_defect();
    let tolerance = UNITARITY_REL * d as f64;
    if deviation > tolerance {
        return Err(Error::NotUnitary {
            deviation,
            tolerance,
        });
    }
    Ok(())
}

pub fn build_transition(pair: &TruncatedPair, onb: &ComplexMatrix) -> Result<TransitionOperators> {
    if !regularity_check(pair)?.is_regular() {
        return Err(Error::NotRegular {
            dim: pair.dim(),
            count: pair.count(),
        });
    }
    let d = pair.dim();
    check_unitary(onb, d)?;
    let e_h = onb.adjoint();
    let t_e = pair.phi() * &e_h;
    let k_e = pair.psi() * &e_h;

    // K_e^H T_e = I on the whole space
    let kappa = numerics::condition_number(pair.phi())?;
    let residual = (&k_e.adjoint() * &t_e)
        .as_dmatrix()
        .iter()
        .enumerate()
        .fold(0.0, |acc, (idx, z)| {
            let delta = if idx % d == idx / d { 1.0 } else { 0.0 };
            f64::max(acc, (z - C64::new(delta, 0.0)).norm())
        });
    let tolerance = 1e-10 * d as f64 * kappa;
    if residual > tolerance {
        return Err(Error::NotBiorthogonal {
            residual,
            tolerance,
        });
    }
    Ok(TransitionOperators {
        t_e,
        k_e,
        onb: onb.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{frobenius_distance, random_unitary};

    fn diag_pair(t: &[f64]) -> TruncatedPair {
        let inv: Vec<f64> = t.iter().map(|x| 1.0 / x).collect();
        TruncatedPair::new(
            ComplexMatrix::from_real_diagonal(t),
            ComplexMatrix::from_real_diagonal(&inv),
            "diag",
        )
        .unwrap()
    }

    fn shifted_example(d: usize) -> TruncatedPair {
        let n = d - 1;
        let mut phi = vec![0.0; d * n];
        let mut psi = vec![0.0; d * n];
        for k in 0..n {
            phi[(k + 1) * n + k] = 1.0;
            phi[k] = 1.0;
            psi[(k + 1) * n + k] = 1.0;
        }
        TruncatedPair::new(
            ComplexMatrix::from_real_rows(d, n, &phi).unwrap(),
            ComplexMatrix::from_real_rows(d, n, &psi).unwrap(),
            "example",
        )
        .unwrap()
    }

    #[test]
    fn shape_errors() {
        let a = ComplexMatrix::identity(3);
        let b = ComplexMatrix::zeros(3, 2);
        assert!(matches!(
            TruncatedPair::new(a.clone(), b, ""),
            Err(Error::DimensionMismatch(_))
        ));
        let wide = ComplexMatrix::from_real_rows(2, 3, &[1., 0., 1., 0., 1., 1.]).unwrap();
        assert!(matches!(
            TruncatedPair::new(wide.clone(), wide, ""),
            Err(Error::DimensionMismatch(_))
        ));
        let zero_col = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            TruncatedPair::new(zero_col, ComplexMatrix::identity(2), ""),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn residual_examples() {
        let id =
            TruncatedPair::new(ComplexMatrix::identity(3), ComplexMatrix::identity(3), "").unwrap();
        assert_eq!(biorthogonality_residual(&id), 0.0);
        assert_eq!(biorthogonality_residual(&diag_pair(&[1.0, 2.0])), 0.0);
        // psi_1 doubled: (phi_1 | 2 psi_1) = 2
        let doubled = TruncatedPair::new(
            ComplexMatrix::from_real_diagonal(&[1.0, 2.0]),
            ComplexMatrix::from_real_diagonal(&[1.0, 1.0]),
            "",
        )
        .unwrap();
        assert_eq!(biorthogonality_residual(&doubled), 1.0);
        assert!(matches!(
            regularity_check(&doubled),
            Err(Error::NotBiorthogonal { .. })
        ));
    }

    #[test]
    fn identity_is_regular() {
        let id =
            TruncatedPair::new(ComplexMatrix::identity(4), ComplexMatrix::identity(4), "").unwrap();
        let v = regularity_check(&id).unwrap();
        assert_eq!(v.status, RegularityStatus::Regular);
        assert_eq!((v.rank_phi, v.rank_psi), (4, 4));
        assert!(v.witness_phi.is_none() && v.witness_psi.is_none());
        assert!(regularity_check(&diag_pair(&[0.5, 3.0, 7.0]))
            .unwrap()
            .is_regular());
    }

    #[test]
    fn shifted_example_is_indeterminate_with_exact_witness() {
        let p = shifted_example(5);
        assert_eq!(p.count(), 4);
        assert_eq!(biorthogonality_residual(&p), 0.0);
        let v = regularity_check(&p).unwrap();
        assert_eq!(v.status, RegularityStatus::Indeterminate);
        assert_eq!((v.rank_phi, v.rank_psi), (4, 4));
        let w = v.witness_psi.unwrap();
        let mut e0 = DVector::<C64>::zeros(5);
        e0[0] = C64::new(1.0, 0.0);
        assert_eq!(w, e0);
        assert_eq!(vector_norm(&(p.psi().adjoint().apply(&w))), 0.0);

        let wphi = v.witness_phi.unwrap();
        assert!((vector_norm(&wphi) - 1.0).abs() < 1e-14);
        assert!(vector_norm(&p.phi().adjoint().apply(&wphi)) <= 1e-10);
    }

    #[test]
    fn transition_examples() {
        let p = diag_pair(&[1.0, 2.0]);
        let tr = build_transition(&p, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(tr.t_e, ComplexMatrix::from_real_diagonal(&[1.0, 2.0]));
        assert_eq!(tr.k_e, ComplexMatrix::from_real_diagonal(&[1.0, 0.5]));

        let id =
            TruncatedPair::new(ComplexMatrix::identity(3), ComplexMatrix::identity(3), "").unwrap();
        let e = random_unitary(3, 5);
        let tr = build_transition(&id, &e).unwrap();
        assert_eq!(tr.t_e, e.adjoint());

        // Phi = [[1,1],[0,1]], E = H/sqrt2: Phi E^H = (1/sqrt2) [[2,0],[1,-1]]
        let phi = ComplexMatrix::from_real_rows(2, 2, &[1., 1., 0., 1.]).unwrap();
        let psi = ComplexMatrix::from_real_rows(2, 2, &[1., 0., -1., 1.]).unwrap();
        let p = TruncatedPair::new(phi, psi, "golden").unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let e = ComplexMatrix::from_real_rows(2, 2, &[r, r, r, -r]).unwrap();
        let tr = build_transition(&p, &e).unwrap();
        let expect = ComplexMatrix::from_real_rows(2, 2, &[2.0 * r, 0.0, r, -r]).unwrap();
        assert!(frobenius_distance(&tr.t_e, &expect) < 1e-15);
        for k in 0..2 {
            let got = tr.t_e.apply(&e.column_vector(k));
            assert!(vector_norm(&(got - p.phi_vector(k))) < 1e-15);
        }
    }

    #[test]
    fn transition_errors() {
        let p = shifted_example(4);
        assert!(matches!(
            build_transition(&p, &ComplexMatrix::identity(4)),
            Err(Error::NotRegular { .. })
        ));
        let id =
            TruncatedPair::new(ComplexMatrix::identity(2), ComplexMatrix::identity(2), "").unwrap();
        let not_unitary = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        assert!(matches!(
            build_transition(&id, &not_unitary),
            Err(Error::NotUnitary { .. })
        ));
    }
}
