//! Canonical orthonormal basis and metric operator of a regular pair.
//!
//! For any orthonormal basis `E`, the polar decomposition
//! `T_e^H = U |T_e^H|` yields the positive operator `T_f = |T_e^H|`
//! (independent of `E`) and the basis `f_n = U^H e_n`, with
//! `phi_n = T_f f_n` and `psi_n = T_f^{-1} f_n`.

use crate::error::{Error, Result};
use crate::numerics::{self, frobenius_distance, random_unitary, ComplexMatrix};
use crate::pair::{check_unitary, regularity_check, TruncatedPair};

/// Pairs with `kappa(T_f)` above this are refused.
pub const KAPPA_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// Unitary; column `n` is `f_n`.
    pub f: ComplexMatrix,
    /// Hermitian positive definite metric operator.
    pub tf: ComplexMatrix,
    /// `T_f^{-1}` from reciprocal eigenvalues; exactly Hermitian.
    pub tf_inv: ComplexMatrix,
    /// Eigenvalues of `T_f`, ascending.
    pub spectrum: Vec<f64>,
    /// Eigenvectors of `T_f` matching `spectrum`.
    pub tf_eigenvectors: ComplexMatrix,
}

impl CanonicalForm {
    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    /// `kappa(T_f) = lambda_max / lambda_min`.
    pub fn kappa(&self) -> f64 {
        self.spectrum[self.spectrum.len() - 1] / self.spectrum[0]
    }

    /// `T_f F`, which should reproduce `Phi`.
    pub fn phi(&self) -> ComplexMatrix {
        &self.tf * &self.f
    }

    /// `T_f^{-1} F`, which should reproduce `Psi`.
    pub fn psi(&self) -> ComplexMatrix {
        &self.tf_inv * &self.f
    }
}

/// Builds the canonical form from the basis `onb` (standard basis if `None`).
///
/// After the polar step `F` is recomputed as `T_f^{-1} Phi`, which pins
/// `f_n` to `phi_n` even when `T_f` has repeated eigenvalues.
pub fn canonical_form(pair: &TruncatedPair, onb: Option<&ComplexMatrix>) -> Result<CanonicalForm> {
    if !regularity_check(pair)?.is_regular() {
        return Err(Error::NotRegular {
            dim: pair.dim(),
            count: pair.count(),
        });
    }
    let d = pair.dim();
    let identity;
    let e = match onb {
        Some(e) => {
            check_unitary(e, d)?;
            e
        }
        None => {
            identity = ComplexMatrix::identity(d);
            &identity
        }
    };
    let t_e = pair.phi() * &e.adjoint();
    let polar = numerics::polar_left(&t_e.adjoint())?;
    let kappa = polar.spectrum[d - 1] / polar.spectrum[0];
    if kappa.is_nan() || kappa > KAPPA_LIMIT {
        return Err(Error::ConditioningExceeded {
            kappa,
            limit: KAPPA_LIMIT,
        });
    }
    let tf_inv = polar.positive_inverse();
    let f = &tf_inv * pair.phi();
    Ok(CanonicalForm {
        f,
        tf: polar.positive,
        tf_inv,
        spectrum: polar.spectrum,
        tf_eigenvectors: polar.eigenvectors,
    })
}

/// Residuals of the canonical-form invariants, each relative where a scale
/// exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalResiduals {
    /// `||Phi - T_f F||_F / ||Phi||_F`
    pub phi_reconstruction: f64,
    /// `||Psi - T_f^{-1} F||_F / ||Psi||_F`
    pub psi_reconstruction: f64,
    /// `max |F^H F - I|`
    pub unitarity: f64,
    /// `max |T_f T_f^{-1} - I|`
    pub inverse: f64,
    /// `max |T_f - T_f^H|`
    pub hermiticity: f64,
}

pub fn canonical_residuals(pair: &TruncatedPair, cf: &CanonicalForm) -> CanonicalResiduals {
    let d = cf.dim();
    let prod = &cf.tf * &cf.tf_inv;
    CanonicalResiduals {
        phi_reconstruction: frobenius_distance(pair.phi(), &cf.phi()) / pair.phi().frobenius_norm(),
        psi_reconstruction: frobenius_distance(pair.psi(), &cf.psi()) / pair.psi().frobenius_norm(),
        unitarity: cf.f.unitarity_defect(),
        inverse: (&prod - &ComplexMatrix::identity(d)).max_abs(),
        hermiticity: cf.tf.hermiticity_defect(),
    }
}

/// Largest pairwise `||T_f^(i) - T_f^(j)||_F / ||T_f^(0)||_F` over canonical
/// forms computed from `random_unitary(d, seed)` for each seed.
pub fn verify_onb_invariance(pair: &TruncatedPair, seeds: &[u64]) -> Result<f64> {
    if seeds.len() < 2 {
        return Err(Error::BadParameter(
            "ONB invariance needs at least two seeds".into(),
        ));
    }
    let d = pair.dim();
    let forms = seeds
        .iter()
        .map(|&s| canonical_form(pair, Some(&random_unitary(d, s))))
        .collect::<Result<Vec<_>>>()?;
    let scale = forms[0].tf.frobenius_norm();
    let mut worst: f64 = 0.0;
    for i in 0..forms.len() {
        for j in (i + 1)..forms.len() {
            worst = worst.max(frobenius_distance(&forms[i].tf, &forms[j].tf) / scale);
        }
    }
    Ok(worst)
}

/// `||T_e - T_g U_{e,g}||_F / ||T_e||_F` with `U_{e,g} = G E^H` (`e_k -> g_k`).
pub fn transition_factorization(
    pair: &TruncatedPair,
    onb_e: &ComplexMatrix,
    onb_g: &ComplexMatrix,
) -> Result<f64> {
    if !pair.is_square() {
        return Err(Error::NotRegular {
            dim: pair.dim(),
            count: pair.count(),
        });
    }
    let d = pair.dim();
    check_unitary(onb_e, d)?;
    check_unitary(onb_g, d)?;
    let t_e = pair.phi() * &onb_e.adjoint();
    let t_g = pair.phi() * &onb_g.adjoint();
    let u_eg = onb_g * &onb_e.adjoint();
    Ok(frobenius_distance(&t_e, &(&t_g * &u_eg)) / t_e.frobenius_norm())
}
