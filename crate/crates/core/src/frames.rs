//! Frame operators, Bessel bounds and the Riesz / semi-Riesz classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::CanonicalForm;
use crate::error::{Error, Result};
use crate::families::PairFamily;
use crate::numerics::vector_norm;
use crate::numerics::{self, random_unit_vector, random_unitary, seeded_rng, ComplexMatrix};
use crate::pair::{regularity_check, TruncatedPair};

/// Default relative ratio tolerance of the plateau rule.
pub const DEFAULT_GROWTH_TOL: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct FrameData {
    /// `Phi Phi^H`
    pub s_phi: ComplexMatrix,
    /// `Psi Psi^H`
    pub s_psi: ComplexMatrix,
    /// Bessel bound of `phi`, `lambda_max(S_phi)`.
    pub r_phi: f64,
    /// Bessel bound of `psi`, `lambda_max(S_psi)`.
    pub r_psi: f64,
    /// Largest singular value of `Phi` (`||T_f||` for a regular pair).
    pub sigma_max: f64,
    /// Smallest singular value of `Phi` (`1 / ||T_f^{-1}||` for a regular pair).
    pub sigma_min: f64,
}

/// Computes `S_phi`, `S_psi` and the Bessel bounds. Works for any pair.
///
/// The bounds come from singular values (`r = sigma_max^2`), which is more
/// accurate than an eigensolve of the Gram-type product.
pub fn frame_operators(pair: &TruncatedPair) -> Result<FrameData> {
    let s_phi = pair.phi() * &pair.phi().adjoint();
    let s_psi = pair.psi() * &pair.psi().adjoint();
    let sv_phi = numerics::svd(pair.phi())?;
    let sv_psi = numerics::svd(pair.psi())?;
    Ok(FrameData {
        s_phi,
        s_psi,
        r_phi: sv_phi.sigma_max().powi(2),
        r_psi: sv_psi.sigma_max().powi(2),
        sigma_max: sv_phi.sigma_max(),
        sigma_min: sv_phi.sigma_min(),
    })
}

/// Relative residuals of the frame-operator identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameIdentityResiduals {
    /// `||S_phi - T_e T_e^H||_F / ||S_phi||_F`
    pub s_phi_factorization: f64,
    /// `||S_psi - (T_e^{-1})^H T_e^{-1}||_F / ||S_psi||_F`
    pub s_psi_factorization: f64,
    /// `||S_phi S_psi - I||_F / sqrt(d)`
    pub phi_psi_inverse: f64,
    /// `||S_psi S_phi - I||_F / sqrt(d)`
    pub psi_phi_inverse: f64,
    /// `max_k ||S_phi psi_k - phi_k|| / ||phi_k||`
    pub s_phi_maps_psi: f64,
    /// `max_k ||S_psi phi_k - psi_k|| / ||psi_k||`
    pub s_psi_maps_phi: f64,
}

impl FrameIdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.s_phi_factorization,
            self.s_psi_factorization,
            self.phi_psi_inverse,
            self.psi_phi_inverse,
            self.s_phi_maps_psi,
            self.s_psi_maps_phi,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks the frame identities with `T_e = Phi E^H` and
/// `T_e^{-1} = E F^H T_f^{-1}` (standard basis when `onb` is `None`).
pub fn verify_frame_identities(
    pair: &TruncatedPair,
    cf: &CanonicalForm,
    onb: Option<&ComplexMatrix>,
) -> Result<FrameIdentityResiduals> {
    if !pair.is_square() {
        return Err(Error::NotRegular {
            dim: pair.dim(),
            count: pair.count(),
        });
    }
    let d = pair.dim();
    if cf.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "canonical form has dimension {}, pair has {d}",
            cf.dim()
        )));
    }
    let identity = ComplexMatrix::identity(d);
    let e = onb.unwrap_or(&identity);
    crate::pair::check_unitary(e, d)?;

    let t_e = pair.phi() * &e.adjoint();
    let t_e_inv = &(e * &cf.f.adjoint()) * &cf.tf_inv;
    let s_phi = pair.phi() * &pair.phi().adjoint();
    let s_psi = pair.psi() * &pair.psi().adjoint();
    let sqrt_d = (d as f64).sqrt();

    let rel = |a: &ComplexMatrix, b: &ComplexMatrix| {
        numerics::frobenius_distance(a, b) / b.frobenius_norm()
    };
    let column_worst = |op: &ComplexMatrix, input: &ComplexMatrix, target: &ComplexMatrix| {
        let image = op * input;
        (0..d).fold(0.0, |acc: f64, k| {
            let t = target.column_vector(k);
            let diff = image.column_vector(k) - &t;
            acc.max(vector_norm(&diff) / vector_norm(&t))
        })
    };

    Ok(FrameIdentityResiduals {
        s_phi_factorization: rel(&(&t_e * &t_e.adjoint()), &s_phi),
        s_psi_factorization: rel(&(&t_e_inv.adjoint() * &t_e_inv), &s_psi),
        phi_psi_inverse: numerics::frobenius_distance(&(&s_phi * &s_psi), &identity) / sqrt_d,
        psi_phi_inverse: numerics::frobenius_distance(&(&s_psi * &s_phi), &identity) / sqrt_d,
        s_phi_maps_psi: column_worst(&s_phi, pair.psi(), pair.phi()),
        s_psi_maps_phi: column_worst(&s_psi, pair.phi(), pair.psi()),
    })
}

/// Largest sampled Bessel sums `sum_k |(x|phi_k)|^2` and `sum_k |(x|psi_k)|^2`
/// over `probes` seeded unit vectors `x`.
pub fn bessel_check(pair: &TruncatedPair, probes: usize, seed: u64) -> Result<(f64, f64)> {
    if probes == 0 {
        return Err(Error::BadParameter(
            "bessel_check needs at least one probe".into(),
        ));
    }
    let mut rng = seeded_rng(seed);
    let phi_h = pair.phi().adjoint();
    let psi_h = pair.psi().adjoint();
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..probes {
        let x = random_unit_vector(pair.dim(), &mut rng);
        worst.0 = worst.0.max(vector_norm(&phi_h.apply(&x)).powi(2));
        worst.1 = worst.1.max(vector_norm(&psi_h.apply(&x)).powi(2));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Both `phi` and `psi` are Bessel.
    Riesz,
    /// Only `phi` is Bessel (`sigma_max` bounded, `sigma_min` decays).
    SemiRieszPhiBessel,
    /// Only `psi` is Bessel (`sigma_min` bounded, `sigma_max` grows).
    SemiRieszPsiBessel,
    /// Neither is Bessel.
    NonRiesz,
    /// The traces fit no rule.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    Bounded,
    Unbounded,
    Unclear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub dims: Vec<usize>,
    pub sigma_max_trace: Vec<f64>,
    pub sigma_min_trace: Vec<f64>,
    pub growth_tol: f64,
    /// Trend of `sigma_max` (unbounded = grows).
    pub sigma_max_trend: Trend,
    /// Trend of `sigma_min` (unbounded = `1/sigma_min` grows).
    pub sigma_min_trend: Trend,
}

/// Plateau rule on the last two ratios of an ascending trace.
///
/// With `growing = true` a trace is bounded when both ratios are at most
/// `1 + tol` and unbounded when both exceed it. With `growing = false` the
/// trace is inverted: bounded when both ratios are at least `1 - tol`,
/// unbounded when both fall below.
pub fn plateau_trend(trace: &[f64], growth_tol: f64, growing: bool) -> Trend {
    let n = trace.len();
    if n < 3 {
        return Trend::Unclear;
    }
    let r1 = trace[n - 2] / trace[n - 3];
    let r2 = trace[n - 1] / trace[n - 2];
    if !(r1.is_finite() && r2.is_finite()) {
        return Trend::Unclear;
    }
    let (bounded, unbounded) = if growing {
        let hi = 1.0 + growth_tol;
        (r1 <= hi && r2 <= hi, r1 > hi && r2 > hi)
    } else {
        let lo = 1.0 - growth_tol;
        (r1 >= lo && r2 >= lo, r1 < lo && r2 < lo)
    };
    if bounded {
        Trend::Bounded
    } else if unbounded {
        Trend::Unbounded
    } else {
        Trend::Unclear
    }
}

pub fn verdict_from_trends(sigma_max: Trend, sigma_min: Trend) -> Verdict {
    match (sigma_max, sigma_min) {
        (Trend::Bounded, Trend::Bounded) => Verdict::Riesz,
        (Trend::Bounded, Trend::Unbounded) => Verdict::SemiRieszPhiBessel,
        (Trend::Unbounded, Trend::Bounded) => Verdict::SemiRieszPsiBessel,
        (Trend::Unbounded, Trend::Unbounded) => Verdict::NonRiesz,
        _ => Verdict::Inconclusive,
    }
}

/// Classifies a family from the singular values of `Phi` over `dims`.
pub fn classify_sweep(
    family: &PairFamily,
    dims: &[usize],
    growth_tol: f64,
) -> Result<Classification> {
    sweep_impl(family, dims, growth_tol, None)
}

/// As [`classify_sweep`], but measures `T_e = Phi E^H` with a seeded random
/// orthonormal basis `E` per dimension. The verdict must not change.
pub fn classify_sweep_random_onb(
    family: &PairFamily,
    dims: &[usize],
    growth_tol: f64,
    seed: u64,
) -> Result<Classification> {
    sweep_impl(family, dims, growth_tol, Some(seed))
}

pub(crate) fn check_sweep_dims(dims: &[usize], growth_tol: f64) -> Result<()> {
    if dims.len() < 3 {
        return Err(Error::BadParameter(format!(
            "a sweep needs at least 3 dimensions, got {}",
            dims.len()
        )));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadParameter(
            "sweep dimensions must be strictly ascending".into(),
        ));
    }
    if dims[0] < 2 {
        return Err(Error::BadParameter(
            "sweep dimensions must be at least 2".into(),
        ));
    }
    if !(growth_tol > 0.0 && growth_tol < 1.0) {
        return Err(Error::BadParameter(format!(
            "growth_tol = {growth_tol} must lie in (0, 1)"
        )));
    }
    Ok(())
}

fn sweep_impl(
    family: &PairFamily,
    dims: &[usize],
    growth_tol: f64,
    onb_seed: Option<u64>,
) -> Result<Classification> {
    check_sweep_dims(dims, growth_tol)?;
    let per_dim: Vec<(f64, f64)> = dims
        .par_iter()
        .map(|&d| -> Result<(f64, f64)> {
            let pair = family.generate(d)?;
            let verdict = regularity_check(&pair)?;
            if !verdict.is_regular() {
                return Err(Error::FamilyNotRegular {
                    dim: d,
                    reason: format!(
                        "{family} gives {} vectors of rank {}/{} in dimension {d}",
                        pair.count(),
                        verdict.rank_phi,
                        verdict.rank_psi
                    ),
                });
            }
            let t = match onb_seed {
                None => pair.phi().clone(),
                Some(seed) => {
                    pair.phi() * &random_unitary(d, seed.wrapping_add(d as u64)).adjoint()
                }
            };
            let sv = numerics::svd(&t)?;
            Ok((sv.sigma_max(), sv.sigma_min()))
        })
        .collect::<Result<Vec<_>>>()?;
    let sigma_max_trace: Vec<f64> = per_dim.iter().map(|p| p.0).collect();
    let sigma_min_trace: Vec<f64> = per_dim.iter().map(|p| p.1).collect();
    let sigma_max_trend = plateau_trend(&sigma_max_trace, growth_tol, true);
    let sigma_min_trend = plateau_trend(&sigma_min_trace, growth_tol, false);
    Ok(Classification {
        verdict: verdict_from_trends(sigma_max_trend, sigma_min_trend),
        dims: dims.to_vec(),
        sigma_max_trace,
        sigma_min_trace,
        growth_tol,
        sigma_max_trend,
        sigma_min_trend,
    })
}
