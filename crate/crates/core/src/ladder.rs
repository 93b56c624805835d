//! Lowering, raising and number operators built on the canonical form, and
//! the algebraic identities they satisfy below the truncation edge.
//!
//! With `a` the truncated shift (`a e_{k+1} = sqrt(k+1) e_k`) and
//! `a_f = F a F^H` the same shift in the canonical basis `f`:
//!
//! ```text
//! A = T_f a_f T_f^{-1}      B = T_f a_f^H T_f^{-1}
//! A^+ = T_f^{-1} a_f^H T_f  B^+ = T_f^{-1} a_f T_f
//! N = T_f a_f^H a_f T_f^{-1}, N^+ = T_f^{-1} a_f^H a_f T_f
//! ```
//!
//! Since `Phi = T_f F` and `Psi = T_f^{-1} F` these reduce to
//! `A = Phi a Psi^H`, `B = Phi a^H Psi^H` and so on.
//!
//! The number operator uses `a^H a = diag(0, 1, ..., d-1)`, i.e. coefficient
//! `k+1` on `f_{k+1}`. A square-root coefficient would contradict the
//! eigenvalue relation `N phi_n = n phi_n`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::canonical::CanonicalForm;
use crate::error::{Error, Result};
use crate::numerics::{self, frobenius_distance, vector_norm, ComplexMatrix, C64};
use crate::pair::{check_unitary, TruncatedPair};

/// Ladder construction is refused above this `kappa(T_f)`: residuals scale
/// with `kappa^2` and would swamp double precision.
pub const LADDER_KAPPA_LIMIT: f64 = 1e7;

/// The truncated shift: `M[k][k+1] = sqrt(k+1)` for `k <= d-2`.
pub fn standard_ladder(d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    let mut m = DMatrix::<C64>::zeros(d, d);
    for k in 0..d - 1 {
        m[(k, k + 1)] = C64::new(((k + 1) as f64).sqrt(), 0.0);
    }
    Ok(ComplexMatrix::wrap(m))
}

#[derive(Debug, Clone)]
pub struct LadderSet {
    /// Lowering operator for `phi`.
    pub a: ComplexMatrix,
    /// Raising operator for `phi`.
    pub b: ComplexMatrix,
    /// Raising operator for `psi`.
    pub adag: ComplexMatrix,
    /// Lowering operator for `psi`.
    pub bdag: ComplexMatrix,
    /// Number operator for `phi`.
    pub n: ComplexMatrix,
    /// Number operator for `psi`.
    pub ndag: ComplexMatrix,
    /// The truncated shift in the standard basis.
    pub a_std: ComplexMatrix,
    pub cf: CanonicalForm,
}

impl LadderSet {
    pub fn dim(&self) -> usize {
        self.a.rows()
    }
}

fn number_diagonal(d: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..d).map(|k| k as f64).collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// Builds all six operators from `cf`.
pub fn build_ladder_set(cf: &CanonicalForm) -> Result<LadderSet> {
    let d = cf.dim();
    let a_std = standard_ladder(d)?;
    let kappa = cf.kappa();
    if kappa.is_nan() || kappa > LADDER_KAPPA_LIMIT {
        return Err(Error::ConditioningExceeded {
            kappa,
            limit: LADDER_KAPPA_LIMIT,
        });
    }
    let a_f = &(&cf.f * &a_std) * &cf.f.adjoint();
    let a_f_h = a_f.adjoint();
    let count_f = &(&cf.f * &number_diagonal(d)) * &cf.f.adjoint();
    let conj = |m: &ComplexMatrix| &(&cf.tf * m) * &cf.tf_inv;
    let conj_inv = |m: &ComplexMatrix| &(&cf.tf_inv * m) * &cf.tf;
    Ok(LadderSet {
        a: conj(&a_f),
        b: conj(&a_f_h),
        adag: conj_inv(&a_f_h),
        bdag: conj_inv(&a_f),
        n: conj(&count_f),
        ndag: conj_inv(&count_f),
        a_std,
        cf: cf.clone(),
    })
}

/// `(A_e, B_e, N_e)` built from `T_e = Phi E^H` and its LU inverse, with the
/// shift taken in the basis `E`.
pub fn ladder_from_onb(
    pair: &TruncatedPair,
    onb: &ComplexMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix, ComplexMatrix)> {
    let d = pair.dim();
    if !pair.is_square() {
        return Err(Error::NotRegular {
            dim: d,
            count: pair.count(),
        });
    }
    check_unitary(onb, d)?;
    let a_std = standard_ladder(d)?;
    let t_e = pair.phi() * &onb.adjoint();
    let t_e_inv = numerics::inverse(&t_e)?;
    let in_e = |m: &ComplexMatrix| &(onb * m) * &onb.adjoint();
    let conj = |m: &ComplexMatrix| &(&t_e * &in_e(m)) * &t_e_inv;
    Ok((
        conj(&a_std),
        conj(&a_std.adjoint()),
        conj(&number_diagonal(d)),
    ))
}

/// Largest relative difference between the canonical `A`, `B`, `N` and the
/// ones built from `onb`.
pub fn basis_independence_residual(
    pair: &TruncatedPair,
    ls: &LadderSet,
    onb: &ComplexMatrix,
) -> Result<f64> {
    let (a, b, n) = ladder_from_onb(pair, onb)?;
    let rel = |x: &ComplexMatrix, y: &ComplexMatrix| frobenius_distance(x, y) / y.frobenius_norm();
    Ok(rel(&a, &ls.a).max(rel(&b, &ls.b)).max(rel(&n, &ls.n)))
}

fn check_dims(pair: &TruncatedPair, ls: &LadderSet) -> Result<()> {
    if !pair.is_square() || pair.dim() != ls.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pair is {}x{}, ladder set has dimension {}",
            pair.dim(),
            pair.count(),
            ls.dim()
        )));
    }
    Ok(())
}

fn rel_residual(lhs: &DVector<C64>, target: &DVector<C64>, scale: f64) -> f64 {
    vector_norm(&(lhs - target)) / scale
}

/// Residuals of the ladder relations, each divided by the norm of the input
/// vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderActionResiduals {
    /// `A phi_n = sqrt(n) phi_{n-1}` for `n >= 1`.
    pub lowering_phi: f64,
    /// `B phi_n = sqrt(n+1) phi_{n+1}` for `n <= d-2`.
    pub raising_phi: f64,
    /// `A^+ psi_n = sqrt(n+1) psi_{n+1}` for `n <= d-2`.
    pub raising_psi: f64,
    /// `B^+ psi_n = sqrt(n) psi_{n-1}` for `n >= 1`.
    pub lowering_psi: f64,
    /// `||A phi_0||`
    pub vacuum_phi: f64,
    /// `||B^+ psi_0||`
    pub vacuum_psi: f64,
    /// `||B phi_{d-1}||`; the relation has no target inside the truncation.
    pub edge_raising_phi: f64,
    /// `||A^+ psi_{d-1}||`; likewise.
    pub edge_raising_psi: f64,
}

impl LadderActionResiduals {
    /// Worst of the four relations and both vacuum terms (edge excluded).
    pub fn max(&self) -> f64 {
        [
            self.lowering_phi,
            self.raising_phi,
            self.raising_psi,
            self.lowering_psi,
            self.vacuum_phi,
            self.vacuum_psi,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn verify_ladder_action(pair: &TruncatedPair, ls: &LadderSet) -> Result<LadderActionResiduals> {
    check_dims(pair, ls)?;
    let d = pair.dim();
    let phi = pair.phi();
    let psi = pair.psi();
    let a_phi = &ls.a * phi;
    let b_phi = &ls.b * phi;
    let adag_psi = &ls.adag * psi;
    let bdag_psi = &ls.bdag * psi;
    let phi_norm: Vec<f64> = (0..d).map(|k| vector_norm(&phi.column_vector(k))).collect();
    let psi_norm: Vec<f64> = (0..d).map(|k| vector_norm(&psi.column_vector(k))).collect();

    let mut r = LadderActionResiduals {
        lowering_phi: 0.0,
        raising_phi: 0.0,
        raising_psi: 0.0,
        lowering_psi: 0.0,
        vacuum_phi: vector_norm(&a_phi.column_vector(0)) / phi_norm[0],
        vacuum_psi: vector_norm(&bdag_psi.column_vector(0)) / psi_norm[0],
        edge_raising_phi: vector_norm(&b_phi.column_vector(d - 1)) / phi_norm[d - 1],
        edge_raising_psi: vector_norm(&adag_psi.column_vector(d - 1)) / psi_norm[d - 1],
    };
    for n in 1..d {
        let s = (n as f64).sqrt();
        r.lowering_phi = r.lowering_phi.max(rel_residual(
            &a_phi.column_vector(n),
            &(phi.column_vector(n - 1) * C64::new(s, 0.0)),
            phi_norm[n],
        ));
        r.lowering_psi = r.lowering_psi.max(rel_residual(
            &bdag_psi.column_vector(n),
            &(psi.column_vector(n - 1) * C64::new(s, 0.0)),
            psi_norm[n],
        ));
    }
    for n in 0..d - 1 {
        let s = ((n + 1) as f64).sqrt();
        r.raising_phi = r.raising_phi.max(rel_residual(
            &b_phi.column_vector(n),
            &(phi.column_vector(n + 1) * C64::new(s, 0.0)),
            phi_norm[n],
        ));
        r.raising_psi = r.raising_psi.max(rel_residual(
            &adag_psi.column_vector(n),
            &(psi.column_vector(n + 1) * C64::new(s, 0.0)),
            psi_norm[n],
        ));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorResiduals {
    /// Worst `||(C - I) phi_n|| / ||phi_n||` and `||(C' - I) psi_n|| / ||psi_n||`
    /// over `n <= d-2`, with `C = AB - BA`, `C' = B^+ A^+ - A^+ B^+`.
    pub lower_block_residual: f64,
    /// `||(C - I) phi_{d-1}|| / ||phi_{d-1}||`; equals `d` from the truncation.
    pub edge_norm: f64,
    /// `||(C' - I) psi_{d-1}|| / ||psi_{d-1}||`; also `d`.
    pub edge_norm_psi: f64,
}

/// Commutator checks, using `phi_n = T_f f_n` and `psi_n = T_f^{-1} f_n`
/// from the set's canonical form.
pub fn verify_commutators(ls: &LadderSet) -> CommutatorResiduals {
    let d = ls.dim();
    let identity = ComplexMatrix::identity(d);
    let c = &(&(&ls.a * &ls.b) - &(&ls.b * &ls.a)) - &identity;
    let c_psi = &(&(&ls.bdag * &ls.adag) - &(&ls.adag * &ls.bdag)) - &identity;
    let c_phi_img = &c * &ls.cf.phi();
    let c_psi_img = &c_psi * &ls.cf.psi();
    let phi = ls.cf.phi();
    let psi = ls.cf.psi();
    let ratio = |img: &ComplexMatrix, base: &ComplexMatrix, k: usize| {
        vector_norm(&img.column_vector(k)) / vector_norm(&base.column_vector(k))
    };
    let lower = (0..d - 1).fold(0.0f64, |acc, k| {
        acc.max(ratio(&c_phi_img, &phi, k))
            .max(ratio(&c_psi_img, &psi, k))
    });
    CommutatorResiduals {
        lower_block_residual: lower,
        edge_norm: ratio(&c_phi_img, &phi, d - 1),
        edge_norm_psi: ratio(&c_psi_img, &psi, d - 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VacuumResiduals {
    /// `max_n ||B^n phi_0 / sqrt(n!) - phi_n|| / ||phi_n||`
    pub phi: f64,
    /// `max_n ||(A^+)^n psi_0 / sqrt(n!) - psi_n|| / ||psi_n||`
    pub psi: f64,
}

impl VacuumResiduals {
    pub fn max(&self) -> f64 {
        self.phi.max(self.psi)
    }
}

/// Rebuilds every vector from the vacuum, dividing by `sqrt(n)` at step `n`.
pub fn build_from_vacuum(ls: &LadderSet, pair: &TruncatedPair) -> Result<VacuumResiduals> {
    check_dims(pair, ls)?;
    let chain = |op: &ComplexMatrix, basis: &ComplexMatrix| {
        let mut v = basis.column_vector(0);
        let mut worst = 0.0f64;
        for n in 1..basis.cols() {
            v = op.apply(&v) / C64::new((n as f64).sqrt(), 0.0);
            let target = basis.column_vector(n);
            worst = worst.max(rel_residual(&v, &target, vector_norm(&target)));
        }
        worst
    };
    Ok(VacuumResiduals {
        phi: chain(&ls.b, pair.phi()),
        psi: chain(&ls.adag, pair.psi()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumberOperatorResiduals {
    /// `max_n ||N phi_n - n phi_n|| / ||phi_n||`
    pub eigen_phi: f64,
    /// `max_n ||N^+ psi_n - n psi_n|| / ||psi_n||`
    pub eigen_psi: f64,
    /// Eigenvalues of `N` from its Schur form, sorted by real part.
    pub eigenvalues: Vec<C64>,
    /// `max_k |lambda_k - k|`
    pub eigenvalue_deviation: f64,
    /// `||BA - N||_F / ||N||_F`
    pub product_ba: f64,
    /// `||A^+ B^+ - N^+||_F / ||N^+||_F`
    pub product_adag_bdag: f64,
    /// `||AB - T_f a_f a_f^H T_f^{-1}||_F / ||AB||_F`
    pub product_ab: f64,
    /// `max(|A^+ - A^H|, |B^+ - B^H|)` elementwise
    pub adjoint_pairing: f64,
}

pub fn verify_number_operators(
    ls: &LadderSet,
    pair: &TruncatedPair,
) -> Result<NumberOperatorResiduals> {
    check_dims(pair, ls)?;
    let d = pair.dim();
    let cf = &ls.cf;
    let eigen = |op: &ComplexMatrix, basis: &ComplexMatrix| {
        let img = op * basis;
        (0..d).fold(0.0f64, |acc, n| {
            let target = basis.column_vector(n) * C64::new(n as f64, 0.0);
            acc.max(rel_residual(
                &img.column_vector(n),
                &target,
                vector_norm(&basis.column_vector(n)),
            ))
        })
    };

    let mut eigenvalues = numerics::general_eigenvalues(&ls.n)?;
    eigenvalues.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    let eigenvalue_deviation = eigenvalues.iter().enumerate().fold(0.0f64, |acc, (k, z)| {
        acc.max((z - C64::new(k as f64, 0.0)).norm())
    });

    let rel = |x: &ComplexMatrix, y: &ComplexMatrix| frobenius_distance(x, y) / y.frobenius_norm();
    let ab = &ls.a * &ls.b;
    let a_f = &(&cf.f * &ls.a_std) * &cf.f.adjoint();
    let ab_target = &(&cf.tf * &(&a_f * &a_f.adjoint())) * &cf.tf_inv;
    let adjoint_pairing = (&ls.adag - &ls.a.adjoint())
        .max_abs()
        .max((&ls.bdag - &ls.b.adjoint()).max_abs());

    Ok(NumberOperatorResiduals {
        eigen_phi: eigen(&ls.n, pair.phi()),
        eigen_psi: eigen(&ls.ndag, pair.psi()),
        eigenvalues,
        eigenvalue_deviation,
        product_ba: rel(&(&ls.b * &ls.a), &ls.n),
        product_adag_bdag: rel(&(&ls.adag * &ls.bdag), &ls.ndag),
        product_ab: rel(&ab, &ab_target),
        adjoint_pairing,
    })
}
