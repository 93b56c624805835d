//! The analysis pipeline and its JSON report.
//!
//! Stages run in order: biorthogonality, regularity, canonical form, frame
//! identities, ladder set, ladder verifications. A failed or inapplicable
//! stage stops the pipeline; the report keeps everything computed so far and
//! records why the rest was skipped.

use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::{canonical_form, canonical_residuals, verify_onb_invariance, CanonicalForm};
use crate::error::{Error, Result};
use crate::families::PairFamily;
use crate::frames::{self, bessel_check, frame_operators, verify_frame_identities, Classification};
use crate::ladder::{
    basis_independence_residual, build_from_vacuum, build_ladder_set, verify_commutators,
    verify_ladder_action, verify_number_operators,
};
use crate::numerics::{random_unitary, C64};
use crate::pair::{
    biorthogonality_residual, default_biorthogonality_tolerance, regularity_check_with,
    RegularityStatus, TruncatedPair,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECKS_FAILED: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;
pub const EXIT_INPUT_ERROR: i32 = 4;
pub const EXIT_CONDITIONING: i32 = 5;

const GENERATOR: &str = concat!("biortho ", env!("CARGO_PKG_VERSION"));

const NUMBER_OPERATOR_NOTE: &str =
    "number operators use coefficient (k+1) on f_(k+1) (N = T_f a_f^H a_f T_f^-1); \
a sqrt(k+1) coefficient would contradict N phi_n = n phi_n, B A = N and the vacuum chain";

const EDGE_NOTE: &str = "identities are checked below the truncation edge; \
B phi_(d-1), A^+ psi_(d-1) and the commutator on phi_(d-1) are reported separately";

/// Tolerance multiplier and seed for randomized checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisConfig {
    /// Multiplies every default tolerance.
    pub tol_scale: f64,
    pub seed: u64,
    pub bessel_probes: usize,
    /// Random bases used by the invariance checks.
    pub onb_trials: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            tol_scale: 1.0,
            seed: 0,
            bessel_probes: 1000,
            onb_trials: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `value <= tolerance`.
    AtMost,
    /// Passes when `value > tolerance`.
    GreaterThan,
}

/// A measured value and the bound it was judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn at_most(value: f64, tolerance: f64) -> Self {
        Check {
            value,
            tolerance,
            comparison: Comparison::AtMost,
            passed: value <= tolerance,
        }
    }

    pub fn greater_than(value: f64, tolerance: f64) -> Self {
        Check {
            value,
            tolerance,
            comparison: Comparison::GreaterThan,
            passed: value > tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub source: String,
    pub label: String,
    pub dim: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub status: RegularityStatus,
    pub rank_phi: usize,
    pub rank_psi: usize,
    /// Unit vector orthogonal to every `phi_k`, if any.
    pub witness_phi: Option<Vec<[f64; 2]>>,
    /// Unit vector orthogonal to every `psi_k`, if any.
    pub witness_psi: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalReport {
    /// Eigenvalues of `T_f`, ascending.
    pub spectrum: Vec<f64>,
    pub kappa: f64,
    pub spectrum_min: Check,
    pub phi_reconstruction: Check,
    pub psi_reconstruction: Check,
    pub f_unitarity: Check,
    pub tf_hermiticity: Check,
    pub onb_invariance: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameReport {
    pub r_phi: f64,
    pub r_psi: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub s_phi_factorization: Check,
    pub s_psi_factorization: Check,
    pub phi_psi_inverse: Check,
    pub psi_phi_inverse: Check,
    pub s_phi_maps_psi: Check,
    pub s_psi_maps_phi: Check,
    pub bessel_phi: Check,
    pub bessel_psi: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub lowering_phi: Check,
    pub raising_phi: Check,
    pub raising_psi: Check,
    pub lowering_psi: Check,
    pub vacuum_phi: Check,
    pub vacuum_psi: Check,
    /// `||B phi_(d-1)|| / ||phi_(d-1)||`, outside the checked relations.
    pub edge_raising_phi: f64,
    /// `||A^+ psi_(d-1)|| / ||psi_(d-1)||`, outside the checked relations.
    pub edge_raising_psi: f64,
    pub commutator_lower_block: Check,
    /// Raw `||(AB - BA - I) phi_(d-1)|| / ||phi_(d-1)||`.
    pub commutator_edge_norm: f64,
    /// `|edge_norm - d| / d`.
    pub commutator_edge_deviation: Check,
    pub vacuum_chain_phi: Check,
    pub vacuum_chain_psi: Check,
    pub number_eigen_phi: Check,
    pub number_eigen_psi: Check,
    /// Eigenvalues of `N` sorted by real part, as `[re, im]`.
    pub number_eigenvalues: Vec<[f64; 2]>,
    pub number_eigenvalue_deviation: Check,
    pub product_ba_equals_n: Check,
    pub product_adag_bdag_equals_ndag: Check,
    pub product_ab: Check,
    pub adjoint_pairing: Check,
    pub basis_independence: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageNote {
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub generator: String,
    pub input: Provenance,
    pub config: AnalysisConfig,
    pub exit_code: i32,
    pub all_passed: bool,
    pub failed_checks: Vec<String>,
    pub biorthogonality: Check,
    pub regularity: Option<RegularityReport>,
    pub canonical: Option<CanonicalReport>,
    pub frames: Option<FrameReport>,
    pub ladder: Option<LadderReport>,
    pub errors: Vec<StageNote>,
    pub skipped: Vec<StageNote>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    /// Pretty JSON with a trailing newline. Key order follows field order.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }
}

fn pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn onb_seeds(config: &AnalysisConfig) -> Vec<u64> {
    (0..config.onb_trials.max(2) as u64)
        .map(|i| config.seed.wrapping_mul(1_000_003).wrapping_add(i))
        .collect()
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ConditioningExceeded { .. } | Error::SingularInput { .. } => EXIT_CONDITIONING,
        Error::NotRegular { .. } | Error::FamilyNotRegular { .. } => EXIT_INDETERMINATE,
        Error::Parse(_)
        | Error::Schema(_)
        | Error::Validation(_)
        | Error::Io(_)
        | Error::BadParameter(_) => EXIT_INPUT_ERROR,
        _ => EXIT_CHECKS_FAILED,
    }
}

struct Pipeline {
    report: AnalysisReport,
    stop_code: Option<i32>,
}

impl Pipeline {
    fn fail_stage(&mut self, stage: &str, err: &Error, rest: &[&str]) {
        self.report.errors.push(StageNote {
            stage: stage.into(),
            reason: err.to_string(),
        });
        self.skip(rest, &format!("{stage} did not complete"));
        self.stop_code = Some(exit_code_for(err));
    }

    fn skip(&mut self, stages: &[&str], reason: &str) {
        for s in stages {
            self.report.skipped.push(StageNote {
                stage: (*s).into(),
                reason: reason.into(),
            });
        }
    }
}

/// Runs every applicable check on `pair`. Stage errors are recorded in the
/// report, never returned.
pub fn analyze(pair: &TruncatedPair, source: &str, config: &AnalysisConfig) -> AnalysisReport {
    let s = config.tol_scale;
    let d = pair.dim();
    let mut p = Pipeline {
        report: AnalysisReport {
            generator: GENERATOR.into(),
            input: Provenance {
                source: source.into(),
                label: pair.label().into(),
                dim: d,
                count: pair.count(),
            },
            config: *config,
            exit_code: EXIT_PASS,
            all_passed: true,
            failed_checks: Vec::new(),
            biorthogonality: Check::at_most(
                biorthogonality_residual(pair),
                s * default_biorthogonality_tolerance(pair),
            ),
            regularity: None,
            canonical: None,
            frames: None,
            ladder: None,
            errors: Vec::new(),
            skipped: Vec::new(),
            notes: vec![NUMBER_OPERATOR_NOTE.into(), EDGE_NOTE.into()],
        },
        stop_code: None,
    };
    run_stages(&mut p, pair, config);
    finish(p)
}

fn run_stages(p: &mut Pipeline, pair: &TruncatedPair, config: &AnalysisConfig) {
    const AFTER_BIORTHO: &[&str] = &["regularity", "canonical", "frames", "ladder"];
    const AFTER_CANONICAL: &[&str] = &["frames", "ladder"];
    let s = config.tol_scale;
    let d = pair.dim();
    let df = d as f64;

    if !p.report.biorthogonality.passed {
        p.skip(AFTER_BIORTHO, "pair is not biorthogonal");
        return;
    }

    let verdict = match regularity_check_with(pair, p.report.biorthogonality.tolerance) {
        Ok(v) => v,
        Err(e) => return p.fail_stage("regularity", &e, &AFTER_BIORTHO[1..]),
    };
    let regular = verdict.is_regular();
    p.report.regularity = Some(RegularityReport {
        status: verdict.status,
        rank_phi: verdict.rank_phi,
        rank_psi: verdict.rank_psi,
        witness_phi: verdict.witness_phi.as_ref().map(|w| pairs(w.as_slice())),
        witness_psi: verdict.witness_psi.as_ref().map(|w| pairs(w.as_slice())),
    });
    if !regular {
        p.skip(
            &AFTER_BIORTHO[1..],
            "regularity is indeterminate; the canonical form needs count = dim with full rank",
        );
        p.stop_code = Some(EXIT_INDETERMINATE);
        return;
    }

    let cf = match canonical_form(pair, None) {
        Ok(cf) => cf,
        Err(e) => return p.fail_stage("canonical", &e, AFTER_CANONICAL),
    };
    let kappa = cf.kappa();
    let k2 = kappa * kappa;
    let onb_invariance = match verify_onb_invariance(pair, &onb_seeds(config)) {
        Ok(v) => v,
        Err(e) => return p.fail_stage("canonical", &e, AFTER_CANONICAL),
    };
    let cr = canonical_residuals(pair, &cf);
    p.report.canonical = Some(CanonicalReport {
        spectrum: cf.spectrum.clone(),
        kappa,
        spectrum_min: Check::greater_than(cf.spectrum[0], 0.0),
        phi_reconstruction: Check::at_most(cr.phi_reconstruction, s * 1e-10 * df),
        psi_reconstruction: Check::at_most(cr.psi_reconstruction, s * 1e-10 * df * kappa),
        f_unitarity: Check::at_most(cr.unitarity, s * 1e-11 * df),
        tf_hermiticity: Check::at_most(cr.hermiticity, s * 1e-12 * df * cf.spectrum[d - 1]),
        onb_invariance: Check::at_most(onb_invariance, s * 1e-9 * df),
    });

    match frame_stage(pair, &cf, config) {
        Ok(fr) => p.report.frames = Some(fr),
        Err(e) => return p.fail_stage("frames", &e, &["ladder"]),
    }

    let ls = match build_ladder_set(&cf) {
        Ok(ls) => ls,
        Err(e) => return p.fail_stage("ladder", &e, &[]),
    };
    let ladder = (|| -> Result<LadderReport> {
        let tol = s * 1e-9 * df * k2;
        let act = verify_ladder_action(pair, &ls)?;
        let comm = verify_commutators(&ls);
        let vac = build_from_vacuum(&ls, pair)?;
        let num = verify_number_operators(&ls, pair)?;
        let mut basis = 0.0f64;
        for seed in onb_seeds(config) {
            basis = basis.max(basis_independence_residual(
                pair,
                &ls,
                &random_unitary(d, seed),
            )?);
        }
        Ok(LadderReport {
            lowering_phi: Check::at_most(act.lowering_phi, tol),
            raising_phi: Check::at_most(act.raising_phi, tol),
            raising_psi: Check::at_most(act.raising_psi, tol),
            lowering_psi: Check::at_most(act.lowering_psi, tol),
            vacuum_phi: Check::at_most(act.vacuum_phi, tol),
            vacuum_psi: Check::at_most(act.vacuum_psi, tol),
            edge_raising_phi: act.edge_raising_phi,
            edge_raising_psi: act.edge_raising_psi,
            commutator_lower_block: Check::at_most(comm.lower_block_residual, tol),
            commutator_edge_norm: comm.edge_norm,
            commutator_edge_deviation: Check::at_most((comm.edge_norm - df).abs() / df, s * 1e-6),
            vacuum_chain_phi: Check::at_most(vac.phi, s * 1e-8 * df * k2),
            vacuum_chain_psi: Check::at_most(vac.psi, s * 1e-8 * df * k2),
            number_eigen_phi: Check::at_most(num.eigen_phi, tol),
            number_eigen_psi: Check::at_most(num.eigen_psi, tol),
            number_eigenvalues: pairs(&num.eigenvalues),
            number_eigenvalue_deviation: Check::at_most(num.eigenvalue_deviation, s * 1e-8),
            product_ba_equals_n: Check::at_most(num.product_ba, s * 1e-10 * df * k2),
            product_adag_bdag_equals_ndag: Check::at_most(
                num.product_adag_bdag,
                s * 1e-10 * df * k2,
            ),
            product_ab: Check::at_most(num.product_ab, s * 1e-10 * df * k2),
            adjoint_pairing: Check::at_most(num.adjoint_pairing, s * 1e-11 * df * k2),
            basis_independence: Check::at_most(basis, tol),
        })
    })();
    match ladder {
        Ok(lr) => p.report.ladder = Some(lr),
        Err(e) => p.fail_stage("ladder", &e, &[]),
    }
}

fn frame_stage(
    pair: &TruncatedPair,
    cf: &CanonicalForm,
    config: &AnalysisConfig,
) -> Result<FrameReport> {
    let s = config.tol_scale;
    let df = pair.dim() as f64;
    let tol = s * 1e-9 * df * cf.kappa() * cf.kappa();
    let fd = frame_operators(pair)?;
    let fi = verify_frame_identities(pair, cf, None)?;
    let (bessel_phi, bessel_psi) = bessel_check(pair, config.bessel_probes.max(1), config.seed)?;
    Ok(FrameReport {
        r_phi: fd.r_phi,
        r_psi: fd.r_psi,
        sigma_max: fd.sigma_max,
        sigma_min: fd.sigma_min,
        s_phi_factorization: Check::at_most(fi.s_phi_factorization, tol),
        s_psi_factorization: Check::at_most(fi.s_psi_factorization, tol),
        phi_psi_inverse: Check::at_most(fi.phi_psi_inverse, tol),
        psi_phi_inverse: Check::at_most(fi.psi_phi_inverse, tol),
        s_phi_maps_psi: Check::at_most(fi.s_phi_maps_psi, tol),
        s_psi_maps_phi: Check::at_most(fi.s_psi_maps_phi, tol),
        bessel_phi: Check::at_most(bessel_phi, fd.r_phi + s * 1e-10),
        bessel_psi: Check::at_most(bessel_psi, fd.r_psi + s * 1e-10),
    })
}

fn collect_failures(report: &AnalysisReport) -> Vec<String> {
    // Walk the serialized tree so every Check is found without listing them.
    fn walk(path: &str, v: &serde_json::Value, out: &mut Vec<String>) {
        if let serde_json::Value::Object(map) = v {
            if let Some(serde_json::Value::Bool(passed)) = map.get("passed") {
                if !passed && map.contains_key("tolerance") {
                    out.push(path.to_string());
                }
                return;
            }
            for (k, child) in map {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                walk(&p, child, out);
            }
        }
    }
    let value = serde_json::to_value(report).expect("report serialization cannot fail");
    let mut out = Vec::new();
    walk("", &value, &mut out);
    out
}

fn finish(mut p: Pipeline) -> AnalysisReport {
    let failed = collect_failures(&p.report);
    let code = match p.stop_code {
        Some(code) => code,
        None if failed.is_empty() => EXIT_PASS,
        None => EXIT_CHECKS_FAILED,
    };
    p.report.all_passed = failed.is_empty() && code == EXIT_PASS;
    p.report.failed_checks = failed;
    p.report.exit_code = code;
    p.report
}

/// One line of a sweep: the analysis outcome at a single dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimSummary {
    pub dim: usize,
    pub exit_code: i32,
    pub kappa: Option<f64>,
    pub sigma_max: Option<f64>,
    pub sigma_min: Option<f64>,
    pub r_phi: Option<f64>,
    pub r_psi: Option<f64>,
    pub failed_checks: Vec<String>,
    pub errors: Vec<StageNote>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub generator: String,
    pub family: String,
    pub description: String,
    pub config: AnalysisConfig,
    pub exit_code: i32,
    pub classification: Classification,
    pub per_dim: Vec<DimSummary>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }
}

/// Classifies `family` over `dims` and analyzes each generated pair.
///
/// The exit code is the first nonzero per-dimension code, else 0.
pub fn sweep(
    family: &PairFamily,
    dims: &[usize],
    growth_tol: f64,
    config: &AnalysisConfig,
) -> Result<SweepReport> {
    let classification = frames::classify_sweep(family, dims, growth_tol)?;
    let per_dim = dims
        .par_iter()
        .map(|&d| -> Result<DimSummary> {
            let pair = family.generate(d)?;
            let r = analyze(&pair, &format!("{family}@d={d}"), config);
            Ok(DimSummary {
                dim: d,
                exit_code: r.exit_code,
                kappa: r.canonical.as_ref().map(|c| c.kappa),
                sigma_max: r.frames.as_ref().map(|f| f.sigma_max),
                sigma_min: r.frames.as_ref().map(|f| f.sigma_min),
                r_phi: r.frames.as_ref().map(|f| f.r_phi),
                r_psi: r.frames.as_ref().map(|f| f.r_psi),
                failed_checks: r.failed_checks,
                errors: r.errors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let exit_code = per_dim
        .iter()
        .map(|s| s.exit_code)
        .find(|&c| c != EXIT_PASS)
        .unwrap_or(EXIT_PASS);
    Ok(SweepReport {
        generator: GENERATOR.into(),
        family: family.to_string(),
        description: family.description(),
        config: *config,
        exit_code,
        classification,
        per_dim,
    })
}

/// Exit code for an error raised before any report exists.
pub fn exit_code_for_error(err: &Error) -> i32 {
    exit_code_for(err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Verdict;

    fn run(fam: PairFamily, d: usize) -> AnalysisReport {
        analyze(
            &fam.generate(d).unwrap(),
            "test",
            &AnalysisConfig::default(),
        )
    }

    #[test]
    fn identity_passes() {
        let r = run(PairFamily::Identity, 8);
        assert_eq!(r.exit_code, EXIT_PASS, "{:?}", r.failed_checks);
        assert!(r.all_passed);
        assert_eq!(r.canonical.as_ref().unwrap().kappa, 1.0);
        assert!(r.skipped.is_empty());
    }

    #[test]
    fn shifted_example_is_indeterminate() {
        let r = run(PairFamily::ShiftedNonRegular, 8);
        assert_eq!(r.exit_code, EXIT_INDETERMINATE);
        let reg = r.regularity.as_ref().unwrap();
        assert_eq!(reg.status, RegularityStatus::Indeterminate);
        assert_eq!(reg.witness_psi.as_ref().unwrap()[0], [1.0, 0.0]);
        assert!(r.canonical.is_none() && r.ladder.is_none());
        assert_eq!(r.skipped.len(), 3);
    }

    #[test]
    fn diag_power_bounds() {
        let r = run(PairFamily::DiagPower { alpha: 1.0 }, 16);
        assert_eq!(r.exit_code, EXIT_PASS, "{:?}", r.failed_checks);
        let f = r.frames.unwrap();
        assert!((f.r_phi - 256.0).abs() <= 256.0 * 1e-12);
        assert!((f.r_psi - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn conditioning_exit_code() {
        let r = run(PairFamily::DiagExp { beta: 2.0 }, 10);
        assert_eq!(r.exit_code, EXIT_CONDITIONING);
        assert!(r.canonical.is_some());
        assert!(r.ladder.is_none());
    }

    #[test]
    fn non_biorthogonal_pair_fails_checks() {
        let phi = crate::numerics::ComplexMatrix::identity(2);
        let psi = crate::numerics::ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let p = TruncatedPair::new(phi, psi, "").unwrap();
        let r = analyze(&p, "test", &AnalysisConfig::default());
        assert_eq!(r.exit_code, EXIT_CHECKS_FAILED);
        assert_eq!(r.failed_checks, vec!["biorthogonality".to_string()]);
    }

    #[test]
    fn tiny_tolerance_scale_fails_checks() {
        let cfg = AnalysisConfig {
            tol_scale: 1e-12,
            ..AnalysisConfig::default()
        };
        let p = PairFamily::RandomRegular {
            kappa: 50.0,
            seed: 1,
        }
        .generate(8)
        .unwrap();
        let r = analyze(&p, "test", &cfg);
        assert_eq!(r.exit_code, EXIT_CHECKS_FAILED);
        assert!(!r.failed_checks.is_empty());
    }

    #[test]
    fn reports_are_deterministic() {
        let p = PairFamily::RandomRegular {
            kappa: 10.0,
            seed: 4,
        }
        .generate(6)
        .unwrap();
        let cfg = AnalysisConfig::default();
        assert_eq!(
            analyze(&p, "x", &cfg).to_json(),
            analyze(&p, "x", &cfg).to_json()
        );
    }

    #[test]
    fn sweep_report() {
        let r = sweep(
            &PairFamily::DiagMixed,
            &[8, 16, 32, 64],
            0.05,
            &AnalysisConfig::default(),
        )
        .unwrap();
        assert_eq!(r.classification.verdict, Verdict::NonRiesz);
        assert_eq!(
            r.per_dim.iter().map(|s| s.dim).collect::<Vec<_>>(),
            vec![8, 16, 32, 64]
        );
        assert_eq!(r.exit_code, EXIT_PASS, "{:?}", r.per_dim);
    }
}
