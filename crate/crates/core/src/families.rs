//! Deterministic generators of truncated pairs.
//!
//! Every family except [`PairFamily::ShiftedNonRegular`] produces a regular
//! pair at each `d >= 2` through `phi_n = T e_n`, `psi_n = (T^{-1})^H e_n`
//! for some invertible `T`. Output depends only on the family parameters and
//! `d`.
//!
//! Families are addressed by a spec string `name[:key=value[,key=value]...]`,
//! e.g. `diag-power:alpha=1` or `random-regular:kappa=1000,seed=7`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{self, complex_gaussian, random_unitary, seeded_rng, ComplexMatrix, C64};
use crate::pair::TruncatedPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairFamily {
    /// `Phi = Psi = I`.
    Identity,
    /// `t_k = (k+1)^alpha` on the diagonal.
    DiagPower { alpha: f64 },
    /// `t_k = exp(beta k)` on the diagonal.
    DiagExp { beta: f64 },
    /// `t_{2j} = j+1`, `t_{2j+1} = 1/(j+1)`.
    DiagMixed,
    /// `T = I + eps S` with `S` a seeded complex Gaussian matrix scaled to unit
    /// spectral norm; requires `|eps| < 1`.
    BoundedPerturbation { eps: f64, seed: u64 },
    /// `phi_k = e_{k+1} + e_0`, `psi_k = e_{k+1}` for `k < d-1`. Biorthogonal,
    /// but `e_0` is orthogonal to every `psi_k`. This is the one-based
    /// `phi_n = e_{n+1} + e_1`, `n >= 1` example shifted to zero-based indices.
    ShiftedNonRegular,
    /// `T = Q1 diag(kappa^{k/(d-1)}) Q2` with seeded Haar unitaries.
    RandomRegular { kappa: f64, seed: u64 },
}

const NAMES: &[&str] = &[
    "identity",
    "diag-power",
    "diag-exp",
    "diag-mixed",
    "bounded-perturbation",
    "shifted-non-regular",
    "random-regular",
];

impl PairFamily {
    pub fn name(&self) -> &'static str {
        match self {
            PairFamily::Identity => "identity",
            PairFamily::DiagPower { .. } => "diag-power",
            PairFamily::DiagExp { .. } => "diag-exp",
            PairFamily::DiagMixed => "diag-mixed",
            PairFamily::BoundedPerturbation { .. } => "bounded-perturbation",
            PairFamily::ShiftedNonRegular => "shifted-non-regular",
            PairFamily::RandomRegular { .. } => "random-regular",
        }
    }

    pub fn description(&self) -> String {
        match self {
            PairFamily::Identity => "Phi = Psi = I".into(),
            PairFamily::DiagPower { alpha } => {
                format!("phi_k = (k+1)^{alpha} e_k, psi_k = (k+1)^-{alpha} e_k")
            }
            PairFamily::DiagExp { beta } => {
                format!("phi_k = exp({beta} k) e_k, psi_k = exp(-{beta} k) e_k")
            }
            PairFamily::DiagMixed => {
                "t_2j = j+1, t_2j+1 = 1/(j+1); phi_k = t_k e_k, psi_k = e_k / t_k".into()
            }
            PairFamily::BoundedPerturbation { eps, seed } => format!(
                "Phi = I + {eps} S, Psi = (Phi^-1)^H, S seeded ({seed}) Gaussian with ||S|| = 1"
            ),
            PairFamily::ShiftedNonRegular => {
                "n = d-1, phi_k = e_(k+1) + e_0, psi_k = e_(k+1) (zero-based shift of phi_n = e_(n+1) + e_1, n >= 1)"
                    .into()
            }
            PairFamily::RandomRegular { kappa, seed } => format!(
                "Phi = Q1 diag(logspace 1..{kappa}) Q2, Psi = (Phi^-1)^H, seeded unitaries ({seed})"
            ),
        }
    }

    /// Whether `generate` yields regular pairs.
    pub fn is_regular(&self) -> bool {
        !matches!(self, PairFamily::ShiftedNonRegular)
    }

    /// Builds a family from its name and `key=value` parameters.
    pub fn from_parts<S: AsRef<str>>(name: &str, params: &[S]) -> Result<Self> {
        let mut kv: Vec<(String, String)> = Vec::new();
        for p in params {
            let p = p.as_ref().trim();
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::BadParameter(format!("expected key=value, got {p:?}")))?;
            let k = k.trim().to_ascii_lowercase();
            if kv.iter().any(|(existing, _)| *existing == k) {
                return Err(Error::BadParameter(format!("parameter {k:?} given twice")));
            }
            kv.push((k, v.trim().to_string()));
        }
        let mut take = |key: &str| -> Option<String> {
            kv.iter()
                .position(|(k, _)| k == key)
                .map(|i| kv.remove(i).1)
        };
        let float = |key: &str, raw: Option<String>, default: f64| -> Result<f64> {
            match raw {
                None => Ok(default),
                Some(v) => {
                    let x: f64 = v
                        .parse()
                        .map_err(|_| Error::BadParameter(format!("{key}={v:?} is not a number")))?;
                    if x.is_finite() {
                        Ok(x)
                    } else {
                        Err(Error::BadParameter(format!("{key} must be finite")))
                    }
                }
            }
        };
        let int = |key: &str, raw: Option<String>| -> Result<u64> {
            match raw {
                None => Ok(0),
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::BadParameter(format!("{key}={v:?} is not an integer"))),
            }
        };

        let family = match name.trim().to_ascii_lowercase().as_str() {
            "identity" => PairFamily::Identity,
            "diag-power" => PairFamily::DiagPower {
                alpha: float("alpha", take("alpha"), 1.0)?,
            },
            "diag-exp" => PairFamily::DiagExp {
                beta: float("beta", take("beta"), 0.1)?,
            },
            "diag-mixed" => PairFamily::DiagMixed,
            "bounded-perturbation" => PairFamily::BoundedPerturbation {
                eps: float("eps", take("eps"), 0.3)?,
                seed: int("seed", take("seed"))?,
            },
            "shifted-non-regular" => PairFamily::ShiftedNonRegular,
            "random-regular" => PairFamily::RandomRegular {
                kappa: float("kappa", take("kappa"), 100.0)?,
                seed: int("seed", take("seed"))?,
            },
            other => {
                return Err(Error::BadParameter(format!(
                    "unknown family {other:?}; expected one of {}",
                    NAMES.join(", ")
                )))
            }
        };
        if let Some((k, _)) = kv.first() {
            return Err(Error::BadParameter(format!(
                "family {} takes no parameter {k:?}",
                family.name()
            )));
        }
        family.validate()?;
        Ok(family)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PairFamily::BoundedPerturbation { eps, .. } if eps.abs() >= 1.0 => Err(
                Error::BadParameter(format!("eps = {eps} must satisfy |eps| < 1")),
            ),
            PairFamily::RandomRegular { kappa, .. } if kappa.is_nan() || kappa < 1.0 => Err(
                Error::BadParameter(format!("kappa = {kappa} must be at least 1")),
            ),
            _ => Ok(()),
        }
    }

    /// Generates the pair at ambient dimension `d >= 2`.
    pub fn generate(&self, d: usize) -> Result<TruncatedPair> {
        if d < 2 {
            return Err(Error::BadParameter(format!(
                "dimension {d} is too small, families need d >= 2"
            )));
        }
        self.validate()?;
        let label = format!("{self}@d={d}");
        match *self {
            PairFamily::Identity => diagonal_pair(&vec![1.0; d], label),
            PairFamily::DiagPower { alpha } => {
                let t: Vec<f64> = (0..d).map(|k| ((k + 1) as f64).powf(alpha)).collect();
                diagonal_pair(&t, label)
            }
            PairFamily::DiagExp { beta } => {
                let t: Vec<f64> = (0..d).map(|k| (beta * k as f64).exp()).collect();
                diagonal_pair(&t, label)
            }
            PairFamily::DiagMixed => {
                let t: Vec<f64> = (0..d)
                    .map(|k| {
                        let j = (k / 2 + 1) as f64;
                        if k % 2 == 0 {
                            j
                        } else {
                            1.0 / j
                        }
                    })
                    .collect();
                diagonal_pair(&t, label)
            }
            PairFamily::BoundedPerturbation { eps, seed } => {
                let mut rng = seeded_rng(mix_seed(seed, d as u64, 0));
                let g = ComplexMatrix::wrap(complex_gaussian(d, d, &mut rng));
                let norm = numerics::svd(&g)?.sigma_max();
                let t = &ComplexMatrix::identity(d) + &g.scale(eps / norm);
                let psi = numerics::inverse(&t)?.adjoint();
                TruncatedPair::new(t, psi, label)
            }
            PairFamily::ShiftedNonRegular => {
                let n = d - 1;
                let mut phi = DMatrix::<C64>::zeros(d, n);
                let mut psi = DMatrix::<C64>::zeros(d, n);
                for k in 0..n {
                    phi[(k + 1, k)] = C64::new(1.0, 0.0);
                    phi[(0, k)] = C64::new(1.0, 0.0);
                    psi[(k + 1, k)] = C64::new(1.0, 0.0);
                }
                TruncatedPair::new(ComplexMatrix::wrap(phi), ComplexMatrix::wrap(psi), label)
            }
            PairFamily::RandomRegular { kappa, seed } => {
                let q1 = random_unitary(d, mix_seed(seed, d as u64, 1));
                let q2 = random_unitary(d, mix_seed(seed, d as u64, 2));
                let s: Vec<f64> = (0..d)
                    .map(|k| kappa.powf(k as f64 / (d - 1) as f64))
                    .collect();
                let inv: Vec<f64> = s.iter().map(|x| 1.0 / x).collect();
                let phi = &(&q1 * &ComplexMatrix::from_real_diagonal(&s)) * &q2;
                let psi = &(&q1 * &ComplexMatrix::from_real_diagonal(&inv)) * &q2;
                TruncatedPair::new(phi, psi, label)
            }
        }
    }
}

fn diagonal_pair(t: &[f64], label: String) -> Result<TruncatedPair> {
    if let Some(k) = t
        .iter()
        .position(|x| !x.is_finite() || *x == 0.0 || !(1.0 / x).is_finite())
    {
        return Err(Error::BadParameter(format!(
            "diagonal entry {k} = {} is not a usable finite nonzero scale",
            t[k]
        )));
    }
    let inv: Vec<f64> = t.iter().map(|x| 1.0 / x).collect();
    TruncatedPair::new(
        ComplexMatrix::from_real_diagonal(t),
        ComplexMatrix::from_real_diagonal(&inv),
        label,
    )
}

/// SplitMix64-style combination of the user seed, the dimension and a stream tag.
fn mix_seed(seed: u64, d: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(d.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl fmt::Display for PairFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairFamily::DiagPower { alpha } => write!(f, "diag-power:alpha={alpha}"),
            PairFamily::DiagExp { beta } => write!(f, "diag-exp:beta={beta}"),
            PairFamily::BoundedPerturbation { eps, seed } => {
                write!(f, "bounded-perturbation:eps={eps},seed={seed}")
            }
            PairFamily::RandomRegular { kappa, seed } => {
                write!(f, "random-regular:kappa={kappa},seed={seed}")
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for PairFamily {
    type Err = Error;

    /// Parses `name[:key=value[,key=value]...]`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (s, None),
        };
        let params: Vec<&str> = match rest {
            Some(r) if !r.trim().is_empty() => r.split(',').collect(),
            _ => Vec::new(),
        };
        PairFamily::from_parts(name, &params)
    }
}
