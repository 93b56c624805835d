//! Regular biorthogonal pairs at finite truncation.
//!
//! A pair `(Phi, Psi)` of `d x n` complex matrices whose columns satisfy
//! `(phi_k | psi_m) = delta_km` is analysed through:
//!
//! * [`pair`]: biorthogonality, regularity and the transition operators
//!   `T_e = Phi E^H`, `K_e = Psi E^H` for an orthonormal basis `E`;
//! * [`canonical`]: the unique orthonormal basis `F` and positive metric
//!   operator `T_f` with `Phi = T_f F` and `Psi = T_f^{-1} F`;
//! * [`frames`]: frame operators, Bessel bounds and the Riesz /
//!   semi-Riesz classification over dimension sweeps;
//! * [`ladder`]: the pseudo-bosonic lowering, raising and number operators
//!   built from `T_f` and the identities they satisfy;
//! * [`families`]: deterministic pair generators;
//! * [`io`] and [`report`]: the pair file format and analysis reports.

pub mod canonical;
pub mod error;
pub mod families;
pub mod frames;
pub mod io;
pub mod ladder;
pub mod numerics;
pub mod pair;
pub mod report;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, C64};
