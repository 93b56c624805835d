//! Dense complex linear-algebra kernels.

mod decomp;
mod matrix;
mod random;

pub use decomp::{
    condition_number, frobenius_distance, general_eigenvalues, hermitian_eig,
    hermitian_eig_with_tolerance, inverse, polar_left, sqrtm_psd, svd, HermitianEig, Polar, Svd,
    DEFAULT_HERMITICITY_REL, PSD_CLAMP_REL, SINGULAR_REL,
};
pub use matrix::{ComplexMatrix, C64};
pub use random::{complex_gaussian, random_unit_vector, random_unitary, seeded_rng};

pub(crate) use decomp::orthonormal_completion;
pub(crate) use matrix::vector_norm;
