use nalgebra::{DMatrix, DVector, QR};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::{vector_norm, ComplexMatrix, C64};

/// Deterministic generator shared by every randomized routine.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows x cols` matrix of standard complex Gaussians, filled column-major.
pub fn complex_gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    })
}

/// Uniform unit vector on the complex sphere (normalized complex Gaussian).
pub fn random_unit_vector(d: usize, rng: &mut ChaCha8Rng) -> DVector<C64> {
    loop {
        let g = complex_gaussian(d, 1, rng).column(0).into_owned();
        let n = vector_norm(&g);
        if n > 0.0 {
            return g / C64::new(n, 0.0);
        }
    }
}

/// Seeded Haar-distributed unitary.
///
/// A `d x d` complex Gaussian matrix from a ChaCha8 stream seeded with `seed`
/// is orthonormalized by Householder QR; column `j` of `Q` is then multiplied
/// by the phase of `R_jj`. The same `(d, seed)` always gives the same bits.
///
/// # Panics
/// If `d == 0`.
pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    assert!(d > 0, "random_unitary needs d >= 1");
    let mut rng = seeded_rng(seed);
    let g = complex_gaussian(d, d, &mut rng);
    let qr = QR::new(g);
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { C64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    ComplexMatrix::wrap(q)
}
