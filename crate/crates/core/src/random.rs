//! Seeded random matrices for the property suites and optimizer restarts.
//!
//! Nothing here touches a global RNG. Every generator takes a caller-owned
//! RNG, and [`trial_rng`] derives an independent stream per `(seed, suite,
//! trial)` so that trials can be evaluated in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64};

pub type TrialRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ mix64(stream)) ^ index)
}

pub fn trial_rng(seed: u64, stream: u64, index: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).unwrap()
}

/// Random mixed state `G G^dagger / tr(G G^dagger)` (Ginibre ensemble).
pub fn ginibre_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, n);
    let w = &g * &g.dagger();
    let tr = w.trace().unwrap().re;
    w.scale_real(1.0 / tr).hermitian_part()
}

/// Random Hermitian matrix `(G + G^dagger)/2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ginibre(rng, n, n).hermitian_part()
}

/// Random PSD matrix `G G^dagger`, unnormalized.
pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, n);
    (&g * &g.dagger()).hermitian_part()
}

/// Haar-random SU(2) element from a uniformly random unit quaternion.
pub fn su2<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if let Some(u) = su2_from_quaternion(&q) {
            return u;
        }
    }
}

/// Maps a nonzero real 4-vector `(a, b, c, d)` to the SU(2) element
/// `[[a + ib, c + id], [-c + id, a - ib]] / |q|`. Returns `None` for a
/// (near-)zero vector.
pub fn su2_from_quaternion(q: &[f64]) -> Option<ComplexMatrix> {
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 1e-12) || !norm.is_finite() {
        return None;
    }
    let [a, b, c, d] = [q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm];
    let data = vec![
        C64::new(a, b),
        C64::new(c, d),
        C64::new(-c, d),
        C64::new(a, -b),
    ];
    ComplexMatrix::from_vec(2, 2, data).ok()
}

/// Haar-random 2×2 unitary (SU(2) times a uniform global phase).
pub fn unitary2<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    su2(rng).scale(C64::from_polar(1.0, phase))
}
