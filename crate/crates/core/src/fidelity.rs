//! Singlet fraction (fully entangled fraction) and teleportation fidelity.
//!
//! Every maximally entangled two-qubit state is, up to a global phase,
//! `(U ⊗ I)|Φ⁺>` for some single-qubit unitary `U`. In the magic basis
//! `{|Φ⁺>, i|Φ⁻>, i|Ψ⁺>, |Ψ⁻>}` those states are exactly the real unit
//! vectors, so the maximal overlap is the top eigenvalue of the real part of
//! `ρ` written in that basis. [`singlet_fraction_bruteforce`] searches the
//! unitary directly and serves as an independent oracle.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{hermitian_eigen, ComplexMatrix, C64, I};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::random::{su2_from_quaternion, trial_rng};
use crate::states::{BellKind, DensityMatrix};

/// Singlet fraction above which a resource beats classical teleportation.
pub const USEFULNESS_THRESHOLD: f64 = 0.5;
/// Rounding margin on the usefulness test: values within this of 1/2 count as 1/2.
pub const USEFULNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityResult {
    pub singlet_fraction: f64,
    pub teleportation_fidelity: f64,
    pub useful_for_teleportation: bool,
}

impl FidelityResult {
    pub fn from_singlet_fraction(singlet_fraction: f64) -> Self {
        Self {
            singlet_fraction,
            teleportation_fidelity: teleportation_fidelity_of(singlet_fraction),
            useful_for_teleportation: singlet_fraction > USEFULNESS_THRESHOLD + USEFULNESS_TOL,
        }
    }
}

/// `f_T = (2F + 1) / 3`.
pub fn teleportation_fidelity_of(singlet_fraction: f64) -> f64 {
    (2.0 * singlet_fraction + 1.0) / 3.0
}

/// `<ψ|ρ|ψ>` for a Bell target.
pub fn bell_overlap(rho: &DensityMatrix, target: BellKind) -> f64 {
    let ket = target.ket();
    rho.matrix().sandwich(&ket, &ket).re
}

/// `<Φ⁺|ρ|Φ⁺>`, the overlap before any maximization.
pub fn overlap_phi_plus(rho: &DensityMatrix) -> f64 {
    bell_overlap(rho, BellKind::PhiPlus)
}

/// Columns are the magic basis vectors.
fn magic_basis() -> ComplexMatrix {
    let columns = [
        BellKind::PhiPlus.ket(),
        BellKind::PhiMinus.ket().map(|z| z * I),
        BellKind::PsiPlus.ket().map(|z| z * I),
        BellKind::PsiMinus.ket(),
    ];
    let mut m = ComplexMatrix::zeros(4, 4);
    for (j, col) in columns.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    m
}

/// The real symmetric matrix `Re(M^dagger ρ M)` whose top eigenvalue is the
/// singlet fraction.
pub fn magic_basis_real_part(rho: &DensityMatrix) -> ComplexMatrix {
    real_part_in_magic_basis(rho.matrix())
}

fn real_part_in_magic_basis(m: &ComplexMatrix) -> ComplexMatrix {
    let basis = magic_basis();
    let in_magic = &(&basis.dagger() * m) * &basis;
    in_magic.map(|z| C64::new(z.re, 0.0)).hermitian_part()
}

/// `max_e <e|σ|e>` for any Hermitian 4×4 `σ`, e.g. an unnormalized filtered
/// state. Linear in positive rescalings of `σ`.
pub fn max_entangled_overlap(sigma: &ComplexMatrix) -> f64 {
    hermitian_eigen(&real_part_in_magic_basis(sigma))
        .expect("real part is symmetric")
        .max()
}

/// Singlet fraction together with a maximally entangled state attaining it.
pub fn best_maximally_entangled(rho: &DensityMatrix) -> (f64, [C64; 4]) {
    let eig = hermitian_eigen(&magic_basis_real_part(rho)).expect("real part is symmetric");
    let top = eig.eigenvector(3);
    // Real magic-basis coordinates up to a global phase; strip it.
    let pivot = top
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    let phase = pivot.conj() / pivot.norm();
    let coords: Vec<C64> = top.iter().map(|z| C64::new((z * phase).re, 0.0)).collect();
    let norm = coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ket = magic_basis().apply(&coords);
    let ket = std::array::from_fn(|i| ket[i] / norm);
    (eig.max(), ket)
}

/// Fully entangled fraction `max_e <e|ρ|e>` over maximally entangled `e`.
pub fn singlet_fraction(rho: &DensityMatrix) -> f64 {
    max_entangled_overlap(rho.matrix())
}

pub fn teleportation_fidelity(rho: &DensityMatrix) -> FidelityResult {
    FidelityResult::from_singlet_fraction(singlet_fraction(rho))
}

/// `(U ⊗ I)|Φ⁺>`; amplitude of `|j i>` is `U[j][i] / √2`.
pub fn rotated_phi_plus(u: &ComplexMatrix) -> [C64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    std::array::from_fn(|k| u[(k / 2, k % 2)] * h)
}

fn overlap_for_quaternion(rho: &DensityMatrix, q: &[f64]) -> Option<f64> {
    let u = su2_from_quaternion(q)?;
    let e = rotated_phi_plus(&u);
    Some(rho.matrix().sandwich(&e, &e).re)
}

/// Samples per independently seeded chunk of the brute-force search.
pub const BRUTEFORCE_CHUNK: usize = 256;
const BRUTEFORCE_STREAM: u64 = 0x5F_5F;

pub fn bruteforce_refine_options() -> NelderMeadOptions {
    NelderMeadOptions {
        max_iterations: 200,
        diameter_tol: 1e-10,
        initial_step: 0.05,
    }
}

/// Oracle for [`singlet_fraction`]: maximizes `<Φ⁺|(U⊗I)^dagger ρ (U⊗I)|Φ⁺>`
/// over `samples` Haar-random `U`, then refines the best sample with a
/// simplex search on the quaternion chart of SU(2). Deterministic in `seed`
/// regardless of how chunks are scheduled.
pub fn singlet_fraction_bruteforce(rho: &DensityMatrix, samples: usize, seed: u64) -> f64 {
    let samples = samples.max(1);
    let chunks = samples.div_ceil(BRUTEFORCE_CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = trial_rng(seed, BRUTEFORCE_STREAM, chunk as u64);
            let count = BRUTEFORCE_CHUNK.min(samples - chunk * BRUTEFORCE_CHUNK);
            let mut best: Option<([f64; 4], f64)> = None;
            for _ in 0..count {
                let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
                if let Some(v) = overlap_for_quaternion(rho, &q) {
                    if best.is_none_or(|(_, b)| v > b) {
                        best = Some((q, v));
                    }
                }
            }
            (chunk, best)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .filter_map(|(_, b)| b)
        .fold(None, |acc: Option<([f64; 4], f64)>, cand| match acc {
            Some(a) if a.1 >= cand.1 => Some(a),
            _ => Some(cand),
        });

    let (q0, sampled) = best.expect("at least one quaternion is nonzero");
    let refined = nelder_mead(
        |q| overlap_for_quaternion(rho, q).map_or(f64::INFINITY, |v| -v),
        &q0,
        &bruteforce_refine_options(),
    );
    sampled.max(-refined.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell_state, rho_family};

    #[test]
    fn overlap_examples() {
        assert!((overlap_phi_plus(&bell_state(BellKind::PhiPlus)) - 1.0).abs() < 1e-15);
        assert!(overlap_phi_plus(&bell_state(BellKind::PsiMinus)).abs() < 1e-15);
        for f in [0.0, 0.3, 0.5, 1.0] {
            assert!((overlap_phi_plus(&rho_family(f).unwrap()) - f).abs() < 1e-15);
        }
    }

    #[test]
    fn singlet_fraction_examples() {
        for kind in BellKind::ALL {
            assert!((singlet_fraction(&bell_state(kind)) - 1.0).abs() < 1e-12);
        }
        assert!((singlet_fraction(&DensityMatrix::maximally_mixed()) - 0.25).abs() < 1e-12);
        for f in [0.1, 0.2, 1.0 / 3.0, 0.5, 0.8] {
            let expected = f64::max(f, (1.0 - f) / 2.0);
            let got = singlet_fraction(&rho_family(f).unwrap());
            assert!((got - expected).abs() <= 1e-10, "f = {f}: {got}");
        }
    }

    #[test]
    fn magic_real_part_of_family_is_diagonal() {
        let f = 0.6;
        let re = magic_basis_real_part(&rho_family(f).unwrap());
        let expected = ComplexMatrix::from_real_diag(&[f, 0.0, (1.0 - f) / 2.0, (1.0 - f) / 2.0]);
        assert!(re.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn best_state_attains_the_fraction() {
        let rho = bell_state(BellKind::PsiMinus);
        let (sf, e) = best_maximally_entangled(&rho);
        assert!((rho.matrix().sandwich(&e, &e).re - sf).abs() < 1e-12);
    }

    #[test]
    fn teleportation_examples() {
        let r = teleportation_fidelity(&bell_state(BellKind::PhiPlus));
        assert!((r.teleportation_fidelity - 1.0).abs() < 1e-12);
        assert!(r.useful_for_teleportation);

        let boundary = FidelityResult::from_singlet_fraction(0.5);
        assert!((boundary.teleportation_fidelity - 2.0 / 3.0).abs() < 1e-15);
        assert!(!boundary.useful_for_teleportation);

        let r = teleportation_fidelity(&rho_family(0.7).unwrap());
        assert!((r.teleportation_fidelity - 0.8).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_examples() {
        let v = singlet_fraction_bruteforce(&bell_state(BellKind::PhiPlus), 10, 3);
        assert!(v >= 1.0 - 1e-6);
        let v = singlet_fraction_bruteforce(&DensityMatrix::maximally_mixed(), 50, 9);
        assert!((v - 0.25).abs() <= 1e-9);
        let v = singlet_fraction_bruteforce(&rho_family(0.6).unwrap(), 2000, 1);
        assert!((v - 0.6).abs() <= 1e-4, "{v}");
    }

    #[test]
    fn bruteforce_is_deterministic() {
        let rho = rho_family(0.45).unwrap();
        assert_eq!(
            singlet_fraction_bruteforce(&rho, 777, 5),
            singlet_fraction_bruteforce(&rho, 777, 5)
        );
    }
}
