//! One-sided local filters `A ⊗ I`, the numerical filter search and the
//! double-filter formulas.
//!
//! The quantity maximized by [`optimize_filter`] is the trace-preserving
//! singlet fraction of the filtering protocol: on success (probability `p`)
//! the filtered state `ρ_f` is kept, on failure the parties fall back to a
//! product state of singlet fraction 1/2. Its value is
//! `p · F(ρ_f) + (1 - p) / 2`, which is what the closed form
//! [`f_star_closed`] describes on the `ρ(F)` family.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fidelity::{best_maximally_entangled, max_entangled_overlap, singlet_fraction};
use crate::linalg::{ComplexMatrix, C64};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::random::{ginibre, trial_rng};
use crate::states::{BellKind, DensityMatrix};

/// Minimum `|det A|` (after normalization) for an admissible filter.
pub const MIN_FILTER_DET: f64 = 1e-12;
/// Success probabilities at or below this count as annihilation.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-12;
/// Singlet fraction of the fallback product state after a failed filter.
pub const FALLBACK_SINGLET_FRACTION: f64 = 0.5;

/// Slack on the closed-form domain endpoints.
const DOMAIN_SLACK: f64 = 1e-12;
const THIRD: f64 = 1.0 / 3.0;
const TWO_THIRDS: f64 = 2.0 / 3.0;

fn largest_singular_value(a: &ComplexMatrix) -> f64 {
    let fro2 = a.frobenius_norm().powi(2);
    let det = determinant(a).norm();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    ((fro2 + disc) / 2.0).sqrt()
}

fn determinant(a: &ComplexMatrix) -> C64 {
    a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]
}

/// An invertible 2×2 filter acting on qubit A, scaled so that its largest
/// singular value is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    a: ComplexMatrix,
}

impl Filter {
    pub fn new(a: ComplexMatrix) -> Result<Self> {
        if a.rows() != 2 || a.cols() != 2 {
            return Err(Error::Dimension {
                op: "Filter::new",
                detail: format!("expected 2x2, got {}x{}", a.rows(), a.cols()),
            });
        }
        let sigma = largest_singular_value(&a);
        if !(sigma > 0.0) || !a.is_finite() {
            return Err(Error::SingularFilter { det_abs: 0.0 });
        }
        let a = a.scale_real(1.0 / sigma);
        let det_abs = determinant(&a).norm();
        if !(det_abs > MIN_FILTER_DET) {
            return Err(Error::SingularFilter { det_abs });
        }
        Ok(Self { a })
    }

    pub fn identity() -> Self {
        Self {
            a: ComplexMatrix::identity(2),
        }
    }

    /// Row-major `(re, im)` pairs of the four entries.
    pub fn from_params(p: &[f64]) -> Result<Self> {
        assert_eq!(p.len(), 8, "a filter has 8 real parameters");
        let data = (0..4).map(|k| C64::new(p[2 * k], p[2 * k + 1])).collect();
        Self::new(ComplexMatrix::from_vec(2, 2, data)?)
    }

    pub fn params(&self) -> [f64; 8] {
        let s = self.a.as_slice();
        std::array::from_fn(|k| if k % 2 == 0 { s[k / 2].re } else { s[k / 2].im })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.a
    }

    /// `A ⊗ I₂`.
    pub fn local_operator(&self) -> ComplexMatrix {
        self.a.kron(&ComplexMatrix::identity(2))
    }

    /// Unnormalized `(A ⊗ I) ρ (A ⊗ I)^dagger`.
    pub fn sandwich(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let k = self.local_operator();
        (&(&k * rho) * &k.dagger()).hermitian_part()
    }

    /// `W A` for a unitary `W`; keeps the normalization.
    fn rotated(&self, w: &ComplexMatrix) -> Self {
        Self { a: w * &self.a }
    }
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub filtered_state: DensityMatrix,
    pub success_probability: f64,
}

pub fn apply_filter(rho: &DensityMatrix, filter: &Filter) -> Result<FilterOutcome> {
    let sigma = filter.sandwich(rho.matrix());
    let p = sigma.trace()?.re;
    if !(p > MIN_SUCCESS_PROBABILITY) {
        return Err(Error::AnnihilatedState { probability: p });
    }
    Ok(FilterOutcome {
        filtered_state: DensityMatrix::validate(&sigma.scale_real(1.0 / p))?,
        success_probability: p,
    })
}

/// `p · F(ρ_f) + (1 - p) · 1/2`. Well defined even when the filter nearly
/// annihilates the state, since `p · F(ρ_f)` is evaluated unnormalized.
pub fn trace_preserving_singlet_fraction(rho: &DensityMatrix, filter: &Filter) -> f64 {
    let sigma = filter.sandwich(rho.matrix());
    let p = sigma.trace().unwrap().re;
    max_entangled_overlap(&sigma) + (1.0 - p) * FALLBACK_SINGLET_FRACTION
}

/// `tr[(A ⊗ I) ρ (A ⊗ I)^dagger |ψ><ψ|]`, the unnormalized target overlap
/// after filtering.
pub fn trace_term(rho: &DensityMatrix, filter: &Filter, target: BellKind) -> f64 {
    let ket = target.ket();
    filter.sandwich(rho.matrix()).sandwich(&ket, &ket).re
}

#[derive(Debug, Clone, Copy)]
pub struct FilterSearch {
    pub restarts: usize,
    pub max_iterations: usize,
    pub diameter_tol: f64,
    pub initial_step: f64,
}

impl Default for FilterSearch {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 500,
            diameter_tol: 1e-10,
            initial_step: 0.2,
        }
    }
}

impl FilterSearch {
    pub fn with_restarts(restarts: usize) -> Self {
        Self {
            restarts,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct FilterOptimum {
    /// Best filter, rotated by a local unitary so that `|Φ⁺>` is the
    /// maximally entangled state closest to the filtered state.
    pub filter: Filter,
    /// Trace-preserving singlet fraction `p F(ρ_f) + (1 - p)/2`.
    pub value: f64,
    /// `F(ρ_f)`, the singlet fraction of the post-selected state.
    pub filtered_singlet_fraction: f64,
    pub success_probability: f64,
    /// Restart that produced the optimum (0 is the identity start).
    pub restart: usize,
}

const FILTER_STREAM: u64 = 0xF1_17E2;

fn random_start(seed: u64, restart: usize) -> [f64; 8] {
    let mut rng = trial_rng(seed, FILTER_STREAM, restart as u64);
    loop {
        let g = ginibre(&mut rng, 2, 2);
        if let Ok(f) = Filter::new(g) {
            return f.params();
        }
    }
}

/// Derivative-free multi-start maximization of the trace-preserving singlet
/// fraction over one-sided filters. Restart 0 starts at the identity, so
/// the result is never below `singlet_fraction(rho)`. Deterministic in `seed`;
/// ties go to the lowest restart index.
pub fn optimize_filter_with(
    rho: &DensityMatrix,
    search: &FilterSearch,
    seed: u64,
) -> FilterOptimum {
    let restarts = search.restarts.max(1);
    let options = NelderMeadOptions {
        max_iterations: search.max_iterations,
        diameter_tol: search.diameter_tol,
        initial_step: search.initial_step,
    };
    let objective = |p: &[f64]| match Filter::from_params(p) {
        Ok(filter) => -trace_preserving_singlet_fraction(rho, &filter),
        Err(_) => f64::INFINITY,
    };

    let runs: Vec<(usize, Vec<f64>, f64)> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let start = if k == 0 {
                Filter::identity().params()
            } else {
                random_start(seed, k)
            };
            let m = nelder_mead(objective, &start, &options);
            (k, m.x, -m.value)
        })
        .collect();
    let (restart, params, _) = runs
        .into_iter()
        .reduce(|best, cand| if cand.2 > best.2 { cand } else { best })
        .unwrap();

    let filter = Filter::from_params(&params).expect("optimum is a finite-objective filter");
    let filter = canonicalize(rho, filter);
    let outcome = apply_filter(rho, &filter).expect("optimal filter keeps the state");
    let filtered_singlet_fraction = singlet_fraction(&outcome.filtered_state);
    FilterOptimum {
        value: trace_preserving_singlet_fraction(rho, &filter),
        filter,
        filtered_singlet_fraction,
        success_probability: outcome.success_probability,
        restart,
    }
}

pub fn optimize_filter(rho: &DensityMatrix, restarts: usize, seed: u64) -> FilterOptimum {
    optimize_filter_with(rho, &FilterSearch::with_restarts(restarts), seed)
}

/// If `(W ⊗ I)|Φ⁺>` is the best maximally entangled state for the filtered
/// state, `W^dagger A` has the same singlet fraction and success probability
/// and attains it on `|Φ⁺>` itself.
fn canonicalize(rho: &DensityMatrix, filter: Filter) -> Filter {
    let Ok(outcome) = apply_filter(rho, &filter) else {
        return filter;
    };
    let (_, e) = best_maximally_entangled(&outcome.filtered_state);
    let s = std::f64::consts::SQRT_2;
    let w = ComplexMatrix::from_vec(2, 2, e.iter().map(|z| z * s).collect()).unwrap();
    filter.rotated(&w.dagger())
}

fn check_domain(f: f64, lo: f64, hi: f64, domain: &'static str) -> Result<f64> {
    if f.is_finite() && f >= lo - DOMAIN_SLACK && f <= hi + DOMAIN_SLACK {
        Ok(f.clamp(lo, hi))
    } else {
        Err(Error::Domain {
            name: "F",
            value: f,
            domain,
        })
    }
}

/// Optimal trace-preserving singlet fraction on `ρ(F)`:
/// `(1/2)[1 + F²/(4(1-F))]` on `[1/3, 2/3]`, `F` above.
pub fn f_star_closed(f: f64) -> Result<f64> {
    let f = check_domain(f, THIRD, 1.0, "[1/3, 1]")?;
    Ok(if f < TWO_THIRDS {
        0.5 * (1.0 + f * f / (4.0 * (1.0 - f)))
    } else {
        f
    })
}

/// Second-filter failure probability on `ρ(F)`: `F² / (2(1-F)(2-F))`.
pub fn p_ab_min_closed(f: f64) -> Result<f64> {
    let f = check_domain(f, THIRD, TWO_THIRDS, "[1/3, 2/3]")?;
    Ok(f * f / (2.0 * (1.0 - f) * (2.0 - f)))
}

/// Double-filter singlet fraction on `ρ(F)`: `(2-F) / (4(1-F))`.
pub fn f_opt_closed(f: f64) -> Result<f64> {
    let f = check_domain(f, THIRD, TWO_THIRDS, "[1/3, 2/3]")?;
    Ok((2.0 - f) / (4.0 * (1.0 - f)))
}

/// A probability-valued formula result, reported as computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormulaProbability {
    pub value: f64,
    pub in_unit_interval: bool,
}

/// `p_AB^min = 1 - (F*_D - trace_term) / F*(ρ_f)`.
pub fn p_ab_min(f_d: f64, trace_term: f64, f_star_filtered: f64) -> Result<FormulaProbability> {
    if f_star_filtered == 0.0 {
        return Err(Error::ZeroDivision("p_ab_min"));
    }
    let value = 1.0 - (f_d - trace_term) / f_star_filtered;
    Ok(FormulaProbability {
        value,
        in_unit_interval: (0.0..=1.0).contains(&value),
    })
}

/// `F*_opt = (1 - p_AB) F*(ρ_f) + trace_term`.
pub fn f_opt(p_ab: f64, f_star_filtered: f64, trace_term: f64) -> f64 {
    (1.0 - p_ab) * f_star_filtered + trace_term
}

/// The double-filter pipeline evaluated at `p_AB^min`, with the implied
/// post-filter overlap `trace_term / p_AB^min` exposed for sanity checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoubleFilter {
    pub f_d: f64,
    pub trace_term: f64,
    pub f_star_filtered: f64,
    pub p_ab_min: FormulaProbability,
    pub f_opt: f64,
    /// `trace_term / p_AB^min`; a physical overlap lies in `[0, 1]`.
    pub implied_overlap: f64,
    pub implied_overlap_in_range: bool,
}

pub fn double_filter(f_d: f64, trace_term: f64, f_star_filtered: f64) -> Result<DoubleFilter> {
    let p = p_ab_min(f_d, trace_term, f_star_filtered)?;
    let implied_overlap = trace_term / p.value;
    Ok(DoubleFilter {
        f_d,
        trace_term,
        f_star_filtered,
        p_ab_min: p,
        f_opt: f_opt(p.value, f_star_filtered, trace_term),
        implied_overlap,
        implied_overlap_in_range: (0.0..=1.0).contains(&implied_overlap),
    })
}
