//! Randomized property suites behind `singlet-bound verify`.
//!
//! Every trial draws from its own RNG, seeded from `(seed, suite, trial)`,
//! so results do not depend on how rayon schedules the work.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    construct_c, dembo_lower, dembo_upper, dembo_upper_hermitian, f_d_closed, fang_bounds,
    partition, DemboVariant, EtaMode,
};
use crate::fidelity::{singlet_fraction, singlet_fraction_bruteforce};
use crate::filtering::{double_filter, f_opt_closed, f_star_closed, Filter};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::random::{derive_seed, ginibre, ginibre_state, hermitian, psd, trial_rng, TrialRng};
use crate::report::matrix_entries;
use crate::states::{concurrence, partial_transpose_min_eigenvalue, rho_family, DensityMatrix};

/// Samples used by the brute-force singlet-fraction oracle per trial.
pub const ORACLE_SAMPLES: usize = 2000;

const RECONSTRUCTION_TOL: f64 = 1e-10;
const BRACKET_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-12;
const FAMILY_TOL: f64 = 1e-10;
const ORACLE_AGREEMENT: f64 = 1e-3;
const ORACLE_EXCESS: f64 = 1e-9;

/// Deliberate defects used to check that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Evaluate the Dembo upper bound without its square-root term.
    DropDemboSqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Eigensolver,
    FangSandwich,
    DemboValidity,
    OracleAgreement,
    FamilyClosedForm,
    DoubleFilterIdentity,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Eigensolver,
        Suite::FangSandwich,
        Suite::DemboValidity,
        Suite::OracleAgreement,
        Suite::FamilyClosedForm,
        Suite::DoubleFilterIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Eigensolver => "eigensolver",
            Suite::FangSandwich => "fang_sandwich",
            Suite::DemboValidity => "dembo_validity",
            Suite::OracleAgreement => "oracle_agreement",
            Suite::FamilyClosedForm => "family_closed_form",
            Suite::DoubleFilterIdentity => "double_filter_identity",
        }
    }

    fn stream(self) -> u64 {
        0x7E57_0000 + self as u64
    }

    fn run_trial(self, rng: &mut TrialRng, mutation: Mutation) -> Result<(), String> {
        match self {
            Suite::Eigensolver => eigensolver_trial(rng),
            Suite::FangSandwich => fang_trial(rng),
            Suite::DemboValidity => dembo_trial(rng, mutation),
            Suite::OracleAgreement => oracle_trial(rng),
            Suite::FamilyClosedForm => family_trial(rng),
            Suite::DoubleFilterIdentity => identity_trial(rng),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    /// Seed of the failing trial's own RNG.
    pub trial_seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<TrialFailure>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::ok)
    }
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64, mutation: Mutation) -> SuiteReport {
    let outcomes: Vec<(usize, u64, Result<(), String>)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = derive_seed(seed, suite.stream(), trial as u64);
            let mut rng = trial_rng(seed, suite.stream(), trial as u64);
            (trial, trial_seed, suite.run_trial(&mut rng, mutation))
        })
        .collect();
    let failed = outcomes.iter().filter(|(_, _, r)| r.is_err()).count();
    let first_failure = outcomes.into_iter().find_map(|(trial, trial_seed, r)| {
        r.err().map(|detail| TrialFailure {
            trial,
            trial_seed,
            detail,
        })
    });
    SuiteReport {
        name: suite.name(),
        trials,
        passed: trials - failed,
        failed,
        first_failure,
    }
}

pub fn run_all(trials: usize, seed: u64, mutation: Mutation) -> VerifyReport {
    VerifyReport {
        seed,
        trials,
        suites: Suite::ALL
            .iter()
            .map(|&s| run_suite(s, trials, seed, mutation))
            .collect(),
    }
}

/// Full-precision rows of `[re, im]` pairs, pasteable into a state file.
fn fmt_matrix(m: &ComplexMatrix) -> String {
    serde_json::to_string(&matrix_entries(m)).unwrap_or_default()
}

fn eigensolver_trial(rng: &mut TrialRng) -> Result<(), String> {
    let m = hermitian(rng, 4);
    let eig = hermitian_eigen(&m).map_err(|e| format!("{e}; M = {}", fmt_matrix(&m)))?;
    let residual = eig.reconstruct().max_abs_diff(&m);
    if residual > RECONSTRUCTION_TOL {
        return Err(format!(
            "reconstruction residual {residual:e}; M = {}",
            fmt_matrix(&m)
        ));
    }
    let v = &eig.eigenvectors;
    let gram_error = (&v.dagger() * v).max_abs_diff(&ComplexMatrix::identity(4));
    if gram_error > RECONSTRUCTION_TOL {
        return Err(format!(
            "eigenvectors not orthonormal ({gram_error:e}); M = {}",
            fmt_matrix(&m)
        ));
    }
    Ok(())
}

fn fang_trial(rng: &mut TrialRng) -> Result<(), String> {
    let c = hermitian(rng, 4);
    let b = psd(rng, 4);
    let bracket = fang_bounds(&c, &b).map_err(|e| e.to_string())?;
    if !bracket.holds(BRACKET_TOL) {
        return Err(format!(
            "{} <= {} <= {} fails; C = {}, B = {}",
            bracket.lower,
            bracket.value,
            bracket.upper,
            fmt_matrix(&c),
            fmt_matrix(&b)
        ));
    }
    Ok(())
}

fn mutated_dembo_upper(m: &ComplexMatrix, mutation: Mutation) -> Result<f64, String> {
    match mutation {
        Mutation::None => {
            dembo_upper(m, DemboVariant::Classic, EtaMode::Exact).map_err(|e| e.to_string())
        }
        Mutation::DropDemboSqrt => {
            let part = partition(m).map_err(|e| e.to_string())?;
            let eta = hermitian_eigen(&part.leading)
                .map_err(|e| e.to_string())?
                .max();
            Ok((part.corner + eta) / 2.0)
        }
    }
}

fn dembo_trial(rng: &mut TrialRng, mutation: Mutation) -> Result<(), String> {
    let m = psd(rng, 4);
    let err = |what: String| format!("{what}; M = {}", fmt_matrix(&m));
    let lambda_max = hermitian_eigen(&m).map_err(|e| err(e.to_string()))?.max();
    let tol = BRACKET_TOL * lambda_max.max(1.0);
    let lower = dembo_lower(&m).map_err(|e| err(e.to_string()))?;
    let classic = mutated_dembo_upper(&m, mutation).map_err(err)?;
    let paper = dembo_upper(&m, DemboVariant::PaperPrinted, EtaMode::Exact)
        .map_err(|e| err(e.to_string()))?;
    if !(lower <= lambda_max + tol && lambda_max <= classic + tol && classic <= paper + tol) {
        return Err(err(format!(
            "expected lower {lower} <= lambda_max {lambda_max} <= classic {classic} <= printed {paper}"
        )));
    }
    let recursive = dembo_upper(&m, DemboVariant::Classic, EtaMode::Recursive)
        .map_err(|e| err(e.to_string()))?;
    if recursive < classic - 1e-12 * lambda_max.max(1.0) {
        return Err(err(format!(
            "recursive bound {recursive} below exact {classic}"
        )));
    }

    // The chain tr(Cρ) ≤ λ_max(C) ≤ Dembo(C) for a filter-built C.
    let rho = ginibre_state(rng, 4);
    let filter = loop {
        if let Ok(f) = Filter::new(ginibre(rng, 2, 2)) {
            break f;
        }
    };
    let c = construct_c(&filter);
    let value = (&c * &rho).trace().map_err(|e| e.to_string())?.re;
    let top = hermitian_eigen(&c).map_err(|e| e.to_string())?.max();
    let bound = match mutation {
        Mutation::None => dembo_upper_hermitian(&c, DemboVariant::Classic, EtaMode::Exact)
            .map_err(|e| e.to_string())?,
        Mutation::DropDemboSqrt => top,
    };
    if !(value <= top + BRACKET_TOL && top <= bound + BRACKET_TOL) {
        return Err(format!(
            "chain tr(C rho) {value} <= lambda_max(C) {top} <= Dembo {bound} fails; A = {}, rho = {}",
            fmt_matrix(filter.matrix()),
            fmt_matrix(&rho)
        ));
    }
    Ok(())
}

fn oracle_trial(rng: &mut TrialRng) -> Result<(), String> {
    let m = ginibre_state(rng, 4);
    let oracle_seed: u64 = rng.random();
    let rho = DensityMatrix::validate(&m).map_err(|e| e.to_string())?;
    let exact = singlet_fraction(&rho);
    let brute = singlet_fraction_bruteforce(&rho, ORACLE_SAMPLES, oracle_seed);
    if brute > exact + ORACLE_EXCESS || (exact - brute).abs() > ORACLE_AGREEMENT {
        return Err(format!(
            "magic-basis {exact} vs brute force {brute}; rho = {}",
            fmt_matrix(&m)
        ));
    }
    Ok(())
}

fn family_trial(rng: &mut TrialRng) -> Result<(), String> {
    let f: f64 = rng.random_range(1e-3..=1.0);
    let rho = rho_family(f).map_err(|e| e.to_string())?;
    let sf = singlet_fraction(&rho);
    let expected = f.max((1.0 - f) / 2.0);
    if (sf - expected).abs() > FAMILY_TOL {
        return Err(format!(
            "F = {f}: singlet fraction {sf}, expected {expected}"
        ));
    }
    let c = concurrence(&rho);
    if (c - f).abs() > FAMILY_TOL {
        return Err(format!("F = {f}: concurrence {c}"));
    }
    let pt_min = partial_transpose_min_eigenvalue(&rho);
    // ρ(F)^{T_B} restricted to span{|01>, |10>} is [[1-F, F/2], [F/2, 0]].
    let expected_pt = ((1.0 - f) - (1.0 - f).hypot(f)) / 2.0;
    if (pt_min - expected_pt).abs() > FAMILY_TOL {
        return Err(format!(
            "F = {f}: partial transpose minimum {pt_min}, expected {expected_pt}"
        ));
    }
    if let Some(low) = f_d_closed(f).ok().and_then(|b| b.low) {
        let star = f_star_closed(f).map_err(|e| e.to_string())?;
        if f < 2.0 / 3.0 && star >= low {
            return Err(format!("F = {f}: F* {star} not below F*_D {low}"));
        }
        let opt = f_opt_closed(f).map_err(|e| e.to_string())?;
        if (opt - low).abs() > CLOSED_FORM_TOL {
            return Err(format!("F = {f}: F*_opt {opt} differs from F*_D {low}"));
        }
    }
    Ok(())
}

fn identity_trial(rng: &mut TrialRng) -> Result<(), String> {
    let f_d: f64 = rng.random_range(0.5..1.0);
    let trace_term: f64 = rng.random_range(0.0..0.5);
    let f_star_filtered: f64 = rng.random_range(0.25..1.0);
    let d = double_filter(f_d, trace_term, f_star_filtered).map_err(|e| e.to_string())?;
    if (d.f_opt - f_d).abs() > CLOSED_FORM_TOL {
        return Err(format!(
            "f_opt {} != f_d {f_d} (trace_term {trace_term}, F*(rho_f) {f_star_filtered})",
            d.f_opt
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke_run_passes() {
        let report = run_all(3, 7, Mutation::None);
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.suites.len(), Suite::ALL.len());
    }

    #[test]
    fn dropped_sqrt_is_caught() {
        let report = run_suite(Suite::DemboValidity, 20, 1, Mutation::DropDemboSqrt);
        assert!(report.failed > 0);
        let failure = report.first_failure.unwrap();
        assert!(failure.detail.contains("M = "));
    }

    #[test]
    fn aggregation_is_deterministic() {
        let a = run_suite(Suite::FangSandwich, 50, 11, Mutation::None);
        let b = run_suite(Suite::FangSandwich, 50, 11, Mutation::None);
        assert_eq!(a.passed, b.passed);
        assert_eq!(a.failed, 0);
    }
}
