//! Per-state analysis: every fidelity quantity and bound for one state,
//! plus anomaly flags for the places where the bound pipeline does not hold
//! together numerically.

use serde::Serialize;

use crate::bounds::{
    construct_c, dembo_upper_hermitian, f_d_closed, fang_bounds, ClosedFormBound, DemboVariant,
    EtaMode,
};
use crate::error::Result;
use crate::fidelity::{overlap_phi_plus, teleportation_fidelity};
use crate::filtering::{
    double_filter, f_star_closed, optimize_filter, trace_term, DoubleFilter, Filter, FilterSearch,
};
use crate::linalg::{hermitian_eigen, ComplexMatrix};
use crate::states::{
    concurrence, in_family_regime, is_entangled_ppt, partial_transpose_min_eigenvalue, rho_family,
    BellKind, DensityMatrix,
};

pub const FLAG_C_NOT_PSD: &str = "C_not_psd";
pub const FLAG_IMPLIED_OVERLAP: &str = "implied_overlap_out_of_range";
pub const FLAG_P_AB_MIN: &str = "p_ab_min_out_of_range";
pub const FLAG_BRANCH_DISCONTINUITY: &str = "f_d_closed_branch_discontinuity";
pub const FLAG_BELOW_REGIME: &str = "family_below_stated_regime";
pub const FLAG_FANG_VALUE: &str = "fang_value_differs_from_f_star";
pub const FLAG_F_STAR_ABOVE_DEMBO: &str = "f_star_exceeds_dembo_bound";

/// Tolerance used when deciding whether an anomaly is real.
pub const ANOMALY_TOL: f64 = 1e-10;
/// Agreement expected of two numerically optimized quantities.
const NUMERIC_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Use `A = I` instead of the optimized filter.
    pub identity_filter: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            restarts: FilterSearch::default().restarts,
            seed: 42,
            identity_filter: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FilterSummary {
    pub kind: &'static str,
    /// Rows of `A` as `[re, im]` pairs, the same layout as state files.
    pub entries: Vec<Vec<[f64; 2]>>,
    pub success_probability: f64,
    pub filtered_singlet_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub family_f: Option<f64>,
    pub overlap: f64,
    pub singlet_fraction: f64,
    pub teleportation_fidelity: f64,
    pub useful_for_teleportation: bool,
    pub concurrence: f64,
    pub entangled_ppt: bool,
    pub ppt_min_eigenvalue: f64,
    pub filter: FilterSummary,
    /// Trace-preserving singlet fraction reached with `filter`.
    pub f_star_numeric: f64,
    pub f_star_closed: Option<f64>,
    pub fang_lower: f64,
    pub fang_value: f64,
    pub fang_upper: f64,
    pub c_min_eigenvalue: f64,
    pub c_max_eigenvalue: f64,
    pub dembo_upper_classic: f64,
    pub dembo_upper_paper: f64,
    pub f_d_closed: Option<ClosedFormBound>,
    pub double_filter: Option<DoubleFilter>,
    pub flags: Vec<String>,
}

impl BoundReport {
    /// Structural invariants of the report itself.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let tol = ANOMALY_TOL;
        if !(self.fang_lower - tol <= self.fang_value && self.fang_value <= self.fang_upper + tol) {
            return Err(format!(
                "Fang bracket violated: {} <= {} <= {}",
                self.fang_lower, self.fang_value, self.fang_upper
            ));
        }
        if self.dembo_upper_paper < self.dembo_upper_classic - tol {
            return Err(format!(
                "printed Dembo bound {} below classic {}",
                self.dembo_upper_paper, self.dembo_upper_classic
            ));
        }
        Ok(())
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

pub fn matrix_entries(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn analyze_family(f: f64, options: &AnalyzeOptions) -> Result<BoundReport> {
    let rho = rho_family(f)?;
    analyze(&rho, Some(f), options)
}

pub fn analyze(
    rho: &DensityMatrix,
    family_f: Option<f64>,
    options: &AnalyzeOptions,
) -> Result<BoundReport> {
    let mut flags = Vec::new();
    let fidelity = teleportation_fidelity(rho);

    let (filter, kind, f_star_numeric, success_probability, filtered_sf) =
        if options.identity_filter {
            let sf = fidelity.singlet_fraction;
            (Filter::identity(), "identity", sf, 1.0, sf)
        } else {
            let opt = optimize_filter(rho, options.restarts, options.seed);
            (
                opt.filter,
                "optimized",
                opt.value,
                opt.success_probability,
                opt.filtered_singlet_fraction,
            )
        };

    let c = construct_c(&filter);
    let c_spectrum = hermitian_eigen(&c)?;
    if c_spectrum.min() < -ANOMALY_TOL {
        flags.push(FLAG_C_NOT_PSD.to_string());
    }
    let fang = fang_bounds(&c, rho.matrix())?;
    if (fang.value - f_star_numeric).abs() > NUMERIC_AGREEMENT {
        flags.push(FLAG_FANG_VALUE.to_string());
    }
    let dembo_classic = dembo_upper_hermitian(&c, DemboVariant::Classic, EtaMode::Exact)?;
    let dembo_paper = dembo_upper_hermitian(&c, DemboVariant::PaperPrinted, EtaMode::Exact)?;
    if f_star_numeric > dembo_classic + ANOMALY_TOL {
        flags.push(FLAG_F_STAR_ABOVE_DEMBO.to_string());
    }

    let mut f_star_closed_value = None;
    let mut f_d = None;
    if let Some(f) = family_f {
        if !in_family_regime(f) {
            flags.push(FLAG_BELOW_REGIME.to_string());
        } else {
            f_star_closed_value = Some(f_star_closed(f)?);
            let closed = f_d_closed(f)?;
            if closed.is_discontinuous() {
                flags.push(FLAG_BRANCH_DISCONTINUITY.to_string());
            }
            f_d = Some(closed);
        }
    }

    let target_f_d = f_d.map_or(dembo_classic, |b| b.value);
    let tt = trace_term(rho, &filter, BellKind::PhiPlus);
    let double = double_filter(target_f_d, tt, f_star_numeric).ok();
    if let Some(d) = &double {
        if !d.p_ab_min.in_unit_interval {
            flags.push(FLAG_P_AB_MIN.to_string());
        }
        if !d.implied_overlap_in_range {
            flags.push(FLAG_IMPLIED_OVERLAP.to_string());
        }
    }

    let entries = matrix_entries(filter.matrix());
    let mut report = BoundReport {
        family_f,
        overlap: overlap_phi_plus(rho),
        singlet_fraction: fidelity.singlet_fraction,
        teleportation_fidelity: fidelity.teleportation_fidelity,
        useful_for_teleportation: fidelity.useful_for_teleportation,
        concurrence: concurrence(rho),
        entangled_ppt: is_entangled_ppt(rho),
        ppt_min_eigenvalue: partial_transpose_min_eigenvalue(rho),
        filter: FilterSummary {
            kind,
            entries,
            success_probability,
            filtered_singlet_fraction: filtered_sf,
        },
        f_star_numeric,
        f_star_closed: f_star_closed_value,
        fang_lower: fang.lower,
        fang_value: fang.value,
        fang_upper: fang.upper,
        c_min_eigenvalue: c_spectrum.min(),
        c_max_eigenvalue: c_spectrum.max(),
        dembo_upper_classic: dembo_classic,
        dembo_upper_paper: dembo_paper,
        f_d_closed: f_d,
        double_filter: double,
        flags,
    };
    if let Err(why) = report.check_invariants() {
        report.flags.push(format!("invariant_violation: {why}"));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_half_with_optimized_filter() {
        let r = analyze_family(0.5, &AnalyzeOptions::default()).unwrap();
        assert!((r.singlet_fraction - 0.5).abs() < 1e-12);
        assert!((r.teleportation_fidelity - 2.0 / 3.0).abs() < 1e-12);
        assert!(!r.useful_for_teleportation);
        assert_eq!(r.f_d_closed.unwrap().value, 0.75);
        assert!((r.f_star_numeric - 0.5625).abs() < 1e-3);
        assert!(r.has_flag(FLAG_IMPLIED_OVERLAP), "{:?}", r.flags);
        let d = r.double_filter.unwrap();
        assert!((d.f_opt - 0.75).abs() < 1e-12);
        assert!(r.check_invariants().is_ok());
    }

    #[test]
    fn identity_filter_report() {
        let opts = AnalyzeOptions {
            identity_filter: true,
            ..Default::default()
        };
        let r = analyze_family(0.8, &opts).unwrap();
        assert_eq!(r.filter.kind, "identity");
        assert!((r.fang_value - 0.8).abs() < 1e-12);
        assert!(!r.has_flag(FLAG_C_NOT_PSD));
        assert!(!r.has_flag(FLAG_FANG_VALUE));
    }

    #[test]
    fn boundary_and_regime_flags() {
        let opts = AnalyzeOptions {
            identity_filter: true,
            ..Default::default()
        };
        let r = analyze_family(2.0 / 3.0, &opts).unwrap();
        assert!(r.has_flag(FLAG_BRANCH_DISCONTINUITY));
        let r = analyze_family(0.2, &opts).unwrap();
        assert!(r.has_flag(FLAG_BELOW_REGIME));
        assert!(r.f_d_closed.is_none());
    }

    #[test]
    fn maximally_mixed_state() {
        let r = analyze(
            &DensityMatrix::maximally_mixed(),
            None,
            &AnalyzeOptions::default(),
        )
        .unwrap();
        assert!((r.singlet_fraction - 0.25).abs() < 1e-12);
        assert!(!r.entangled_ppt);
        assert!(r.concurrence.abs() < 1e-12);
    }
}
