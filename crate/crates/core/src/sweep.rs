//! Tabulation of the closed-form and numeric singlet-fraction quantities
//! over the `ρ(F)` family, written as CSV.

use std::io::{self, Write};

use crate::bounds::f_d_closed;
use crate::error::{Error, Result};
use crate::fidelity::{overlap_phi_plus, singlet_fraction, teleportation_fidelity_of};
use crate::filtering::{
    f_opt_closed, f_star_closed, optimize_filter_with, p_ab_min_closed, FilterSearch,
};
use crate::states::{concurrence, rho_family};

pub const CSV_HEADER: &str = "F,overlap,singlet_fraction,F_star_closed,F_star_numeric,F_D_closed_low,F_D_closed_high,f_T,p_ab_min_closed,F_opt_closed,concurrence";

pub const DEFAULT_FROM: f64 = 1.0 / 3.0;
pub const DEFAULT_TO: f64 = 1.0;
pub const DEFAULT_STEP: f64 = 0.005;

const BRANCH_BOUNDARY: f64 = 2.0 / 3.0;
const GRID_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub f: f64,
    pub overlap: f64,
    pub singlet_fraction: f64,
    pub f_star_closed: f64,
    pub f_star_numeric: Option<f64>,
    pub f_d_closed_low: Option<f64>,
    pub f_d_closed_high: Option<f64>,
    pub f_t: f64,
    pub p_ab_min_closed: Option<f64>,
    pub f_opt_closed: Option<f64>,
    pub concurrence: f64,
}

impl SweepRecord {
    pub fn at(f: f64, numeric: Option<(&FilterSearch, u64)>) -> Result<Self> {
        let rho = rho_family(f)?;
        let closed = f_d_closed(f)?;
        let sf = singlet_fraction(&rho);
        Ok(Self {
            f,
            overlap: overlap_phi_plus(&rho),
            singlet_fraction: sf,
            f_star_closed: f_star_closed(f)?,
            f_star_numeric: numeric
                .map(|(search, seed)| optimize_filter_with(&rho, search, seed).value),
            f_d_closed_low: closed.low,
            f_d_closed_high: closed.high,
            f_t: teleportation_fidelity_of(sf),
            p_ab_min_closed: p_ab_min_closed(f).ok(),
            f_opt_closed: f_opt_closed(f).ok(),
            concurrence: concurrence(&rho),
        })
    }

    /// Row invariants: `F* ≤ F*_D` on the low branch (strictly below 2/3)
    /// and `F*_opt = F*_D` wherever both closed forms exist.
    pub fn check(&self) -> std::result::Result<(), String> {
        if let Some(low) = self.f_d_closed_low {
            if self.f < BRANCH_BOUNDARY - GRID_SLACK && self.f_star_closed > low + 1e-12 {
                return Err(format!(
                    "F = {}: F* = {} exceeds F*_D = {low}",
                    self.f, self.f_star_closed
                ));
            }
            if let Some(opt) = self.f_opt_closed {
                if (opt - low).abs() > 1e-12 {
                    return Err(format!("F = {}: F*_opt = {opt} but F*_D = {low}", self.f));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv_row(&self) -> String {
        let cell = |v: Option<f64>| v.map(format_g12).unwrap_or_default();
        [
            format_g12(self.f),
            format_g12(self.overlap),
            format_g12(self.singlet_fraction),
            format_g12(self.f_star_closed),
            cell(self.f_star_numeric),
            cell(self.f_d_closed_low),
            cell(self.f_d_closed_high),
            format_g12(self.f_t),
            cell(self.p_ab_min_closed),
            cell(self.f_opt_closed),
            format_g12(self.concurrence),
        ]
        .join(",")
    }
}

/// Grid `from, from + step, ...` up to `to`, with the branch boundary 2/3
/// added when it falls strictly inside the range.
pub fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(from.is_finite() && from >= DEFAULT_FROM - GRID_SLACK) {
        return Err(Error::Domain {
            name: "from",
            value: from,
            domain: "[1/3, to)",
        });
    }
    if !(to.is_finite() && to > from && to <= 1.0 + GRID_SLACK) {
        return Err(Error::Domain {
            name: "to",
            value: to,
            domain: "(from, 1]",
        });
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain {
            name: "step",
            value: step,
            domain: "(0, inf)",
        });
    }
    let count = ((to - from) / step + 1e-9).floor() as usize;
    let mut points: Vec<f64> = (0..=count)
        .map(|k| (from + k as f64 * step).clamp(DEFAULT_FROM, 1.0))
        .collect();
    let boundary_inside = from < BRANCH_BOUNDARY && BRANCH_BOUNDARY < to;
    if boundary_inside
        && !points
            .iter()
            .any(|p| (p - BRANCH_BOUNDARY).abs() <= GRID_SLACK)
    {
        points.push(BRANCH_BOUNDARY);
        points.sort_by(f64::total_cmp);
    }
    Ok(points)
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub from: f64,
    pub to: f64,
    pub step: f64,
    /// Run the filter optimizer at every point for `F_star_numeric`.
    pub numeric: bool,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            from: DEFAULT_FROM,
            to: DEFAULT_TO,
            step: DEFAULT_STEP,
            numeric: false,
            restarts: FilterSearch::default().restarts,
            seed: 42,
        }
    }
}

pub fn sweep(options: &SweepOptions) -> Result<Vec<SweepRecord>> {
    let search = FilterSearch::with_restarts(options.restarts);
    let numeric = options.numeric.then_some((&search, options.seed));
    grid(options.from, options.to, options.step)?
        .into_iter()
        .map(|f| SweepRecord::at(f, numeric))
        .collect()
}

pub fn write_csv<W: Write>(out: &mut W, records: &[SweepRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

/// `%.12g`: 12 significant digits, trailing zeros dropped.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
