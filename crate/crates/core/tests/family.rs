//! Closed forms on the rho(F) family checked against the numeric engines.

use singlet_core::bounds::f_d_closed;
use singlet_core::fidelity::singlet_fraction;
use singlet_core::filtering::{
    f_opt_closed, f_star_closed, optimize_filter, p_ab_min_closed,
    trace_preserving_singlet_fraction, Filter,
};
use singlet_core::linalg::ComplexMatrix;
use singlet_core::states::{concurrence, is_entangled_ppt, rho_family};

fn grid(from: f64, to: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((to - from) / step + 1e-9).floor() as usize;
    (0..=n).map(move |k| from + k as f64 * step)
}

#[test]
fn certificates_on_hundredth_grid() {
    for f in grid(0.01, 1.0, 0.01) {
        let rho = rho_family(f).unwrap();
        assert!((concurrence(&rho) - f).abs() <= 1e-10, "F = {f}");
        assert!(is_entangled_ppt(&rho), "F = {f}");
        let expected = f.max((1.0 - f) / 2.0);
        assert!(
            (singlet_fraction(&rho) - expected).abs() <= 1e-10,
            "F = {f}"
        );
    }
    assert!(!is_entangled_ppt(&rho_family(0.0).unwrap()));
}

#[test]
fn filtered_fraction_stays_below_dembo_bound() {
    for f in grid(1.0 / 3.0, 2.0 / 3.0 - 0.001, 0.001) {
        let star = f_star_closed(f).unwrap();
        let bound = f_d_closed(f).unwrap().low.unwrap();
        assert!(star < bound, "F = {f}: {star} vs {bound}");
        assert!((f_opt_closed(f).unwrap() - bound).abs() <= 1e-12);
    }
}

#[test]
fn closed_form_plug_ins() {
    assert!((f_star_closed(1.0 / 3.0).unwrap() - 25.0 / 48.0).abs() <= 1e-12);
    assert!((f_star_closed(0.5).unwrap() - 0.5625).abs() <= 1e-12);
    assert!((f_d_closed(1.0 / 3.0).unwrap().value - 0.625).abs() <= 1e-12);
    assert!((f_d_closed(0.5).unwrap().value - 0.75).abs() <= 1e-12);
    for (f, p) in [(1.0 / 3.0, 0.05), (0.5, 1.0 / 6.0), (2.0 / 3.0, 0.5)] {
        assert!((p_ab_min_closed(f).unwrap() - p).abs() <= 1e-12, "F = {f}");
    }
}

#[test]
fn diagonal_filter_reaches_closed_form() {
    // A = diag(F / (2(1 - F)), 1) on qubit A attains the filtered optimum below 2/3.
    for f in grid(0.35, 0.65, 0.05) {
        let a = ComplexMatrix::from_real_diag(&[f / (2.0 * (1.0 - f)), 1.0]);
        let value =
            trace_preserving_singlet_fraction(&rho_family(f).unwrap(), &Filter::new(a).unwrap());
        assert!(
            (value - f_star_closed(f).unwrap()).abs() <= 1e-12,
            "F = {f}"
        );
    }
}

#[test]
fn optimizer_matches_closed_form() {
    for f in grid(0.35, 0.95, 0.05) {
        let best = optimize_filter(&rho_family(f).unwrap(), 32, 42);
        let expected = f_star_closed(f).unwrap();
        assert!(
            (best.value - expected).abs() <= 1e-3,
            "F = {f}: {} vs {expected}",
            best.value
        );
    }
}
