//! Trace inequality brackets, Dembo's block-partition eigenvalue bounds and
//! the singlet-fraction bounds built on them.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filtering::Filter;
use crate::linalg::{
    hermitian_eigen, partial_transpose, symmetrize_checked, ComplexMatrix, Subsystem, C64,
};
use crate::states::{BellKind, DensityMatrix};

/// Tolerance for PSD checks on bound inputs, relative to `max(1, ||M||_F)`.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance of the trace-inequality bracket.
pub const FANG_TOL: f64 = 1e-10;

const THIRD: f64 = 1.0 / 3.0;
const TWO_THIRDS: f64 = 2.0 / 3.0;
const DOMAIN_SLACK: f64 = 1e-12;

/// `X = (A ⊗ I)|Ψ⁻><Ψ⁻|(A ⊗ I)^dagger`.
pub fn construct_x(filter: &Filter) -> ComplexMatrix {
    filter.sandwich(&ComplexMatrix::projector(&BellKind::PsiMinus.ket()))
}

/// `C = I/2 - X^Γ`, partial transpose on qubit B.
pub fn construct_c(filter: &Filter) -> ComplexMatrix {
    let x_gamma = partial_transpose(&construct_x(filter), Subsystem::B).unwrap();
    (&ComplexMatrix::identity(4).scale_real(0.5) - &x_gamma).hermitian_part()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FangBracket {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl FangBracket {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower - tol <= self.value && self.value <= self.upper + tol
    }
}

fn psd_min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let min = hermitian_eigen(m)?.min();
    if min < -PSD_TOL * m.frobenius_norm().max(1.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(min)
}

/// `λ₁(C̄) tr(B) ≤ Re Tr(CB) ≤ λₙ(C̄) tr(B)` with `C̄ = (C + C^dagger)/2`.
pub fn fang_bounds(c_mat: &ComplexMatrix, b_mat: &ComplexMatrix) -> Result<FangBracket> {
    if !c_mat.is_square() || c_mat.rows() != b_mat.rows() || !b_mat.is_square() {
        return Err(Error::Dimension {
            op: "fang_bounds",
            detail: format!(
                "C is {}x{}, B is {}x{}",
                c_mat.rows(),
                c_mat.cols(),
                b_mat.rows(),
                b_mat.cols()
            ),
        });
    }
    psd_min_eigenvalue(b_mat)?;
    let spectrum = hermitian_eigen(&c_mat.hermitian_part())?;
    let tr_b = b_mat.trace()?.re;
    let bracket = FangBracket {
        lower: spectrum.min() * tr_b,
        value: c_mat.matmul(b_mat)?.trace()?.re,
        upper: spectrum.max() * tr_b,
    };
    debug_assert!(
        bracket.holds(FANG_TOL * c_mat.frobenius_norm().max(1.0) * b_mat.frobenius_norm().max(1.0)),
        "{bracket:?}"
    );
    Ok(bracket)
}

/// `R_n = [[R_{n-1}, b], [b^dagger, c]]`.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub leading: ComplexMatrix,
    pub edge: Vec<C64>,
    pub corner: f64,
}

impl BlockPartition {
    /// `b^dagger b`.
    pub fn edge_norm_sqr(&self) -> f64 {
        self.edge.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn reassemble(&self) -> ComplexMatrix {
        let n = self.edge.len() + 1;
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                m[(i, j)] = self.leading[(i, j)];
            }
            m[(i, n - 1)] = self.edge[i];
            m[(n - 1, i)] = self.edge[i].conj();
        }
        m[(n - 1, n - 1)] = C64::new(self.corner, 0.0);
        m
    }
}

pub fn partition(m: &ComplexMatrix) -> Result<BlockPartition> {
    let m = symmetrize_checked(m)?;
    let n = m.rows();
    if n < 2 {
        return Err(Error::Dimension {
            op: "partition",
            detail: "need at least a 2x2 matrix".into(),
        });
    }
    let mut leading = ComplexMatrix::zeros(n - 1, n - 1);
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            leading[(i, j)] = m[(i, j)];
        }
    }
    Ok(BlockPartition {
        leading,
        edge: (0..n - 1).map(|i| m[(i, n - 1)]).collect(),
        corner: m[(n - 1, n - 1)].re,
    })
}

/// Denominator under the square root of the upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DemboVariant {
    /// `(c - η)² / 4`: the sharp classical form.
    Classic,
    /// `(c - η)² / 2`: the looser form used for the singlet-fraction bound.
    PaperPrinted,
}

impl DemboVariant {
    pub fn denominator(self) -> f64 {
        match self {
            DemboVariant::Classic => 4.0,
            DemboVariant::PaperPrinted => 2.0,
        }
    }
}

/// How the leading block's extreme eigenvalue `η` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaMode {
    /// From the eigensolver.
    Exact,
    /// From the same bound applied to the leading block, down to 1×1.
    Recursive,
}

/// `(c + η)/2 + sqrt((c - η)²/d + b^dagger b)`.
pub fn dembo_formula(corner: f64, eta: f64, edge_norm_sqr: f64, denominator: f64) -> f64 {
    let gap = corner - eta;
    (corner + eta) / 2.0 + (gap * gap / denominator + edge_norm_sqr).sqrt()
}

/// Upper bound on `λ_max` of a Hermitian matrix, without a PSD check. The
/// bound argument only needs `η ≥ λ_max(R_{n-1})`, not positivity.
pub fn dembo_upper_hermitian(
    m: &ComplexMatrix,
    variant: DemboVariant,
    mode: EtaMode,
) -> Result<f64> {
    let part = partition(m)?;
    let eta = match mode {
        EtaMode::Exact => hermitian_eigen(&part.leading)?.max(),
        EtaMode::Recursive => recursive_eta(&part.leading, variant)?,
    };
    Ok(dembo_formula(
        part.corner,
        eta,
        part.edge_norm_sqr(),
        variant.denominator(),
    ))
}

fn recursive_eta(leading: &ComplexMatrix, variant: DemboVariant) -> Result<f64> {
    if leading.rows() == 1 {
        Ok(leading[(0, 0)].re)
    } else {
        dembo_upper_hermitian(leading, variant, EtaMode::Recursive)
    }
}

/// Dembo upper bound on `λ_max` of a Hermitian PSD matrix.
pub fn dembo_upper(m: &ComplexMatrix, variant: DemboVariant, mode: EtaMode) -> Result<f64> {
    psd_min_eigenvalue(&symmetrize_checked(m)?)?;
    dembo_upper_hermitian(m, variant, mode)
}

/// Dembo lower bound on `λ_max` of a Hermitian PSD matrix, using the exact
/// smallest eigenvalue of the leading block.
pub fn dembo_lower(m: &ComplexMatrix) -> Result<f64> {
    psd_min_eigenvalue(&symmetrize_checked(m)?)?;
    let part = partition(m)?;
    let eta = hermitian_eigen(&part.leading)?.min();
    Ok(dembo_formula(part.corner, eta, part.edge_norm_sqr(), 4.0))
}

/// Dembo upper bound of `C = I/2 - X^Γ` built from `filter`, with exact `η₃`.
/// `C` need not be PSD; see [`dembo_upper_hermitian`].
pub fn dembo_bound_for_state(
    _rho: &DensityMatrix,
    filter: &Filter,
    variant: DemboVariant,
) -> Result<f64> {
    dembo_upper_hermitian(&construct_c(filter), variant, EtaMode::Exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    Low,
    High,
}

/// Closed-form `F*_D` on `ρ(F)`. The two printed branches disagree at
/// `F = 2/3` (1 versus 2/3), so both are kept there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormBound {
    pub value: f64,
    pub branch: Branch,
    /// `(2 - F) / (4(1 - F))` where defined (`F ≤ 2/3`).
    pub low: Option<f64>,
    /// `F` where defined (`F ≥ 2/3`).
    pub high: Option<f64>,
}

impl ClosedFormBound {
    pub fn is_discontinuous(&self) -> bool {
        matches!((self.low, self.high), (Some(l), Some(h)) if l != h)
    }
}

pub fn f_d_closed(f: f64) -> Result<ClosedFormBound> {
    if !(THIRD - DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&f) {
        return Err(Error::Domain {
            name: "F",
            value: f,
            domain: "[1/3, 1]",
        });
    }
    let f = f.clamp(THIRD, 1.0);
    let at_boundary = (f - TWO_THIRDS).abs() <= DOMAIN_SLACK;
    let low = (f < TWO_THIRDS || at_boundary).then(|| (2.0 - f) / (4.0 * (1.0 - f)));
    let high = (f > TWO_THIRDS || at_boundary).then_some(f);
    let (value, branch) = match (low, high) {
        (_, Some(h)) => (h, Branch::High),
        (Some(l), None) => (l, Branch::Low),
        (None, None) => unreachable!(),
    };
    Ok(ClosedFormBound {
        value,
        branch,
        low,
        high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::overlap_phi_plus;
    use crate::linalg::{eigenvalues, ONE};
    use crate::random::{ginibre_state, psd, trial_rng};
    use crate::states::rho_family;

    fn diag(d: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(d)
    }

    #[test]
    fn x_and_c_for_identity_filter() {
        let id = Filter::identity();
        let x = construct_x(&id);
        assert!(x.max_abs_diff(&ComplexMatrix::projector(&BellKind::PsiMinus.ket())) < 1e-15);
        let c = construct_c(&id);
        assert!(c.max_abs_diff(&ComplexMatrix::projector(&BellKind::PhiPlus.ket())) < 1e-15);
        let ev = eigenvalues(&c).unwrap();
        for (got, want) in ev.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let mut rng = trial_rng(5, 0, 0);
        for _ in 0..20 {
            let rho = DensityMatrix::validate(&ginibre_state(&mut rng, 4)).unwrap();
            let v = c.matmul(rho.matrix()).unwrap().trace().unwrap().re;
            assert!((v - overlap_phi_plus(&rho)).abs() < 1e-12);
        }
    }

    #[test]
    fn x_trace_rank_and_c_hermiticity() {
        let mut rng = trial_rng(6, 0, 0);
        for _ in 0..50 {
            let filter = Filter::new(crate::random::ginibre(&mut rng, 2, 2)).unwrap();
            let a = filter.matrix();
            let x = construct_x(&filter);
            let expected = (a * &a.dagger()).trace().unwrap().re / 2.0;
            assert!((x.trace().unwrap().re - expected).abs() < 1e-12);
            let ev = eigenvalues(&x).unwrap();
            assert!(ev[2].abs() <= 1e-12, "{ev:?}");
            assert!(construct_c(&filter).hermitian_deviation() <= 1e-12);
        }
    }

    #[test]
    fn fang_examples() {
        let rho = rho_family(0.5).unwrap();
        let b = fang_bounds(&ComplexMatrix::identity(4), rho.matrix()).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12);
        assert!((b.value - 1.0).abs() < 1e-12);
        assert!((b.upper - 1.0).abs() < 1e-12);

        let c = construct_c(&Filter::identity());
        let b = fang_bounds(&c, rho.matrix()).unwrap();
        assert!(b.lower.abs() < 1e-12);
        assert!((b.value - 0.5).abs() < 1e-12);
        assert!((b.upper - 1.0 * 1.0).abs() < 1e-12);

        let not_psd = diag(&[1.0, -0.5, 0.2, 0.3]);
        assert!(matches!(
            fang_bounds(&ComplexMatrix::identity(4), &not_psd),
            Err(Error::NotPsd { .. })
        ));
        assert!(fang_bounds(&ComplexMatrix::identity(3), rho.matrix()).is_err());
    }

    #[test]
    fn fang_on_family_with_identity_filter_gives_upper_one() {
        // λ_max(|Φ⁺><Φ⁺|) = 1, tr(ρ) = 1.
        let b = fang_bounds(
            &construct_c(&Filter::identity()),
            rho_family(0.5).unwrap().matrix(),
        );
        assert!((b.unwrap().upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_examples() {
        let p = partition(&diag(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!(p.leading.max_abs_diff(&diag(&[1.0, 2.0, 3.0])) < 1e-15);
        assert_eq!(p.edge_norm_sqr(), 0.0);
        assert_eq!(p.corner, 4.0);

        let b = C64::new(0.3, -0.7);
        let m = ComplexMatrix::from_vec(2, 2, vec![ONE * 2.0, b, b.conj(), ONE * 5.0]).unwrap();
        let p = partition(&m).unwrap();
        assert_eq!(p.leading[(0, 0)], ONE * 2.0);
        assert_eq!(p.edge, vec![b]);
        assert_eq!(p.corner, 5.0);
        assert_eq!(p.reassemble(), m);

        let mut rng = trial_rng(8, 0, 0);
        let h = crate::random::hermitian(&mut rng, 4);
        assert!(partition(&h).unwrap().reassemble().max_abs_diff(&h) < 1e-15);

        let skew = ComplexMatrix::from_vec(2, 2, vec![ONE, ONE, ONE * 0.0, ONE]).unwrap();
        assert!(matches!(partition(&skew), Err(Error::NotHermitian { .. })));
        assert!(partition(&ComplexMatrix::identity(1)).is_err());
    }

    #[test]
    fn dembo_on_diagonal() {
        let m = diag(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(
            dembo_upper(&m, DemboVariant::Classic, EtaMode::Exact).unwrap(),
            4.0
        );
        let printed = dembo_upper(&m, DemboVariant::PaperPrinted, EtaMode::Exact).unwrap();
        assert!((printed - (3.5 + 0.5f64.sqrt())).abs() < 1e-15);
        assert!(printed > 4.0);
        assert_eq!(dembo_lower(&m).unwrap(), 4.0);
        assert!(matches!(
            dembo_upper(&diag(&[1.0, -1.0]), DemboVariant::Classic, EtaMode::Exact),
            Err(Error::NotPsd { .. })
        ));
        assert!(dembo_lower(&diag(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn dembo_on_identity_filter_c() {
        let c = construct_c(&Filter::identity());
        for v in [DemboVariant::Classic, DemboVariant::PaperPrinted] {
            let bound = dembo_upper(&c, v, EtaMode::Exact).unwrap();
            assert!(bound >= 1.0 - 1e-12, "{v:?}: {bound}");
            let rho = rho_family(0.4).unwrap();
            assert_eq!(
                dembo_bound_for_state(&rho, &Filter::identity(), v).unwrap(),
                bound
            );
        }
    }

    #[test]
    fn dembo_rank_one_bracket() {
        let v: Vec<C64> = [0.3, -1.2, 0.5, 2.0]
            .iter()
            .map(|&x| C64::new(x, 0.4 * x))
            .collect();
        let m = ComplexMatrix::projector(&v);
        let lambda: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let lower = dembo_lower(&m).unwrap();
        let upper = dembo_upper(&m, DemboVariant::Classic, EtaMode::Exact).unwrap();
        assert!(lower <= lambda + 1e-12 && lambda <= upper + 1e-12);
    }

    #[test]
    fn dembo_random_psd_sandwich() {
        let mut rng = trial_rng(10, 0, 0);
        for _ in 0..200 {
            let m = psd(&mut rng, 4);
            let lmax = hermitian_eigen(&m).unwrap().max();
            let lower = dembo_lower(&m).unwrap();
            let classic = dembo_upper(&m, DemboVariant::Classic, EtaMode::Exact).unwrap();
            let printed = dembo_upper(&m, DemboVariant::PaperPrinted, EtaMode::Exact).unwrap();
            let tol = 1e-12 * lmax.max(1.0);
            assert!(lower <= lmax + tol && lmax <= classic + tol && classic <= printed + tol);
        }
    }

    #[test]
    fn closed_form_branches() {
        let b = f_d_closed(0.5).unwrap();
        assert_eq!((b.value, b.branch), (0.75, Branch::Low));
        let b = f_d_closed(1.0 / 3.0).unwrap();
        assert!((b.value - 0.625).abs() < 1e-15);
        assert_eq!(b.branch, Branch::Low);
        let b = f_d_closed(0.8).unwrap();
        assert_eq!((b.value, b.branch, b.low), (0.8, Branch::High, None));

        let edge = f_d_closed(2.0 / 3.0).unwrap();
        assert!((edge.low.unwrap() - 1.0).abs() < 1e-12);
        assert!((edge.high.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(edge.is_discontinuous());
        assert!(!b.is_discontinuous());

        assert!(f_d_closed(0.3).is_err());
        assert!(f_d_closed(f64::NAN).is_err());
    }
}
