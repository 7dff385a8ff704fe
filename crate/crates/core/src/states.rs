//! Two-qubit density matrices: validation, Bell states, the `ρ(F)` family
//! and entanglement certificates (concurrence and PPT).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, partial_transpose, sigma_y, ComplexMatrix, Subsystem, C64, ONE, ZERO,
};

/// Tolerance for every [`DensityMatrix`] invariant.
pub const STATE_TOL: f64 = 1e-10;

/// Lower edge of the regime in which the closed forms for `ρ(F)` are stated.
pub const FAMILY_REGIME_MIN: f64 = 1.0 / 3.0;

/// Validated two-qubit state: 4×4, Hermitian, unit trace and PSD, each to
/// [`STATE_TOL`]. The stored matrix is exactly Hermitian.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn validate(m: &ComplexMatrix) -> Result<Self> {
        if m.rows() != 4 || m.cols() != 4 {
            return Err(Error::Dimension {
                op: "validate",
                detail: format!("expected 4x4, got {}x{}", m.rows(), m.cols()),
            });
        }
        let deviation = m.hermitian_deviation();
        if !(deviation <= STATE_TOL) {
            return Err(Error::NotHermitian { deviation });
        }
        let mat = m.hermitian_part();
        let tr = mat.trace()?;
        let trace_dev = (tr - ONE).norm();
        if !(trace_dev <= STATE_TOL) {
            return Err(Error::NotUnitTrace {
                deviation: trace_dev,
            });
        }
        let min_eigenvalue = hermitian_eigen(&mat)?.min();
        if min_eigenvalue < -STATE_TOL {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().unwrap().re
    }

    /// `(U ⊗ V) ρ (U ⊗ V)^dagger` for 2×2 unitaries.
    pub fn local_unitary(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<Self> {
        let uv = u.kron(v);
        Self::validate(&(&(&uv * &self.mat) * &uv.dagger()))
    }

    /// `p ρ₁ + (1 - p) ρ₂`.
    pub fn mix(p: f64, first: &Self, second: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain {
                name: "p",
                value: p,
                domain: "[0, 1]",
            });
        }
        let m = first
            .mat
            .scale_real(p)
            .add(&second.mat.scale_real(1.0 - p))?;
        Self::validate(&m)
    }

    pub fn maximally_mixed() -> Self {
        Self {
            mat: ComplexMatrix::identity(4).scale_real(0.25),
        }
    }

    /// Parses `{"matrix": [[[re, im] x4] x4]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))?;
        let rows = value
            .get("matrix")
            .ok_or_else(|| Error::Parse("missing \"matrix\" field".into()))?
            .as_array()
            .ok_or_else(|| Error::Parse("\"matrix\" must be an array of 4 rows".into()))?;
        if rows.len() != 4 {
            return Err(Error::Parse(format!(
                "expected 4 rows, found {}",
                rows.len()
            )));
        }
        let mut data = Vec::with_capacity(16);
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Parse(format!("row {i} is not an array")))?;
            if row.len() != 4 {
                return Err(Error::Parse(format!(
                    "row {i}: expected 4 entries, found {}",
                    row.len()
                )));
            }
            for (j, entry) in row.iter().enumerate() {
                data.push(
                    parse_entry(entry).map_err(|why| {
                        Error::Parse(format!("entry at row {i}, column {j}: {why}"))
                    })?,
                );
            }
        }
        Self::validate(&ComplexMatrix::from_vec(4, 4, data)?)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..4)
            .map(|i| {
                Value::Array(
                    (0..4)
                        .map(|j| {
                            let z = self.mat[(i, j)];
                            serde_json::json!([z.re, z.im])
                        })
                        .collect(),
                )
            })
            .collect();
        serde_json::json!({ "matrix": rows })
    }
}

fn parse_entry(entry: &Value) -> std::result::Result<C64, String> {
    let pair = entry
        .as_array()
        .filter(|p| p.len() == 2)
        .ok_or("expected a [re, im] pair")?;
    let re = pair[0].as_f64().ok_or("real part is not a number")?;
    let im = pair[1].as_f64().ok_or("imaginary part is not a number")?;
    Ok(C64::new(re, im))
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix({:?})", self.mat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// State vector in the computational basis.
    pub fn ket(self) -> [C64; 4] {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellKind::PhiPlus => [h, ZERO, ZERO, h],
            BellKind::PhiMinus => [h, ZERO, ZERO, -h],
            BellKind::PsiPlus => [ZERO, h, h, ZERO],
            BellKind::PsiMinus => [ZERO, h, -h, ZERO],
        }
    }
}

pub fn bell_state(kind: BellKind) -> DensityMatrix {
    DensityMatrix {
        mat: ComplexMatrix::projector(&kind.ket()),
    }
}

/// `ρ(F) = F |Φ⁺><Φ⁺| + (1 - F) |01><01|`, constructible on `[0, 1]`.
/// See [`in_family_regime`] for the sub-range where the closed forms apply.
pub fn rho_family(f: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain {
            name: "F",
            value: f,
            domain: "[0, 1]",
        });
    }
    let phi = ComplexMatrix::projector(&BellKind::PhiPlus.ket());
    let ket01 = [ZERO, ONE, ZERO, ZERO];
    let mixed = &phi.scale_real(f) + &ComplexMatrix::projector(&ket01).scale_real(1.0 - f);
    Ok(DensityMatrix { mat: mixed })
}

/// False below `F = 1/3`, where the family is still a valid (entangled)
/// state but outside the range the closed-form bounds are stated for.
pub fn in_family_regime(f: f64) -> bool {
    f >= FAMILY_REGIME_MIN
}

/// Eigenvalues below this fraction of the largest are treated as zero
/// before square roots are taken.
const SQRT_CUTOFF_RTOL: f64 = 1e-14;

fn clamped_sqrt(lambda: f64, scale: f64) -> f64 {
    if lambda <= SQRT_CUTOFF_RTOL * scale {
        0.0
    } else {
        lambda.sqrt()
    }
}

/// Wootters concurrence.
///
/// The spectrum of the non-Hermitian `ρ ρ̃` is taken from the Hermitian
/// `√ρ ρ̃ √ρ`, where `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let eig = hermitian_eigen(m).expect("density matrix is Hermitian");
    let top = eig.max().max(0.0);
    let sqrt_rho = eig.reconstruct_with(|l| clamped_sqrt(l, top));
    let yy = sigma_y().kron(&sigma_y());
    let tilde = &(&yy * &m.conj()) * &yy;
    let proxy = &(&sqrt_rho * &tilde) * &sqrt_rho;
    let spectrum = hermitian_eigen(&proxy.hermitian_part())
        .expect("proxy is Hermitian")
        .eigenvalues;
    let scale = spectrum[3].max(0.0);
    let mut roots: Vec<f64> = spectrum.iter().map(|&l| clamped_sqrt(l, scale)).collect();
    roots.reverse();
    (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0)
}

/// Smallest eigenvalue of `ρ^{T_B}`.
pub fn partial_transpose_min_eigenvalue(rho: &DensityMatrix) -> f64 {
    let pt = partial_transpose(rho.matrix(), Subsystem::B).unwrap();
    hermitian_eigen(&pt)
        .expect("partial transpose of a state is Hermitian")
        .min()
}

/// Peres-Horodecki: entangled iff `ρ^{T_B}` has an eigenvalue below `-1e-10`.
pub fn is_entangled_ppt(rho: &DensityMatrix) -> bool {
    partial_transpose_min_eigenvalue(rho) < -STATE_TOL
}
