//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each step zeroes one off-diagonal pair `(p, q)` with a unitary plane
//! rotation `U = diag(1, w) · R(θ)`, where the phase `w` makes the 2×2 pivot
//! block real symmetric and `R(θ)` is the classical real Jacobi rotation.
//! Sweeps run over all pairs in row order until the off-diagonal Frobenius
//! norm falls below `OFF_DIAGONAL_RTOL · ||M||_F`.

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Relative tolerance on `||M - M^dagger||_F` accepted as Hermitian.
pub const HERMITIAN_RTOL: f64 = 1e-10;
/// Convergence threshold on the off-diagonal norm, relative to `||M||_F`.
pub const OFF_DIAGONAL_RTOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order; column `k` of `eigenvectors` pairs with
/// `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V · diag(f(λ)) · V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Checks Hermiticity within [`HERMITIAN_RTOL`] and returns the symmetrized
/// matrix `(M + M^dagger)/2`.
pub fn symmetrize_checked(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension {
            op: "hermitian_eigen",
            detail: format!("{}x{} is not square", m.rows(), m.cols()),
        });
    }
    let deviation = m.hermitian_deviation();
    if !(deviation <= HERMITIAN_RTOL * m.frobenius_norm().max(1.0)) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(m.hermitian_part())
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let mut a = symmetrize_checked(m)?;
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let threshold = OFF_DIAGONAL_RTOL * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off_norm = off_diagonal_norm(&a);
        if off_norm > threshold {
            return Err(Error::Convergence {
                sweeps: MAX_SWEEPS,
                off_norm,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the Jacobi ordering among ties.
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let z = a[(p, q)];
    let r = z.norm();
    if r == 0.0 {
        return;
    }
    let n = a.rows();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let w = z.conj() / r;

    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_infinite() {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s], [-s w, c w]].
    let u_qp = -w * s;
    let u_qq = w * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * u_qp;
        a[(k, q)] = akp * s + akq * u_qq;

        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * u_qp;
        v[(k, q)] = vkp * s + vkq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * u_qp.conj();
        a[(q, k)] = apk * s + aqk * u_qq.conj();
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(app - t * r, 0.0);
    a[(q, q)] = C64::new(aqq + t * r, 0.0);
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.eigenvalues)
}
