//! Dense complex linear algebra: the matrix type, Kronecker products, the
//! two-qubit partial transpose and a Hermitian eigensolver.
//!
//! Two-qubit operators use the computational basis order `|00>, |01>, |10>, |11>`
//! with qubit A as the left tensor factor, i.e. basis index `2 * a + b`.

mod eigen;
mod matrix;

pub use eigen::{
    eigenvalues, hermitian_eigen, symmetrize_checked, EigenDecomposition, HERMITIAN_RTOL,
    MAX_SWEEPS, OFF_DIAGONAL_RTOL,
};
pub use matrix::{sigma_x, sigma_y, sigma_z, ComplexMatrix, C64, I, ONE, ZERO};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial transpose of a 4×4 two-qubit operator on the chosen factor.
pub fn partial_transpose(m: &ComplexMatrix, subsystem: Subsystem) -> Result<ComplexMatrix> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::Dimension {
            op: "partial_transpose",
            detail: format!("expected 4x4, got {}x{}", m.rows(), m.cols()),
        });
    }
    let mut out = ComplexMatrix::zeros(4, 4);
    for ia in 0..2 {
        for ib in 0..2 {
            for ja in 0..2 {
                for jb in 0..2 {
                    let (ra, rb, ca, cb) = match subsystem {
                        Subsystem::A => (ja, ib, ia, jb),
                        Subsystem::B => (ia, jb, ja, ib),
                    };
                    out[(2 * ra + rb, 2 * ca + cb)] = m[(2 * ia + ib, 2 * ja + jb)];
                }
            }
        }
    }
    Ok(out)
}
