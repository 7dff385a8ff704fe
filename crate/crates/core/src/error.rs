use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("matrix is not Hermitian: ||M - M^dagger||_F = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    Convergence { sweeps: usize, off_norm: f64 },

    #[error("trace is not one: |tr - 1| = {deviation:e}")]
    NotUnitTrace { deviation: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("{name} = {value} outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("filter is singular: |det| = {det_abs:e}")]
    SingularFilter { det_abs: f64 },

    #[error("filter annihilates the state: success probability {probability:e}")]
    AnnihilatedState { probability: f64 },

    #[error("division by zero in {0}")]
    ZeroDivision(&'static str),

    #[error("invalid state file: {0}")]
    Parse(String),
}
