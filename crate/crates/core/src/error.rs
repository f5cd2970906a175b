use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular family: F_{n}({omega}) = 0")]
    SingularFamily { n: u32, omega: f64 },
    #[error("mode error: {0}")]
    Mode(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("quadrature missed tolerance {tol:e}: estimate {estimate:e}, error {error:e}")]
    Tolerance { estimate: f64, error: f64, tol: f64 },
    #[error("u = {u} is not below Omega(inf) = {omega_inf}")]
    Range { u: f64, omega_inf: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
