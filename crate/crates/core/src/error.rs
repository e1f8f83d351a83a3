use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("expected a unit vector, got norm {norm}")]
    NotUnit { norm: f64 },
    #[error("point is not on E^10_{n}: membership residual {residual:e}")]
    NotInBundle { n: i64, residual: f64 },
    #[error("columns do not form an element of Sp(2): residual {residual:e}")]
    NotSymplectic { residual: f64 },
    #[error("tangent vector rejected: {0}")]
    NotTangent(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point is not in the required stratum: {0}")]
    WrongStratum(String),
    #[error("bundle indices differ: {0} vs {1}")]
    MismatchedN(i64, i64),
    #[error("tangent vectors live at different base points")]
    MismatchedBase,
    #[error("not a regular value: |det| = {det:e} at preimage t = {t}")]
    NotRegular { det: f64, t: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last step {last_step:e})")]
    NotConverged { iterations: usize, last_step: f64 },
    #[error("singular linear system at transport step {step}")]
    SingularSystem { step: usize },
}

pub type Result<T> = std::result::Result<T, GeomError>;

pub(crate) fn check_unit(norm: f64, tol: f64) -> Result<()> {
    if (norm - 1.0).abs() <= tol && norm.is_finite() {
        Ok(())
    } else {
        Err(GeomError::NotUnit { norm })
    }
}
