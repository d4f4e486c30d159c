use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid terminal set: {0}")]
    InvalidTerminals(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("energy {energy} eV lies outside the lead band (|e - e_c| < {half_width} eV required)")]
    OutOfBand { energy: f64, half_width: f64 },

    #[error("singular matrix at energy {energy} eV: {detail}")]
    SingularMatrix { energy: f64, detail: String },

    #[error("local spectral weight vanishes on site {site} at energy {energy} eV")]
    UndefinedDistribution { site: usize, energy: f64 },

    #[error("probe {probe} is disconnected from the leads (floating-condition matrix is singular)")]
    DisconnectedProbe { probe: usize },

    #[error("probe {probe} has unphysical T^2 = {t_squared:e} K^2; the Sommerfeld regime is violated")]
    UnphysicalTemperature { probe: usize, t_squared: f64 },

    #[error(
        "floating-probe iteration did not converge after {iterations} iterations \
         (max |I0| = {particle_residual:e}, max |I1| = {heat_residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        particle_residual: f64,
        heat_residual: f64,
        last_mus: Vec<f64>,
        last_temps: Vec<f64>,
    },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("conservation check failed: largest current-sum defect {defect:e}")]
    ConservationViolation { defect: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
