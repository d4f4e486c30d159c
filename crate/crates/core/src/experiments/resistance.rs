use rayon::prelude::*;

use crate::entropy::sommerfeld_currents;
use crate::error::{Error, Result};
use crate::negf::{WireModel, SOURCE};
use crate::probes::{solve_sommerfeld, FloatingProblem, Leads};

use super::fit::least_squares;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResistanceRegime {
    /// `R = 1 + N gamma_p / (4t)`; fitted linearly.
    WeakCoupling,
    /// `R = R_c + (N - 1) gamma_p^2 / (16 t^2)`; fitted with a full quadratic.
    StrongCoupling,
}

impl ResistanceRegime {
    /// Default `gamma_p / t` range where the asymptotic form applies.
    pub fn default_window(&self) -> (f64, f64) {
        match self {
            Self::WeakCoupling => (0.0, 0.01),
            Self::StrongCoupling => (50.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceFit {
    pub regime: ResistanceRegime,
    pub n: usize,
    /// `(gamma_p / t, R [h/e^2])`.
    pub rows: Vec<(f64, f64)>,
    /// Constant term, h/e^2.
    pub intercept: f64,
    /// Linear coefficient (weak) or quadratic coefficient (strong).
    pub coefficient: f64,
    /// `coefficient / N` (weak) or `coefficient / (N - 1)` (strong).
    pub normalized_coefficient: Option<f64>,
    pub r_squared: f64,
    /// Every `gamma_p / t` lies in the regime's default window.
    pub within_window: bool,
}

/// Two-terminal resistance `R = (mu_1 - mu_2) / (h I^(0))` in units of h/e^2
/// with all probes floating.
pub fn resistance(model: &WireModel, leads: &Leads) -> Result<f64> {
    let bias = leads.bias();
    if bias == 0.0 {
        return Err(Error::InvalidInput("resistance needs a nonzero bias".into()));
    }
    let problem = FloatingProblem::new(model, leads)?;
    let solution = solve_sommerfeld(&problem)?;
    let mut states = vec![leads.source, leads.drain];
    for (&mu, &temperature) in solution.mus.iter().zip(&solution.temps) {
        states.push(crate::entropy::FermiState { mu, temperature });
    }
    let currents = sommerfeld_currents(&states, &problem.transmissions_at_mu0)?;
    // Current into the source is negative when mu_1 > mu_2.
    Ok(-bias / currents[SOURCE].particle)
}

pub fn resistance_scan(
    n: usize,
    gamma_over_t: &[f64],
    hopping: f64,
    leads: &Leads,
    regime: ResistanceRegime,
) -> Result<ResistanceFit> {
    if gamma_over_t.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "resistance fit needs at least 5 couplings, got {}",
            gamma_over_t.len()
        )));
    }
    let values: Vec<f64> = gamma_over_t
        .par_iter()
        .map(|&g| resistance(&WireModel::uniform(n, hopping, g * hopping)?, leads))
        .collect::<Result<_>>()?;
    let degree = match regime {
        ResistanceRegime::WeakCoupling => 1,
        ResistanceRegime::StrongCoupling => 2,
    };
    let fit = least_squares(gamma_over_t, &values, degree)?;
    let coefficient = fit.coefficients[degree];
    let normalized_coefficient = match regime {
        ResistanceRegime::WeakCoupling => Some(coefficient / n as f64),
        ResistanceRegime::StrongCoupling => (n > 1).then(|| coefficient / (n - 1) as f64),
    };
    let (lo, hi) = regime.default_window();
    Ok(ResistanceFit {
        regime,
        n,
        rows: gamma_over_t.iter().copied().zip(values).collect(),
        intercept: fit.coefficients[0],
        coefficient,
        normalized_coefficient,
        r_squared: fit.r_squared,
        within_window: gamma_over_t.iter().all(|&g| g >= lo && g <= hi),
    })
}
