use crate::error::{Error, Result};
use crate::negf::WireModel;
use crate::probes::{solve_floating_exact, solve_sommerfeld, ExactSettings, FloatingProblem, Leads, ProbeSolution};

/// Sommerfeld and exact floating-probe solutions for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub delta_mu: f64,
    pub sommerfeld: ProbeSolution,
    pub exact: ProbeSolution,
    /// `max_n |(mu_n - mu_0)_sommerfeld - (mu_n - mu_0)_exact| / |dmu|`.
    pub mu_discrepancy: f64,
    /// `max_n |(T_n - T_0)_sommerfeld - (T_n - T_0)_exact| / max_n |T_n - T_0|_exact`.
    pub temperature_discrepancy: f64,
}

pub fn sommerfeld_exact_discrepancy(
    model: &WireModel,
    leads: &Leads,
    settings: &ExactSettings,
) -> Result<OracleComparison> {
    let delta_mu = leads.bias();
    if delta_mu == 0.0 {
        return Err(Error::InvalidInput("oracle comparison needs a nonzero bias".into()));
    }
    let sommerfeld = solve_sommerfeld(&FloatingProblem::new(model, leads)?)?;
    let exact = solve_floating_exact(model, leads, settings)?;
    let mu0 = leads.mu0();
    let t0 = leads.max_temperature();
    let mu_discrepancy = sommerfeld
        .mus
        .iter()
        .zip(&exact.mus)
        .map(|(s, e)| ((s - mu0) - (e - mu0)).abs())
        .fold(0.0, f64::max)
        / delta_mu.abs();
    let heating = exact.temps.iter().map(|t| (t - t0).abs()).fold(0.0, f64::max);
    let temperature_discrepancy = sommerfeld
        .temps
        .iter()
        .zip(&exact.temps)
        .map(|(s, e)| ((s - t0) - (e - t0)).abs())
        .fold(0.0, f64::max)
        / heating;
    Ok(OracleComparison { delta_mu, sommerfeld, exact, mu_discrepancy, temperature_discrepancy })
}
