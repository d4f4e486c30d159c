use rayon::prelude::*;

use crate::entropy::joule_report;
use crate::error::{Error, Result};
use crate::negf::WireModel;
use crate::probes::{solve_sommerfeld, FloatingProblem, Leads};
use crate::units::K_B;

use super::fit::least_squares;

/// Largest accepted `|sum_a I_a|` for any conserved current.
pub const CONSERVATION_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    /// Probe couplings in units of the hopping, `gamma_p / t`.
    pub gamma_values: Vec<f64>,
    /// Hopping `t`, eV.
    pub hopping: f64,
    /// Lead temperature `T_0`, K.
    pub lead_temperature: f64,
    /// `mu_1 - mu_2`, eV.
    pub delta_mu: f64,
    /// Mean lead potential, eV.
    pub mu0: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.n_values.is_empty() || self.gamma_values.is_empty() {
            return bad("sweep needs at least one N and one gamma_p".into());
        }
        if self.n_values.contains(&0) {
            return bad("probe counts must be positive".into());
        }
        if self.gamma_values.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("gamma_p/t values must be finite and non-negative".into());
        }
        if !(self.hopping.is_finite() && self.hopping > 0.0) {
            return bad(format!("hopping must be positive, got {}", self.hopping));
        }
        if !(self.lead_temperature.is_finite() && self.lead_temperature > 0.0) {
            return bad(format!("T0 must be positive, got {}", self.lead_temperature));
        }
        if !(self.delta_mu.is_finite() && self.delta_mu > 0.0) {
            return bad(format!("sweeps need delta_mu > 0, got {}", self.delta_mu));
        }
        if !(self.mu0.is_finite() && self.mu0.abs() < 2.0 * self.hopping) {
            return bad(format!("mu0 = {} lies outside the band", self.mu0));
        }
        Ok(())
    }

    /// Non-fatal regime warnings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.delta_mu > 2.0 * self.hopping {
            out.push(format!(
                "delta_mu = {} eV exceeds the band half-width {} eV: Sommerfeld validity doubtful",
                self.delta_mu,
                2.0 * self.hopping
            ));
        }
        let reach = self.mu0.abs() + 0.5 * self.delta_mu + 10.0 * K_B * self.lead_temperature;
        if reach > 2.0 * self.hopping {
            out.push(format!(
                "bias window plus 10 k_B T0 reaches the band edge ({reach} eV > {} eV)",
                2.0 * self.hopping
            ));
        }
        out
    }

    pub fn leads(&self) -> Result<Leads> {
        Leads::symmetric(self.mu0, self.delta_mu, self.lead_temperature)
    }

    pub fn n_points(&self) -> usize {
        self.n_values.len() * self.gamma_values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    /// `None` when the ratio is undefined (zero power).
    pub ratio: Option<f64>,
    pub power: f64,
    pub s_dot_probes: f64,
    pub conservation_max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub n: usize,
    pub gamma_over_t: f64,
    pub outcome: Result<RatioPoint>,
}

impl RatioRow {
    pub fn n_gamma_over_t(&self) -> f64 {
        self.n as f64 * self.gamma_over_t
    }

    pub fn ratio(&self) -> Option<f64> {
        self.outcome.as_ref().ok().and_then(|p| p.ratio)
    }
}

/// Solves one uniform chain in the Sommerfeld regime and re-validates
/// conservation.
pub fn ratio_point(n: usize, gamma_over_t: f64, hopping: f64, leads: &Leads) -> Result<RatioPoint> {
    let model = WireModel::uniform(n, hopping, gamma_over_t * hopping)?;
    let problem = FloatingProblem::new(&model, leads)?;
    let solution = solve_sommerfeld(&problem)?;
    let report = joule_report(&solution, &problem)?;
    let defect = report.conservation().max_abs();
    if !(defect <= CONSERVATION_LIMIT) {
        return Err(Error::ConservationViolation { defect });
    }
    Ok(RatioPoint {
        ratio: report.ratio,
        power: report.power,
        s_dot_probes: report.probe_total_s,
        conservation_max_abs: defect,
    })
}

/// Ratio for every `(N, gamma_p)` pair, ordered by N then gamma_p. Solver
/// failures are kept per row.
pub fn sweep_ratio(spec: &SweepSpec) -> Result<Vec<RatioRow>> {
    spec.validate()?;
    let leads = spec.leads()?;
    let grid: Vec<(usize, f64)> = spec
        .n_values
        .iter()
        .flat_map(|&n| spec.gamma_values.iter().map(move |&g| (n, g)))
        .collect();
    Ok(grid
        .into_par_iter()
        .map(|(n, g)| RatioRow { n, gamma_over_t: g, outcome: ratio_point(n, g, spec.hopping, &leads) })
        .collect())
}

fn series(rows: &[RatioRow], gamma_over_t: f64) -> Vec<&RatioRow> {
    let mut s: Vec<&RatioRow> = rows.iter().filter(|r| r.gamma_over_t == gamma_over_t).collect();
    s.sort_by_key(|r| r.n);
    s
}

fn distinct_gammas(rows: &[RatioRow]) -> Vec<f64> {
    let mut g: Vec<f64> = rows.iter().map(|r| r.gamma_over_t).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Whether the ratio is non-decreasing in N for each gamma_p. A failed
/// row makes its series non-monotone.
pub fn monotone_in_n(rows: &[RatioRow]) -> Vec<(f64, bool)> {
    distinct_gammas(rows)
        .into_iter()
        .map(|g| {
            let ratios: Option<Vec<f64>> = series(rows, g).iter().map(|r| r.ratio()).collect();
            let ok = ratios.is_some_and(|r| r.windows(2).all(|w| w[1] >= w[0]));
            (g, ok)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapsePair {
    pub n_a: usize,
    pub gamma_a: f64,
    pub n_b: usize,
    pub gamma_b: f64,
    pub n_gamma_over_t: f64,
    /// `|ratio_a - ratio_b|`.
    pub difference: f64,
}

/// Pairs of rows with different gamma_p but equal `N gamma_p / t >= min_product`.
pub fn collapse_pairs(rows: &[RatioRow], min_product: f64) -> Vec<CollapsePair> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if a.gamma_over_t == b.gamma_over_t {
                continue;
            }
            let (pa, pb) = (a.n_gamma_over_t(), b.n_gamma_over_t());
            if pa < min_product || (pa - pb).abs() > 1e-9 * pa.max(pb) {
                continue;
            }
            if let (Some(ra), Some(rb)) = (a.ratio(), b.ratio()) {
                out.push(CollapsePair {
                    n_a: a.n,
                    gamma_a: a.gamma_over_t,
                    n_b: b.n,
                    gamma_b: b.gamma_over_t,
                    n_gamma_over_t: pa,
                    difference: (ra - rb).abs(),
                });
            }
        }
    }
    out
}

/// Linear fit of the ratio against `1/N` over the large-N tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficitFit {
    pub gamma_over_t: f64,
    pub intercept: f64,
    /// Coefficient of `1/N`.
    pub slope: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

pub fn deficit_fit(rows: &[RatioRow], min_n: usize) -> Result<Vec<DeficitFit>> {
    distinct_gammas(rows)
        .into_iter()
        .map(|g| {
            let s = series(rows, g);
            let (lo, hi) = (s.first().map_or(0, |r| r.n), s.last().map_or(0, |r| r.n));
            if lo == 0 || hi < 10 * lo {
                return Err(Error::InsufficientData(format!(
                    "N values for gamma_p/t = {g} must span at least a decade (got {lo}..{hi})"
                )));
            }
            let (xs, ys): (Vec<f64>, Vec<f64>) = s
                .iter()
                .filter(|r| r.n >= min_n)
                .filter_map(|r| r.ratio().map(|v| (1.0 / r.n as f64, v)))
                .unzip();
            let fit = least_squares(&xs, &ys, 1)?;
            Ok(DeficitFit {
                gamma_over_t: g,
                intercept: fit.coefficients[0],
                slope: fit.coefficients[1],
                r_squared: fit.r_squared,
                n_points: fit.n_points,
            })
        })
        .collect()
}
