use rayon::prelude::*;

use crate::entropy::{local_occupations, EntropyReport, FermiState};
use crate::error::{Error, Result};
use crate::negf::{TransmissionSource, WireModel};
use crate::probes::{solve_sommerfeld, FloatingProblem, Leads, ProbeSolution};
use crate::units::{compensated_sum, K_B};

/// Values closer than this are one plateau when locating the T maximum.
const PLATEAU_TOLERANCE: f64 = 1e-9;

/// Default grid size for distribution snapshots.
pub const SNAPSHOT_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    /// 1-based site.
    pub site: usize,
    pub mu: f64,
    pub temperature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub rows: Vec<ProfileRow>,
    /// Strictly decreasing for `mu_1 > mu_2`, increasing for `mu_1 < mu_2`.
    pub mu_strictly_monotone: bool,
    /// Exactly one local maximum of T (plateaus merged), away from the ends.
    pub single_interior_t_max: bool,
    /// `max_n max(|dmu_n + dmu_{N+1-n}|, |T_n - T_{N+1-n}|)`, `dmu = mu - mu_0`.
    pub symmetry_defect: f64,
    /// Biased but non-monotone potential: the 2k_F oscillation regime.
    pub oscillation_flag: bool,
}

impl ProfileTable {
    pub fn from_solution(solution: &ProbeSolution, leads: &Leads) -> Self {
        let rows: Vec<ProfileRow> = solution
            .mus
            .iter()
            .zip(&solution.temps)
            .enumerate()
            .map(|(k, (&mu, &temperature))| ProfileRow { site: k + 1, mu, temperature })
            .collect();
        let bias = leads.bias();
        let mu_strictly_monotone = bias != 0.0
            && rows.windows(2).all(|w| if bias > 0.0 { w[1].mu < w[0].mu } else { w[1].mu > w[0].mu });
        let temps: Vec<f64> = rows.iter().map(|r| r.temperature).collect();
        let mu0 = leads.mu0();
        let n = rows.len();
        let symmetry_defect = (0..n)
            .map(|k| {
                let (a, b) = (rows[k], rows[n - 1 - k]);
                ((a.mu - mu0) + (b.mu - mu0)).abs().max((a.temperature - b.temperature).abs())
            })
            .fold(0.0, f64::max);
        Self {
            single_interior_t_max: single_interior_maximum(&temps, PLATEAU_TOLERANCE),
            oscillation_flag: bias != 0.0 && !mu_strictly_monotone,
            mu_strictly_monotone,
            symmetry_defect,
            rows,
        }
    }
}

fn single_interior_maximum(values: &[f64], tol: f64) -> bool {
    let mut merged: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        match merged.last() {
            Some(&last) if (v - last).abs() <= tol => {}
            _ => merged.push(v),
        }
    }
    let m = merged.len();
    let maxima: Vec<usize> = (0..m)
        .filter(|&i| (i == 0 || merged[i - 1] < merged[i]) && (i + 1 == m || merged[i + 1] < merged[i]))
        .collect();
    maxima.len() == 1 && maxima[0] != 0 && maxima[0] != m - 1
}

/// Sommerfeld probe profiles along the chain.
pub fn profiles(model: &WireModel, leads: &Leads) -> Result<(ProbeSolution, ProfileTable)> {
    let solution = solve_sommerfeld(&FloatingProblem::new(model, leads)?)?;
    let table = ProfileTable::from_solution(&solution, leads);
    Ok((solution, table))
}

/// Local non-equilibrium distribution next to the probe's Fermi function.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSnapshot {
    /// 1-based site.
    pub site: usize,
    pub energies: Vec<f64>,
    pub f_local: Vec<f64>,
    pub f_probe: Vec<f64>,
}

impl DistributionSnapshot {
    pub fn max_abs_difference(&self) -> f64 {
        self.f_local
            .iter()
            .zip(&self.f_probe)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Distributions on the requested 1-based sites over
/// `mu_0 +- max(10 k_B T_max, 5 |dmu|)`, clipped to the band.
pub fn distribution_snapshots(
    model: &WireModel,
    leads: &Leads,
    solution: &ProbeSolution,
    sites: &[usize],
    points: usize,
) -> Result<Vec<DistributionSnapshot>> {
    let n = model.n_sites();
    if solution.mus.len() != n {
        return Err(Error::InvalidInput("solution does not match the model".into()));
    }
    if points < 2 {
        return Err(Error::InvalidInput("need at least two grid points".into()));
    }
    if let Some(&s) = sites.iter().find(|&&s| s == 0 || s > n) {
        return Err(Error::InvalidInput(format!("site {s} outside 1..={n}")));
    }
    let mut states = vec![leads.source, leads.drain];
    states.extend(
        solution
            .mus
            .iter()
            .zip(&solution.temps)
            .map(|(&mu, &temperature)| FermiState { mu, temperature }),
    );
    let t_max = states.iter().map(|s| s.temperature).fold(0.0, f64::max);
    let half = (10.0 * K_B * t_max).max(5.0 * leads.bias().abs());
    let mu0 = leads.mu0();
    let (mut lo, mut hi) = (mu0 - half, mu0 + half);
    if let Some((a, b)) = model.support() {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let energies: Vec<f64> = (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect();
    let local: Vec<Vec<(f64, f64, f64)>> = energies
        .par_iter()
        .map(|&e| local_occupations(model, &states, e))
        .collect::<Result<_>>()?;
    Ok(sites
        .iter()
        .map(|&site| {
            let probe = states[site + 1];
            DistributionSnapshot {
                site,
                f_local: local.iter().map(|row| row[site - 1].0).collect(),
                f_probe: energies.iter().map(|&e| probe.occupation(e)).collect(),
                energies: energies.clone(),
            }
        })
        .collect())
}

/// Each probe's share of the total injected entropy.
pub fn probe_entropy_shares(report: &EntropyReport) -> Result<Vec<f64>> {
    let total = compensated_sum(report.probe_injections.iter().copied());
    if total == 0.0 || !total.is_finite() {
        return Err(Error::InsufficientData("total probe entropy injection is zero".into()));
    }
    Ok(report.probe_injections.iter().map(|s| s / total).collect())
}
