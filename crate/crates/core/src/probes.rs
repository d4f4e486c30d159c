//! Floating thermoelectric probes: Sommerfeld-linearized solves and an
//! exact nonlinear Newton solver.

use nalgebra::{DMatrix, DVector};

use crate::entropy::{sommerfeld_currents, FermiState};
use crate::error::{Error, Result};
use crate::negf::{probe_index, transmission_at, TransmissionMatrix, TransmissionSource, WireModel, DRAIN, SOURCE};
use crate::quadrature::{integrate_vec, QuadratureSettings};
use crate::units::{compensated_sum, sommerfeld_entropy_coefficient, K_B};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMethod {
    SommerfeldLinear,
    ExactNonlinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSolution {
    /// Probe chemical potentials, eV.
    pub mus: Vec<f64>,
    /// Probe temperatures, K.
    pub temps: Vec<f64>,
    /// `I^(0)` into each probe after the solve.
    pub residual_particle: Vec<f64>,
    /// `I^(1)` into each probe after the solve.
    pub residual_heat: Vec<f64>,
    pub method: SolveMethod,
    /// Newton iterations taken; zero for the linear solve.
    pub iterations: usize,
}

impl ProbeSolution {
    pub fn max_residual(&self) -> f64 {
        self.residual_particle
            .iter()
            .chain(&self.residual_heat)
            .fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    pub fn n_probes(&self) -> usize {
        self.mus.len()
    }
}

/// Source and drain reservoirs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leads {
    pub source: FermiState,
    pub drain: FermiState,
}

impl Leads {
    pub fn new(source: FermiState, drain: FermiState) -> Result<Self> {
        FermiState::new(source.mu, source.temperature)?;
        FermiState::new(drain.mu, drain.temperature)?;
        Ok(Self { source, drain })
    }

    /// Isothermal leads biased symmetrically about `mu0`, `mu_1 - mu_2 = bias`.
    pub fn symmetric(mu0: f64, bias: f64, temperature: f64) -> Result<Self> {
        Self::new(
            FermiState::new(mu0 + 0.5 * bias, temperature)?,
            FermiState::new(mu0 - 0.5 * bias, temperature)?,
        )
    }

    pub fn mu0(&self) -> f64 {
        0.5 * (self.source.mu + self.drain.mu)
    }

    /// `mu_1 - mu_2`.
    pub fn bias(&self) -> f64 {
        self.source.mu - self.drain.mu
    }

    pub fn is_isothermal(&self) -> bool {
        self.source.temperature == self.drain.temperature
    }

    pub fn max_temperature(&self) -> f64 {
        self.source.temperature.max(self.drain.temperature)
    }
}

/// Linearized floating-probe problem with transmissions frozen at `mu_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatingProblem {
    pub transmissions_at_mu0: TransmissionMatrix,
    pub lead_mus: (f64, f64),
    pub lead_temps: (f64, f64),
}

impl FloatingProblem {
    pub fn new(model: &WireModel, leads: &Leads) -> Result<Self> {
        let tm = transmission_at(model, leads.mu0())?;
        Self::from_transmissions(tm, leads)
    }

    pub fn from_transmissions(transmissions_at_mu0: TransmissionMatrix, leads: &Leads) -> Result<Self> {
        if transmissions_at_mu0.n_terminals() < 2 {
            return Err(Error::InvalidTerminals("need at least source and drain".into()));
        }
        let leads = Leads::new(leads.source, leads.drain)?;
        Ok(Self {
            transmissions_at_mu0,
            lead_mus: (leads.source.mu, leads.drain.mu),
            lead_temps: (leads.source.temperature, leads.drain.temperature),
        })
    }

    pub fn leads(&self) -> Leads {
        Leads {
            source: FermiState { mu: self.lead_mus.0, temperature: self.lead_temps.0 },
            drain: FermiState { mu: self.lead_mus.1, temperature: self.lead_temps.1 },
        }
    }

    pub fn mu0(&self) -> f64 {
        0.5 * (self.lead_mus.0 + self.lead_mus.1)
    }

    pub fn n_probes(&self) -> usize {
        self.transmissions_at_mu0.n_terminals() - 2
    }

    /// Total coupling of each probe to every other terminal.
    fn probe_row_sums(&self) -> Vec<f64> {
        let tm = &self.transmissions_at_mu0;
        (0..self.n_probes())
            .map(|n| {
                let p = probe_index(n + 1);
                compensated_sum((0..tm.n_terminals()).filter(|&b| b != p).map(|b| tm.get(p, b)))
            })
            .collect()
    }

    /// `true` when no probe exchanges particles with anything.
    fn probes_decoupled(&self) -> bool {
        self.probe_row_sums().iter().all(|&s| s == 0.0)
    }

    fn system_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.n_probes();
        let tm = &self.transmissions_at_mu0;
        let rows = self.probe_row_sums();
        if let Some(k) = rows.iter().position(|&s| !(s > 0.0)) {
            return Err(Error::DisconnectedProbe { probe: k + 1 });
        }
        // Probe clusters with no path to a lead.
        if let Some(k) = self.unreachable_probe() {
            return Err(Error::DisconnectedProbe { probe: k + 1 });
        }
        Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                rows[i]
            } else {
                -tm.get(probe_index(i + 1), probe_index(j + 1))
            }
        }))
    }

    /// First probe with no transmission path to either lead.
    fn unreachable_probe(&self) -> Option<usize> {
        let tm = &self.transmissions_at_mu0;
        let n = self.n_probes();
        let mut reached: Vec<bool> = (0..n)
            .map(|k| tm.get(probe_index(k + 1), SOURCE) > 0.0 || tm.get(probe_index(k + 1), DRAIN) > 0.0)
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for k in 0..n {
                if reached[k] {
                    continue;
                }
                if (0..n).any(|j| reached[j] && tm.get(probe_index(k + 1), probe_index(j + 1)) > 0.0) {
                    reached[k] = true;
                    changed = true;
                }
            }
        }
        reached.iter().position(|r| !r)
    }

    fn solve_system(&self, rhs: DVector<f64>) -> Result<DVector<f64>> {
        let m = self.system_matrix()?;
        let x = m.lu().solve(&rhs).ok_or(Error::DisconnectedProbe { probe: 1 })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DisconnectedProbe { probe: 1 });
        }
        Ok(x)
    }
}

/// Probe chemical potentials from the particle floating conditions.
pub fn solve_potentials(problem: &FloatingProblem) -> Result<Vec<f64>> {
    let n = problem.n_probes();
    let (mu1, mu2) = problem.lead_mus;
    if n == 0 {
        return Ok(Vec::new());
    }
    if mu1 == mu2 || problem.probes_decoupled() {
        return Ok(vec![problem.mu0(); n]);
    }
    let tm = &problem.transmissions_at_mu0;
    let rhs = DVector::from_fn(n, |k, _| {
        let p = probe_index(k + 1);
        tm.get(p, SOURCE) * mu1 + tm.get(p, DRAIN) * mu2
    });
    Ok(problem.solve_system(rhs)?.iter().copied().collect())
}

/// Probe temperatures from the heat floating conditions, given the probe
/// potentials.
pub fn solve_temperatures(problem: &FloatingProblem, mus: &[f64]) -> Result<Vec<f64>> {
    let n = problem.n_probes();
    if mus.len() != n {
        return Err(Error::InvalidInput(format!("expected {n} probe potentials, got {}", mus.len())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (t1, t2) = problem.lead_temps;
    if problem.probes_decoupled() {
        return Ok(vec![(0.5 * (t1 * t1 + t2 * t2)).sqrt(); n]);
    }
    let (mu1, mu2) = problem.lead_mus;
    if t1 == t2 && mu1 == mu2 && mus.iter().all(|&m| m == mu1) {
        return Ok(vec![t1; n]);
    }
    let tm = &problem.transmissions_at_mu0;
    let c6 = 0.5 * sommerfeld_entropy_coefficient();
    let mu_of = |a: usize| match a {
        SOURCE => mu1,
        DRAIN => mu2,
        _ => mus[a - 2],
    };
    let rhs = DVector::from_fn(n, |k, _| {
        let p = probe_index(k + 1);
        let joule = compensated_sum((0..tm.n_terminals()).filter(|&a| a != p).map(|a| {
            let d = mu_of(a) - mus[k];
            tm.get(p, a) * 0.5 * d * d
        }));
        joule / c6 + tm.get(p, SOURCE) * t1 * t1 + tm.get(p, DRAIN) * t2 * t2
    });
    let x = problem.solve_system(rhs)?;
    x.iter()
        .enumerate()
        .map(|(k, &t_sq)| {
            if t_sq > 0.0 {
                Ok(t_sq.sqrt())
            } else {
                Err(Error::UnphysicalTemperature { probe: k + 1, t_squared: t_sq })
            }
        })
        .collect()
}

/// Probe particle and heat currents for given probe states, evaluated with
/// the Sommerfeld expressions.
pub fn sommerfeld_residuals(problem: &FloatingProblem, mus: &[f64], temps: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = problem.n_probes();
    if mus.len() != n || temps.len() != n {
        return Err(Error::InvalidInput("probe state length mismatch".into()));
    }
    let leads = problem.leads();
    let mut states = vec![leads.source, leads.drain];
    for (&mu, &t) in mus.iter().zip(temps) {
        states.push(FermiState::new(mu, t)?);
    }
    let c = sommerfeld_currents(&states, &problem.transmissions_at_mu0)?;
    Ok((c[2..].iter().map(|x| x.particle).collect(), c[2..].iter().map(|x| x.heat).collect()))
}

pub fn solve_sommerfeld(problem: &FloatingProblem) -> Result<ProbeSolution> {
    let mus = solve_potentials(problem)?;
    let temps = solve_temperatures(problem, &mus)?;
    let (residual_particle, residual_heat) = sommerfeld_residuals(problem, &mus, &temps)?;
    Ok(ProbeSolution {
        mus,
        temps,
        residual_particle,
        residual_heat,
        method: SolveMethod::SommerfeldLinear,
        iterations: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSettings {
    pub quadrature: QuadratureSettings,
    /// Largest accepted `|I^(0)|` or `|I^(1)|` on any probe.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Quadrature used for the Jacobian integrals.
    pub jacobian_quadrature: QuadratureSettings,
}

impl Default for ExactSettings {
    fn default() -> Self {
        Self {
            quadrature: QuadratureSettings::default(),
            tolerance: 1e-10,
            max_iterations: 50,
            max_halvings: 20,
            jacobian_quadrature: QuadratureSettings::default().with_abs_tol(1e-10).with_rel_tol(1e-8),
        }
    }
}

fn all_states(leads: &Leads, mus: &[f64], thetas: &[f64]) -> Vec<FermiState> {
    let mut states = vec![leads.source, leads.drain];
    states.extend(
        mus.iter()
            .zip(thetas)
            .map(|(&mu, &th)| FermiState { mu, temperature: th / K_B }),
    );
    states
}

fn window(states: &[FermiState], model: &WireModel, q: &QuadratureSettings) -> ((f64, f64), Vec<f64>) {
    let pairs: Vec<(f64, f64)> = states.iter().map(|s| (s.mu, s.temperature)).collect();
    let mut breaks: Vec<f64> = states.iter().map(|s| s.mu).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    (q.energy_window(&pairs, model.support()), breaks)
}

/// Exact probe currents `(I^(0)_{P_n}, I^(1)_{P_n})` with energy-dependent
/// transmissions.
pub fn exact_residuals(
    model: &WireModel,
    leads: &Leads,
    mus: &[f64],
    temps: &[f64],
    settings: &QuadratureSettings,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = model.n_sites();
    if mus.len() != n || temps.len() != n {
        return Err(Error::InvalidInput("probe state length mismatch".into()));
    }
    for (&mu, &t) in mus.iter().zip(temps) {
        FermiState::new(mu, t)?;
    }
    let thetas: Vec<f64> = temps.iter().map(|t| K_B * t).collect();
    let states = all_states(leads, mus, &thetas);
    let ((lo, hi), breaks) = window(&states, model, settings);
    let m = states.len();
    let mut occ = vec![(0.0, 0.0); m];
    let r = integrate_vec(
        |e, out| {
            let tm = model.transmission_at(e)?;
            for (k, s) in states.iter().enumerate() {
                occ[k] = s.occupation_pair(e);
            }
            for k in 0..n {
                let p = probe_index(k + 1);
                let (fp, hp) = occ[p];
                let mut x = 0.0;
                for b in 0..m {
                    if b != p {
                        let (fb, hb) = occ[b];
                        let df = if fp + fb < 1.0 { fb - fp } else { hp - hb };
                        x += tm.get(p, b) * df;
                    }
                }
                out[2 * k] = x;
                out[2 * k + 1] = (e - mus[k]) * x;
            }
            Ok(())
        },
        2 * n,
        lo,
        hi,
        &breaks,
        settings,
    )?;
    Ok((
        (0..n).map(|k| r.values[2 * k]).collect(),
        (0..n).map(|k| r.values[2 * k + 1]).collect(),
    ))
}

/// Jacobian of the stacked residual `(I^(0), I^(1))` with respect to the
/// stacked unknowns `(mu, k_B T)`.
fn exact_jacobian(
    model: &WireModel,
    leads: &Leads,
    mus: &[f64],
    thetas: &[f64],
    settings: &QuadratureSettings,
) -> Result<DMatrix<f64>> {
    let n = model.n_sites();
    let states = all_states(leads, mus, thetas);
    let ((lo, hi), breaks) = window(&states, model, settings);
    let m = states.len();
    let dim = 4 * n * n;
    let mut occ = vec![(0.0, 0.0); m];
    let mut dmu = vec![0.0; n];
    let mut dth = vec![0.0; n];
    let r = integrate_vec(
        |e, out| {
            let tm = model.transmission_at(e)?;
            for (k, s) in states.iter().enumerate() {
                occ[k] = s.occupation_pair(e);
            }
            for k in 0..n {
                let (f, h) = occ[probe_index(k + 1)];
                dmu[k] = f * h / thetas[k];
                dth[k] = (e - mus[k]) / thetas[k] * dmu[k];
            }
            let two_n = 2 * n;
            for i in 0..n {
                let p = probe_index(i + 1);
                let (fp, hp) = occ[p];
                let mut x = 0.0;
                let mut row = 0.0;
                for b in 0..m {
                    if b != p {
                        let (fb, hb) = occ[b];
                        let df = if fp + fb < 1.0 { fb - fp } else { hp - hb };
                        x += tm.get(p, b) * df;
                        row += tm.get(p, b);
                    }
                }
                let w = e - mus[i];
                for j in 0..n {
                    let c = if j == i { -row } else { tm.get(p, probe_index(j + 1)) };
                    // d I^(0)_i
                    out[i * two_n + j] = c * dmu[j];
                    out[i * two_n + n + j] = c * dth[j];
                    // d I^(1)_i
                    out[(n + i) * two_n + j] = w * c * dmu[j] - if j == i { x } else { 0.0 };
                    out[(n + i) * two_n + n + j] = w * c * dth[j];
                }
            }
            Ok(())
        },
        dim,
        lo,
        hi,
        &breaks,
        settings,
    )?;
    Ok(DMatrix::from_row_slice(2 * n, 2 * n, &r.values))
}

/// Solves the full nonlinear floating conditions by damped Newton
/// iteration, starting from the Sommerfeld solution.
pub fn solve_floating_exact(model: &WireModel, leads: &Leads, settings: &ExactSettings) -> Result<ProbeSolution> {
    settings.quadrature.validate()?;
    settings.jacobian_quadrature.validate()?;
    let n = model.n_sites();
    let start = FloatingProblem::new(model, leads)
        .and_then(|p| solve_sommerfeld(&p))
        .map(|s| (s.mus, s.temps))
        .unwrap_or_else(|_| (vec![leads.mu0(); n], vec![leads.max_temperature(); n]));
    let mut mus = start.0;
    let mut temps = start.1;
    let mut thetas: Vec<f64> = temps.iter().map(|t| K_B * t).collect();
    let heat_scale = K_B * leads.max_temperature();
    let temps_of = |th: &[f64]| th.iter().map(|t| t / K_B).collect::<Vec<_>>();
    let norm = |r0: &[f64], r1: &[f64]| {
        r0.iter().map(|x| x * x).sum::<f64>() + r1.iter().map(|x| (x / heat_scale).powi(2)).sum::<f64>()
    };
    let max_abs = |r0: &[f64], r1: &[f64]| r0.iter().chain(r1).fold(0.0_f64, |m, x| m.max(x.abs()));

    let (mut r0, mut r1) = exact_residuals(model, leads, &mus, &temps, &settings.quadrature)?;
    let no_convergence = |iterations, mus: &[f64], thetas: &[f64], r0: &[f64], r1: &[f64]| Error::NoConvergence {
        iterations,
        particle_residual: r0.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        heat_residual: r1.iter().fold(0.0_f64, |m, x| m.max(x.abs())),
        last_mus: mus.to_vec(),
        last_temps: thetas.iter().map(|t| t / K_B).collect(),
    };

    for iteration in 0..=settings.max_iterations {
        if max_abs(&r0, &r1) <= settings.tolerance {
            return Ok(ProbeSolution {
                temps,
                mus,
                residual_particle: r0,
                residual_heat: r1,
                method: SolveMethod::ExactNonlinear,
                iterations: iteration,
            });
        }
        if iteration == settings.max_iterations {
            break;
        }
        let jac = exact_jacobian(model, leads, &mus, &thetas, &settings.jacobian_quadrature)?;
        let rhs = DVector::from_iterator(2 * n, r0.iter().chain(&r1).map(|x| -x));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(no_convergence(iteration, &mus, &thetas, &r0, &r1));
        };
        let base = norm(&r0, &r1);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=settings.max_halvings {
            let trial_mus: Vec<f64> = (0..n).map(|k| mus[k] + lambda * step[k]).collect();
            let trial_th: Vec<f64> = (0..n).map(|k| thetas[k] + lambda * step[n + k]).collect();
            if trial_th.iter().all(|&t| t > 0.0) {
                let (t0, t1) = exact_residuals(model, leads, &trial_mus, &temps_of(&trial_th), &settings.quadrature)?;
                if norm(&t0, &t1) < base {
                    accepted = Some((trial_mus, trial_th, t0, t1));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((m_new, th_new, t0, t1)) = accepted else {
            return Err(no_convergence(iteration + 1, &mus, &thetas, &r0, &r1));
        };
        mus = m_new;
        temps = temps_of(&th_new);
        thetas = th_new;
        r0 = t0;
        r1 = t1;
    }
    Err(no_convergence(settings.max_iterations, &mus, &thetas, &r0, &r1))
}
