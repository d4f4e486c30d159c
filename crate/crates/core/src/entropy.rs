//! Dissipative (particle, heat, energy) and unitary (entropy) currents,
//! Joule-heating bookkeeping and the local entropy deficit.
//!
//! Sign convention: every per-terminal current is the flow INTO that
//! terminal from the wire, `I_a = (1/h) int sum_b T_ab (f_b - f_a)`. The
//! entropy a probe injects into the wire is therefore `-I^S_P`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::negf::{retarded_greens, TransmissionMatrix, TransmissionSource, WireModel, DRAIN, SOURCE};
use crate::probes::{FloatingProblem, Leads, ProbeSolution};
use crate::quadrature::{integrate_vec, QuadratureSettings};
use crate::units::{compensated_sum, sommerfeld_entropy_coefficient, K_B};

/// Equilibrium state of a reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiState {
    pub mu: f64,
    pub temperature: f64,
}

impl FermiState {
    pub fn new(mu: f64, temperature: f64) -> Result<Self> {
        if !mu.is_finite() || !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::InvalidInput(format!(
                "Fermi state needs finite mu and T > 0, got mu = {mu}, T = {temperature}"
            )));
        }
        Ok(Self { mu, temperature })
    }

    pub fn occupation(&self, energy: f64) -> f64 {
        fermi(energy, self.mu, self.temperature)
    }

    /// `(f, 1 - f)`, each computed without cancellation.
    pub fn occupation_pair(&self, energy: f64) -> (f64, f64) {
        fermi_pair(energy, self.mu, self.temperature)
    }
}

pub fn fermi(energy: f64, mu: f64, temperature: f64) -> f64 {
    fermi_pair(energy, mu, temperature).0
}

/// Fermi function and its complement.
pub fn fermi_pair(energy: f64, mu: f64, temperature: f64) -> (f64, f64) {
    let x = (energy - mu) / (K_B * temperature);
    if x >= 0.0 {
        let e = (-x).exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    } else {
        let e = x.exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    }
}

/// `-(f ln f + h ln h)` with `h = 1 - f` supplied separately, `0 ln 0 = 0`.
pub fn binary_entropy(f: f64, h: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(f) + term(h)
}

/// Single-particle entropy density `s(e) = -k_B [f ln f + (1-f) ln(1-f)]`
/// in eV/K.
pub fn fermi_entropy_density(state: &FermiState, energy: f64) -> f64 {
    let x = ((energy - state.mu) / (K_B * state.temperature)).abs();
    if !x.is_finite() {
        return 0.0;
    }
    let e = (-x).exp();
    K_B * (e.ln_1p() + x * e / (1.0 + e))
}

/// How currents are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvaluationMode {
    /// Leading-order Sommerfeld expressions with transmissions frozen at
    /// `mu_0 = (mu_source + mu_drain) / 2`.
    Sommerfeld,
    /// Full energy integrals with energy-dependent transmissions.
    Exact(QuadratureSettings),
}

/// Currents into one terminal, natural units (`h = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TerminalCurrents {
    /// `I^(0)`, eV.
    pub particle: f64,
    /// `I^(1)`, eV^2.
    pub heat: f64,
    /// `I^E = I^(1) + mu I^(0)`, eV^2.
    pub energy: f64,
    /// Unitary entropy current, eV^2/K.
    pub entropy: f64,
}

fn check_states(states: &[FermiState], n_terminals: usize) -> Result<()> {
    if states.len() != n_terminals {
        return Err(Error::InvalidTerminals(format!(
            "expected {n_terminals} terminal states, got {}",
            states.len()
        )));
    }
    for s in states {
        FermiState::new(s.mu, s.temperature)?;
    }
    Ok(())
}

/// Sommerfeld currents for constant transmissions. For energy-independent
/// `T_ab` these expressions are exact.
pub fn sommerfeld_currents(states: &[FermiState], tm: &TransmissionMatrix) -> Result<Vec<TerminalCurrents>> {
    check_states(states, tm.n_terminals())?;
    let c6 = 0.5 * sommerfeld_entropy_coefficient();
    let c3 = sommerfeld_entropy_coefficient();
    let m = states.len();
    Ok((0..m)
        .map(|a| {
            let sa = states[a];
            let row = |g: &dyn Fn(&FermiState) -> f64| {
                compensated_sum((0..m).filter(|&b| b != a).map(|b| tm.get(a, b) * g(&states[b])))
            };
            let particle = row(&|sb| sb.mu - sa.mu);
            let heat = row(&|sb| {
                let d = sb.mu - sa.mu;
                0.5 * d * d + c6 * (sb.temperature * sb.temperature - sa.temperature * sa.temperature)
            });
            let entropy = row(&|sb| c3 * (sb.temperature - sa.temperature));
            TerminalCurrents { particle, heat, energy: heat + sa.mu * particle, entropy }
        })
        .collect())
}

/// Exact currents into every terminal from one vector quadrature.
pub fn exact_currents(
    states: &[FermiState],
    source: &dyn TransmissionSource,
    settings: &QuadratureSettings,
) -> Result<Vec<TerminalCurrents>> {
    let m = source.n_terminals();
    check_states(states, m)?;
    let pairs: Vec<(f64, f64)> = states.iter().map(|s| (s.mu, s.temperature)).collect();
    let (lo, hi) = settings.energy_window(&pairs, source.support());
    let breaks: Vec<f64> = states.iter().map(|s| s.mu).collect();

    let mut occ = vec![(0.0, 0.0); m];
    let mut ent = vec![0.0; m];
    let r = integrate_vec(
        |e, out| {
            let tm = source.transmission_at(e)?;
            for (k, s) in states.iter().enumerate() {
                occ[k] = s.occupation_pair(e);
                ent[k] = fermi_entropy_density(s, e);
            }
            for a in 0..m {
                let mut flux = 0.0;
                let mut sflux = 0.0;
                for b in 0..m {
                    if b == a {
                        continue;
                    }
                    let t = tm.get(a, b);
                    let (fa, ha) = occ[a];
                    let (fb, hb) = occ[b];
                    let df = if fa + fb < 1.0 { fb - fa } else { ha - hb };
                    flux += t * df;
                    sflux += t * (ent[b] - ent[a]);
                }
                out[3 * a] = flux;
                out[3 * a + 1] = (e - states[a].mu) * flux;
                out[3 * a + 2] = sflux;
            }
            Ok(())
        },
        3 * m,
        lo,
        hi,
        &breaks,
        settings,
    )?;
    Ok((0..m)
        .map(|a| {
            let particle = r.values[3 * a];
            let heat = r.values[3 * a + 1];
            TerminalCurrents {
                particle,
                heat,
                energy: heat + states[a].mu * particle,
                entropy: r.values[3 * a + 2],
            }
        })
        .collect())
}

/// Mean of the source and drain chemical potentials.
fn lead_mu0(states: &[FermiState]) -> f64 {
    0.5 * (states[SOURCE].mu + states[DRAIN].mu)
}

pub fn terminal_currents(
    states: &[FermiState],
    source: &dyn TransmissionSource,
    mode: &EvaluationMode,
) -> Result<Vec<TerminalCurrents>> {
    check_states(states, source.n_terminals())?;
    match mode {
        EvaluationMode::Sommerfeld => {
            let tm = source.transmission_at(lead_mu0(states))?;
            sommerfeld_currents(states, &tm)
        }
        EvaluationMode::Exact(q) => exact_currents(states, source, q),
    }
}

/// Buttiker-Sivan-Imry current `I^(nu)` into terminal `alpha`
/// (`nu = 0` particle, `nu = 1` heat).
pub fn bsi_current(
    nu: u8,
    alpha: usize,
    states: &[FermiState],
    source: &dyn TransmissionSource,
    mode: &EvaluationMode,
) -> Result<f64> {
    if nu > 1 {
        return Err(Error::InvalidInput(format!("nu must be 0 or 1, got {nu}")));
    }
    if alpha >= states.len() {
        return Err(Error::InvalidInput(format!("terminal {alpha} out of range")));
    }
    let c = terminal_currents(states, source, mode)?[alpha];
    Ok(if nu == 0 { c.particle } else { c.heat })
}

/// Unitary entropy current into terminal `alpha`.
pub fn unitary_entropy_current(
    alpha: usize,
    states: &[FermiState],
    source: &dyn TransmissionSource,
    mode: &EvaluationMode,
) -> Result<f64> {
    if alpha >= states.len() {
        return Err(Error::InvalidInput(format!("terminal {alpha} out of range")));
    }
    Ok(terminal_currents(states, source, mode)?[alpha].entropy)
}

/// Absolute values of the conservation sums of a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationDefects {
    pub particle: f64,
    pub energy: f64,
    pub entropy: f64,
    /// `|sum I^(1) + sum mu I^(0)|`.
    pub joule: f64,
}

impl ConservationDefects {
    pub fn max_abs(&self) -> f64 {
        self.particle.max(self.energy).max(self.entropy).max(self.joule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub states: Vec<FermiState>,
    pub per_terminal: Vec<TerminalCurrents>,
    /// Entropy injected into the wire by each probe, `-I^S_{P_n}`.
    pub probe_injections: Vec<f64>,
    /// Total probe injection `S_dot_P`.
    pub probe_total_s: f64,
    /// Electrochemical power `I^(0)_1 (mu_2 - mu_1)`.
    pub power: f64,
    /// Common lead temperature used in the ratio.
    pub lead_temperature: f64,
    /// `T_0 S_dot_P / P`; `None` at zero bias or for non-isothermal leads.
    pub ratio: Option<f64>,
}

impl EntropyReport {
    pub fn from_currents(states: Vec<FermiState>, per_terminal: Vec<TerminalCurrents>) -> Result<Self> {
        if states.len() != per_terminal.len() || states.len() < 2 {
            return Err(Error::InvalidInput("states and currents must match".into()));
        }
        let probe_injections: Vec<f64> = per_terminal[2..].iter().map(|c| -c.entropy).collect();
        let probe_total_s = compensated_sum(probe_injections.iter().copied());
        let (s1, s2) = (states[SOURCE], states[DRAIN]);
        let power = per_terminal[SOURCE].particle * (s2.mu - s1.mu);
        let isothermal = s1.temperature == s2.temperature;
        let lead_temperature = 0.5 * (s1.temperature + s2.temperature);
        let ratio = if isothermal && s1.mu != s2.mu && power != 0.0 {
            Some(lead_temperature * probe_total_s / power)
        } else {
            None
        };
        Ok(Self { states, per_terminal, probe_injections, probe_total_s, power, lead_temperature, ratio })
    }

    pub fn conservation(&self) -> ConservationDefects {
        let sum = |g: &dyn Fn(usize) -> f64| compensated_sum((0..self.per_terminal.len()).map(g)).abs();
        let c = &self.per_terminal;
        ConservationDefects {
            particle: sum(&|a| c[a].particle),
            energy: sum(&|a| c[a].energy),
            entropy: sum(&|a| c[a].entropy),
            joule: compensated_sum(
                c.iter()
                    .zip(&self.states)
                    .flat_map(|(ci, s)| [ci.heat, s.mu * ci.particle]),
            )
            .abs(),
        }
    }
}

fn solution_states(leads: &Leads, solution: &ProbeSolution) -> Vec<FermiState> {
    let mut states = vec![leads.source, leads.drain];
    states.extend(
        solution
            .mus
            .iter()
            .zip(&solution.temps)
            .map(|(&mu, &temperature)| FermiState { mu, temperature }),
    );
    states
}

/// Sommerfeld-mode report for a solved floating-probe problem.
pub fn joule_report(solution: &ProbeSolution, problem: &FloatingProblem) -> Result<EntropyReport> {
    let states = solution_states(&problem.leads(), solution);
    let currents = sommerfeld_currents(&states, &problem.transmissions_at_mu0)?;
    EntropyReport::from_currents(states, currents)
}

/// Report with every current integrated exactly.
pub fn joule_report_exact(
    model: &WireModel,
    leads: &Leads,
    solution: &ProbeSolution,
    settings: &QuadratureSettings,
) -> Result<EntropyReport> {
    let states = solution_states(leads, solution);
    let currents = exact_currents(&states, model, settings)?;
    EntropyReport::from_currents(states, currents)
}

/// Closed-form single-site, single-probe results with Lorentzian
/// transmissions evaluated at `mu_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleProbeAnalytic {
    pub t12: f64,
    pub t1p: f64,
    pub t2p: f64,
    pub mu_p: f64,
    pub temp_p: f64,
    /// `I^(0)_1`.
    pub particle_current: f64,
    pub power: f64,
    /// `-I^S_P`.
    pub entropy_injection: f64,
    /// `T_0 (-I^S_P) / P`, `None` at zero bias.
    pub ratio: Option<f64>,
    /// Leading order in the bias:
    /// `(1/2) [T1P TP2/(T1P+TP2)] / [T12 + T1P TP2/(T1P+TP2)]`.
    pub leading_order_ratio: f64,
}

pub fn single_probe_analytic(
    hopping: f64,
    gamma_p: f64,
    lead_mus: (f64, f64),
    lead_temperature: f64,
) -> Result<SingleProbeAnalytic> {
    let (mu1, mu2) = lead_mus;
    let mu0 = 0.5 * (mu1 + mu2);
    if !(hopping > 0.0) || !(gamma_p >= 0.0) || !(lead_temperature > 0.0) || mu0.abs() >= 2.0 * hopping {
        return Err(Error::InvalidInput(format!(
            "single-probe closed form needs t > 0, gamma_p >= 0, T0 > 0 and |mu0| < 2t \
             (t = {hopping}, gamma_p = {gamma_p}, T0 = {lead_temperature}, mu0 = {mu0})"
        )));
    }
    let lead_width = (4.0 * hopping * hopping - mu0 * mu0).sqrt();
    let gamma_bar = lead_width + 0.5 * gamma_p;
    let g2 = gamma_bar * gamma_bar;
    let t12 = lead_width * lead_width / g2;
    let t1p = lead_width * gamma_p / g2;
    let t2p = t1p;
    let (series, mu_p, temp_p, heating) = if gamma_p > 0.0 {
        let series = t1p * t2p / (t1p + t2p);
        let mix = t1p * t2p / ((t1p + t2p) * (t1p + t2p));
        let c3 = sommerfeld_entropy_coefficient();
        let excess_sq = mix * (mu1 - mu2).powi(2) / c3;
        let temp_p = (lead_temperature * lead_temperature + excess_sq).sqrt();
        (series, (t1p * mu1 + t2p * mu2) / (t1p + t2p), temp_p, excess_sq / (temp_p + lead_temperature))
    } else {
        (0.0, mu0, lead_temperature, 0.0)
    };
    let particle_current = (t12 + series) * (mu2 - mu1);
    let power = particle_current * (mu2 - mu1);
    let entropy_injection = (t1p + t2p) * sommerfeld_entropy_coefficient() * heating;
    let ratio = (mu1 != mu2).then(|| lead_temperature * entropy_injection / power);
    Ok(SingleProbeAnalytic {
        t12,
        t1p,
        t2p,
        mu_p,
        temp_p,
        particle_current,
        power,
        entropy_injection,
        ratio,
        leading_order_ratio: 0.5 * series / (t12 + series),
    })
}

/// Entropy of the probe's equilibrium distribution and of the local
/// non-equilibrium distribution on one site, both weighted by the local
/// spectrum `g_n(e)` (dimensionless, in units of k_B).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyDeficit {
    /// 1-based site.
    pub site: usize,
    pub s_probe: f64,
    pub s_local: f64,
    /// `s_probe - s_local`, integrated directly from the pointwise
    /// difference.
    pub delta: f64,
}

/// Local distribution `f_n` and its complement on every site, plus the
/// local spectrum `g_n`, from the retarded function alone.
pub(crate) fn local_occupations(
    model: &WireModel,
    states: &[FermiState],
    energy: f64,
) -> Result<Vec<(f64, f64, f64)>> {
    let (g, se) = retarded_greens(model, energy)?;
    let occ: Vec<(f64, f64)> = states.iter().map(|s| s.occupation_pair(energy)).collect();
    let n = model.n_sites();
    Ok((0..n)
        .map(|site| {
            let (mut w, mut wf, mut wh) = (0.0, 0.0, 0.0);
            for (gamma, (f, h)) in se.gammas.iter().zip(&occ) {
                let x = gamma.width * g[(site, gamma.site)].norm_sqr();
                w += x;
                wf += x * f;
                wh += x * h;
            }
            if w > 0.0 {
                (wf / w, wh / w, w / (2.0 * PI))
            } else {
                (f64::NAN, f64::NAN, 0.0)
            }
        })
        .collect())
}

/// Entropy deficits on every site of a solved configuration.
pub fn entropy_deficits(
    model: &WireModel,
    leads: &Leads,
    solution: &ProbeSolution,
    settings: &QuadratureSettings,
) -> Result<Vec<EntropyDeficit>> {
    if !(model.probe_coupling() > 0.0) {
        return Err(Error::InvalidInput("entropy deficit needs gamma_p > 0".into()));
    }
    let n = model.n_sites();
    if solution.mus.len() != n {
        return Err(Error::InvalidInput("solution does not match the model".into()));
    }
    let states = solution_states(leads, solution);
    let pairs: Vec<(f64, f64)> = states.iter().map(|s| (s.mu, s.temperature)).collect();
    let (lo, hi) = settings.energy_window(&pairs, model.support());
    let breaks: Vec<f64> = states.iter().map(|s| s.mu).collect();
    let r = integrate_vec(
        |e, out| {
            let local = local_occupations(model, &states, e)?;
            for (k, &(f, h, g)) in local.iter().enumerate() {
                if !(g > 0.0) {
                    return Err(Error::UndefinedDistribution { site: k + 1, energy: e });
                }
                let (fp, hp) = states[2 + k].occupation_pair(e);
                let sp = binary_entropy(fp, hp);
                let sl = binary_entropy(f, h);
                out[3 * k] = g * sp;
                out[3 * k + 1] = g * sl;
                out[3 * k + 2] = g * (sp - sl);
            }
            Ok(())
        },
        3 * n,
        lo,
        hi,
        &breaks,
        settings,
    )?;
    Ok((0..n)
        .map(|k| EntropyDeficit {
            site: k + 1,
            s_probe: r.values[3 * k],
            s_local: r.values[3 * k + 1],
            delta: r.values[3 * k + 2],
        })
        .collect())
}

/// Entropy deficit on a single 1-based site.
pub fn entropy_deficit(
    model: &WireModel,
    leads: &Leads,
    solution: &ProbeSolution,
    site: usize,
    settings: &QuadratureSettings,
) -> Result<EntropyDeficit> {
    if site == 0 || site > model.n_sites() {
        return Err(Error::InvalidInput(format!("site {site} outside 1..={}", model.n_sites())));
    }
    Ok(entropy_deficits(model, leads, solution, settings)?[site - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::negf::{transmission_at, ConstantTransmission};
    use approx::assert_relative_eq;

    fn uniform_states(m: usize, mu: f64, t: f64) -> Vec<FermiState> {
        vec![FermiState { mu, temperature: t }; m]
    }

    #[test]
    fn fermi_pair_is_complementary() {
        for x in [-800.0, -30.0, -1.0, 0.0, 0.5, 40.0, 900.0] {
            let (f, h) = fermi_pair(x * K_B * 100.0, 0.0, 100.0);
            assert!((f + h - 1.0).abs() < 1e-15);
        }
        assert_eq!(fermi(0.2, 0.2, 10.0), 0.5);
    }

    #[test]
    fn entropy_density_properties() {
        let s = FermiState { mu: 0.1, temperature: 250.0 };
        assert_relative_eq!(fermi_entropy_density(&s, 0.1), K_B * 2f64.ln(), max_relative = 1e-15);
        let kt = K_B * 250.0;
        for x in [0.3, 1.0, 4.0, 17.0] {
            let a = fermi_entropy_density(&s, 0.1 + x * kt);
            let b = fermi_entropy_density(&s, 0.1 - x * kt);
            assert_relative_eq!(a, b, max_relative = 1e-14);
            // Direct definition as an independent route.
            let f = fermi(0.1 + x * kt, 0.1, 250.0);
            let direct = -K_B * (f * f.ln() + (1.0 - f) * (1.0 - f).ln());
            assert_relative_eq!(a, direct, max_relative = 1e-9);
        }
        let cold = FermiState { mu: 0.0, temperature: 1e-6 };
        assert_eq!(fermi_entropy_density(&cold, 0.01), 0.0);
        assert!(fermi_entropy_density(&s, 0.1 + 60.0 * kt) < 1e-20);
    }

    #[test]
    fn equilibrium_carries_no_current() {
        let m = WireModel::uniform(3, 1.0, 0.5).unwrap();
        let states = uniform_states(5, 0.05, 300.0);
        for mode in [EvaluationMode::Sommerfeld, EvaluationMode::Exact(QuadratureSettings::default())] {
            let c = terminal_currents(&states, &m, &mode).unwrap();
            for ci in c {
                assert!(ci.particle.abs() < 1e-15 && ci.heat.abs() < 1e-15 && ci.entropy.abs() < 1e-18);
            }
        }
    }

    #[test]
    fn clean_chain_landauer_current() {
        // Unit transmission at the band centre; small bias keeps T(e) ~ 1.
        let m = WireModel::uniform(4, 2.7, 0.0).unwrap();
        let dmu = 1e-4;
        let mut states = uniform_states(6, 0.0, 50.0);
        states[SOURCE].mu = dmu / 2.0;
        states[DRAIN].mu = -dmu / 2.0;
        let q = QuadratureSettings::default().with_abs_tol(1e-15);
        let drain = bsi_current(0, DRAIN, &states, &m, &EvaluationMode::Exact(q)).unwrap();
        assert_relative_eq!(drain, dmu, max_relative = 1e-6);
        let som = bsi_current(0, DRAIN, &states, &m, &EvaluationMode::Sommerfeld).unwrap();
        assert_relative_eq!(som, dmu, max_relative = 1e-12);
        assert!(bsi_current(2, DRAIN, &states, &m, &EvaluationMode::Sommerfeld).is_err());
    }

    #[test]
    fn constant_transmission_exact_equals_sommerfeld() {
        // The Sommerfeld expressions are exact for energy-independent T_ab,
        // so the quadrature must reproduce them.
        let m = WireModel::uniform(3, 1.0, 0.8).unwrap();
        let tm = transmission_at(&m, 0.0).unwrap();
        let src = ConstantTransmission(tm.clone());
        let states = vec![
            FermiState { mu: 0.03, temperature: 120.0 },
            FermiState { mu: -0.02, temperature: 90.0 },
            FermiState { mu: 0.01, temperature: 200.0 },
            FermiState { mu: 0.0, temperature: 150.0 },
            FermiState { mu: -0.015, temperature: 110.0 },
        ];
        let q = QuadratureSettings::default().with_abs_tol(1e-14);
        let exact = exact_currents(&states, &src, &q).unwrap();
        let som = sommerfeld_currents(&states, &tm).unwrap();
        for (e, s) in exact.iter().zip(&som) {
            assert!((e.particle - s.particle).abs() < 1e-12);
            assert!((e.heat - s.heat).abs() < 1e-12);
            assert!((e.entropy - s.entropy).abs() < 1e-16);
        }
    }

    #[test]
    fn exact_mode_conserves_structurally() {
        let m = WireModel::uniform(4, 1.0, 0.6).unwrap();
        let mut states = uniform_states(6, 0.0, 200.0);
        for (k, s) in states.iter_mut().enumerate() {
            s.mu = 0.02 * (k as f64 - 2.5);
            s.temperature = 150.0 + 20.0 * k as f64;
        }
        let c = exact_currents(&states, &m, &QuadratureSettings::default()).unwrap();
        let report = EntropyReport::from_currents(states, c).unwrap();
        let d = report.conservation();
        assert!(d.particle < 1e-14 && d.energy < 1e-14 && d.entropy < 1e-17, "{d:?}");
    }

    #[test]
    fn single_probe_closed_forms() {
        let t = 2.7;
        let a = single_probe_analytic(t, t, (0.01, -0.01), 100.0).unwrap();
        assert_eq!(a.mu_p, 0.0);
        let gb = 2.0 * t + 0.5 * t;
        assert_relative_eq!(a.t12, 4.0 * t * t / (gb * gb), max_relative = 1e-14);
        assert_relative_eq!(a.t1p, 2.0 * t * t / (gb * gb), max_relative = 1e-14);
        assert!(a.ratio.unwrap() <= 0.5 && a.leading_order_ratio <= 0.5);
        // Leading order is the small-bias limit of the full closed form.
        let tiny = single_probe_analytic(t, t, (1e-7, -1e-7), 100.0).unwrap();
        assert_relative_eq!(tiny.ratio.unwrap(), tiny.leading_order_ratio, max_relative = 1e-9);
        let zero = single_probe_analytic(t, t, (0.0, 0.0), 100.0).unwrap();
        assert!(zero.ratio.is_none());
        let decoupled = single_probe_analytic(t, 0.0, (0.01, -0.01), 100.0).unwrap();
        assert_eq!(decoupled.ratio, Some(0.0));
    }

    #[test]
    fn single_probe_ratio_bounded_by_half() {
        for k in -20..=30 {
            let gp = 2.7 * 10f64.powf(k as f64 / 5.0);
            for dmu in [1e-4, 0.05, 0.3] {
                let a = single_probe_analytic(2.7, gp, (dmu / 2.0, -dmu / 2.0), 150.0).unwrap();
                assert!(a.ratio.unwrap() <= 0.5 && a.ratio.unwrap() >= 0.0);
            }
        }
    }
}
