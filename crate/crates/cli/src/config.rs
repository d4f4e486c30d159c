//! Run configuration: parsing, validation and conversion to solver inputs.

use std::path::{Path, PathBuf};

use joulewire_core::experiments::{ResistanceRegime, SweepSpec, SNAPSHOT_POINTS};
use joulewire_core::probes::{ExactSettings, Leads};
use joulewire_core::quadrature::QuadratureSettings;
use joulewire_core::WireModel;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Solve,
    Profiles,
    SweepRatio,
    DeficitFit,
    Distributions,
    EntropyShares,
    Resistance,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Profiles => "profiles",
            Self::SweepRatio => "sweep-ratio",
            Self::DeficitFit => "deficit-fit",
            Self::Distributions => "distributions",
            Self::EntropyShares => "entropy-shares",
            Self::Resistance => "resistance",
        }
    }

    fn is_single_configuration(&self) -> bool {
        matches!(self, Self::Solve | Self::Profiles | Self::Distributions | Self::EntropyShares)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Sommerfeld,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    #[default]
    Weak,
    Strong,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Hopping, eV.
    pub t: f64,
    /// Number of sites (one probe per site).
    pub n: Option<usize>,
    /// Probe coupling, eV.
    pub gamma_p: Option<f64>,
    /// Probe couplings in units of t, for sweeps and resistance scans.
    pub gamma_list: Option<Vec<f64>>,
    /// On-site energies, eV; zeros when omitted.
    pub onsite: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoSection {
    /// Lead temperature, K.
    pub t0: f64,
    /// `mu_1 - mu_2`, eV.
    pub delta_mu: f64,
    #[serde(default)]
    pub mu0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub mode: Mode,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let q = QuadratureSettings::default();
        let e = ExactSettings::default();
        Self {
            mode: Mode::Sommerfeld,
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            max_subdivisions: q.max_subdivisions,
            newton_tol: e.tolerance,
            max_iterations: e.max_iterations,
            max_halvings: e.max_halvings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub n_values: Option<Vec<usize>>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    /// Smallest N used in the 1/N fit.
    pub min_n: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { n_values: None, n_min: None, n_max: None, min_n: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResistanceSection {
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistributionSection {
    /// 1-based sites; defaults to first, centre and last.
    pub sites: Option<Vec<usize>>,
    pub points: usize,
}

impl Default for DistributionSection {
    fn default() -> Self {
        Self { sites: None, points: SNAPSHOT_POINTS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output_dir: Option<PathBuf>,
    pub model: ModelSection,
    pub thermo: ThermoSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub resistance: ResistanceSection,
    #[serde(default)]
    pub distributions: DistributionSection,
}

/// Fully checked inputs for one run.
#[derive(Debug, Clone)]
pub struct ValidatedRun {
    pub config: RunConfig,
    pub leads: Leads,
    pub quadrature: QuadratureSettings,
    pub exact: ExactSettings,
    pub kind: RunKind,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub enum RunKind {
    Single { model: WireModel, sites: Vec<usize>, points: usize },
    Sweep { spec: SweepSpec, min_n: usize },
    Resistance { n: usize, gamma_over_t: Vec<f64>, regime: ResistanceRegime },
}

impl ValidatedRun {
    /// Number of independent solver configurations the run will evaluate.
    pub fn work_items(&self) -> usize {
        match &self.kind {
            RunKind::Single { .. } => 1,
            RunKind::Sweep { spec, .. } => spec.n_points(),
            RunKind::Resistance { gamma_over_t, .. } => gamma_over_t.len(),
        }
    }

    /// Rough single-thread runtime estimate in seconds for a release build,
    /// scaled from the cost of dense solves of size `N + 2`.
    pub fn estimated_seconds(&self) -> f64 {
        let dense = |n: usize| 2e-5 + 3.2e-9 * ((n + 2) as f64).powi(3);
        match &self.kind {
            RunKind::Single { model, .. } => {
                let m = (model.n_sites() + 2) as f64;
                match self.config.solver.mode {
                    Mode::Sommerfeld => dense(model.n_sites()) + 1e-3,
                    // One Newton step costs about 1e-5 (N + 2)^3 s; assume five.
                    Mode::Exact => 5e-5 * m.powi(3) + 1e-3,
                }
            }
            RunKind::Sweep { spec, .. } => {
                spec.n_values.iter().map(|&n| dense(n)).sum::<f64>() * spec.gamma_values.len() as f64
            }
            RunKind::Resistance { n, gamma_over_t, .. } => dense(*n) * gamma_over_t.len() as f64,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| invalid(e.to_string()))
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse(&text)
}

impl RunConfig {
    /// Checks every section; model errors from the core crate are reported as
    /// configuration errors.
    pub fn validate(self) -> Result<ValidatedRun, CliError> {
        self.validate_inner().map_err(|e| match e {
            CliError::Solver(inner) => CliError::Config(inner.to_string()),
            other => other,
        })
    }

    fn validate_inner(self) -> Result<ValidatedRun, CliError> {
        let m = &self.model;
        let th = &self.thermo;
        let mut warnings = Vec::new();
        if !(m.t.is_finite() && m.t > 0.0) {
            return Err(invalid(format!("model.t must be positive, got {}", m.t)));
        }
        if !(th.t0.is_finite() && th.t0 > 0.0) {
            return Err(invalid(format!("thermo.t0 must be positive, got {}", th.t0)));
        }
        if !th.delta_mu.is_finite() || !th.mu0.is_finite() {
            return Err(invalid("thermo.delta_mu and thermo.mu0 must be finite"));
        }
        if th.mu0.abs() >= 2.0 * m.t {
            return Err(invalid(format!("thermo.mu0 = {} lies outside the band (-2t, 2t)", th.mu0)));
        }
        if th.delta_mu.abs() > 2.0 * m.t {
            warnings.push(format!(
                "delta_mu = {} eV exceeds the band half-width {} eV: Sommerfeld validity doubtful",
                th.delta_mu,
                2.0 * m.t
            ));
        }
        let leads = Leads::symmetric(th.mu0, th.delta_mu, th.t0)?;

        let s = &self.solver;
        let quadrature = QuadratureSettings {
            abs_tol: s.abs_tol,
            rel_tol: s.rel_tol,
            max_subdivisions: s.max_subdivisions,
            ..QuadratureSettings::default()
        };
        quadrature.validate()?;
        if !(s.newton_tol.is_finite() && s.newton_tol > 0.0) {
            return Err(invalid("solver.newton_tol must be positive"));
        }
        let exact = ExactSettings {
            quadrature,
            tolerance: s.newton_tol,
            max_iterations: s.max_iterations,
            max_halvings: s.max_halvings,
            ..ExactSettings::default()
        };

        let need_n = || m.n.ok_or_else(|| invalid(format!("{} needs model.n", self.experiment.name())));
        let need_gamma_list = || {
            m.gamma_list
                .clone()
                .filter(|g| !g.is_empty())
                .ok_or_else(|| invalid(format!("{} needs a non-empty model.gamma_list", self.experiment.name())))
        };

        let kind = if self.experiment.is_single_configuration() {
            let n = need_n()?;
            let gamma_p = m
                .gamma_p
                .ok_or_else(|| invalid(format!("{} needs model.gamma_p", self.experiment.name())))?;
            let onsite = m.onsite.clone().unwrap_or_else(|| vec![0.0; n]);
            let model = WireModel::new(n, m.t, onsite, gamma_p, 0.0)?;
            let d = &self.distributions;
            let sites = d.sites.clone().unwrap_or_else(|| {
                let mut v = vec![1, n.div_ceil(2), n];
                v.dedup();
                v
            });
            if let Some(bad) = sites.iter().find(|&&k| k == 0 || k > n) {
                return Err(invalid(format!("distributions.sites entry {bad} outside 1..={n}")));
            }
            if d.points < 2 {
                return Err(invalid("distributions.points must be at least 2"));
            }
            if self.experiment == Experiment::EntropyShares && th.delta_mu == 0.0 {
                warnings.push("zero bias: probe entropy shares are undefined".into());
            }
            RunKind::Single { model, sites, points: d.points }
        } else {
            if s.mode == Mode::Exact {
                return Err(invalid(format!(
                    "{} runs in Sommerfeld mode only; set solver.mode = \"sommerfeld\"",
                    self.experiment.name()
                )));
            }
            if m.onsite.is_some() || m.gamma_p.is_some() {
                warnings.push(format!(
                    "{} uses uniform chains from model.gamma_list; model.onsite and model.gamma_p are ignored",
                    self.experiment.name()
                ));
            }
            match self.experiment {
                Experiment::Resistance => {
                    let n = need_n()?;
                    let gamma_over_t = need_gamma_list()?;
                    if gamma_over_t.len() < 5 {
                        return Err(invalid("resistance fits need at least 5 entries in model.gamma_list"));
                    }
                    if th.delta_mu == 0.0 {
                        return Err(invalid("resistance needs thermo.delta_mu != 0"));
                    }
                    for g in &gamma_over_t {
                        WireModel::uniform(n, m.t, g * m.t)?;
                    }
                    let regime = match self.resistance.regime {
                        Regime::Weak => ResistanceRegime::WeakCoupling,
                        Regime::Strong => ResistanceRegime::StrongCoupling,
                    };
                    let (lo, hi) = regime.default_window();
                    if gamma_over_t.iter().any(|&g| g < lo || g > hi) {
                        warnings.push(format!(
                            "gamma_list leaves the default {:?} window [{lo}, {hi}]; fit coefficients may not match the asymptotic form",
                            self.resistance.regime
                        ));
                    }
                    RunKind::Resistance { n, gamma_over_t, regime }
                }
                _ => {
                    let sw = &self.sweep;
                    let n_values = match (&sw.n_values, sw.n_min, sw.n_max) {
                        (Some(v), None, None) => v.clone(),
                        (None, Some(lo), Some(hi)) if lo >= 1 && lo <= hi => (lo..=hi).collect(),
                        (None, None, None) => return Err(invalid("sweep needs sweep.n_values or sweep.n_min/n_max")),
                        _ => {
                            return Err(invalid(
                                "give either sweep.n_values or both sweep.n_min <= sweep.n_max, not a mix",
                            ))
                        }
                    };
                    let spec = SweepSpec {
                        n_values,
                        gamma_values: need_gamma_list()?,
                        hopping: m.t,
                        lead_temperature: th.t0,
                        delta_mu: th.delta_mu,
                        mu0: th.mu0,
                    };
                    spec.validate()?;
                    for w in spec.warnings() {
                        if !warnings.contains(&w) {
                            warnings.push(w);
                        }
                    }
                    RunKind::Sweep { spec, min_n: sw.min_n }
                }
            }
        };
        Ok(ValidatedRun { config: self, leads, quadrature, exact, kind, warnings })
    }
}
