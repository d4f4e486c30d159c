//! Executes a validated run and collects tables and checks.

use std::collections::BTreeMap;
use std::time::Instant;

use joulewire_core::entropy::{entropy_deficits, joule_report, joule_report_exact, EntropyReport};
use joulewire_core::experiments::{
    collapse_pairs, deficit_fit, distribution_snapshots, monotone_in_n, probe_entropy_shares, resistance_scan,
    sweep_ratio, ProfileTable, RatioRow, CONSERVATION_LIMIT,
};
use joulewire_core::probes::{solve_floating_exact, solve_sommerfeld, FloatingProblem, ProbeSolution};
use joulewire_core::WireModel;

use crate::config::{Experiment, Mode, RunKind, ValidatedRun};
use crate::error::CliError;
use crate::output::{num, opt, Check, Table};

/// Largest admissible floating-condition residual for a returned solution.
const RESIDUAL_LIMIT: f64 = 1e-9;

#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub checks: BTreeMap<String, Check>,
    pub row_errors: Vec<String>,
    pub warnings: Vec<String>,
    pub timings: BTreeMap<String, f64>,
}

impl Outcome {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(stage.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    fn check(&mut self, name: &str, check: Check) {
        self.checks.insert(name.to_string(), check);
    }

    pub fn failed_required(&self) -> Vec<&str> {
        self.checks.iter().filter(|(_, c)| c.required && !c.passed).map(|(k, _)| k.as_str()).collect()
    }
}

pub fn execute(run: &ValidatedRun) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match &run.kind {
        RunKind::Single { model, sites, points } => single(run, model, sites, *points, &mut out)?,
        RunKind::Sweep { spec, min_n } => {
            let rows = out.time("sweep", || sweep_ratio(spec))?;
            ratio_table(&rows, &mut out);
            sweep_checks(&rows, &mut out);
            if run.config.experiment == Experiment::DeficitFit {
                let fits = out.time("fit", || deficit_fit(&rows, *min_n))?;
                let mut t = Table::new("deficit_fit.csv", &["gamma_over_t", "intercept", "slope", "r_squared", "n_points"]);
                for f in &fits {
                    t.push(vec![num(f.gamma_over_t), num(f.intercept), num(f.slope), num(f.r_squared), f.n_points.to_string()]);
                }
                out.tables.push(t);
            }
        }
        RunKind::Resistance { n, gamma_over_t, regime } => {
            let fit = out.time("scan", || {
                resistance_scan(*n, gamma_over_t, run.config.model.t, &run.leads, *regime)
            })?;
            let mut t = Table::new("resistance.csv", &["gamma_over_t", "resistance_h_over_e2"]);
            for &(g, r) in &fit.rows {
                t.push(vec![num(g), num(r)]);
            }
            out.tables.push(t);
            let mut f = Table::new(
                "resistance_fit.csv",
                &["regime", "n", "intercept", "coefficient", "normalized_coefficient", "r_squared"],
            );
            f.push(vec![
                format!("{:?}", fit.regime),
                fit.n.to_string(),
                num(fit.intercept),
                num(fit.coefficient),
                opt(fit.normalized_coefficient),
                num(fit.r_squared),
            ]);
            out.tables.push(f);
            out.check(
                "resistance_within_window",
                Check::observed(fit.within_window, Some(fit.r_squared), "couplings inside the regime window"),
            );
        }
    }
    Ok(out)
}

fn solve(run: &ValidatedRun, model: &WireModel, out: &mut Outcome) -> Result<(ProbeSolution, EntropyReport), CliError> {
    let leads = &run.leads;
    match run.config.solver.mode {
        Mode::Sommerfeld => {
            let problem = out.time("transmission", || FloatingProblem::new(model, leads))?;
            let s = out.time("solve", || solve_sommerfeld(&problem))?;
            let r = out.time("currents", || joule_report(&s, &problem))?;
            Ok((s, r))
        }
        Mode::Exact => {
            let s = out.time("solve", || solve_floating_exact(model, leads, &run.exact))?;
            let r = out.time("currents", || joule_report_exact(model, leads, &s, &run.quadrature))?;
            Ok((s, r))
        }
    }
}

fn single(
    run: &ValidatedRun,
    model: &WireModel,
    sites: &[usize],
    points: usize,
    out: &mut Outcome,
) -> Result<(), CliError> {
    let (solution, report) = solve(run, model, out)?;
    let residual = solution.max_residual();
    out.check(
        "floating_residual",
        Check::required(residual <= RESIDUAL_LIMIT, residual, format!("max |I0|, |I1| over probes <= {RESIDUAL_LIMIT:e}")),
    );
    // Exact currents carry quadrature error, so conservation is only enforced in Sommerfeld mode.
    let conservation = report.conservation().max_abs();
    let enforce = run.config.solver.mode == Mode::Sommerfeld;
    let limit = if enforce { CONSERVATION_LIMIT } else { RESIDUAL_LIMIT };
    out.check(
        "conservation",
        Check { passed: conservation <= limit, required: enforce, value: Some(conservation), detail: format!("max conservation defect <= {limit:e}") },
    );

    let table = ProfileTable::from_solution(&solution, &run.leads);
    profile_table(&table, out);

    match run.config.experiment {
        Experiment::Solve => {
            let mut c = Table::new("currents.csv", &["terminal", "particle", "heat", "energy", "entropy"]);
            for (k, cur) in report.per_terminal.iter().enumerate() {
                let name = match k {
                    0 => "source".to_string(),
                    1 => "drain".to_string(),
                    _ => format!("probe{}", k - 1),
                };
                c.push(vec![name, num(cur.particle), num(cur.heat), num(cur.energy), num(cur.entropy)]);
            }
            out.tables.push(c);
            let mut s = Table::new(
                "summary.csv",
                &["n", "power", "S_dot_probes", "ratio", "max_residual", "conservation_max_abs", "iterations"],
            );
            s.push(vec![
                model.n_sites().to_string(),
                num(report.power),
                num(report.probe_total_s),
                opt(report.ratio),
                num(residual),
                num(conservation),
                solution.iterations.to_string(),
            ]);
            out.tables.push(s);
        }
        Experiment::Profiles => {
            out.check(
                "mu_strictly_monotone",
                Check::observed(table.mu_strictly_monotone, None, "probe potentials decrease from source to drain"),
            );
            out.check(
                "single_interior_t_max",
                Check::observed(table.single_interior_t_max, None, "temperature profile has one interior maximum"),
            );
            out.check(
                "symmetry_defect",
                Check::observed(table.symmetry_defect < 1e-9, Some(table.symmetry_defect), "mirror symmetry of the profiles"),
            );
            out.check(
                "oscillation_flag",
                Check::observed(!table.oscillation_flag, None, "no oscillations in the temperature profile"),
            );
        }
        Experiment::Distributions => {
            let snaps = out.time("distributions", || distribution_snapshots(model, &run.leads, &solution, sites, points))?;
            for s in &snaps {
                let mut t = Table::new(format!("distributions_site{}.csv", s.site), &["energy", "f_local", "f_probe"]);
                for k in 0..s.energies.len() {
                    t.push(vec![num(s.energies[k]), num(s.f_local[k]), num(s.f_probe[k])]);
                }
                out.tables.push(t);
                out.check(
                    &format!("max_abs_difference_site{}", s.site),
                    Check::observed(true, Some(s.max_abs_difference()), "max |f_local - f_probe|"),
                );
            }
            if model.probe_coupling() > 0.0 {
                let deficits = out.time("entropy_deficit", || {
                    entropy_deficits(model, &run.leads, &solution, &run.quadrature)
                })?;
                let mut t = Table::new("entropy_deficit.csv", &["site", "s_probe", "s_local", "delta"]);
                for d in &deficits {
                    t.push(vec![d.site.to_string(), num(d.s_probe), num(d.s_local), num(d.delta)]);
                }
                out.tables.push(t);
                let min = deficits.iter().map(|d| d.delta).fold(f64::INFINITY, f64::min);
                out.check("entropy_deficit_min", Check::observed(min >= -1e-12, Some(min), "probe entropy >= local entropy"));
            } else {
                out.warnings.push("gamma_p = 0: local distributions are undefined, entropy_deficit.csv skipped".into());
            }
        }
        Experiment::EntropyShares => {
            let shares = probe_entropy_shares(&report).ok();
            if shares.is_none() {
                out.warnings.push("probe entropy production is zero; share column left empty".into());
            }
            let mut t = Table::new("entropy_shares.csv", &["site", "S_dot", "share"]);
            for (k, s) in report.probe_injections.iter().enumerate() {
                t.push(vec![(k + 1).to_string(), num(*s), opt(shares.as_ref().map(|v| v[k]))]);
            }
            out.tables.push(t);
        }
        _ => unreachable!("sweep experiments are not single configurations"),
    }
    Ok(())
}

fn profile_table(table: &ProfileTable, out: &mut Outcome) {
    let mut t = Table::new("profiles.csv", &["site", "mu", "temperature"]);
    for r in &table.rows {
        t.push(vec![r.site.to_string(), num(r.mu), num(r.temperature)]);
    }
    out.tables.push(t);
}

fn ratio_table(rows: &[RatioRow], out: &mut Outcome) {
    let mut t = Table::new(
        "ratio_sweep.csv",
        &["N", "gamma_over_t", "N_gamma_over_t", "ratio", "power", "S_dot_probes", "conservation_max_abs"],
    );
    for r in rows {
        let head = vec![r.n.to_string(), num(r.gamma_over_t), num(r.n_gamma_over_t())];
        let tail = match &r.outcome {
            Ok(p) => vec![opt(p.ratio), num(p.power), num(p.s_dot_probes), num(p.conservation_max_abs)],
            Err(e) => {
                out.row_errors.push(format!("N={} gamma_over_t={}: {e}", r.n, r.gamma_over_t));
                vec![String::new(); 4]
            }
        };
        t.push([head, tail].concat());
    }
    out.tables.push(t);
}

fn sweep_checks(rows: &[RatioRow], out: &mut Outcome) {
    let worst = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .map(|p| p.conservation_max_abs)
        .fold(0.0, f64::max);
    out.check(
        "conservation",
        Check::required(worst <= CONSERVATION_LIMIT, worst, format!("max conservation defect <= {CONSERVATION_LIMIT:e}")),
    );
    for (g, ok) in monotone_in_n(rows) {
        out.check(
            &format!("monotone_in_n_gamma_{g}"),
            Check::observed(ok, Some(g), "ratio non-decreasing in N at fixed gamma/t"),
        );
    }
    let pairs = collapse_pairs(rows, 10.0);
    if let Some(max) = pairs.iter().map(|p| p.difference).reduce(f64::max) {
        out.check(
            "collapse_max_difference",
            Check::observed(max <= 0.05, Some(max), format!("{} pairs with equal N*gamma/t >= 10", pairs.len())),
        );
    }
}
