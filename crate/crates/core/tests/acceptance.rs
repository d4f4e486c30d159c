//! Acceptance gate: one pass/fail line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use joulewire_core::entropy::{entropy_deficits, fermi_entropy_density, joule_report, single_probe_analytic};
use joulewire_core::experiments::{
    collapse_pairs, deficit_fit, monotone_in_n, resistance, resistance_scan, sommerfeld_exact_discrepancy,
    sweep_ratio, ProfileTable, ResistanceRegime, SweepSpec,
};
use joulewire_core::probes::{solve_floating_exact, solve_sommerfeld, ExactSettings, FloatingProblem, Leads};
use joulewire_core::quadrature::{integrate, QuadratureSettings};
use joulewire_core::{FermiState, WireModel, K_B};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const HOPPING: f64 = 2.7;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn conservation_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a6f_756c_6577);
    let mut worst = [0.0_f64; 4];
    for _ in 0..50 {
        let n = rng.random_range(1..=60);
        let gamma = 0.05 * 200f64.powf(rng.random::<f64>());
        let t0 = rng.random_range(20.0..400.0);
        let dmu = rng.random_range(0.01..=1.0) * 5.0 * K_B * t0;
        let mu0 = rng.random_range(-0.5..0.5) * HOPPING;
        let model = WireModel::uniform(n, HOPPING, gamma * HOPPING).map_err(err)?;
        let leads = Leads::symmetric(mu0, dmu, t0).map_err(err)?;
        let problem = FloatingProblem::new(&model, &leads).map_err(err)?;
        let solution = solve_sommerfeld(&problem).map_err(err)?;
        let d = joule_report(&solution, &problem).map_err(err)?.conservation();
        for (w, v) in worst.iter_mut().zip([d.particle, d.energy, d.entropy, d.joule]) {
            *w = w.max(v);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst.iter().all(|&w| w <= 1e-10) && elapsed < 30.0,
        format!(
            "max |sum I0| = {:.2e}, |sum IE| = {:.2e}, |sum IS| = {:.2e}, joule = {:.2e}, {elapsed:.2} s",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn single_probe_oracle() -> Outcome {
    let leads = Leads::symmetric(0.0, 1e-3, 100.0).map_err(err)?;
    let mut worst_rel = 0.0_f64;
    let mut max_ratio = 0.0_f64;
    let mut strong = 0.0;
    for g in [1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3] {
        let model = WireModel::uniform(1, HOPPING, g * HOPPING).map_err(err)?;
        let problem = FloatingProblem::new(&model, &leads).map_err(err)?;
        let solution = solve_sommerfeld(&problem).map_err(err)?;
        let numeric = joule_report(&solution, &problem).map_err(err)?.ratio.ok_or("ratio undefined")?;
        let closed = single_probe_analytic(HOPPING, g * HOPPING, (5e-4, -5e-4), 100.0)
            .map_err(err)?
            .ratio
            .ok_or("closed-form ratio undefined")?;
        worst_rel = worst_rel.max((numeric - closed).abs() / closed);
        max_ratio = max_ratio.max(numeric);
        if g == 1e3 {
            strong = numeric;
        }
    }
    check(
        worst_rel <= 1e-8 && max_ratio <= 0.5 && strong >= 0.49,
        format!("max rel diff {worst_rel:.2e}, max ratio {max_ratio:.6}, ratio(1e3) = {strong:.6}"),
    )
}

fn ratio_trends() -> Outcome {
    let start = Instant::now();
    let spec = SweepSpec {
        n_values: (1..=100).collect(),
        gamma_values: vec![0.25, 0.5, 1.0, 2.0, 5.0],
        hopping: HOPPING,
        lead_temperature: 232.0,
        delta_mu: 0.2,
        mu0: 0.0,
    };
    let rows = sweep_ratio(&spec).map_err(err)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    let monotone = monotone_in_n(&rows).iter().all(|&(_, ok)| ok);
    let pairs = collapse_pairs(&rows, 10.0);
    let worst = pairs.iter().map(|p| p.difference).fold(0.0, f64::max);
    let top = rows
        .iter()
        .find(|r| r.n == 100 && r.gamma_over_t == 5.0)
        .and_then(|r| r.ratio())
        .unwrap_or(f64::NAN);
    let elapsed = start.elapsed().as_secs_f64();
    check(
        failed == 0 && monotone && !pairs.is_empty() && worst <= 0.05 && top > 0.9 && elapsed < 300.0,
        format!(
            "{} rows ({failed} failed), monotone {monotone}, {} collapse pairs max diff {worst:.4}, \
             ratio(100, 5) = {top:.4}, {elapsed:.2} s",
            rows.len(),
            pairs.len()
        ),
    )
}

fn deficit_scaling() -> Outcome {
    let spec = SweepSpec {
        n_values: (1..=100).collect(),
        gamma_values: vec![0.25, 0.5, 1.0, 2.0, 5.0],
        hopping: HOPPING,
        lead_temperature: 100.0,
        delta_mu: 0.1,
        mu0: 0.0,
    };
    let rows = sweep_ratio(&spec).map_err(err)?;
    let fits = deficit_fit(&rows, 20).map_err(err)?;
    let ok = fits.iter().all(|f| (f.intercept - 1.0).abs() <= 0.01 && f.r_squared >= 0.99);
    let detail = fits
        .iter()
        .map(|f| format!("g={}: b={:.4} R2={:.4}", f.gamma_over_t, f.intercept, f.r_squared))
        .collect::<Vec<_>>()
        .join(", ");
    check(ok, detail)
}

fn resistance_regimes() -> Outcome {
    let leads = Leads::symmetric(0.0, 1e-3, 100.0).map_err(err)?;
    let weak_g: Vec<f64> = (0..10).map(|k| 1e-3 + 1e-3 * k as f64).collect();
    let strong_g: Vec<f64> = (0..10).map(|k| 50.0 + 150.0 * k as f64 / 9.0).collect();
    let weak = resistance_scan(50, &weak_g, HOPPING, &leads, ResistanceRegime::WeakCoupling).map_err(err)?;
    let strong = resistance_scan(50, &strong_g, HOPPING, &leads, ResistanceRegime::StrongCoupling).map_err(err)?;
    let w = weak.normalized_coefficient.unwrap_or(f64::NAN);
    let s = strong.normalized_coefficient.unwrap_or(f64::NAN);
    let r0 = resistance(&WireModel::uniform(50, HOPPING, 1e-9 * HOPPING).map_err(err)?, &leads).map_err(err)?;
    check(
        (w / 0.25 - 1.0).abs() <= 0.05 && (s * 16.0 - 1.0).abs() <= 0.05 && (r0 - 1.0).abs() <= 1e-6,
        format!("weak slope/N = {w:.5}, strong quad/(N-1) = {s:.6} (1/16 = 0.0625), R(gamma->0) - 1 = {:.2e}", r0 - 1.0),
    )
}

fn sommerfeld_exact_oracle() -> Outcome {
    // The N = 1 discrepancy is fourth order in the bias, so the exact solve
    // must be converged well past the default tolerance to resolve it.
    let settings = ExactSettings {
        tolerance: 1e-13,
        quadrature: QuadratureSettings::default().with_abs_tol(1e-16),
        ..ExactSettings::default()
    };
    let mut lines = Vec::new();
    let mut ok = true;
    for n in [1, 2] {
        let model = WireModel::uniform(n, HOPPING, HOPPING).map_err(err)?;
        let mut d = Vec::new();
        for frac in [0.02, 0.01, 0.005] {
            let dmu = frac * HOPPING;
            let leads = Leads::symmetric(0.3 * HOPPING, dmu, 0.5 * dmu / K_B).map_err(err)?;
            let c = sommerfeld_exact_discrepancy(&model, &leads, &settings).map_err(err)?;
            d.push(c.mu_discrepancy);
        }
        let r1 = d[0] / d[1];
        let r2 = d[1] / d[2];
        ok &= d.iter().all(|&x| x > 0.0) && r1 >= 1.8 && r2 >= 1.8;
        lines.push(format!("N={n}: {:.3e} -> {:.3e} -> {:.3e} (x{r1:.3}, x{r2:.3})", d[0], d[1], d[2]));
    }
    check(ok, lines.join("; "))
}

fn profile_properties() -> Outcome {
    let leads = Leads::symmetric(0.0, 0.1, 100.0).map_err(err)?;
    let mut ok = true;
    let mut worst_sym = 0.0_f64;
    for g in [0.25, 0.5, 1.0, 2.0, 5.0] {
        let model = WireModel::uniform(30, HOPPING, g * HOPPING).map_err(err)?;
        let solution = solve_sommerfeld(&FloatingProblem::new(&model, &leads).map_err(err)?).map_err(err)?;
        let table = ProfileTable::from_solution(&solution, &leads);
        ok &= table.mu_strictly_monotone && table.single_interior_t_max && table.symmetry_defect <= 1e-9;
        worst_sym = worst_sym.max(table.symmetry_defect);
    }
    check(ok, format!("gamma/t in {{0.25..5}}: monotone mu, single T max, symmetry defect {worst_sym:.2e}"))
}

fn entropy_deficit_properties() -> Outcome {
    let leads = Leads::symmetric(0.0, 0.1, 100.0).map_err(err)?;
    let q = QuadratureSettings::default().with_abs_tol(1e-13);
    let mut medians = Vec::new();
    let mut min_delta = f64::INFINITY;
    let mut ends_ok = true;
    for g in [0.25, 5.0] {
        let model = WireModel::uniform(30, HOPPING, g * HOPPING).map_err(err)?;
        let solution = solve_floating_exact(&model, &leads, &ExactSettings::default()).map_err(err)?;
        let deltas: Vec<f64> = entropy_deficits(&model, &leads, &solution, &q)
            .map_err(err)?
            .iter()
            .map(|d| d.delta)
            .collect();
        min_delta = deltas.iter().copied().fold(min_delta, f64::min);
        let centre = deltas[14].max(deltas[15]);
        ends_ok &= deltas[0] > centre && deltas[29] > centre;
        let mut sorted = deltas.clone();
        sorted.sort_by(f64::total_cmp);
        medians.push(0.5 * (sorted[14] + sorted[15]));
    }
    let factor = medians[0] / medians[1];
    check(
        min_delta >= -1e-12 && ends_ok && factor >= 10.0,
        format!("min dS = {min_delta:.2e}, ends > centre {ends_ok}, median ratio 0.25/5 = {factor:.1}"),
    )
}

fn entropy_density_identity() -> Outcome {
    let q = QuadratureSettings::default().with_abs_tol(1e-18).with_rel_tol(1e-12);
    let mut worst = 0.0_f64;
    for t in [50.0, 100.0, 300.0] {
        let state = FermiState::new(0.0, t).map_err(err)?;
        let w = 60.0 * K_B * t;
        let (value, _) = integrate(|e| fermi_entropy_density(&state, e), -w, w, &[0.0], &q).map_err(err)?;
        let expected = PI * PI / 3.0 * K_B * K_B * t;
        worst = worst.max((value / expected - 1.0).abs());
    }
    check(worst <= 1e-8, format!("max rel error {worst:.2e} over T in {{50, 100, 300}} K"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("conservation suite", conservation_suite),
        ("single-probe oracle", single_probe_oracle),
        ("ratio trends and collapse", ratio_trends),
        ("1/N deficit fits", deficit_scaling),
        ("resistance regimes", resistance_regimes),
        ("Sommerfeld vs exact", sommerfeld_exact_oracle),
        ("profile properties", profile_properties),
        ("entropy deficit properties", entropy_deficit_properties),
        ("entropy density identity", entropy_density_identity),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}) [{secs:.1} s]: {detail}", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {} ({name}) [{secs:.1} s]: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
