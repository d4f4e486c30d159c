//! Single-particle model of the wire and its Green's functions.
//!
//! The wire is an `N`-site nearest-neighbour chain. Site 1 couples to a
//! semi-infinite source lead and site `N` to a semi-infinite drain lead, both
//! with the wire's own hopping `t`. Every site `n` additionally couples to a
//! wide-band probe reservoir `P_n` with energy-independent broadening
//! `gamma_p`.
//!
//! Terminal order is fixed throughout the crate: index 0 is the source,
//! index 1 the drain and index `1 + n` the probe on site `n` (1-based), so a
//! model with `N` sites has `N + 2` terminals.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::entropy::{fermi, FermiState};
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Index of the source lead in terminal-ordered arrays.
pub const SOURCE: usize = 0;
/// Index of the drain lead in terminal-ordered arrays.
pub const DRAIN: usize = 1;

/// Terminal index of the probe attached to `site` (1-based).
pub fn probe_index(site: usize) -> usize {
    site + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct WireModel {
    n_sites: usize,
    hopping: f64,
    onsite: Vec<f64>,
    probe_coupling: f64,
    band_center: f64,
}

impl WireModel {
    /// Builds a chain, checking that every on-site energy sits strictly
    /// inside the lead band `band_center +/- 2 hopping`.
    pub fn new(
        n_sites: usize,
        hopping: f64,
        onsite: Vec<f64>,
        probe_coupling: f64,
        band_center: f64,
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidModel("n_sites must be at least 1".into()));
        }
        if !(hopping.is_finite() && hopping > 0.0) {
            return Err(Error::InvalidModel(format!("hopping must be positive, got {hopping}")));
        }
        if !(probe_coupling.is_finite() && probe_coupling >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "probe coupling must be non-negative, got {probe_coupling}"
            )));
        }
        if !band_center.is_finite() {
            return Err(Error::InvalidModel("band centre must be finite".into()));
        }
        if onsite.len() != n_sites {
            return Err(Error::InvalidModel(format!(
                "expected {n_sites} on-site energies, got {}",
                onsite.len()
            )));
        }
        for (i, e) in onsite.iter().enumerate() {
            if !e.is_finite() || (e - band_center).abs() >= 2.0 * hopping {
                return Err(Error::InvalidModel(format!(
                    "on-site energy {e} of site {} lies outside the lead band",
                    i + 1
                )));
            }
        }
        Ok(Self { n_sites, hopping, onsite, probe_coupling, band_center })
    }

    /// Uniform chain at the band centre (all on-site energies zero).
    pub fn uniform(n_sites: usize, hopping: f64, probe_coupling: f64) -> Result<Self> {
        Self::new(n_sites, hopping, vec![0.0; n_sites], probe_coupling, 0.0)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn hopping(&self) -> f64 {
        self.hopping
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn probe_coupling(&self) -> f64 {
        self.probe_coupling
    }

    pub fn band_center(&self) -> f64 {
        self.band_center
    }

    pub fn n_terminals(&self) -> usize {
        self.n_sites + 2
    }

    /// Open interval of energies where the leads carry propagating states.
    pub fn lead_band(&self) -> (f64, f64) {
        (self.band_center - 2.0 * self.hopping, self.band_center + 2.0 * self.hopping)
    }

    pub fn hamiltonian(&self) -> DMatrix<Complex64> {
        let n = self.n_sites;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(self.onsite[i], 0.0)
            } else if i.abs_diff(j) == 1 {
                Complex64::new(self.hopping, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Lead self-energy `t^2 g_s(e)` on an end site.
    pub fn lead_self_energy(&self, energy: f64) -> Result<Complex64> {
        let g = surface_green(energy - self.band_center, self.hopping)?;
        Ok(g * self.hopping * self.hopping)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalKind {
    Source,
    Drain,
    /// Probe attached to the given 1-based site.
    Probe(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terminal {
    pub id: usize,
    pub kind: TerminalKind,
    pub mu: f64,
    pub temperature: f64,
}

impl Terminal {
    pub fn state(&self) -> FermiState {
        FermiState { mu: self.mu, temperature: self.temperature }
    }

    pub fn occupation(&self, energy: f64) -> f64 {
        fermi(energy, self.mu, self.temperature)
    }
}

/// Builds the canonical terminal list: source, drain, then one probe per
/// site with the given states.
pub fn terminal_set(source: FermiState, drain: FermiState, probes: &[FermiState]) -> Vec<Terminal> {
    let mut out = Vec::with_capacity(probes.len() + 2);
    out.push(Terminal { id: SOURCE, kind: TerminalKind::Source, mu: source.mu, temperature: source.temperature });
    out.push(Terminal { id: DRAIN, kind: TerminalKind::Drain, mu: drain.mu, temperature: drain.temperature });
    for (k, p) in probes.iter().enumerate() {
        out.push(Terminal {
            id: probe_index(k + 1),
            kind: TerminalKind::Probe(k + 1),
            mu: p.mu,
            temperature: p.temperature,
        });
    }
    out
}

/// Checks that `terminals` is the canonical set for `model`.
pub fn validate_terminals(model: &WireModel, terminals: &[Terminal]) -> Result<()> {
    if terminals.len() != model.n_terminals() {
        return Err(Error::InvalidTerminals(format!(
            "expected {} terminals (source, drain, {} probes), got {}",
            model.n_terminals(),
            model.n_sites(),
            terminals.len()
        )));
    }
    for (idx, term) in terminals.iter().enumerate() {
        let expected = match idx {
            SOURCE => TerminalKind::Source,
            DRAIN => TerminalKind::Drain,
            k => TerminalKind::Probe(k - 1),
        };
        if term.kind != expected || term.id != idx {
            return Err(Error::InvalidTerminals(format!(
                "terminal at position {idx} is {:?} with id {}, expected {expected:?} with id {idx}",
                term.kind, term.id
            )));
        }
        if !(term.temperature.is_finite() && term.temperature > 0.0) || !term.mu.is_finite() {
            return Err(Error::InvalidTerminals(format!(
                "terminal {idx} has invalid state mu = {}, T = {}",
                term.mu, term.temperature
            )));
        }
    }
    Ok(())
}

/// Retarded surface Green's function of a semi-infinite nearest-neighbour
/// chain with hopping `hopping`, at `energy` measured from the chain's band
/// centre. Only the propagating window `|energy| < 2 hopping` is supported.
pub fn surface_green(energy: f64, hopping: f64) -> Result<Complex64> {
    let half_width = 2.0 * hopping;
    if !(energy.is_finite() && energy.abs() < half_width) {
        return Err(Error::OutOfBand { energy, half_width });
    }
    let root = (half_width * half_width - energy * energy).sqrt();
    Ok(Complex64::new(energy, -root) / (2.0 * hopping * hopping))
}

/// Rank-one broadening matrix `width * |site><site|` (0-based site).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Broadening {
    pub site: usize,
    pub width: f64,
}

impl Broadening {
    pub fn to_dense(&self, n: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(n, n);
        m[(self.site, self.site)] = Complex64::new(self.width, 0.0);
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfEnergy {
    pub sigma: DMatrix<Complex64>,
    /// Terminal-ordered broadenings.
    pub gammas: Vec<Broadening>,
}

pub fn build_self_energy(model: &WireModel, energy: f64) -> Result<SelfEnergy> {
    let n = model.n_sites();
    let lead = model.lead_self_energy(energy)?;
    let lead_width = -2.0 * lead.im;
    let probe = Complex64::new(0.0, -0.5 * model.probe_coupling());

    let mut sigma = DMatrix::from_diagonal_element(n, n, probe);
    sigma[(0, 0)] += lead;
    sigma[(n - 1, n - 1)] += lead;

    let mut gammas = Vec::with_capacity(n + 2);
    gammas.push(Broadening { site: 0, width: lead_width });
    gammas.push(Broadening { site: n - 1, width: lead_width });
    gammas.extend((0..n).map(|s| Broadening { site: s, width: model.probe_coupling() }));
    Ok(SelfEnergy { sigma, gammas })
}

/// `G^R(e) = (e - H - Sigma^R)^-1` together with the self-energy used.
pub fn retarded_greens(model: &WireModel, energy: f64) -> Result<(DMatrix<Complex64>, SelfEnergy)> {
    let se = build_self_energy(model, energy)?;
    let n = model.n_sites();
    let mut a = -model.hamiltonian() - &se.sigma;
    for i in 0..n {
        a[(i, i)] += energy;
    }
    let g = a.lu().try_inverse().ok_or_else(|| Error::SingularMatrix {
        energy,
        detail: format!("e - H - Sigma is singular for a {n}-site wire"),
    })?;
    Ok((g, se))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreensBundle {
    pub energy: f64,
    pub g_retarded: DMatrix<Complex64>,
    pub g_advanced: DMatrix<Complex64>,
    pub g_lesser: DMatrix<Complex64>,
    pub spectral: DMatrix<Complex64>,
}

impl GreensBundle {
    /// Local density of states `g_n(e) = <n|A|n>` (0-based site).
    pub fn local_spectrum(&self, site: usize) -> f64 {
        self.spectral[(site, site)].re
    }
}

/// Retarded, advanced, lesser and spectral functions at one energy, with the
/// lesser self-energy `i sum_a Gamma^a f_a` built from the terminal states.
pub fn greens_at(model: &WireModel, terminals: &[Terminal], energy: f64) -> Result<(GreensBundle, Vec<Broadening>)> {
    validate_terminals(model, terminals)?;
    let (g_r, se) = retarded_greens(model, energy)?;
    let g_a = g_r.adjoint();
    let spectral = (&g_r - &g_a) * Complex64::new(0.0, 0.5 / PI);

    // G^< = G^R Sigma^< G^A with a diagonal Sigma^<.
    let n = model.n_sites();
    let mut sigma_lesser = vec![Complex64::new(0.0, 0.0); n];
    for (gamma, term) in se.gammas.iter().zip(terminals) {
        sigma_lesser[gamma.site] += I * gamma.width * term.occupation(energy);
    }
    let mut left = g_r.clone();
    for (j, s) in sigma_lesser.iter().enumerate() {
        for i in 0..n {
            left[(i, j)] *= *s;
        }
    }
    let g_lesser = left * &g_a;

    Ok((GreensBundle { energy, g_retarded: g_r, g_advanced: g_a, g_lesser, spectral }, se.gammas))
}

/// Multi-terminal transmission matrix at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMatrix {
    pub energy: f64,
    /// `t_matrix[(a, b)] = T_ab`; diagonal stored as zero.
    pub t_matrix: DMatrix<f64>,
    pub gamma_list: Vec<Broadening>,
}

impl TransmissionMatrix {
    pub fn n_terminals(&self) -> usize {
        self.t_matrix.nrows()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.t_matrix[(a, b)]
    }

    /// `sum_{b != a} T_ab`.
    pub fn row_sum(&self, a: usize) -> f64 {
        self.t_matrix.row(a).iter().sum()
    }

    pub fn column_sum(&self, a: usize) -> f64 {
        self.t_matrix.column(a).iter().sum()
    }

    /// `max_ab |T_ab - T_ba| / max(1, T_ab)`.
    pub fn reciprocity_defect(&self) -> f64 {
        let m = self.n_terminals();
        let mut worst = 0.0_f64;
        for a in 0..m {
            for b in 0..m {
                let t = self.get(a, b);
                worst = worst.max((t - self.get(b, a)).abs() / t.abs().max(1.0));
            }
        }
        worst
    }

    /// `max_a |row_sum(a) - column_sum(a)|`.
    pub fn sum_rule_defect(&self) -> f64 {
        (0..self.n_terminals())
            .map(|a| (self.row_sum(a) - self.column_sum(a)).abs())
            .fold(0.0, f64::max)
    }
}

/// `T_ab = Tr[Gamma^a G^R Gamma^b G^A]`, evaluated through the rank-one
/// structure of the broadenings: `w_a w_b |G^R_{i_a i_b}|^2`.
pub fn transmission_from_retarded(
    energy: f64,
    g_retarded: &DMatrix<Complex64>,
    gammas: &[Broadening],
) -> TransmissionMatrix {
    let m = gammas.len();
    let t_matrix = DMatrix::from_fn(m, m, |a, b| {
        if a == b {
            0.0
        } else {
            let (ga, gb) = (gammas[a], gammas[b]);
            ga.width * gb.width * g_retarded[(ga.site, gb.site)].norm_sqr()
        }
    });
    TransmissionMatrix { energy, t_matrix, gamma_list: gammas.to_vec() }
}

pub fn transmission(bundle: &GreensBundle, gammas: &[Broadening]) -> TransmissionMatrix {
    transmission_from_retarded(bundle.energy, &bundle.g_retarded, gammas)
}

/// Transmission matrix of `model` at `energy`, skipping the lesser function.
pub fn transmission_at(model: &WireModel, energy: f64) -> Result<TransmissionMatrix> {
    let (g, se) = retarded_greens(model, energy)?;
    Ok(transmission_from_retarded(energy, &g, &se.gammas))
}

/// Local non-equilibrium distribution sampled by the probe on `site`
/// (1-based): `Tr{Gamma^P G^<} / (2 pi i Tr{Gamma^P A})`. For a rank-one
/// probe coupling this reduces to `G^<_nn / (2 pi i A_nn)`.
pub fn local_distribution(bundle: &GreensBundle, site: usize) -> Result<f64> {
    let n = bundle.spectral.nrows();
    if site == 0 || site > n {
        return Err(Error::InvalidInput(format!("site {site} outside 1..={n}")));
    }
    let s = site - 1;
    let weight = bundle.spectral[(s, s)].re;
    if !(weight > f64::MIN_POSITIVE) {
        return Err(Error::UndefinedDistribution { site, energy: bundle.energy });
    }
    let f = (bundle.g_lesser[(s, s)] / (2.0 * PI * I * weight)).re;
    Ok(f.clamp(0.0, 1.0))
}

/// Anything that can hand out a transmission matrix at a given energy.
pub trait TransmissionSource: Sync {
    fn n_terminals(&self) -> usize;

    fn transmission_at(&self, energy: f64) -> Result<TransmissionMatrix>;

    /// Energy range where the source is defined, if limited.
    fn support(&self) -> Option<(f64, f64)>;
}

impl TransmissionSource for WireModel {
    fn n_terminals(&self) -> usize {
        WireModel::n_terminals(self)
    }

    fn transmission_at(&self, energy: f64) -> Result<TransmissionMatrix> {
        transmission_at(self, energy)
    }

    fn support(&self) -> Option<(f64, f64)> {
        let (lo, hi) = self.lead_band();
        // Stay off the band edges, where the lead broadening closes.
        let pad = 1e-9 * self.hopping;
        Some((lo + pad, hi - pad))
    }
}

/// Energy-independent transmissions, e.g. a matrix frozen at `mu_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantTransmission(pub TransmissionMatrix);

impl TransmissionSource for ConstantTransmission {
    fn n_terminals(&self) -> usize {
        self.0.n_terminals()
    }

    fn transmission_at(&self, energy: f64) -> Result<TransmissionMatrix> {
        let mut t = self.0.clone();
        t.energy = energy;
        Ok(t)
    }

    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eq_terminals(model: &WireModel, mu: f64, temp: f64) -> Vec<Terminal> {
        let s = FermiState { mu, temperature: temp };
        terminal_set(s, s, &vec![s; model.n_sites()])
    }

    #[test]
    fn surface_green_band_centre() {
        let t = 2.7;
        let g = surface_green(0.0, t).unwrap();
        assert_relative_eq!(g.re, 0.0);
        assert_relative_eq!(g.im, -1.0 / t, max_relative = 1e-15);
        // Lead broadening at the band centre is 2t.
        let gamma = -2.0 * (g * t * t).im;
        assert_relative_eq!(gamma, 2.0 * t, max_relative = 1e-15);
    }

    #[test]
    fn surface_green_self_consistent_in_band() {
        let t = 1.3;
        for k in 0..=200 {
            let e = -2.0 * t + 4.0 * t * (k as f64 + 0.5) / 201.0;
            let g = surface_green(e, t).unwrap();
            assert!(g.im < 0.0);
            let rhs = 1.0 / (Complex64::new(e, 0.0) - g * t * t);
            assert!((g - rhs).norm() <= 1e-12 * g.norm());
        }
    }

    #[test]
    fn surface_green_closes_at_band_edge() {
        let t = 1.0;
        let w = |e: f64| -2.0 * (surface_green(e, t).unwrap() * t * t).im;
        assert!(w(1.999_999) < 1e-2);
        assert!(w(1.999_999) < w(1.99) && w(1.99) < w(1.9));
        assert!(matches!(surface_green(2.0, t), Err(Error::OutOfBand { .. })));
        assert!(matches!(surface_green(-2.5, t), Err(Error::OutOfBand { .. })));
    }

    #[test]
    fn model_validation() {
        assert!(WireModel::uniform(0, 1.0, 0.1).is_err());
        assert!(WireModel::uniform(3, 0.0, 0.1).is_err());
        assert!(WireModel::uniform(3, 1.0, -0.1).is_err());
        assert!(WireModel::new(2, 1.0, vec![0.0, 2.0], 0.1, 0.0).is_err());
        assert!(WireModel::new(2, 1.0, vec![0.0], 0.1, 0.0).is_err());
        assert!(WireModel::new(2, 1.0, vec![0.0, 1.9], 0.1, 0.0).is_ok());
    }

    #[test]
    fn self_energy_single_site() {
        let (t, gp) = (2.0, 0.7);
        let m = WireModel::uniform(1, t, gp).unwrap();
        let se = build_self_energy(&m, 0.0).unwrap();
        let gamma_bar = 0.5 * se.gammas.iter().map(|g| g.width).sum::<f64>();
        assert_relative_eq!(gamma_bar, 2.0 * t + gp / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn self_energy_three_sites() {
        let (t, gp) = (1.0, 0.4);
        let m = WireModel::uniform(3, t, gp).unwrap();
        let se = build_self_energy(&m, 0.0).unwrap();
        let expect = [-t - gp / 2.0, -gp / 2.0, -t - gp / 2.0];
        for i in 0..3 {
            assert_relative_eq!(se.sigma[(i, i)].im, expect[i], max_relative = 1e-14);
            assert!(se.sigma[(i, i)].re.abs() < 1e-15);
        }
        assert_eq!(se.sigma[(0, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn decoupled_probes_have_zero_broadening() {
        let m = WireModel::uniform(4, 1.0, 0.0).unwrap();
        let se = build_self_energy(&m, 0.3).unwrap();
        assert!(se.gammas[2..].iter().all(|g| g.width == 0.0));
        assert!(se.gammas[2..].iter().all(|g| g.to_dense(4).iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn single_site_retarded_is_inverse_broadening() {
        let (t, gp) = (1.5, 0.9);
        let m = WireModel::uniform(1, t, gp).unwrap();
        let (g, _) = retarded_greens(&m, 0.0).unwrap();
        let gamma_bar = 2.0 * t + gp / 2.0;
        assert_relative_eq!(g[(0, 0)].norm(), 1.0 / gamma_bar, max_relative = 1e-14);
    }

    #[test]
    fn clean_chain_transmits_perfectly_at_band_centre() {
        for n in [1, 2, 5, 12] {
            let m = WireModel::uniform(n, 2.7, 0.0).unwrap();
            let tm = transmission_at(&m, 0.0).unwrap();
            assert_relative_eq!(tm.get(SOURCE, DRAIN), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn lorentzian_closed_forms() {
        let t = 2.7;
        for ratio in [0.1, 1.0, 10.0] {
            let gp = ratio * t;
            let m = WireModel::uniform(1, t, gp).unwrap();
            let tm = transmission_at(&m, 0.0).unwrap();
            let gb = 2.0 * t + gp / 2.0;
            assert_relative_eq!(tm.get(0, 1), 4.0 * t * t / (gb * gb), max_relative = 1e-12);
            assert_relative_eq!(tm.get(0, 2), 2.0 * t * gp / (gb * gb), max_relative = 1e-12);
            assert_relative_eq!(tm.get(2, 1), 2.0 * t * gp / (gb * gb), max_relative = 1e-12);
        }
    }

    #[test]
    fn rank_one_trace_matches_dense_trace() {
        let m = WireModel::new(4, 1.0, vec![0.1, -0.2, 0.0, 0.3], 0.6, 0.0).unwrap();
        let terms = eq_terminals(&m, 0.0, 300.0);
        let (bundle, gammas) = greens_at(&m, &terms, 0.37).unwrap();
        let tm = transmission(&bundle, &gammas);
        for a in 0..gammas.len() {
            for b in 0..gammas.len() {
                if a == b {
                    continue;
                }
                let ga = gammas[a].to_dense(4);
                let gb = gammas[b].to_dense(4);
                let tr = (&ga * &bundle.g_retarded * &gb * &bundle.g_advanced).trace();
                assert!((tr.re - tm.get(a, b)).abs() < 1e-14 && tr.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn bundle_invariants() {
        let m = WireModel::new(5, 1.0, vec![0.0, 0.2, -0.1, 0.0, 0.05], 0.3, 0.0).unwrap();
        let s1 = FermiState { mu: 0.05, temperature: 200.0 };
        let s2 = FermiState { mu: -0.05, temperature: 250.0 };
        let probes: Vec<_> = (0..5)
            .map(|k| FermiState { mu: 0.01 * k as f64 - 0.02, temperature: 300.0 + 10.0 * k as f64 })
            .collect();
        let terms = terminal_set(s1, s2, &probes);
        let (b, _) = greens_at(&m, &terms, 0.02).unwrap();
        assert!((&b.g_advanced - b.g_retarded.adjoint()).norm() < 1e-15);
        assert!((&b.spectral - b.spectral.adjoint()).norm() < 1e-14);
        assert!((&b.g_lesser + b.g_lesser.adjoint()).norm() < 1e-14);
        let eig = b.spectral.clone().symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l >= -1e-12 * b.spectral.norm()));
        for s in 1..=5 {
            let f = local_distribution(&b, s).unwrap();
            assert!((0.0..=1.0).contains(&f));
            let occ = (b.g_lesser[(s - 1, s - 1)] / (2.0 * PI * I)).re;
            assert!(occ >= 0.0 && occ <= b.local_spectrum(s - 1) + 1e-15);
        }
    }

    #[test]
    fn equilibrium_fluctuation_dissipation() {
        let m = WireModel::uniform(6, 1.0, 0.5).unwrap();
        let (mu, temp) = (0.1, 400.0);
        let terms = eq_terminals(&m, mu, temp);
        for k in 0..101 {
            let e = -1.9 + 3.8 * k as f64 / 100.0;
            let (b, _) = greens_at(&m, &terms, e).unwrap();
            let f = fermi(e, mu, temp);
            let expect = &b.spectral * Complex64::new(0.0, 2.0 * PI * f);
            assert!((&b.g_lesser - expect).norm() <= 1e-10 * b.g_lesser.norm().max(1e-300));
            for s in 1..=6 {
                assert!((local_distribution(&b, s).unwrap() - f).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn local_distribution_half_at_chemical_potential() {
        let m = WireModel::uniform(3, 1.0, 0.2).unwrap();
        let terms = eq_terminals(&m, 0.3, 150.0);
        let (b, _) = greens_at(&m, &terms, 0.3).unwrap();
        for s in 1..=3 {
            assert!((local_distribution(&b, s).unwrap() - 0.5).abs() < 1e-13);
        }
        assert!(local_distribution(&b, 0).is_err());
        assert!(local_distribution(&b, 4).is_err());
    }

    #[test]
    fn terminal_validation() {
        let m = WireModel::uniform(2, 1.0, 0.1).unwrap();
        let s = FermiState { mu: 0.0, temperature: 100.0 };
        let mut terms = terminal_set(s, s, &[s, s]);
        assert!(validate_terminals(&m, &terms).is_ok());
        terms.swap(0, 1);
        assert!(validate_terminals(&m, &terms).is_err());
        let terms = terminal_set(s, s, &[s]);
        assert!(validate_terminals(&m, &terms).is_err());
        let bad = FermiState { mu: 0.0, temperature: 0.0 };
        let terms = terminal_set(s, bad, &[s, s]);
        assert!(validate_terminals(&m, &terms).is_err());
    }
}
