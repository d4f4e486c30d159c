//! Globally adaptive Gauss-Kronrod (7, 15) quadrature for vector-valued
//! integrands.
//!
//! Every component of the integrand is sampled on the same nodes. Linear
//! identities that hold pointwise between components (antisymmetric sums of
//! currents, for instance) therefore survive integration to rounding, no
//! matter how coarse the final subdivision is.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and integration-window policy shared by every energy integral
/// in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Absolute tolerance applied to every component.
    pub abs_tol: f64,
    /// Relative tolerance; a component is converged when its error is below
    /// `max(abs_tol, rel_tol * |value|)`.
    pub rel_tol: f64,
    /// Upper bound on the number of subintervals.
    pub max_subdivisions: usize,
    /// Half-width of the window beyond the extreme chemical potentials, in
    /// units of `k_B T_max`.
    pub thermal_window: f64,
    /// Minimum half-width of the window around the mean potential, in units
    /// of the bias.
    pub bias_window: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 0.0,
            max_subdivisions: 4000,
            thermal_window: 40.0,
            bias_window: 6.0,
        }
    }
}

impl QuadratureSettings {
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.abs_tol.is_finite()
            && self.abs_tol >= 0.0
            && self.rel_tol.is_finite()
            && self.rel_tol >= 0.0
            && (self.abs_tol > 0.0 || self.rel_tol > 0.0)
            && self.max_subdivisions > 0
            && self.thermal_window > 0.0
            && self.bias_window >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad quadrature settings {self:?}")))
        }
    }

    /// Integration window `[lo, hi]` that covers the Fermi windows of all
    /// the given `(mu, T)` pairs, optionally clipped to `clip`.
    pub fn energy_window(&self, states: &[(f64, f64)], clip: Option<(f64, f64)>) -> (f64, f64) {
        let mu_min = states.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let mu_max = states.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        let t_max = states.iter().map(|s| s.1).fold(0.0, f64::max);
        let kt = crate::units::K_B * t_max;
        let centre = 0.5 * (mu_min + mu_max);
        let bias_half = self.bias_window * (mu_max - mu_min);
        let mut lo = (mu_min - self.thermal_window * kt).min(centre - bias_half);
        let mut hi = (mu_max + self.thermal_window * kt).max(centre + bias_half);
        if let Some((a, b)) = clip {
            lo = lo.max(a);
            hi = hi.min(b);
        }
        (lo, hi)
    }
}

/// Result of a vector integration.
#[derive(Debug, Clone, PartialEq)]
pub struct VecIntegral {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evaluations: usize,
    pub subintervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    score: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest score first; ties go to the leftmost interval.
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One Gauss-Kronrod (7, 15) panel. `scratch` holds 15 * dim samples.
fn gk15<F>(
    f: &mut F,
    a: f64,
    b: f64,
    dim: usize,
    scratch: &mut [f64],
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // Sample layout: slot 0 = centre, slots 1..=7 = left nodes, 8..=14 = right.
    let (left, right) = scratch.split_at_mut(8 * dim);
    f(centre, &mut left[0..dim])?;
    for j in 0..7 {
        let dx = half * XGK[j];
        f(centre - dx, &mut left[(1 + j) * dim..(2 + j) * dim])?;
        f(centre + dx, &mut right[j * dim..(j + 1) * dim])?;
    }

    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for k in 0..dim {
        let fc = scratch[k];
        let mut res_k = fc * WGK[7];
        let mut res_g = fc * WG[3];
        let mut res_abs = res_k.abs();
        for j in 0..7 {
            let fl = scratch[(1 + j) * dim + k];
            let fr = scratch[(8 + j) * dim + k];
            res_k += WGK[j] * (fl + fr);
            res_abs += WGK[j] * (fl.abs() + fr.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (fl + fr);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            let fl = scratch[(1 + j) * dim + k];
            let fr = scratch[(8 + j) * dim + k];
            res_asc += WGK[j] * ((fl - mean).abs() + (fr - mean).abs());
        }
        let abs_half = half.abs();
        values[k] = res_k * half;
        errors[k] = rescale_error((res_k - res_g) * half, res_abs * abs_half, res_asc * abs_half);
    }
    Ok((values, errors))
}

/// Integrates a `dim`-component integrand over `[a, b]`.
///
/// `breakpoints` strictly inside `(a, b)` seed the initial partition; put
/// them where the integrand has structure (chemical potentials, say).
pub fn integrate_vec<F>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    settings: &QuadratureSettings,
) -> Result<VecIntegral>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    settings.validate()?;
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Quadrature(format!("bad interval [{a}, {b}]")));
    }
    if dim == 0 || a == b {
        return Ok(VecIntegral {
            values: vec![0.0; dim],
            errors: vec![0.0; dim],
            evaluations: 0,
            subintervals: 0,
        });
    }

    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && x.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut scratch = vec![0.0; 15 * dim];
    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    let mut total_err = vec![0.0; dim];
    let mut total_val = vec![0.0; dim];

    let tol_of = |val: f64| settings.abs_tol.max(settings.rel_tol * val.abs());
    let score_of = |errors: &[f64], values: &[f64]| {
        errors
            .iter()
            .zip(values)
            .map(|(e, v)| e / tol_of(*v).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };

    for w in edges.windows(2) {
        let (values, errors) = gk15(&mut f, w[0], w[1], dim, &mut scratch)?;
        evaluations += 15;
        for k in 0..dim {
            total_err[k] += errors[k];
            total_val[k] += values[k];
        }
        let score = score_of(&errors, &values);
        heap.push(Segment { a: w[0], b: w[1], values, errors, score });
    }

    let converged = |err: &[f64], val: &[f64]| err.iter().zip(val).all(|(e, v)| *e <= tol_of(*v));

    loop {
        if converged(&total_err, &total_val) {
            // Re-accumulate from scratch before trusting the running totals.
            let mut err = vec![0.0; dim];
            let mut val = vec![0.0; dim];
            for s in heap.iter() {
                for k in 0..dim {
                    err[k] += s.errors[k];
                    val[k] += s.values[k];
                }
            }
            total_err = err;
            total_val = val;
            if converged(&total_err, &total_val) {
                break;
            }
        }
        if heap.len() >= settings.max_subdivisions {
            let worst = total_err
                .iter()
                .zip(&total_val)
                .map(|(e, v)| e / tol_of(*v))
                .fold(0.0, f64::max);
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {} subintervals (error/tolerance = {worst:.3e})",
                heap.len()
            )));
        }
        let seg = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Quadrature(format!(
                "interval around {mid} cannot be subdivided further"
            )));
        }
        let (lv, le) = gk15(&mut f, seg.a, mid, dim, &mut scratch)?;
        let (rv, re) = gk15(&mut f, mid, seg.b, dim, &mut scratch)?;
        evaluations += 30;
        for k in 0..dim {
            total_err[k] += le[k] + re[k] - seg.errors[k];
            total_val[k] += lv[k] + rv[k] - seg.values[k];
        }
        let ls = score_of(&le, &lv);
        let rs = score_of(&re, &rv);
        heap.push(Segment { a: seg.a, b: mid, values: lv, errors: le, score: ls });
        heap.push(Segment { a: mid, b: seg.b, values: rv, errors: re, score: rs });
    }

    // Deterministic left-to-right accumulation of the final partition.
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let subintervals = segments.len();
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for k in 0..dim {
        values[k] = crate::units::compensated_sum(segments.iter().map(|s| s.values[k]));
        errors[k] = segments.iter().map(|s| s.errors[k]).sum();
    }
    Ok(VecIntegral { values, errors, evaluations, subintervals })
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    settings: &QuadratureSettings,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(
        |x, out| {
            out[0] = f(x);
            Ok(())
        },
        1,
        a,
        b,
        breakpoints,
        settings,
    )?;
    Ok((r.values[0], r.errors[0]))
}
