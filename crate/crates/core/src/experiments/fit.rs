use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordinary least-squares polynomial fit `y = sum_k c_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFit {
    /// Coefficients in increasing power.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    pub n_points: usize,
}

impl PolynomialFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

pub fn least_squares(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolynomialFit> {
    let m = xs.len();
    if m != ys.len() {
        return Err(Error::InvalidInput("x and y lengths differ".into()));
    }
    if m < degree + 2 {
        return Err(Error::InsufficientData(format!(
            "degree-{degree} fit needs at least {} points, got {m}",
            degree + 2
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite data in fit".into()));
    }
    // Centre and scale x for conditioning, then map back.
    let mean = xs.iter().sum::<f64>() / m as f64;
    let scale = xs.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InsufficientData("all x values coincide".into()));
    }
    let design = DMatrix::from_fn(m, degree + 1, |i, k| ((xs[i] - mean) / scale).powi(k as i32));
    let y = DVector::from_column_slice(ys);
    let scaled = design
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::InsufficientData(e.to_string()))?;

    // Expand p((x - mean)/scale) into powers of x.
    let mut coefficients = vec![0.0; degree + 1];
    for (k, &a) in scaled.iter().enumerate() {
        let a = a / scale.powi(k as i32);
        // (x - mean)^k = sum_j C(k, j) x^j (-mean)^(k-j)
        let mut binom = 1.0;
        for j in 0..=k {
            coefficients[j] += a * binom * (-mean).powi((k - j) as i32);
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
    }

    let fitted = &design * &scaled;
    let y_mean = ys.iter().sum::<f64>() / m as f64;
    let ss_res: f64 = (0..m).map(|i| (ys[i] - fitted[i]).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    Ok(PolynomialFit { coefficients, r_squared, n_points: m })
}
