//! Physical constants and unit conventions.
//!
//! Energies are in eV and temperatures in K. Currents are reported in
//! natural units with `h = 1`: a particle current is `(1/h) * [eV]`, so the
//! numbers returned by the library carry units of eV (particle), eV^2 (heat,
//! energy) and eV^2/K (entropy). Multiply by `1/h` to restore SI rates.

/// Boltzmann constant in eV/K.
pub const K_B: f64 = 8.617333262e-5;

/// Planck constant in eV s, for labelling outputs in SI rates.
pub const PLANCK_EV_S: f64 = 4.135667696e-15;

/// `pi^2 k_B^2 / 3`, the Sommerfeld coefficient that multiplies temperature
/// differences in entropy currents (eV^2/K^2).
pub fn sommerfeld_entropy_coefficient() -> f64 {
    std::f64::consts::PI.powi(2) * K_B * K_B / 3.0
}

/// Neumaier-compensated sum in iteration order.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
