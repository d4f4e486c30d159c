//! Fixtures shared by the benchmarks.

use joulewire_core::{Leads, Result, WireModel};

/// Uniform chain with probes at `gamma_p = t`, biased by 0.1 eV at 100 K.
pub fn reference_chain(n_sites: usize) -> Result<(WireModel, Leads)> {
    let model = WireModel::uniform(n_sites, 2.7, 2.7)?;
    let leads = Leads::symmetric(0.0, 0.1, 100.0)?;
    Ok((model, leads))
}
