//! Parameter sweeps, fits and profile tables built on the solvers.

mod fit;
mod oracle;
mod profiles;
mod resistance;
mod sweep;

pub use fit::{least_squares, PolynomialFit};
pub use oracle::{sommerfeld_exact_discrepancy, OracleComparison};
pub use profiles::{
    distribution_snapshots, probe_entropy_shares, profiles, DistributionSnapshot, ProfileRow, ProfileTable,
    SNAPSHOT_POINTS,
};
pub use resistance::{resistance, resistance_scan, ResistanceFit, ResistanceRegime};
pub use sweep::{
    collapse_pairs, deficit_fit, monotone_in_n, ratio_point, sweep_ratio, CollapsePair, DeficitFit, RatioPoint,
    RatioRow, SweepSpec, CONSERVATION_LIMIT,
};
