//! Quantum-wire transport with floating thermoelectric probes: NEGF
//! transmissions, probe floating conditions and entropy bookkeeping.

pub mod entropy;
pub mod error;
pub mod experiments;
pub mod negf;
pub mod probes;
pub mod quadrature;
pub mod units;

pub use entropy::{
    entropy_deficit, entropy_deficits, fermi, joule_report, joule_report_exact, single_probe_analytic,
    terminal_currents, EntropyDeficit, EntropyReport, EvaluationMode, FermiState, SingleProbeAnalytic,
    TerminalCurrents,
};
pub use error::{Error, Result};
pub use negf::{transmission_at, TransmissionMatrix, TransmissionSource, WireModel};
pub use probes::{
    solve_floating_exact, solve_sommerfeld, ExactSettings, FloatingProblem, Leads, ProbeSolution, SolveMethod,
};
pub use quadrature::QuadratureSettings;
pub use units::K_B;
