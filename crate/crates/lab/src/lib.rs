//! Scenario files, runs, sweeps and the `hartree-lab` command line.
//!
//! A scenario ([`Scenario`]) is parsed from TOML, run by [`run_scenario`], and
//! leaves a trajectory CSV plus a JSON report in its output directory. [`sweep`]
//! repeats a scenario over one parameter axis in parallel.

pub mod error;
pub mod run;
pub mod scenario;
pub mod sweep;

pub use error::LabError;
pub use run::{run_scenario, RunOptions, RunReport};
pub use scenario::{load_scenario, parse_potential, parse_scenario, Scenario};
pub use sweep::{sweep, Axis, SweepReport};
