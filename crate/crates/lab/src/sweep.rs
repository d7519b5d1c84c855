//! Parameter sweeps: one independent run per value, in parallel.

use std::fmt::Write as _;
use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hartree_core::io::fmt_f64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::LabError;
use crate::run::{run_scenario, RunOptions, RunReport};
use crate::scenario::{InitialData, Scenario, WeightChoice};

pub const SWEEP_FORMAT: &str = "hartree-sweep/1";
/// Environment variable capping the number of concurrent runs.
pub const THREADS_ENV: &str = "HARTREE_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Initial scaling `c` of `c·Q`.
    C,
    P,
    Gamma,
    /// Diagnostic radius (also the truncated-weight and monitor radius).
    #[value(name = "R")]
    #[serde(rename = "R")]
    R,
    Dt,
    N,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::C => "c",
            Axis::P => "p",
            Axis::Gamma => "gamma",
            Axis::R => "R",
            Axis::Dt => "dt",
            Axis::N => "n",
        }
    }

    /// `template` with this axis set to `value`, revalidated.
    pub fn apply(self, template: &Scenario, value: f64) -> Result<Scenario, LabError> {
        let mut s = template.clone();
        match self {
            Axis::C => match &mut s.initial {
                InitialData::ScaledGroundState { c } => *c = value,
                _ => return Err(LabError::Semantic("sweeping c needs initial kind = \"scaled-ground-state\"".into())),
            },
            Axis::P => s.model.p = value,
            Axis::Gamma => s.model.gamma = value,
            Axis::R => {
                let old = s.diagnostics.radii[0];
                s.diagnostics.radii[0] = value;
                if let WeightChoice::Truncated { radius, .. } = &mut s.diagnostics.weight {
                    *radius = value;
                }
                for r in [
                    s.diagnostics.monitor.as_mut().map(|m| &mut m.radius),
                    s.diagnostics.average.as_mut().map(|a| &mut a.radius),
                ]
                .into_iter()
                .flatten()
                {
                    if *r == old {
                        *r = value;
                    }
                }
            }
            Axis::Dt => s.evolve.dt = value,
            Axis::N => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(LabError::Semantic(format!("n must be a positive integer (got {value})")));
                }
                s.grid.n = value as usize;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

impl FromStr for Axis {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "c" => Ok(Axis::C),
            "p" => Ok(Axis::P),
            "gamma" => Ok(Axis::Gamma),
            "R" => Ok(Axis::R),
            "dt" => Ok(Axis::Dt),
            "n" => Ok(Axis::N),
            other => Err(LabError::Semantic(format!("unknown sweep axis {other:?} (use c, p, gamma, R, dt or n)"))),
        }
    }
}

/// One line of the aggregated sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub dir: PathBuf,
    /// `"pass"`, `"fail"` or `"error"`.
    pub status: &'static str,
    /// `P(u₀)M(u₀)^{σ_c}/(P(Q)M(Q)^{σ_c})`.
    pub threshold_ratio: Option<f64>,
    pub mass_drift: Option<f64>,
    pub energy_drift: Option<f64>,
    pub energy_drift_full_run: Option<f64>,
    /// Localized mass at the end over its initial value.
    pub monitor_ratio: Option<f64>,
    pub failures: Vec<String>,
}

impl SweepRow {
    fn from_report(value: f64, dir: PathBuf, r: &RunReport) -> Self {
        Self {
            value,
            dir,
            status: if r.all_pass { "pass" } else { "fail" },
            threshold_ratio: r.thresholds.as_ref().map(|t| t.initial_ratio),
            mass_drift: r.conservation.as_ref().map(|c| c.mass_drift),
            energy_drift: r.conservation.as_ref().map(|c| c.energy_drift),
            energy_drift_full_run: r.conservation.as_ref().map(|c| c.energy_drift_full_run),
            monitor_ratio: r.monitor.map(|m| m.last / m.initial),
            failures: r.failures.clone(),
        }
    }

    fn from_error(value: f64, dir: PathBuf, msg: String) -> Self {
        Self {
            value,
            dir,
            status: "error",
            threshold_ratio: None,
            mass_drift: None,
            energy_drift: None,
            energy_drift_full_run: None,
            monitor_ratio: None,
            failures: vec![msg],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub format: &'static str,
    pub axis: Axis,
    pub template: Scenario,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.status == "pass")
    }

    /// Aggregated CSV, one row per value in input order.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        let mut s = format!("# format={SWEEP_FORMAT}\n");
        let _ = writeln!(
            s,
            "{},status,threshold_ratio,mass_drift,energy_drift,energy_drift_full_run,monitor_ratio,dir,failures",
            self.axis.name()
        );
        for r in &self.rows {
            let failures = r.failures.join("; ").replace(['"', '\n'], "'");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},\"{}\"",
                fmt_f64(r.value),
                r.status,
                opt(r.threshold_ratio),
                opt(r.mass_drift),
                opt(r.energy_drift),
                opt(r.energy_drift_full_run),
                opt(r.monitor_ratio),
                r.dir.display(),
                failures
            );
        }
        s
    }
}

/// Concurrency cap from [`THREADS_ENV`]; `None` when unset.
pub fn thread_cap() -> Result<Option<usize>, LabError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(LabError::Semantic(format!("{THREADS_ENV} must be a positive integer (got {v:?})"))),
        },
    }
}

fn run_one(template: &Scenario, axis: Axis, value: f64, dir: &Path) -> SweepRow {
    let rel = PathBuf::from(dir.file_name().expect("run directory has a name"));
    let attempt = std::panic::catch_unwind(AssertUnwindSafe(|| {
        let s = axis.apply(template, value)?;
        run_scenario(&s, dir, RunOptions::default())
    }));
    match attempt {
        Ok(Ok(report)) => SweepRow::from_report(value, rel, &report),
        Ok(Err(e)) => {
            let _ = std::fs::create_dir_all(dir);
            let _ = std::fs::write(dir.join("error.json"), crate::run::ErrorReport::new(&e).to_json() + "\n");
            SweepRow::from_error(value, rel, e.to_string())
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "run panicked".into());
            SweepRow::from_error(value, rel, format!("panic: {msg}"))
        }
    }
}

/// Runs `template` once per value of `axis` under `out/<axis>-<index>/` and
/// writes `sweep.csv` and `sweep.json` to `out`. Failed runs become error rows.
pub fn sweep(template: &Scenario, axis: Axis, values: &[f64], out: &Path, threads: Option<usize>) -> Result<SweepReport, LabError> {
    std::fs::create_dir_all(out).map_err(|e| LabError::Io(format!("{}: {e}", out.display())))?;
    let dirs: Vec<PathBuf> = (0..values.len()).map(|i| out.join(format!("{}-{i:03}", axis.name()))).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LabError::Io(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        values
            .par_iter()
            .zip(dirs.par_iter())
            .map(|(&v, dir)| run_one(template, axis, v, dir))
            .collect()
    });
    let report = SweepReport { format: SWEEP_FORMAT, axis, template: template.clone(), rows };
    std::fs::write(out.join("sweep.csv"), report.to_csv())?;
    let mut json = serde_json::to_string_pretty(&report).map_err(|e| LabError::Io(e.to_string()))?;
    json.push('\n');
    std::fs::write(out.join("sweep.json"), json)?;
    Ok(report)
}
