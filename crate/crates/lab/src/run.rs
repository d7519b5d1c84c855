//! One scenario end to end: ground state, evolution, diagnostics, files.

use std::path::Path;

use hartree_core::evolve::{conservation_report, evolve, ConservationReport, Trajectory};
use hartree_core::grid::{l2_norm_sq, RadialField, RadialGrid};
use hartree_core::groundstate::{solve_ground_state, threshold_functions, GroundStateSummary, ThresholdFunctionsReport};
use hartree_core::io::{fmt_f64, load_field, save_field, write_trajectory};
use hartree_core::morawetz::{
    coercivity_series, identity_defects, morawetz_average, scattering_monitor, IdentityDefects, MonitorReport,
    MorawetzAverage,
};
use hartree_core::potentials::energy;
use hartree_core::riesz::RieszKernel;
use hartree_core::{Field64, GroundState64};
use serde::Serialize;

use crate::error::LabError;
use crate::scenario::{InitialData, MonitorCheck, Scenario};

pub const REPORT_FORMAT: &str = "hartree-report/1";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const REPORT_FILE: &str = "report.json";
pub const MORAWETZ_FILE: &str = "morawetz.json";

/// Extra reports requested on top of the scenario's own list.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Force the identity defects, the time average and the monitor, and write
    /// them to a separate verdict file. The monitor falls back to this
    /// `(radius, eps)` when the scenario has none.
    pub morawetz: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Threshold quantities at `t = 0` and along the run.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    /// `P(Q)M(Q)^{σ_c}`.
    pub pq_mq_sigma: f64,
    /// `M(Q)^{σ_c}E₀(Q)`.
    pub me_threshold: f64,
    /// `‖Q‖^{σ_c}‖∇Q‖`.
    pub grad_mass_threshold: f64,
    /// `P(u₀)M(u₀)^{σ_c}`.
    pub initial_p_m_sigma: f64,
    pub initial_ratio: f64,
    /// `M(u₀)^{σ_c}E(u₀)`.
    pub initial_me: f64,
    pub cond1_me_pass: bool,
    /// `‖u₀‖^{σ_c}‖Λu₀‖`.
    pub initial_grad_mass: f64,
    pub cond2_pass: bool,
    /// `sup_t P(u)M(u)^{σ_c}/(P(Q)M(Q)^{σ_c})`.
    pub track_max_ratio: f64,
    /// `sup_t ‖u‖^{σ_c}‖Λu‖/(‖Q‖^{σ_c}‖∇Q‖)`.
    pub lambda_track_max_ratio: f64,
    /// The ratio stays below one at every sample.
    pub threshold_pass: bool,
    /// Both mass-energy conditions hold at `t = 0`.
    pub corollary_pass: bool,
    pub lambda_track_pass: bool,
    pub functions: ThresholdFunctionsReport,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivitySummary {
    pub checks: usize,
    pub failures: usize,
    pub min_margin: f64,
    pub min_margin_time: f64,
    pub min_margin_radius: f64,
    pub max_threshold_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub format: &'static str,
    pub scenario: Scenario,
    pub ground_state: Option<GroundStateSummary>,
    pub steps: usize,
    pub samples: usize,
    pub boundary_contact: Option<f64>,
    pub exported_mass: f64,
    pub warnings: Vec<String>,
    pub conservation: Option<ConservationReport>,
    pub thresholds: Option<ThresholdReport>,
    pub coercivity: Option<CoercivitySummary>,
    pub identity: Option<IdentityDefects>,
    pub average: Option<MorawetzAverage>,
    pub monitor: Option<MonitorReport>,
    pub verdicts: Vec<Verdict>,
    /// Names of the failed verdicts.
    pub failures: Vec<String>,
    pub all_pass: bool,
}

impl RunReport {
    /// `0` iff every requested verdict passed.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            0
        } else {
            1
        }
    }
}

/// Verdict file of the `morawetz` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct MorawetzVerdict<'a> {
    pub format: &'static str,
    pub scenario: &'a Scenario,
    pub identity: Option<IdentityDefects>,
    pub average: Option<MorawetzAverage>,
    pub evacuation_times: Vec<(f64, f64)>,
    pub monitor: Option<MonitorReport>,
}

fn initial_field(s: &Scenario, grid: &RadialGrid<f64>, gs: Option<&GroundState64>) -> Result<Field64, LabError> {
    Ok(match &s.initial {
        InitialData::ScaledGroundState { c } => gs.expect("ground state solved").q.scaled_real(*c),
        InitialData::Gaussian { amplitude, width } => {
            RadialField::from_fn(grid, |r| amplitude * (-(r / width) * (r / width)).exp())
        }
        InitialData::File { path } => {
            let u: Field64 = load_field(path)?;
            if !u.grid().same_as(grid) {
                return Err(LabError::Semantic(format!(
                    "field in {} is on (r_max = {}, n = {}), scenario grid is (r_max = {}, n = {})",
                    path.display(),
                    u.grid().r_max(),
                    u.grid().n(),
                    grid.r_max(),
                    grid.n()
                )));
            }
            u
        }
    })
}

fn threshold_report(
    s: &Scenario,
    gs: &GroundState64,
    u0: &Field64,
    kern: &RieszKernel<f64>,
    traj: &Trajectory<f64>,
) -> Result<ThresholdReport, LabError> {
    let sigma = gs.exponents.sigma_c;
    let th = gs.thresholds;
    let m0 = l2_norm_sq(u0);
    let e = energy(u0, &s.potential, kern, s.model.p)?;
    let initial_p_m_sigma = e.nonlinear * m0.powf(sigma);
    let initial_me = m0.powf(sigma) * e.energy;
    let initial_grad_mass = m0.powf(sigma / 2.0) * e.lambda_norm_sq.max(0.0).sqrt();
    let d = &traj.diagnostics;
    let track_max = d.threshold_track.iter().fold(0.0f64, |m, &x| m.max(x)) / th.pq_mq_sigma;
    let lambda_max = (0..d.len())
        .map(|i| d.mass[i].powf(sigma / 2.0) * d.lambda_sq[i].max(0.0).sqrt())
        .fold(0.0f64, f64::max)
        / th.grad_mass_threshold;
    let cond1 = initial_me < th.me_threshold;
    let cond2 = initial_grad_mass < th.grad_mass_threshold;
    Ok(ThresholdReport {
        pq_mq_sigma: th.pq_mq_sigma,
        me_threshold: th.me_threshold,
        grad_mass_threshold: th.grad_mass_threshold,
        initial_p_m_sigma,
        initial_ratio: initial_p_m_sigma / th.pq_mq_sigma,
        initial_me,
        cond1_me_pass: cond1,
        initial_grad_mass,
        cond2_pass: cond2,
        track_max_ratio: track_max,
        lambda_track_max_ratio: lambda_max,
        threshold_pass: track_max < 1.0 && initial_p_m_sigma < th.pq_mq_sigma,
        corollary_pass: cond1 && cond2,
        lambda_track_pass: lambda_max < 1.0,
        functions: threshold_functions(gs),
    })
}

fn coercivity(traj: &Trajectory<f64>, gs: &GroundState64) -> CoercivitySummary {
    let d = &traj.diagnostics;
    let reports = coercivity_series(d, gs);
    let mut sum = CoercivitySummary {
        checks: 0,
        failures: 0,
        min_margin: f64::INFINITY,
        min_margin_time: 0.0,
        min_margin_radius: 0.0,
        max_threshold_ratio: 0.0,
        pass: true,
    };
    for per_radius in &reports {
        for (i, r) in per_radius.iter().enumerate() {
            sum.checks += 1;
            if !r.pass {
                sum.failures += 1;
            }
            sum.max_threshold_ratio = sum.max_threshold_ratio.max(r.threshold_ratio);
            if r.margin < sum.min_margin || r.margin.is_nan() {
                sum.min_margin = r.margin;
                sum.min_margin_time = d.t[i];
                sum.min_margin_radius = r.radius;
            }
        }
    }
    sum.pass = sum.failures == 0 && sum.checks > 0;
    sum
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), LabError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
}

/// Runs `s` and writes `trajectory.csv`, `report.json` and any snapshots to `out`.
pub fn run_scenario(s: &Scenario, out: &Path, opts: RunOptions) -> Result<RunReport, LabError> {
    s.validate()?;
    std::fs::create_dir_all(out).map_err(|e| LabError::Io(format!("{}: {e}", out.display())))?;
    let params = s.params()?;
    let grid = RadialGrid::new(s.grid.r_max, s.grid.n)?;
    let kern = RieszKernel::build(s.model.gamma, &grid)?;
    let gs = if s.needs_ground_state() {
        Some(solve_ground_state(&params, &grid, &kern, s.model.ground_state_tol, s.model.ground_state_max_iter)?)
    } else {
        None
    };
    let u0 = initial_field(s, &grid, gs.as_ref())?;
    let cfg = s.evolve_config();
    let traj = evolve(&u0, &s.potential, &kern, &params, &cfg)?;
    let d = &traj.diagnostics;
    let diag = &s.diagnostics;
    let mut verdicts = Vec::new();

    let conservation = conservation_report(d).ok();
    if let (Some(check), Some(c)) = (diag.conservation, conservation.as_ref()) {
        let pass = c.mass_drift <= check.mass_tol && c.energy_drift <= check.energy_tol;
        verdicts.push(Verdict {
            name: "conservation".into(),
            pass,
            detail: format!(
                "window t <= {}: mass drift {} (tol {}), energy drift {} (tol {})",
                fmt_f64(c.window_end),
                fmt_f64(c.mass_drift),
                fmt_f64(check.mass_tol),
                fmt_f64(c.energy_drift),
                fmt_f64(check.energy_tol)
            ),
        });
    }

    let thresholds = match (&gs, diag.thresholds) {
        (Some(gs), true) => Some(threshold_report(s, gs, &u0, &kern, &traj)?),
        _ => None,
    };
    if let Some(t) = &thresholds {
        verdicts.push(Verdict {
            name: "threshold".into(),
            pass: t.threshold_pass,
            detail: format!("sup_t P(u)M(u)^sigma_c / P(Q)M(Q)^sigma_c = {}", fmt_f64(t.track_max_ratio)),
        });
        verdicts.push(Verdict {
            name: "corollary".into(),
            pass: t.corollary_pass && t.lambda_track_pass,
            detail: format!(
                "M^sigma_c E ratio {}, ||u0||^sigma_c ||Lambda u0|| ratio {}, sup_t ratio {}",
                fmt_f64(t.initial_me / t.me_threshold),
                fmt_f64(t.initial_grad_mass / t.grad_mass_threshold),
                fmt_f64(t.lambda_track_max_ratio)
            ),
        });
    }

    let coercivity = match (&gs, diag.coercivity) {
        (Some(gs), true) => Some(coercivity(&traj, gs)),
        _ => None,
    };
    if let Some(c) = &coercivity {
        verdicts.push(Verdict {
            name: "coercivity".into(),
            pass: c.pass,
            detail: format!("{} of {} checks failed, min margin {}", c.failures, c.checks, fmt_f64(c.min_margin)),
        });
    }

    let want_virial = diag.weight.spec().is_some();
    let identity = if (diag.identity || opts.morawetz.is_some()) && want_virial {
        identity_defects(d).ok()
    } else {
        None
    };
    let average_cfg = diag.average.or_else(|| {
        opts.morawetz.map(|_| crate::scenario::AverageCheck { radius: diag.radii[0], horizon: None })
    });
    let average = match (&gs, average_cfg) {
        (Some(gs), Some(a)) => Some(morawetz_average(d, gs, a.radius, a.horizon.unwrap_or(s.evolve.t_end))?),
        _ => None,
    };
    let monitor_cfg = diag
        .monitor
        .or_else(|| opts.morawetz.map(|eps| MonitorCheck { radius: diag.radii[0], eps, expect: None }));
    let monitor = match monitor_cfg {
        Some(m) => Some(scattering_monitor(d, m.radius, m.eps)?),
        None => None,
    };
    if let (Some(expect), Some(m)) = (monitor_cfg.and_then(|m| m.expect), monitor.as_ref()) {
        verdicts.push(Verdict {
            name: "monitor".into(),
            pass: m.criterion_met == expect,
            detail: format!(
                "min mass in B(0,{}) = {} vs eps^2 = {}; criterion met: {}, expected: {}",
                fmt_f64(m.radius),
                fmt_f64(m.min),
                fmt_f64(m.eps * m.eps),
                m.criterion_met,
                expect
            ),
        });
    }

    let provenance = vec![format!("scenario:\n{}", s.to_toml())];
    let csv_path = out.join(TRAJECTORY_FILE);
    let file = std::fs::File::create(&csv_path).map_err(|e| LabError::Io(format!("{}: {e}", csv_path.display())))?;
    write_trajectory(std::io::BufWriter::new(file), d, diag.radii[0], &provenance)?;
    if !traj.snapshots.is_empty() {
        let dir = out.join("snapshots");
        std::fs::create_dir_all(&dir)?;
        for (k, (t, u)) in traj.snapshots.iter().enumerate() {
            save_field(&dir.join(format!("u-{k:05}-t{}.csv", fmt_f64(*t))), u)?;
        }
    }

    let failures: Vec<String> = verdicts.iter().filter(|v| !v.pass).map(|v| v.name.clone()).collect();
    let report = RunReport {
        format: REPORT_FORMAT,
        scenario: s.clone(),
        ground_state: gs.as_ref().map(|g| g.summary()),
        steps: traj.steps,
        samples: d.len(),
        boundary_contact: d.boundary_contact,
        exported_mass: traj.exported_mass,
        warnings: traj.warnings.clone(),
        conservation,
        thresholds,
        coercivity,
        identity,
        average,
        monitor,
        all_pass: failures.is_empty(),
        failures,
        verdicts,
    };
    write_json(&out.join(REPORT_FILE), &report)?;
    if opts.morawetz.is_some() {
        let v = MorawetzVerdict {
            format: REPORT_FORMAT,
            scenario: s,
            identity: report.identity,
            evacuation_times: report.average.as_ref().map(|a| a.evacuation_times.clone()).unwrap_or_default(),
            average: report.average.clone(),
            monitor: report.monitor,
        };
        write_json(&out.join(MORAWETZ_FILE), &v)?;
    }
    Ok(report)
}

/// Machine-readable record of a run that did not finish.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub format: &'static str,
    pub failures: Vec<String>,
}

impl ErrorReport {
    pub fn new(e: &LabError) -> Self {
        Self { format: REPORT_FORMAT, failures: vec![e.to_string()] }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("error report serializes")
    }
}
