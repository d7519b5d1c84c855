//! Scenario documents.
//!
//! A scenario is a TOML file with the sections `[model]`, `[grid]`,
//! `[potential]`, `[initial]`, `[evolve]` and `[diagnostics]`. Only `[model]`,
//! `[grid]` and `[initial]` are required. Unknown keys anywhere are errors.
//!
//! ```toml
//! [model]
//! p = 3.0
//! gamma = 2.0
//!
//! [grid]
//! r_max = 40.0
//! n = 2048
//!
//! [potential]
//! kind = "gaussian"
//! amplitude = 1.0
//! width = 1.0
//!
//! [initial]
//! kind = "scaled-ground-state"
//! c = 0.5
//!
//! [evolve]
//! dt = 1e-3
//! t_end = 30.0
//!
//! [diagnostics]
//! radii = [10.0]
//! weight = { kind = "truncated", radius = 10.0 }
//! coercivity = true
//! monitor = { radius = 10.0, eps = 0.3, expect = true }
//! ```

use std::path::{Path, PathBuf};

use hartree_core::evolve::{EvolveConfig, Scheme, SpongeConfig};
use hartree_core::exponents::{ModelParams, DEFAULT_EPSILON};
use hartree_core::groundstate::{DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use hartree_core::morawetz::{DiagnosticsConfig, WeightSpec};
use hartree_core::potentials::PotentialSpec;
use hartree_core::grid::RadialGrid;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub p: f64,
    pub gamma: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Residual tolerance for the ground-state solve, relative to `‖Q‖_∞`.
    #[serde(default = "default_gs_tol")]
    pub ground_state_tol: f64,
    #[serde(default = "default_gs_iter")]
    pub ground_state_max_iter: usize,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_gs_tol() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_gs_iter() -> usize {
    DEFAULT_MAX_ITER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub r_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// `c·Q` for the ground state of the model.
    ScaledGroundState { c: f64 },
    /// `amplitude·e^{−r²/width²}`.
    Gaussian { amplitude: f64, width: f64 },
    /// A field CSV; relative paths resolve against the scenario file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub snapshot_every: usize,
    pub scheme: Scheme,
    pub linear: bool,
    pub sponge: SpongeConfig,
}

impl Default for EvolveSection {
    fn default() -> Self {
        let d = EvolveConfig::default();
        Self {
            dt: d.dt,
            t_end: d.t_end,
            sample_every: d.sample_every,
            snapshot_every: d.snapshot_every,
            scheme: d.scheme,
            linear: d.linear,
            sponge: d.sponge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConservationCheck {
    /// Bound on `max |M(t) − M(0)|/M(0)` before export or boundary contact.
    pub mass_tol: f64,
    /// Bound on `max |E(t) − E(0)|/|E(0)|` over the same window.
    pub energy_tol: f64,
}

impl Default for ConservationCheck {
    fn default() -> Self {
        Self { mass_tol: 1e-12, energy_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorCheck {
    pub radius: f64,
    pub eps: f64,
    /// Expected outcome of the criterion; omitted means report only.
    #[serde(default)]
    pub expect: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageCheck {
    pub radius: f64,
    /// Averaging horizon; defaults to `t_end`.
    #[serde(default)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Virial weight; `kind = "none"` skips `z`, `zp`, `zpp`.
    pub weight: WeightChoice,
    /// Radii for localized mass, `P(χ_R u)` and coercivity. The first one is the
    /// `mass_in_ball_R` column of the trajectory CSV.
    pub radii: Vec<f64>,
    /// Threshold quantities at `t = 0` and along the run.
    pub thresholds: bool,
    pub coercivity: bool,
    /// Finite-difference defects of the virial identities.
    pub identity: bool,
    pub conservation: Option<ConservationCheck>,
    pub monitor: Option<MonitorCheck>,
    pub average: Option<AverageCheck>,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            weight: WeightChoice::Quadratic,
            radii: vec![10.0],
            thresholds: true,
            coercivity: false,
            identity: false,
            conservation: None,
            monitor: None,
            average: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightChoice {
    None,
    Quadratic,
    Truncated {
        radius: f64,
        #[serde(default)]
        band: Option<f64>,
    },
}

impl WeightChoice {
    pub fn spec(self) -> Option<WeightSpec> {
        match self {
            WeightChoice::None => None,
            WeightChoice::Quadratic => Some(WeightSpec::Quadratic),
            WeightChoice::Truncated { radius, band } => Some(WeightSpec::Truncated { radius, band }),
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(default)]
    pub potential: PotentialSpec,
    pub initial: InitialData,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

impl Scenario {
    pub fn params(&self) -> Result<ModelParams<f64>, LabError> {
        Ok(ModelParams::new(self.model.p, self.model.gamma, self.model.epsilon)?)
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        let e = &self.evolve;
        EvolveConfig {
            dt: e.dt,
            t_end: e.t_end,
            sample_every: e.sample_every,
            snapshot_every: e.snapshot_every,
            scheme: e.scheme,
            sponge: e.sponge,
            linear: e.linear,
            diagnostics: DiagnosticsConfig { weight: self.diagnostics.weight.spec(), radii: self.diagnostics.radii.clone() },
        }
    }

    /// Whether the run needs the ground state of the model.
    pub fn needs_ground_state(&self) -> bool {
        let d = &self.diagnostics;
        matches!(self.initial, InitialData::ScaledGroundState { .. }) || d.thresholds || d.coercivity || d.average.is_some()
    }

    /// Checks every invariant not enforced by the grammar.
    pub fn validate(&self) -> Result<(), LabError> {
        let sem = |m: String| Err(LabError::Semantic(m));
        let params = self.params()?;
        let m = &self.model;
        if self.needs_ground_state() && !params.is_intercritical() {
            return sem(format!(
                "(5+gamma)/3 < p < 3+gamma required for the ground state (got p = {}, gamma = {})",
                m.p, m.gamma
            ));
        }
        if !(m.ground_state_tol > 0.0) || m.ground_state_max_iter == 0 {
            return sem("ground_state_tol > 0 and ground_state_max_iter ≥ 1 required".into());
        }
        RadialGrid::<f64>::new(self.grid.r_max, self.grid.n).map_err(|e| LabError::Semantic(e.to_string()))?;
        self.potential.validate().map_err(|e| LabError::Semantic(e.to_string()))?;
        match &self.initial {
            InitialData::ScaledGroundState { c } if !(c.is_finite() && *c >= 0.0) => {
                return sem(format!("c ≥ 0 required (got c = {c})"));
            }
            InitialData::Gaussian { amplitude, width } if !(amplitude.is_finite() && *width > 0.0) => {
                return sem(format!("gaussian needs finite amplitude and width > 0 (got {amplitude}, {width})"));
            }
            InitialData::File { path } if !path.is_file() => {
                return sem(format!("initial data file {} does not exist", path.display()));
            }
            _ => {}
        }
        self.evolve_config().validate().map_err(|e| LabError::Semantic(e.to_string()))?;
        let d = &self.diagnostics;
        if d.radii.is_empty() {
            return sem("diagnostics.radii needs at least one radius".into());
        }
        if let Some(bad) = d.radii.iter().find(|&&r| !(r > 0.0 && r <= self.grid.r_max)) {
            return sem(format!("diagnostic radius {bad} outside (0, r_max]"));
        }
        if let WeightChoice::Truncated { radius, band } = d.weight {
            let band = band.unwrap_or(radius / 100.0);
            if !(radius > 0.0 && radius < self.grid.r_max && band > 0.0 && band < radius / 2.0) {
                return sem(format!("truncated weight needs 0 < R < r_max and 0 < band < R/2 (got R = {radius}, band = {band})"));
            }
        }
        let recorded = |r: f64| d.radii.iter().any(|&x| (x - r).abs() <= 1e-12 * r.max(1.0));
        if let Some(mon) = d.monitor {
            if !recorded(mon.radius) {
                return sem(format!("monitor radius {} must be listed in diagnostics.radii", mon.radius));
            }
            if !(mon.eps > 0.0) {
                return sem("monitor eps > 0 required".into());
            }
        }
        if let Some(avg) = d.average {
            if !recorded(avg.radius) {
                return sem(format!("average radius {} must be listed in diagnostics.radii", avg.radius));
            }
            if avg.horizon.is_some_and(|h| !(h > 0.0 && h <= self.evolve.t_end)) {
                return sem("average horizon must lie in (0, t_end]".into());
            }
        }
        if let Some(c) = d.conservation {
            if !(c.mass_tol >= 0.0 && c.energy_tol >= 0.0) {
                return sem("conservation tolerances must be nonnegative".into());
            }
        }
        Ok(())
    }

    /// Resolved scenario as TOML, for provenance headers.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// Parses and validates a scenario; relative file paths resolve against `base`.
pub fn parse_scenario_in(text: &str, base: Option<&Path>) -> Result<Scenario, LabError> {
    let mut s: Scenario = toml::from_str(text).map_err(|e| LabError::Parse(e.to_string()))?;
    if let (InitialData::File { path }, Some(base)) = (&mut s.initial, base) {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    s.validate()?;
    Ok(s)
}

/// [`parse_scenario_in`] relative to the working directory.
pub fn parse_scenario(text: &str) -> Result<Scenario, LabError> {
    parse_scenario_in(text, None)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, LabError> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario_in(&text, path.parent())
}

/// Parses a potential given either as a TOML table body
/// (`kind = "gaussian"` …) or as an inline table (`{ kind = "gaussian", … }`).
pub fn parse_potential(text: &str) -> Result<PotentialSpec, LabError> {
    let t = text.trim();
    let spec: PotentialSpec = if t.starts_with('{') {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Wrap {
            potential: PotentialSpec,
        }
        toml::from_str::<Wrap>(&format!("potential = {t}")).map_err(|e| LabError::Parse(e.to_string()))?.potential
    } else {
        toml::from_str(t).map_err(|e| LabError::Parse(e.to_string()))?
    };
    spec.validate().map_err(|e| LabError::Semantic(e.to_string()))?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[model]\np = 3.0\ngamma = 2.0\n[grid]\nr_max = 20.0\nn = 256\n[initial]\nkind = \"gaussian\"\namplitude = 1.0\nwidth = 1.0\n";

    #[test]
    fn minimal_document_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.potential, PotentialSpec::Zero);
        assert_eq!(s.evolve, EvolveSection::default());
        assert_eq!(s.diagnostics, DiagnosticsSection::default());
        assert_eq!(s.model.epsilon, DEFAULT_EPSILON);
        let back = parse_scenario(&s.to_toml()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn p_below_two_is_semantic() {
        let doc = MINIMAL.replace("p = 3.0", "p = 1.5");
        match parse_scenario(&doc) {
            Err(LabError::Semantic(m)) => assert!(m.contains("p ≥ 2 required"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_and_unknown_keys_are_parse_errors() {
        let dup = MINIMAL.replace("gamma = 2.0", "gamma = 2.0\ngamma = 1.0");
        assert!(matches!(parse_scenario(&dup), Err(LabError::Parse(_))));
        let typo = MINIMAL.replace("gamma = 2.0", "gamma = 2.0\ngama = 1.0");
        match parse_scenario(&typo) {
            Err(LabError::Parse(m)) => assert!(m.contains("gama") && m.contains("line"), "{m}"),
            other => panic!("{other:?}"),
        }
        let nested = format!("{MINIMAL}[evolve.sponge]\nstrenght = 2.0\n");
        assert!(matches!(parse_scenario(&nested), Err(LabError::Parse(_))));
    }

    #[test]
    fn semantic_checks() {
        let missing = MINIMAL.replace("kind = \"gaussian\"\namplitude = 1.0\nwidth = 1.0", "kind = \"file\"\npath = \"/nonexistent/u.csv\"");
        assert!(matches!(parse_scenario(&missing), Err(LabError::Semantic(_))));
        let steps = format!("{MINIMAL}[evolve]\ndt = 0.3\nt_end = 1.0\n");
        assert!(matches!(parse_scenario(&steps), Err(LabError::Semantic(_))));
        let monitor = format!("{MINIMAL}[diagnostics]\nradii = [5.0]\nmonitor = {{ radius = 10.0, eps = 0.1 }}\n");
        assert!(matches!(parse_scenario(&monitor), Err(LabError::Semantic(_))));
        let supercritical = MINIMAL.replace("p = 3.0", "p = 6.0");
        assert!(matches!(parse_scenario(&supercritical), Err(LabError::Semantic(_))));
    }

    #[test]
    fn potential_forms() {
        let a = parse_potential("{ kind = \"gaussian\", amplitude = 1.0, width = 2.0 }").unwrap();
        let b = parse_potential("kind = \"gaussian\"\namplitude = 1.0\nwidth = 2.0").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, PotentialSpec::gaussian(1.0, 2.0));
        assert!(parse_potential("{ kind = \"gaussian\", amplitude = 1.0, width = -2.0 }").is_err());
        assert!(parse_potential("{ kind = \"ring\" }").is_err());
    }
}
