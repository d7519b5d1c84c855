//! Split-step Fourier integrator on the radial sine basis.
//!
//! The linear flow `e^{itΔ}` is exact on the sine modes. The nonlinear and
//! potential parts act as a pointwise phase `exp(i τ (N(|u|) − V))`, which
//! leaves `|u|` unchanged, so one convolution per step suffices for Strang.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ModelParams;
use crate::grid::{l2_norm_sq, RadialField, RadialGrid};
use crate::morawetz::{DiagnosticsConfig, DiagnosticsSampler, DiagnosticsSeries};
use crate::potentials::PotentialSpec;
use crate::riesz::RieszKernel;
use crate::scalar::{Numeric, Real};

/// Operator splitting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Second order: half phase, full linear, half phase.
    #[default]
    Strang,
    /// First order: full phase then full linear.
    Lie,
}

/// Absorbing layer `σ(r) = strength·((r − start)/(r_max − start))^power` on `r > start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpongeConfig {
    pub enabled: bool,
    /// Onset as a fraction of `r_max`.
    pub start_fraction: f64,
    pub strength: f64,
    pub power: i32,
}

impl Default for SpongeConfig {
    fn default() -> Self {
        Self { enabled: true, start_fraction: 0.75, strength: 5.0, power: 4 }
    }
}

impl SpongeConfig {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    fn sigma(&self, r: f64, r_max: f64) -> f64 {
        let start = self.start_fraction * r_max;
        if !self.enabled || r <= start {
            0.0
        } else {
            self.strength * ((r - start) / (r_max - start)).powi(self.power)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Record diagnostics every this many steps (and always at the last step).
    pub sample_every: usize,
    /// Keep the field every this many samples; `0` keeps none.
    pub snapshot_every: usize,
    pub scheme: Scheme,
    pub sponge: SpongeConfig,
    /// Drop the Hartree term.
    pub linear: bool,
    pub diagnostics: DiagnosticsConfig,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            sample_every: 100,
            snapshot_every: 0,
            scheme: Scheme::Strang,
            sponge: SpongeConfig::default(),
            linear: false,
            diagnostics: DiagnosticsConfig::default(),
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive (got {})", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidArgument(format!("t_end must be nonnegative (got {})", self.t_end)));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidArgument("sample_every must be at least 1".into()));
        }
        let s = &self.sponge;
        if s.enabled && !(s.start_fraction > 0.0 && s.start_fraction < 1.0 && s.strength >= 0.0 && s.power >= 1) {
            return Err(Error::InvalidArgument("sponge needs 0 < start_fraction < 1, strength >= 0, power >= 1".into()));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::InvalidArgument(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// One-step propagator with cached linear multiplier, damping and convolution.
pub struct Stepper<'a, T: Numeric> {
    kern: &'a RieszKernel<T>,
    p: T,
    dt: T,
    scheme: Scheme,
    linear: bool,
    v: Vec<T>,
    propagator: Vec<Complex<T>>,
    damping: Option<Vec<T>>,
    /// `N(|u|) = (I_γ ∗ |u|^p)|u|^{p−2}` for the current modulus.
    cached: Option<Vec<T>>,
    exported: f64,
}

impl<'a, T: Numeric> Stepper<'a, T> {
    /// `dt` may be negative for backward integration.
    pub fn new(
        params: &ModelParams<T>,
        v: &PotentialSpec,
        kern: &'a RieszKernel<T>,
        dt: f64,
        scheme: Scheme,
        sponge: SpongeConfig,
        linear: bool,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be finite and nonzero (got {dt})")));
        }
        let grid = kern.grid();
        let dt_t = T::cst(dt);
        let propagator = grid.eigenvalues().iter().map(|&lam| Complex::from_polar(T::one(), -lam * dt_t)).collect();
        let r_max = grid.r_max().to_f64_lossy();
        let damping = sponge.enabled.then(|| {
            grid.nodes()
                .iter()
                .map(|r| T::cst((-dt.abs() * sponge.sigma(r.to_f64_lossy(), r_max)).exp()))
                .collect()
        });
        Ok(Self {
            kern,
            p: params.p,
            dt: dt_t,
            scheme,
            linear,
            v: v.sample(grid),
            propagator,
            damping,
            cached: None,
            exported: 0.0,
        })
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        self.kern.grid()
    }

    /// Mass removed by the sponge so far.
    pub fn exported_mass(&self) -> f64 {
        self.exported
    }

    /// Forget the cached convolution; needed if the caller edits the field.
    pub fn invalidate(&mut self) {
        self.cached = None;
    }

    fn nonlinear_multiplier(&self, u: &[Complex<T>]) -> Result<Vec<T>> {
        if self.linear {
            return Ok(vec![T::zero(); u.len()]);
        }
        let m: Vec<T> = u.iter().map(|z| z.norm()).collect();
        let f: Vec<T> = m.iter().map(|&x| x.powf(self.p)).collect();
        let conv = self.kern.convolve(&f)?;
        let two = T::cst(2.0);
        Ok(conv.iter().zip(&m).map(|(&c, &x)| if x > T::zero() { c * x.powf(self.p - two) } else { T::zero() }).collect())
    }

    fn phase(&self, u: &mut [Complex<T>], n: &[T], tau: T) {
        for ((z, &nn), &vv) in u.iter_mut().zip(n).zip(&self.v) {
            *z = *z * Complex::from_polar(T::one(), tau * (nn - vv));
        }
    }

    fn linear_step(&self, u: &mut RadialField<T>) {
        let grid = self.kern.grid();
        let mut s = grid.sine_coefficients(u.values());
        for (sk, &m) in s.iter_mut().zip(&self.propagator) {
            *sk = *sk * m;
        }
        u.values_mut().copy_from_slice(&grid.from_sine_coefficients(&s));
    }

    fn absorb(&mut self, u: &mut RadialField<T>) {
        if let Some(d) = &self.damping {
            let before = l2_norm_sq(u);
            for (z, &f) in u.values_mut().iter_mut().zip(d) {
                *z = *z * f;
            }
            self.exported += (before - l2_norm_sq(u)).to_f64_lossy();
        }
    }

    pub fn step(&mut self, u: &mut RadialField<T>) -> Result<()> {
        let half = self.dt / T::cst(2.0);
        match self.scheme {
            Scheme::Strang => {
                let n = match self.cached.take() {
                    Some(n) => n,
                    None => self.nonlinear_multiplier(u.values())?,
                };
                self.phase(u.values_mut(), &n, half);
                self.linear_step(u);
                self.absorb(u);
                let n = self.nonlinear_multiplier(u.values())?;
                self.phase(u.values_mut(), &n, half);
                self.cached = Some(n);
            }
            Scheme::Lie => {
                let n = self.nonlinear_multiplier(u.values())?;
                self.phase(u.values_mut(), &n, self.dt);
                self.linear_step(u);
                self.absorb(u);
            }
        }
        Ok(())
    }
}

/// One Strang step without sponge.
pub fn step<T: Numeric>(
    u: &RadialField<T>,
    v: &PotentialSpec,
    kern: &RieszKernel<T>,
    params: &ModelParams<T>,
    dt: f64,
) -> Result<RadialField<T>> {
    let mut st = Stepper::new(params, v, kern, dt, Scheme::Strang, SpongeConfig::disabled(), false)?;
    let mut out = u.clone();
    st.step(&mut out)?;
    Ok(out)
}

/// Output of [`evolve`].
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub diagnostics: DiagnosticsSeries,
    /// `(t, u(t))` for kept snapshots.
    pub snapshots: Vec<(f64, RadialField<T>)>,
    pub final_state: RadialField<T>,
    pub exported_mass: f64,
    pub steps: usize,
    pub warnings: Vec<String>,
}

/// Boundary amplitude above this fraction of `sup|u|` triggers a warning without sponge.
pub const BOUNDARY_WARNING_FRACTION: f64 = 1e-6;

/// Largest `|u|` on `r ≥ fraction·r_max`.
fn boundary_amplitude<T: Real>(u: &RadialField<T>, fraction: f64) -> f64 {
    let cut = T::cst(fraction) * u.grid().r_max();
    u.values()
        .iter()
        .zip(u.grid().nodes())
        .filter(|(_, &r)| r >= cut)
        .fold(0.0, |m, (z, _)| m.max(z.norm().to_f64_lossy()))
}

/// Integrates from `t = 0` to `cfg.t_end`, sampling diagnostics on the way.
///
/// Stops with [`Error::NonFinite`] at the first step producing NaN or infinity.
pub fn evolve<T: Numeric>(
    u0: &RadialField<T>,
    v: &PotentialSpec,
    kern: &RieszKernel<T>,
    params: &ModelParams<T>,
    cfg: &EvolveConfig,
) -> Result<Trajectory<T>> {
    let steps = cfg.validate()?;
    v.validate()?;
    u0.check_same_grid(&RadialField::zeros(kern.grid()))?;
    if !u0.is_finite() {
        return Err(Error::NonFinite { time: 0.0 });
    }
    let mut sampler = DiagnosticsSampler::new(&cfg.diagnostics, v, kern, params)?;
    let mut st = Stepper::new(params, v, kern, cfg.dt, cfg.scheme, cfg.sponge, cfg.linear)?;
    let mut u = u0.clone();
    let mut snapshots = Vec::new();
    let mut warnings = Vec::new();
    let mut samples = 0usize;
    // Edge region: the sponge onset if absorbing, else the outer tenth.
    let edge = if cfg.sponge.enabled { cfg.sponge.start_fraction } else { 0.9 };
    let mut contact = None;
    let keep = |t: f64, u: &RadialField<T>, samples: &mut usize, snapshots: &mut Vec<(f64, RadialField<T>)>| {
        if cfg.snapshot_every > 0 && *samples % cfg.snapshot_every == 0 {
            snapshots.push((t, u.clone()));
        }
        *samples += 1;
    };
    sampler.record(0.0, &u, 0.0)?;
    keep(0.0, &u, &mut samples, &mut snapshots);
    for k in 1..=steps {
        st.step(&mut u)?;
        let t = k as f64 * cfg.dt;
        if !u.is_finite() {
            return Err(Error::NonFinite { time: t });
        }
        if k % cfg.sample_every == 0 || k == steps {
            if contact.is_none() {
                let b = boundary_amplitude(&u, edge);
                if b > BOUNDARY_WARNING_FRACTION * u.sup_norm().to_f64_lossy() {
                    contact = Some(t);
                    if !cfg.sponge.enabled {
                        warnings.push(format!("boundary amplitude {b:e} at t = {t} with the sponge disabled"));
                    }
                }
            }
            sampler.record(t, &u, st.exported_mass())?;
            keep(t, &u, &mut samples, &mut snapshots);
        }
    }
    let mut diagnostics = sampler.series;
    diagnostics.boundary_contact = contact;
    Ok(Trajectory {
        diagnostics,
        snapshots,
        final_state: u,
        exported_mass: st.exported_mass(),
        steps,
        warnings,
    })
}

/// Conservation over the samples taken before any mass was exported and
/// before waves reached the edge region, plus the same drifts over the whole run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationReport {
    pub samples: usize,
    /// Last sample time inside the window.
    pub window_end: f64,
    /// `max |M(t) − M(0)| / M(0)`.
    pub mass_drift: f64,
    /// `max |E(t) − E(0)| / |E(0)|`.
    pub energy_drift: f64,
    /// `max |E(t) − E(0)|`.
    pub energy_drift_abs: f64,
    /// Mass accounted for including the sponge: `max |M(t) + exported(t) − M(0)| / M(0)`.
    pub mass_balance: f64,
    pub mass_drift_full_run: f64,
    pub energy_drift_full_run: f64,
    /// `(t, ‖Λu(t)‖)`.
    pub lambda_norm: Vec<(f64, f64)>,
}

/// Sponge output below this fraction of `M(0)` counts as closed system.
pub const EXPORT_FLOOR: f64 = 1e-14;

pub fn conservation_report(series: &DiagnosticsSeries) -> Result<ConservationReport> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    let m0 = series.mass[0];
    let e0 = series.energy[0];
    let contact = series.boundary_contact.unwrap_or(f64::INFINITY);
    let mut r = ConservationReport {
        samples: 0,
        window_end: 0.0,
        mass_drift: 0.0,
        energy_drift: 0.0,
        energy_drift_abs: 0.0,
        mass_balance: 0.0,
        mass_drift_full_run: 0.0,
        energy_drift_full_run: 0.0,
        lambda_norm: series.t.iter().zip(&series.lambda_sq).map(|(&t, &l)| (t, l.max(0.0).sqrt())).collect(),
    };
    for i in 0..series.len() {
        let dm = (series.mass[i] - m0).abs() / m0;
        let de = (series.energy[i] - e0).abs();
        r.mass_balance = r.mass_balance.max((series.mass[i] + series.exported_mass[i] - m0).abs() / m0);
        r.mass_drift_full_run = r.mass_drift_full_run.max(dm);
        r.energy_drift_full_run = r.energy_drift_full_run.max(de / e0.abs());
        if series.exported_mass[i] > EXPORT_FLOOR * m0 || series.t[i] >= contact {
            continue;
        }
        r.samples += 1;
        r.window_end = series.t[i];
        r.mass_drift = r.mass_drift.max(dm);
        r.energy_drift_abs = r.energy_drift_abs.max(de);
    }
    r.energy_drift = r.energy_drift_abs / e0.abs();
    Ok(r)
}
