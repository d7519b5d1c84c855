//! Radial potentials `V`, the Kato norm and the hypothesis audits.
//!
//! Sign convention: a positive amplitude is repulsive (`V ≥ 0`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{grad_norm_sq, RadialField, RadialGrid};
use crate::quad::integrate_with_breaks;
use crate::riesz::RieszKernel;
use crate::scalar::Real;

/// Radial potential description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    /// `A e^{−r²/w²}`.
    Gaussian { amplitude: f64, width: f64 },
    /// `A (r_c² + r²)^{−power/2}`.
    TruncatedInversePower { amplitude: f64, power: f64, core_radius: f64 },
    /// `A·1{r ≤ R}`. Its distributional derivative is not represented.
    Ball { amplitude: f64, radius: f64 },
    /// Linear interpolation of samples; constant beyond the last radius and
    /// below the first.
    Table { radii: Vec<f64>, values: Vec<f64> },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::Zero
    }
}

impl PotentialSpec {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        PotentialSpec::Gaussian { amplitude, width }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::Gaussian { amplitude, width } => {
                if !amplitude.is_finite() || !(*width > 0.0) || !width.is_finite() {
                    return bad(format!("gaussian needs finite amplitude and width > 0 (got {amplitude}, {width})"));
                }
                Ok(())
            }
            PotentialSpec::TruncatedInversePower { amplitude, power, core_radius } => {
                if !amplitude.is_finite() || !(*power > 0.0) || !(*core_radius > 0.0) {
                    return bad("truncated inverse power needs power > 0 and core radius > 0".into());
                }
                Ok(())
            }
            PotentialSpec::Ball { amplitude, radius } => {
                if !amplitude.is_finite() || !(*radius > 0.0) {
                    return bad("ball needs a positive radius".into());
                }
                Ok(())
            }
            PotentialSpec::Table { radii, values } => {
                if radii.len() != values.len() || radii.len() < 2 {
                    return bad("table needs at least two radii with one value each".into());
                }
                if radii[0] < 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("table radii must be nonnegative and strictly increasing".into());
                }
                if radii.iter().chain(values).any(|x| !x.is_finite()) {
                    return bad("table entries must be finite".into());
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PotentialSpec::Zero)
    }

    /// `V(r)`.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Gaussian { amplitude, width } => amplitude * (-(r / width).powi(2)).exp(),
            PotentialSpec::TruncatedInversePower { amplitude, power, core_radius } => {
                amplitude * (core_radius * core_radius + r * r).powf(-power / 2.0)
            }
            PotentialSpec::Ball { amplitude, radius } => {
                if r <= *radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            PotentialSpec::Table { radii, values } => {
                let k = radii.partition_point(|&x| x <= r);
                if k == 0 {
                    values[0]
                } else if k == radii.len() {
                    values[k - 1]
                } else {
                    let t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
                    values[k - 1] + t * (values[k] - values[k - 1])
                }
            }
        }
    }

    /// `∂_r V(r)`.
    pub fn derivative(&self, r: f64) -> f64 {
        match self {
            PotentialSpec::Zero | PotentialSpec::Ball { .. } => 0.0,
            PotentialSpec::Gaussian { width, .. } => -2.0 * r / (width * width) * self.value(r),
            PotentialSpec::TruncatedInversePower { amplitude, power, core_radius } => {
                -amplitude * power * r * (core_radius * core_radius + r * r).powf(-power / 2.0 - 1.0)
            }
            PotentialSpec::Table { radii, values } => {
                let last = radii.len() - 1;
                if r < radii[0] || r > radii[last] {
                    return 0.0;
                }
                // One-sided slopes at the ends, left-continuous in between.
                let k = radii.partition_point(|&x| x < r).clamp(1, last);
                (values[k] - values[k - 1]) / (radii[k] - radii[k - 1])
            }
        }
    }

    /// Points where `V` or its derivative is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            PotentialSpec::Ball { radius, .. } => vec![*radius],
            PotentialSpec::Table { radii, .. } => radii.clone(),
            _ => Vec::new(),
        }
    }

    /// `V` sampled at the grid nodes.
    pub fn sample<T: Real>(&self, grid: &RadialGrid<T>) -> Vec<T> {
        grid.nodes().iter().map(|&r| T::cst(self.value(r.to_f64_lossy()))).collect()
    }

    /// `∂_r V` sampled at the grid nodes.
    pub fn sample_derivative<T: Real>(&self, grid: &RadialGrid<T>) -> Vec<T> {
        grid.nodes().iter().map(|&r| T::cst(self.derivative(r.to_f64_lossy()))).collect()
    }
}

const QUAD_TOL: f64 = 1e-12;
const SIGN_TOL: f64 = 1e-12;
/// Number of log-spaced off-center Kato probes.
pub const KATO_PROBES: usize = 64;

/// `∫|W(y)|/|x−y| dy` at `|x| = r`, for `|W| = weight(s)` supported in `[0, r_max]`.
fn newton_potential(weight: &dyn Fn(f64) -> f64, r: f64, r_max: f64, breaks: &[f64]) -> f64 {
    let outer = integrate_with_breaks(|s: f64| s * weight(s), r, r_max, breaks, QUAD_TOL);
    if r == 0.0 {
        return 4.0 * PI * outer;
    }
    let inner = integrate_with_breaks(|s: f64| s * s * weight(s), 0.0, r, breaks, QUAD_TOL);
    4.0 * PI * (inner / r + outer)
}

/// `true` when `r·F(r)` fails to decrease from `r_max/2` to `r_max`, i.e. the
/// truncated integral `∫^{r_max} F` has not visibly converged.
fn tail_suspect(f: &dyn Fn(f64) -> f64, r_max: f64) -> bool {
    let far = r_max * f(r_max);
    let mid = 0.5 * r_max * f(0.5 * r_max);
    far > 0.0 && far >= mid
}

/// Probe radii: the center and [`KATO_PROBES`] log-spaced radii in `[dr, r_max/2]`.
pub fn kato_probes(r_max: f64, dr: f64) -> Vec<f64> {
    let lo = dr.min(r_max / 2.0);
    let ratio = (r_max / 2.0 / lo).ln() / (KATO_PROBES - 1) as f64;
    std::iter::once(0.0)
        .chain((0..KATO_PROBES).map(|k| lo * (ratio * k as f64).exp()))
        .collect()
}

/// Value of a Kato-type supremum and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KatoEstimate {
    pub norm: f64,
    pub argmax_radius: f64,
    /// `true` when `r²|V|` is not decaying at the truncation radius.
    pub tail_warning: bool,
}

fn kato_of(weight: &dyn Fn(f64) -> f64, r_max: f64, dr: f64, breaks: &[f64]) -> KatoEstimate {
    let mut best = KatoEstimate { norm: 0.0, argmax_radius: 0.0, tail_warning: false };
    for r in kato_probes(r_max, dr) {
        let v = newton_potential(weight, r, r_max, breaks);
        if v > best.norm {
            best.norm = v;
            best.argmax_radius = r;
        }
    }
    best.tail_warning = tail_suspect(&|s: f64| s * weight(s), r_max);
    best
}

/// `‖V‖_{K₀} = sup_x ∫|V(y)|/|x−y| dy`, sampled at the probe radii.
pub fn kato_norm<T: Real>(v: &PotentialSpec, grid: &RadialGrid<T>) -> KatoEstimate {
    let breaks = v.breakpoints();
    kato_of(&|s| v.value(s).abs(), grid.r_max().to_f64_lossy(), grid.dr().to_f64_lossy(), &breaks)
}

/// `‖V₋‖_{K₀}` with `V₋ = min(V, 0)`.
pub fn kato_norm_negative_part<T: Real>(v: &PotentialSpec, grid: &RadialGrid<T>) -> KatoEstimate {
    let breaks = v.breakpoints();
    kato_of(&|s| (-v.value(s)).max(0.0), grid.r_max().to_f64_lossy(), grid.dr().to_f64_lossy(), &breaks)
}

/// `‖f‖_{L^q(ℝ³)}` of a radial profile on `[0, r_max]`; `q = ∞` gives the sup over
/// the supplied nodes and breakpoints.
fn radial_lq(f: &dyn Fn(f64) -> f64, q: f64, r_max: f64, nodes: &[f64], breaks: &[f64]) -> (f64, bool) {
    if q.is_infinite() {
        let sup = nodes.iter().chain(breaks).map(|&r| f(r).abs()).fold(0.0, f64::max);
        return (sup, false);
    }
    let dens = |r: f64| 4.0 * PI * r * r * f(r).abs().powf(q);
    let integral = integrate_with_breaks(dens, 0.0, r_max, breaks, QUAD_TOL);
    (integral.powf(1.0 / q), tail_suspect(&dens, r_max))
}

/// Norm of `x·∇V` in one Lebesgue space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LrNorm {
    /// Exponent; `null` in JSON stands for `∞`.
    pub exponent: Option<f64>,
    pub norm: f64,
    pub tail_warning: bool,
}

/// Result of [`audit_hypotheses`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialAudit {
    pub kato_norm: f64,
    pub kato_argmax_radius: f64,
    pub kato_norm_negative_part: f64,
    pub l32_norm: f64,
    pub nonneg: bool,
    /// `x·∇V ≤ 0` at every node.
    pub radial_derivative_sign: bool,
    pub x_grad_v_lr_norms: Vec<LrNorm>,
    /// `V ∈ K₀ ∩ L^{3/2}` and `‖V₋‖_{K₀} < 4π`.
    pub kato_class_pass: bool,
    /// `V ≥ 0`, `x·∇V ≤ 0` and `x·∇V ∈ L^r` on top of the class condition.
    pub theorem_hypotheses_pass: bool,
    /// Named reasons for every failed check.
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

/// Audits `V` against the scattering hypotheses on the grid.
///
/// `r_exponents` lists the Lebesgue exponents (each `≥ 3/2`, `f64::INFINITY`
/// allowed) at which `x·∇V` is measured.
pub fn audit_hypotheses<T: Real>(
    v: &PotentialSpec,
    grid: &RadialGrid<T>,
    r_exponents: &[f64],
) -> Result<PotentialAudit> {
    v.validate()?;
    if let Some(bad) = r_exponents.iter().find(|&&q| !(q >= 1.5)) {
        return Err(Error::InvalidArgument(format!("x·∇V exponents must be >= 3/2 (got {bad})")));
    }
    let r_max = grid.r_max().to_f64_lossy();
    let nodes: Vec<f64> = grid.nodes().iter().map(|r| r.to_f64_lossy()).collect();
    let breaks = v.breakpoints();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();

    let kato = kato_norm(v, grid);
    let kato_neg = kato_norm_negative_part(v, grid);
    if kato.tail_warning {
        warnings.push("kato integral: r^2|V| not decaying at r_max (truncated)".into());
    }
    let (l32, l32_tail) = radial_lq(&|r| v.value(r), 1.5, r_max, &nodes, &breaks);
    if l32_tail {
        warnings.push("L^{3/2} norm: integrand not decaying at r_max".into());
    }
    let nonneg = nodes.iter().all(|&r| v.value(r) >= -SIGN_TOL);
    let radial_sign = nodes.iter().all(|&r| r * v.derivative(r) <= SIGN_TOL);
    let x_grad = |r: f64| r * v.derivative(r);
    let lr: Vec<LrNorm> = r_exponents
        .iter()
        .map(|&q| {
            let (norm, tail) = radial_lq(&x_grad, q, r_max, &nodes, &breaks);
            LrNorm { exponent: q.is_finite().then_some(q), norm, tail_warning: tail }
        })
        .collect();

    if !kato.norm.is_finite() || kato.tail_warning {
        failures.push("V not in the Kato class K0 (Kato integral does not converge)".into());
    }
    if !l32.is_finite() || l32_tail {
        failures.push("V not in L^{3/2}".into());
    }
    if !(kato_neg.norm < 4.0 * PI) {
        failures.push(format!("negative part too large: ||V_-||_K0 = {} >= 4*pi", kato_neg.norm));
    }
    let class_pass = failures.is_empty();
    if !nonneg {
        failures.push("V is negative somewhere (V >= 0 fails)".into());
    }
    if !radial_sign {
        failures.push("x.grad V > 0 somewhere (V not radially nonincreasing)".into());
    }
    for n in &lr {
        if !n.norm.is_finite() || n.tail_warning {
            let q = n.exponent.map_or("inf".to_string(), |q| q.to_string());
            failures.push(format!("x.grad V not in L^{q}"));
        }
    }
    let theorem_pass = failures.is_empty();
    Ok(PotentialAudit {
        kato_norm: kato.norm,
        kato_argmax_radius: kato.argmax_radius,
        kato_norm_negative_part: kato_neg.norm,
        l32_norm: l32,
        nonneg,
        radial_derivative_sign: radial_sign,
        x_grad_v_lr_norms: lr,
        kato_class_pass: class_pass,
        theorem_hypotheses_pass: theorem_pass,
        failures,
        warnings,
    })
}

/// Default exponents at which `x·∇V` is audited.
pub const DEFAULT_AUDIT_EXPONENTS: [f64; 3] = [1.5, 2.0, f64::INFINITY];

/// `E`, `E₀` and the `Λ`-norm of a field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energies<T> {
    pub energy: T,
    pub energy_free: T,
    pub lambda_norm_sq: T,
    pub grad_sq: T,
    pub potential_term: T,
    pub nonlinear: T,
}

/// `∫ V |u|²`.
pub fn potential_term<T: Real>(u: &RadialField<T>, v: &[T]) -> Result<T> {
    u.grid().check_len(v.len(), "potential")?;
    Ok(u.values()
        .iter()
        .zip(v)
        .zip(u.grid().weights())
        .fold(T::zero(), |acc, ((z, &vi), &w)| acc + w * vi * z.norm_sqr()))
}

/// `E = ½‖∇u‖² − P/(2p) + ½∫V|u|²`, `E₀` without the last term, and
/// `‖Λu‖² = ‖∇u‖² + ∫V|u|²`.
pub fn energy<T: Real>(u: &RadialField<T>, v: &PotentialSpec, kern: &RieszKernel<T>, p: T) -> Result<Energies<T>> {
    energy_sampled(u, &v.sample(u.grid()), kern, p)
}

/// [`energy`] with `V` already sampled at the nodes.
pub fn energy_sampled<T: Real>(u: &RadialField<T>, v: &[T], kern: &RieszKernel<T>, p: T) -> Result<Energies<T>> {
    let half = T::cst(0.5);
    let grad_sq = grad_norm_sq(u);
    let nonlinear = kern.potential_energy(u, p)?;
    let pot = potential_term(u, v)?;
    let e0 = half * grad_sq - nonlinear / (T::cst(2.0) * p);
    Ok(Energies {
        energy: e0 + half * pot,
        energy_free: e0,
        lambda_norm_sq: grad_sq + pot,
        grad_sq,
        potential_term: pot,
        nonlinear,
    })
}

/// Named potentials that satisfy every hypothesis of the scattering theorem.
pub fn shipped_repulsive() -> Vec<(&'static str, PotentialSpec)> {
    vec![
        ("repulsive-gaussian", PotentialSpec::gaussian(1.0, 1.0)),
        ("weak-wide-gaussian", PotentialSpec::gaussian(0.2, 3.0)),
        (
            "truncated-inverse-cube",
            PotentialSpec::TruncatedInversePower { amplitude: 1.0, power: 3.0, core_radius: 1.0 },
        ),
    ]
}

/// Named potentials that violate at least one hypothesis, with the expected reason.
pub fn shipped_counterexamples() -> Vec<(&'static str, PotentialSpec, &'static str)> {
    vec![
        ("attractive-gaussian", PotentialSpec::gaussian(-1.0, 1.0), "V >= 0 fails"),
        (
            "deep-attractive-gaussian",
            PotentialSpec::gaussian(-6.0, 1.0),
            "negative part too large",
        ),
        (
            "coulomb-tail",
            PotentialSpec::TruncatedInversePower { amplitude: 1.0, power: 1.0, core_radius: 1.0 },
            "not in L^{3/2}",
        ),
        (
            "repulsive-shell",
            PotentialSpec::Table { radii: vec![0.0, 2.0, 4.0], values: vec![0.0, 1.0, 0.0] },
            "not radially nonincreasing",
        ),
    ]
}
