//! Virial/Morawetz weights, the identities `z′ = zp`, `zp′ = zpp`, localized
//! coercivity and the scattering monitor.
//!
//! `z(t) = ∫ a|u|²`, `z′(t) = 2 Im ∫ (∇a·∇u) ū`, and
//!
//! `z″ = 4∫a″|∂_r u|² − ∫Δ²a|u|² − 4(½ − 1/p)∫(I_γ∗|u|^p)|u|^p Δa`
//! `     − (2(3−γ)/p) ∫∫ (x−y)·(∇a(x)−∇a(y)) |x−y|^{γ−5} |u(x)|^p |u(y)|^p`
//! `     − 2∫ ∂_rV ∂_ra |u|²`.
//!
//! For `a = r²` this collapses to `8‖∇u‖² − (4B/p)P(u) − 4∫ r ∂_rV |u|²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{ab_exponents, ModelParams};
use crate::grid::{grad_norm_sq, l2_norm_sq, mass_in_ball, DerivativeScheme, RadialField, RadialGrid};
use crate::groundstate::{delta_prime, GroundStateResult};
use crate::potentials::{energy_sampled, PotentialSpec};
use crate::quad::{kronrod_nodes, SingularCorrection};
use crate::riesz::{power_density, RieszKernel};
use crate::scalar::{Numeric, Real};

/// Cutoff equal to 1 on `r ≤ R/2`, `cos²(π(r/R − 1/2))` on `(R/2, R)`, 0 beyond.
pub fn chi_cutoff(r: f64, radius: f64) -> f64 {
    let x = r / radius;
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        (PI * (x - 0.5)).cos().powi(2)
    }
}

/// The localization cutoff of the scattering criterion; same profile as [`chi_cutoff`].
pub fn eta_cutoff(r: f64, radius: f64) -> f64 {
    chi_cutoff(r, radius)
}

/// Which virial weight to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `a = r²` on the whole grid.
    Quadratic,
    /// `a = r²` inside `R/2`, `R r − R²/4` outside, smoothed over `R/2 ± band`.
    Truncated { radius: f64, band: Option<f64> },
}

/// Closed-form `[a, a′, a″, a‴, a⁗]` of the truncated weight.
///
/// On the band `[R/2 − δ, R/2 + δ]`, `a″ = 2(1 − S(x))` with the quintic
/// smoothstep `S(x) = 6x⁵ − 15x⁴ + 10x³`, `x = (r − R/2 + δ)/(2δ)`, so `a″` is
/// `C²` and `Δ²a` is continuous. Outside the band `a′ = R`.
pub fn truncated_profile(r: f64, radius: f64, band: f64) -> [f64; 5] {
    let r0 = radius / 2.0 - band;
    let r1 = radius / 2.0 + band;
    let w = 2.0 * band;
    if r <= r0 {
        return [r * r, 2.0 * r, 2.0, 0.0, 0.0];
    }
    let x = ((r.min(r1)) - r0) / w;
    let s_int = x.powi(6) - 3.0 * x.powi(5) + 2.5 * x.powi(4);
    let s_int2 = x.powi(7) / 7.0 - x.powi(6) / 2.0 + x.powi(5) / 2.0;
    let d = r.min(r1) - r0;
    let a_band = r0 * r0 + 2.0 * r0 * d + d * d - 2.0 * w * w * s_int2;
    let a1_band = 2.0 * r0 + 2.0 * d - 2.0 * w * s_int;
    if r >= r1 {
        return [a_band + radius * (r - r1), radius, 0.0, 0.0, 0.0];
    }
    let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
    let s1 = 30.0 * x * x * (1.0 - x) * (1.0 - x);
    let s2 = 60.0 * x * (2.0 * x * x - 3.0 * x + 1.0);
    [a_band, a1_band, 2.0 * (1.0 - s), -2.0 * s1 / w, -2.0 * s2 / (w * w)]
}

/// Virial weight sampled on a grid, with `Δa = a″ + 2a′/r` and `Δ²a = a⁗ + 4a‴/r`.
#[derive(Debug, Clone)]
pub struct MorawetzWeight<T: Real> {
    pub spec: WeightSpec,
    grid: RadialGrid<T>,
    pub a: Vec<T>,
    pub a1: Vec<T>,
    pub a2: Vec<T>,
    pub lap: Vec<T>,
    pub bilap: Vec<T>,
}

impl<T: Real> MorawetzWeight<T> {
    pub fn quadratic(grid: &RadialGrid<T>) -> Self {
        Self::from_profile(WeightSpec::Quadratic, grid, |r| [r * r, 2.0 * r, 2.0, 0.0, 0.0])
    }

    /// Truncated weight with the default band `R/100`.
    pub fn truncated(radius: f64, grid: &RadialGrid<T>) -> Result<Self> {
        Self::truncated_with_band(radius, radius / 100.0, grid)
    }

    pub fn truncated_with_band(radius: f64, band: f64, grid: &RadialGrid<T>) -> Result<Self> {
        let r_max = grid.r_max().to_f64_lossy();
        if !(radius > 0.0 && radius < r_max) {
            return Err(Error::InvalidArgument(format!("weight radius must lie in (0, r_max = {r_max}) (got {radius})")));
        }
        if !(band > 0.0 && band < radius / 2.0) {
            return Err(Error::InvalidArgument(format!("band must lie in (0, R/2) (got {band})")));
        }
        Ok(Self::from_profile(WeightSpec::Truncated { radius, band: Some(band) }, grid, |r| {
            truncated_profile(r, radius, band)
        }))
    }

    pub fn from_spec(spec: WeightSpec, grid: &RadialGrid<T>) -> Result<Self> {
        match spec {
            WeightSpec::Quadratic => Ok(Self::quadratic(grid)),
            WeightSpec::Truncated { radius, band } => {
                Self::truncated_with_band(radius, band.unwrap_or(radius / 100.0), grid)
            }
        }
    }

    fn from_profile(spec: WeightSpec, grid: &RadialGrid<T>, f: impl Fn(f64) -> [f64; 5]) -> Self {
        let n = grid.n();
        let (mut a, mut a1, mut a2, mut lap, mut bilap) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &r in grid.nodes() {
            let r = r.to_f64_lossy();
            let [v0, v1, v2, v3, v4] = f(r);
            a.push(T::cst(v0));
            a1.push(T::cst(v1));
            a2.push(T::cst(v2));
            lap.push(T::cst(v2 + 2.0 * v1 / r));
            bilap.push(T::cst(v4 + 4.0 * v3 / r));
        }
        Self { spec, grid: grid.clone(), a, a1, a2, lap, bilap }
    }

    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    /// `[a, a′, a″, a‴, a⁗]` at an arbitrary radius.
    pub fn profile(&self, r: f64) -> [f64; 5] {
        match self.spec {
            WeightSpec::Quadratic => [r * r, 2.0 * r, 2.0, 0.0, 0.0],
            WeightSpec::Truncated { radius, band } => truncated_profile(r, radius, band.unwrap_or(radius / 100.0)),
        }
    }
}

/// Precomputed operators for `z`, `zp`, `zpp` along a trajectory.
#[derive(Debug, Clone)]
pub struct MorawetzOperator<T: Real> {
    pub weight: MorawetzWeight<T>,
    gamma: f64,
    p: T,
    v: Vec<T>,
    dv: Vec<T>,
    /// Row `i` against `f = |u|^p` gives `∫ s² Ω(r_i, s) f(s) ds`; `None` for `a = r²`.
    nonlocal: Option<Vec<T>>,
    /// `(r, 4π w Δ²a(r))` on Kronrod panels covering the band, where `Δ²a ≠ 0`.
    band_rule: Vec<(f64, f64)>,
}

/// The five contributions to `zpp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZppTerms {
    pub kinetic: f64,
    pub bilaplacian: f64,
    pub local_nonlinear: f64,
    pub nonlocal: f64,
    pub potential: f64,
    pub total: f64,
}

impl<T: Numeric> MorawetzOperator<T> {
    pub fn new(weight: MorawetzWeight<T>, v: &PotentialSpec, params: &ModelParams<T>) -> Self {
        let grid = weight.grid().clone();
        let gamma = params.gamma.to_f64_lossy();
        let (nonlocal, band_rule) = match weight.spec {
            WeightSpec::Quadratic => (None, Vec::new()),
            WeightSpec::Truncated { radius, band } => {
                let band = band.unwrap_or(radius / 100.0);
                (Some(nonlocal_matrix(&weight, gamma)), band_rule(radius, band, grid.dr().to_f64_lossy()))
            }
        };
        Self { gamma, p: params.p, v: v.sample(&grid), dv: v.sample_derivative(&grid), nonlocal, band_rule, weight }
    }

    /// Forces the dense symmetrized kernel even for `a = r²`.
    pub fn with_dense_nonlocal(mut self) -> Self {
        self.nonlocal = Some(nonlocal_matrix(&self.weight, self.gamma));
        self
    }

    /// `(z, zp)`.
    pub fn z(&self, u: &RadialField<T>) -> Result<(f64, f64)> {
        check_grid(u.grid(), self.weight.grid())?;
        let grid = u.grid();
        let z = u
            .values()
            .iter()
            .zip(&self.weight.a)
            .zip(grid.weights())
            .fold(T::zero(), |acc, ((q, &a), &w)| acc + w * a * q.norm_sqr());
        // Im(∂_r u ū) r² = Im(v′ v̄) with v = r u.
        let vp = grid.v_derivative(u.values());
        let h = grid.dr();
        let acc = u
            .values()
            .iter()
            .zip(grid.nodes())
            .zip(&self.weight.a1)
            .enumerate()
            .fold(T::zero(), |acc, (i, ((q, &r), &a1))| {
                let v = *q * r;
                acc + a1 * (vp[i + 1] * v.conj()).im
            });
        let zp = T::cst(8.0) * T::PI() * h * acc;
        Ok((z.to_f64_lossy(), zp.to_f64_lossy()))
    }

    /// Exact time derivative of the discrete `zp` along the semi-discrete
    /// flow `u_t = i(Δu − Vu + N(u)u)`; differs from [`zpp`](Self::zpp)
    /// only by quadrature error.
    pub fn zp_rate(&self, u: &RadialField<T>, kern: &RieszKernel<T>) -> Result<f64> {
        check_grid(u.grid(), self.weight.grid())?;
        let grid = u.grid();
        let f = power_density(u, self.p);
        let conv = kern.convolve(&f)?;
        let lap = grid.laplacian(u.values());
        let two = T::cst(2.0);
        let i_unit = num_complex::Complex::new(T::zero(), T::one());
        let ut: Vec<_> = (0..grid.n())
            .map(|i| {
                let q = u.values()[i];
                let m = q.norm();
                let nl = if m > T::zero() { conv[i] * m.powf(self.p - two) } else { T::zero() };
                i_unit * (lap[i] + q * (nl - self.v[i]))
            })
            .collect();
        let dv = grid.v_derivative(u.values());
        let dvt = grid.v_derivative(&ut);
        let acc = (0..grid.n()).fold(T::zero(), |acc, i| {
            let r = grid.nodes()[i];
            let v = u.values()[i] * r;
            let vt = ut[i] * r;
            acc + self.weight.a1[i] * (dvt[i + 1] * v.conj() + dv[i + 1] * vt.conj()).im
        });
        Ok((T::cst(8.0) * T::PI() * grid.dr() * acc).to_f64_lossy())
    }

    pub fn zpp(&self, u: &RadialField<T>, kern: &RieszKernel<T>) -> Result<ZppTerms> {
        check_grid(u.grid(), self.weight.grid())?;
        let grid = u.grid();
        let w = grid.weights();
        let p = self.p.to_f64_lossy();
        let ur = grid.radial_derivative(u.values(), DerivativeScheme::Spectral);
        let mut kinetic = T::zero();
        let mut bilap = T::zero();
        let mut potential = T::zero();
        for i in 0..grid.n() {
            let m = u.values()[i].norm_sqr();
            kinetic = kinetic + w[i] * self.weight.a2[i] * ur[i].norm_sqr();
            potential = potential + w[i] * self.dv[i] * self.weight.a1[i] * m;
        }
        if !self.band_rule.is_empty() {
            bilap = band_integral(grid, u, &self.band_rule);
        }
        let f = power_density(u, self.p);
        let conv = kern.convolve(&f)?;
        let local = (0..grid.n()).fold(T::zero(), |acc, i| acc + w[i] * conv[i] * f[i] * self.weight.lap[i]);
        let nonlocal_integral = match &self.nonlocal {
            None => {
                // Ω = 8π k for a = r², so the double integral is 2P.
                let pe = (0..grid.n()).fold(T::zero(), |acc, i| acc + w[i] * conv[i] * f[i]);
                T::cst(2.0) * pe
            }
            Some(m) => {
                let n = grid.n();
                let h = grid.dr();
                m.chunks(n).enumerate().fold(T::zero(), |acc, (i, row)| {
                    let r = grid.nodes()[i];
                    let inner = row.iter().zip(&f).fold(T::zero(), |s, (&k, &x)| s + k * x);
                    acc + r * r * h * f[i] * inner
                })
            }
        };
        let kinetic = 4.0 * kinetic.to_f64_lossy();
        let bilaplacian = -bilap.to_f64_lossy();
        let local_nonlinear = -4.0 * (0.5 - 1.0 / p) * local.to_f64_lossy();
        let nonlocal = -(2.0 * (3.0 - self.gamma) / p) * nonlocal_integral.to_f64_lossy();
        let potential = -2.0 * potential.to_f64_lossy();
        Ok(ZppTerms {
            kinetic,
            bilaplacian,
            local_nonlinear,
            nonlocal,
            potential,
            total: kinetic + bilaplacian + local_nonlinear + nonlocal + potential,
        })
    }
}

/// Panels of width at most `2·dr` on `[R/2 − δ, R/2 + δ]`, so every sine mode
/// is integrated to round-off.
fn band_rule(radius: f64, band: f64, dr: f64) -> Vec<(f64, f64)> {
    let (lo, hi) = (radius / 2.0 - band, radius / 2.0 + band);
    let panels = ((hi - lo) / (2.0 * dr)).ceil().max(1.0) as usize;
    let width = (hi - lo) / panels as f64;
    (0..panels)
        .flat_map(|k| kronrod_nodes(lo + k as f64 * width, lo + (k + 1) as f64 * width))
        .map(|(r, w)| {
            let [_, _, _, a3, a4] = truncated_profile(r, radius, band);
            (r, 4.0 * PI * w * (a4 + 4.0 * a3 / r))
        })
        .collect()
}

/// `Σ_q w_q |v(r_q)|²` with `v = r u` from its sine interpolant.
fn band_integral<T: Real>(grid: &RadialGrid<T>, u: &RadialField<T>, rule: &[(f64, f64)]) -> T {
    let s = grid.sine_coefficients(u.values());
    let scale = T::cst(2.0) / T::from_usize_lossy(grid.n() + 1);
    let theta0 = std::f64::consts::PI / grid.r_max().to_f64_lossy();
    rule.iter().fold(T::zero(), |acc, &(r, w)| {
        // sin(kθ) by the Chebyshev recurrence.
        let theta = theta0 * r;
        let c2 = T::cst(2.0 * theta.cos());
        let (mut prev, mut cur) = (T::zero(), T::cst(theta.sin()));
        let mut v = num_complex::Complex::new(T::zero(), T::zero());
        for &sk in &s {
            v = v + sk * cur;
            let next = c2 * cur - prev;
            prev = cur;
            cur = next;
        }
        acc + T::cst(w) * (v * scale).norm_sqr()
    })
}

fn check_grid<T: Real>(a: &RadialGrid<T>, b: &RadialGrid<T>) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch("field and weight use different grids".into()))
    }
}

/// Dense matrix of `s² Ω(r, s) ds` where
/// `Ω = (8π²/(rs)) [c₁((r+s)^β − |r−s|^β)/β + c₂((r+s)^{β−2} − |r−s|^{β−2})/(β−2)]`,
/// `β = γ − 1`, `h = a′/(2r)`, `c₁ = h(r) + h(s)`, `c₂ = (r² − s²)(h(r) − h(s))`.
///
/// Near `s = r` the singular part is `φ(s)|r − s|^β` with
/// `φ(s) = −(8π² s/r)[c₁/β + (r + s) q(s)/(β − 2)]`, `q(s) = (h(r) − h(s))/(r − s)`,
/// handled like the Riesz kernel diagonal.
fn nonlocal_matrix<T: Real>(weight: &MorawetzWeight<T>, gamma: f64) -> Vec<T> {
    let grid = weight.grid();
    let n = grid.n();
    let h = grid.dr().to_f64_lossy();
    let nodes: Vec<f64> = grid.nodes().iter().map(|x| x.to_f64_lossy()).collect();
    let prof: Vec<[f64; 5]> = nodes.iter().map(|&r| weight.profile(r)).collect();
    let hw: Vec<f64> = nodes.iter().zip(&prof).map(|(&r, pr)| pr[1] / (2.0 * r)).collect();
    // h′ = a″/(2r) − a′/(2r²)
    let dhw: Vec<f64> = nodes.iter().zip(&prof).map(|(&r, pr)| pr[2] / (2.0 * r) - pr[1] / (2.0 * r * r)).collect();
    let beta = gamma - 1.0;
    let log_case = gamma == 1.0;
    let corr = if log_case { SingularCorrection::logarithmic() } else { SingularCorrection::algebraic(beta) };
    let vw = corr.value_weight(h);
    let cw = corr.curvature_weight(h) / (h * h);
    let c8 = 8.0 * PI * PI;
    let mut m = vec![T::zero(); n * n];
    for (i, row) in m.chunks_mut(n).enumerate() {
        let r = nodes[i];
        let q = |j: usize| if j == i { dhw[i] } else { (hw[i] - hw[j]) / (r - nodes[j]) };
        let phi = |j: usize, s: f64| {
            let c1 = hw[i] + hw[j];
            if log_case {
                -c8 * s / r * c1
            } else {
                -c8 * s / r * (c1 / beta + (r + s) * q(j) / (beta - 2.0))
            }
        };
        for j in 0..n {
            let s = nodes[j];
            let c1 = hw[i] + hw[j];
            let c2 = (r * r - s * s) * (hw[i] - hw[j]);
            let value = if j == i {
                // Smooth part only.
                let x = if log_case { c1 * (2.0 * r).ln() } else { c1 * (2.0 * r).powf(beta) / beta };
                let y = if log_case { r * q(i) } else { 0.0 };
                c8 / (r * s) * s * s * (x + y)
            } else {
                let d = (r - s).abs();
                let x = if log_case {
                    c1 * ((r + s) / d).ln()
                } else {
                    c1 * ((r + s).powf(beta) - d.powf(beta)) / beta
                };
                let y = c2 * ((r + s).powf(beta - 2.0) - d.powf(beta - 2.0)) / (beta - 2.0);
                c8 / (r * s) * s * s * (x + y)
            };
            row[j] = T::cst(value * h);
        }
        let phi_i = phi(i, r);
        row[i] = row[i] + T::cst(vw * phi_i - 2.0 * cw * phi_i);
        if i > 0 {
            row[i - 1] = row[i - 1] + T::cst(cw * phi(i - 1, nodes[i - 1]));
        }
        if i + 1 < n {
            row[i + 1] = row[i + 1] + T::cst(cw * phi(i + 1, nodes[i + 1]));
        }
    }
    m
}

/// `(z, zp)` for a single field.
pub fn morawetz_z<T: Numeric>(u: &RadialField<T>, w: &MorawetzWeight<T>) -> Result<(f64, f64)> {
    let params = ModelParams { p: T::cst(3.0), gamma: T::cst(2.0), epsilon: T::zero() };
    MorawetzOperator::new(w.clone(), &PotentialSpec::Zero, &params).z(u)
}

/// `zpp` for a single field; prefer [`MorawetzOperator`] along trajectories.
pub fn morawetz_zpp<T: Numeric>(
    u: &RadialField<T>,
    w: &MorawetzWeight<T>,
    v: &PotentialSpec,
    kern: &RieszKernel<T>,
    params: &ModelParams<T>,
) -> Result<ZppTerms> {
    MorawetzOperator::new(w.clone(), v, params).zpp(u, kern)
}

/// Result of the localized coercivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub radius: f64,
    /// `P(u)M(u)^{σ_c} / (P(Q)M(Q)^{σ_c})`.
    pub threshold_ratio: f64,
    pub hypothesis_satisfied: bool,
    pub delta: f64,
    pub delta_prime: f64,
    /// `‖∇(χ_R u)‖² − (B/2p)P(χ_R u)`.
    pub lhs: f64,
    /// `δ′ P(χ_R u)`.
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Quantities of `χ_R u` needed by coercivity and averaging.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Localized {
    pub radius: f64,
    pub mass_in_ball: f64,
    pub p_energy: f64,
    pub grad_sq: f64,
}

pub fn localize<T: Numeric>(u: &RadialField<T>, radius: f64, kern: &RieszKernel<T>, p: T) -> Result<Localized> {
    let r_max = u.grid().r_max().to_f64_lossy();
    let chi_u = u.multiplied_by(|r| T::cst(chi_cutoff(r.to_f64_lossy(), radius)));
    Ok(Localized {
        radius,
        mass_in_ball: mass_in_ball(u, T::cst(radius.min(r_max)))?.to_f64_lossy(),
        p_energy: kern.potential_energy(&chi_u, p)?.to_f64_lossy(),
        grad_sq: grad_norm_sq(&chi_u).to_f64_lossy(),
    })
}

/// Coercivity from precomputed integrals: `threshold = P(u)M(u)^{σ_c}`.
pub fn coercivity_from<T: Numeric>(gs: &GroundStateResult<T>, threshold: f64, loc: &Localized) -> CoercivityReport {
    let b = gs.exponents.b;
    let p = gs.params.p.to_f64_lossy();
    let ratio = threshold / gs.thresholds.pq_mq_sigma;
    let satisfied = ratio < 1.0;
    let delta = 1.0 - ratio;
    let dp = if satisfied { delta_prime(delta, b, p) } else { f64::NAN };
    let lhs = loc.grad_sq - b / (2.0 * p) * loc.p_energy;
    let rhs = dp * loc.p_energy;
    CoercivityReport {
        radius: loc.radius,
        threshold_ratio: ratio,
        hypothesis_satisfied: satisfied,
        delta,
        delta_prime: dp,
        lhs,
        rhs,
        margin: lhs - rhs,
        pass: satisfied && lhs >= rhs,
    }
}

/// `‖∇(χ_R u)‖² − (B/2p)P(χ_R u) ≥ δ′P(χ_R u)` with `δ = 1 − P(u)M(u)^{σ_c}/(P(Q)M(Q)^{σ_c})`.
pub fn coercivity_check<T: Numeric>(
    u: &RadialField<T>,
    gs: &GroundStateResult<T>,
    kern: &RieszKernel<T>,
    radius: f64,
) -> Result<CoercivityReport> {
    let p = gs.params.p;
    let threshold = kern.potential_energy(u, p)?.to_f64_lossy() * l2_norm_sq(u).to_f64_lossy().powf(gs.exponents.sigma_c);
    let loc = localize(u, radius, kern, p)?;
    Ok(coercivity_from(gs, threshold, &loc))
}

/// What the sampler records along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Virial weight for `z`, `zp`, `zpp`; `None` skips them.
    pub weight: Option<WeightSpec>,
    /// Radii for localized mass and `P(χ_R u)`.
    pub radii: Vec<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { weight: Some(WeightSpec::Quadratic), radii: vec![10.0] }
    }
}

/// Time series of conserved quantities and Morawetz diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiagnosticsSeries {
    pub t: Vec<f64>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub energy_free: Vec<f64>,
    pub p_energy: Vec<f64>,
    pub grad_sq: Vec<f64>,
    pub lambda_sq: Vec<f64>,
    pub z: Vec<f64>,
    pub zp: Vec<f64>,
    pub zpp: Vec<f64>,
    pub radii: Vec<f64>,
    /// `mass_in_ball[k][i]` is the mass in `B(0, radii[k])` at `t[i]`.
    pub mass_in_ball: Vec<Vec<f64>>,
    pub localized_p: Vec<Vec<f64>>,
    pub localized_grad_sq: Vec<Vec<f64>>,
    pub exported_mass: Vec<f64>,
    /// `P(u)M(u)^{σ_c}`.
    pub threshold_track: Vec<f64>,
    /// First sampled time at which outgoing waves reach the edge region.
    pub boundary_contact: Option<f64>,
}

impl DiagnosticsSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn radius_index(&self, radius: f64) -> Option<usize> {
        self.radii.iter().position(|&r| (r - radius).abs() <= 1e-12 * radius.max(1.0))
    }
}

/// Records one row of [`DiagnosticsSeries`] per call.
pub struct DiagnosticsSampler<'a, T: Numeric> {
    kern: &'a RieszKernel<T>,
    v: Vec<T>,
    p: T,
    sigma_c: f64,
    op: Option<MorawetzOperator<T>>,
    pub series: DiagnosticsSeries,
}

impl<'a, T: Numeric> DiagnosticsSampler<'a, T> {
    pub fn new(
        cfg: &DiagnosticsConfig,
        v: &PotentialSpec,
        kern: &'a RieszKernel<T>,
        params: &ModelParams<T>,
    ) -> Result<Self> {
        let grid = kern.grid();
        let pf = ModelParams { p: params.p.to_f64_lossy(), gamma: params.gamma.to_f64_lossy(), epsilon: 0.0 };
        let sigma_c = ab_exponents(&pf).map(|ab| ab.sigma_c).unwrap_or(f64::NAN);
        let op = match cfg.weight {
            Some(spec) => Some(MorawetzOperator::new(MorawetzWeight::from_spec(spec, grid)?, v, params)),
            None => None,
        };
        let r_max = grid.r_max().to_f64_lossy();
        if let Some(bad) = cfg.radii.iter().find(|&&r| !(r > 0.0 && r <= r_max)) {
            return Err(Error::InvalidArgument(format!("diagnostic radius {bad} outside (0, r_max]")));
        }
        let k = cfg.radii.len();
        Ok(Self {
            kern,
            v: v.sample(grid),
            p: params.p,
            sigma_c,
            op,
            series: DiagnosticsSeries {
                radii: cfg.radii.clone(),
                mass_in_ball: vec![Vec::new(); k],
                localized_p: vec![Vec::new(); k],
                localized_grad_sq: vec![Vec::new(); k],
                ..Default::default()
            },
        })
    }

    pub fn record(&mut self, t: f64, u: &RadialField<T>, exported: f64) -> Result<()> {
        let e = energy_sampled(u, &self.v, self.kern, self.p)?;
        let s = &mut self.series;
        let mass = l2_norm_sq(u).to_f64_lossy();
        s.t.push(t);
        s.mass.push(mass);
        s.energy.push(e.energy.to_f64_lossy());
        s.energy_free.push(e.energy_free.to_f64_lossy());
        let pe = e.nonlinear.to_f64_lossy();
        s.p_energy.push(pe);
        s.grad_sq.push(e.grad_sq.to_f64_lossy());
        s.lambda_sq.push(e.lambda_norm_sq.to_f64_lossy());
        s.threshold_track.push(pe * mass.powf(self.sigma_c));
        s.exported_mass.push(exported);
        match &self.op {
            Some(op) => {
                let (z, zp) = op.z(u)?;
                s.z.push(z);
                s.zp.push(zp);
                s.zpp.push(op.zpp(u, self.kern)?.total);
            }
            None => {
                s.z.push(f64::NAN);
                s.zp.push(f64::NAN);
                s.zpp.push(f64::NAN);
            }
        }
        for k in 0..s.radii.len() {
            let loc = localize(u, s.radii[k], self.kern, self.p)?;
            s.mass_in_ball[k].push(loc.mass_in_ball);
            s.localized_p[k].push(loc.p_energy);
            s.localized_grad_sq[k].push(loc.grad_sq);
        }
        Ok(())
    }
}

/// Coercivity at every sample of a series, for every recorded radius.
pub fn coercivity_series<T: Numeric>(series: &DiagnosticsSeries, gs: &GroundStateResult<T>) -> Vec<Vec<CoercivityReport>> {
    (0..series.radii.len())
        .map(|k| {
            (0..series.len())
                .map(|i| {
                    let loc = Localized {
                        radius: series.radii[k],
                        mass_in_ball: series.mass_in_ball[k][i],
                        p_energy: series.localized_p[k][i],
                        grad_sq: series.localized_grad_sq[k][i],
                    };
                    coercivity_from(gs, series.threshold_track[i], &loc)
                })
                .collect()
        })
        .collect()
}

/// Largest `|finite difference − target|` over interior samples, for the pairs
/// `(d/dt z, zp)` and `(d/dt zp, zpp)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityDefects {
    pub dz_minus_zp: f64,
    pub dzp_minus_zpp: f64,
    /// Scales for relative reading: `max|zp|`, `max|zpp|`.
    pub zp_scale: f64,
    pub zpp_scale: f64,
}

/// Centered differences on a uniformly sampled series.
pub fn identity_defects(series: &DiagnosticsSeries) -> Result<IdentityDefects> {
    let n = series.len();
    if n < 3 {
        return Err(Error::InvalidArgument("need at least three samples".into()));
    }
    let mut d1: f64 = 0.0;
    let mut d2: f64 = 0.0;
    for i in 1..n - 1 {
        let dt = series.t[i + 1] - series.t[i - 1];
        d1 = d1.max(((series.z[i + 1] - series.z[i - 1]) / dt - series.zp[i]).abs());
        d2 = d2.max(((series.zp[i + 1] - series.zp[i - 1]) / dt - series.zpp[i]).abs());
    }
    let scale = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(IdentityDefects { dz_minus_zp: d1, dzp_minus_zpp: d2, zp_scale: scale(&series.zp), zpp_scale: scale(&series.zpp) })
}

/// Time average of `P(χ_R u)` against the bound `R/T + R^{−2B/3}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorawetzAverage {
    pub radius: f64,
    pub horizon: f64,
    pub average: f64,
    pub bound: f64,
    pub ratio: f64,
    /// First times at which `P(χ_R u)` drops below `P(χ_R u₀)·10^{−k}`, `k = 1, 2, …`.
    pub evacuation_times: Vec<(f64, f64)>,
}

pub fn morawetz_average<T: Numeric>(
    series: &DiagnosticsSeries,
    gs: &GroundStateResult<T>,
    radius: f64,
    horizon: f64,
) -> Result<MorawetzAverage> {
    let k = series
        .radius_index(radius)
        .ok_or_else(|| Error::InvalidArgument(format!("radius {radius} was not recorded")))?;
    let pl = &series.localized_p[k];
    let idx: Vec<usize> = (0..series.len()).filter(|&i| series.t[i] <= horizon + 1e-12).collect();
    if idx.len() < 2 {
        return Err(Error::InvalidArgument("need two samples inside the horizon".into()));
    }
    let mut integral = 0.0;
    for w in idx.windows(2) {
        integral += 0.5 * (pl[w[0]] + pl[w[1]]) * (series.t[w[1]] - series.t[w[0]]);
    }
    let span = series.t[*idx.last().expect("non-empty")] - series.t[idx[0]];
    let average = integral / span;
    let b = gs.exponents.b;
    let bound = radius / horizon + radius.powf(-2.0 * b / 3.0);
    let mut evacuation_times = Vec::new();
    let p0 = pl[idx[0]];
    let mut level = 0.1;
    for &i in &idx {
        while p0 > 0.0 && pl[i] < p0 * level && level > 1e-16 {
            evacuation_times.push((series.t[i], p0 * level));
            level *= 0.1;
        }
    }
    Ok(MorawetzAverage { radius, horizon, average, bound, ratio: average / bound, evacuation_times })
}

/// Localized-mass monitor for the scattering criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorReport {
    pub radius: f64,
    pub eps: f64,
    pub initial: f64,
    pub last: f64,
    pub min: f64,
    pub min_time: f64,
    /// `min ≤ ε²`.
    pub criterion_met: bool,
    /// `R · max |d/dt mass_in_ball|`.
    pub derivative_constant: f64,
    /// `10 · sup_t ‖u‖²_{H¹}`.
    pub derivative_allowance: f64,
    pub derivative_bound_ok: bool,
}

pub fn scattering_monitor(series: &DiagnosticsSeries, radius: f64, eps: f64) -> Result<MonitorReport> {
    let k = series
        .radius_index(radius)
        .ok_or_else(|| Error::InvalidArgument(format!("radius {radius} was not recorded")))?;
    let m = &series.mass_in_ball[k];
    if m.is_empty() {
        return Err(Error::InvalidArgument("empty series".into()));
    }
    let (mut min, mut min_time) = (f64::INFINITY, 0.0);
    for (i, &x) in m.iter().enumerate() {
        if x < min {
            min = x;
            min_time = series.t[i];
        }
    }
    let mut slope: f64 = 0.0;
    for i in 1..m.len() {
        let dt = series.t[i] - series.t[i - 1];
        if dt > 0.0 {
            slope = slope.max(((m[i] - m[i - 1]) / dt).abs());
        }
    }
    let h1 = (0..series.len()).map(|i| series.mass[i] + series.grad_sq[i]).fold(0.0, f64::max);
    let c = radius * slope;
    Ok(MonitorReport {
        radius,
        eps,
        initial: m[0],
        last: *m.last().expect("non-empty"),
        min,
        min_time,
        criterion_met: min <= eps * eps,
        derivative_constant: c,
        derivative_allowance: 10.0 * h1,
        derivative_bound_ok: c <= 10.0 * h1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;
    use num_complex::Complex;

    #[test]
    fn cutoff_profile() {
        assert_eq!(chi_cutoff(0.0, 10.0), 1.0);
        assert_eq!(chi_cutoff(5.0, 10.0), 1.0);
        assert_eq!(chi_cutoff(10.0, 10.0), 0.0);
        assert!((chi_cutoff(7.5, 10.0) - 0.5).abs() < 1e-15);
        let xs: Vec<f64> = (0..200).map(|k| k as f64 * 0.06).collect();
        assert!(xs.windows(2).all(|w| chi_cutoff(w[1], 10.0) <= chi_cutoff(w[0], 10.0)));
    }

    #[test]
    fn weight_regions() {
        let r_big = 10.0;
        let [a, a1, a2, ..] = truncated_profile(r_big / 4.0, r_big, 0.1);
        assert_eq!((a, a1, a2), (r_big * r_big / 16.0, r_big / 2.0, 2.0));
        let [_, a1, a2, a3, a4] = truncated_profile(2.0 * r_big, r_big, 0.1);
        assert!((a1 - r_big).abs() < 1e-12);
        assert_eq!((a2, a3, a4), (0.0, 0.0, 0.0));
        // Δa = 2R/r outside the band.
        let grid = RadialGrid::<f64>::new(40.0, 2048).unwrap();
        let w = MorawetzWeight::truncated(r_big, &grid).unwrap();
        for (i, &r) in grid.nodes().iter().enumerate() {
            if r > 6.0 {
                assert!((w.lap[i] - 2.0 * r_big / r).abs() < 1e-12);
                assert_eq!(w.bilap[i], 0.0);
            }
            if r < 4.5 {
                assert_eq!(w.lap[i], 6.0);
            }
        }
    }

    #[test]
    fn weight_invariants_and_consistency() {
        let grid = RadialGrid::<f64>::new(40.0, 4096).unwrap();
        for (radius, band) in [(10.0, 0.1), (10.0, 1.0), (20.0, 0.2)] {
            let w = MorawetzWeight::truncated_with_band(radius, band, &grid).unwrap();
            let h = grid.dr();
            for (i, &r) in grid.nodes().iter().enumerate() {
                assert!(w.a1[i] > 0.0);
                assert!(w.a1[i] <= (2.0 * r).max(radius) + 1e-12);
                assert!(w.a2[i] >= -1e-12);
            }
            // a′ vs centered difference of a, and a″ vs difference of a′.
            let mut worst: f64 = 0.0;
            for r in grid.nodes().iter().skip(1).take(grid.n() - 2) {
                let pm = truncated_profile(r - h, radius, band);
                let pp = truncated_profile(r + h, radius, band);
                let p0 = truncated_profile(*r, radius, band);
                worst = worst.max(((pp[0] - pm[0]) / (2.0 * h) - p0[1]).abs());
                worst = worst.max(((pp[1] - pm[1]) / (2.0 * h) - p0[2]).abs());
                worst = worst.max(((pp[2] - pm[2]) / (2.0 * h) - p0[3]).abs() * band * band);
            }
            assert!(worst < 50.0 * h * h, "R {radius} band {band}: {worst}");
        }
        assert!(MorawetzWeight::truncated(40.0, &grid).is_err());
        assert!(MorawetzWeight::truncated_with_band(10.0, 6.0, &grid).is_err());
    }

    #[test]
    fn real_field_has_no_momentum_and_gauge_invariance() {
        let grid = RadialGrid::<f64>::new(20.0, 512).unwrap();
        let u = RadialField::from_fn(&grid, |r| (-r * r).exp());
        let w = MorawetzWeight::truncated(8.0, &grid).unwrap();
        let (z, zp) = morawetz_z(&u, &w).unwrap();
        assert!(z > 0.0);
        assert!(zp.abs() < 1e-13 * z);
        let moving = RadialField::from_complex_fn(&grid, |r| Complex::from_polar((-r * r).exp(), 0.3 * r * r));
        let (z1, zp1) = morawetz_z(&moving, &w).unwrap();
        let (z2, zp2) = morawetz_z(&moving.scaled(Complex::from_polar(1.0, 1.1)), &w).unwrap();
        assert!((z1 - z2).abs() < 1e-13 * z1 && (zp1 - zp2).abs() < 1e-12 * zp1.abs());
    }

    #[test]
    fn momentum_matches_quadrature() {
        // u = e^{−r²} e^{i c r²}: zp = 2 ∫ a′ (2cr)|u|² dx with a′ = 2r.
        let c = 0.3;
        let grid = RadialGrid::<f64>::new(15.0, 1024).unwrap();
        let u = RadialField::from_complex_fn(&grid, |r| Complex::from_polar((-r * r).exp(), c * r * r));
        let (_, zp) = morawetz_z(&u, &MorawetzWeight::quadratic(&grid)).unwrap();
        let exact = integrate(|r: f64| 2.0 * 2.0 * r * 2.0 * c * r * (-2.0 * r * r).exp() * 4.0 * PI * r * r, 0.0, 15.0, 1e-14);
        assert!((zp - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn dilation_scaling_of_z() {
        let grid = RadialGrid::<f64>::new(30.0, 2048).unwrap();
        let w = MorawetzWeight::quadratic(&grid);
        let f = |r: f64| (-r * r / 2.0).exp();
        let (z1, _) = morawetz_z(&RadialField::from_fn(&grid, f), &w).unwrap();
        let (z2, _) = morawetz_z(&RadialField::from_fn(&grid, |r| f(2.0 * r)), &w).unwrap();
        assert!((z2 - z1 / 32.0).abs() < 1e-10 * z1);
    }

    fn params(p: f64, gamma: f64) -> ModelParams<f64> {
        ModelParams::with_default_epsilon(p, gamma).unwrap()
    }

    #[test]
    fn quadratic_zpp_reduces_to_virial() {
        let grid = RadialGrid::<f64>::new(15.0, 1024).unwrap();
        let u = RadialField::from_fn(&grid, |r| (-r * r / 2.0).exp());
        for (p, gamma) in [(3.0, 2.0), (2.5, 1.5), (4.0, 2.5), (3.0, 0.5), (2.0, 1.0)] {
            let kern = RieszKernel::build(gamma, &grid).unwrap();
            let v = PotentialSpec::gaussian(1.0, 1.5);
            let t = morawetz_zpp(&u, &MorawetzWeight::quadratic(&grid), &v, &kern, &params(p, gamma)).unwrap();
            let b = 3.0 * p - 3.0 - gamma;
            let grad = grad_norm_sq(&u);
            let pe = kern.potential_energy(&u, p).unwrap();
            let pot = integrate(|r: f64| 4.0 * r * v.derivative(r) * (-r * r).exp() * 4.0 * PI * r * r, 0.0, 15.0, 1e-14);
            let expected = 8.0 * grad - 4.0 * b / p * pe - pot;
            assert!((t.total - expected).abs() < 1e-8 * expected.abs().max(grad), "({p},{gamma}): {} vs {expected}", t.total);
        }
    }

    #[test]
    fn dense_symmetrized_kernel_reproduces_quadratic_case() {
        let grid = RadialGrid::<f64>::new(12.0, 600).unwrap();
        let u = RadialField::from_fn(&grid, |r| (-r * r / 2.0).exp() * (1.0 + 0.2 * r));
        for gamma in [0.5, 1.0, 1.5, 2.0, 2.5] {
            let pr = params(3.0, gamma);
            let kern = RieszKernel::build(gamma, &grid).unwrap();
            let fast = MorawetzOperator::new(MorawetzWeight::quadratic(&grid), &PotentialSpec::Zero, &pr);
            let dense = fast.clone().with_dense_nonlocal();
            let a = fast.zpp(&u, &kern).unwrap().nonlocal;
            let b = dense.zpp(&u, &kern).unwrap().nonlocal;
            assert!((a - b).abs() < 1e-10 * a.abs(), "gamma {gamma}: {a} vs {b}");
        }
    }

    #[test]
    fn nonlocal_term_matches_double_quadrature_for_truncated_weight() {
        // Oracle: ∫∫ r²s² f(r) f(s) Ω(r,s) by nested adaptive quadrature with the
        // s = r singularity removed by substitution.
        let radius = 6.0;
        let band = 0.6;
        let grid = RadialGrid::<f64>::new(12.0, 900).unwrap();
        let f = |r: f64| (-r * r / 4.0).exp();
        let u = RadialField::from_fn(&grid, |r| f(r).powf(1.0 / 3.0));
        for gamma in [0.5, 1.0, 1.5, 2.5] {
            let pr = params(3.0, gamma);
            let kern = RieszKernel::build(gamma, &grid).unwrap();
            let w = MorawetzWeight::truncated_with_band(radius, band, &grid).unwrap();
            let got = MorawetzOperator::new(w, &PotentialSpec::Zero, &pr).zpp(&u, &kern).unwrap().nonlocal;
            let hw = |r: f64| truncated_profile(r, radius, band)[1] / (2.0 * r);
            let beta = gamma - 1.0;
            let omega = |r: f64, s: f64, gap: f64| {
                let c1 = hw(r) + hw(s);
                let c2 = (r * r - s * s) * (hw(r) - hw(s));
                let x = if gamma == 1.0 {
                    c1 * ((r + s).ln() - gap.ln())
                } else {
                    c1 * ((r + s).powf(beta) - gap.powf(beta)) / beta
                };
                let y = c2 * ((r + s).powf(beta - 2.0) - gap.powf(beta - 2.0)) / (beta - 2.0);
                8.0 * PI * PI / (r * s) * (x + y)
            };
            let inner = |r: f64| {
                let g = |s: f64, gap: f64| s * s * f(s) * omega(r, s, gap) * 2.0 * gap.sqrt();
                integrate(|t: f64| g(r - t * t, t * t), 0.0, r.sqrt(), 1e-10)
                    + integrate(|t: f64| g(r + t * t, t * t), 0.0, (12.0 - r).sqrt(), 1e-10)
            };
            let outer = integrate(|r: f64| r * r * f(r) * inner(r), 0.0, 12.0, 1e-9);
            let expected = -(2.0 * (3.0 - gamma) / 3.0) * outer;
            assert!((got - expected).abs() < 1e-9 * expected.abs(), "gamma {gamma}: {got} vs {expected}");
        }
    }

    #[test]
    fn four_term_formula_matches_semidiscrete_rate() {
        // Independent of time stepping: d/dt zp along u_t = i(Δu − Vu + Nu).
        let grid = RadialGrid::<f64>::new(30.0, 1536).unwrap();
        let u = RadialField::from_complex_fn(&grid, |r| Complex::from_polar(0.4 * (-r * r / 6.0).exp(), 0.2 * r * r));
        let v = PotentialSpec::gaussian(1.0, 1.5);
        for (p, gamma) in [(3.0, 2.0), (2.5, 1.5), (3.0, 1.0), (4.0, 0.5)] {
            let pr = params(p, gamma);
            let kern = RieszKernel::build(gamma, &grid).unwrap();
            for w in [MorawetzWeight::quadratic(&grid), MorawetzWeight::truncated(8.0, &grid).unwrap()] {
                let op = MorawetzOperator::new(w, &v, &pr);
                let a = op.zpp(&u, &kern).unwrap().total;
                let b = op.zp_rate(&u, &kern).unwrap();
                assert!((a - b).abs() < 1e-6 * b.abs(), "({p},{gamma}) {:?}: {a} vs {b}", op.weight.spec);
            }
        }
    }

    #[test]
    fn sign_of_potential_term_for_repulsive_v() {
        let grid = RadialGrid::<f64>::new(20.0, 512).unwrap();
        let u = RadialField::from_fn(&grid, |r| (-(r - 2.0) * (r - 2.0)).exp());
        let kern = RieszKernel::build(2.0, &grid).unwrap();
        for w in [MorawetzWeight::quadratic(&grid), MorawetzWeight::truncated(8.0, &grid).unwrap()] {
            let t = morawetz_zpp(&u, &w, &PotentialSpec::gaussian(1.0, 2.0), &kern, &params(3.0, 2.0)).unwrap();
            assert!(t.potential >= 0.0);
        }
    }

    #[test]
    fn monitor_and_average_on_synthetic_series() {
        let mut s = DiagnosticsSeries { radii: vec![10.0], ..Default::default() };
        s.mass_in_ball = vec![Vec::new()];
        s.localized_p = vec![Vec::new()];
        for i in 0..=10 {
            let t = i as f64;
            s.t.push(t);
            s.mass.push(1.0);
            s.grad_sq.push(1.0);
            s.mass_in_ball[0].push((-t).exp());
            s.localized_p[0].push(0.0);
        }
        let m = scattering_monitor(&s, 10.0, 0.01).unwrap();
        assert!(m.criterion_met && m.derivative_bound_ok);
        assert_eq!(m.min_time, 10.0);
        assert!(scattering_monitor(&s, 5.0, 0.1).is_err());
    }
}
