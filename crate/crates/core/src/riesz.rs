//! Riesz potential `I_γ ∗ g = ∫ g(y) |x − y|^{γ−3} dy` for radial `g`.
//!
//! Integrating the kernel over the sphere `|y| = s` gives the radial kernel
//!
//! `k(r, s) = 2π / ((γ−1) r s) · [(r+s)^{γ−1} − |r−s|^{γ−1}]`,
//!
//! with the logarithmic limit `2π/(rs)·log((r+s)/|r−s|)` at `γ = 1` and
//! `4π/max(r, s)` at `γ = 2`. Then `(I_γ ∗ g)(r) = ∫₀^∞ k(r,s) g(s) s² ds`.
//!
//! The integrand is even in `s` once `g` is, so the plain trapezoid sum over the
//! nodes is spectrally accurate away from `s = r`. The `|r − s|^{γ−1}` term is
//! not smooth there; its node is dropped and replaced by the two leading terms
//! of the generalized Euler–Maclaurin expansion (see [`SingularCorrection`]).
//! The resulting operator is symmetric in the weighted inner product.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{RadialField, RadialGrid};
use crate::quad::{zeta, SingularCorrection};
use crate::scalar::Real;

/// Version tag written into kernel sidecar files.
pub const KERNEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"HRTRZKRN";

#[derive(Clone, Debug)]
enum Representation<T: Real> {
    /// Row-major `n × n`, row `i` applied to `g` gives `(I_γ ∗ g)(r_i)`.
    Dense(Vec<T>),
    /// Newton's theorem: prefix and suffix sums plus the corrected diagonal.
    Newton,
}

/// Radial Riesz convolution operator on a fixed grid.
#[derive(Clone, Debug)]
pub struct RieszKernel<T: Real> {
    gamma: T,
    grid: RadialGrid<T>,
    repr: Representation<T>,
    /// Correction weights for the diagonal and its two neighbours, per row.
    diag: Vec<[T; 3]>,
    origin: OriginRule<T>,
}

#[derive(Clone, Debug)]
struct OriginRule<T: Real> {
    beta: T,
    value_weight: T,
    curvature_weight: T,
}

/// `k(r, s)` in closed form for `r ≠ s`.
pub fn radial_kernel(gamma: f64, r: f64, s: f64) -> f64 {
    use std::f64::consts::PI;
    if gamma == 2.0 {
        return 4.0 * PI / r.max(s);
    }
    if gamma == 1.0 {
        return 2.0 * PI / (r * s) * ((r + s) / (r - s).abs()).ln();
    }
    let beta = gamma - 1.0;
    2.0 * PI / (beta * r * s) * ((r + s).powf(beta) - (r - s).abs().powf(beta))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 3.0 {
        Ok(())
    } else {
        Err(Error::OutOfModel(format!("gamma must lie in (0, 3) (got {gamma})")))
    }
}

impl<T: Real> RieszKernel<T> {
    /// Builds the operator. `γ = 2` uses the `O(n)` Newton path, anything else a
    /// dense matrix.
    pub fn build(gamma: T, grid: &RadialGrid<T>) -> Result<Self> {
        let g = gamma.to_f64_lossy();
        check_gamma(g)?;
        if g == 2.0 {
            Self::build_newton(gamma, grid)
        } else {
            Self::build_dense(gamma, grid)
        }
    }

    /// Dense matrix form for any admissible `γ` (including `γ = 2`).
    pub fn build_dense(gamma: T, grid: &RadialGrid<T>) -> Result<Self> {
        let g = gamma.to_f64_lossy();
        check_gamma(g)?;
        let n = grid.n();
        let h = grid.dr().to_f64_lossy();
        let nodes: Vec<f64> = grid.nodes().iter().map(|x| x.to_f64_lossy()).collect();
        let diag = diagonal_rule(g, &nodes, h);
        let beta = g - 1.0;
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut matrix = vec![T::zero(); n * n];
        for (i, row) in matrix.chunks_mut(n).enumerate() {
            let r = nodes[i];
            for (j, entry) in row.iter_mut().enumerate() {
                let s = nodes[j];
                // s² k(r,s) ds, split into smooth and singular parts.
                let value = if g == 1.0 {
                    let smooth = two_pi * s / r * (r + s).ln();
                    if i == j {
                        smooth
                    } else {
                        smooth - two_pi * s / r * (r - s).abs().ln()
                    }
                } else {
                    let pref = two_pi * s / (beta * r);
                    if i == j {
                        pref * (r + s).powf(beta)
                    } else {
                        pref * ((r + s).powf(beta) - (r - s).abs().powf(beta))
                    }
                };
                *entry = T::cst(value * h);
            }
            let [lo, mid, hi] = diag[i];
            row[i] = row[i] + T::cst(mid);
            if i > 0 {
                row[i - 1] = row[i - 1] + T::cst(lo);
            }
            if i + 1 < n {
                row[i + 1] = row[i + 1] + T::cst(hi);
            }
        }
        Ok(Self {
            gamma,
            grid: grid.clone(),
            repr: Representation::Dense(matrix),
            diag: diag.iter().map(|d| d.map(T::cst)).collect(),
            origin: origin_rule(g, h),
        })
    }

    /// Newton-theorem form, `γ = 2` only.
    pub fn build_newton(gamma: T, grid: &RadialGrid<T>) -> Result<Self> {
        let g = gamma.to_f64_lossy();
        if g != 2.0 {
            return Err(Error::InvalidArgument(format!("Newton path needs gamma = 2 (got {g})")));
        }
        let h = grid.dr().to_f64_lossy();
        let nodes: Vec<f64> = grid.nodes().iter().map(|x| x.to_f64_lossy()).collect();
        let diag = diagonal_rule(g, &nodes, h);
        Ok(Self {
            gamma,
            grid: grid.clone(),
            repr: Representation::Newton,
            diag: diag.iter().map(|d| d.map(T::cst)).collect(),
            origin: origin_rule(g, h),
        })
    }

    #[inline]
    pub fn gamma(&self) -> T {
        self.gamma
    }

    #[inline]
    pub fn grid(&self) -> &RadialGrid<T> {
        &self.grid
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Representation::Dense(_))
    }

    /// `(I_γ ∗ g)(r_i)` at every node.
    pub fn convolve(&self, g: &[T]) -> Result<Vec<T>> {
        self.grid.check_len(g.len(), "density")?;
        let n = g.len();
        match &self.repr {
            Representation::Dense(m) => Ok(m
                .chunks(n)
                .map(|row| row.iter().zip(g).fold(T::zero(), |acc, (&k, &x)| acc + k * x))
                .collect()),
            Representation::Newton => {
                let nodes = self.grid.nodes();
                let h = self.grid.dr();
                let four_pi = T::cst(4.0) * T::PI();
                // inner_i = Σ_{j<i} s_j² g_j, outer_i = Σ_{j>i} s_j g_j.
                let mut out = vec![T::zero(); n];
                let mut inner = T::zero();
                for i in 0..n {
                    out[i] = four_pi * h * inner / nodes[i];
                    inner = inner + nodes[i] * nodes[i] * g[i];
                }
                let mut outer = T::zero();
                for i in (0..n).rev() {
                    out[i] = out[i] + four_pi * h * outer;
                    outer = outer + nodes[i] * g[i];
                }
                for i in 0..n {
                    let [lo, mid, hi] = self.diag[i];
                    // Smooth part on the diagonal node: 2π s (2r)/r · h.
                    let mut extra = (four_pi * nodes[i] * h + mid) * g[i];
                    if i > 0 {
                        extra = extra + lo * g[i - 1];
                    }
                    if i + 1 < n {
                        extra = extra + hi * g[i + 1];
                    }
                    out[i] = out[i] + extra;
                }
                Ok(out)
            }
        }
    }

    /// `(I_γ ∗ g)(0) = 4π ∫₀^∞ s^{γ−1} g(s) ds`.
    pub fn convolve_at_origin(&self, g: &[T]) -> Result<T> {
        self.grid.check_len(g.len(), "density")?;
        let nodes = self.grid.nodes();
        let h = self.grid.dr();
        let rule = &self.origin;
        let sum = nodes
            .iter()
            .zip(g)
            .fold(T::zero(), |acc, (&s, &x)| acc + s.powf(rule.beta) * x);
        let g0 = (T::cst(4.0) * g[0] - g[1]) / T::cst(3.0);
        let g2 = T::cst(2.0) * (g[1] - g[0]) / (T::cst(3.0) * h * h);
        let four_pi = T::cst(4.0) * T::PI();
        Ok(four_pi * (h * sum + rule.value_weight * g0 + rule.curvature_weight * g2))
    }

    /// Convenience wrapper on fields: the imaginary part of `g` is ignored.
    pub fn convolve_field(&self, g: &RadialField<T>) -> Result<Vec<T>> {
        if g.grid() != &self.grid {
            return Err(Error::GridMismatch("density and kernel use different grids".into()));
        }
        let re: Vec<T> = g.values().iter().map(|z| z.re).collect();
        self.convolve(&re)
    }

    /// `P(u) = ∫ (I_γ ∗ |u|^p) |u|^p dx`.
    pub fn potential_energy(&self, u: &RadialField<T>, p: T) -> Result<T> {
        if u.grid() != &self.grid {
            return Err(Error::GridMismatch("field and kernel use different grids".into()));
        }
        let density = power_density(u, p);
        let conv = self.convolve(&density)?;
        Ok(weighted_dot(&self.grid, &conv, &density))
    }

    /// `(∫ (I_γ ∗ f) g dx)` for real profiles.
    pub fn bilinear(&self, f: &[T], g: &[T]) -> Result<T> {
        let conv = self.convolve(f)?;
        self.grid.check_len(g.len(), "second argument")?;
        Ok(weighted_dot(&self.grid, &conv, g))
    }

    /// Writes the kernel to a binary sidecar file keyed by `(γ, n, r_max, version)`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        file.write_all(MAGIC).map_err(io)?;
        file.write_all(&KERNEL_FORMAT_VERSION.to_le_bytes()).map_err(io)?;
        file.write_all(&self.gamma.to_f64_lossy().to_le_bytes()).map_err(io)?;
        file.write_all(&(self.grid.n() as u64).to_le_bytes()).map_err(io)?;
        file.write_all(&self.grid.r_max().to_f64_lossy().to_le_bytes()).map_err(io)?;
        let dense = self.is_dense() as u8;
        file.write_all(&[dense]).map_err(io)?;
        if let Representation::Dense(m) = &self.repr {
            for x in m {
                file.write_all(&x.to_f64_lossy().to_le_bytes()).map_err(io)?;
            }
        }
        file.flush().map_err(io)
    }

    /// Loads a sidecar written by [`save`](Self::save); rejects files whose key
    /// does not match `(gamma, grid)`.
    pub fn load(path: &Path, gamma: T, grid: &RadialGrid<T>) -> Result<Self> {
        let io = |e: std::io::Error| Error::Format(e.to_string());
        let mut file = std::io::BufReader::new(std::fs::File::open(path).map_err(io)?);
        let mut magic = [0u8; 8];
        file.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a kernel sidecar".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        file.read_exact(&mut b4).map_err(io)?;
        let version = u32::from_le_bytes(b4);
        file.read_exact(&mut b8).map_err(io)?;
        let g = f64::from_le_bytes(b8);
        file.read_exact(&mut b8).map_err(io)?;
        let n = u64::from_le_bytes(b8) as usize;
        file.read_exact(&mut b8).map_err(io)?;
        let r_max = f64::from_le_bytes(b8);
        if version != KERNEL_FORMAT_VERSION
            || g != gamma.to_f64_lossy()
            || n != grid.n()
            || r_max != grid.r_max().to_f64_lossy()
        {
            return Err(Error::Format(format!(
                "sidecar key (v{version}, gamma {g}, n {n}, r_max {r_max}) does not match request"
            )));
        }
        let mut flag = [0u8; 1];
        file.read_exact(&mut flag).map_err(io)?;
        let mut kernel = Self::build_newton_or_shell(gamma, grid)?;
        if flag[0] == 1 {
            let mut m = Vec::with_capacity(n * n);
            for _ in 0..n * n {
                file.read_exact(&mut b8).map_err(io)?;
                m.push(T::cst(f64::from_le_bytes(b8)));
            }
            kernel.repr = Representation::Dense(m);
        } else if g != 2.0 {
            return Err(Error::Format("sidecar without matrix for gamma != 2".into()));
        }
        Ok(kernel)
    }

    fn build_newton_or_shell(gamma: T, grid: &RadialGrid<T>) -> Result<Self> {
        let g = gamma.to_f64_lossy();
        check_gamma(g)?;
        let h = grid.dr().to_f64_lossy();
        let nodes: Vec<f64> = grid.nodes().iter().map(|x| x.to_f64_lossy()).collect();
        let diag = diagonal_rule(g, &nodes, h);
        Ok(Self {
            gamma,
            grid: grid.clone(),
            repr: Representation::Newton,
            diag: diag.iter().map(|d| d.map(T::cst)).collect(),
            origin: origin_rule(g, h),
        })
    }
}

/// `|u|^p` at the nodes.
pub fn power_density<T: Real>(u: &RadialField<T>, p: T) -> Vec<T> {
    u.values().iter().map(|z| z.norm().powf(p)).collect()
}

fn weighted_dot<T: Real>(grid: &RadialGrid<T>, a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .zip(grid.weights())
        .fold(T::zero(), |acc, ((&x, &y), &w)| acc + w * x * y)
}

/// Corrections replacing the dropped singular node in row `i`:
/// weights on `g_{i−1}, g_i, g_{i+1}`.
///
/// The singular part of row `i` is `c(s)|r_i − s|^β` with
/// `c(s) = −2π s g(s)/(β r_i)` (`−2π s g(s)/r_i` times a log for `β = 0`); its
/// second derivative is taken by the three-point stencil on `s g(s)`, with
/// `s g(s)` odd about `0` and zero at `r_max`.
fn diagonal_rule(gamma: f64, nodes: &[f64], h: f64) -> Vec<[f64; 3]> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let beta = gamma - 1.0;
    let (corr, scale) = if gamma == 1.0 {
        (SingularCorrection::logarithmic(), 1.0)
    } else {
        (SingularCorrection::algebraic(beta), 1.0 / beta)
    };
    let vw = corr.value_weight(h);
    let cw = corr.curvature_weight(h) / (h * h);
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let r = nodes[i];
            let coef = -two_pi * scale / r;
            let lo = if i > 0 { coef * cw * nodes[i - 1] } else { 0.0 };
            let hi = if i + 1 < n { coef * cw * nodes[i + 1] } else { 0.0 };
            let mid = coef * (vw * r - 2.0 * cw * r);
            [lo, mid, hi]
        })
        .collect()
}

/// Half-line corrected trapezoid for `∫₀^∞ s^β g(s) ds` with `g` even.
fn origin_rule<T: Real>(gamma: f64, h: f64) -> OriginRule<T> {
    let beta = gamma - 1.0;
    OriginRule {
        beta: T::cst(beta),
        value_weight: T::cst(-zeta(-beta) * h.powf(beta + 1.0)),
        curvature_weight: T::cst(-0.5 * zeta(-beta - 2.0) * h.powf(beta + 3.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_with_breaks};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn bump(r: f64) -> f64 {
        (-r * r).exp() * (1.0 + 0.5 * r * r)
    }

    /// Independent adaptive-quadrature value of `∫ k(r,s) g(s) s² ds`.
    fn reference(gamma: f64, r: f64, g: impl Fn(f64) -> f64) -> f64 {
        // s = r ∓ t² on either side smooths the |r − s|^{γ−1} singularity; the gap
        // t² is passed exactly so the kernel never sees r − s rounded to zero.
        let k = |s: f64, gap: f64| {
            if gamma == 2.0 {
                4.0 * PI / r.max(s)
            } else if gamma == 1.0 {
                2.0 * PI / (r * s) * ((r + s).ln() - gap.ln())
            } else {
                let b = gamma - 1.0;
                2.0 * PI / (b * r * s) * ((r + s).powf(b) - gap.powf(b))
            }
        };
        let f = |s: f64, gap: f64| k(s, gap) * g(s) * s * s * 2.0 * gap.sqrt();
        let left = integrate(|t: f64| f(r - t * t, t * t), 0.0, r.sqrt(), 1e-14);
        let right = integrate(|t: f64| f(r + t * t, t * t), 0.0, (12.0 - r).sqrt(), 1e-14);
        left + right
    }

    #[test]
    fn closed_forms() {
        assert!((radial_kernel(1.0, 1.0, 2.0) - PI * 3f64.ln()).abs() < 1e-14);
        assert!((radial_kernel(2.0, 1.0, 3.0) - 4.0 * PI / 3.0).abs() < 1e-14);
        // Generic formula at γ → 2 reproduces Newton.
        let near = radial_kernel(2.0 + 1e-9, 1.0, 3.0);
        assert!((near - 4.0 * PI / 3.0).abs() < 1e-6);
        for gamma in [0.5, 1.0, 1.5, 2.5] {
            for (r, s) in [(0.3, 1.7), (2.0, 0.1), (5.0, 4.9)] {
                let k = radial_kernel(gamma, r, s);
                assert!(k > 0.0);
                assert!((k - radial_kernel(gamma, s, r)).abs() <= 1e-14 * k);
            }
        }
    }

    #[test]
    fn rejects_gamma_outside_model() {
        let grid = RadialGrid::<f64>::new(10.0, 64).unwrap();
        for gamma in [0.0, 3.0, -1.0, 4.0] {
            assert!(matches!(RieszKernel::build(gamma, &grid), Err(Error::OutOfModel(_))));
        }
        assert!(RieszKernel::build_newton(1.5, &grid).is_err());
    }

    #[test]
    fn matches_adaptive_quadrature() {
        let grid = RadialGrid::<f64>::new(12.0, 600).unwrap();
        let g: Vec<f64> = grid.nodes().iter().map(|&r| bump(r)).collect();
        for gamma in [0.5, 1.0, 1.5, 2.0, 2.5] {
            let kern = RieszKernel::build_dense(gamma, &grid).unwrap();
            let h = kern.convolve(&g).unwrap();
            for i in [0usize, 10, 49, 150, 400] {
                let r = grid.nodes()[i];
                let exact = reference(gamma, r, bump);
                assert!((h[i] - exact).abs() < 1e-7 * exact, "gamma {gamma}, r {r}: {} vs {exact}", h[i]);
            }
            let origin = kern.convolve_at_origin(&g).unwrap();
            let exact = 4.0
                * PI
                * integrate_with_breaks(|s: f64| s.powf(gamma - 1.0) * bump(s), 0.0, 12.0, &[1.0], 1e-14);
            assert!((origin - exact).abs() < 1e-7 * exact, "gamma {gamma}: origin {origin} vs {exact}");
        }
    }

    #[test]
    fn convergence_order_exceeds_second() {
        let err = |n: usize, gamma: f64| {
            let grid = RadialGrid::<f64>::new(12.0, n).unwrap();
            let g: Vec<f64> = grid.nodes().iter().map(|&r| bump(r)).collect();
            let h = RieszKernel::build_dense(gamma, &grid).unwrap().convolve(&g).unwrap();
            let i = (n + 1) / 12 - 1; // r = 1
            (h[i] - reference(gamma, grid.nodes()[i], bump)).abs()
        };
        for gamma in [0.5, 1.5, 2.5] {
            let order = (err(119, gamma) / err(239, gamma)).log2();
            assert!(order > 3.0, "gamma {gamma}: order {order}");
        }
    }

    #[test]
    fn newton_path_matches_dense() {
        let grid = RadialGrid::<f64>::new(15.0, 512).unwrap();
        let fast = RieszKernel::build(2.0, &grid).unwrap();
        let dense = RieszKernel::build_dense(2.0, &grid).unwrap();
        assert!(!fast.is_dense() && dense.is_dense());
        let g: Vec<f64> = grid.nodes().iter().map(|&r| (r * 1.3).sin().abs() * (-r).exp()).collect();
        let a = fast.convolve(&g).unwrap();
        let b = dense.convolve(&g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn zero_and_scaling() {
        let grid = RadialGrid::<f64>::new(10.0, 256).unwrap();
        let kern = RieszKernel::build(1.5, &grid).unwrap();
        assert!(kern.convolve(&vec![0.0; 256]).unwrap().iter().all(|&x| x == 0.0));
        let u = RadialField::from_fn(&grid, |r| (-r * r / 2.0).exp());
        let p1 = kern.potential_energy(&u, 3.0).unwrap();
        let p2 = kern.potential_energy(&u.scaled_real(2.0), 3.0).unwrap();
        assert!(p1 > 0.0);
        assert!((p2 - 64.0 * p1).abs() < 1e-12 * p2);
        assert_eq!(kern.potential_energy(&RadialField::zeros(&grid), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = RadialGrid::<f64>::new(10.0, 64).unwrap();
        let b = RadialGrid::<f64>::new(10.0, 65).unwrap();
        let kern = RieszKernel::build(2.0, &a).unwrap();
        assert!(matches!(kern.convolve(&vec![1.0; 65]), Err(Error::GridMismatch(_))));
        assert!(kern.potential_energy(&RadialField::zeros(&b), 2.0).is_err());
    }

    #[test]
    fn sidecar_roundtrip() {
        let dir = std::env::temp_dir().join(format!("riesz-sidecar-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let grid = RadialGrid::<f64>::new(8.0, 48).unwrap();
        let kern = RieszKernel::build(0.5, &grid).unwrap();
        let path = dir.join("k.bin");
        kern.save(&path).unwrap();
        let back = RieszKernel::load(&path, 0.5, &grid).unwrap();
        let g: Vec<f64> = grid.nodes().iter().map(|&r| bump(r)).collect();
        assert_eq!(kern.convolve(&g).unwrap(), back.convolve(&g).unwrap());
        assert!(RieszKernel::load(&path, 1.5, &grid).is_err());
        let other = RadialGrid::<f64>::new(8.0, 49).unwrap();
        assert!(RieszKernel::load(&path, 0.5, &other).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bilinear_form_is_symmetric(
            gamma in prop::sample::select(vec![0.5, 1.0, 1.5, 2.0, 2.5]),
            seed_f in prop::collection::vec(-1.0f64..1.0, 6),
            seed_g in prop::collection::vec(-1.0f64..1.0, 6),
        ) {
            let grid = RadialGrid::<f64>::new(10.0, 200).unwrap();
            let profile = |c: &[f64], r: f64| {
                c.iter().enumerate().map(|(k, a)| a * (-(r - k as f64).powi(2)).exp()).sum::<f64>()
            };
            let f: Vec<f64> = grid.nodes().iter().map(|&r| profile(&seed_f, r)).collect();
            let g: Vec<f64> = grid.nodes().iter().map(|&r| profile(&seed_g, r)).collect();
            let kern = RieszKernel::build(gamma, &grid).unwrap();
            let fg = kern.bilinear(&f, &g).unwrap();
            let gf = kern.bilinear(&g, &f).unwrap();
            let scale = kern.bilinear(&f.iter().map(|x| x.abs()).collect::<Vec<_>>(), &g.iter().map(|x| x.abs()).collect::<Vec<_>>()).unwrap();
            prop_assert!((fg - gf).abs() <= 1e-10 * scale.max(1e-300));
        }

        #[test]
        fn positive_density_gives_positive_potential(
            gamma in 0.2f64..2.8,
            centers in prop::collection::vec(0.0f64..6.0, 3),
        ) {
            let grid = RadialGrid::<f64>::new(10.0, 150).unwrap();
            let g: Vec<f64> = grid.nodes().iter()
                .map(|&r| centers.iter().map(|c| (-(r - c).powi(2)).exp()).sum())
                .collect();
            let h = RieszKernel::build(gamma, &grid).unwrap().convolve(&g).unwrap();
            prop_assert!(h.iter().all(|&x| x > 0.0));
        }
    }
}
