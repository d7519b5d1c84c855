//! One-dimensional quadrature helpers.
//!
//! * [`integrate`]: adaptive Gauss–Kronrod (7/15) for closed-form integrands.
//! * [`zeta`]: Riemann zeta on the real line, needed by the corrected trapezoid
//!   rules for kernels with an algebraic or logarithmic singularity on a node.

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::cst(0.5);
    let c = (a + b) * half;
    let h = (b - a) * half;
    let fc = f(c);
    let mut kronrod = fc * T::cst(WGK[7]);
    let mut gauss = fc * T::cst(WG[3]);
    for j in 0..7 {
        let dx = h * T::cst(XGK[j]);
        let pair = f(c - dx) + f(c + dx);
        kronrod = kronrod + pair * T::cst(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::cst(WG[j / 2]);
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Nodes and weights of the 15-point Kronrod rule on `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(c, WGK[7] * h); 15];
    for j in 0..7 {
        out[2 * j] = (c - h * XGK[j], WGK[j] * h);
        out[2 * j + 1] = (c + h * XGK[j], WGK[j] * h);
    }
    out
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Globally adaptive: the panel with the largest error estimate is bisected until
/// the summed estimate drops below `max(tol, round-off)` or 4000 panels are in use.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, tol: T) -> T {
    const MAX_PANELS: usize = 4000;
    if a == b {
        return T::zero();
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let (total, err) = panels
            .iter()
            .fold((T::zero(), T::zero()), |(s, t), p| (s + p.2, t + p.3));
        let floor = T::roundoff() * total.abs();
        if !(err > tol.max(floor)) || panels.len() >= MAX_PANELS {
            return total;
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].3.partial_cmp(&panels[j].3).unwrap_or(std::cmp::Ordering::Equal))
            .expect("non-empty");
        let (lo, hi, v, _) = panels.swap_remove(worst);
        let mid = (lo + hi) * T::cst(0.5);
        if mid <= lo || mid >= hi {
            // Panel cannot be split further; freeze it.
            panels.push((lo, hi, v, T::zero()));
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// [`integrate`] over consecutive panels split at the sorted `breaks` inside `(a, b)`.
pub fn integrate_with_breaks<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, breaks: &[T], tol: T) -> T {
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    let panels = T::from_usize_lossy(points.len() - 1);
    points
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / panels))
        .fold(T::zero(), |acc, x| acc + x)
}

const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
    43_867.0 / 798.0 / 6_402_373_705_728_000.0,
    -174_611.0 / 330.0 / 2_432_902_008_176_640_000.0,
];

/// Riemann zeta function for real `s ≠ 1`, by Euler–Maclaurin summation.
///
/// Accurate to about 1e-14 for `-8 ≤ s ≤ 8`.
pub fn zeta(s: f64) -> f64 {
    assert!(s != 1.0, "zeta has a pole at s = 1");
    const N: usize = 20;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Rising factorial s (s+1) ... (s+2k-2) times N^{-s-2k+1}.
    let mut rising = s;
    let mut power = n.powf(-s - 1.0);
    for (k, coeff) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if k > 0 {
            let j = (2 * k) as f64;
            rising *= (s + j - 1.0) * (s + j);
            power /= n * n;
        }
        sum += coeff * rising * power;
    }
    sum
}

/// `ζ'(−2) = −ζ(3)/(4π²)`.
pub const ZETA_PRIME_MINUS_TWO: f64 = -0.030_448_457_058_393_27;

/// Correction weights for the trapezoid rule applied to `f(x)|x − x₀|^β` with `x₀`
/// on a node and the singular node omitted:
///
/// `∫ f |x−x₀|^β = h Σ' f_j |x_j−x₀|^β + c₀ f(x₀) h^{β+1} + c₂ f''(x₀) h^{β+3} + O(h^{β+5})`.
///
/// For `β = 0` the kernel is read as `log|x − x₀|` and the weights multiply `h`
/// and `h³` (the `log h` dependence is folded into `c₀`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularCorrection {
    pub beta: f64,
    pub c0: f64,
    pub c2: f64,
    pub logarithmic: bool,
}

impl SingularCorrection {
    pub fn algebraic(beta: f64) -> Self {
        assert!(beta > -1.0, "singularity |x|^beta must be integrable");
        Self {
            beta,
            c0: -2.0 * zeta(-beta),
            c2: -zeta(-beta - 2.0),
            logarithmic: false,
        }
    }

    pub fn logarithmic() -> Self {
        Self { beta: 0.0, c0: f64::NAN, c2: ZETA_PRIME_MINUS_TWO, logarithmic: true }
    }

    /// Weight multiplying `f(x₀)` for spacing `h`.
    pub fn value_weight(&self, h: f64) -> f64 {
        if self.logarithmic {
            h * (h / (2.0 * std::f64::consts::PI)).ln()
        } else {
            self.c0 * h.powf(self.beta + 1.0)
        }
    }

    /// Weight multiplying `f''(x₀)` for spacing `h`.
    pub fn curvature_weight(&self, h: f64) -> f64 {
        if self.logarithmic {
            self.c2 * h * h * h
        } else {
            self.c2 * h.powf(self.beta + 3.0)
        }
    }

    /// Kernel value used off the singular node.
    pub fn kernel(&self, d: f64) -> f64 {
        if self.logarithmic {
            d.abs().ln()
        } else {
            d.abs().powf(self.beta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_reference_values() {
        let cases = [
            (2.0, PI * PI / 6.0),
            (0.0, -0.5),
            (-1.0, -1.0 / 12.0),
            (-3.0, 1.0 / 120.0),
            (-2.0, 0.0),
            (0.5, -1.460_354_508_809_586_8),
            (-0.5, -0.207_886_224_977_354_6),
            (3.0, 1.202_056_903_159_594_3),
        ];
        for (s, expected) in cases {
            assert!((zeta(s) - expected).abs() < 1e-12, "zeta({s}) = {}", zeta(s));
        }
        assert!((ZETA_PRIME_MINUS_TWO + zeta(3.0) / (4.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn gauss_kronrod_polynomial_and_gaussian() {
        let v = integrate(|x: f64| x.powi(6) - 2.0 * x, 0.0, 2.0, 1e-12);
        assert!((v - (128.0 / 7.0 - 4.0)).abs() < 1e-12);
        let g = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-13);
        assert!((g - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn breaks_handle_kinks() {
        let v = integrate_with_breaks(|x: f64| if x < 1.0 { 1.0 } else { 0.0 }, 0.0, 3.0, &[1.0], 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
    }

    fn corrected_sum(corr: SingularCorrection, f: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64, h: f64, x0: f64) -> f64 {
        let m = (12.0 / h) as i64;
        let mut s = 0.0;
        for j in -m..=m {
            if j == 0 {
                continue;
            }
            let x = x0 + j as f64 * h;
            s += h * f(x) * corr.kernel(x - x0);
        }
        s + corr.value_weight(h) * f(x0) + corr.curvature_weight(h) * f2(x0)
    }

    #[test]
    fn corrected_trapezoid_is_high_order() {
        let f = |x: f64| (-x * x).exp();
        let f2 = |x: f64| (4.0 * x * x - 2.0) * (-x * x).exp();
        for beta in [-0.5, 0.5, 1.0, 1.5] {
            // x = t² removes the endpoint singularity from the reference integral.
            let exact = 4.0 * integrate(|t: f64| f(t * t) * t.powf(2.0 * beta + 1.0), 0.0, 12f64.sqrt(), 1e-15);
            let corr = SingularCorrection::algebraic(beta);
            let e1 = (corrected_sum(corr, f, f2, 0.1, 0.0) - exact).abs();
            let e2 = (corrected_sum(corr, f, f2, 0.05, 0.0) - exact).abs();
            assert!(e1 < 1e-4, "beta {beta}: {e1}");
            let order = (e1 / e2).log2();
            assert!(order > beta + 4.0, "beta {beta}: order {order} ({e1:e} -> {e2:e})");
        }
        let exact = 8.0 * integrate(|t: f64| if t > 0.0 { f(t * t) * t * t.ln() } else { 0.0 }, 0.0, 12f64.sqrt(), 1e-15);
        let corr = SingularCorrection::logarithmic();
        let e1 = (corrected_sum(corr, f, f2, 0.1, 0.0) - exact).abs();
        let e2 = (corrected_sum(corr, f, f2, 0.05, 0.0) - exact).abs();
        assert!((e1 / e2).log2() > 4.0, "log: {e1:e} -> {e2:e}");
    }
}
