//! Exponent algebra of the intercritical Hartree problem.
//!
//! Everything here is a rational function of `(p, γ, ε)`, so the functions are
//! generic over [`ExactScalar`]: run them on `f64` for speed or on
//! `BigRational` to check the identities exactly. Perturbed exponents such as
//! `3⁻` and `4⁺` are the explicit rationals `3/(1+ε)` and `4/(1−2ε)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// Default pair-perturbation parameter.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// Nonlinearity power `p`, Riesz order `γ` and pair perturbation `ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams<T> {
    pub p: T,
    pub gamma: T,
    pub epsilon: T,
}

impl<T: ExactScalar> ModelParams<T> {
    pub fn new(p: T, gamma: T, epsilon: T) -> Result<Self> {
        if p < T::lit(2.0) {
            return Err(Error::OutOfModel(format!("p ≥ 2 required (got p = {p})")));
        }
        if !(gamma > T::zero() && gamma < T::lit(3.0)) {
            return Err(Error::OutOfModel(format!(
                "0 < gamma < 3 required (got gamma = {gamma})"
            )));
        }
        if epsilon < T::zero() || epsilon >= T::ratio(1, 10) {
            return Err(Error::OutOfModel(format!(
                "0 <= epsilon < 1/10 required (got epsilon = {epsilon})"
            )));
        }
        Ok(Self { p, gamma, epsilon })
    }

    pub fn with_default_epsilon(p: T, gamma: T) -> Result<Self> {
        Self::new(p, gamma, T::lit(DEFAULT_EPSILON))
    }

    /// `(5+γ)/3 < p < 3+γ`.
    pub fn is_intercritical(&self) -> bool {
        let three = T::lit(3.0);
        let lower = (T::lit(5.0) + self.gamma.clone()) / three.clone();
        let upper = three + self.gamma.clone();
        self.p > lower && self.p < upper
    }

    fn require_intercritical(&self) -> Result<()> {
        if self.is_intercritical() {
            Ok(())
        } else {
            Err(Error::OutOfModel(format!(
                "intercritical window (5+gamma)/3 < p < 3+gamma violated (p = {}, gamma = {})",
                self.p, self.gamma
            )))
        }
    }
}

impl ModelParams<f64> {
    pub fn to_f32(&self) -> ModelParams<f32> {
        ModelParams {
            p: self.p as f32,
            gamma: self.gamma as f32,
            epsilon: self.epsilon as f32,
        }
    }
}

/// A Lebesgue exponent that may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Exponent<T> {
    Finite(T),
    Infinite,
}

impl<T: ExactScalar> Exponent<T> {
    /// `1/q`, with `1/∞ = 0`.
    pub fn reciprocal(&self) -> T {
        match self {
            Exponent::Finite(q) => T::one() / q.clone(),
            Exponent::Infinite => T::zero(),
        }
    }

    fn at_least(&self, bound: &T) -> bool {
        match self {
            Exponent::Finite(q) => q >= bound,
            Exponent::Infinite => true,
        }
    }

    fn finite(&self) -> Option<&T> {
        match self {
            Exponent::Finite(q) => Some(q),
            Exponent::Infinite => None,
        }
    }

    pub fn approx_f64(&self) -> f64 {
        match self {
            Exponent::Finite(q) => q.approx_f64(),
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl<T> From<T> for Exponent<T> {
    fn from(value: T) -> Self {
        Exponent::Finite(value)
    }
}

/// `s_c = 3/2 − (γ+2)/(2(p−1))`.
pub fn critical_exponent<T: ExactScalar>(params: &ModelParams<T>) -> Result<T> {
    if params.p <= T::one() {
        return Err(Error::OutOfModel(format!(
            "critical exponent needs p > 1 (got p = {})",
            params.p
        )));
    }
    let two = T::lit(2.0);
    Ok(T::ratio(3, 2) - (params.gamma.clone() + two.clone()) / (two * (params.p.clone() - T::one())))
}

/// The Gagliardo–Nirenberg exponents `A`, `B` and `σ_c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbExponents<T> {
    pub a: T,
    pub b: T,
    pub sigma_c: T,
}

/// `A = 3+γ−p`, `B = 3p−(3+γ)`, `σ_c = (1−s_c)/s_c`.
pub fn ab_exponents<T: ExactScalar>(params: &ModelParams<T>) -> Result<AbExponents<T>> {
    let sc = critical_exponent(params)?;
    if !(sc > T::zero() && sc < T::one()) {
        return Err(Error::OutOfModel(format!(
            "s_c = {sc} outside (0, 1); sigma_c undefined or nonpositive"
        )));
    }
    let three = T::lit(3.0);
    let a = three.clone() + params.gamma.clone() - params.p.clone();
    let b = three.clone() * params.p.clone() - (three + params.gamma.clone());
    let sigma_c = (T::one() - sc.clone()) / sc;
    Ok(AbExponents { a, b, sigma_c })
}

/// `2/q + 3/r = 3/2` with `q ≥ 2` and `2 ≤ r ≤ 6`.
pub fn is_l2_admissible<T: ExactScalar>(q: &Exponent<T>, r: &Exponent<T>) -> bool {
    let (Some(rf), two) = (r.finite(), T::lit(2.0)) else {
        return false;
    };
    if !q.at_least(&two) || *rf < two || *rf > T::lit(6.0) {
        return false;
    }
    let lhs = two * q.reciprocal() + T::lit(3.0) * r.reciprocal();
    T::agrees(&lhs, &T::ratio(3, 2))
}

/// Scaling relation `2/q + 3/r = 3/2 − s` alone.
pub fn satisfies_hs_scaling<T: ExactScalar>(q: &Exponent<T>, r: &Exponent<T>, s: &T) -> bool {
    let lhs = T::lit(2.0) * q.reciprocal() + T::lit(3.0) * r.reciprocal();
    T::agrees(&lhs, &(T::ratio(3, 2) - s.clone()))
}

/// Scaling relation plus the ranges `q > 2/(1−s)`, `6/(3−2s) ≤ r < 6`.
pub fn is_hs_admissible<T: ExactScalar>(q: &Exponent<T>, r: &Exponent<T>, s: &T) -> bool {
    if !satisfies_hs_scaling(q, r, s) {
        return false;
    }
    let one = T::one();
    let q_ok = match q {
        Exponent::Infinite => true,
        Exponent::Finite(q) => *q > T::lit(2.0) / (one.clone() - s.clone()),
    };
    let r_ok = match r {
        Exponent::Infinite => false,
        Exponent::Finite(r) => {
            *r >= T::lit(6.0) / (T::lit(3.0) - T::lit(2.0) * s.clone()) && *r < T::lit(6.0)
        }
    };
    q_ok && r_ok
}

/// Exponents for the distant-past interpolation `1/r̄ = θ/l`, `1/ā = θ/k + (1−θ)/p̄`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistantPast<T> {
    pub theta: T,
    pub k: Exponent<T>,
    pub l: T,
    pub p_bar: T,
}

/// Every exponent used by the small-data and scattering-criterion arguments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentSet<T> {
    pub s_c: T,
    pub sigma_c: T,
    pub a: T,
    pub b: T,
    pub r_bar: T,
    pub a_bar: T,
    pub p_tilde: T,
    pub r3_minus: T,
    pub q4_plus: T,
    pub q: T,
    pub r: T,
    pub m: T,
    pub n: T,
    pub s: T,
    pub theta: T,
    pub theta_bar: T,
    pub distant: DistantPast<T>,
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Constraint(what()))
    }
}

/// Builds the full [`ExponentSet`] and checks every range constraint.
pub fn scattering_pairs<T: ExactScalar>(params: &ModelParams<T>) -> Result<ExponentSet<T>> {
    params.require_intercritical()?;
    let ab = ab_exponents(params)?;
    let s_c = critical_exponent(params)?;
    let p = params.p.clone();
    let g = params.gamma.clone();
    let eps = params.epsilon.clone();
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let pm1 = p.clone() - one.clone();

    let r_bar = T::lit(12.0) * pm1.clone() / (three.clone() + two.clone() * g.clone() - two.clone() * eps.clone());
    let a_bar = T::lit(8.0) * pm1.clone() / (one.clone() + two.clone() * eps.clone());
    ensure(one.clone() - two.clone() * eps.clone() > T::zero(), || {
        "4+ = 4/(1-2 eps) requires eps < 1/2".into()
    })?;
    let r3_minus = three.clone() / (one.clone() + eps.clone());
    let q4_plus = T::lit(4.0) / (one.clone() - two.clone() * eps.clone());
    let p_tilde = T::lit(12.0) * pm1.clone()
        / (T::lit(6.0) * p.clone() - T::lit(7.0) - two.clone() * eps.clone());
    ensure(r_bar > T::zero() && a_bar > T::zero(), || {
        format!("scattering pair must be positive (r_bar = {r_bar}, a_bar = {a_bar})")
    })?;
    ensure(
        p_tilde >= two && p_tilde <= T::lit(6.0),
        || format!("p_tilde = {p_tilde} outside [2, 6]"),
    )?;

    let q = T::lit(8.0) * (g.clone() + two.clone()) / (three.clone() * (one.clone() + two.clone() * eps.clone()));
    let r = T::lit(4.0) * (g.clone() + two.clone()) / (three.clone() + two.clone() * g.clone() - two.clone() * eps.clone());
    ensure(r >= two && r <= T::lit(6.0), || format!("r = {r} outside [2, 6]"))?;
    ensure(q >= two, || format!("q = {q} below 2"))?;
    let m = three.clone() * q.clone();
    let n = three.clone() * r.clone();
    let s = three.clone() * n.clone() / (three.clone() + n.clone());
    ensure(s >= two && s < three, || format!("s = {s} outside [2, 3)"))?;

    let theta = three.clone() * (r.clone() - two.clone()) / (two.clone() * r.clone());
    let theta_bar = two.clone() / r.clone();
    ensure(theta > T::zero() && theta < one, || {
        format!("theta = {theta} outside (0, 1)")
    })?;
    ensure(theta_bar > T::zero() && theta_bar < T::one(), || {
        format!("theta_bar = {theta_bar} outside (0, 1)")
    })?;
    ensure(theta < theta_bar, || {
        format!("theta = {theta} must stay below theta_bar = {theta_bar}")
    })?;

    let distant = distant_past_from(params, &r_bar)?;

    Ok(ExponentSet {
        s_c,
        sigma_c: ab.sigma_c,
        a: ab.a,
        b: ab.b,
        r_bar,
        a_bar,
        p_tilde,
        r3_minus,
        q4_plus,
        q,
        r,
        m,
        n,
        s,
        theta,
        theta_bar,
        distant,
    })
}

/// `θ`, `(k, l)` and `p̄` for the distant-past estimate.
pub fn distant_past_pairs<T: ExactScalar>(params: &ModelParams<T>) -> Result<DistantPast<T>> {
    params.require_intercritical()?;
    let two = T::lit(2.0);
    let r_bar = T::lit(12.0) * (params.p.clone() - T::one())
        / (T::lit(3.0) + two.clone() * params.gamma.clone() - two * params.epsilon.clone());
    distant_past_from(params, &r_bar)
}

fn distant_past_from<T: ExactScalar>(params: &ModelParams<T>, r_bar: &T) -> Result<DistantPast<T>> {
    let p = params.p.clone();
    let g = params.gamma.clone();
    let eps = params.epsilon.clone();
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let pm1 = p.clone() - one.clone();

    // p̄ > 2 ⇔ θ > θ₀; the denominator of p̄ stays positive iff θ < θ_den.
    let theta0 = (g.clone() + four.clone() - two.clone() * p.clone()) / pm1.clone();
    let theta_den = (two.clone() + g.clone()) / (three.clone() * pm1.clone());
    let l_lo = two.clone() / r_bar.clone();
    let l_hi = T::lit(6.0) / r_bar.clone();

    let theta = if p >= (g.clone() + four.clone()) / two.clone() {
        l_lo.clone()
    } else {
        let mut hi = l_hi.clone();
        if theta_den < hi {
            hi = theta_den.clone();
        }
        if one < hi {
            hi = one.clone();
        }
        let perturbed = theta0.clone() + eps.clone() * (hi - theta0.clone());
        if perturbed < l_lo {
            l_lo.clone()
        } else {
            perturbed
        }
    };

    ensure(theta > T::zero() && theta < one.clone(), || {
        format!("distant-past theta = {theta} outside (0, 1)")
    })?;
    ensure(theta > theta0, || {
        format!("p_bar > 2 needs theta > {theta0} (got {theta}; eps must be positive)")
    })?;
    ensure(theta < theta_den, || {
        format!("p_bar denominator vanishes: theta = {theta} >= {theta_den}")
    })?;
    ensure(theta >= l_lo && theta <= l_hi, || {
        format!("l = r_bar * theta outside [2, 6] (theta = {theta})")
    })?;

    // θ = 2/r̄ means l = 2 exactly; do not let `r̄·θ` round below the energy pair.
    let l = if theta == l_lo { two.clone() } else { r_bar.clone() * theta.clone() };
    let k = if T::agrees(&l, &two) {
        Exponent::Infinite
    } else {
        Exponent::Finite(four.clone() * l.clone() / (three.clone() * l.clone() - T::lit(6.0)))
    };
    let p_bar = four * (one - theta.clone()) * pm1.clone() / (two.clone() + g - three * theta.clone() * pm1);
    ensure(p_bar > two, || format!("p_bar = {p_bar} not above 2"))?;
    Ok(DistantPast { theta, k, l, p_bar })
}

/// Outcome of one algebraic identity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub pass: bool,
    /// `|lhs − rhs|` as `f64` (zero for exact arithmetic when the identity holds).
    pub defect: f64,
}

fn identity<T: ExactScalar>(name: &'static str, lhs: T, rhs: T) -> IdentityCheck {
    IdentityCheck {
        name,
        pass: T::agrees(&lhs, &rhs),
        defect: (lhs - rhs).abs().approx_f64(),
    }
}

fn predicate(name: &'static str, pass: bool) -> IdentityCheck {
    IdentityCheck { name, pass, defect: if pass { 0.0 } else { f64::NAN } }
}

impl<T: ExactScalar> ExponentSet<T> {
    /// Evaluates every identity the set is supposed to satisfy.
    pub fn check_identities(&self, params: &ModelParams<T>) -> Vec<IdentityCheck> {
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let l2 = |q: &T, r: &T| two.clone() / q.clone() + three.clone() / r.clone();
        let half3 = T::ratio(3, 2);
        let one = T::one();
        vec![
            identity("A+B=2p", self.a.clone() + self.b.clone(), two.clone() * params.p.clone()),
            identity(
                "A+2sigma_c=B*sigma_c",
                self.a.clone() + two.clone() * self.sigma_c.clone(),
                self.b.clone() * self.sigma_c.clone(),
            ),
            identity(
                "sigma_c=(1-s_c)/s_c",
                self.sigma_c.clone() * self.s_c.clone(),
                one.clone() - self.s_c.clone(),
            ),
            identity(
                "2/a_bar+3/r_bar=3/2-s_c",
                l2(&self.a_bar, &self.r_bar),
                half3.clone() - self.s_c.clone(),
            ),
            identity("(a_bar,p_tilde) L2-admissible", l2(&self.a_bar, &self.p_tilde), half3.clone()),
            identity(
                "s_c=3/p_tilde-3/r_bar",
                three.clone() / self.p_tilde.clone() - three.clone() / self.r_bar.clone(),
                self.s_c.clone(),
            ),
            identity("(q,r) L2-admissible", l2(&self.q, &self.r), half3.clone()),
            identity("(m,s) L2-admissible", l2(&self.m, &self.s), half3.clone()),
            identity("(4+,3-) L2-admissible", l2(&self.q4_plus, &self.r3_minus), half3),
            identity(
                "1/a_bar=(1-s_c)/q+s_c/m",
                one.clone() / self.a_bar.clone(),
                (one.clone() - self.s_c.clone()) / self.q.clone() + self.s_c.clone() / self.m.clone(),
            ),
            identity(
                "1/r_bar=(1-s_c)/r+s_c/n",
                one.clone() / self.r_bar.clone(),
                (one.clone() - self.s_c.clone()) / self.r.clone() + self.s_c.clone() / self.n.clone(),
            ),
            identity(
                "n=3s/(3-s)",
                self.n.clone(),
                three.clone() * self.s.clone() / (three.clone() - self.s.clone()),
            ),
            identity(
                "1/r=(1-theta)/2+theta/6",
                one.clone() / self.r.clone(),
                (one.clone() - self.theta.clone()) / two.clone() + self.theta.clone() / T::lit(6.0),
            ),
            identity("1/r=theta_bar/2", one.clone() / self.r.clone(), self.theta_bar.clone() / two.clone()),
            predicate("theta<theta_bar", self.theta < self.theta_bar),
            predicate(
                "(k,l) L2-admissible",
                is_l2_admissible(&self.distant.k, &Exponent::Finite(self.distant.l.clone())),
            ),
            identity(
                "1/r_bar=theta/l",
                one.clone() / self.r_bar.clone(),
                self.distant.theta.clone() / self.distant.l.clone(),
            ),
            identity(
                "1/a_bar=theta/k+(1-theta)/p_bar",
                one.clone() / self.a_bar.clone(),
                self.distant.theta.clone() * self.distant.k.reciprocal()
                    + (one - self.distant.theta.clone()) / self.distant.p_bar.clone(),
            ),
            predicate("p_bar>2", self.distant.p_bar > two),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::ratio(n, d)
    }

    fn exact(p: (i64, i64), g: (i64, i64), e: (i64, i64)) -> ModelParams<BigRational> {
        ModelParams::new(q(p.0, p.1), q(g.0, g.1), q(e.0, e.1)).unwrap()
    }

    #[test]
    fn critical_exponent_endpoints() {
        for g in [q(1, 2), q(1, 1), q(2, 1), q(5, 2)] {
            let lower = (q(5, 1) + g.clone()) / q(3, 1);
            let upper = q(3, 1) + g.clone();
            let at = |p: BigRational| {
                critical_exponent(&ModelParams { p, gamma: g.clone(), epsilon: q(0, 1) }).unwrap()
            };
            assert_eq!(at(lower), q(0, 1));
            assert_eq!(at(upper), q(1, 1));
        }
    }

    #[test]
    fn reference_point_p3_gamma2() {
        let params = exact((3, 1), (2, 1), (0, 1));
        assert_eq!(critical_exponent(&params).unwrap(), q(1, 2));
        let ab = ab_exponents(&params).unwrap();
        assert_eq!((ab.a.clone(), ab.b.clone(), ab.sigma_c.clone()), (q(2, 1), q(4, 1), q(1, 1)));
        assert_eq!(ab.a + q(2, 1) * ab.sigma_c.clone(), ab.b * ab.sigma_c);
    }

    #[test]
    fn rejects_p_at_most_one() {
        let params = ModelParams { p: 1.0, gamma: 1.0, epsilon: 0.0 };
        assert!(critical_exponent(&params).is_err());
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(1.5, 2.0, 0.0).is_err());
        assert!(ModelParams::new(3.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(3.0, 3.0, 0.0).is_err());
        assert!(ModelParams::new(3.0, 2.0, 0.1).is_err());
        assert!(ModelParams::new(3.0, 2.0, -0.01).is_err());
        let ok = ModelParams::new(3.0, 2.0, 1e-3).unwrap();
        assert!(ok.is_intercritical());
        assert!(!ModelParams::new(2.0, 2.0, 0.0).unwrap().is_intercritical());
    }

    #[test]
    fn ab_rejects_mass_critical_endpoint() {
        let g = q(3, 2);
        let p = (q(5, 1) + g.clone()) / q(3, 1);
        let params = ModelParams { p, gamma: g, epsilon: q(0, 1) };
        assert!(matches!(ab_exponents(&params), Err(Error::OutOfModel(_))));
    }

    #[test]
    fn l2_admissibility_examples() {
        let f = |x: f64| Exponent::Finite(x);
        assert!(is_l2_admissible(&f(2.0), &f(6.0)));
        assert!(is_l2_admissible(&Exponent::Infinite, &f(2.0)));
        assert!(is_l2_admissible(&f(4.0), &f(3.0)));
        assert!(!is_l2_admissible(&f(4.0), &f(4.0)));
        assert!(!is_l2_admissible(&f(1.0), &f(f64::INFINITY)));
        assert!(!is_l2_admissible(&f(2.0), &Exponent::Infinite));
    }

    #[test]
    fn scattering_pairs_reference_values() {
        let params = exact((3, 1), (2, 1), (0, 1));
        let set = scattering_pairs(&params).unwrap();
        assert_eq!(set.r_bar, q(24, 7));
        assert_eq!(set.a_bar, q(16, 1));
        assert_eq!(set.p_tilde, q(24, 11));
        assert_eq!(q(2, 1) / set.a_bar.clone() + q(3, 1) / set.r_bar.clone(), q(1, 1));
        assert_eq!(set.theta, q(3, 16));
        assert_eq!(set.theta_bar, q(7, 8));
        for check in set.check_identities(&params) {
            assert!(check.pass, "{} failed", check.name);
            if check.defect.is_finite() {
                assert_eq!(check.defect, 0.0, "{}", check.name);
            }
        }
    }

    #[test]
    fn distant_past_upper_branch() {
        let params = exact((3, 1), (2, 1), (0, 1));
        let dp = distant_past_pairs(&params).unwrap();
        assert_eq!(dp.theta, q(7, 12));
        assert_eq!(dp.l, q(2, 1));
        assert_eq!(dp.k, Exponent::Infinite);
        assert_eq!(dp.p_bar, q(20, 3));
    }

    #[test]
    fn float_upper_branch_keeps_energy_pair() {
        for (p, g) in [(3.0, 2.0), (3.5, 2.5), (2.75, 1.5)] {
            let params = ModelParams::new(p, g, 1e-3).unwrap();
            let set = scattering_pairs(&params).unwrap();
            assert_eq!(set.distant.l, 2.0);
            assert_eq!(set.distant.k, Exponent::Infinite);
            for c in set.check_identities(&params) {
                assert!(c.pass, "{} at p={p} g={g}", c.name);
            }
        }
    }

    #[test]
    fn distant_past_lower_branch() {
        let params = ModelParams::new(2.4, 2.0, 1e-3).unwrap();
        let dp = distant_past_pairs(&params).unwrap();
        let theta0 = (6.0 - 4.8) / 1.4;
        assert!(dp.theta > theta0 && dp.theta - theta0 < 1e-3);
        assert!(dp.p_bar > 2.0);
        assert!(is_l2_admissible(&dp.k, &Exponent::Finite(dp.l)));
        // With no perturbation the lower branch degenerates to p̄ = 2.
        let degenerate = ModelParams::new(2.4, 2.0, 0.0).unwrap();
        assert!(matches!(distant_past_pairs(&degenerate), Err(Error::Constraint(_))));
    }

    #[test]
    fn hs_admissibility_of_scattering_pair_depends_on_parameters() {
        let ok = ModelParams::new(3.0, 2.0, 1e-3).unwrap();
        let set = scattering_pairs(&ok).unwrap();
        let qa = Exponent::Finite(set.a_bar);
        let ra = Exponent::Finite(set.r_bar);
        assert!(satisfies_hs_scaling(&qa, &ra, &set.s_c));
        assert!(is_hs_admissible(&qa, &ra, &set.s_c));
        // Near the energy-critical end r̄ exceeds 6: the scaling relation still holds
        // but the range condition does not.
        let near = ModelParams::new(4.8, 2.0, 1e-3).unwrap();
        let set = scattering_pairs(&near).unwrap();
        let qa = Exponent::Finite(set.a_bar);
        let ra = Exponent::Finite(set.r_bar);
        assert!(set.r_bar > 6.0);
        assert!(satisfies_hs_scaling(&qa, &ra, &set.s_c));
        assert!(!is_hs_admissible(&qa, &ra, &set.s_c));
    }

    #[test]
    fn exact_identities_for_rational_sweep() {
        for (pn, pd) in [(9, 4), (5, 2), (3, 1), (7, 2), (4, 1)] {
            for (gn, gd) in [(1, 2), (1, 1), (3, 2), (2, 1), (5, 2)] {
                for (en, ed) in [(0, 1), (1, 1000), (1, 50)] {
                    let Ok(params) = ModelParams::new(q(pn, pd), q(gn, gd), q(en, ed)) else {
                        continue;
                    };
                    if !params.is_intercritical() {
                        continue;
                    }
                    let Ok(set) = scattering_pairs(&params) else { continue };
                    for c in set.check_identities(&params) {
                        assert!(c.pass, "{} at p={pn}/{pd} g={gn}/{gd} e={en}/{ed}", c.name);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn sc_strictly_increasing_in_p(g in 0.05f64..2.95, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
            let lo = (5.0 + g) / 3.0;
            let hi = 3.0 + g;
            let (a, b) = (lo + (hi - lo) * t1.min(t2), lo + (hi - lo) * t1.max(t2));
            prop_assume!(b - a > 1e-9);
            let sa = critical_exponent(&ModelParams { p: a, gamma: g, epsilon: 0.0 }).unwrap();
            let sb = critical_exponent(&ModelParams { p: b, gamma: g, epsilon: 0.0 }).unwrap();
            prop_assert!(sb > sa);
        }

        #[test]
        fn ab_relations_hold(g in 0.05f64..2.95, t in 0.001f64..0.999) {
            let lo = ((5.0 + g) / 3.0).max(2.0);
            let hi = 3.0 + g;
            prop_assume!(lo < hi);
            let p = lo + (hi - lo) * t;
            let params = ModelParams::new(p, g, 0.0).unwrap();
            prop_assume!(params.is_intercritical());
            let ab = ab_exponents(&params).unwrap();
            prop_assert!((ab.a + ab.b - 2.0 * p).abs() <= 1e-12 * p);
            let lhs = ab.a + 2.0 * ab.sigma_c;
            let rhs = ab.b * ab.sigma_c;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
