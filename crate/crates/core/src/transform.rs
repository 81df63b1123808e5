//! Laplace functionals, generalized Cauchy–Stieltjes transforms, the two
//! Markov–Krein identities, zero/α-norms, and the quasi-multiplicativity
//! integral.

use serde::{Deserialize, Serialize};

use crate::density::apply_multiplicator;
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::measure::{functional_f_a, log1p_integral, log_integral, BaseSpace, DiscreteMeasure, TestFunction};
use crate::quadrature;
use crate::report::CheckReport;
use crate::rng::RandomStream;
use crate::sampler::{sample_levy, sample_p_alpha_theta_weighted, TruncationPolicy};
use crate::stats::{quasi_lebesgue_test, try_parallel_map, weighted_mean_se};

/// Samples with optional importance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl EmpiricalDistribution {
    pub fn new(samples: Vec<f64>) -> Self {
        EmpiricalDistribution { samples, weights: None }
    }

    pub fn weighted(samples: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        weighted_mean_se(&samples, &weights)?;
        Ok(EmpiricalDistribution { samples, weights: Some(weights) })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// `(estimate, se, ess)` of `E[g(U)]`.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> Result<(f64, f64, f64)> {
        let xs: Vec<f64> = self.samples.iter().map(|&u| g(u)).collect();
        match &self.weights {
            Some(w) => weighted_mean_se(&xs, w),
            None => {
                let (m, se) = crate::stats::mean_se(&xs);
                Ok((m, se, xs.len() as f64))
            }
        }
    }
}

/// `E[exp(-f_a(η))] = exp(-∫ log(1 + a) dν)` for the gamma process.
pub fn laplace_gamma(a: &TestFunction, base: &BaseSpace) -> Result<f64> {
    if a.lower() < 0.0 {
        return Err(Error::DomainError("Laplace functional needs a ≥ 0".into()));
    }
    Ok((-log1p_integral(a, 1.0, base)?).exp())
}

/// `exp(-c ∫ a^α dν)` for the `α`-stable process.
pub fn laplace_stable(a: &TestFunction, alpha: f64, c: f64, base: &BaseSpace) -> Result<f64> {
    if a.lower() < 0.0 {
        return Err(Error::DomainError("Laplace functional needs a ≥ 0".into()));
    }
    if !a.upper().is_finite() {
        return Err(Error::DivergentIntegral(format!("∫a^α for unbounded {}", a.name())));
    }
    let i = a
        .integrate(|v| v.powf(alpha))
        .map_err(|e| Error::DivergentIntegral(e.to_string()))?;
    if !i.is_finite() {
        return Err(Error::DivergentIntegral(format!("∫a^α = {i}")));
    }
    Ok((-c * base.theta() * i).exp())
}

/// `exp(-∫ Φ(a(x)) dν)` with the model's closed-form Laplace exponent.
pub fn laplace_model(a: &TestFunction, model: &LevyModel, base: &BaseSpace) -> Result<f64> {
    if a.lower() < 0.0 {
        return Err(Error::DomainError("Laplace functional needs a ≥ 0".into()));
    }
    Ok((-base.theta() * a.integrate(|v| model.laplace_exponent(v))?).exp())
}

/// Generic form with `Φ` from quadrature of `(1 - e^{-ts}) dΛ(s)`.
pub fn laplace_levy(a: &TestFunction, model: &LevyModel, base: &BaseSpace) -> Result<f64> {
    if a.lower() < 0.0 {
        return Err(Error::DomainError("Laplace functional needs a ≥ 0".into()));
    }
    let exponent = match a.as_step() {
        Some(s) => {
            let mut acc = 0.0;
            for (v, p) in s.distribution() {
                acc += p * model.laplace_exponent_quadrature(v)?;
            }
            acc
        }
        None => {
            let inner = |v: f64| model.laplace_exponent_quadrature(v).unwrap_or(f64::NAN);
            let i = a.integrate(inner)?;
            if !i.is_finite() {
                return Err(Error::QuadratureFailure("nested Laplace exponent quadrature".into()));
            }
            i
        }
    };
    Ok((-base.theta() * exponent).exp())
}

/// `∫ (1 + zu)^{-θ} dμ(u)` as a (self-normalized) sample mean.
pub fn cauchy_stieltjes(mu: &EmpiricalDistribution, z: f64, theta: f64) -> Result<(f64, f64)> {
    if mu.samples().iter().any(|&u| !(1.0 + z * u > 0.0)) {
        return Err(Error::DomainError(format!("1 + {z}·u is not positive on the sample")));
    }
    if z == 0.0 {
        return Ok((1.0, 0.0));
    }
    let (m, se, _) = mu.expect(|u| (1.0 + z * u).powf(-theta))?;
    Ok((m, se))
}

/// `exp(-θ ∫_0^1 log(1 + z a(x)) dx)`, with `θ = ν(X)`.
pub fn mk_rhs(a: &TestFunction, z: f64, base: &BaseSpace) -> Result<f64> {
    Ok((-log1p_integral(a, z, base)?).exp())
}

/// Per-draw `u = f_a(η)/η(X)` and its range when the truncated tail mass is
/// placed at the lower or upper envelope of `a`.
struct MeanDraw {
    u: f64,
    u_lo: f64,
    u_hi: f64,
    total: f64,
    tail: f64,
}

fn mean_draw(a: &TestFunction, eta: &DiscreteMeasure) -> Result<MeanDraw> {
    let s = eta.total_charge();
    if !(s > 0.0) {
        return Err(Error::ZeroMass);
    }
    let f = functional_f_a(a, eta);
    let t = eta.tail_bound();
    Ok(MeanDraw {
        u: f / s,
        u_lo: (f + a.lower() * t) / (s + t),
        u_hi: (f + a.upper() * t) / (s + t),
        total: s,
        tail: t,
    })
}

/// Markov–Krein identity on a z-grid: Monte Carlo of
/// `E[(1 + z f_a(η̄))^{-θ}]` over normalized gamma draws against [`mk_rhs`].
pub fn mk_check(
    a: &TestFunction,
    z_grid: &[f64],
    base: &BaseSpace,
    n: usize,
    trunc: &TruncationPolicy,
    rng: &RandomStream,
) -> Result<CheckReport> {
    a.check_in_group()?;
    let theta = base.theta();
    let draws = try_parallel_map(n, rng, |r| mean_draw(a, &sample_levy(&LevyModel::gamma(), base, trunc, r)?))?;
    let mut rep = CheckReport::new("markov-krein")
        .param("a", a.name())
        .param("theta", theta)
        .param("n", n);
    for &z in z_grid {
        let g = |u: f64| (1.0 + z * u).powf(-theta);
        let mu = EmpiricalDistribution::new(draws.iter().map(|d| d.u).collect());
        let (lhs, se) = cauchy_stieltjes(&mu, z, theta)?;
        let allow = draws
            .iter()
            .map(|d| (g(d.u_lo) - g(d.u)).abs().max((g(d.u_hi) - g(d.u)).abs()))
            .sum::<f64>()
            / n as f64;
        rep.row(z, lhs, se, mk_rhs(a, z, base)?, allow);
    }
    Ok(rep)
}

/// Two-parameter identity with draws from `P_{α,θ}` (stable draws weighted by
/// `η(X)^{-θ}`, normalizing constant cancels). For `θ ≠ 0` the report
/// compares `(∫(1+zu)^{-θ}dμ)^{-1/θ}` with `(∫(1+za)^α dx)^{1/α}`; for `θ = 0`
/// it compares `exp(∫log(1+zu)dμ)` with the same right side.
#[allow(clippy::too_many_arguments)]
pub fn two_param_mk_check(
    a: &TestFunction,
    z_grid: &[f64],
    alpha: f64,
    theta: f64,
    n: usize,
    trunc: &TruncationPolicy,
    rng: &RandomStream,
) -> Result<CheckReport> {
    a.check_in_group()?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("α = {alpha} outside (0,1)")));
    }
    let base = BaseSpace::unit();
    let draws = try_parallel_map(n, rng, |r| {
        let (eta, _) = sample_p_alpha_theta_weighted(alpha, theta, &base, trunc, r)?;
        mean_draw(a, &eta)
    })?;
    let weight = |s: f64| if theta == 0.0 { 1.0 } else { s.powf(-theta) };
    let w: Vec<f64> = draws.iter().map(|d| weight(d.total)).collect();
    let w_tail: Vec<f64> = draws.iter().map(|d| weight(d.total + d.tail)).collect();
    let mut rep = CheckReport::new("two-param-markov-krein")
        .param("a", a.name())
        .param("alpha", alpha)
        .param("theta", theta)
        .param("n", n);
    if theta < 0.0 {
        rep.note("WARN θ < 0: weights η(X)^{-θ} are heavy-tailed, variance may be infinite");
    }
    let (_, _, ess) = weighted_mean_se(&vec![0.0; n], &w)?;
    rep.params.insert("ess".into(), ess.into());
    if ess < n as f64 / 10.0 {
        rep.note(format!("WARN effective sample size {ess:.0} of {n}"));
    }
    for &z in z_grid {
        let rhs = a.integrate(|v| (1.0 + z * v).powf(alpha))?.powf(1.0 / alpha);
        let pick = |sel: fn(&MeanDraw) -> f64, ws: &[f64]| -> Result<(f64, f64)> {
            let xs: Vec<f64> = if theta == 0.0 {
                draws.iter().map(|d| (z * sel(d)).ln_1p()).collect()
            } else {
                draws.iter().map(|d| (1.0 + z * sel(d)).powf(-theta)).collect()
            };
            let (m, se, _) = weighted_mean_se(&xs, ws)?;
            Ok(if theta == 0.0 {
                let l = m.exp();
                (l, l * se)
            } else {
                let l = m.powf(-1.0 / theta);
                (l, (l / m / theta).abs() * se)
            })
        };
        let (lhs, se) = pick(|d| d.u, &w)?;
        let (lo, _) = pick(|d| d.u_lo, &w_tail)?;
        let (hi, _) = pick(|d| d.u_hi, &w_tail)?;
        rep.row(z, lhs, se, rhs, (lo - lhs).abs().max((hi - lhs).abs()));
    }
    Ok(rep)
}

/// `‖a‖₀ = exp(∫ log|a| dν)`.
pub fn zero_norm(a: &TestFunction, base: &BaseSpace) -> Result<f64> {
    Ok(log_integral(a, base)?.exp())
}

/// `‖a‖_α = (∫ |a|^α dν)^{1/α}`.
pub fn alpha_norm(a: &TestFunction, alpha: f64, base: &BaseSpace) -> Result<f64> {
    let i = a
        .integrate(|v| v.abs().powf(alpha))
        .map_err(|e| Error::DivergentIntegral(e.to_string()))?;
    let v = (base.theta() * i).powf(1.0 / alpha);
    if !v.is_finite() {
        return Err(Error::DivergentIntegral(format!("α-norm of {} is {v}", a.name())));
    }
    Ok(v)
}

/// The α-norm against the probability `ν/ν(X)`; decreases to the geometric
/// mean `exp(∫_0^1 log|a|)` as `α → 0`.
pub fn normalized_alpha_norm(a: &TestFunction, alpha: f64) -> Result<f64> {
    alpha_norm(a, alpha, &BaseSpace::unit())
}

/// Checks that `M_{a₂/a₁}` carries `f_{a₁}` onto `f_{a₂}` (pointwise, up to
/// rounding) and preserves the quasi-Lebesgue measure.
pub fn zero_stability_witness(
    a1: &TestFunction,
    a2: &TestFunction,
    base: &BaseSpace,
    n: usize,
    trunc: &TruncationPolicy,
    rng: &RandomStream,
) -> Result<Vec<CheckReport>> {
    let (n1, n2) = (zero_norm(a1, base)?, zero_norm(a2, base)?);
    if (n1 - n2).abs() > 1e-10 * n1.max(n2) {
        return Err(Error::NormMismatch { left: n1, right: n2 });
    }
    let b = a2.div(a1);
    let pointwise = try_parallel_map(n.min(2000), &rng.substream(0), |r| {
        let eta = sample_levy(&LevyModel::gamma(), base, trunc, r)?;
        let moved = apply_multiplicator(&b, &eta)?;
        let (lhs, rhs) = (functional_f_a(a2, &eta), functional_f_a(a1, &moved));
        Ok((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE))
    })?;
    let worst = pointwise.iter().copied().fold(0.0, f64::max);
    let mut ident = CheckReport::new("zero-stability/functional-identity")
        .param("a1", a1.name())
        .param("a2", a2.name())
        .param("zero_norm", n1);
    ident.row_with(pointwise.len() as f64, worst, 0.0, 1e-12, worst <= 1e-12);
    let preserve = quasi_lebesgue_test("witness", &b, base, n, 10.0, trunc, &rng.substream(1))?;
    Ok(vec![ident, preserve])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellDecay {
    /// Every shell vanished.
    Zero,
    Geometric,
    PowerLaw,
    /// No summable decay and the partial sum passed the singular tolerance.
    Divergent,
    Undetermined,
}

/// Outcome of the quasi-multiplicativity integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiMult {
    pub value: f64,
    pub finite: bool,
    pub decay: ShellDecay,
    /// Geometric ratio or power-law exponent of the shell tail.
    pub rate: f64,
    /// Whether the shell contributions are non-increasing in depth.
    pub monotone: bool,
    /// Contribution of `[2^{-j-1}, 2^{-j}]`, `j = 0, 1, …`.
    pub shells: Vec<f64>,
}

const SHELLS: usize = 40;

/// `∫_0^1 (√g(x/a) - √g(x))² dx/x` by shells `[2^{-j-1}, 2^{-j}]`, each
/// integrated in `log x`. The tail is classified from the last half of the
/// profile: a geometric ratio below 0.9, or a power-law exponent below -1.05,
/// counts as summable and is extrapolated.
pub fn quasi_mult_criterion(g: &dyn Fn(f64) -> f64, a: f64, singular_tol: f64) -> Result<QuasiMult> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("scale a = {a} must be positive")));
    }
    let root = |x: f64| -> Result<f64> {
        let v = g(x);
        if v >= 0.0 && v.is_finite() {
            Ok(v.sqrt())
        } else {
            Err(Error::EvaluationError(format!("g({x}) = {v}")))
        }
    };
    // probe the grid first so evaluation errors surface as such
    for j in 0..=SHELLS {
        let x = 0.5f64.powi(j as i32);
        root(x)?;
        root(x / a)?;
    }
    let ln2 = std::f64::consts::LN_2;
    let h = |w: f64| {
        let x = w.exp();
        match (root(x / a), root(x)) {
            (Ok(p), Ok(q)) => (p - q).powi(2),
            _ => f64::NAN,
        }
    };
    let mut shells = Vec::with_capacity(SHELLS);
    let mut running: f64 = 0.0;
    for j in 0..SHELLS {
        let (lo, hi) = (-((j + 1) as f64) * ln2, -(j as f64) * ln2);
        // cancellation in √g(x/a) - √g(x) puts a noise floor under deep
        // shells; they only need to be accurate relative to the running sum
        let s = quadrature::integrate(h, lo, hi, (1e-14 * running).max(1e-300), 1e-10)?;
        running += s;
        if !s.is_finite() {
            return Err(Error::EvaluationError(format!("shell {j} integrates to {s}")));
        }
        shells.push(s);
    }
    let partial: f64 = shells.iter().sum();
    let monotone = shells.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    if shells.iter().all(|&s| s == 0.0) {
        return Ok(QuasiMult { value: 0.0, finite: true, decay: ShellDecay::Zero, rate: 0.0, monotone, shells });
    }
    let tail = &shells[SHELLS / 2..];
    let last = *tail.last().expect("non-empty");
    let (decay, rate, extra) = if tail.iter().all(|&s| s > 0.0) {
        let steps = (tail.len() - 1) as f64;
        let ratio = (last / tail[0]).powf(1.0 / steps);
        let js: Vec<f64> = (SHELLS / 2..SHELLS).map(|j| (j as f64 + 0.5).ln()).collect();
        let ls: Vec<f64> = tail.iter().map(|s| s.ln()).collect();
        let mj = js.iter().sum::<f64>() / js.len() as f64;
        let ml = ls.iter().sum::<f64>() / ls.len() as f64;
        let slope = js.iter().zip(&ls).map(|(x, y)| (x - mj) * (y - ml)).sum::<f64>()
            / js.iter().map(|x| (x - mj).powi(2)).sum::<f64>();
        if ratio < 0.9 {
            (ShellDecay::Geometric, ratio, last * ratio / (1.0 - ratio))
        } else if slope < -1.05 {
            let jl = SHELLS as f64 - 0.5;
            (ShellDecay::PowerLaw, slope, last * jl / (-slope - 1.0))
        } else if partial > singular_tol {
            (ShellDecay::Divergent, ratio, f64::INFINITY)
        } else {
            (ShellDecay::Undetermined, ratio, f64::NAN)
        }
    } else if partial > singular_tol {
        (ShellDecay::Divergent, f64::NAN, f64::INFINITY)
    } else {
        (ShellDecay::Undetermined, f64::NAN, f64::NAN)
    };
    let finite = matches!(decay, ShellDecay::Geometric | ShellDecay::PowerLaw);
    Ok(QuasiMult { value: partial + extra, finite, decay, rate, monotone, shells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn step(values: Vec<f64>) -> TestFunction {
        TestFunction::Step(crate::StepFunction::uniform(values).unwrap())
    }

    fn x_fn() -> TestFunction {
        TestFunction::linear(0.0, 1.0).unwrap()
    }

    #[test]
    fn laplace_examples() {
        let unit = BaseSpace::unit();
        assert_eq!(laplace_gamma(&TestFunction::constant(0.0), &unit).unwrap(), 1.0);
        assert_relative_eq!(laplace_gamma(&TestFunction::constant(1.0), &unit).unwrap(), 0.5, max_relative = 1e-15);
        let two = BaseSpace::new(2.0).unwrap();
        let v = laplace_gamma(&x_fn(), &two).unwrap();
        assert_relative_eq!(v, (-2.0 * (2.0 * 2f64.ln() - 1.0)).exp(), max_relative = 1e-10);
        assert_relative_eq!(v, 0.461_816, max_relative = 1e-5);
        assert_eq!(laplace_stable(&TestFunction::constant(0.0), 0.5, 1.0, &unit).unwrap(), 1.0);
        assert_relative_eq!(
            laplace_stable(&TestFunction::constant(4.0), 0.5, 1.0, &unit).unwrap(),
            (-2.0f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn generic_path_reproduces_specializations() {
        let unit = BaseSpace::unit();
        let two = BaseSpace::new(2.0).unwrap();
        let cases = [
            (TestFunction::constant(1.0), unit, LevyModel::gamma(), 0.5),
            (x_fn(), two, LevyModel::gamma(), (-2.0 * (2.0 * 2f64.ln() - 1.0)).exp()),
            (TestFunction::constant(4.0), unit, LevyModel::stable(0.5, 1.0), (-2.0f64).exp()),
        ];
        for (a, base, model, expect) in cases {
            let g = laplace_levy(&a, &model, &base).unwrap();
            assert!(((g - expect) / expect).abs() < 1e-8, "{g} vs {expect}");
            let closed = laplace_model(&a, &model, &base).unwrap();
            assert!(((closed - expect) / expect).abs() < 1e-10);
        }
        let panel = [TestFunction::constant(0.5), step(vec![0.2, 3.0]), TestFunction::linear(1.0, 1.0).unwrap()];
        for a in &panel {
            let direct = laplace_gamma(a, &unit).unwrap();
            let generic = laplace_levy(a, &LevyModel::gamma(), &unit).unwrap();
            assert!(((direct - generic) / direct).abs() < 1e-8);
        }
    }

    #[test]
    fn stable_rejects_unbounded() {
        let a = TestFunction::callable("1/x", |x| 1.0 / x, 1.0, f64::INFINITY);
        assert!(matches!(laplace_stable(&a, 0.5, 1.0, &BaseSpace::unit()), Err(Error::DivergentIntegral(_))));
    }

    #[test]
    fn cauchy_stieltjes_examples() {
        let mu = EmpiricalDistribution::new(vec![0.3, 0.9]);
        assert_eq!(cauchy_stieltjes(&mu, 0.0, 1.0).unwrap(), (1.0, 0.0));
        let point = EmpiricalDistribution::new(vec![1.0; 5]);
        let (v, se) = cauchy_stieltjes(&point, 1.0, 2.0).unwrap();
        assert_eq!((v, se), (0.25, 0.0));
        assert!(cauchy_stieltjes(&EmpiricalDistribution::new(vec![2.0]), -1.0, 1.0).is_err());
    }

    #[test]
    fn mk_rhs_examples() {
        let unit = BaseSpace::unit();
        assert_eq!(mk_rhs(&x_fn(), 0.0, &unit).unwrap(), 1.0);
        let v = mk_rhs(&x_fn(), 1.0, &unit).unwrap();
        assert_relative_eq!(v, std::f64::consts::E / 4.0, max_relative = 1e-12);
        assert_relative_eq!(v, 0.679_570, max_relative = 1e-6);
        let three = BaseSpace::new(3.0).unwrap();
        assert_relative_eq!(
            mk_rhs(&TestFunction::constant(2.0), 0.5, &three).unwrap(),
            2f64.powf(-3.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn mk_constant_collapses() {
        let rep = mk_check(
            &TestFunction::constant(2.0),
            &[0.5, 1.0, 2.0],
            &BaseSpace::new(3.0).unwrap(),
            500,
            &TruncationPolicy::default(),
            &RandomStream::new(1, 0),
        )
        .unwrap();
        for (l, r) in rep.lhs.iter().zip(&rep.rhs) {
            assert!((l - r).abs() < 1e-12 * r);
        }
        assert!(rep.pass);
    }

    #[test]
    fn two_param_constant_collapses() {
        for theta in [0.0, 0.5] {
            let rep = two_param_mk_check(
                &TestFunction::constant(3.0),
                &[0.5, 1.0],
                0.5,
                theta,
                500,
                &TruncationPolicy::default(),
                &RandomStream::new(2, 0),
            )
            .unwrap();
            for (l, r, z) in rep.lhs.iter().zip(&rep.rhs).zip(&rep.grid).map(|((l, r), z)| (l, r, z)) {
                assert!((l - (1.0 + 3.0 * z)).abs() < 1e-10, "{l}");
                assert!((r - (1.0 + 3.0 * z)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn norms() {
        let unit = BaseSpace::unit();
        let c = TestFunction::constant(2.5);
        assert_relative_eq!(zero_norm(&c, &unit).unwrap(), 2.5, max_relative = 1e-15);
        assert_relative_eq!(alpha_norm(&c, 0.3, &unit).unwrap(), 2.5, max_relative = 1e-13);
        let a = step(vec![1.0, 4.0]);
        assert_relative_eq!(zero_norm(&a, &unit).unwrap(), 2.0, max_relative = 1e-15);
        let seq: Vec<f64> = [0.5, 0.1, 0.02].iter().map(|&al| normalized_alpha_norm(&a, al).unwrap()).collect();
        assert!(seq[0] > seq[1] && seq[1] > seq[2] && seq[2] > 2.0);
        assert!(seq[2] - 2.0 < 0.05);
        assert!(matches!(zero_norm(&step(vec![0.0, 1.0]), &unit), Err(Error::NotInGroup(_))));
    }

    #[test]
    fn witness_guard_and_trivial_case() {
        let unit = BaseSpace::unit();
        let rng = RandomStream::new(3, 0);
        let t = TruncationPolicy::default();
        let err = zero_stability_witness(&TestFunction::constant(1.0), &TestFunction::constant(2.0), &unit, 10, &t, &rng);
        assert!(matches!(err, Err(Error::NormMismatch { .. })));
        let a = step(vec![2.0, 0.5]);
        let reps = zero_stability_witness(&a, &a, &unit, 500, &t, &rng).unwrap();
        assert!(reps.iter().all(|r| r.pass));
        let reps = zero_stability_witness(&a, &TestFunction::constant(1.0), &unit, 2000, &t, &rng).unwrap();
        assert!(reps[0].pass);
    }

    #[test]
    fn quasi_mult_cases() {
        let gamma = |x: f64| (-x).exp();
        let one = quasi_mult_criterion(&gamma, 1.0, 1e6).unwrap();
        assert_eq!((one.value, one.finite), (0.0, true));
        for a in [0.5, 2.0, 4.0] {
            let q = quasi_mult_criterion(&gamma, a, 1e6).unwrap();
            assert!(q.finite && q.decay == ShellDecay::Geometric && q.monotone, "{a}: {q:?}");
            // small x: (√g(x/a) - √g(x))² ≈ x²(1 - 1/a)²/4, so shells after the
            // first are close to the series of that quadratic
            assert!(q.value > 0.0 && q.value < 1.0);
        }
        let km = |x: f64| if x < 1.0 { (1.0 / x).ln().sqrt() } else { 0.0 };
        let q = quasi_mult_criterion(&km, 2.0, 1e6).unwrap();
        assert!(q.finite && q.decay == ShellDecay::PowerLaw && q.monotone, "{q:?}");
        assert!((q.rate + 1.5).abs() < 0.2);
        let stable = |x: f64| x.powf(-0.5);
        let q = quasi_mult_criterion(&stable, 2.0, 10.0).unwrap();
        assert!(!q.finite, "{q:?}");
        let bad = |_x: f64| f64::NAN;
        assert!(matches!(quasi_mult_criterion(&bad, 2.0, 1.0), Err(Error::EvaluationError(_))));
    }

    #[test]
    fn quasi_mult_gamma_value_matches_full_quadrature() {
        // whole integral in one go on log scale, down to 2^-60
        let g = |x: f64| (-x).exp();
        let a = 2.0;
        let h = |w: f64| {
            let x = w.exp();
            ((-x / (2.0 * a)).exp() - (-x / 2.0).exp()).powi(2)
        };
        let full = quadrature::integrate(h, -60.0 * std::f64::consts::LN_2, 0.0, 1e-300, 1e-12).unwrap();
        let q = quasi_mult_criterion(&g, a, 1e6).unwrap();
        assert_relative_eq!(q.value, full, max_relative = 1e-8);
    }

    proptest! {
        #[test]
        fn laplace_nonincreasing_in_a(
            base_vals in prop::collection::vec(0.0f64..5.0, 1..6),
            bump in prop::collection::vec(0.0f64..2.0, 6),
            theta in 0.1f64..4.0,
        ) {
            let bigger: Vec<f64> = base_vals.iter().zip(&bump).map(|(v, b)| v + b).collect();
            let (a, b) = (step(base_vals), step(bigger));
            let base = BaseSpace::new(theta).unwrap();
            prop_assert!(laplace_gamma(&b, &base).unwrap() <= laplace_gamma(&a, &base).unwrap());
            prop_assert!(laplace_stable(&b, 0.4, 1.3, &base).unwrap() <= laplace_stable(&a, 0.4, 1.3, &base).unwrap());
        }

        #[test]
        fn alpha_norm_decreases_to_zero_norm(vals in prop::collection::vec(0.1f64..10.0, 1..6)) {
            let a = step(vals);
            let z = zero_norm(&a, &BaseSpace::unit()).unwrap();
            let seq: Vec<f64> = [0.5, 0.1, 0.02].iter().map(|&al| normalized_alpha_norm(&a, al).unwrap()).collect();
            prop_assert!(seq[0] >= seq[1] - 1e-12 && seq[1] >= seq[2] - 1e-12 && seq[2] >= z - 1e-12);
            prop_assert!((seq[2] - z) / z < 0.1);
        }
    }
}
