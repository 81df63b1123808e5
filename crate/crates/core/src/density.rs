//! Multiplicators `M_a`, the Radon–Nikodym densities they induce on the gamma
//! measure, the quasi-Lebesgue weight, and the Markov operators `S_a`, `R_a`
//! on the simplex and cone.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{log_integral, Atom, BaseSpace, ConicSequence, DiscreteMeasure, SimplexSequence, TestFunction};
use crate::quadrature::{self, LaguerreRule};
use crate::rng::RandomStream;
use crate::special::ln_gamma;

/// A density kept in log form; `value` is `exp(log)` and may overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Density {
    pub log: f64,
    pub value: f64,
    pub overflow: bool,
}

impl Density {
    pub fn from_log(log: f64) -> Self {
        let value = log.exp();
        Density { log, value, overflow: value.is_infinite() }
    }
}

/// `M_a η = Σ a(xᵢ) zᵢ δ_{xᵢ}`, re-sorted. The tail bound scales by the
/// upper envelope of `a`.
pub fn apply_multiplicator(a: &TestFunction, eta: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let mut atoms = Vec::with_capacity(eta.len());
    for at in eta.atoms() {
        let m = a.eval(at.location);
        if !(m > 0.0) {
            return Err(Error::ZeroCharge { location: at.location });
        }
        atoms.push(Atom::new(at.location, at.charge * m));
    }
    DiscreteMeasure::new(atoms, eta.tail_bound() * a.upper())
}

/// `log ρ_a(η)` for `ρ_a = d(M_a P_Γ)/dP_Γ = exp(-∫log a dν) · exp(-∫(1/a - 1) dη)`.
pub fn log_rn_density_gamma(a: &TestFunction, eta: &DiscreteMeasure, base: &BaseSpace) -> Result<f64> {
    let prefactor = log_integral(a, base)?;
    let mut sum = 0.0;
    for at in eta.atoms().iter().rev() {
        sum += (1.0 / a.eval(at.location) - 1.0) * at.charge;
    }
    Ok(-prefactor - sum)
}

pub fn rn_density_gamma(a: &TestFunction, eta: &DiscreteMeasure, base: &BaseSpace) -> Result<Density> {
    log_rn_density_gamma(a, eta, base).map(Density::from_log)
}

/// Density of the quasi-Lebesgue measure against `P_Γ`, `exp(η(X))`,
/// restricted to `η(X) ≤ charge_cutoff`.
pub fn quasi_lebesgue_weight(eta: &DiscreteMeasure, charge_cutoff: f64) -> f64 {
    let s = eta.total_charge();
    if s <= charge_cutoff {
        s.exp()
    } else {
        0.0
    }
}

fn draw_multipliers(a: &TestFunction, n: usize, rng: &mut RandomStream) -> Result<Vec<f64>> {
    (0..n)
        .map(|_| {
            let x = rng.uniform();
            let m = a.eval(x);
            if m > 0.0 {
                Ok(m)
            } else {
                Err(Error::ZeroCharge { location: x })
            }
        })
        .collect()
}

/// `S_a y = V(a(X₁)y₁/σ, a(X₂)y₂/σ, …)` with i.i.d. uniform `Xᵢ`. The
/// unrepresented residual enters `σ` through `E[a]`.
pub fn markov_s_a(y: &SimplexSequence, a: &TestFunction, rng: &mut RandomStream) -> Result<SimplexSequence> {
    let mult = draw_multipliers(a, y.terms().len(), rng)?;
    let mean_a = a.integrate(|v| v)?;
    let residual = y.residual();
    let scaled: Vec<f64> = y.terms().iter().zip(&mult).map(|(t, m)| t * m).collect();
    let sigma = scaled.iter().rev().sum::<f64>() + mean_a * residual;
    let new_residual = mean_a * residual / sigma;
    let tol = (a.upper() * y.tail_tolerance() / sigma).clamp(new_residual, 1.0);
    SimplexSequence::new(scaled.into_iter().map(|s| s / sigma).collect(), tol)
}

/// `R_a z = V(a(X₁)z₁, a(X₂)z₂, …)`.
pub fn markov_r_a(z: &ConicSequence, a: &TestFunction, rng: &mut RandomStream) -> Result<ConicSequence> {
    let mult = draw_multipliers(a, z.terms().len(), rng)?;
    let terms = z.terms().iter().zip(&mult).map(|(t, m)| t * m).collect();
    ConicSequence::new(terms, z.tail_bound() * a.upper())
}

/// Output of [`pd_density`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdDensity {
    pub density: Density,
    /// Mass of `y` handled by the exponential tail surrogate.
    pub tail_mass: f64,
    /// Second-order size of the surrogate error in the log density.
    pub tail_error: f64,
    /// Gauss–Laguerre nodes used, or 0 when the adaptive fallback ran.
    pub nodes: usize,
}

/// Laplace transform of the law of `1/a` under uniform `[0,1]`, in log form,
/// for a step `a`. Factored as `e^{-s/v_max}·Σ pⱼ e^{-s(1/vⱼ - 1/v_max)}`.
struct InverseLaplace {
    inv_max: f64,
    pieces: Vec<(f64, f64)>,
}

impl InverseLaplace {
    fn new(dist: &[(f64, f64)]) -> Self {
        let v_max = dist.iter().map(|d| d.0).fold(0.0, f64::max);
        let inv_max = 1.0 / v_max;
        let pieces = dist.iter().map(|&(v, p)| (1.0 / v - inv_max, p)).collect();
        InverseLaplace { inv_max, pieces }
    }

    fn log_at(&self, s: f64) -> f64 {
        let mix: f64 = self.pieces.iter().map(|&(d, p)| p * (-s * d).exp()).sum();
        -s * self.inv_max + mix.ln()
    }
}

/// `d(S_a PD(θ))/dPD(θ)` at `y`:
/// `exp(-θ∫log a) ∫_0^∞ σ^{θ-1}/Γ(θ) Πᵢ L_{1/a}(σyᵢ) dσ`.
///
/// The product runs over the first `n_product` coordinates; the rest of the
/// mass (stored terms beyond `n_product` plus the residual) enters as
/// `exp(-σ E[1/a] tail)`. After `σ = u·v_max` the integrand is bounded and the
/// `u^{θ-1}e^{-u}` weight is handled by generalized Gauss–Laguerre, doubling
/// from `quad_nodes` until two rules agree to 1e-8.
pub fn pd_density(
    y: &SimplexSequence,
    a: &TestFunction,
    theta: f64,
    n_product: usize,
    quad_nodes: usize,
) -> Result<PdDensity> {
    a.check_in_group()?;
    let step = a
        .as_step()
        .ok_or_else(|| Error::InvalidParameter("pd_density needs a step function".into()))?;
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("θ must be positive, got {theta}")));
    }
    let dist: Vec<(f64, f64)> = step.distribution().collect();
    let lap = InverseLaplace::new(&dist);
    let v_max = 1.0 / lap.inv_max;
    let inv_mean: f64 = dist.iter().map(|(v, p)| p / v).sum();
    let inv_sq: f64 = dist.iter().map(|(v, p)| p / (v * v)).sum();

    let head: Vec<f64> = y.terms().iter().take(n_product).copied().collect();
    let tail_mass = (1.0 - head.iter().rev().sum::<f64>()).max(0.0);
    let log_f = |u: f64| -> f64 {
        let sigma = u * v_max;
        let mut acc = u - sigma * inv_mean * tail_mass;
        for &yi in &head {
            acc += lap.log_at(sigma * yi);
        }
        acc
    };

    let log_prefactor = -theta * step.distribution().map(|(v, p)| p * v.ln()).sum::<f64>()
        + theta * v_max.ln()
        - ln_gamma(theta);

    let mut n = quad_nodes.max(8);
    let mut prev = LaguerreRule::cached(n, theta - 1.0).integrate_log(log_f);
    let mut integral = None;
    while n <= 512 {
        let next = LaguerreRule::cached(2 * n, theta - 1.0).integrate_log(log_f);
        n *= 2;
        if ((next - prev) / next).abs() < 1e-8 {
            integral = Some((next, n));
            break;
        }
        prev = next;
    }
    let (value, nodes) = match integral {
        Some(v) => v,
        None => {
            // u = v^{1/θ} absorbs the u^{θ-1} singularity
            let g = |v: f64| {
                let u = v.powf(1.0 / theta);
                (log_f(u) - u).exp() / theta
            };
            let v = quadrature::integrate_to_infinity(g, 0.0, 1e-14, 1e-10)?;
            (v, 0)
        }
    };
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::QuadratureFailure(format!("σ-integral evaluated to {value}")));
    }
    let last = head.last().copied().unwrap_or(0.0);
    let sigma_scale = (theta + 1.0) / inv_mean;
    let tail_error = 0.5 * (inv_sq - inv_mean * inv_mean) * tail_mass * last * sigma_scale * sigma_scale;
    Ok(PdDensity { density: Density::from_log(log_prefactor + value.ln()), tail_mass, tail_error, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_levy, sample_pd_theta, TruncationPolicy};
    use crate::LevyModel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn step(values: Vec<f64>) -> TestFunction {
        TestFunction::Step(crate::StepFunction::uniform(values).unwrap())
    }

    fn eta() -> DiscreteMeasure {
        DiscreteMeasure::new(vec![Atom::new(0.25, 1.0), Atom::new(0.75, 1.0)], 0.0).unwrap()
    }

    #[test]
    fn multiplicator_examples() {
        let e = eta();
        assert_eq!(apply_multiplicator(&TestFunction::constant(1.0), &e).unwrap(), e);
        let a = step(vec![2.0, 1.0]);
        let m = apply_multiplicator(&a, &e).unwrap();
        assert_eq!(m.atoms(), &[Atom::new(0.25, 2.0), Atom::new(0.75, 1.0)]);
        let back = apply_multiplicator(&a.recip(), &m).unwrap();
        assert_eq!(back, e);
        let zero = step(vec![0.0, 1.0]);
        assert!(matches!(apply_multiplicator(&zero, &e), Err(Error::ZeroCharge { .. })));
    }

    #[test]
    fn density_examples() {
        let base = BaseSpace::unit();
        let e = eta();
        assert_eq!(rn_density_gamma(&TestFunction::constant(1.0), &e, &base).unwrap().value, 1.0);
        let single = DiscreteMeasure::new(vec![Atom::new(0.5, 1.0)], 0.0).unwrap();
        let d = rn_density_gamma(&TestFunction::constant(2.0), &single, &base).unwrap();
        assert_relative_eq!(d.value, 0.5f64.exp() / 2.0, max_relative = 1e-15);
        assert_relative_eq!(d.value, 0.824_360_635_350_064, max_relative = 1e-14);
    }

    #[test]
    fn constant_multiplier_depends_only_on_total() {
        let base = BaseSpace::new(2.5).unwrap();
        let mut rng = RandomStream::new(3, 0);
        for _ in 0..20 {
            let e = sample_levy(&LevyModel::gamma(), &base, &TruncationPolicy::default(), &mut rng).unwrap();
            let c: f64 = 1.7;
            let s = e.total_charge();
            let closed = -2.5 * c.ln() + (1.0 - 1.0 / c) * s;
            let d = log_rn_density_gamma(&TestFunction::constant(c), &e, &base).unwrap();
            assert_relative_eq!(d, closed, max_relative = 1e-12);
        }
    }

    #[test]
    fn quasi_lebesgue_examples() {
        assert_eq!(quasi_lebesgue_weight(&DiscreteMeasure::empty(), 10.0), 1.0);
        let two = DiscreteMeasure::new(vec![Atom::new(0.5, 2.0)], 0.0).unwrap();
        assert_relative_eq!(quasi_lebesgue_weight(&two, 10.0), 7.389_056_098_930_65, max_relative = 1e-14);
        assert_eq!(quasi_lebesgue_weight(&two, 1.0), 0.0);
    }

    #[test]
    fn markov_ops_with_constant_multiplier() {
        let mut rng = RandomStream::new(4, 0);
        let y = sample_pd_theta(1.0, 200, &mut rng).unwrap();
        let s = markov_s_a(&y, &TestFunction::constant(3.0), &mut rng).unwrap();
        for (a, b) in s.terms().iter().zip(y.terms()) {
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
        let z = ConicSequence::new(y.terms().to_vec(), 0.0).unwrap();
        let r = markov_r_a(&z, &TestFunction::constant(3.0), &mut rng).unwrap();
        for (a, b) in r.terms().iter().zip(z.terms()) {
            assert_relative_eq!(*a, 3.0 * b, max_relative = 1e-15);
        }
    }

    #[test]
    fn two_point_multiplier_is_bernoulli() {
        let mut rng = RandomStream::new(5, 0);
        let a = step(vec![2.0, 5.0]);
        let z = ConicSequence::new(vec![1.0; 20_000], 0.0).unwrap();
        let r = markov_r_a(&z, &a, &mut rng).unwrap();
        let fives = r.terms().iter().filter(|&&t| t == 5.0).count();
        let twos = r.terms().iter().filter(|&&t| t == 2.0).count();
        assert_eq!(fives + twos, 20_000);
        assert!((fives as f64 / 20_000.0 - 0.5).abs() < 4.0 * 0.5 / (20_000f64).sqrt());
    }

    #[test]
    fn pd_density_identity_and_constant() {
        let mut rng = RandomStream::new(6, 0);
        for _ in 0..5 {
            let y = sample_pd_theta(1.0, 300, &mut rng).unwrap();
            let one = pd_density(&y, &TestFunction::constant(1.0), 1.0, 64, 64).unwrap();
            assert_relative_eq!(one.density.value, 1.0, max_relative = 1e-10);
            for &theta in &[0.5, 1.0, 2.5] {
                let d = pd_density(&y, &TestFunction::constant(2.5), theta, 64, 64).unwrap();
                assert_relative_eq!(d.density.value, 1.0, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn pd_density_matches_direct_quadrature() {
        // independent route: plain adaptive quadrature of the σ-integral over
        // the full product, no rescaling, no surrogate
        let y = SimplexSequence::new(vec![0.6, 0.3, 0.1], 0.0).unwrap();
        let a = step(vec![1.5, 0.75]);
        let theta = 1.0;
        let lap = |s: f64| 0.5 * (-s / 1.5).exp() + 0.5 * (-s / 0.75).exp();
        let integrand = |sig: f64| y.terms().iter().map(|&yi| lap(sig * yi)).product::<f64>();
        let q = quadrature::integrate_to_infinity(integrand, 0.0, 1e-14, 1e-12).unwrap();
        let pref = (-theta * 0.5 * (1.5f64.ln() + 0.75f64.ln())).exp();
        let d = pd_density(&y, &a, theta, 64, 64).unwrap();
        assert_relative_eq!(d.density.value, pref * q, max_relative = 1e-9);
    }

    #[test]
    fn pd_density_needs_steps() {
        let y = SimplexSequence::new(vec![1.0], 0.0).unwrap();
        let a = TestFunction::linear(1.0, 1.0).unwrap();
        assert!(pd_density(&y, &a, 1.0, 8, 8).is_err());
    }

    proptest! {
        #[test]
        fn group_action_composes(
            va in prop::collection::vec(0.1f64..4.0, 1..5),
            vb in prop::collection::vec(0.1f64..4.0, 1..5),
            seed in 0u64..1000,
        ) {
            let (a, b) = (step(va), step(vb));
            let mut rng = RandomStream::new(seed, 0);
            let e = sample_levy(&LevyModel::gamma(), &BaseSpace::unit(), &TruncationPolicy::default(), &mut rng).unwrap();
            let lhs = apply_multiplicator(&a.mul(&b), &e).unwrap();
            let rhs = apply_multiplicator(&a, &apply_multiplicator(&b, &e).unwrap()).unwrap();
            for (x, y) in lhs.atoms().iter().zip(rhs.atoms()) {
                prop_assert!((x.charge - y.charge).abs() <= 1e-14 * x.charge);
            }
        }

        #[test]
        fn cocycle_identity(
            va in prop::collection::vec(0.1f64..4.0, 1..5),
            vb in prop::collection::vec(0.1f64..4.0, 1..5),
            seed in 0u64..1000,
        ) {
            let (a, b) = (step(va), step(vb));
            let base = BaseSpace::new(1.7).unwrap();
            let mut rng = RandomStream::new(seed, 1);
            let e = sample_levy(&LevyModel::gamma(), &base, &TruncationPolicy::default(), &mut rng).unwrap();
            let lhs = log_rn_density_gamma(&a.mul(&b), &e, &base).unwrap();
            let pulled = apply_multiplicator(&a.recip(), &e).unwrap();
            let rhs = log_rn_density_gamma(&a, &e, &base).unwrap() + log_rn_density_gamma(&b, &pulled, &base).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        }
    }
}
