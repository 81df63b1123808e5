//! Samplers for Lévy random measures and Poisson–Dirichlet sequences.
//!
//! Lévy measures are drawn by the inverse-tail series: with unit-rate
//! Poisson arrivals `Γ₁ < Γ₂ < …`, the charges `Zₙ = m⁻¹(Γₙ/θ)` come out in
//! non-increasing order and the locations are i.i.d. uniform on `[0,1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::measure::{Atom, BaseSpace, ConicSequence, DiscreteMeasure, SimplexSequence};
use crate::rng::RandomStream;
use crate::special::gamma;

/// Where to cut an infinite series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationPolicy {
    pub max_atoms: usize,
    /// Stop once the expected truncated mass drops below this.
    pub tail_mass_cap: f64,
    /// Append one atom carrying the expected truncated mass.
    pub compensate: bool,
    /// Fail with `TruncationOverflow` if `max_atoms` hits before the cap.
    pub hard_cap: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { max_atoms: 2048, tail_mass_cap: 1e-8, compensate: false, hard_cap: false }
    }
}

impl TruncationPolicy {
    pub fn with_tail_cap(mut self, cap: f64) -> Self {
        self.tail_mass_cap = cap;
        self
    }

    pub fn with_max_atoms(mut self, n: usize) -> Self {
        self.max_atoms = n;
        self
    }
}

/// Smallest charge kept; below this the series is in the subnormal range.
const MIN_CHARGE: f64 = 1e-300;

/// Charges `m⁻¹(Γₙ/θ)` for given arrival times.
pub fn charges_from_arrivals(model: &LevyModel, base: &BaseSpace, arrivals: &[f64]) -> Vec<f64> {
    arrivals.iter().map(|g| model.inverse_tail(g / base.theta())).collect()
}

/// A Lévy measure draw together with the Poisson arrivals that produced it.
#[derive(Debug, Clone)]
pub struct TracedDraw {
    pub measure: DiscreteMeasure,
    pub arrivals: Vec<f64>,
}

pub fn sample_levy(
    model: &LevyModel,
    base: &BaseSpace,
    trunc: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<DiscreteMeasure> {
    match *model {
        LevyModel::TemperedStable { alpha, c, tilt } => {
            model.validate()?;
            sample_tempered_thinned(model, LevyModel::stable(alpha, c), tilt, base, trunc, rng)
        }
        _ => sample_levy_traced(model, base, trunc, rng).map(|d| d.measure),
    }
}

/// Tempered stable by thinning the stable series: a stable jump `s` is kept
/// with probability `e^{-tilt·s}`. Same law as the inverse-tail series
/// without a root solve per atom. `max_atoms` counts kept atoms.
fn sample_tempered_thinned(
    model: &LevyModel,
    stable: LevyModel,
    tilt: f64,
    base: &BaseSpace,
    trunc: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<DiscreteMeasure> {
    let theta = base.theta();
    let mut atoms = Vec::with_capacity(trunc.max_atoms.min(4096));
    let mut arrival = 0.0;
    let mut tail = f64::INFINITY;
    while atoms.len() < trunc.max_atoms {
        arrival += rng.exp1();
        let s = stable.inverse_tail(arrival / theta);
        if !(s >= MIN_CHARGE) {
            tail = theta * model.small_jump_mean(s.max(0.0));
            break;
        }
        // one uniform for the location and one for the thinning, always drawn
        let x = rng.uniform();
        if rng.uniform() < (-tilt * s).exp() {
            atoms.push(Atom::new(x, s));
        }
        tail = theta * model.small_jump_mean(s);
        if tail <= trunc.tail_mass_cap {
            break;
        }
    }
    if tail > trunc.tail_mass_cap && trunc.hard_cap {
        return Err(Error::TruncationOverflow { achieved: tail, cap: trunc.tail_mass_cap, atoms: atoms.len() });
    }
    if trunc.compensate && tail > 0.0 && tail.is_finite() {
        let x = rng.uniform();
        atoms.push(Atom::new(x, tail));
        DiscreteMeasure::new(atoms, tail)
    } else {
        Ok(DiscreteMeasure::from_sorted(atoms, tail))
    }
}

/// The inverse-tail series with its arrival times, for every model.
pub fn sample_levy_traced(
    model: &LevyModel,
    base: &BaseSpace,
    trunc: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<TracedDraw> {
    model.validate()?;
    let theta = base.theta();
    let mut atoms = Vec::with_capacity(trunc.max_atoms.min(4096));
    let mut arrivals = Vec::with_capacity(trunc.max_atoms.min(4096));
    let mut arrival = 0.0;
    let mut prev = f64::INFINITY;
    let mut tail = f64::INFINITY;
    while atoms.len() < trunc.max_atoms {
        arrival += rng.exp1();
        let z = model.inverse_tail(arrival / theta).min(prev);
        if !(z >= MIN_CHARGE) {
            break;
        }
        let x = rng.uniform();
        atoms.push(Atom::new(x, z));
        arrivals.push(arrival);
        prev = z;
        tail = theta * model.small_jump_mean(z);
        if tail <= trunc.tail_mass_cap {
            break;
        }
    }
    if atoms.is_empty() {
        tail = theta * model.small_jump_mean(prev.min(f64::MAX));
    } else if prev < MIN_CHARGE * 10.0 {
        tail = tail.min(theta * model.small_jump_mean(prev));
    }
    if tail > trunc.tail_mass_cap && trunc.hard_cap {
        return Err(Error::TruncationOverflow { achieved: tail, cap: trunc.tail_mass_cap, atoms: atoms.len() });
    }
    let measure = if trunc.compensate && tail > 0.0 && tail.is_finite() {
        let x = rng.uniform();
        atoms.push(Atom::new(x, tail));
        DiscreteMeasure::new(atoms, tail)?
    } else {
        DiscreteMeasure::from_sorted(atoms, tail)
    };
    Ok(TracedDraw { measure, arrivals })
}

/// Expected stick residual `(θ/(θ+1))^n` after `n` breaks of `Beta(1, θ)`.
pub fn pd_expected_residual(theta: f64, n_terms: usize) -> f64 {
    (n_terms as f64 * (theta / (theta + 1.0)).ln()).exp()
}

/// Unsorted stick lengths of `GEM(θ)` and the residual stick.
fn gem_theta(theta: f64, n_terms: usize, rng: &mut RandomStream) -> (Vec<f64>, f64) {
    let mut rest = 1.0_f64;
    let mut sticks = Vec::with_capacity(n_terms.min(4096));
    for _ in 0..n_terms {
        // 1 - Beta(1, θ) = U^{1/θ} by inversion
        let log_keep = rng.uniform_open().ln() / theta;
        let piece = -rest * log_keep.exp_m1();
        rest *= log_keep.exp();
        if piece > 0.0 {
            sticks.push(piece);
        }
        if rest < MIN_CHARGE {
            break;
        }
    }
    (sticks, rest)
}

/// `PD(θ)` by stick breaking with `Beta(1, θ)` fractions, ordered.
pub fn sample_pd_theta(theta: f64, n_terms: usize, rng: &mut RandomStream) -> Result<SimplexSequence> {
    if !(theta > 0.0) || n_terms == 0 {
        return Err(Error::InvalidParameter(format!("PD(θ) needs θ > 0 and n ≥ 1, got {theta}, {n_terms}")));
    }
    let (sticks, rest) = gem_theta(theta, n_terms, rng);
    SimplexSequence::new(sticks, rest.max(pd_expected_residual(theta, n_terms)))
}

/// `PD(α, θ)`: the n-th stick fraction is `Beta(1-α, θ+nα)`.
pub fn sample_pd_alpha_theta(alpha: f64, theta: f64, n_terms: usize, rng: &mut RandomStream) -> Result<SimplexSequence> {
    if !(0.0..1.0).contains(&alpha) || !(theta > -alpha) || n_terms == 0 {
        return Err(Error::InvalidParameter(format!(
            "PD(α, θ) needs 0 ≤ α < 1, θ > -α, n ≥ 1; got α={alpha}, θ={theta}"
        )));
    }
    if alpha == 0.0 {
        return sample_pd_theta(theta, n_terms, rng);
    }
    let mut rest = 1.0_f64;
    let mut sticks = Vec::with_capacity(n_terms.min(4096));
    for n in 1..=n_terms {
        let (v, keep) = rng.beta_pair(1.0 - alpha, theta + n as f64 * alpha);
        let piece = rest * v;
        rest *= keep;
        if piece > 0.0 {
            sticks.push(piece);
        }
        if rest < MIN_CHARGE {
            break;
        }
    }
    SimplexSequence::new(sticks, rest)
}

/// `CPD(θ) = Gamma(θ,1) × PD(θ)`: a `PD(θ)` draw scaled by an independent
/// gamma length.
pub fn sample_cpd(theta: f64, n_terms: usize, rng: &mut RandomStream) -> Result<ConicSequence> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParameter(format!("CPD(θ) needs θ > 0, got {theta}")));
    }
    let length = rng.gamma(theta);
    let (sticks, rest) = gem_theta(theta, n_terms, rng);
    let terms: Vec<f64> = sticks.into_iter().map(|s| s * length).filter(|&s| s > 0.0).collect();
    ConicSequence::new(terms, rest * length)
}

/// The Lévy model of `γ·η` where `η` is the `α`-stable process (unit `c`)
/// exponentially tilted by `e^{-γ η(X)}`, `γ = k/α^{1/α}`:
/// density `k^α/Γ(1-α) · s^{-α-1} e^{-s}`.
pub fn tilted_scaled_stable_model(alpha: f64, k: f64) -> LevyModel {
    LevyModel::TemperedStable { alpha, c: k.powf(alpha) / alpha, tilt: 1.0 }
}

/// Draw from the scaled tilted stable law.
pub fn sample_tilted_scaled_stable(
    alpha: f64,
    k: f64,
    base: &BaseSpace,
    trunc: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<DiscreteMeasure> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("k must be positive, got {k}")));
    }
    sample_levy(&tilted_scaled_stable_model(alpha, k), base, trunc, rng)
}

/// Importance-weighted route to the same law: a unit-`c` stable draw `η`,
/// returned as `γ·η` with weight `exp(θγ^α - γ η(X))`. Only usable while
/// `γ = k/α^{1/α}` stays moderate (α ≳ 0.3).
pub fn sample_tilted_scaled_stable_weighted(
    alpha: f64,
    k: f64,
    base: &BaseSpace,
    trunc: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<(DiscreteMeasure, f64)> {
    let scale = k / alpha.powf(1.0 / alpha);
    if !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale k/α^(1/α) overflows at α={alpha}")));
    }
    let eta = sample_levy(&LevyModel::stable(alpha, 1.0), base, trunc, rng)?;
    let log_w = base.theta() * scale.powf(alpha) - scale * eta.total_charge();
    Ok((eta.scale(scale), log_w.exp()))
}

/// A unit-`c` stable draw and its unnormalized `P_{α,θ}` weight `η(X)^{-θ}`.
pub fn sample_p_alpha_theta_weighted(
    alpha: f64,
    theta: f64,
    base: &BaseSpace,
    trunc: &TruncationPolicy,
    rng: &mut RandomStream,
) -> Result<(DiscreteMeasure, f64)> {
    if !(theta > -alpha) {
        return Err(Error::InvalidParameter(format!("need θ > -α, got α={alpha}, θ={theta}")));
    }
    let eta = sample_levy(&LevyModel::stable(alpha, 1.0), base, trunc, rng)?;
    let total = eta.total_charge();
    if !(total > 0.0) {
        return Err(Error::ZeroMass);
    }
    let w = if theta == 0.0 { 1.0 } else { total.powf(-theta) };
    Ok((eta, w))
}

/// Result of reading the stable scale off a simplex point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleRecovery {
    /// Estimate of `lim n^{1/α} Qₙ`.
    pub limit: f64,
    /// Reconstructed total charge `(c/Γ(1-α))^{1/α} / limit`.
    pub scale: f64,
    /// False when `n^{1/α} Qₙ` drifts between the last two quartiles, i.e.
    /// the input is not in the stable tail regime.
    pub converged: bool,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Recovers the total charge of an `α`-stable process from its simplicial
/// part via the almost-sure limit `n^{1/α} Qₙ`.
pub fn recover_stable_scale(q: &SimplexSequence, alpha: f64, c: f64) -> Result<ScaleRecovery> {
    let terms = q.terms();
    let n = terms.len();
    if n < 64 {
        return Err(Error::InsufficientTerms { needed: 64, got: n });
    }
    let scaled = |range: std::ops::Range<usize>| -> Vec<f64> {
        range.map(|i| ((i + 1) as f64).powf(1.0 / alpha) * terms[i]).collect()
    };
    let last = median(scaled(3 * n / 4..n));
    let third = median(scaled(n / 2..3 * n / 4));
    let constant = (c / gamma(1.0 - alpha)).powf(1.0 / alpha);
    let converged = last > 0.0 && last.is_finite() && (third / last - 1.0).abs() < 0.25;
    Ok(ScaleRecovery { limit: last, scale: constant / last, converged })
}
