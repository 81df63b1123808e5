//! Lévy measures on `(0, ∞)` with density, tail, inverse tail and Laplace
//! exponent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::special::{exp_integral_e1, gamma, lower_gamma, upper_gamma_neg};

/// The jump-size measure `Λ` of a Lévy random measure.
///
/// Densities:
/// * `Gamma`: `s^{-1} e^{-λs}`
/// * `Stable`: `cα/Γ(1-α) · s^{-α-1}`
/// * `TemperedStable`: `cα/Γ(1-α) · s^{-α-1} e^{-tilt·s}`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LevyModel {
    Gamma { lambda: f64 },
    Stable { alpha: f64, c: f64 },
    TemperedStable { alpha: f64, c: f64, tilt: f64 },
}

impl LevyModel {
    pub fn gamma() -> Self {
        LevyModel::Gamma { lambda: 1.0 }
    }

    pub fn stable(alpha: f64, c: f64) -> Self {
        LevyModel::Stable { alpha, c }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            LevyModel::Gamma { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                bad(format!("gamma scale {lambda} must be positive"))
            }
            LevyModel::Stable { alpha, c } | LevyModel::TemperedStable { alpha, c, .. }
                if !(alpha > 0.0 && alpha < 1.0) || !(c > 0.0 && c.is_finite()) =>
            {
                bad(format!("need alpha in (0,1) and c > 0, got alpha={alpha}, c={c}"))
            }
            LevyModel::TemperedStable { tilt, .. } if !(tilt > 0.0 && tilt.is_finite()) => {
                bad(format!("tilt {tilt} must be positive"))
            }
            _ => Ok(()),
        }
    }

    fn stable_prefactor(alpha: f64, c: f64) -> f64 {
        c * alpha / gamma(1.0 - alpha)
    }

    /// Lévy density `λ(s)`.
    pub fn density(&self, s: f64) -> f64 {
        match *self {
            LevyModel::Gamma { lambda } => (-lambda * s).exp() / s,
            LevyModel::Stable { alpha, c } => Self::stable_prefactor(alpha, c) * s.powf(-alpha - 1.0),
            LevyModel::TemperedStable { alpha, c, tilt } => {
                Self::stable_prefactor(alpha, c) * s.powf(-alpha - 1.0) * (-tilt * s).exp()
            }
        }
    }

    /// Tail `m(t) = Λ(t, ∞)`.
    pub fn tail(&self, t: f64) -> f64 {
        match *self {
            LevyModel::Gamma { lambda } => exp_integral_e1(lambda * t),
            LevyModel::Stable { alpha, c } => c * t.powf(-alpha) / gamma(1.0 - alpha),
            LevyModel::TemperedStable { alpha, c, tilt } => {
                Self::stable_prefactor(alpha, c) * tilt.powf(alpha) * upper_gamma_neg(alpha, tilt * t)
            }
        }
    }

    /// Inverse tail `m⁻¹(u)`, `u > 0`. Closed form for the stable model;
    /// safeguarded Newton on `log t` otherwise, to relative 1e-12.
    pub fn inverse_tail(&self, u: f64) -> f64 {
        assert!(u > 0.0, "inverse tail needs u > 0");
        match *self {
            LevyModel::Stable { alpha, c } => (c / (gamma(1.0 - alpha) * u)).powf(1.0 / alpha),
            LevyModel::Gamma { lambda } => {
                // E1(x) ≈ -γ - ln x for small x, ≈ e^{-x}/x for large x
                let guess = if u > 1.0 {
                    -u - 0.577_215_664_901_532_9
                } else {
                    let l = (1.0 / u).ln();
                    (l - l.max(1e-3).ln()).max(1e-3).ln()
                };
                self.solve_tail(u, guess - lambda.ln())
            }
            LevyModel::TemperedStable { alpha, c, .. } => {
                let stable = (c / (gamma(1.0 - alpha) * u)).powf(1.0 / alpha);
                self.solve_tail(u, stable.max(1e-300).ln())
            }
        }
    }

    fn solve_tail(&self, u: f64, guess: f64) -> f64 {
        let f = |y: f64| self.tail(y.exp()) - u;
        // bracket: f decreasing in y
        let (mut lo, mut hi) = (guess - 1.0, guess + 1.0);
        while f(lo) < 0.0 {
            lo -= 2.0 * (hi - lo);
            if lo < -745.0 {
                lo = -745.0;
                break;
            }
        }
        while f(hi) > 0.0 {
            hi += 2.0 * (hi - lo);
            if hi > 710.0 {
                hi = 710.0;
                break;
            }
        }
        let mut y = guess.clamp(lo, hi);
        for _ in 0..200 {
            let t = y.exp();
            let fy = self.tail(t) - u;
            if fy > 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let slope = -t * self.density(t);
            let mut next = y - fy / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() < 1e-14 || hi - lo < 1e-14 {
                y = next;
                break;
            }
            y = next;
        }
        y.exp()
    }

    /// Laplace exponent `Φ(t) = ∫(1 - e^{-ts}) dΛ(s)` in closed form, so that
    /// `log ψ_Λ(t) = -Φ(t)`.
    pub fn laplace_exponent(&self, t: f64) -> f64 {
        match *self {
            LevyModel::Gamma { lambda } => (t / lambda).ln_1p(),
            LevyModel::Stable { alpha, c } => c * t.powf(alpha),
            LevyModel::TemperedStable { alpha, c, tilt } => c * ((tilt + t).powf(alpha) - tilt.powf(alpha)),
        }
    }

    /// `log ψ_Λ(t)`.
    pub fn log_laplace(&self, t: f64) -> f64 {
        -self.laplace_exponent(t)
    }

    /// `Φ(t)` by one-dimensional quadrature of the Lévy density, independent
    /// of the closed forms. Integrates over `w = log s`, split at `w = -log t`.
    pub fn laplace_exponent_quadrature(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        let g = |w: f64| {
            let s = w.exp();
            let v = -(-t * s).exp_m1() * self.density(s) * s;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let w0 = -t.ln();
        let right = quadrature::integrate_to_infinity(|w| g(w0 + w), 0.0, 1e-14, 1e-12)?;
        let left = quadrature::integrate_to_infinity(|w| g(w0 - w), 0.0, 1e-14, 1e-12)?;
        Ok(left + right)
    }

    /// Small-jump mean `∫_0^ε s dΛ(s)`.
    pub fn small_jump_mean(&self, eps: f64) -> f64 {
        if eps <= 0.0 {
            return 0.0;
        }
        match *self {
            LevyModel::Gamma { lambda } => -(-lambda * eps).exp_m1() / lambda,
            LevyModel::Stable { alpha, c } => {
                Self::stable_prefactor(alpha, c) * eps.powf(1.0 - alpha) / (1.0 - alpha)
            }
            LevyModel::TemperedStable { alpha, c, tilt } => {
                Self::stable_prefactor(alpha, c) * tilt.powf(alpha - 1.0) * lower_gamma(1.0 - alpha, tilt * eps)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn models() -> Vec<LevyModel> {
        vec![
            LevyModel::gamma(),
            LevyModel::Gamma { lambda: 2.5 },
            LevyModel::stable(0.5, 1.0),
            LevyModel::stable(0.3, 2.0),
            LevyModel::TemperedStable { alpha: 0.4, c: 2.5, tilt: 1.0 },
            LevyModel::TemperedStable { alpha: 0.05, c: 20.0, tilt: 1.0 },
            LevyModel::TemperedStable { alpha: 0.7, c: 1.0, tilt: 3.0 },
        ]
    }

    fn log_grid() -> Vec<f64> {
        (0..=28).map(|i| 10f64.powf(-6.0 + i as f64 * 0.25)).collect()
    }

    #[test]
    fn inverse_tail_roundtrip() {
        for m in models() {
            for t in log_grid() {
                let back = m.inverse_tail(m.tail(t));
                assert!(((back - t) / t).abs() < 1e-10, "{m:?} t={t} back={back}");
            }
        }
    }

    #[test]
    fn gamma_roundtrip_example() {
        let m = LevyModel::gamma();
        assert_relative_eq!(m.inverse_tail(m.tail(0.5)), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn stable_closed_form_inverse() {
        let m = LevyModel::stable(0.5, std::f64::consts::PI.sqrt());
        for (g, z) in [(1.0, 1.0), (2.0, 0.25), (3.0, 1.0 / 9.0)] {
            assert_relative_eq!(m.inverse_tail(g), z, max_relative = 1e-14);
        }
    }

    #[test]
    fn tail_conditions_hold() {
        for m in models() {
            m.validate().unwrap();
            let grid = log_grid();
            assert!(grid.windows(2).all(|w| m.tail(w[0]) > m.tail(w[1])), "{m:?} not decreasing");
            assert!(m.tail(1e-12) > 10.0, "{m:?} tail not blowing up");
            assert!(m.tail(1.0).is_finite());
            assert!(m.small_jump_mean(1.0).is_finite());
        }
    }

    #[test]
    fn small_jump_mean_matches_quadrature() {
        for m in models() {
            let eps = 0.3;
            let q = quadrature::integrate(|s| s * m.density(s), 0.0, eps, 1e-13, 1e-11).unwrap();
            assert_relative_eq!(m.small_jump_mean(eps), q, max_relative = 1e-7);
        }
    }

    #[test]
    fn tail_matches_density_quadrature() {
        for m in models() {
            let t = 0.7;
            // s = t·e^w keeps the algebraic tails integrable after mapping
            let q = quadrature::integrate_to_infinity(|w| m.density(t * w.exp()) * t * w.exp(), 0.0, 1e-14, 1e-12)
                .unwrap();
            assert_relative_eq!(m.tail(t), q, max_relative = 1e-7);
        }
    }

    #[test]
    fn laplace_exponent_specializations_agree() {
        for m in models() {
            for &t in &[1e-3, 0.25, 1.0, 4.0, 50.0] {
                let q = m.laplace_exponent_quadrature(t).unwrap();
                let exact = m.laplace_exponent(t);
                assert!(((q - exact) / exact).abs() < 1e-8, "{m:?} t={t}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(LevyModel::stable(1.2, 1.0).validate().is_err());
        assert!(LevyModel::Gamma { lambda: 0.0 }.validate().is_err());
        assert!(LevyModel::TemperedStable { alpha: 0.5, c: 1.0, tilt: -1.0 }.validate().is_err());
    }
}
