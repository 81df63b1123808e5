//! Numerical integration: adaptive Gauss–Kronrod on finite and
//! semi-infinite ranges, and generalized Gauss–Laguerre rules.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

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
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive G7–K15 quadrature of `f` over `[a, b]`.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut pieces = vec![{
        let (v, e) = gk15(&f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    let total: f64 = pieces.iter().map(|p| p.2).sum();
    let err: f64 = pieces.iter().map(|p| p.3).sum();
    if err <= 10.0 * abs_tol.max(rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(Error::QuadratureFailure(format!(
            "error estimate {err:e} on [{a}, {b}] after subdivision limit"
        )))
    }
}

/// `∫_a^∞ f`, mapped onto `[0, 1)` by `x = a + t/(1-t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let u = 1.0 - t;
            let v = f(a + t / u) / (u * u);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
    )
}

/// Nodes and weights for `∫_0^∞ x^{s} e^{-x} g(x) dx ≈ Σ wᵢ g(xᵢ)`.
#[derive(Debug, Clone)]
pub struct LaguerreRule {
    pub nodes: Vec<f64>,
    /// Natural logs of the weights; the largest nodes carry weights far
    /// below the double range.
    pub log_weights: Vec<f64>,
}

impl LaguerreRule {
    /// Golub–Welsch construction for exponent `s > -1`.
    pub fn new(n: usize, s: f64) -> Self {
        assert!(n >= 1 && s > -1.0);
        let mut jac = nalgebra::DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            jac[(k, k)] = 2.0 * k as f64 + s + 1.0;
            if k + 1 < n {
                let kk = (k + 1) as f64;
                let off = (kk * (kk + s)).sqrt();
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let eig = nalgebra::SymmetricEigen::new(jac);
        let log_mu0 = crate::special::ln_gamma(s + 1.0);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], log_mu0 + 2.0 * v0.abs().max(1e-300).ln())
            })
            .collect();
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        LaguerreRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            log_weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Shared, lazily built rule for `(n, s)`.
    pub fn cached(n: usize, s: f64) -> Arc<LaguerreRule> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<LaguerreRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (n, s.to_bits());
        if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&key) {
            return rule.clone();
        }
        let rule = Arc::new(LaguerreRule::new(n, s));
        cache.lock().expect("rule cache poisoned").insert(key, rule.clone());
        rule
    }

    /// `Σ wᵢ exp(log_g(xᵢ))`, accumulated in log space.
    pub fn integrate_log<G: Fn(f64) -> f64>(&self, log_g: G) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(&x, &lw)| lw + log_g(x))
            .collect();
        log_sum_exp(&terms).exp()
    }
}

/// Numerically stable `log Σ exp(vᵢ)`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(v, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn log_singularity() {
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert_relative_eq!(v, -1.0, max_relative = 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1e-13, 1e-13).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-11);
    }

    #[test]
    fn laguerre_moments() {
        // ∫ x^s e^{-x} x^k dx = Γ(s + k + 1)
        for &s in &[0.0, -0.5, 1.5] {
            let rule = LaguerreRule::new(32, s);
            for k in 0..6 {
                let v = rule.integrate_log(|x| k as f64 * x.ln());
                let exact = crate::special::gamma(s + k as f64 + 1.0);
                assert_relative_eq!(v, exact, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn laguerre_cache_reuses() {
        let a = LaguerreRule::cached(16, 0.25);
        let b = LaguerreRule::cached(16, 0.25);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
