//! Kolmogorov–Smirnov tests.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    /// True when the p-value comes from the exact lattice-path distribution.
    pub exact: bool,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²}`, with
/// the Jacobi-transformed series for small `λ`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let pi2 = std::f64::consts::PI.powi(2);
        let y = -pi2 / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            s += (y * j * j).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let t = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { t } else { -t };
            if t < 1e-300 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn stephens_p(d: f64, ne: f64) -> f64 {
    let r = ne.sqrt();
    kolmogorov_q((r + 0.12 + 0.11 / r) * d)
}

/// One-sample test of `x` against a continuous CDF.
pub fn ks_one_sample(x: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &xi) in v.iter().enumerate() {
        let f = cdf(xi);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    KsResult { statistic: d, p_value: stephens_p(d, n), exact: false }
}

/// `max |i·m - j·n|` over the merged ECDF path, and whether ties occurred.
fn two_sample_lattice(x: &[f64], y: &[f64]) -> (u64, bool) {
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as i64, b.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: i64 = 0;
    let mut ties = false;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        let (si, sj) = (i, j);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        if i - si + j - sj > 1 {
            ties = true;
        }
        best = best.max((i as i64 * m - j as i64 * n).abs());
    }
    (best as u64, ties)
}

/// Exact `P(D ≥ k/(nm))` for the two-sample statistic with no ties: one
/// minus the fraction of monotone lattice paths from `(0,0)` to `(n,m)`
/// that keep `|i·m - j·n| < k`. Path fractions are propagated directly,
/// `q(i,j) = (i·q(i-1,j) + j·q(i,j-1))/(i+j)`, so nothing overflows.
pub fn ks_two_sample_exact_p(n: usize, m: usize, k: u64) -> f64 {
    let inside = |i: usize, j: usize| ((i * m) as i64 - (j * n) as i64).unsigned_abs() < k;
    let mut q = vec![0.0f64; m + 1];
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 && j == 0 {
                q[0] = if inside(0, 0) { 1.0 } else { 0.0 };
                continue;
            }
            if !inside(i, j) {
                q[j] = 0.0;
                continue;
            }
            let up = if i > 0 { q[j] * i as f64 } else { 0.0 };
            let left = if j > 0 { q[j - 1] * j as f64 } else { 0.0 };
            q[j] = (up + left) / (i + j) as f64;
        }
    }
    (1.0 - q[m]).clamp(0.0, 1.0)
}

/// Two-sample test. Exact p-value when there are no ties and `n·m ≤ 10⁶`,
/// Stephens-corrected asymptotic otherwise.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> KsResult {
    let (n, m) = (x.len(), y.len());
    if n == 0 || m == 0 {
        return KsResult { statistic: 0.0, p_value: 1.0, exact: false };
    }
    let (k, ties) = two_sample_lattice(x, y);
    let d = k as f64 / (n as f64 * m as f64);
    if !ties && (n as u64) * (m as u64) <= 1_000_000 {
        return KsResult { statistic: d, p_value: ks_two_sample_exact_p(n, m, k), exact: true };
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    KsResult { statistic: d, p_value: stephens_p(d, ne), exact: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use statrs::distribution::{ContinuousCDF, Gamma};

    /// Enumerates every interleaving of `n` x's and `m` y's.
    fn brute_force_p(n: usize, m: usize, k: u64) -> f64 {
        let total = n + m;
        let (mut hit, mut count) = (0u64, 0u64);
        for mask in 0u32..(1 << total) {
            if mask.count_ones() as usize != n {
                continue;
            }
            count += 1;
            let (mut i, mut j, mut best) = (0i64, 0i64, 0u64);
            for bit in 0..total {
                if mask >> bit & 1 == 1 {
                    i += 1;
                } else {
                    j += 1;
                }
                best = best.max((i * m as i64 - j * n as i64).unsigned_abs());
            }
            if best >= k {
                hit += 1;
            }
        }
        hit as f64 / count as f64
    }

    #[test]
    fn exact_matches_enumeration() {
        let sizes = [(1, 1), (2, 3), (3, 3), (4, 6), (5, 5), (7, 4), (8, 8), (10, 10), (10, 7)];
        for (n, m) in sizes {
            for k in 0..=(n * m) as u64 + 1 {
                let dp = ks_two_sample_exact_p(n, m, k);
                let bf = brute_force_p(n, m, k);
                assert!((dp - bf).abs() < 1e-12, "n={n} m={m} k={k}: {dp} vs {bf}");
            }
        }
    }

    #[test]
    fn identical_samples() {
        let x = [0.3, 0.1, 0.7];
        let r = ks_two_sample(&x, &x);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn kolmogorov_branches_agree() {
        for l in [1.0, 1.1, 1.17, 1.18, 1.2, 1.3] {
            let a = {
                let pi2 = std::f64::consts::PI.powi(2);
                let s: f64 = (1..=20).map(|k| (-pi2 * ((2 * k - 1) as f64).powi(2) / (8.0 * l * l)).exp()).sum();
                1.0 - (2.0 * std::f64::consts::PI).sqrt() / l * s
            };
            let b: f64 = 2.0 * (1..=100).map(|k| (if k % 2 == 1 { 1.0 } else { -1.0 }) * (-2.0 * (k * k) as f64 * l * l).exp()).sum::<f64>();
            assert!((a - b).abs() < 1e-12);
            assert!((kolmogorov_q(l) - a).abs() < 1e-12);
        }
        // tabulated: Q(1.36) ≈ 0.0494, Q(1.63) ≈ 0.0098
        assert!((kolmogorov_q(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_q(1.63) - 0.0098).abs() < 3e-4);
    }

    #[test]
    fn gamma_samples_against_cdf_and_power() {
        let mut rng = RandomStream::new(21, 0);
        let x: Vec<f64> = (0..20_000).map(|_| rng.gamma(1.0)).collect();
        let y: Vec<f64> = (0..20_000).map(|_| rng.gamma(2.0)).collect();
        let g1 = Gamma::new(1.0, 1.0).unwrap();
        assert!(ks_one_sample(&x, |v| g1.cdf(v)).p_value > 0.01);
        assert!(ks_two_sample(&x, &y).p_value < 1e-6);
        let z: Vec<f64> = (0..20_000).map(|_| rng.gamma(1.0)).collect();
        assert!(ks_two_sample(&x, &z).p_value > 0.01);
    }

    #[test]
    fn ties_fall_back_to_asymptotic() {
        let r = ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 3.0]);
        assert!(!r.exact);
    }
}
