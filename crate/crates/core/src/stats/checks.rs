use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{ks_two_sample, mean_se, try_parallel_map, weighted_mean_se};
use crate::density::{apply_multiplicator, log_rn_density_gamma, markov_s_a, pd_density, quasi_lebesgue_weight};
use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::measure::{functional_f_a, log_integral, BaseSpace, DiscreteMeasure, SimplexSequence, TestFunction};
use crate::report::CheckReport;
use crate::rng::RandomStream;
use crate::sampler::{
    sample_levy, sample_pd_theta, sample_tilted_scaled_stable, sample_tilted_scaled_stable_weighted,
    tilted_scaled_stable_model, TruncationPolicy,
};
use crate::transform::{laplace_gamma, laplace_model};

/// A real statistic of a measure.
pub type MeasureStat<'a> = &'a (dyn Fn(&DiscreteMeasure) -> f64 + Sync);
/// A real statistic of a simplex point.
pub type SimplexStat<'a> = &'a (dyn Fn(&SimplexSequence) -> f64 + Sync);

/// KS outcome as a check; the p-value enters the suite's Holm correction.
pub fn ks_report(check: &str, statistic: f64, p: f64, level: f64) -> CheckReport {
    CheckReport::new(check).with_p_value(statistic, p, level)
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut r = vec![0.0; x.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && x[idx[e + 1]] == x[idx[k]] {
            e += 1;
        }
        let avg = 0.5 * (k + e) as f64;
        for &i in &idx[k..=e] {
            r[i] = avg;
        }
        k = e + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return if sxx == syy { 1.0 } else { 0.0 };
    }
    sxy / (sxx * syy).sqrt()
}

/// Rank correlation (`|ρ| < 3/√N`) plus a 4×4 quartile contingency
/// chi-square (`p > 0.01`). Under independence each part fails with
/// probability about 0.003 and 0.01, so the union is near 0.013.
pub fn independence_test(u: &[f64], v: &[f64]) -> Result<CheckReport> {
    if u.len() != v.len() || u.len() < 16 {
        return Err(Error::InvalidParameter("independence test needs equal lengths ≥ 16".into()));
    }
    let n = u.len();
    let (ru, rv) = (ranks(u), ranks(v));
    let rho = pearson(&ru, &rv);
    let bin = |r: f64| ((4.0 * r / n as f64) as usize).min(3);
    let mut table = [[0.0f64; 4]; 4];
    for (a, b) in ru.iter().zip(&rv) {
        table[bin(*a)][bin(*b)] += 1.0;
    }
    let rows: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..4).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut chi2 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let e = rows[i] * cols[j] / n as f64;
            if e > 0.0 {
                chi2 += (table[i][j] - e).powi(2) / e;
            }
        }
    }
    let p = ChiSquared::new(9.0).expect("df 9").sf(chi2);
    let limit = 3.0 / (n as f64).sqrt();
    let mut r = CheckReport::new("independence").param("n", n).param("chi2", chi2).param("chi2_p", p);
    r.row_with(0.0, rho, 1.0 / (n as f64).sqrt(), 0.0, rho.abs() < limit);
    r.require(p > 0.01, format!("FAIL contingency chi-square p = {p:.3e}"));
    Ok(r)
}

/// Mean across draws of a per-draw estimate, with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub estimate: f64,
    pub se: f64,
    pub draws: usize,
    /// For tail constants: whether `zₙ n^{1/α}` is flat across the window.
    pub regime_ok: bool,
}

fn window_terms(z: &[f64], window: (usize, usize)) -> Result<&[f64]> {
    let (lo, hi) = window;
    if lo < 1 || hi < lo + 1 {
        return Err(Error::InvalidParameter(format!("bad window [{lo}, {hi}]")));
    }
    if z.len() < hi {
        return Err(Error::InsufficientTerms { needed: hi, got: z.len() });
    }
    Ok(&z[lo - 1..hi])
}

/// Least-squares slope of `log zₙ` on `n` over the 1-based inclusive
/// `window`, averaged across draws.
pub fn tail_slope(draws: &[&[f64]], window: (usize, usize)) -> Result<TailEstimate> {
    let mut slopes = Vec::with_capacity(draws.len());
    for z in draws {
        let w = window_terms(z, window)?;
        let xs: Vec<f64> = (window.0..=window.1).map(|n| n as f64).collect();
        let ys: Vec<f64> = w.iter().map(|v| v.ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        slopes.push(sxy / sxx);
    }
    let (estimate, se) = mean_se(&slopes);
    Ok(TailEstimate { estimate, se, draws: draws.len(), regime_ok: true })
}

/// Estimate of `lim zₙ n^{1/α}` over `window`; `regime_ok` is false when the
/// scaled terms drift by more than 25% between the window halves.
pub fn stable_tail_constant(draws: &[&[f64]], alpha: f64, window: (usize, usize)) -> Result<TailEstimate> {
    let mut per = Vec::with_capacity(draws.len());
    let (mut first, mut second) = (0.0, 0.0);
    for z in draws {
        let w = window_terms(z, window)?;
        let scaled: Vec<f64> =
            w.iter().enumerate().map(|(i, v)| v * ((window.0 + i) as f64).powf(1.0 / alpha)).collect();
        let half = scaled.len() / 2;
        first += scaled[..half].iter().sum::<f64>() / half as f64;
        second += scaled[half..].iter().sum::<f64>() / (scaled.len() - half) as f64;
        per.push(scaled.iter().sum::<f64>() / scaled.len() as f64);
    }
    let (estimate, se) = mean_se(&per);
    let ratio = second / first;
    let regime_ok = ratio.is_finite() && (ratio - 1.0).abs() < 0.25 && estimate > 0.0;
    Ok(TailEstimate { estimate, se, draws: draws.len(), regime_ok })
}

/// `E[k(M_aη)]` against `E[k(η)ρ_a(η)]` over the same gamma draws; the SE is
/// that of the paired difference. The allowance covers the density's
/// neglect of the truncated tail.
pub fn quasi_invariance_test(
    name: &str,
    a: &TestFunction,
    k: MeasureStat,
    base: &BaseSpace,
    n: usize,
    trunc: &TruncationPolicy,
    rng: &RandomStream,
) -> Result<CheckReport> {
    a.check_in_group()?;
    let tilde = (1.0 / a.lower() - 1.0).abs().max((1.0 / a.upper() - 1.0).abs());
    let rows = try_parallel_map(n, rng, |r| {
        let eta = sample_levy(&LevyModel::gamma(), base, trunc, r)?;
        let moved = apply_multiplicator(a, &eta)?;
        let rho = log_rn_density_gamma(a, &eta, base)?.exp();
        let right = k(&eta) * rho;
        Ok((k(&moved), right, right.abs() * tilde * eta.tail_bound()))
    })?;
    let lhs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let rhs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diff: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
    let allow = rows.iter().map(|r| r.2).sum::<f64>() / n as f64;
    let (ml, _) = mean_se(&lhs);
    let (mr, _) = mean_se(&rhs);
    let (_, sd) = mean_se(&diff);
    let mut rep = CheckReport::new(format!("quasi-invariance/{name}"))
        .param("a", a.name())
        .param("theta", base.theta())
        .param("n", n);
    rep.row(0.0, ml, sd, mr, allow);
    Ok(rep)
}

/// `E_P[ρ_a] = 1`.
pub fn density_normalization_test(
    a: &TestFunction,
    base: &BaseSpace,
    n: usize,
    trunc: &TruncationPolicy,
    rng: &RandomStream,
) -> Result<CheckReport> {
    let xs = try_parallel_map(n, rng, |r| {
        let eta = sample_levy(&LevyModel::gamma(), base, trunc, r)?;
        Ok(log_rn_density_gamma(a, &eta, base)?.exp())
    })?;
    let (m, se) = mean_se(&xs);
    let mut rep = CheckReport::new("density-normalization").param("a", a.name()).param("theta", base.theta());
    rep.row(0.0, m, se, 1.0, 0.0);
    Ok(rep)
}

/// `E[k(S_aY)]` against `E[k(Y)·pd_density(Y)]` for `Y ~ PD(θ)`, each
/// statistic paired on the same draws.
#[allow(clippy::too_many_arguments)]
pub fn pd_quasi_invariance_test(
    a: &TestFunction,
    stats: &[(&str, SimplexStat)],
    theta: f64,
    n: usize,
    n_terms: usize,
    n_product: usize,
    quad_nodes: usize,
    rng: &RandomStream,
) -> Result<CheckReport> {
    let m = stats.len();
    let rows = try_parallel_map(n, rng, |r| {
        let y = sample_pd_theta(theta, n_terms, r)?;
        let moved = markov_s_a(&y, a, r)?;
        let dens = pd_density(&y, a, theta, n_product, quad_nodes)?;
        let mut out = Vec::with_capacity(2 * m + 1);
        for (_, k) in stats {
            out.push(k(&moved));
            out.push(k(&y) * dens.density.value);
        }
        out.push(dens.tail_error.abs() * dens.density.value);
        Ok(out)
    })?;
    let mut rep = CheckReport::new("pd-quasi-invariance")
        .param("a", a.name())
        .param("theta", theta)
        .param("n", n)
        .param("n_terms", n_terms)
        .param("n_product", n_product);
    let tail_err = rows.iter().map(|r| r[2 * m]).sum::<f64>() / n as f64;
    for (i, (name, _)) in stats.iter().enumerate() {
        let l: Vec<f64> = rows.iter().map(|r| r[2 * i]).collect();
        let rr: Vec<f64> = rows.iter().map(|r| r[2 * i + 1]).collect();
        let d: Vec<f64> = l.iter().zip(&rr).map(|(x, y)| x - y).collect();
        let (ml, _) = mean_se(&l);
        let (mr, _) = mean_se(&rr);
        let (_, sd) = mean_se(&d);
        rep.row(i as f64, ml, sd, mr, tail_err);
        rep.note(format!("row {i}: {name}"));
    }
    Ok(rep)
}

/// Invariance of `e^{η(X)} dP_Γ` under `M_b` with `∫log b = 0`, through
/// functionals that vanish once the total charge exceeds `b_min·cutoff`.
/// Both sides then only see `η(X) ≤ cutoff`, where the weight is bounded.
pub fn quasi_lebesgue_test(
    name: &str,
    b: &TestFunction,
    base: &BaseSpace,
    n: usize,
    cutoff: f64,
    trunc: &TruncationPolicy,
    rng: &RandomStream,
) -> Result<CheckReport> {
    let li = log_integral(b, base)?;
    if li.abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("∫log b dν = {li:e}, expected 0")));
    }
    quasi_lebesgue_compare(name, b, base, n, cutoff, trunc, rng)
}

/// Shared body of [`quasi_lebesgue_test`]; also used unguarded as a power
/// control with a non-zero log-integral.
pub fn quasi_lebesgue_compare(
    name: &str,
    b: &TestFunction,
    base: &BaseSpace,
    n: usize,
    cutoff: f64,
    trunc: &TruncationPolicy,
    rng: &RandomStream,
) -> Result<CheckReport> {
    let b_min = b.lower().min(1.0);
    let support = b_min * cutoff;
    let h = TestFunction::linear(1.0, 1.0)?;
    let cut = |xi: &DiscreteMeasure, g: f64| if xi.total_charge() <= support { g } else { 0.0 };
    let functionals: [(&str, Box<dyn Fn(&DiscreteMeasure) -> f64 + Sync + '_>); 3] = [
        ("exp(-2 total)", Box::new(|xi| cut(xi, (-2.0 * xi.total_charge()).exp()))),
        ("exp(-2 f_(1+x))", Box::new(|xi| cut(xi, (-2.0 * functional_f_a(&h, xi)).exp()))),
        (
            "top share * exp(-2 total)",
            Box::new(|xi| {
                let s = xi.total_charge();
                let top = xi.atoms().first().map_or(0.0, |a| a.charge);
                cut(xi, if s > 0.0 { top / s * (-2.0 * s).exp() } else { 0.0 })
            }),
        ),
    ];
    let lip = 2.0 * 2.0 * b.upper().max(1.0);
    let rows = try_parallel_map(n, rng, |r| {
        let eta = sample_levy(&LevyModel::gamma(), base, trunc, r)?;
        let w = quasi_lebesgue_weight(&eta, cutoff);
        let moved = apply_multiplicator(b, &eta)?;
        let mut out: Vec<f64> = Vec::with_capacity(7);
        for (_, f) in &functionals {
            out.push(f(&moved) * w);
            out.push(f(&eta) * w);
        }
        out.push(w * lip * eta.tail_bound());
        Ok(out)
    })?;
    let allow = rows.iter().map(|r| r[6]).sum::<f64>() / n as f64;
    let mut rep = CheckReport::new(format!("quasi-lebesgue/{name}"))
        .param("b", b.name())
        .param("theta", base.theta())
        .param("cutoff", cutoff)
        .param("n", n);
    for (i, (fname, _)) in functionals.iter().enumerate() {
        let l: Vec<f64> = rows.iter().map(|r| r[2 * i]).collect();
        let rr: Vec<f64> = rows.iter().map(|r| r[2 * i + 1]).collect();
        let d: Vec<f64> = l.iter().zip(&rr).map(|(x, y)| x - y).collect();
        rep.row(i as f64, mean_se(&l).0, mean_se(&d).1, mean_se(&rr).0, allow);
        rep.note(format!("row {i}: {fname}"));
    }
    Ok(rep)
}

fn variance_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    (v, ((m4 - v * v) / n).max(0.0).sqrt())
}

/// Brownian motion run at gamma time against a scaled difference of two
/// independent gamma totals, at horizon `t`. Returns the variance check, the
/// KS check, and the unscaled negative control (which must reject).
pub fn subordination_test(t: f64, n: usize, trunc: &TruncationPolicy, rng: &RandomStream) -> Result<Vec<CheckReport>> {
    let base = BaseSpace::new(t)?;
    let model = LevyModel::gamma();
    let draws = try_parallel_map(n, rng, |r| {
        let g = sample_levy(&model, &base, trunc, r)?.total_charge();
        let normal = r.normal();
        let g1 = sample_levy(&model, &base, trunc, r)?.total_charge();
        let g2 = sample_levy(&model, &base, trunc, r)?.total_charge();
        Ok((normal * g.sqrt(), (g1 - g2) / std::f64::consts::SQRT_2, g1 - g2))
    })?;
    let mixed: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let diff: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let unscaled: Vec<f64> = draws.iter().map(|d| d.2).collect();

    let mut moments = CheckReport::new(format!("subordination/variance t={t}")).param("t", t).param("n", n);
    let (va, sa) = variance_with_se(&mixed);
    let (vb, sb) = variance_with_se(&diff);
    moments.row(0.0, va, sa, t, 0.0);
    moments.row(1.0, vb, sb, t, 0.0);

    let ks = ks_two_sample(&mixed, &diff);
    let ks_rep = ks_report(&format!("subordination/ks t={t}"), ks.statistic, ks.p_value, 0.01)
        .param("t", t)
        .param("n", n);

    let bad = ks_two_sample(&mixed, &unscaled);
    let mut control = CheckReport::new(format!("subordination/unscaled-control t={t}")).param("t", t);
    control.row_with(bad.statistic, bad.p_value, 0.0, 1e-6, bad.p_value < 1e-6);
    Ok(vec![moments, ks_rep, control])
}

/// Parameters of [`weak_limit_test`].
#[derive(Debug, Clone)]
pub struct WeakLimitSpec {
    pub k: f64,
    pub alpha_grid: Vec<f64>,
    pub panel: Vec<TestFunction>,
    pub base: BaseSpace,
    pub n: usize,
    pub trunc: TruncationPolicy,
    /// Bound on the final-α Laplace discrepancy to the gamma value.
    pub final_tol: f64,
    /// α at which the importance-weighted sampler is cross-checked, if any.
    pub cross_check_alpha: Option<f64>,
}

/// Laplace functional of the scaled tilted stable law along a decreasing α
/// grid: per-α agreement with its own closed form, strictly decreasing
/// distance to the gamma value, and a final-α bound. Every α reuses the same
/// random streams.
pub fn weak_limit_test(spec: &WeakLimitSpec, rng: &RandomStream) -> Result<Vec<CheckReport>> {
    let base = &spec.base;
    let mut exact = CheckReport::new("weak-limit/sampler-exactness").param("k", spec.k).param("n", spec.n);
    let mut discrepancy: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); spec.panel.len()];
    let gamma_targets: Vec<f64> = spec.panel.iter().map(|a| laplace_gamma(a, base)).collect::<Result<_>>()?;
    for &alpha in &spec.alpha_grid {
        let model = tilted_scaled_stable_model(alpha, spec.k);
        let rows = try_parallel_map(spec.n, rng, |r| {
            let eta = sample_tilted_scaled_stable(alpha, spec.k, base, &spec.trunc, r)?;
            let mut v: Vec<f64> = spec.panel.iter().map(|a| (-functional_f_a(a, &eta)).exp()).collect();
            v.push(eta.tail_bound());
            Ok(v)
        })?;
        let m = spec.panel.len();
        let tail = rows.iter().map(|r| r[m]).sum::<f64>() / spec.n as f64;
        for (i, a) in spec.panel.iter().enumerate() {
            let xs: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            let (mean, se) = mean_se(&xs);
            let target = laplace_model(a, &model, base)?;
            let allow = a.integrate(|v| v)? * tail;
            exact.row(alpha, mean, se, target, allow);
            discrepancy[i].push((alpha, (mean - gamma_targets[i]).abs(), se));
        }
    }
    let mut out = vec![exact];
    for (i, a) in spec.panel.iter().enumerate() {
        let d = &discrepancy[i];
        let mut mono = CheckReport::new(format!("weak-limit/monotone-decrease[{}]", a.name()))
            .param("k", spec.k)
            .param("gamma_target", gamma_targets[i]);
        for (j, &(alpha, dist, se)) in d.iter().enumerate() {
            let ok = j == 0 || dist < d[j - 1].1;
            mono.row_with(alpha, dist, se, 0.0, ok);
        }
        out.push(mono);
        if let Some(&(alpha, dist, se)) = d.last() {
            let mut fin = CheckReport::new(format!("weak-limit/final-discrepancy[{}]", a.name()))
                .param("k", spec.k)
                .param("alpha", alpha)
                .param("gamma_target", gamma_targets[i]);
            fin.row_with(alpha, dist, se, spec.final_tol, dist < spec.final_tol);
            out.push(fin);
        }
    }
    if let Some(alpha) = spec.cross_check_alpha {
        let mut cross = CheckReport::new("weak-limit/importance-cross-check").param("alpha", alpha).param("k", spec.k);
        let direct = try_parallel_map(spec.n, rng, |r| {
            let eta = sample_tilted_scaled_stable(alpha, spec.k, base, &spec.trunc, r)?;
            Ok(spec.panel.iter().map(|a| (-functional_f_a(a, &eta)).exp()).collect::<Vec<f64>>())
        })?;
        let weighted = try_parallel_map(spec.n, &rng.substream(u64::MAX), |r| {
            let (eta, w) = sample_tilted_scaled_stable_weighted(alpha, spec.k, base, &spec.trunc, r)?;
            Ok((spec.panel.iter().map(|a| (-functional_f_a(a, &eta)).exp()).collect::<Vec<f64>>(), w))
        })?;
        let ws: Vec<f64> = weighted.iter().map(|p| p.1).collect();
        for i in 0..spec.panel.len() {
            let xd: Vec<f64> = direct.iter().map(|r| r[i]).collect();
            let xw: Vec<f64> = weighted.iter().map(|p| p.0[i]).collect();
            let (md, sd) = mean_se(&xd);
            let (mw, sw, ess) = weighted_mean_se(&xw, &ws)?;
            cross.row(i as f64, mw, (sd * sd + sw * sw).sqrt(), md, 0.0);
            if ess < spec.n as f64 / 10.0 {
                cross.note(format!("WARN effective sample size {ess:.0} of {}", spec.n));
            }
        }
        out.push(cross);
    }
    Ok(out)
}

/// Parameters echoed into reports.
pub fn weak_limit_params(spec: &WeakLimitSpec) -> serde_json::Value {
    json!({
        "k": spec.k,
        "alpha_grid": spec.alpha_grid,
        "theta": spec.base.theta(),
        "n": spec.n,
        "final_tol": spec.final_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dependent_samples_fail_independence() {
        let mut r = RandomStream::new(1, 0);
        let u: Vec<f64> = (0..5000).map(|_| r.uniform()).collect();
        assert!(!independence_test(&u, &u).unwrap().pass);
        let v: Vec<f64> = (0..5000).map(|_| r.uniform()).collect();
        assert!(independence_test(&u, &v).unwrap().pass);
    }

    #[test]
    fn deterministic_slopes_and_constants() {
        let z: Vec<f64> = (1..=500).map(|n| (-(n as f64) / 2.0).exp()).collect();
        let s = tail_slope(&[&z], (100, 400)).unwrap();
        assert!((s.estimate + 0.5).abs() < 1e-12);
        let lambda = 0.7;
        let z: Vec<f64> = (1..=500).map(|n| lambda * (n as f64).powi(-2)).collect();
        let c = stable_tail_constant(&[&z], 0.5, (100, 400)).unwrap();
        assert!((c.estimate - lambda).abs() < 1e-12);
        assert!(c.regime_ok);
        let geometric: Vec<f64> = (1..=500).map(|n| (-(n as f64) / 2.0).exp()).collect();
        assert!(!stable_tail_constant(&[&geometric], 0.5, (100, 400)).unwrap().regime_ok);
        assert!(tail_slope(&[&z], (100, 600)).is_err());
    }

    #[test]
    fn identity_multiplier_is_streamwise_identical() {
        let k = |e: &DiscreteMeasure| (-e.total_charge()).exp();
        let rep = quasi_invariance_test(
            "one",
            &TestFunction::constant(1.0),
            &k,
            &BaseSpace::unit(),
            2000,
            &TruncationPolicy::default(),
            &RandomStream::new(1, 0),
        )
        .unwrap();
        assert_eq!(rep.lhs, rep.rhs);
        assert_eq!(rep.se[0], 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn constant_two_gives_one_third() {
        let k = |e: &DiscreteMeasure| (-e.total_charge()).exp();
        let rep = quasi_invariance_test(
            "two",
            &TestFunction::constant(2.0),
            &k,
            &BaseSpace::unit(),
            20_000,
            &TruncationPolicy::default(),
            &RandomStream::new(2, 0),
        )
        .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.lhs[0] - 1.0 / 3.0).abs() < 0.01);
        assert!((rep.rhs[0] - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn quasi_lebesgue_rejects_nonzero_log() {
        let b = TestFunction::constant(1.2);
        let r = quasi_lebesgue_test("x", &b, &BaseSpace::unit(), 10, 10.0, &TruncationPolicy::default(), &RandomStream::new(0, 0));
        assert!(r.is_err());
    }

    #[test]
    fn subordination_small_run() {
        let reps = subordination_test(1.0, 5000, &TruncationPolicy::default(), &RandomStream::new(3, 0)).unwrap();
        assert!(reps[0].pass, "{:?}", reps[0]);
        assert!(reps[1].p_value.unwrap() > 1e-3);
        assert!(reps[2].pass, "{:?}", reps[2]);
    }
}
