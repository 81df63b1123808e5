//! Monte Carlo estimation and the hypothesis tests that turn identities into
//! pass/fail checks.

mod checks;
mod ks;

pub use checks::*;
pub use ks::{kolmogorov_q, ks_one_sample, ks_two_sample, ks_two_sample_exact_p, KsResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::rng::RandomStream;

/// Draws per work chunk. Chunk `i` always uses `rng.substream(i)`, so output
/// does not depend on thread count.
pub const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
    pub reference: Option<f64>,
    pub allowance: f64,
    /// Effective sample size; equals `n` for unweighted estimates.
    pub ess: f64,
    pub verdict: Verdict,
}

impl EstimatorSummary {
    /// Sample mean with `sd/√n` standard error.
    pub fn from_samples(xs: &[f64]) -> Self {
        let (mean, se) = mean_se(xs);
        EstimatorSummary {
            mean,
            se,
            n: xs.len(),
            reference: None,
            allowance: 0.0,
            ess: xs.len() as f64,
            verdict: Verdict::Pass,
        }
    }

    /// Self-normalized weighted mean, delta-method SE; warns if the effective
    /// sample size is below `n/10`.
    pub fn from_weighted(xs: &[f64], ws: &[f64]) -> Result<Self> {
        let (mean, se, ess) = weighted_mean_se(xs, ws)?;
        let n = xs.len();
        let verdict = if ess < n as f64 / 10.0 { Verdict::Warn } else { Verdict::Pass };
        Ok(EstimatorSummary { mean, se, n, reference: None, allowance: 0.0, ess, verdict })
    }

    /// Judges against `reference` at `3·se + allowance`. A prior warning is
    /// kept when the comparison passes.
    pub fn judge(mut self, reference: f64, allowance: f64) -> Self {
        self.reference = Some(reference);
        self.allowance = allowance;
        let ok = (self.mean - reference).abs() <= 3.0 * self.se + allowance;
        self.verdict = match (ok, self.verdict) {
            (false, _) => Verdict::Fail,
            (true, Verdict::Warn) => Verdict::Warn,
            _ => Verdict::Pass,
        };
        self
    }
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `(Σwx/Σw, SE, ESS)` with `SE² = Σw²(x - mean)²/(Σw)²` and
/// `ESS = (Σw)²/Σw²`.
pub fn weighted_mean_se(xs: &[f64], ws: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ws.len() {
        return Err(Error::InvalidParameter("samples and weights differ in length".into()));
    }
    if ws.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter("weights must be finite and non-negative".into()));
    }
    let sw: f64 = ws.iter().sum();
    if !(sw > 0.0 && sw.is_finite()) {
        return Err(Error::InvalidParameter("weights sum to zero".into()));
    }
    let mean = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let var = xs.iter().zip(ws).map(|(x, w)| (w * (x - mean)).powi(2)).sum::<f64>() / (sw * sw);
    let sw2: f64 = ws.iter().map(|w| w * w).sum();
    Ok((mean, var.sqrt(), sw * sw / sw2))
}

/// Runs `f` once per draw, `n` draws, chunked and seeded by chunk index.
/// Results come back in draw order.
pub fn parallel_map<T, F>(n: usize, rng: &RandomStream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomStream) -> T + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let run = |c: usize| -> Vec<T> {
        let mut stream = rng.substream(c as u64);
        let len = CHUNK.min(n - c * CHUNK);
        (0..len).map(|_| f(&mut stream)).collect()
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<T>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<T>> = (0..chunks).map(run).collect();
    parts.into_iter().flatten().collect()
}

/// Like [`parallel_map`] for fallible draws; the first error in draw order wins.
pub fn try_parallel_map<T, F>(n: usize, rng: &RandomStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RandomStream) -> Result<T> + Sync + Send,
{
    parallel_map(n, rng, f).into_iter().collect()
}

/// Mean of `statistic` over `n` draws of `sampler`.
pub fn mc_estimate<S, K>(statistic: K, sampler: S, n: usize, rng: &RandomStream) -> Result<EstimatorSummary>
where
    S: Fn(&mut RandomStream) -> Result<DiscreteMeasure> + Sync + Send,
    K: Fn(&DiscreteMeasure) -> f64 + Sync + Send,
{
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two draws".into()));
    }
    let xs = try_parallel_map(n, rng, |r| sampler(r).map(|eta| statistic(&eta)))?;
    Ok(EstimatorSummary::from_samples(&xs))
}

/// Self-normalized importance-sampling mean of `statistic` over a sampler
/// that returns `(η, weight)`.
pub fn weighted_mc_estimate<S, K>(statistic: K, sampler: S, n: usize, rng: &RandomStream) -> Result<EstimatorSummary>
where
    S: Fn(&mut RandomStream) -> Result<(DiscreteMeasure, f64)> + Sync + Send,
    K: Fn(&DiscreteMeasure) -> f64 + Sync + Send,
{
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two draws".into()));
    }
    let pairs = try_parallel_map(n, rng, |r| sampler(r).map(|(eta, w)| (statistic(&eta), w)))?;
    let (xs, ws): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    EstimatorSummary::from_weighted(&xs, &ws)
}
