//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a flat `Float64Array`; row layouts are documented on
//! each function.

use levylab::measure::{BaseSpace, TestFunction};
use levylab::sampler::{
    sample_levy, sample_pd_alpha_theta, sample_tilted_scaled_stable, tilted_scaled_stable_model, TruncationPolicy,
};
use levylab::stats::{mean_se, try_parallel_map};
use levylab::transform::{laplace_gamma, laplace_model};
use levylab::{LevyModel, RandomStream};
use wasm_bindgen::prelude::*;

fn js_err(e: levylab::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// First `n_terms` PD(α, θ) weights in size-biased stick-breaking order.
#[wasm_bindgen]
pub fn pd_sticks(alpha: f64, theta: f64, n_terms: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let mut rng = RandomStream::new(seed, 0);
    let y = sample_pd_alpha_theta(alpha, theta, n_terms, &mut rng).map_err(js_err)?;
    Ok(y.terms().to_vec())
}

/// One draw on `[0, 1]` as `[x₀, z₀, x₁, z₁, …]`, sorted by location.
/// `model` is `"gamma"` or `"stable"`; `alpha` is ignored for gamma.
#[wasm_bindgen]
pub fn process_draw(model: &str, theta: f64, alpha: f64, max_atoms: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let m = match model {
        "gamma" => LevyModel::gamma(),
        "stable" => LevyModel::stable(alpha, 1.0),
        other => return Err(JsError::new(&format!("unknown model '{other}'"))),
    };
    m.validate().map_err(js_err)?;
    let base = BaseSpace::new(theta).map_err(js_err)?;
    let trunc = TruncationPolicy::default().with_max_atoms(max_atoms.max(1));
    let mut rng = RandomStream::new(seed, 0);
    let eta = sample_levy(&m, &base, &trunc, &mut rng).map_err(js_err)?;
    let mut atoms: Vec<(f64, f64)> = eta.atoms().iter().map(|a| (a.location, a.charge)).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(atoms.into_iter().flat_map(|(x, z)| [x, z]).collect())
}

/// Laplace functional at `a ≡ level` of the scaled tilted stable process
/// against the gamma limit. Rows of five: `[α, analytic, monte carlo, se,
/// gamma]`; `n = 0` skips the Monte Carlo column (NaN).
#[wasm_bindgen]
pub fn weak_limit_curve(theta: f64, k: f64, level: f64, alphas: Vec<f64>, n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let base = BaseSpace::new(theta).map_err(js_err)?;
    let a = TestFunction::constant(level);
    let gamma = laplace_gamma(&a, &base).map_err(js_err)?;
    let trunc = TruncationPolicy::default().with_max_atoms(512).with_tail_cap(1e-10);
    let mut out = Vec::with_capacity(alphas.len() * 5);
    for (i, &alpha) in alphas.iter().enumerate() {
        let model = tilted_scaled_stable_model(alpha, k);
        model.validate().map_err(js_err)?;
        let exact = laplace_model(&a, &model, &base).map_err(js_err)?;
        let (m, se) = if n >= 2 {
            let rng = RandomStream::new(seed, i as u64);
            let v = try_parallel_map(n, &rng, |r| {
                let eta = sample_tilted_scaled_stable(alpha, k, &base, &trunc, r)?;
                Ok((-level * eta.total_charge()).exp())
            })
            .map_err(js_err)?;
            mean_se(&v)
        } else {
            (f64::NAN, f64::NAN)
        };
        out.extend([alpha, exact, m, se, gamma]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sticks_sum_below_one() {
        let y = pd_sticks(0.5, 1.0, 50, 3).unwrap();
        assert_eq!(y.len(), 50);
        let s: f64 = y.iter().sum();
        assert!(s > 0.0 && s <= 1.0 + 1e-12);
    }

    #[test]
    fn draw_is_sorted_pairs() {
        let v = process_draw("gamma", 1.0, 0.5, 64, 9).unwrap();
        assert_eq!(v.len() % 2, 0);
        assert!(v.chunks(2).all(|p| (0.0..=1.0).contains(&p[0]) && p[1] > 0.0));
        assert!(v.chunks(2).zip(v.chunks(2).skip(1)).all(|(a, b)| a[0] <= b[0]));
        assert_eq!(v, process_draw("gamma", 1.0, 0.5, 64, 9).unwrap());
    }

    #[test]
    fn curve_approaches_gamma() {
        let rows = weak_limit_curve(1.0, 1.0, 1.0, vec![0.4, 0.05], 0, 1).unwrap();
        let gap = |r: &[f64]| (r[1] - r[4]).abs();
        assert!(gap(&rows[5..10]) < gap(&rows[0..5]));
        assert!(rows[2].is_nan());
    }
}
