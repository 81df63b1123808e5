use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use levylab::measure::BaseSpace;
use levylab::report::{csv_f64, SuiteReport};
use levylab::sampler::{
    sample_cpd, sample_levy, sample_pd_alpha_theta, sample_pd_theta, tilted_scaled_stable_model, TruncationPolicy,
};
use levylab::stats::try_parallel_map;
use levylab::suites::{run_suite, SuiteConfig};
use levylab::{LevyModel, RandomStream};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Format, Model};
use crate::CliError;

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Fills the sampling defaults so the manifest records every value used.
fn sample_config(cfg: &ExperimentConfig) -> ExperimentConfig {
    let d = TruncationPolicy::default();
    let mut r = cfg.clone();
    r.model = Some(cfg.model.unwrap_or(Model::Gamma));
    r.theta = Some(cfg.theta.unwrap_or(1.0));
    r.alpha = Some(cfg.alpha.unwrap_or(0.5));
    r.c = Some(cfg.c.unwrap_or(1.0));
    r.k = Some(cfg.k.unwrap_or(1.0));
    r.lambda = Some(cfg.lambda.unwrap_or(1.0));
    r.n = Some(cfg.n.unwrap_or(1000));
    r.n_terms = Some(cfg.n_terms.unwrap_or(256));
    r.seed = Some(cfg.seed());
    r.trunc_atoms = Some(cfg.trunc_atoms.unwrap_or(d.max_atoms));
    r.trunc_tail = Some(cfg.trunc_tail.unwrap_or(d.tail_mass_cap));
    r.out = Some(cfg.out_dir());
    r
}

pub fn sample(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let cfg = sample_config(cfg);
    let (theta, alpha) = (cfg.theta.unwrap_or(1.0), cfg.alpha.unwrap_or(0.5));
    let n = cfg.n.unwrap_or(0);
    let n_terms = cfg.n_terms.unwrap_or(256);
    let trunc = TruncationPolicy::default()
        .with_max_atoms(cfg.trunc_atoms.unwrap_or(2048))
        .with_tail_cap(cfg.trunc_tail.unwrap_or(1e-8));
    let model = cfg.model.unwrap_or(Model::Gamma);
    let levy = match model {
        Model::Gamma => Some(LevyModel::Gamma { lambda: cfg.lambda.unwrap_or(1.0) }),
        Model::Stable => Some(LevyModel::stable(alpha, cfg.c.unwrap_or(1.0))),
        Model::TiltedStable => Some(tilted_scaled_stable_model(alpha, cfg.k.unwrap_or(1.0))),
        _ => None,
    };
    if let Some(m) = &levy {
        m.validate()?;
    }
    let base = if levy.is_some() { BaseSpace::new(theta)? } else { BaseSpace::unit() };
    let rng = RandomStream::new(cfg.seed(), 0);
    let lines: Vec<(String, f64)> = try_parallel_map(n, &rng, |r| {
        let (v, tail) = match (&levy, model) {
            (Some(m), _) => {
                let eta = sample_levy(m, &base, &trunc, r)?;
                let t = eta.tail_bound();
                (serde_json::to_string(&eta), t)
            }
            (None, Model::Cpd) => {
                let z = sample_cpd(theta, n_terms, r)?;
                let t = z.tail_bound();
                (serde_json::to_string(&z), t)
            }
            (None, Model::Pd) => {
                let y = sample_pd_theta(theta, n_terms, r)?;
                (serde_json::to_string(&y), 1.0 - y.sum())
            }
            (None, _) => {
                let y = sample_pd_alpha_theta(alpha, theta, n_terms, r)?;
                (serde_json::to_string(&y), 1.0 - y.sum())
            }
        };
        Ok((v.expect("draw serializes"), tail))
    })?;
    let mut body = String::new();
    for (l, _) in &lines {
        body.push_str(l);
        body.push('\n');
    }
    let out = cfg.out_dir();
    let data = out.join("samples.jsonl");
    write(&data, &body)?;
    let tails: Vec<f64> = lines.iter().map(|l| l.1).collect();
    let mean_tail = tails.iter().sum::<f64>() / tails.len().max(1) as f64;
    let max_tail = tails.iter().copied().fold(0.0, f64::max);
    let manifest = json!({
        "config": cfg,
        "draws": n,
        "file": "samples.jsonl",
        "tail_bound_mean": mean_tail,
        "tail_bound_max": max_tail,
    });
    write(&out.join("manifest.json"), &pretty(&manifest))?;
    eprintln!("wrote {n} draws to {}", data.display());
    Ok(())
}

pub fn verify(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let suite = cfg.suite.ok_or_else(|| CliError::Config("verify needs --suite".into()))?;
    let report = run_suite(suite, &cfg.suite_config())?;
    // the manifest records the resolved suite parameters
    let resolved: SuiteConfig = serde_json::from_value(report.config.clone()).expect("suite config roundtrips");
    let mut manifest = cfg.clone();
    manifest.theta = resolved.theta;
    manifest.alpha = resolved.alpha;
    manifest.c = resolved.c;
    manifest.k = resolved.k;
    manifest.lambda = resolved.lambda;
    manifest.n = resolved.n;
    manifest.seed = Some(resolved.seed);
    manifest.trunc_atoms = resolved.trunc_atoms;
    manifest.trunc_tail = resolved.trunc_tail;
    manifest.alpha_grid = resolved.alpha_grid;
    manifest.z_grid = resolved.z_grid;
    manifest.panel = resolved.panel;
    manifest.out = None;
    manifest.format = None;

    let out = cfg.out_dir();
    let json = report.to_json() + "\n";
    let csv = report.to_csv();
    write(&out.join(format!("{suite}.json")), &json)?;
    write(&out.join(format!("{suite}.csv")), &csv)?;
    write(&out.join(format!("{suite}.manifest.json")), &pretty(&manifest))?;
    match cfg.format.unwrap_or_default() {
        Format::Json => print!("{json}"),
        Format::Csv => print!("{csv}"),
    }
    eprintln!("{suite}: {}", if report.pass { "PASS" } else { "FAIL" });
    Ok(report.pass)
}

/// Largest `|lhs - rhs| / se` over the rows with a positive SE.
fn max_z(c: &levylab::report::CheckReport) -> Option<f64> {
    let z = (0..c.lhs.len())
        .filter(|&i| c.se[i] > 0.0)
        .map(|i| (c.lhs[i] - c.rhs[i]).abs() / c.se[i])
        .fold(f64::NAN, f64::max);
    z.is_finite().then_some(z)
}

pub fn report(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    if cfg.inputs.is_empty() {
        return Err(CliError::Config("report needs at least one report JSON".into()));
    }
    let mut reports = Vec::new();
    for p in &cfg.inputs {
        let text = fs::read_to_string(p).map_err(|e| CliError::Io(p.clone(), e))?;
        let r: SuiteReport =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        reports.push(r);
    }
    reports.sort_by(|a, b| a.suite.cmp(&b.suite).then(a.seed.cmp(&b.seed)));

    let mut csv = String::from("suite,seed,check,rows,max_z,p_value,pass\n");
    let mut md = String::from("| suite | check | rows | max z | p | pass |\n|---|---|---:|---:|---:|---|\n");
    let mut plot = String::from("suite,check,x,y,se\n");
    for r in &reports {
        for c in &r.checks {
            let z = max_z(c);
            let p = c.params.get("holm_p").and_then(Value::as_f64).or(c.p_value);
            let _ = writeln!(
                csv,
                "{},{},\"{}\",{},{},{},{}",
                r.suite,
                r.seed,
                c.check.replace('"', "\"\""),
                c.grid.len(),
                z.map(csv_f64).unwrap_or_default(),
                p.map(csv_f64).unwrap_or_default(),
                c.pass
            );
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} |",
                r.suite,
                c.check.replace('|', "\\|"),
                c.grid.len(),
                z.map(|z| format!("{z:.2}")).unwrap_or_else(|| "-".into()),
                p.map(|p| format!("{p:.3e}")).unwrap_or_else(|| "-".into()),
                if c.pass { "pass" } else { "FAIL" }
            );
            for i in 0..c.grid.len() {
                let _ = writeln!(
                    plot,
                    "{},\"{}\",{},{},{}",
                    r.suite,
                    c.check.replace('"', "\"\""),
                    csv_f64(c.grid[i]),
                    csv_f64(c.lhs[i]),
                    csv_f64(c.se[i])
                );
            }
        }
    }
    let out = cfg.out_dir();
    write(&out.join("summary.csv"), &csv)?;
    write(&out.join("summary.md"), &md)?;
    write(&out.join("plot.csv"), &plot)?;
    match cfg.format.unwrap_or_default() {
        Format::Json => {
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| json!({"suite": r.suite, "seed": r.seed, "checks": r.checks.len(), "pass": r.pass}))
                .collect();
            print!("{}", pretty(&rows));
        }
        Format::Csv => print!("{csv}"),
    }
    Ok(reports.iter().all(|r| r.pass))
}
