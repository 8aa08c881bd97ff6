use std::path::Path;

use anyhow::{bail, Context};
use heatquad::eval::{eigen_enumeration, ensemble_csv, ensemble_stats, spectrum, stats_csv, ErrorSpectrum, Series};
use heatquad::par;
use serde::Serialize;

use crate::args::{BenchArgs, MethodName};
use crate::commands::{build_points, is_stochastic, Ctx};
use crate::output::write_atomic;

pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_COUNT: usize = 200;

struct Job {
    method: MethodName,
    run_id: usize,
    seed: u64,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    method: &'a str,
    run_id: usize,
    seed: u64,
    status: &'a str,
    e_cum_last: Option<f64>,
    message: String,
}

fn run_job(job: &Job, a: &BenchArgs, n: usize, labels: &[heatquad::eval::EigenLabel]) -> anyhow::Result<ErrorSpectrum> {
    let m = a.manifold.resolve()?;
    let built = build_points(&m, n, job.method, &a.params, job.seed)?;
    Ok(spectrum(&built.ps, labels)?)
}

pub fn bench(ctx: &Ctx, a: &BenchArgs) -> anyhow::Result<()> {
    let m = a.manifold.resolve()?;
    let n = a.n.filter(|&n| n > 0).context("--n is required and must be positive")?;
    let runs = a.runs.unwrap_or(DEFAULT_RUNS);
    if runs == 0 {
        bail!("--runs must be positive");
    }
    let methods = a.methods.clone().filter(|v| !v.is_empty()).context("--methods is required")?;
    let count = a.count.unwrap_or(DEFAULT_COUNT);
    let dir = ctx.out.as_deref().context("bench needs --out <directory>")?;
    let labels = eigen_enumeration(&m, count)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut jobs = Vec::new();
    for &method in &methods {
        let k = if is_stochastic(method, &a.params) { runs } else { 1 };
        for run_id in 0..k {
            jobs.push(Job {
                method,
                run_id,
                seed: ctx.seed.wrapping_add(run_id as u64),
            });
        }
    }
    log::info!("{} runs over {} methods", jobs.len(), methods.len());
    let results = par::map_indexed(jobs.len(), |i| run_job(&jobs[i], a, n, &labels));

    let mut summary = csv::Writer::from_writer(Vec::new());
    let mut failed_methods = Vec::new();
    let mut numerical = false;
    for &method in &methods {
        let name = method.as_str();
        let mut ok: Vec<(usize, &ErrorSpectrum)> = Vec::new();
        for (job, res) in jobs.iter().zip(&results).filter(|(j, _)| j.method == method) {
            let row = match res {
                Ok(spec) => {
                    ok.push((job.run_id, spec));
                    SummaryRow {
                        method: name,
                        run_id: job.run_id,
                        seed: job.seed,
                        status: "ok",
                        e_cum_last: spec.e_cum.last().copied(),
                        message: String::new(),
                    }
                }
                Err(e) => {
                    log::warn!("{name} run {} failed: {e:#}", job.run_id);
                    SummaryRow {
                        method: name,
                        run_id: job.run_id,
                        seed: job.seed,
                        status: "failed",
                        e_cum_last: None,
                        message: format!("{e:#}"),
                    }
                }
            };
            summary.serialize(row)?;
        }
        if ok.is_empty() {
            failed_methods.push(name);
            numerical |= jobs
                .iter()
                .zip(&results)
                .any(|(j, r)| j.method == method && r.as_ref().err().is_some_and(crate::is_numerical));
            continue;
        }
        let spectra: Vec<ErrorSpectrum> = ok.iter().map(|(_, s)| (*s).clone()).collect();
        write_atomic(&dir.join(format!("{name}.csv")), ensemble_csv(&ok).as_bytes())?;
        write_atomic(
            &dir.join(format!("{name}.stat.csv")),
            stats_csv(&ensemble_stats(&spectra, Series::PerEigen)?).as_bytes(),
        )?;
        write_atomic(
            &dir.join(format!("{name}.cum.stat.csv")),
            stats_csv(&ensemble_stats(&spectra, Series::Cumulative)?).as_bytes(),
        )?;
    }
    write_atomic(&dir.join("summary.csv"), &summary.into_inner()?)?;
    write_config_echo(dir, ctx.seed, runs, count, a)?;

    if failed_methods.is_empty() {
        return Ok(());
    }
    let err = anyhow::anyhow!("every run failed for: {} (see summary.csv)", failed_methods.join(", "));
    Err(if numerical { err.context(crate::NumericalFailure) } else { err })
}

/// The resolved flags in config-file form, so `--config` can replay the run.
fn write_config_echo(dir: &Path, seed: u64, runs: usize, count: usize, a: &BenchArgs) -> anyhow::Result<()> {
    let mut v = serde_json::to_value(a)?;
    v["seed"] = seed.into();
    v["runs"] = runs.into();
    v["count"] = count.into();
    let text = serde_json::to_string_pretty(&v)? + "\n";
    write_atomic(&dir.join("bench.config.json"), text.as_bytes())
}
