use std::path::Path;

use anyhow::{bail, Context};
use heatquad::annealer::{anneal, AnnealConfig, Init};
use heatquad::baselines::{self, GeneratorSpec, Method};
use heatquad::energy::{default_bandwidth, EnergySpec};
use heatquad::eval::{sphere_exactness_degree, spectrum_first};
use heatquad::geometry::{read_point_set, write_point_set_string, Format};
use heatquad::weights::with_solved_weights;
use heatquad::{ManifoldSpec, PointSet};

use crate::args::{EvalArgs, GenerateArgs, ImportArgs, ManifoldArgs, MethodArgs, MethodName, WeightsArgs};
use crate::output::emit;

pub const DEFAULT_EVAL_COUNT: usize = 200;
pub const DEFAULT_DESIGN_LMAX: usize = 20;
pub const DEFAULT_DESIGN_TOL: f64 = 1e-20;

/// Resolved global options.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub seed: u64,
    pub out: Option<std::path::PathBuf>,
    pub format: Format,
}

/// A point set and, for annealed sets, the energy trace.
pub struct Built {
    pub ps: PointSet,
    pub trace: Option<String>,
}

/// Whether repeated runs of `method` differ by seed.
pub fn is_stochastic(method: MethodName, p: &MethodArgs) -> bool {
    match method {
        MethodName::Lhs | MethodName::Uniform => true,
        MethodName::Sobol => p.scramble.unwrap_or(false),
        m => m.is_anneal(),
    }
}

fn bandwidth(p: &MethodArgs, m: &ManifoldSpec, n: usize) -> anyhow::Result<f64> {
    Ok(match p.t {
        Some(t) => t,
        None => default_bandwidth(n, m.intrinsic_dim(), p.theta.unwrap_or(1.0)),
    })
}

fn baseline_method(method: MethodName) -> Option<Method> {
    Some(match method {
        MethodName::Halton => Method::Halton,
        MethodName::Sobol => Method::Sobol,
        MethodName::Fibonacci => Method::FibonacciLattice,
        MethodName::Korobov => Method::KorobovLattice,
        MethodName::Lhs => Method::Lhs,
        MethodName::Uniform => Method::UniformRandom,
        MethodName::SphericalFibonacci => Method::SphericalFibonacci,
        MethodName::Design => Method::SphericalDesignFile,
        _ => return None,
    })
}

/// Builds `n` points on `m` with `method`.
pub fn build_points(m: &ManifoldSpec, n: usize, method: MethodName, p: &MethodArgs, seed: u64) -> anyhow::Result<Built> {
    let stochastic = is_stochastic(method, p);
    if let Some(bm) = baseline_method(method) {
        let spec = GeneratorSpec {
            method: bm,
            n,
            manifold: *m,
            seed: if stochastic { Some(seed) } else { None },
            path: p.design.clone(),
            korobov_a: p.korobov_a,
        };
        let mut ps = baselines::generate(&spec)?;
        ps.meta.insert("method".into(), method.as_str().into());
        if stochastic {
            ps.meta.insert("seed".into(), seed.to_string());
        }
        return Ok(Built { ps, trace: None });
    }

    let t = bandwidth(p, m, n)?;
    let espec = match method {
        MethodName::RieszAnneal => EnergySpec::riesz(p.s.context("riesz-anneal needs --s")?)?,
        _ => EnergySpec::gaussian(t)?,
    };
    let defaults = AnnealConfig::defaults_for(m, n, seed);
    let cfg = AnnealConfig {
        dt: p.dt.unwrap_or(defaults.dt),
        steps: p.steps.unwrap_or(defaults.steps),
        gamma: p.gamma.unwrap_or(defaults.gamma),
        cool_c: p.cool_c,
        seed,
        trace_every: p.trace_every.unwrap_or(defaults.trace_every),
        init: match &p.init_file {
            Some(path) => Init::FromFile(path.clone()),
            None => defaults.init,
        },
    };
    let res = anneal(m, n, &espec, &cfg)?;
    let trace = res.trace_csv();
    let mut ps = res.best;
    if method == MethodName::GaussianAnnealWeighted {
        let (weighted, sol) = with_solved_weights(&ps, t)?;
        if sol.has_negative() {
            log::warn!("annealed set has negative weights (min {:e})", sol.min_weight);
        }
        ps = weighted;
    }
    ps.meta.insert("method".into(), method.as_str().into());
    Ok(Built { ps, trace: Some(trace) })
}

fn point_count(n: Option<usize>) -> anyhow::Result<usize> {
    match n {
        Some(n) if n > 0 => Ok(n),
        Some(_) => bail!("--n must be positive"),
        None => bail!("--n is required"),
    }
}

pub fn generate(ctx: &Ctx, a: &GenerateArgs) -> anyhow::Result<()> {
    let m = a.manifold.resolve()?;
    let n = point_count(a.n)?;
    let method = a.method.context("--method is required")?;
    let built = build_points(&m, n, method, &a.params, ctx.seed)?;
    let text = write_point_set_string(&built.ps, ctx.format)?;
    if let (Some(path), Some(trace)) = (&a.trace, &built.trace) {
        emit(Some(path), trace)?;
    }
    emit(ctx.out.as_deref(), &text)
}

fn read_input(input: Option<&Path>, hint: &ManifoldArgs) -> anyhow::Result<PointSet> {
    let path = input.context("--input is required")?;
    let hint = if hint.is_set() { Some(hint.resolve()?) } else { None };
    Ok(read_point_set(path, hint)?)
}

pub fn weights(ctx: &Ctx, a: &WeightsArgs) -> anyhow::Result<()> {
    let ps = read_input(a.input.as_deref(), &a.manifold)?;
    let t = match a.t {
        Some(t) => t,
        None => default_bandwidth(ps.len(), ps.manifold().intrinsic_dim(), a.theta.unwrap_or(1.0)),
    };
    let (out, sol) = with_solved_weights(&ps, t)?;
    if sol.has_negative() {
        log::warn!("negative weights (min {:e})", sol.min_weight);
    }
    emit(ctx.out.as_deref(), &write_point_set_string(&out, ctx.format)?)
}

pub fn eval(ctx: &Ctx, a: &EvalArgs) -> anyhow::Result<()> {
    let ps = read_input(a.input.as_deref(), &a.manifold)?;
    let count = a.count.unwrap_or(DEFAULT_EVAL_COUNT);
    let spec = spectrum_first(&ps, count)?;
    let text = match ctx.format {
        Format::Csv => spec.to_csv(),
        Format::Json => serde_json::to_string_pretty(&spec)? + "\n",
    };
    emit(ctx.out.as_deref(), &text)
}

pub fn designs_import(ctx: &Ctx, a: &ImportArgs) -> anyhow::Result<()> {
    let path = a.input.as_deref().context("--input is required")?;
    let mut ps = baselines::load_spherical_design(path)?;
    let lmax = a.lmax.unwrap_or(DEFAULT_DESIGN_LMAX);
    let tol = a.tol.unwrap_or(DEFAULT_DESIGN_TOL);
    let degree = sphere_exactness_degree(&ps, lmax, tol)?;
    log::info!("{} points, exact through degree {degree} (tol {tol:e})", ps.len());
    ps.meta.insert("exactness_degree".into(), degree.to_string());
    ps.meta.insert("exactness_tol".into(), format!("{tol:e}"));
    ps.meta.insert("exactness_lmax".into(), lmax.to_string());
    emit(ctx.out.as_deref(), &write_point_set_string(&ps, ctx.format)?)
}
