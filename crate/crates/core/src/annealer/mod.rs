//! Simulated annealing with underdamped Langevin dynamics.
//!
//! The torus uses plain BAOAB with periodic wrapping; embedded surfaces use
//! the constrained variant. The temperature follows a logarithmic cooling
//! schedule and the lowest-energy recorded configuration is returned.

mod integrator;

pub use integrator::{
    baoab_step, gbaoab_step, max_constraint_violation, max_tangency_violation, rattle_project,
    shake_project, PhaseState, StepParams, SHAKE_MAX_ITER, SHAKE_TOL,
};

use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::energy::{EnergySpec, Kernel, ManifoldEnergy, Potential, WallPenalty};
use crate::error::{Error, Result};
use crate::geometry::{dented_sphere_lift, disk_to_hyperboloid, read_point_set, ManifoldSpec, PointSet};
use crate::rng::{self, ParticleStreams, Purpose};

/// Default number of steps.
pub const DEFAULT_STEPS: usize = 200_000;
/// Default energy-recording stride.
pub const DEFAULT_TRACE_EVERY: usize = 100;
/// Default cooling constant relative to the initial energy per particle.
/// Near `t = 1/N` the Gaussian landscape is very flat, and hotter starts
/// leave the best recorded state visibly disordered.
pub const DEFAULT_COOL_FACTOR: f64 = 1e-7;

/// `β⁻¹(t) = C / (1 + log(1 + t))`.
pub fn cooling_schedule(c: f64, time: f64) -> f64 {
    c / (1.0 + time.ln_1p())
}

/// Starting configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Halton points (torus).
    Halton,
    /// Golden-angle spiral (sphere).
    SphericalFibonacci,
    /// Spherical Fibonacci points lifted onto the dented sphere.
    DentedLift,
    /// Uniform points on the disk of radius `r`, lifted to the hyperboloid.
    DiskUniformLift,
    /// Points read from a point-set file.
    FromFile(PathBuf),
}

impl Init {
    pub fn default_for(m: &ManifoldSpec) -> Self {
        match m {
            ManifoldSpec::Torus { .. } => Init::Halton,
            ManifoldSpec::Sphere => Init::SphericalFibonacci,
            ManifoldSpec::DentedSphere { .. } => Init::DentedLift,
            ManifoldSpec::CompactHyperboloid { .. } => Init::DiskUniformLift,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Init::Halton => "halton".into(),
            Init::SphericalFibonacci => "spherical-fibonacci".into(),
            Init::DentedLift => "dented-lift".into(),
            Init::DiskUniformLift => "disk-uniform-lift".into(),
            Init::FromFile(p) => format!("file:{}", p.display()),
        }
    }
}

/// Annealing parameters. `cool_c = None` means [`DEFAULT_COOL_FACTOR`] times
/// the initial energy per particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub dt: f64,
    pub steps: usize,
    pub gamma: f64,
    pub cool_c: Option<f64>,
    pub seed: u64,
    pub trace_every: usize,
    pub init: Init,
}

impl AnnealConfig {
    /// Defaults for `n` points on `m`: `Δt = 0.05 N^{−1/d}`, `T = 2·10⁵`, `γ = 1`.
    pub fn defaults_for(m: &ManifoldSpec, n: usize, seed: u64) -> Self {
        let d = m.intrinsic_dim() as f64;
        Self {
            dt: 0.05 * (n as f64).powf(-1.0 / d),
            steps: DEFAULT_STEPS,
            gamma: 1.0,
            cool_c: None,
            seed,
            trace_every: DEFAULT_TRACE_EVERY,
            init: Init::default_for(m),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if let Some(c) = self.cool_c {
            if !(c > 0.0 && c.is_finite()) {
                return bad(format!("cooling constant must be positive, got {c}"));
            }
        }
        if self.trace_every == 0 {
            return bad("trace_every must be at least 1".into());
        }
        Ok(())
    }
}

/// One recorded energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub time: f64,
    pub beta_inv: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    /// Lowest-energy recorded configuration, with run metadata.
    pub best: PointSet,
    pub best_energy: f64,
    pub trace: Vec<TracePoint>,
    /// Step at which `best` was recorded.
    pub accepted_step: usize,
    /// Cooling constant actually used.
    pub cool_c: f64,
    /// Relative energy change over the last 10% of the run.
    pub settle: f64,
}

impl AnnealResult {
    /// Trace as CSV with header `step,time,beta_inv,energy`.
    pub fn trace_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("step,time,beta_inv,energy\n");
        for tp in &self.trace {
            let _ = writeln!(s, "{},{:e},{:e},{:e}", tp.step, tp.time, tp.beta_inv, tp.energy);
        }
        s
    }
}

/// Builds the starting configuration named by `init`.
pub fn initial_points(m: &ManifoldSpec, n: usize, init: &Init, seed: u64) -> Result<PointSet> {
    let mismatch = || Error::InvalidParameter(format!("initializer {} does not apply to {m}", init.name()));
    let ps = match (init, *m) {
        (Init::Halton, ManifoldSpec::Torus { d }) => baselines::halton(n, d)?,
        (Init::SphericalFibonacci, ManifoldSpec::Sphere) => baselines::spherical_fibonacci(n)?,
        (Init::DentedLift, ManifoldSpec::DentedSphere { alpha }) => {
            let base = baselines::spherical_fibonacci(n)?;
            let coords: Vec<f64> = base
                .points()
                .flat_map(|p| dented_sphere_lift(&[p[0], p[1], p[2]], alpha))
                .collect();
            PointSet::new(*m, coords)?
        }
        (Init::DiskUniformLift, ManifoldSpec::CompactHyperboloid { r }) => {
            let mut rng = rng::stream(seed, Purpose::Initializer);
            let mut coords = Vec::with_capacity(3 * n);
            for _ in 0..n {
                let rad = r * rng.random::<f64>().sqrt();
                let ang = std::f64::consts::TAU * rng.random::<f64>();
                coords.extend(disk_to_hyperboloid(&[rad * ang.cos(), rad * ang.sin()])?);
            }
            PointSet::new(*m, coords)?
        }
        (Init::FromFile(path), _) => {
            let ps = read_point_set(path, Some(*m))?;
            if ps.manifold() != m {
                return Err(mismatch());
            }
            if ps.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "initial file has {} points, expected {n}",
                    ps.len()
                )));
            }
            ps
        }
        _ => return Err(mismatch()),
    };
    Ok(ps)
}

/// Anneals `n` points on `m` starting from `cfg.init`.
pub fn anneal(m: &ManifoldSpec, n: usize, espec: &EnergySpec, cfg: &AnnealConfig) -> Result<AnnealResult> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("annealing needs at least 2 points, got {n}")));
    }
    cfg.validate()?;
    let init = initial_points(m, n, &cfg.init, cfg.seed)?;
    anneal_from(init, espec, cfg)
}

/// Anneals an explicit starting configuration.
pub fn anneal_from(initial: PointSet, espec: &EnergySpec, cfg: &AnnealConfig) -> Result<AnnealResult> {
    cfg.validate()?;
    let m = *initial.manifold();
    let n = initial.len();
    let mut spec = *espec;
    if spec.wall.is_none() {
        spec.wall = WallPenalty::for_manifold(&m);
    }
    let potential = ManifoldEnergy::new(m, spec);
    let dim = m.ambient_dim();

    let mut state = PhaseState::at_rest(initial.coords().to_vec(), &potential)?;
    let cool_c = cfg.cool_c.unwrap_or(DEFAULT_COOL_FACTOR * state.energy / n as f64);
    if !(cool_c > 0.0 && cool_c.is_finite()) {
        return Err(Error::InvalidParameter(format!("derived cooling constant {cool_c} is not positive")));
    }
    let mut noise = ParticleStreams::new(cfg.seed, n);

    let mut trace = Vec::with_capacity(cfg.steps / cfg.trace_every + 2);
    let mut best_x = state.x.clone();
    let mut best_energy = state.energy;
    let mut best_step = 0;
    trace.push(TracePoint {
        step: 0,
        time: 0.0,
        beta_inv: cooling_schedule(cool_c, 0.0),
        energy: state.energy,
    });

    for k in 0..cfg.steps {
        let params = StepParams {
            dt: cfg.dt,
            gamma: cfg.gamma,
            beta_inv: cooling_schedule(cool_c, cfg.dt * k as f64),
        };
        if m.is_torus() {
            baoab_step(&mut state, dim, true, params, &potential, &mut noise)?;
        } else {
            gbaoab_step(&mut state, &m, params, &potential, &mut noise)?;
        }
        let step = k + 1;
        if step % cfg.trace_every == 0 || step == cfg.steps {
            let time = cfg.dt * step as f64;
            trace.push(TracePoint {
                step,
                time,
                beta_inv: cooling_schedule(cool_c, time),
                energy: state.energy,
            });
            if state.energy < best_energy {
                best_energy = state.energy;
                best_x.copy_from_slice(&state.x);
                best_step = step;
            }
        }
    }

    let settle = settle_ratio(&trace, cfg.steps);
    let mut best = PointSet::new(m, best_x)?;
    best.meta.insert("seed".into(), cfg.seed.to_string());
    best.meta.insert("dt".into(), cfg.dt.to_string());
    best.meta.insert("steps".into(), cfg.steps.to_string());
    best.meta.insert("gamma".into(), cfg.gamma.to_string());
    best.meta.insert("cool_c".into(), cool_c.to_string());
    best.meta.insert("trace_every".into(), cfg.trace_every.to_string());
    best.meta.insert("init".into(), cfg.init.name());
    match spec.kernel {
        Kernel::Gaussian { t } => best.meta.insert("t".into(), t.to_string()),
        Kernel::Riesz { s } => best.meta.insert("s".into(), s.to_string()),
    };
    if let Some(w) = spec.wall {
        best.meta.insert("wall_c".into(), w.c.to_string());
        best.meta.insert("wall_kappa".into(), w.kappa.to_string());
        best.meta.insert("wall_exponent".into(), w.alpha_exp.to_string());
    }
    best.meta.insert("best_step".into(), best_step.to_string());
    best.meta.insert("best_energy".into(), best_energy.to_string());
    best.meta.insert("settle".into(), settle.to_string());

    Ok(AnnealResult {
        best,
        best_energy,
        trace,
        accepted_step: best_step,
        cool_c,
        settle,
    })
}

/// `|E(start of last 10%) − E(end)| / |E(end)|` over the recorded trace.
fn settle_ratio(trace: &[TracePoint], steps: usize) -> f64 {
    let cutoff = steps - steps / 10;
    let last = trace.last().map(|t| t.energy).unwrap_or(0.0);
    let first = trace
        .iter()
        .find(|t| t.step >= cutoff)
        .map(|t| t.energy)
        .unwrap_or(last);
    if last == 0.0 {
        (first - last).abs()
    } else {
        ((first - last) / last).abs()
    }
}

/// Energy of a point set under `espec` (with the manifold's default wall).
pub fn configuration_energy(ps: &PointSet, espec: &EnergySpec) -> Result<f64> {
    let mut spec = *espec;
    if spec.wall.is_none() {
        spec.wall = WallPenalty::for_manifold(ps.manifold());
    }
    ManifoldEnergy::new(*ps.manifold(), spec).energy(ps.coords())
}

#[cfg(test)]
mod tests;
