//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the report is always printed:
//! `cargo test -p heatquad --test acceptance`.

use std::path::Path;
use std::time::{Duration, Instant};

use heatquad::annealer::{
    anneal, baoab_step, gbaoab_step, max_constraint_violation, max_tangency_violation, AnnealConfig, PhaseState,
    StepParams,
};
use heatquad::baselines::{
    fibonacci, fibonacci_index, fibonacci_lattice, halton, lhs, load_spherical_design, sobol,
    spherical_fibonacci, uniform_random,
};
use heatquad::energy::{default_bandwidth, wall_penalty, EnergySpec, ManifoldEnergy, Potential, WallPenalty};
use heatquad::eval::{median, spectrum, spectrum_first, sphere_error, torus_eigen_enumeration, torus_error, EigenLabel};
use heatquad::geometry::{dented_sphere_lift, disk_to_hyperboloid, min_image, write_point_set_string, Format};
use heatquad::rng::ParticleStreams;
use heatquad::weights::{kernel_matrix, solve_weights, with_solved_weights};
use heatquad::{ManifoldSpec, PointSet, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn equispaced(n: usize) -> PointSet {
    PointSet::new(ManifoldSpec::Torus { d: 1 }, (0..n).map(|j| j as f64 / n as f64).collect()).unwrap()
}

fn lattice_exactness() -> Result<Outcome> {
    let (mut worst_zero, mut worst_one) = (0.0f64, 0.0f64);
    for n in 2..=20usize {
        let ps = equispaced(n);
        for k in 1..=100i64 {
            let e = torus_error(&ps, &[k])?;
            if k % n as i64 == 0 {
                worst_one = worst_one.max((e - 1.0).abs());
            } else {
                worst_zero = worst_zero.max(e);
            }
        }
    }
    Ok(outcome(
        worst_zero <= 1e-24 && worst_one <= 1e-12,
        format!("max E off the dual lattice {worst_zero:.1e}, max |E-1| on it {worst_one:.1e}"),
    ))
}

fn fibonacci_exactness() -> Result<Outcome> {
    let labels = torus_eigen_enumeration(2, 500)?;
    let (mut worst_zero, mut worst_one, mut hits) = (0.0f64, 0.0f64, 0);
    for n in [5usize, 8, 13, 21, 55, 89] {
        let m = fibonacci_index(n).expect("Fibonacci number");
        let g = fibonacci(m - 1).unwrap() as i64;
        let spec = spectrum(&fibonacci_lattice(m)?, &labels)?;
        for (label, &e) in labels.iter().zip(&spec.e_lambda) {
            let EigenLabel::Torus { k } = label else { unreachable!() };
            if (k[0] + g * k[1]).rem_euclid(n as i64) == 0 {
                hits += 1;
                worst_one = worst_one.max((e - 1.0).abs());
            } else {
                worst_zero = worst_zero.max(e);
            }
        }
    }
    Ok(outcome(
        worst_zero <= 1e-24 && worst_one <= 1e-12,
        format!("max E off the dual lattice {worst_zero:.1e}; {hits} dual frequencies, max |E-1| {worst_one:.1e}"),
    ))
}

fn design_exactness() -> Result<Outcome> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/design_12_86.txt");
    let ps = load_spherical_design(&path)?;
    let mut worst = 0.0f64;
    for l in 1..=12usize {
        for m in -(l as i64)..=l as i64 {
            worst = worst.max(sphere_error(&ps, l, m)?);
        }
    }
    Ok(outcome(
        ps.len() == 86 && worst <= 1e-18,
        format!("{} points, max E over l <= 12 is {worst:.1e}", ps.len()),
    ))
}

/// Random points on `m` with pairwise distances at least `min_sep`. On tori
/// every pair also stays clear of the cut locus, where the min-image
/// distance is not differentiable.
fn random_config(m: &ManifoldSpec, n: usize, rng: &mut ChaCha8Rng, min_sep: f64) -> PointSet {
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        match *m {
            ManifoldSpec::Torus { d } => (0..d).map(|_| rng.random::<f64>()).collect(),
            ManifoldSpec::Sphere | ManifoldSpec::DentedSphere { .. } => {
                let z: f64 = rng.random_range(-1.0..1.0);
                let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let rho = (1.0 - z * z).sqrt();
                let x = [rho * phi.cos(), rho * phi.sin(), z];
                match *m {
                    ManifoldSpec::DentedSphere { alpha } => dented_sphere_lift(&x, alpha).to_vec(),
                    _ => x.to_vec(),
                }
            }
            // reach past the wall so the penalty is exercised
            ManifoldSpec::CompactHyperboloid { r } => {
                let rad = (1.0 - 1e-3f64).min(1.3 * r) * rng.random::<f64>().sqrt();
                let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                disk_to_hyperboloid(&[rad * ang.cos(), rad * ang.sin()]).unwrap().to_vec()
            }
        }
    };
    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(n);
    while coords.len() < n {
        let p = sample(rng);
        let clear = |q: &Vec<f64>| {
            m.distance(q, &p) >= min_sep
                && (!m.is_torus() || q.iter().zip(&p).all(|(a, b)| 0.5 - min_image(a - b).abs() >= 1e-3))
        };
        if coords.iter().all(clear) {
            coords.push(p);
        }
    }
    PointSet::new(*m, coords.concat()).unwrap()
}

/// `‖∇E − ∇_h E‖₂ / ‖∇E‖₂` with central differences in every coordinate.
fn fd_relative_error<P: Potential>(pot: &P, x: &[f64], h: f64) -> Result<f64> {
    let mut grad = vec![0.0; x.len()];
    pot.energy_grad(x, &mut grad)?;
    let mut y = x.to_vec();
    let (mut diff, mut norm) = (0.0, 0.0);
    for k in 0..x.len() {
        y[k] = x[k] + h;
        let up = pot.energy(&y)?;
        y[k] = x[k] - h;
        let down = pot.energy(&y)?;
        y[k] = x[k];
        let fd = (up - down) / (2.0 * h);
        diff += (grad[k] - fd).powi(2);
        norm += grad[k].powi(2);
    }
    Ok((diff / norm).sqrt())
}

fn gradient_checks() -> Result<Outcome> {
    let h = 1e-5;
    let manifolds = [
        ManifoldSpec::Torus { d: 2 },
        ManifoldSpec::Torus { d: 3 },
        ManifoldSpec::Sphere,
        ManifoldSpec::DentedSphere { alpha: 0.3 },
        ManifoldSpec::CompactHyperboloid { r: 0.6 },
    ];
    let mut worst = 0.0f64;
    let mut wall_hits = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in &manifolds {
        let wall = WallPenalty::for_manifold(m);
        for _ in 0..50 {
            let n = rng.random_range(8..=16);
            let ps = random_config(m, n, &mut rng, 0.05);
            // much wider kernels are flat to ~1e-9 on small tori, below what
            // central differences resolve
            let t = default_bandwidth(n, m.intrinsic_dim(), rng.random_range(0.2..1.0));
            let s = rng.random_range(0.5..3.0);
            for spec in [EnergySpec::gaussian(t)?, EnergySpec::riesz(s)?] {
                let pot = ManifoldEnergy::new(*m, spec.with_wall(wall));
                worst = worst.max(fd_relative_error(&pot, ps.coords(), h)?);
            }
        }
    }
    // the wall term alone, always active
    let w = WallPenalty::for_manifold(&ManifoldSpec::CompactHyperboloid { r: 0.6 }).unwrap();
    for _ in 0..50 {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), w.c + rng.random_range(0.01..1.0)];
        let (_, g) = wall_penalty(&x, &w);
        let mut diff = 0.0f64;
        for k in 0..3 {
            let (mut up, mut down) = (x, x);
            up[k] += h;
            down[k] -= h;
            let fd = (wall_penalty(&up, &w).0 - wall_penalty(&down, &w).0) / (2.0 * h);
            diff += (g[k] - fd).powi(2);
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>();
        worst = worst.max((diff / norm).sqrt());
        wall_hits += 1;
    }
    Ok(outcome(
        worst <= 1e-6,
        format!(
            "{} manifolds x 50 configurations x (Gaussian, Riesz), plus {wall_hits} wall points; worst relative error {worst:.1e}",
            manifolds.len()
        ),
    ))
}

fn weight_solver() -> Result<Outcome> {
    let mut worst_uniform = 0.0f64;
    for n in 2..=12usize {
        let sol = solve_weights(&equispaced(n), default_bandwidth(n, 1, 1.0))?;
        for w in &sol.weights {
            worst_uniform = worst_uniform.max((w - 1.0 / n as f64).abs());
        }
    }
    let (mut worst_kkt, mut worst_gain) = (0.0f64, f64::NEG_INFINITY);
    for run in 0..100u64 {
        let m = if run % 2 == 0 { ManifoldSpec::Torus { d: 2 } } else { ManifoldSpec::Sphere };
        let n = 20 + (run as usize * 7) % 70;
        let ps = uniform_random(n, &m, 1000 + run)?;
        let t = default_bandwidth(n, 2, 1.0);
        let sol = solve_weights(&ps, t)?;
        worst_kkt = worst_kkt.max(sol.kkt_residual);
        let c = kernel_matrix(&ps, t)?;
        let uniform = c.quadratic_form(&vec![1.0 / n as f64; n]);
        // relative change; must not be positive beyond rounding
        worst_gain = worst_gain.max((c.quadratic_form(&sol.weights) - uniform) / uniform);
    }
    Ok(outcome(
        worst_uniform <= 1e-10 && worst_kkt <= 1e-9 && worst_gain <= 1e-14,
        format!(
            "(a) max |w - 1/N| {worst_uniform:.1e}; (b) max KKT residual {worst_kkt:.1e}; (c) max relative energy change vs uniform {worst_gain:.1e}"
        ),
    ))
}

/// `U = ½ Σ c_k x_k²`.
struct Quadratic(Vec<f64>);

impl Potential for Quadratic {
    fn energy(&self, x: &[f64]) -> Result<f64> {
        Ok(x.iter().zip(&self.0).map(|(x, c)| 0.5 * c * x * x).sum())
    }

    fn energy_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        for ((g, x), c) in grad.iter_mut().zip(x).zip(&self.0) {
            *g = c * x;
        }
        self.energy(x)
    }
}

fn integrator_reductions() -> Result<Outcome> {
    let c = vec![1.0, 4.0, 0.25, 9.0, 2.0, 0.5];
    let pot = Quadratic(c.clone());
    let dt = 0.02;
    let params = StepParams {
        dt,
        gamma: 0.0,
        beta_inv: 0.0,
    };
    let x0 = vec![1.0, -0.5, 0.3, 0.2, -1.2, 0.7];
    let v0 = vec![0.0, 0.4, -0.1, 0.3, 0.0, 0.9];
    let mut state = PhaseState::new(x0.clone(), v0.clone(), &pot)?;
    let mut noise = ParticleStreams::new(0, 2);
    let (mut x, mut v) = (x0, v0);
    let mut worst_verlet = 0.0f64;
    for _ in 0..10_000 {
        for k in 0..x.len() {
            let a = -c[k] * x[k];
            x[k] += dt * v[k] + 0.5 * dt * dt * a;
            v[k] += 0.5 * dt * (a - c[k] * x[k]);
        }
        baoab_step(&mut state, 3, false, params, &pot, &mut noise)?;
        for k in 0..x.len() {
            worst_verlet = worst_verlet.max((state.x[k] - x[k]).abs()).max((state.p[k] - v[k]).abs());
        }
    }

    let s2 = ManifoldSpec::Sphere;
    let n = 30;
    let pot = ManifoldEnergy::new(s2, EnergySpec::gaussian(default_bandwidth(n, 2, 1.0))?);
    let mut state = PhaseState::at_rest(spherical_fibonacci(n)?.coords().to_vec(), &pot)?;
    let mut noise = ParticleStreams::new(6, n);
    let params = StepParams {
        dt: 0.01,
        gamma: 1.0,
        beta_inv: 0.5,
    };
    let (mut worst_g, mut worst_tan) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        gbaoab_step(&mut state, &s2, params, &pot, &mut noise)?;
        worst_g = worst_g.max(max_constraint_violation(&state.x, &s2));
        worst_tan = worst_tan.max(max_tangency_violation(&state.x, &state.p, &s2));
    }
    Ok(outcome(
        worst_verlet <= 1e-12 && worst_g <= 1e-8 && worst_tan <= 1e-10,
        format!(
            "BAOAB vs Verlet max deviation {worst_verlet:.1e} over 1e4 steps; g-BAOAB max |g| {worst_g:.1e}, max tangency {worst_tan:.1e}"
        ),
    ))
}

const T2_N: usize = 89;
const T2_RUNS: u64 = 10;
const T2_STEPS: usize = 20_000;

/// Shared ensembles for the T² comparisons.
struct Ensembles {
    weighted: Vec<[f64; 3]>,
    uniform: Vec<[f64; 3]>,
    sobol: [f64; 3],
    halton: [f64; 3],
    min_weights: Vec<f64>,
    elapsed: Duration,
}

/// `(E_≤5, E_≤20, E_≤200)`.
fn cumulative(ps: &PointSet) -> Result<[f64; 3]> {
    let spec = spectrum_first(ps, 200)?;
    let at = |s| spec.cumulative_at(s).expect("200 labels");
    Ok([at(5), at(20), at(200)])
}

fn t2_ensembles() -> Result<Ensembles> {
    let start = Instant::now();
    let m = ManifoldSpec::Torus { d: 2 };
    let t = 1.0 / T2_N as f64;
    let espec = EnergySpec::gaussian(t)?;
    let mut weighted = Vec::new();
    let mut min_weights = Vec::new();
    for seed in 0..T2_RUNS {
        let cfg = AnnealConfig {
            steps: T2_STEPS,
            ..AnnealConfig::defaults_for(&m, T2_N, seed)
        };
        let res = anneal(&m, T2_N, &espec, &cfg)?;
        let (ps, sol) = with_solved_weights(&res.best, t)?;
        min_weights.push(sol.min_weight);
        weighted.push(cumulative(&ps)?);
    }
    let uniform = (0..T2_RUNS)
        .map(|seed| cumulative(&uniform_random(T2_N, &m, 500 + seed)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensembles {
        weighted,
        uniform,
        sobol: cumulative(&sobol(T2_N, 2, None)?)?,
        halton: cumulative(&halton(T2_N, 2)?)?,
        min_weights,
        elapsed: start.elapsed(),
    })
}

fn median_of(rows: &[[f64; 3]], col: usize) -> f64 {
    median(&rows.iter().map(|r| r[col]).collect::<Vec<_>>()).unwrap()
}

fn beats_uniform(e: &Ensembles) -> Outcome {
    let (w, u) = (median_of(&e.weighted, 1), median_of(&e.uniform, 1));
    outcome(
        10.0 * w <= u,
        format!("median E<=20: weighted annealed {w:.2e}, uniform {u:.2e} (ratio {:.1e})", u / w),
    )
}

fn crossing(e: &Ensembles) -> Outcome {
    let (w5, w200) = (median_of(&e.weighted, 0), median_of(&e.weighted, 2));
    let small = w5 < e.sobol[0] && w5 < e.halton[0];
    let large = w200 > e.sobol[2] && w200 > e.halton[2];
    outcome(
        small && large,
        format!(
            "E<=5: annealed {w5:.2e} vs Sobol {:.2e}, Halton {:.2e} ({}); E<=200: annealed {w200:.3} vs Sobol {:.3}, Halton {:.3} ({})",
            e.sobol[0],
            e.halton[0],
            if small { "annealed wins" } else { "annealed loses" },
            e.sobol[2],
            e.halton[2],
            if large { "QMC wins" } else { "QMC does not win" },
        ),
    )
}

fn positivity(e: &Ensembles) -> Outcome {
    let worst = e.min_weights.iter().copied().fold(f64::INFINITY, f64::min);
    let negative = e.min_weights.iter().filter(|&&w| w <= 0.0).count();
    if negative > 0 {
        eprintln!("warning: {negative} annealed configurations have non-positive weights");
    }
    outcome(
        negative == 0,
        format!("smallest weight over {} runs {worst:.3e} (1/N = {:.3e})", e.min_weights.len(), 1.0 / T2_N as f64),
    )
}

/// Every stochastic output for one seed, as the bytes that would be written.
fn pipeline_outputs(seed: u64) -> Result<Vec<(String, Vec<u8>)>> {
    let t2 = ManifoldSpec::Torus { d: 2 };
    let s2 = ManifoldSpec::Sphere;
    let mut out = Vec::new();
    let mut push = |name: &str, ps: &PointSet| -> Result<()> {
        out.push((format!("{name}.txt"), write_point_set_string(ps, Format::Csv)?.into_bytes()));
        out.push((format!("{name}.json"), write_point_set_string(ps, Format::Json)?.into_bytes()));
        out.push((format!("{name}.eval.csv"), spectrum_first(ps, 60)?.to_csv().into_bytes()));
        Ok(())
    };
    push("uniform-t2", &uniform_random(50, &t2, seed)?)?;
    push("uniform-s2", &uniform_random(50, &s2, seed)?)?;
    push("lhs", &lhs(50, 3, seed)?)?;
    push("sobol-scrambled", &sobol(64, 2, Some(seed))?)?;
    for m in [t2, s2, ManifoldSpec::DentedSphere { alpha: 0.3 }, ManifoldSpec::CompactHyperboloid { r: 0.6 }] {
        let n = 40;
        let mut cfg = AnnealConfig::defaults_for(&m, n, seed);
        cfg.steps = 300;
        cfg.trace_every = 10;
        let espec = EnergySpec::gaussian(default_bandwidth(n, 2, 1.0))?;
        let res = anneal(&m, n, &espec, &cfg)?;
        let name = format!("anneal-{}", m.name());
        out.push((format!("{name}.trace.csv"), res.trace_csv().into_bytes()));
        let (ps, _) = with_solved_weights(&res.best, default_bandwidth(n, 2, 1.0))?;
        out.push((format!("{name}.txt"), write_point_set_string(&ps, Format::Csv)?.into_bytes()));
        if m.is_torus() || m == s2 {
            out.push((format!("{name}.eval.csv"), spectrum_first(&ps, 60)?.to_csv().into_bytes()));
        }
    }
    Ok(out)
}

fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    for (name, bytes) in files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn determinism() -> Result<Outcome> {
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?, tempfile::tempdir()?];
    write_all(dirs[0].path(), &pipeline_outputs(11)?)?;
    write_all(dirs[1].path(), &pipeline_outputs(11)?)?;
    // same seed on a single worker thread
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    let files = single.install(|| pipeline_outputs(11))?;
    write_all(dirs[2].path(), &files)?;
    let mut mismatched = Vec::new();
    for (name, _) in &files {
        let a = std::fs::read(dirs[0].path().join(name))?;
        for d in &dirs[1..] {
            if std::fs::read(d.path().join(name))? != a {
                mismatched.push(name.clone());
            }
        }
    }
    // a different seed must change the stochastic outputs
    let other = pipeline_outputs(12)?;
    let changed = files.iter().zip(&other).filter(|(a, b)| a.1 != b.1).count();
    Ok(outcome(
        mismatched.is_empty() && changed > 0,
        format!(
            "{} files x 3 runs (one single-threaded): {} mismatches; {changed} files change with the seed",
            files.len(),
            mismatched.len()
        ),
    ))
}

fn report(id: usize, name: &str, budget: Option<Duration>, elapsed: Duration, res: Result<Outcome>) -> bool {
    let (pass, detail) = match res {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let timing = match budget {
        Some(b) => format!("{:.2}s of {}s", elapsed.as_secs_f64(), b.as_secs()),
        None => format!("{:.2}s", elapsed.as_secs_f64()),
    };
    let ok = pass && in_time;
    println!("criterion {id:>2} {name}: {} ({detail}; {timing})", if ok { "PASS" } else { "FAIL" });
    ok
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() {
    // `cargo test` passes libtest flags; a filter that excludes us skips the run
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let secs = Duration::from_secs;
    let mut all = true;
    let (r, d) = timed(lattice_exactness);
    all &= report(1, "lattice exactness", Some(secs(1)), d, r);
    let (r, d) = timed(fibonacci_exactness);
    all &= report(2, "Fibonacci lattice exactness", Some(secs(5)), d, r);
    let (r, d) = timed(design_exactness);
    all &= report(3, "spherical design exactness", Some(secs(5)), d, r);
    let (r, d) = timed(gradient_checks);
    all &= report(4, "gradient correctness", Some(secs(10)), d, r);
    let (r, d) = timed(weight_solver);
    all &= report(5, "weight solver", Some(secs(10)), d, r);
    let (r, d) = timed(integrator_reductions);
    all &= report(6, "integrator reductions", Some(secs(30)), d, r);

    match t2_ensembles() {
        Ok(e) => {
            let d = e.elapsed;
            all &= report(7, "weighted annealed sets vs uniform (T2, N=89)", None, d, Ok(beats_uniform(&e)));
            all &= report(8, "crossing vs Sobol/Halton", None, Duration::ZERO, Ok(crossing(&e)));
            all &= report(9, "weight positivity", None, Duration::ZERO, Ok(positivity(&e)));
        }
        Err(err) => {
            for (id, name) in [(7, "weighted annealed sets vs uniform"), (8, "crossing"), (9, "weight positivity")] {
                println!("criterion {id:>2} {name}: FAIL (error: {err})");
            }
            all = false;
        }
    }
    let (r, d) = timed(determinism);
    all &= report(10, "determinism", None, d, r);

    if !all {
        std::process::exit(1);
    }
}
