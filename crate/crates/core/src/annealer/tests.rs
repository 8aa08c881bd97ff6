use super::*;
use crate::energy::{gaussian_energy, Potential};
use approx::assert_abs_diff_eq;

/// `U(x) = ½ Σ x²`.
struct Harmonic;

impl Potential for Harmonic {
    fn energy(&self, x: &[f64]) -> Result<f64> {
        Ok(0.5 * x.iter().map(|v| v * v).sum::<f64>())
    }
    fn energy_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        grad.copy_from_slice(x);
        self.energy(x)
    }
}

struct Flat;

impl Potential for Flat {
    fn energy(&self, _: &[f64]) -> Result<f64> {
        Ok(0.0)
    }
    fn energy_grad(&self, _: &[f64], grad: &mut [f64]) -> Result<f64> {
        grad.iter_mut().for_each(|g| *g = 0.0);
        Ok(0.0)
    }
}

#[test]
fn cooling_examples() {
    assert_eq!(cooling_schedule(2.0, 0.0), 2.0);
    assert_abs_diff_eq!(cooling_schedule(2.0, std::f64::consts::E - 1.0), 1.0, epsilon = 1e-15);
    let mut prev = f64::INFINITY;
    for k in 0..1000 {
        let b = cooling_schedule(1.0, 0.37 * k as f64);
        assert!(b < prev);
        prev = b;
    }
    assert!(cooling_schedule(1.0, 1e300) < 0.01);
}

#[test]
fn baoab_without_friction_or_noise_is_velocity_verlet() {
    let dt = 0.01;
    let params = StepParams {
        dt,
        gamma: 0.0,
        beta_inv: 0.0,
    };
    let mut noise = ParticleStreams::new(0, 1);
    let mut state = PhaseState::new(vec![1.0], vec![0.3], &Harmonic).unwrap();
    // velocity Verlet with a(x) = −x, coded independently
    let (mut x, mut v) = (1.0f64, 0.3f64);
    for _ in 0..5000 {
        let a = -x;
        x += dt * v + 0.5 * dt * dt * a;
        let a_new = -x;
        v += 0.5 * dt * (a + a_new);
        baoab_step(&mut state, 1, false, params, &Harmonic, &mut noise).unwrap();
        assert!((state.x[0] - x).abs() <= 1e-12);
        assert!((state.p[0] - v).abs() <= 1e-12);
    }
}

#[test]
fn verlet_limit_has_bounded_energy_error() {
    let dt = 0.01;
    let params = StepParams {
        dt,
        gamma: 0.0,
        beta_inv: 0.0,
    };
    let mut noise = ParticleStreams::new(0, 1);
    let mut state = PhaseState::new(vec![1.0], vec![0.0], &Harmonic).unwrap();
    let h0 = 0.5;
    let mut worst_first = 0.0f64;
    let mut worst_second = 0.0f64;
    for k in 0..10_000 {
        baoab_step(&mut state, 1, false, params, &Harmonic, &mut noise).unwrap();
        let h = state.energy + 0.5 * state.p[0] * state.p[0];
        let err = (h - h0).abs();
        if k < 5000 {
            worst_first = worst_first.max(err);
        } else {
            worst_second = worst_second.max(err);
        }
    }
    assert!(worst_first.max(worst_second) < 1e-3);
    // symplectic: the error oscillates instead of growing
    assert!(worst_second <= 1.01 * worst_first);
}

#[test]
fn cold_damped_momentum_never_grows() {
    let params = StepParams {
        dt: 0.1,
        gamma: 2.0,
        beta_inv: 0.0,
    };
    let mut noise = ParticleStreams::new(3, 2);
    let mut state = PhaseState::new(vec![0.1, 0.2, 0.3, 0.4], vec![1.0, -2.0, 0.5, 0.1], &Flat).unwrap();
    let mut prev = f64::INFINITY;
    for _ in 0..50 {
        baoab_step(&mut state, 2, true, params, &Flat, &mut noise).unwrap();
        let norm: f64 = state.p.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= prev);
        prev = norm;
    }
}

#[test]
fn rest_state_is_a_fixed_point() {
    let params = StepParams {
        dt: 0.1,
        gamma: 1.0,
        beta_inv: 0.0,
    };
    let mut noise = ParticleStreams::new(3, 2);
    let mut state = PhaseState::at_rest(vec![0.1, 0.2, 0.3, 0.4], &Flat).unwrap();
    let before = state.clone();
    baoab_step(&mut state, 2, true, params, &Flat, &mut noise).unwrap();
    assert_eq!(state, before);

    let sphere = ManifoldSpec::Sphere;
    let mut noise = ParticleStreams::new(3, 1);
    let mut state = PhaseState::at_rest(vec![0.0, 0.0, 1.0], &Flat).unwrap();
    let before = state.clone();
    gbaoab_step(&mut state, &sphere, params, &Flat, &mut noise).unwrap();
    assert_eq!(state, before);
}

#[test]
fn shake_examples() {
    let s = ManifoldSpec::Sphere;
    let on = vec![0.6, 0.0, 0.8];
    assert_eq!(shake_project(&on, &on, &s, SHAKE_TOL, SHAKE_MAX_ITER).unwrap(), on);
    let y = shake_project(&[0.0, 0.0, 1.1], &[0.0, 0.0, 1.0], &s, SHAKE_TOL, SHAKE_MAX_ITER).unwrap();
    assert_abs_diff_eq!(y[2], 1.0, epsilon = 1e-10);
    assert!(shake_project(&[0.0, 0.0, 1.1], &[0.0, 0.0, 1.0], &ManifoldSpec::Torus { d: 3 }, 1e-10, 5).is_err());
    // a Newton budget of zero cannot fix an off-surface proposal
    assert!(matches!(
        shake_project(&[0.0, 0.0, 1.1], &[0.0, 0.0, 1.0], &s, SHAKE_TOL, 0),
        Err(Error::ProjectionFailed { .. })
    ));
}

#[test]
fn shake_residual_on_random_proposals() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let s = ManifoldSpec::Sphere;
    let refs = crate::baselines::spherical_fibonacci(200).unwrap();
    let proposal: Vec<f64> = refs.coords().iter().map(|v| v + 0.05 * (rng.random::<f64>() - 0.5)).collect();
    let y = shake_project(&proposal, refs.coords(), &s, SHAKE_TOL, SHAKE_MAX_ITER).unwrap();
    assert!(max_constraint_violation(&y, &s) <= 1e-10);
}

#[test]
fn rattle_examples() {
    let s = ManifoldSpec::Sphere;
    let x = [0.0, 0.0, 1.0];
    let mut p = [1.0, 2.0, 0.0];
    rattle_project(&mut p, &x, &s).unwrap();
    assert_eq!(p, [1.0, 2.0, 0.0]);
    let mut p = [0.0, 0.0, 5.0];
    rattle_project(&mut p, &x, &s).unwrap();
    assert_eq!(p, [0.0, 0.0, 0.0]);
    let mut p = [1.0, 2.0, 3.0];
    rattle_project(&mut p, &x, &s).unwrap();
    assert_eq!(p, [1.0, 2.0, 0.0]);
    let mut p = [1.0, 2.0, 3.0];
    assert!(matches!(
        rattle_project(&mut p, &[0.0, 0.0, 0.0], &s),
        Err(Error::SingularConstraint(0))
    ));
}

#[test]
fn gbaoab_keeps_constraints_every_step() {
    let s = ManifoldSpec::Sphere;
    let n = 30;
    let ps = crate::baselines::spherical_fibonacci(n).unwrap();
    let potential = ManifoldEnergy::new(s, EnergySpec::gaussian(crate::energy::default_bandwidth(n, 2, 1.0)).unwrap());
    let mut state = PhaseState::at_rest(ps.coords().to_vec(), &potential).unwrap();
    let mut noise = ParticleStreams::new(1, n);
    let params = StepParams {
        dt: 0.01,
        gamma: 1.0,
        beta_inv: 0.5,
    };
    for _ in 0..2000 {
        gbaoab_step(&mut state, &s, params, &potential, &mut noise).unwrap();
        assert!(max_constraint_violation(&state.x, &s) <= 1e-8);
        assert!(max_tangency_violation(&state.x, &state.p, &s) <= 1e-10);
    }
}

fn short_cfg(m: &ManifoldSpec, n: usize, seed: u64) -> AnnealConfig {
    AnnealConfig {
        steps: 300,
        trace_every: 10,
        ..AnnealConfig::defaults_for(m, n, seed)
    }
}

#[test]
fn anneal_is_deterministic_and_never_worse_than_start() {
    let m = ManifoldSpec::Torus { d: 2 };
    let espec = EnergySpec::gaussian(1.0 / 21.0).unwrap();
    let cfg = short_cfg(&m, 21, 9);
    let a = anneal(&m, 21, &espec, &cfg).unwrap();
    let b = anneal(&m, 21, &espec, &cfg).unwrap();
    assert_eq!(a, b);
    let start = gaussian_energy(&crate::baselines::halton(21, 2).unwrap(), 1.0 / 21.0).unwrap();
    assert_eq!(a.trace[0].energy.to_bits(), start.to_bits());
    assert!(a.best_energy <= start);
    let min = a.trace.iter().map(|t| t.energy).fold(f64::INFINITY, f64::min);
    assert_eq!(a.best_energy, min);
    assert!(a.best_energy <= a.trace.last().unwrap().energy);
    assert!(a.trace.windows(2).all(|w| w[1].beta_inv < w[0].beta_inv));
    assert_eq!(a.trace.first().unwrap().step, 0);
    assert_eq!(a.trace.last().unwrap().step, 300);
    let c = anneal(&m, 21, &espec, &short_cfg(&m, 21, 10)).unwrap();
    assert_ne!(a.best, c.best);
}

#[test]
fn anneal_on_surfaces_respects_constraints() {
    for m in [
        ManifoldSpec::Sphere,
        ManifoldSpec::dented_sphere(0.1).unwrap(),
        ManifoldSpec::hyperboloid(0.8).unwrap(),
    ] {
        let n = 25;
        let espec = EnergySpec::gaussian(crate::energy::default_bandwidth(n, 2, 1.0)).unwrap();
        let res = anneal(&m, n, &espec, &short_cfg(&m, n, 2)).unwrap();
        assert!(max_constraint_violation(res.best.coords(), &m) <= 1e-8, "{m}");
        assert!(res.best_energy <= res.trace[0].energy);
    }
}

#[test]
fn riesz_anneal_runs() {
    let m = ManifoldSpec::Sphere;
    let res = anneal(&m, 12, &EnergySpec::riesz(1.0).unwrap(), &short_cfg(&m, 12, 4)).unwrap();
    assert!(res.best_energy <= res.trace[0].energy);
    assert_eq!(res.best.meta["s"], "1");
}

#[test]
fn bad_pairings_are_rejected() {
    let espec = EnergySpec::gaussian(0.1).unwrap();
    let mut cfg = short_cfg(&ManifoldSpec::Sphere, 10, 0);
    cfg.init = Init::Halton;
    assert!(anneal(&ManifoldSpec::Sphere, 10, &espec, &cfg).is_err());
    let cfg = short_cfg(&ManifoldSpec::Sphere, 10, 0);
    assert!(anneal(&ManifoldSpec::Sphere, 1, &espec, &cfg).is_err());
    let mut cfg = short_cfg(&ManifoldSpec::Sphere, 10, 0);
    cfg.dt = -1.0;
    assert!(anneal(&ManifoldSpec::Sphere, 10, &espec, &cfg).is_err());
}

#[test]
fn trace_csv_header() {
    let m = ManifoldSpec::Torus { d: 1 };
    let res = anneal(&m, 5, &EnergySpec::gaussian(0.04).unwrap(), &short_cfg(&m, 5, 1)).unwrap();
    let csv = res.trace_csv();
    assert!(csv.starts_with("step,time,beta_inv,energy\n0,"));
    assert_eq!(csv.lines().count(), res.trace.len() + 1);
}
