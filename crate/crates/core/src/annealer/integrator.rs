//! BAOAB splitting for underdamped Langevin dynamics, and its constrained
//! variant for particles confined to a level set `g(x) = 0`.

use crate::energy::Potential;
use crate::error::{Error, Result};
use crate::geometry::{constraint3, constraint_grad3, wrap_unit, ManifoldSpec};
use crate::par;
use crate::rng::{standard_normal, ParticleStreams};

/// Default residual for the position projection.
pub const SHAKE_TOL: f64 = 1e-10;
/// Default Newton iteration cap for the position projection.
pub const SHAKE_MAX_ITER: usize = 50;

/// Positions, momenta and the cached gradient/energy at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub grad: Vec<f64>,
    pub energy: f64,
}

impl PhaseState {
    /// State at `x` with zero momentum.
    pub fn at_rest<P: Potential + ?Sized>(x: Vec<f64>, potential: &P) -> Result<Self> {
        let p = vec![0.0; x.len()];
        Self::new(x, p, potential)
    }

    pub fn new<P: Potential + ?Sized>(x: Vec<f64>, p: Vec<f64>, potential: &P) -> Result<Self> {
        if x.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: p.len(),
            });
        }
        let mut grad = vec![0.0; x.len()];
        let energy = potential.energy_grad(&x, &mut grad)?;
        Ok(Self { x, p, grad, energy })
    }

    fn refresh<P: Potential + ?Sized>(&mut self, potential: &P) -> Result<()> {
        self.energy = potential.energy_grad(&self.x, &mut self.grad)?;
        Ok(())
    }
}

/// Step size, friction and current temperature for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub gamma: f64,
    pub beta_inv: f64,
}

impl StepParams {
    /// `(α, σ)` of the Ornstein–Uhlenbeck update `p ← α p + σ R`.
    fn ou_coefficients(&self) -> (f64, f64) {
        let alpha = (-self.dt * self.gamma).exp();
        let sigma = ((1.0 - alpha * alpha) * self.beta_inv).max(0.0).sqrt();
        (alpha, sigma)
    }
}

fn kick(p: &mut [f64], grad: &[f64], h: f64) {
    for (pk, gk) in p.iter_mut().zip(grad) {
        *pk -= h * gk;
    }
}

fn drift(x: &mut [f64], p: &[f64], h: f64, periodic: bool) {
    for (xk, pk) in x.iter_mut().zip(p) {
        *xk += h * pk;
        if periodic {
            *xk = wrap_unit(*xk);
        }
    }
}

/// Ornstein–Uhlenbeck momentum refresh. Particle `i` draws its `dim` normals
/// from stream `i`, so the draws never depend on scheduling.
fn thermostat(p: &mut [f64], dim: usize, params: &StepParams, noise: &mut ParticleStreams) -> Result<()> {
    if noise.len() * dim != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len() / dim.max(1),
            got: noise.len(),
        });
    }
    let (alpha, sigma) = params.ou_coefficients();
    par::for_each_chunk_with(p, dim, noise.streams_mut(), |_, chunk, rng| {
        for pk in chunk.iter_mut() {
            *pk = alpha * *pk + sigma * standard_normal(rng);
        }
    });
    Ok(())
}

/// One BAOAB step for unconstrained particles in `dim` dimensions. With
/// `periodic` the positions are folded back into the unit torus after each
/// drift.
pub fn baoab_step<P: Potential + ?Sized>(
    state: &mut PhaseState,
    dim: usize,
    periodic: bool,
    params: StepParams,
    potential: &P,
    noise: &mut ParticleStreams,
) -> Result<()> {
    let h = 0.5 * params.dt;
    kick(&mut state.p, &state.grad, h);
    drift(&mut state.x, &state.p, h, periodic);
    thermostat(&mut state.p, dim, &params, noise)?;
    drift(&mut state.x, &state.p, h, periodic);
    state.refresh(potential)?;
    kick(&mut state.p, &state.grad, h);
    Ok(())
}

/// Projects each particle of `x_new` back onto the surface along the
/// constraint normal at the matching particle of `x_ref`:
/// `x_i = x_new_i + λ_i ∇g(x_ref_i)`, with `λ_i` found by Newton iteration.
pub fn shake_project(
    x_new: &[f64],
    x_ref: &[f64],
    m: &ManifoldSpec,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    if m.is_torus() {
        return Err(Error::Unsupported {
            manifold: m.name().into(),
            what: "position projection".into(),
        });
    }
    if x_new.len() != x_ref.len() || x_new.len() % 3 != 0 {
        return Err(Error::DimensionMismatch {
            expected: x_ref.len(),
            got: x_new.len(),
        });
    }
    let n = x_new.len() / 3;
    let projected = par::try_map_indexed(n, |i| {
        let y0 = [x_new[3 * i], x_new[3 * i + 1], x_new[3 * i + 2]];
        let r = [x_ref[3 * i], x_ref[3 * i + 1], x_ref[3 * i + 2]];
        let normal = constraint_grad3(m, &r).expect("embedded manifold");
        let mut lambda = 0.0;
        let mut y = y0;
        let mut g = constraint3(m, &y).expect("embedded manifold");
        let mut iter = 0;
        while g.abs() > tol {
            if iter == max_iter || !g.is_finite() {
                return Err(Error::ProjectionFailed {
                    particle: i,
                    iterations: iter,
                    residual: g.abs(),
                });
            }
            let gy = constraint_grad3(m, &y).expect("embedded manifold");
            let slope: f64 = gy.iter().zip(&normal).map(|(a, b)| a * b).sum();
            if slope == 0.0 {
                return Err(Error::ProjectionFailed {
                    particle: i,
                    iterations: iter,
                    residual: g.abs(),
                });
            }
            lambda -= g / slope;
            for k in 0..3 {
                y[k] = y0[k] + lambda * normal[k];
            }
            g = constraint3(m, &y).expect("embedded manifold");
            iter += 1;
        }
        Ok(y)
    })?;
    Ok(projected.into_iter().flatten().collect())
}

/// Removes the normal component of each particle's momentum.
pub fn rattle_project(p: &mut [f64], x: &[f64], m: &ManifoldSpec) -> Result<()> {
    if m.is_torus() {
        return Err(Error::Unsupported {
            manifold: m.name().into(),
            what: "momentum projection".into(),
        });
    }
    if p.len() != x.len() || x.len() % 3 != 0 {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: p.len(),
        });
    }
    let projected = par::try_map_indexed(x.len() / 3, |i| {
        let xi = [x[3 * i], x[3 * i + 1], x[3 * i + 2]];
        let mut pi = [p[3 * i], p[3 * i + 1], p[3 * i + 2]];
        let n = constraint_grad3(m, &xi).expect("embedded manifold");
        let nn: f64 = n.iter().map(|v| v * v).sum();
        if !(nn > f64::MIN_POSITIVE) {
            return Err(Error::SingularConstraint(i));
        }
        // second pass mops up rounding left by the first
        for _ in 0..2 {
            let c = n.iter().zip(&pi).map(|(a, b)| a * b).sum::<f64>() / nn;
            for k in 0..3 {
                pi[k] -= c * n[k];
            }
        }
        Ok(pi)
    })?;
    for (dst, src) in p.chunks_exact_mut(3).zip(projected) {
        dst.copy_from_slice(&src);
    }
    Ok(())
}

fn constrained_drift(state: &mut PhaseState, m: &ManifoldSpec, h: f64) -> Result<()> {
    let x_old = state.x.clone();
    let mut proposal = state.x.clone();
    drift(&mut proposal, &state.p, h, false);
    state.x = shake_project(&proposal, &x_old, m, SHAKE_TOL, SHAKE_MAX_ITER)?;
    // momentum consistent with the constrained displacement
    for ((pk, xn), xo) in state.p.iter_mut().zip(&state.x).zip(&x_old) {
        *pk = (xn - xo) / h;
    }
    rattle_project(&mut state.p, &state.x, m)
}

/// One constrained BAOAB step on an embedded surface. Every kick and the
/// thermostat are followed by a momentum projection; every drift by a
/// position projection and then a momentum projection.
pub fn gbaoab_step<P: Potential + ?Sized>(
    state: &mut PhaseState,
    m: &ManifoldSpec,
    params: StepParams,
    potential: &P,
    noise: &mut ParticleStreams,
) -> Result<()> {
    let h = 0.5 * params.dt;
    kick(&mut state.p, &state.grad, h);
    rattle_project(&mut state.p, &state.x, m)?;
    constrained_drift(state, m, h)?;
    thermostat(&mut state.p, 3, &params, noise)?;
    rattle_project(&mut state.p, &state.x, m)?;
    constrained_drift(state, m, h)?;
    state.refresh(potential)?;
    kick(&mut state.p, &state.grad, h);
    rattle_project(&mut state.p, &state.x, m)
}

/// Largest `|g(x_i)|` over all particles.
pub fn max_constraint_violation(x: &[f64], m: &ManifoldSpec) -> f64 {
    x.chunks_exact(3)
        .map(|p| constraint3(m, &[p[0], p[1], p[2]]).unwrap_or(0.0).abs())
        .fold(0.0, f64::max)
}

/// Largest `|∇g(x_i)·p_i|` over all particles.
pub fn max_tangency_violation(x: &[f64], p: &[f64], m: &ManifoldSpec) -> f64 {
    x.chunks_exact(3)
        .zip(p.chunks_exact(3))
        .map(|(xi, pi)| {
            let n = constraint_grad3(m, &[xi[0], xi[1], xi[2]]).unwrap_or([0.0; 3]);
            n.iter().zip(pi).map(|(a, b)| a * b).sum::<f64>().abs()
        })
        .fold(0.0, f64::max)
}
