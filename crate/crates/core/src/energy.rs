//! Pairwise interaction energies and their gradients.
//!
//! All sums are dense O(N²). Each particle's row (its energy contribution and
//! gradient) is computed independently, possibly in parallel, and the row
//! totals are then added in particle order, so every result is reproducible
//! bit for bit.
//!
//! On tori the Gaussian is summed over all periodic images, which makes it
//! the flat-torus heat kernel up to a constant factor. The min-image
//! Gaussian alone has negative Fourier modes once `t` is comparable to the
//! point spacing, and its minimizers then collapse into clusters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{min_image, ManifoldSpec, PointSet};
use crate::par;

/// Default wall stiffness `κ` for the compact hyperboloid.
pub const DEFAULT_WALL_KAPPA: f64 = 1e4;
/// Default wall exponent.
pub const DEFAULT_WALL_EXPONENT: f64 = 4.0;

/// Interaction kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    /// `exp(−d²/4t)` (image-summed on tori), over all ordered pairs
    /// including `i = j`.
    Gaussian { t: f64 },
    /// `d^{−s}`, summed over ordered pairs with `i ≠ j`.
    Riesz { s: f64 },
}

/// One-sided polynomial wall `κ (x₃ − c)^α` for `x₃ > c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallPenalty {
    pub c: f64,
    pub kappa: f64,
    pub alpha_exp: f64,
}

impl WallPenalty {
    pub fn new(c: f64, kappa: f64, alpha_exp: f64) -> Result<Self> {
        if !(kappa > 0.0) || !(alpha_exp > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "wall penalty needs kappa > 0 and exponent > 1 (got {kappa}, {alpha_exp})"
            )));
        }
        Ok(Self { c, kappa, alpha_exp })
    }

    /// Default wall for a manifold, if it needs one.
    pub fn for_manifold(m: &ManifoldSpec) -> Option<Self> {
        m.wall_threshold().map(|c| Self {
            c,
            kappa: DEFAULT_WALL_KAPPA,
            alpha_exp: DEFAULT_WALL_EXPONENT,
        })
    }
}

/// Energy to minimize: a kernel plus an optional wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySpec {
    pub kernel: Kernel,
    pub wall: Option<WallPenalty>,
}

impl EnergySpec {
    pub fn gaussian(t: f64) -> Result<Self> {
        Self::new(Kernel::Gaussian { t }, None)
    }

    pub fn riesz(s: f64) -> Result<Self> {
        Self::new(Kernel::Riesz { s }, None)
    }

    pub fn new(kernel: Kernel, wall: Option<WallPenalty>) -> Result<Self> {
        match kernel {
            Kernel::Gaussian { t } if !(t > 0.0 && t.is_finite()) => {
                return Err(Error::InvalidParameter(format!("bandwidth t must be positive, got {t}")))
            }
            Kernel::Riesz { s } if !(s > 0.0 && s.is_finite()) => {
                return Err(Error::InvalidParameter(format!("Riesz exponent s must be positive, got {s}")))
            }
            _ => {}
        }
        if let Some(w) = wall {
            WallPenalty::new(w.c, w.kappa, w.alpha_exp)?;
        }
        Ok(Self { kernel, wall })
    }

    pub fn with_wall(mut self, wall: Option<WallPenalty>) -> Self {
        self.wall = wall;
        self
    }
}

/// Bandwidth `θ N^{−2/d}`.
pub fn default_bandwidth(n: usize, d: usize, theta: f64) -> f64 {
    theta * (n as f64).powf(-2.0 / d as f64)
}

/// `Σ_n exp(−(v+n)²/4t)` over all integers `n`, and its derivative in `v`.
pub fn wrapped_gaussian(v: f64, t: f64) -> (f64, f64) {
    let v = min_image(v);
    let inv = 1.0 / (4.0 * t);
    let mut val = (-v * v * inv).exp();
    let mut der = -2.0 * v * inv * val;
    for n in 1.. {
        let (a, b) = (v + n as f64, v - n as f64);
        let (ga, gb) = ((-a * a * inv).exp(), (-b * b * inv).exp());
        val += ga + gb;
        der -= 2.0 * inv * (a * ga + b * gb);
        if ga + gb <= 1e-18 * val {
            break;
        }
    }
    (val, der)
}

/// Gaussian kernel for one pair.
pub fn gaussian_kernel(m: &ManifoldSpec, x: &[f64], y: &[f64], t: f64) -> f64 {
    if m.is_torus() {
        x.iter().zip(y).map(|(a, b)| wrapped_gaussian(a - b, t).0).product()
    } else {
        (-m.distance_sq(x, y) / (4.0 * t)).exp()
    }
}

/// Row `i` of the pair sum: its energy contribution and, if requested, the
/// gradient with respect to point `i`.
fn row(
    m: &ManifoldSpec,
    coords: &[f64],
    kernel: Kernel,
    i: usize,
    grad: Option<&mut [f64]>,
) -> Result<f64> {
    let dim = m.ambient_dim();
    let n = coords.len() / dim;
    let xi = &coords[i * dim..(i + 1) * dim];
    let mut delta = vec![0.0; dim];
    let mut energy = 0.0;
    let mut g_acc = grad;
    if let Some(g) = g_acc.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = 0.0);
    }
    let periodic = match kernel {
        Kernel::Gaussian { t } if m.is_torus() => Some(t),
        _ => None,
    };
    if let Some(t) = periodic {
        return Ok(periodic_row(coords, dim, i, t, g_acc));
    }
    for j in 0..n {
        if j == i {
            if let Kernel::Gaussian { .. } = kernel {
                energy += 1.0;
            }
            continue;
        }
        let xj = &coords[j * dim..(j + 1) * dim];
        m.displacement_into(xi, xj, &mut delta);
        let r2: f64 = delta.iter().map(|v| v * v).sum();
        // e: pair energy, f: scalar such that ∂E/∂x_i += f·δ_ij
        let (e, f) = match kernel {
            Kernel::Gaussian { t } => {
                let e = (-r2 / (4.0 * t)).exp();
                (e, -e / t)
            }
            Kernel::Riesz { s } => {
                if r2 == 0.0 {
                    return Err(Error::CoincidentPoints { i: i.min(j), j: i.max(j) });
                }
                let e = r2.powf(-0.5 * s);
                (e, -2.0 * s * e / r2)
            }
        };
        energy += e;
        if let Some(g) = g_acc.as_deref_mut() {
            for (gk, dk) in g.iter_mut().zip(&delta) {
                *gk += f * dk;
            }
        }
    }
    Ok(energy)
}

/// Image-summed Gaussian row on a torus: the pair value is `Π_k θ(δ_k)`.
fn periodic_row(coords: &[f64], dim: usize, i: usize, t: f64, mut grad: Option<&mut [f64]>) -> f64 {
    let n = coords.len() / dim;
    let xi = &coords[i * dim..(i + 1) * dim];
    let mut vals = vec![0.0; dim];
    let mut ders = vec![0.0; dim];
    let mut energy = 0.0;
    for j in 0..n {
        let xj = &coords[j * dim..(j + 1) * dim];
        for k in 0..dim {
            (vals[k], ders[k]) = wrapped_gaussian(xi[k] - xj[k], t);
        }
        energy += vals.iter().product::<f64>();
        if j == i {
            continue;
        }
        if let Some(g) = grad.as_deref_mut() {
            for k in 0..dim {
                let others: f64 = (0..dim).filter(|&l| l != k).map(|l| vals[l]).product();
                // the pair appears twice in the ordered sum
                g[k] += 2.0 * ders[k] * others;
            }
        }
    }
    energy
}

/// Kernel energy of raw coordinates.
pub fn kernel_energy(m: &ManifoldSpec, coords: &[f64], kernel: Kernel) -> Result<f64> {
    let dim = m.ambient_dim();
    let n = coords.len() / dim;
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let rows = par::try_map_indexed(n, |i| row(m, coords, kernel, i, None))?;
    Ok(rows.iter().sum())
}

/// Kernel energy and its gradient, written into `grad` (same layout as `coords`).
pub fn kernel_energy_grad(m: &ManifoldSpec, coords: &[f64], kernel: Kernel, grad: &mut [f64]) -> Result<f64> {
    let dim = m.ambient_dim();
    let n = coords.len() / dim;
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    debug_assert_eq!(grad.len(), coords.len());
    let rows = par::try_map_indexed(n, |i| {
        let mut g = vec![0.0; dim];
        row(m, coords, kernel, i, Some(&mut g)).map(|e| (e, g))
    })?;
    let mut total = 0.0;
    for (i, (e, g)) in rows.into_iter().enumerate() {
        total += e;
        grad[i * dim..(i + 1) * dim].copy_from_slice(&g);
    }
    Ok(total)
}

/// `E_Gaussian = Σ_{i,j} exp(−d(x_i,x_j)²/4t)`, diagonal included and
/// image-summed on tori.
pub fn gaussian_energy(ps: &PointSet, t: f64) -> Result<f64> {
    EnergySpec::gaussian(t)?;
    kernel_energy(ps.manifold(), ps.coords(), Kernel::Gaussian { t })
}

/// `Σ_{i,j} a_i a_j K(x_i,x_j)` with the Gaussian kernel and the set's
/// attached weights.
pub fn weighted_gaussian_energy(ps: &PointSet, t: f64) -> Result<f64> {
    let a = ps
        .weights()
        .ok_or_else(|| Error::InvalidParameter("weighted energy needs weights".into()))?;
    weighted_gaussian_energy_with(ps, t, a)
}

/// Weighted Gaussian energy for an explicit weight vector.
pub fn weighted_gaussian_energy_with(ps: &PointSet, t: f64, a: &[f64]) -> Result<f64> {
    EnergySpec::gaussian(t)?;
    if a.len() != ps.len() {
        return Err(Error::DimensionMismatch {
            expected: ps.len(),
            got: a.len(),
        });
    }
    let m = ps.manifold();
    let rows = par::map_indexed(ps.len(), |i| {
        let xi = ps.point(i);
        let mut s = 0.0;
        for (j, aj) in a.iter().enumerate() {
            s += aj * gaussian_kernel(m, xi, ps.point(j), t);
        }
        a[i] * s
    });
    Ok(rows.iter().sum())
}

/// `E_Riesz,s = Σ_{i≠j} d(x_i,x_j)^{−s}`.
pub fn riesz_energy(ps: &PointSet, s: f64) -> Result<f64> {
    EnergySpec::riesz(s)?;
    kernel_energy(ps.manifold(), ps.coords(), Kernel::Riesz { s })
}

pub fn gaussian_energy_grad(ps: &PointSet, t: f64) -> Result<Vec<f64>> {
    EnergySpec::gaussian(t)?;
    let mut g = vec![0.0; ps.coords().len()];
    kernel_energy_grad(ps.manifold(), ps.coords(), Kernel::Gaussian { t }, &mut g)?;
    Ok(g)
}

pub fn riesz_energy_grad(ps: &PointSet, s: f64) -> Result<Vec<f64>> {
    EnergySpec::riesz(s)?;
    let mut g = vec![0.0; ps.coords().len()];
    kernel_energy_grad(ps.manifold(), ps.coords(), Kernel::Riesz { s }, &mut g)?;
    Ok(g)
}

/// Wall value and gradient for a single ambient point.
pub fn wall_penalty(x: &[f64; 3], w: &WallPenalty) -> (f64, [f64; 3]) {
    let excess = x[2] - w.c;
    if excess <= 0.0 {
        return (0.0, [0.0; 3]);
    }
    let value = w.kappa * excess.powf(w.alpha_exp);
    let slope = w.kappa * w.alpha_exp * excess.powf(w.alpha_exp - 1.0);
    (value, [0.0, 0.0, slope])
}

/// Something the annealer can descend: an energy with a gradient over flat
/// coordinates.
pub trait Potential: Sync {
    fn energy(&self, x: &[f64]) -> Result<f64>;
    fn energy_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64>;
}

/// Kernel energy (plus optional wall) on a given manifold.
#[derive(Debug, Clone, Copy)]
pub struct ManifoldEnergy {
    pub manifold: ManifoldSpec,
    pub spec: EnergySpec,
}

impl ManifoldEnergy {
    pub fn new(manifold: ManifoldSpec, spec: EnergySpec) -> Self {
        Self { manifold, spec }
    }

    fn wall_terms(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let Some(w) = self.spec.wall else { return 0.0 };
        let mut total = 0.0;
        let mut grad = grad;
        for (i, p) in x.chunks_exact(3).enumerate() {
            let (v, g) = wall_penalty(&[p[0], p[1], p[2]], &w);
            total += v;
            if let Some(gr) = grad.as_deref_mut() {
                for k in 0..3 {
                    gr[3 * i + k] += g[k];
                }
            }
        }
        total
    }
}

impl Potential for ManifoldEnergy {
    fn energy(&self, x: &[f64]) -> Result<f64> {
        let e = kernel_energy(&self.manifold, x, self.spec.kernel)? + self.wall_terms(x, None);
        if !e.is_finite() {
            return Err(Error::NonFinite("energy".into()));
        }
        Ok(e)
    }

    fn energy_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        let e = kernel_energy_grad(&self.manifold, x, self.spec.kernel, grad)? + self.wall_terms(x, Some(grad));
        if !e.is_finite() {
            return Err(Error::NonFinite("energy".into()));
        }
        if let Some(k) = grad.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient component {k}")));
        }
        Ok(e)
    }
}
