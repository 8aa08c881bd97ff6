//! Quadrature weights minimizing the weighted Gaussian energy `aᵀCa` subject
//! to `Σa = 1`, via a Cholesky solve of `Cy = 1`.
//!
//! On tori the kernel is the image-summed Gaussian of the energy module. The
//! min-image Gaussian is not positive definite there: at `t = 1/N` on T²
//! nearly every point set gives an indefinite `C`, and its stationary weights
//! can have higher energy than uniform ones.

use nalgebra::{DMatrix, DVector};

use crate::energy::{gaussian_kernel, EnergySpec};
use crate::error::{Error, Result};
use crate::geometry::{vol_normalizer, PointSet};
use crate::par;

/// Diagonal shift used for the single retry after a failed factorization.
pub const JITTER: f64 = 1e-12;

/// `C_ij = exp(−d(x_i,x_j)²/4t)`, image-summed on tori.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub entries: DMatrix<f64>,
    pub t: f64,
}

impl KernelMatrix {
    /// `aᵀCa`.
    pub fn quadratic_form(&self, a: &[f64]) -> f64 {
        let a = DVector::from_column_slice(a);
        a.dot(&(&self.entries * &a))
    }
}

pub fn kernel_matrix(ps: &PointSet, t: f64) -> Result<KernelMatrix> {
    EnergySpec::gaussian(t)?;
    let n = ps.len();
    let m = ps.manifold();
    let rows = par::map_indexed(n, |i| {
        let xi = ps.point(i);
        (0..n).map(|j| gaussian_kernel(m, xi, ps.point(j), t)).collect::<Vec<f64>>()
    });
    let entries = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(KernelMatrix { entries, t })
}

/// Solved weights and solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    /// `(max L_ii / min L_ii)²` from the Cholesky factor, a lower bound on cond₂(C).
    pub condition_estimate: f64,
    pub min_weight: f64,
    /// `(max(Ca) − min(Ca)) / mean(Ca)`; zero at the exact optimum.
    pub kkt_residual: f64,
    pub jitter: f64,
}

impl WeightSolution {
    pub fn has_negative(&self) -> bool {
        self.min_weight < 0.0
    }

    /// Diagnostics as `key=value` header entries.
    pub fn meta(&self) -> [(&'static str, String); 5] {
        [
            ("weights_condition_estimate", format!("{:e}", self.condition_estimate)),
            ("weights_min", format!("{:e}", self.min_weight)),
            ("weights_kkt_residual", format!("{:e}", self.kkt_residual)),
            ("weights_jitter", format!("{:e}", self.jitter)),
            ("weights_negative", self.has_negative().to_string()),
        ]
    }
}

/// `a = C⁻¹1 / (1ᵀC⁻¹1)`, scaled to sum to the volume normalizer.
pub fn solve_weights(ps: &PointSet, t: f64) -> Result<WeightSolution> {
    let km = kernel_matrix(ps, t)?;
    let c = &km.entries;
    let n = c.nrows();
    let (chol, jitter) = match c.clone().cholesky() {
        Some(ch) => (ch, 0.0),
        None => {
            let shifted = c + DMatrix::identity(n, n) * JITTER;
            (shifted.cholesky().ok_or(Error::SingularKernel)?, JITTER)
        }
    };
    let y = chol.solve(&DVector::from_element(n, 1.0));
    let total: f64 = y.iter().sum();
    if !(total.is_finite() && total != 0.0) {
        return Err(Error::SingularKernel);
    }
    let scale = vol_normalizer(ps.manifold()) / total;
    let weights: Vec<f64> = y.iter().map(|v| v * scale).collect();

    let l = chol.l_dirty();
    let diag = (0..n).map(|i| l[(i, i)]);
    let (lo, hi) = diag.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let ca = c * DVector::from_column_slice(&weights);
    let (ca_lo, ca_hi) = ca.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let ca_mean = ca.mean();
    let min_weight = weights.iter().copied().fold(f64::INFINITY, f64::min);
    if min_weight < 0.0 {
        log::warn!("solved weights include negative entries (min {min_weight:e})");
    }
    Ok(WeightSolution {
        weights,
        condition_estimate: (hi / lo).powi(2),
        min_weight,
        kkt_residual: (ca_hi - ca_lo) / ca_mean.abs(),
        jitter,
    })
}

/// A copy of `ps` carrying the solved weights and their diagnostics.
pub fn with_solved_weights(ps: &PointSet, t: f64) -> Result<(PointSet, WeightSolution)> {
    let sol = solve_weights(ps, t)?;
    let mut out = ps.clone().with_weights(sol.weights.clone())?;
    out.meta.insert("weights_t".into(), format!("{t:e}"));
    for (k, v) in sol.meta() {
        out.meta.insert(k.into(), v);
    }
    Ok((out, sol))
}
