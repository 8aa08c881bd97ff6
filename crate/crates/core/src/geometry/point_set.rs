use std::collections::BTreeMap;

use super::{constraint3, vol_normalizer, wrap_unit, ManifoldSpec, CONSTRAINT_TOL};
use crate::error::{Error, Result};

/// Free-form `key=value` provenance carried in file headers.
pub type Meta = BTreeMap<String, String>;

/// Tolerance on `Σ a_i = vol_normalizer(M)` for stored weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// N points on a manifold, row-major, with optional quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    manifold: ManifoldSpec,
    coords: Vec<f64>,
    weights: Option<Vec<f64>>,
    pub meta: Meta,
}

impl PointSet {
    /// Builds a point set, wrapping torus coordinates into `[0,1)` and checking
    /// that surface points satisfy their constraint.
    pub fn new(manifold: ManifoldSpec, mut coords: Vec<f64>) -> Result<Self> {
        manifold.validate()?;
        let dim = manifold.ambient_dim();
        if coords.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {} of point {}", i % dim, i / dim)));
        }
        if manifold.is_torus() {
            coords.iter_mut().for_each(|v| *v = wrap_unit(*v));
        } else {
            for (i, p) in coords.chunks_exact(3).enumerate() {
                let g = constraint3(&manifold, &[p[0], p[1], p[2]]).unwrap_or(0.0);
                if g.abs() > CONSTRAINT_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "point {i} is off the {} (|g| = {:e})",
                        manifold.name(),
                        g.abs()
                    )));
                }
            }
        }
        Ok(Self {
            manifold,
            coords,
            weights: None,
            meta: Meta::new(),
        })
    }

    pub fn from_points<P: AsRef<[f64]>>(manifold: ManifoldSpec, points: &[P]) -> Result<Self> {
        let coords = points.iter().flat_map(|p| p.as_ref().iter().copied()).collect();
        Self::new(manifold, coords)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.set_weights(weights)?;
        Ok(self)
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set_weights(&mut self, weights: Vec<f64>) -> Result<()> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: weights.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        let target = vol_normalizer(&self.manifold);
        if !((sum - target).abs() <= WEIGHT_SUM_TOL) {
            return Err(Error::InvalidParameter(format!(
                "weights sum to {sum}, expected {target}"
            )));
        }
        self.weights = Some(weights);
        Ok(())
    }

    pub fn clear_weights(&mut self) {
        self.weights = None;
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn dim(&self) -> usize {
        self.manifold.ambient_dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim())
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Stored weights, or uniform `vol/N` when none are attached.
    pub fn weights_or_uniform(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => {
                let n = self.len();
                vec![vol_normalizer(&self.manifold) / n as f64; n]
            }
        }
    }

    /// Reorders the points (and weights) so that new point `i` is old point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let d = self.dim();
        let coords: Vec<f64> = perm.iter().flat_map(|&i| self.coords[i * d..(i + 1) * d].iter().copied()).collect();
        let mut out = Self {
            manifold: self.manifold,
            coords,
            weights: None,
            meta: self.meta.clone(),
        };
        if let Some(w) = &self.weights {
            out.weights = Some(perm.iter().map(|&i| w[i]).collect());
        }
        Ok(out)
    }
}
