//! Supported manifolds: the flat unit torus and three embedded surfaces in R³.
//!
//! Torus points live in `[0,1)^d` and use the minimum-image metric. Embedded
//! surfaces are level sets `g(x) = 0` in R³ and use the chordal (ambient
//! Euclidean) distance.

mod io;
mod point_set;

pub use io::{read_point_set, read_point_set_str, write_point_set, write_point_set_string, Format};
pub use point_set::{Meta, PointSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual allowed on `|g(x)|` for points of an embedded surface.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// Which manifold a point set lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ManifoldSpec {
    /// Unit torus `[0,1)^d`.
    Torus { d: usize },
    /// Unit sphere S² in R³.
    Sphere,
    /// `x₁² + x₂²/(α + x₁²) + x₃² = 1`.
    DentedSphere { alpha: f64 },
    /// Upper sheet of `x₁² + x₂² − x₃² = −1`, cut off where its disk image
    /// reaches radius `r`.
    CompactHyperboloid { r: f64 },
}

impl ManifoldSpec {
    pub fn torus(d: usize) -> Result<Self> {
        let m = ManifoldSpec::Torus { d };
        m.validate()?;
        Ok(m)
    }

    pub fn dented_sphere(alpha: f64) -> Result<Self> {
        let m = ManifoldSpec::DentedSphere { alpha };
        m.validate()?;
        Ok(m)
    }

    pub fn hyperboloid(r: f64) -> Result<Self> {
        let m = ManifoldSpec::CompactHyperboloid { r };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ManifoldSpec::Torus { d } if d == 0 => Err(Error::InvalidParameter(
                "torus dimension must be at least 1".into(),
            )),
            ManifoldSpec::DentedSphere { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(
                Error::InvalidParameter(format!("dent strength alpha must be positive, got {alpha}")),
            ),
            ManifoldSpec::CompactHyperboloid { r } if !(r > 0.0 && r < 1.0) => Err(
                Error::InvalidParameter(format!("disk radius r must lie in (0,1), got {r}")),
            ),
            _ => Ok(()),
        }
    }

    /// Short name used in file headers and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            ManifoldSpec::Torus { .. } => "torus",
            ManifoldSpec::Sphere => "sphere",
            ManifoldSpec::DentedSphere { .. } => "dented-sphere",
            ManifoldSpec::CompactHyperboloid { .. } => "hyperboloid",
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            ManifoldSpec::Torus { d } => d,
            _ => 2,
        }
    }

    /// Length of a coordinate vector.
    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldSpec::Torus { d } => d,
            _ => 3,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, ManifoldSpec::Torus { .. })
    }

    pub fn is_embedded(&self) -> bool {
        !self.is_torus()
    }

    /// Height `c = (1+r²)/(1−r²)` above which the hyperboloid wall penalty acts.
    pub fn wall_threshold(&self) -> Option<f64> {
        match *self {
            ManifoldSpec::CompactHyperboloid { r } => Some((1.0 + r * r) / (1.0 - r * r)),
            _ => None,
        }
    }

    /// Displacement from `y` to `x` written into `out`: minimum image on the
    /// torus, plain difference otherwise.
    #[inline]
    pub fn displacement_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        if self.is_torus() {
            for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                *o = min_image(a - b);
            }
        } else {
            for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                *o = a - b;
            }
        }
    }

    /// Squared distance used by the energies and kernel matrices.
    #[inline]
    pub fn distance_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        if self.is_torus() {
            x.iter().zip(y).map(|(a, b)| min_image(a - b).powi(2)).sum()
        } else {
            x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.distance_sq(x, y).sqrt()
    }
}

impl std::fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            ManifoldSpec::Torus { d } => write!(f, "torus(d={d})"),
            ManifoldSpec::Sphere => write!(f, "sphere"),
            ManifoldSpec::DentedSphere { alpha } => write!(f, "dented-sphere(alpha={alpha})"),
            ManifoldSpec::CompactHyperboloid { r } => write!(f, "hyperboloid(r={r})"),
        }
    }
}

/// Signed periodic difference folded into `[-1/2, 1/2]`.
#[inline]
pub fn min_image(delta: f64) -> f64 {
    delta - delta.round()
}

/// Maps a real coordinate onto `[0,1)`.
#[inline]
pub fn wrap_unit(v: f64) -> f64 {
    let w = v.rem_euclid(1.0);
    // rem_euclid rounds tiny negative inputs up to exactly 1.0
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Geodesic distance on the flat unit torus.
pub fn torus_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| {
            let diff = (a - b).abs();
            let delta = diff.min(1.0 - diff);
            delta * delta
        })
        .sum::<f64>()
        .sqrt())
}

/// Per-axis signed displacement `δ` with `|δ_i| ≤ 1/2` and `x − δ ≡ y (mod 1)`.
pub fn min_image_displacement(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| min_image(a - b)).collect())
}

/// Euclidean distance between two points of the ambient space.
pub fn ambient_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}

fn as3(x: &[f64]) -> Result<[f64; 3]> {
    x.try_into().map_err(|_| Error::DimensionMismatch {
        expected: 3,
        got: x.len(),
    })
}

fn unconstrained(m: &ManifoldSpec) -> Error {
    Error::Unsupported {
        manifold: m.name().into(),
        what: "the torus is unconstrained".into(),
    }
}

/// Level-set function `g` of an embedded surface.
pub fn constraint(m: &ManifoldSpec, x: &[f64]) -> Result<f64> {
    let x = as3(x)?;
    constraint3(m, &x).ok_or_else(|| unconstrained(m))
}

/// Analytic gradient of [`constraint`].
pub fn constraint_grad(m: &ManifoldSpec, x: &[f64]) -> Result<[f64; 3]> {
    let x = as3(x)?;
    constraint_grad3(m, &x).ok_or_else(|| unconstrained(m))
}

#[inline]
pub(crate) fn constraint3(m: &ManifoldSpec, x: &[f64; 3]) -> Option<f64> {
    let [a, b, c] = *x;
    match *m {
        ManifoldSpec::Torus { .. } => None,
        ManifoldSpec::Sphere => Some(a * a + b * b + c * c - 1.0),
        ManifoldSpec::DentedSphere { alpha } => Some(a * a + b * b / (alpha + a * a) + c * c - 1.0),
        ManifoldSpec::CompactHyperboloid { .. } => Some(a * a + b * b - c * c + 1.0),
    }
}

#[inline]
pub(crate) fn constraint_grad3(m: &ManifoldSpec, x: &[f64; 3]) -> Option<[f64; 3]> {
    let [a, b, c] = *x;
    match *m {
        ManifoldSpec::Torus { .. } => None,
        ManifoldSpec::Sphere => Some([2.0 * a, 2.0 * b, 2.0 * c]),
        ManifoldSpec::DentedSphere { alpha } => {
            let den = alpha + a * a;
            Some([
                2.0 * a - b * b * 2.0 * a / (den * den),
                2.0 * b / den,
                2.0 * c,
            ])
        }
        ManifoldSpec::CompactHyperboloid { .. } => Some([2.0 * a, 2.0 * b, -2.0 * c]),
    }
}

/// Central projection of the upper hyperboloid sheet onto the Poincaré disk.
pub fn hyperboloid_to_disk(x: &[f64]) -> Result<[f64; 2]> {
    let [a, b, c] = as3(x)?;
    if c <= -1.0 {
        return Err(Error::InvalidParameter(format!(
            "point with x3 = {c} is not on the upper sheet"
        )));
    }
    Ok([a / (1.0 + c), b / (1.0 + c)])
}

/// Inverse of [`hyperboloid_to_disk`].
pub fn disk_to_hyperboloid(u: &[f64]) -> Result<[f64; 3]> {
    let [u1, u2]: [f64; 2] = u.try_into().map_err(|_| Error::DimensionMismatch {
        expected: 2,
        got: u.len(),
    })?;
    let rho2 = u1 * u1 + u2 * u2;
    if rho2 >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "disk point has norm {} >= 1",
            rho2.sqrt()
        )));
    }
    let s = 1.0 / (1.0 - rho2);
    Ok([2.0 * u1 * s, 2.0 * u2 * s, (1.0 + rho2) * s])
}

/// Maps a unit-sphere point onto the dented sphere with strength `alpha`.
pub fn dented_sphere_lift(x: &[f64; 3], alpha: f64) -> [f64; 3] {
    let [a, b, c] = *x;
    let lifted = ((alpha + a * a) * b * b).sqrt();
    [a, lifted.copysign(b), c]
}

/// Total weight a quadrature rule assigns on `m`. Weights approximate the
/// normalized integral `(1/|M|)∫f`, so this is 1 on every manifold.
pub fn vol_normalizer(_m: &ManifoldSpec) -> f64 {
    1.0
}
