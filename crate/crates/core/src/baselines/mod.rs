//! Comparison point sets: low-discrepancy sequences, lattices, random
//! samples, and spherical design files.

mod lattice;
mod sobol;

pub use lattice::{fibonacci, fibonacci_index, fibonacci_lattice, korobov_lattice, search_korobov_generator};
pub use sobol::{sobol, SOBOL_MAX_DIM};

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldSpec, PointSet};
use crate::rng::{self, standard_normal, Purpose};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Largest supported Halton dimension.
pub const HALTON_MAX_DIM: usize = PRIMES.len();

/// Norm deviation above which a design point is renormalized.
const DESIGN_RENORM_TOL: f64 = 1e-14;
/// Norm deviation above which the loader logs a warning.
const DESIGN_WARN_TOL: f64 = 1e-6;
/// Norm deviation above which the loader gives up.
const DESIGN_REJECT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Halton,
    Sobol,
    FibonacciLattice,
    KorobovLattice,
    Lhs,
    UniformRandom,
    SphericalFibonacci,
    SphericalDesignFile,
}

impl Method {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Lhs | Method::UniformRandom)
    }
}

/// Everything needed to reproduce one baseline point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub method: Method,
    pub n: usize,
    pub manifold: ManifoldSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub korobov_a: Option<u64>,
}

impl GeneratorSpec {
    pub fn new(method: Method, n: usize, manifold: ManifoldSpec) -> Self {
        Self {
            method,
            n,
            manifold,
            seed: None,
            path: None,
            korobov_a: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.manifold.validate()?;
        let torus_only = matches!(
            self.method,
            Method::Halton | Method::Sobol | Method::FibonacciLattice | Method::KorobovLattice | Method::Lhs
        );
        let sphere_only = matches!(self.method, Method::SphericalFibonacci | Method::SphericalDesignFile);
        let ok = match self.manifold {
            ManifoldSpec::Torus { d } => {
                !sphere_only && (self.method != Method::FibonacciLattice || d == 2)
            }
            ManifoldSpec::Sphere => !torus_only,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "method {:?} does not apply to {}",
                self.method, self.manifold
            )));
        }
        if self.method == Method::FibonacciLattice && fibonacci_index(self.n).is_none() {
            return Err(Error::InvalidParameter(format!("{} is not a Fibonacci number", self.n)));
        }
        if self.method == Method::SphericalDesignFile && self.path.is_none() {
            return Err(Error::InvalidParameter("design file path missing".into()));
        }
        Ok(())
    }
}

/// Builds the point set described by `spec`. Stochastic methods default to seed 0.
pub fn generate(spec: &GeneratorSpec) -> Result<PointSet> {
    spec.validate()?;
    let seed = spec.seed.unwrap_or(0);
    let d = spec.manifold.intrinsic_dim();
    match spec.method {
        Method::Halton => halton(spec.n, d),
        Method::Sobol => sobol(spec.n, d, spec.seed),
        Method::FibonacciLattice => fibonacci_lattice(fibonacci_index(spec.n).expect("validated")),
        Method::KorobovLattice => korobov_lattice(spec.n, d, spec.korobov_a),
        Method::Lhs => lhs(spec.n, d, seed),
        Method::UniformRandom => uniform_random(spec.n, &spec.manifold, seed),
        Method::SphericalFibonacci => spherical_fibonacci(spec.n),
        Method::SphericalDesignFile => {
            let ps = load_spherical_design(spec.path.as_ref().expect("validated"))?;
            if ps.len() != spec.n {
                return Err(Error::InvalidParameter(format!(
                    "design file has {} points, expected {}",
                    ps.len(),
                    spec.n
                )));
            }
            Ok(ps)
        }
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::EmptyPointSet)
    } else {
        Ok(())
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    out
}

/// Halton points for indices `1..=n` with the first `d` primes as bases.
pub fn halton(n: usize, d: usize) -> Result<PointSet> {
    check_count(n)?;
    if d == 0 || d > HALTON_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "Halton dimension must be in 1..={HALTON_MAX_DIM}, got {d}"
        )));
    }
    let coords = (1..=n as u64)
        .flat_map(|i| PRIMES[..d].iter().map(move |&b| radical_inverse(i, b)))
        .collect();
    Ok(PointSet::new(ManifoldSpec::Torus { d }, coords)?.with_meta("method", "halton"))
}

/// Latin hypercube sample: one point in each of the `n` strata per axis.
pub fn lhs(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    check_count(n)?;
    ManifoldSpec::torus(d)?;
    let mut rng = rng::stream(seed, Purpose::Lhs);
    let mut coords = vec![0.0; n * d];
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..d {
        perm.shuffle(&mut rng);
        for (j, &pj) in perm.iter().enumerate() {
            let u: f64 = rng.random();
            // keep the stratum even when (π+u)/n rounds up to its upper edge
            let v = (pj as f64 + u) / n as f64;
            let hi = (pj + 1) as f64 / n as f64;
            coords[j * d + k] = if v >= hi { hi.next_down() } else { v };
        }
    }
    Ok(PointSet::new(ManifoldSpec::Torus { d }, coords)?
        .with_meta("method", "lhs")
        .with_meta("seed", seed))
}

/// i.i.d. uniform points on the torus or the sphere.
pub fn uniform_random(n: usize, m: &ManifoldSpec, seed: u64) -> Result<PointSet> {
    check_count(n)?;
    let mut rng = rng::stream(seed, Purpose::Uniform);
    let coords = match *m {
        ManifoldSpec::Torus { d } => (0..n * d).map(|_| rng.random::<f64>()).collect(),
        ManifoldSpec::Sphere => {
            let mut coords = Vec::with_capacity(3 * n);
            while coords.len() < 3 * n {
                let v = [standard_normal(&mut rng), standard_normal(&mut rng), standard_normal(&mut rng)];
                let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if r > 1e-12 {
                    coords.extend(v.iter().map(|c| c / r));
                }
            }
            coords
        }
        _ => {
            return Err(Error::Unsupported {
                manifold: m.name().into(),
                what: "uniform sampling".into(),
            })
        }
    };
    Ok(PointSet::new(*m, coords)?
        .with_meta("method", "uniform")
        .with_meta("seed", seed))
}

/// Golden-angle spiral with heights `z_j = 1 − (2j+1)/n`.
pub fn spherical_fibonacci(n: usize) -> Result<PointSet> {
    check_count(n)?;
    let phi_g = (5f64.sqrt() - 1.0) / 2.0;
    let mut coords = Vec::with_capacity(3 * n);
    for j in 0..n {
        let z = 1.0 - (2 * j + 1) as f64 / n as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        // j·φ_g mod 1 first, so the angle stays accurate for large j
        let phi = std::f64::consts::TAU * (j as f64 * phi_g).fract();
        coords.extend([rho * phi.cos(), rho * phi.sin(), z]);
    }
    Ok(PointSet::new(ManifoldSpec::Sphere, coords)?
        .with_meta("method", "spherical-fibonacci")
        .with_meta("variant", "offset-2j+1"))
}

/// Parses a list of `x y z` rows (blank lines and `#` lines skipped),
/// renormalizes, and attaches uniform weights.
pub fn parse_spherical_design(text: &str) -> Result<PointSet> {
    let mut coords = Vec::new();
    let mut max_dev = 0.0f64;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: lineno + 1, msg };
        let vals = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>().map_err(|e| parse_err(format!("{tok:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != 3 {
            return Err(parse_err(format!("expected 3 columns, found {}", vals.len())));
        }
        let r = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dev = (r - 1.0).abs();
        if !(dev <= DESIGN_REJECT_TOL) {
            return Err(parse_err(format!("point norm {r} is not close to 1")));
        }
        max_dev = max_dev.max(dev);
        if dev > DESIGN_RENORM_TOL {
            coords.extend(vals.iter().map(|v| v / r));
        } else {
            coords.extend(vals);
        }
    }
    if coords.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if max_dev > DESIGN_WARN_TOL {
        log::warn!("design points deviate from the unit sphere by up to {max_dev:e}; renormalized");
    }
    let n = coords.len() / 3;
    let ps = PointSet::new(ManifoldSpec::Sphere, coords)?;
    Ok(ps
        .with_weights(vec![1.0 / n as f64; n])?
        .with_meta("method", "design")
        .with_meta("max_norm_deviation", format!("{max_dev:e}")))
}

/// Reads a spherical design file (whitespace-separated `x y z` rows).
pub fn load_spherical_design(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut ps = parse_spherical_design(&text)?;
    if let Some(name) = path.file_name() {
        ps.meta.insert("source".into(), name.to_string_lossy().into_owned());
    }
    Ok(ps)
}
