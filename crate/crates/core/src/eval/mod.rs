//! Integration error against Laplacian eigenfunctions on T^d and S².
//!
//! Torus eigenfunctions are `e^{2πik·x}` labelled by `λ = ‖k‖²`, with one
//! representative per `±k` pair. Sphere eigenfunctions are the `Y_l^m`,
//! `l ≥ 1`, labelled by `λ = l(l+1)` and ordered by `l`, then `m`.

mod harmonics;

pub use harmonics::{lm_index, sph_harm, sph_harm_all};

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldSpec, PointSet};
use crate::par;

/// Norm tolerance for points passed to the sphere error.
pub const SPHERE_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EigenLabel {
    Torus { k: Vec<i64> },
    Sphere { l: usize, m: i64 },
}

impl EigenLabel {
    pub fn lambda(&self) -> f64 {
        match self {
            EigenLabel::Torus { k } => k.iter().map(|v| (v * v) as f64).sum(),
            EigenLabel::Sphere { l, .. } => (l * (l + 1)) as f64,
        }
    }

    pub fn k(&self) -> Option<&[i64]> {
        match self {
            EigenLabel::Torus { k } => Some(k),
            EigenLabel::Sphere { .. } => None,
        }
    }

    /// CSV cell for the frequency (`1;-1`) or the degree.
    pub fn l_or_k(&self) -> String {
        match self {
            EigenLabel::Torus { k } => k.iter().map(i64::to_string).collect::<Vec<_>>().join(";"),
            EigenLabel::Sphere { l, .. } => l.to_string(),
        }
    }

    /// CSV cell for the order; empty on the torus.
    pub fn m_or_blank(&self) -> String {
        match self {
            EigenLabel::Torus { .. } => String::new(),
            EigenLabel::Sphere { m, .. } => m.to_string(),
        }
    }
}

/// The first `count` frequency representatives `k ∈ Z^d∖{0}` (first nonzero
/// entry positive), by `‖k‖²` and then descending lexicographic order.
pub fn torus_eigen_enumeration(d: usize, count: usize) -> Result<Vec<EigenLabel>> {
    ManifoldSpec::torus(d)?;
    if count == 0 {
        return Err(Error::InvalidParameter("eigenfunction count must be at least 1".into()));
    }
    let mut radius: i64 = 1;
    loop {
        let r2 = radius * radius;
        let side = (2 * radius + 1) as usize;
        let total = side.checked_pow(d as u32).ok_or_else(|| {
            Error::InvalidParameter(format!("{count} frequencies in {d} dimensions is too many"))
        })?;
        let mut found: Vec<(i64, Vec<i64>)> = Vec::new();
        let mut k = vec![0i64; d];
        for idx in 0..total {
            let mut rem = idx;
            for kk in k.iter_mut() {
                *kk = (rem % side) as i64 - radius;
                rem /= side;
            }
            let n2: i64 = k.iter().map(|v| v * v).sum();
            let first = k.iter().find(|&&v| v != 0);
            if n2 > 0 && n2 <= r2 && first.is_some_and(|&v| v > 0) {
                found.push((n2, k.clone()));
            }
        }
        // every k with ‖k‖² ≤ r² lies in the box, so this prefix is final
        if found.len() >= count {
            found.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
            found.truncate(count);
            return Ok(found.into_iter().map(|(_, k)| EigenLabel::Torus { k }).collect());
        }
        radius *= 2;
    }
}

/// `(l, m)` for `l = 1, 2, …` and `m = −l..=l`, the first `count` of them.
pub fn sphere_eigen_enumeration(count: usize) -> Vec<EigenLabel> {
    (1usize..)
        .flat_map(|l| (-(l as i64)..=l as i64).map(move |m| EigenLabel::Sphere { l, m }))
        .take(count)
        .collect()
}

/// All `(l, m)` with `1 ≤ l ≤ lmax`.
pub fn sphere_labels_to_degree(lmax: usize) -> Vec<EigenLabel> {
    sphere_eigen_enumeration((lmax + 1) * (lmax + 1) - 1)
}

/// First `count` labels for the manifold's eigenbasis.
pub fn eigen_enumeration(m: &ManifoldSpec, count: usize) -> Result<Vec<EigenLabel>> {
    match *m {
        ManifoldSpec::Torus { d } => torus_eigen_enumeration(d, count),
        ManifoldSpec::Sphere => Ok(sphere_eigen_enumeration(count)),
        _ => Err(Error::Unsupported {
            manifold: m.name().into(),
            what: "eigenfunction error (qualitative-only manifold)".into(),
        }),
    }
}

fn torus_term(ps: &PointSet, a: &[f64], k: &[i64]) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (x, &w) in ps.points().zip(a) {
        let dot: f64 = x.iter().zip(k).map(|(xi, &ki)| xi * ki as f64).sum();
        // reduce mod 1 before scaling so large k keep their phase accuracy
        let phase = std::f64::consts::TAU * (dot - dot.round());
        let (sin, cos) = phase.sin_cos();
        s += Complex64::new(w * cos, w * sin);
    }
    s.norm_sqr()
}

fn require_torus(ps: &PointSet, k_len: usize) -> Result<()> {
    match *ps.manifold() {
        ManifoldSpec::Torus { d } if d == k_len => Ok(()),
        ManifoldSpec::Torus { d } => Err(Error::DimensionMismatch { expected: d, got: k_len }),
        _ => Err(Error::Unsupported {
            manifold: ps.manifold().name().into(),
            what: "torus frequencies".into(),
        }),
    }
}

/// `|Σ_j a_j e^{2πik·x_j}|²` with stored weights, or `1/N` each.
pub fn torus_error(ps: &PointSet, k: &[i64]) -> Result<f64> {
    require_torus(ps, k.len())?;
    Ok(torus_term(ps, &ps.weights_or_uniform(), k))
}

fn require_unit_sphere(ps: &PointSet) -> Result<()> {
    if *ps.manifold() != ManifoldSpec::Sphere {
        return Err(Error::Unsupported {
            manifold: ps.manifold().name().into(),
            what: "spherical harmonics".into(),
        });
    }
    for (i, x) in ps.points().enumerate() {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !((r - 1.0).abs() <= SPHERE_NORM_TOL) {
            return Err(Error::InvalidParameter(format!("point {i} has norm {r}")));
        }
    }
    Ok(())
}

/// `|Σ_j a_j Y_l^m(x_j)|²` with stored weights, or `1/N` each.
pub fn sphere_error(ps: &PointSet, l: usize, m: i64) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidParameter("sphere error needs l ≥ 1".into()));
    }
    require_unit_sphere(ps)?;
    let a = ps.weights_or_uniform();
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in ps.points().zip(&a) {
        s += sph_harm(l, m, x)? * w;
    }
    Ok(s.norm_sqr())
}

/// Per-eigenfunction errors and their running sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSpectrum {
    pub labels: Vec<EigenLabel>,
    pub e_lambda: Vec<f64>,
    pub e_cum: Vec<f64>,
}

impl ErrorSpectrum {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `E_≤s` for the first `s` labels (`s ≥ 1`).
    pub fn cumulative_at(&self, s: usize) -> Option<f64> {
        s.checked_sub(1).and_then(|i| self.e_cum.get(i)).copied()
    }

    /// `index,lambda,l_or_k,m_or_blank,E_lambda,E_cum`, index starting at 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,lambda,l_or_k,m_or_blank,E_lambda,E_cum\n");
        for i in 0..self.len() {
            push_row(&mut s, None, i, &self.labels[i], self.e_lambda[i], self.e_cum[i]);
        }
        s
    }
}

fn push_row(s: &mut String, run: Option<usize>, i: usize, label: &EigenLabel, e: f64, c: f64) {
    if let Some(r) = run {
        let _ = write!(s, "{r},");
    }
    let _ = writeln!(
        s,
        "{},{},{},{},{:e},{:e}",
        i + 1,
        label.lambda(),
        label.l_or_k(),
        label.m_or_blank(),
        e,
        c
    );
}

/// Attaches prefix sums to per-label errors.
pub fn cumulative_error(labels: Vec<EigenLabel>, e_lambda: Vec<f64>) -> Result<ErrorSpectrum> {
    if labels.len() != e_lambda.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: e_lambda.len(),
        });
    }
    let mut acc = 0.0;
    let e_cum = e_lambda
        .iter()
        .map(|e| {
            acc += e;
            acc
        })
        .collect();
    Ok(ErrorSpectrum { labels, e_lambda, e_cum })
}

/// Errors of `ps` on each label. Labels are evaluated in parallel; every sum
/// over points runs in point order, so the result does not depend on threads.
pub fn spectrum(ps: &PointSet, labels: &[EigenLabel]) -> Result<ErrorSpectrum> {
    let e = match ps.manifold() {
        ManifoldSpec::Torus { .. } => torus_errors(ps, labels)?,
        ManifoldSpec::Sphere => sphere_errors(ps, labels)?,
        m => {
            return Err(Error::Unsupported {
                manifold: m.name().into(),
                what: "eigenfunction error (qualitative-only manifold)".into(),
            })
        }
    };
    cumulative_error(labels.to_vec(), e)
}

/// Errors on the first `count` eigenfunctions of the point set's manifold.
pub fn spectrum_first(ps: &PointSet, count: usize) -> Result<ErrorSpectrum> {
    let labels = eigen_enumeration(ps.manifold(), count)?;
    spectrum(ps, &labels)
}

fn torus_errors(ps: &PointSet, labels: &[EigenLabel]) -> Result<Vec<f64>> {
    let a = ps.weights_or_uniform();
    let ks = labels
        .iter()
        .map(|l| {
            let k = l.k().ok_or_else(|| Error::InvalidParameter("sphere label on a torus".into()))?;
            require_torus(ps, k.len())?;
            Ok(k)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(par::map_indexed(ks.len(), |i| torus_term(ps, &a, ks[i])))
}

fn sphere_errors(ps: &PointSet, labels: &[EigenLabel]) -> Result<Vec<f64>> {
    require_unit_sphere(ps)?;
    let mut lmax = 0;
    for label in labels {
        match *label {
            EigenLabel::Sphere { l, m } if l >= 1 && m.unsigned_abs() as usize <= l => lmax = lmax.max(l),
            _ => return Err(Error::InvalidParameter(format!("bad sphere label {label:?}"))),
        }
    }
    let a = ps.weights_or_uniform();
    let per_point = par::map_indexed(ps.len(), |j| sph_harm_all(lmax, ps.point(j)));
    let mut sums = vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)];
    for (ys, w) in per_point.iter().zip(&a) {
        for (s, y) in sums.iter_mut().zip(ys) {
            *s += y * w;
        }
    }
    Ok(labels
        .iter()
        .map(|label| match *label {
            EigenLabel::Sphere { l, m } => sums[lm_index(l, m)].norm_sqr(),
            EigenLabel::Torus { .. } => unreachable!(),
        })
        .collect())
}

/// Largest `L ≤ lmax` such that every `Y_l^m` with `1 ≤ l ≤ L` has error at most `tol`.
pub fn sphere_exactness_degree(ps: &PointSet, lmax: usize, tol: f64) -> Result<usize> {
    let spec = spectrum(ps, &sphere_labels_to_degree(lmax))?;
    let mut degree = 0;
    for l in 1..=lmax {
        let lo = l * l - 1;
        if spec.e_lambda[lo..lo + 2 * l + 1].iter().all(|&e| e <= tol) {
            degree = l;
        } else {
            break;
        }
    }
    Ok(degree)
}

/// Order statistics of one label across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStats {
    pub label: EigenLabel,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub values: Vec<f64>,
}

/// Median with the mean-of-middle-two convention for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Which series of a spectrum to summarize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Series {
    PerEigen,
    Cumulative,
}

/// Per-label median, min, max and raw values over several runs.
pub fn ensemble_stats(spectra: &[ErrorSpectrum], series: Series) -> Result<Vec<LabelStats>> {
    let first = spectra.first().ok_or(Error::InvalidParameter("no spectra to summarize".into()))?;
    if spectra.iter().any(|s| s.labels != first.labels) {
        return Err(Error::InvalidParameter("spectra have different labels".into()));
    }
    Ok(first
        .labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let values: Vec<f64> = spectra
                .iter()
                .map(|s| match series {
                    Series::PerEigen => s.e_lambda[i],
                    Series::Cumulative => s.e_cum[i],
                })
                .collect();
            LabelStats {
                label: label.clone(),
                median: median(&values).expect("non-empty"),
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                values,
            }
        })
        .collect())
}

/// Long-format CSV of several runs: `run_id` followed by the spectrum columns.
pub fn ensemble_csv(runs: &[(usize, &ErrorSpectrum)]) -> String {
    let mut s = String::from("run_id,index,lambda,l_or_k,m_or_blank,E_lambda,E_cum\n");
    for (run, spec) in runs {
        for i in 0..spec.len() {
            push_row(&mut s, Some(*run), i, &spec.labels[i], spec.e_lambda[i], spec.e_cum[i]);
        }
    }
    s
}

/// `lambda,median,min,max`, one row per label.
pub fn stats_csv(stats: &[LabelStats]) -> String {
    let mut s = String::from("lambda,median,min,max\n");
    for st in stats {
        let _ = writeln!(s, "{},{:e},{:e},{:e}", st.label.lambda(), st.median, st.min, st.max);
    }
    s
}
