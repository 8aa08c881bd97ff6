//! Orthonormal complex spherical harmonics with the Condon–Shortley phase.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Index of `(l, m)` in the flat layout used by [`sph_harm_all`].
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

fn angles(x: &[f64]) -> (f64, f64, f64) {
    let rho = x[0].hypot(x[1]);
    let r = rho.hypot(x[2]);
    (x[2] / r, rho / r, x[1].atan2(x[0]))
}

/// Fully normalized `P̄_l^m(cos θ)` for `0 ≤ m ≤ l ≤ lmax`, stored at `lm_index(l, m)`.
/// The sectoral seeds carry the sin θ powers, so nothing overflows for large `l`.
fn legendre_all(lmax: usize, cos_t: f64, sin_t: f64, out: &mut [f64]) {
    let mut pmm = 0.5 / std::f64::consts::PI.sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t;
        }
        out[lm_index(m, m as i64)] = pmm;
        if m == lmax {
            break;
        }
        let mut prev2 = pmm;
        let mut prev1 = ((2 * m + 3) as f64).sqrt() * cos_t * pmm;
        out[lm_index(m + 1, m as i64)] = prev1;
        let mut a_prev = ((2 * m + 3) as f64).sqrt();
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let p = a * (cos_t * prev1 - prev2 / a_prev);
            out[lm_index(l, m as i64)] = p;
            prev2 = prev1;
            prev1 = p;
            a_prev = a;
        }
    }
}

/// All `Y_l^m(x)` with `l ≤ lmax`, at `lm_index(l, m)`. `x` need not be unit length.
pub fn sph_harm_all(lmax: usize, x: &[f64]) -> Vec<Complex64> {
    let (cos_t, sin_t, phi) = angles(x);
    let mut p = vec![0.0; (lmax + 1) * (lmax + 1)];
    legendre_all(lmax, cos_t, sin_t, &mut p);
    let mut out = vec![Complex64::new(0.0, 0.0); p.len()];
    for m in 0..=lmax {
        let e = Complex64::from_polar(1.0, m as f64 * phi);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for l in m..=lmax {
            let y = e * p[lm_index(l, m as i64)];
            out[lm_index(l, m as i64)] = y;
            if m > 0 {
                out[lm_index(l, -(m as i64))] = y.conj() * sign;
            }
        }
    }
    out
}

/// `Y_l^m(x)` for a point `x` on the unit sphere.
pub fn sph_harm(l: usize, m: i64, x: &[f64]) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::InvalidParameter(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    if x.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: x.len(),
        });
    }
    let (cos_t, sin_t, phi) = angles(x);
    let mu = m.unsigned_abs() as usize;
    let mut p = vec![0.0; (l + 1) * (l + 1)];
    legendre_all(l, cos_t, sin_t, &mut p);
    let y = Complex64::from_polar(1.0, mu as f64 * phi) * p[lm_index(l, mu as i64)];
    Ok(if m >= 0 {
        y
    } else if mu % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    })
}
