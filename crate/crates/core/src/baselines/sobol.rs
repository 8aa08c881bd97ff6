//! Sobol' sequence in Gray-code order with Joe–Kuo direction numbers.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{ManifoldSpec, PointSet};
use crate::rng::{self, Purpose};

const BITS: usize = 32;

/// `(degree s, coefficient bits a, initial m_1..m_s)` for dimensions 2.. (Joe & Kuo, new-joe-kuo-6.21201).
const DIRECTIONS: &[(u32, u32, &[u32])] = &[
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
    (6, 19, &[1, 1, 1, 15, 7, 5]),
    (6, 22, &[1, 3, 1, 15, 13, 25]),
    (6, 25, &[1, 1, 5, 5, 19, 61]),
    (7, 1, &[1, 3, 7, 11, 23, 15, 103]),
    (7, 4, &[1, 3, 7, 13, 13, 15, 69]),
];

/// Largest supported dimension.
pub const SOBOL_MAX_DIM: usize = DIRECTIONS.len() + 1;

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = DIRECTIONS[dim - 1];
    let s = s as usize;
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                x ^= v[k - j];
            }
        }
        v[k] = x;
    }
    v
}

/// First `n` Sobol' points in `d` dimensions, starting with the origin.
/// With `scramble_seed`, each dimension is XORed with a random digital shift.
pub fn sobol(n: usize, d: usize, scramble_seed: Option<u64>) -> Result<PointSet> {
    if d == 0 || d > SOBOL_MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "Sobol' dimension must be in 1..={SOBOL_MAX_DIM}, got {d}"
        )));
    }
    if n == 0 || n as u64 > 1u64 << BITS {
        return Err(Error::InvalidParameter(format!("Sobol' point count {n} out of range")));
    }
    let dirs: Vec<[u32; BITS]> = (0..d).map(direction_numbers).collect();
    let shifts: Vec<u32> = match scramble_seed {
        Some(seed) => {
            let mut rng = rng::stream(seed, Purpose::Scramble);
            (0..d).map(|_| rng.random()).collect()
        }
        None => vec![0; d],
    };
    let scale = 1.0 / (1u64 << BITS) as f64;
    let mut state = vec![0u32; d];
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        if i > 0 {
            // Gray code: flip the direction number at the lowest zero bit of i−1
            let c = (!(i - 1)).trailing_zeros() as usize;
            for (sk, dk) in state.iter_mut().zip(&dirs) {
                *sk ^= dk[c];
            }
        }
        coords.extend(state.iter().zip(&shifts).map(|(s, sh)| (s ^ sh) as f64 * scale));
    }
    let mut ps = PointSet::new(ManifoldSpec::Torus { d }, coords)?;
    ps.meta.insert("method".into(), "sobol".into());
    if let Some(seed) = scramble_seed {
        ps.meta.insert("seed".into(), seed.to_string());
        ps.meta.insert("scramble".into(), "digital-shift".into());
    }
    Ok(ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_prefix() {
        let ps = sobol(4, 1, None).unwrap();
        assert_eq!(ps.coords(), &[0.0, 0.5, 0.75, 0.25]);
    }

    #[test]
    fn matches_reference_points() {
        // values from an independent Joe–Kuo implementation (unscrambled)
        let ps = sobol(128, 21, None).unwrap();
        assert_eq!(&ps.point(2)[..5], &[0.75, 0.25, 0.25, 0.25, 0.75]);
        assert_eq!(&ps.point(5)[..5], &[0.875, 0.875, 0.125, 0.375, 0.875]);
        let p100 = [
            0.4140625, 0.2578125, 0.7734375, 0.7265625, 0.8828125, 0.7421875, 0.0234375, 0.4765625,
            0.6328125, 0.6953125, 0.4609375, 0.6796875, 0.4765625, 0.8515625, 0.3203125, 0.4921875,
            0.6796875, 0.7421875, 0.8359375, 0.3359375, 0.7578125,
        ];
        assert_eq!(ps.point(100), &p100);
        let p127 = [
            0.0078125, 0.6640625, 0.5546875, 0.6328125, 0.4765625, 0.3359375, 0.2421875, 0.0703125,
            0.4140625, 0.5390625, 0.6171875, 0.5859375, 0.8828125, 0.2578125, 0.6015625, 0.2734375,
            0.9609375, 0.2109375, 0.6796875, 0.8046875, 0.5390625,
        ];
        assert_eq!(ps.point(127), &p127);
    }

    #[test]
    fn origin_first_and_range() {
        let ps = sobol(1000, 8, None).unwrap();
        assert!(ps.point(0).iter().all(|&v| v == 0.0));
        assert!(ps.coords().iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn scrambled_is_seeded() {
        let a = sobol(64, 3, Some(1)).unwrap();
        let b = sobol(64, 3, Some(1)).unwrap();
        let c = sobol(64, 3, Some(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.coords(), c.coords());
        assert!(a.coords().iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn dimension_limits() {
        assert!(sobol(4, 0, None).is_err());
        assert!(sobol(4, SOBOL_MAX_DIM + 1, None).is_err());
        assert!(sobol(4, SOBOL_MAX_DIM, None).is_ok());
    }
}
