//! Rank-1 lattices: the Fibonacci lattice on T² and Korobov lattices on T^d.

use crate::error::{Error, Result};
use crate::eval::torus_eigen_enumeration;
use crate::geometry::{ManifoldSpec, PointSet};
use crate::par;

/// `F_m` with `F_1 = F_2 = 1`. `None` once the value overflows.
pub fn fibonacci(m: usize) -> Option<u64> {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..m {
        let next = a.checked_add(b)?;
        a = b;
        b = next;
    }
    Some(a)
}

/// The index `m ≥ 3` with `F_m = n`, if `n ≥ 2` is a Fibonacci number.
pub fn fibonacci_index(n: usize) -> Option<usize> {
    let n = n as u64;
    (3..94).find(|&m| fibonacci(m) == Some(n)).filter(|_| n >= 2)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lattice_points(n: usize, gen: &[u64]) -> Vec<f64> {
    let nn = n as u64;
    let mut coords = Vec::with_capacity(n * gen.len());
    for j in 0..nn {
        for &g in gen {
            // exact integer residue, so the only rounding is the final division
            coords.push(((j as u128 * g as u128) % nn as u128) as f64 / n as f64);
        }
    }
    coords
}

fn korobov_generator(n: usize, d: usize, a: u64) -> Vec<u64> {
    let nn = n as u64;
    let mut g = Vec::with_capacity(d);
    let mut p = 1 % nn;
    for _ in 0..d {
        g.push(p);
        p = ((p as u128 * a as u128) % nn as u128) as u64;
    }
    g
}

/// The `F_m`-point lattice with generator `(1, F_{m−1})`.
pub fn fibonacci_lattice(m: usize) -> Result<PointSet> {
    let (n, prev) = match (fibonacci(m), m.checked_sub(1).and_then(fibonacci)) {
        (Some(n), Some(prev)) if n >= 2 => (n, prev),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "Fibonacci index {m} gives no lattice with at least 2 points"
            )))
        }
    };
    let n = usize::try_from(n).map_err(|_| Error::InvalidParameter(format!("F_{m} is too large")))?;
    let coords = lattice_points(n, &[1, prev]);
    Ok(PointSet::new(ManifoldSpec::Torus { d: 2 }, coords)?
        .with_meta("method", "fibonacci")
        .with_meta("fib_index", m)
        .with_meta("generator", format!("1;{prev}")))
}

/// Number of the first `n` frequency representatives `k` with `k·g ≡ 0 (mod n)`.
/// For an equal-weight lattice each such `k` contributes exactly 1 to `E_≤n`
/// and every other `k` contributes 0.
fn dual_hits(n: usize, g: &[u64], freqs: &[Vec<i64>]) -> usize {
    let nn = n as i128;
    freqs
        .iter()
        .filter(|k| k.iter().zip(g).map(|(&ki, &gi)| ki as i128 * gi as i128).sum::<i128>().rem_euclid(nn) == 0)
        .count()
}

/// The admissible `a ∈ [2, n−1]` with the fewest dual-lattice frequencies among
/// the first `n` representatives. Ties go to the smallest `a`.
pub fn search_korobov_generator(n: usize, d: usize) -> Result<u64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("no Korobov generator search for N = {n}")));
    }
    let freqs: Vec<Vec<i64>> = torus_eigen_enumeration(d, n)?
        .into_iter()
        .map(|l| l.k().expect("torus label").to_vec())
        .collect();
    let scores = par::map_indexed(n - 2, |i| {
        let a = (i + 2) as u64;
        if gcd(a, n as u64) != 1 {
            return usize::MAX;
        }
        dual_hits(n, &korobov_generator(n, d, a), &freqs)
    });
    let (best, score) = scores
        .iter()
        .enumerate()
        .min_by_key(|&(i, s)| (*s, i))
        .expect("n ≥ 3");
    if *score == usize::MAX {
        return Err(Error::InvalidParameter(format!("no generator coprime to {n}")));
    }
    Ok(best as u64 + 2)
}

/// Korobov lattice `x_j = ({j/n}, {ja/n}, …, {ja^{d−1}/n})`. Without `a`, the
/// generator comes from [`search_korobov_generator`].
pub fn korobov_lattice(n: usize, d: usize, a: Option<u64>) -> Result<PointSet> {
    ManifoldSpec::torus(d)?;
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let (a, searched) = match a {
        Some(a) => (a, false),
        None if n < 3 => (1, true),
        None => (search_korobov_generator(n, d)?, true),
    };
    if gcd(a, n as u64) != 1 {
        return Err(Error::InvalidParameter(format!("gcd({a}, {n}) ≠ 1")));
    }
    let g = korobov_generator(n, d, a);
    let mut ps = PointSet::new(ManifoldSpec::Torus { d }, lattice_points(n, &g))?
        .with_meta("method", "korobov")
        .with_meta("korobov_a", a);
    if searched {
        ps.meta.insert("korobov_search".into(), "min-dual-count".into());
    }
    Ok(ps)
}
