//! Point-set files.
//!
//! Text layout: header lines start with `#` and hold `key=value` pairs
//! (`manifold`, `d`, `alpha`, `r`, `N`, then free metadata in key order). Every
//! other non-blank line is one point: whitespace-separated coordinates and an
//! optional trailing weight. Coordinates are written in Rust's shortest
//! round-trip scientific notation, so a write/read cycle is bit-exact.
//! Headerless three-column files (e.g. published spherical designs) read as
//! sphere points.
//!
//! The JSON layout mirrors the same content as one object.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Meta, ManifoldSpec, PointSet};
use crate::error::{Error, Result};

/// On-disk encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "text" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!("unknown format '{other}'"))),
        }
    }
}

const STRUCTURAL_KEYS: [&str; 5] = ["manifold", "d", "alpha", "r", "N"];

#[derive(Serialize, Deserialize)]
struct PointSetJson {
    manifold: ManifoldSpec,
    meta: Meta,
    points: Vec<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

pub fn write_point_set<W: Write>(mut w: W, ps: &PointSet, format: Format) -> Result<()> {
    w.write_all(write_point_set_string(ps, format)?.as_bytes())?;
    Ok(())
}

pub fn write_point_set_string(ps: &PointSet, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(to_text(ps)),
        Format::Json => {
            let doc = PointSetJson {
                manifold: *ps.manifold(),
                meta: ps.meta.clone(),
                points: ps.points().map(|p| p.to_vec()).collect(),
                weights: ps.weights().map(|w| w.to_vec()),
            };
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn to_text(ps: &PointSet) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let m = ps.manifold();
    let _ = writeln!(s, "# manifold={}", m.name());
    let _ = writeln!(s, "# d={}", m.intrinsic_dim());
    match *m {
        ManifoldSpec::DentedSphere { alpha } => {
            let _ = writeln!(s, "# alpha={alpha}");
        }
        ManifoldSpec::CompactHyperboloid { r } => {
            let _ = writeln!(s, "# r={r}");
        }
        _ => {}
    }
    let _ = writeln!(s, "# N={}", ps.len());
    for (k, v) in &ps.meta {
        if !STRUCTURAL_KEYS.contains(&k.as_str()) {
            let _ = writeln!(s, "# {k}={}", v.replace('\n', " "));
        }
    }
    let weights = ps.weights();
    for (i, p) in ps.points().enumerate() {
        let mut first = true;
        for v in p {
            if !first {
                s.push(' ');
            }
            first = false;
            let _ = write!(s, "{v:e}");
        }
        if let Some(w) = weights {
            let _ = write!(s, " {:e}", w[i]);
        }
        s.push('\n');
    }
    s
}

/// Reads a point set in either layout. `hint` supplies the manifold for
/// headerless files that are not three-column sphere data.
pub fn read_point_set(path: impl AsRef<Path>, hint: Option<ManifoldSpec>) -> Result<PointSet> {
    let mut text = String::new();
    std::fs::File::open(path.as_ref())?.read_to_string(&mut text)?;
    read_point_set_str(&text, hint)
}

pub fn read_point_set_str(text: &str, hint: Option<ManifoldSpec>) -> Result<PointSet> {
    if text.trim_start().starts_with('{') {
        let doc: PointSetJson = serde_json::from_str(text)?;
        let coords = doc.points.iter().flatten().copied().collect();
        let mut ps = PointSet::new(doc.manifold, coords)?;
        if doc.points.iter().any(|p| p.len() != doc.manifold.ambient_dim()) {
            return Err(Error::DimensionMismatch {
                expected: doc.manifold.ambient_dim(),
                got: doc.points.iter().map(Vec::len).find(|&l| l != doc.manifold.ambient_dim()).unwrap_or(0),
            });
        }
        if let Some(w) = doc.weights {
            ps.set_weights(w)?;
        }
        ps.meta = doc.meta;
        return Ok(ps);
    }

    let mut header = Meta::new();
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                header.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("not a number: '{tok}'"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((lineno + 1, row));
    }
    if rows.is_empty() {
        return Err(Error::EmptyPointSet);
    }

    let manifold = match header.get("manifold") {
        Some(name) => manifold_from_header(name, &header)?,
        None => match hint {
            Some(m) => m,
            None if rows[0].1.len() == 3 => ManifoldSpec::Sphere,
            None => {
                return Err(Error::Parse {
                    line: rows[0].0,
                    msg: "no manifold header; cannot infer layout".into(),
                })
            }
        },
    };
    let dim = manifold.ambient_dim();
    let ncols = rows[0].1.len();
    if ncols != dim && ncols != dim + 1 {
        return Err(Error::Parse {
            line: rows[0].0,
            msg: format!("expected {dim} or {} columns for {manifold}, found {ncols}", dim + 1),
        });
    }
    let has_weights = ncols == dim + 1;
    let mut coords = Vec::with_capacity(rows.len() * dim);
    let mut weights = Vec::new();
    for (line, row) in &rows {
        if row.len() != ncols {
            return Err(Error::Parse {
                line: *line,
                msg: format!("expected {ncols} columns, found {}", row.len()),
            });
        }
        coords.extend_from_slice(&row[..dim]);
        if has_weights {
            weights.push(row[dim]);
        }
    }
    if let Some(n) = header.get("N") {
        let n: usize = n.parse().map_err(|_| Error::Parse {
            line: 0,
            msg: format!("bad N '{n}'"),
        })?;
        if n != rows.len() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header says N={n} but file has {} points", rows.len()),
            });
        }
    }
    let mut ps = PointSet::new(manifold, coords)?;
    if has_weights {
        ps.set_weights(weights)?;
    }
    ps.meta = header
        .into_iter()
        .filter(|(k, _)| !STRUCTURAL_KEYS.contains(&k.as_str()))
        .collect();
    Ok(ps)
}

fn header_f64(header: &Meta, key: &str) -> Result<f64> {
    let v = header.get(key).ok_or_else(|| Error::Parse {
        line: 0,
        msg: format!("missing header key '{key}'"),
    })?;
    v.parse().map_err(|_| Error::Parse {
        line: 0,
        msg: format!("bad value for '{key}': '{v}'"),
    })
}

fn manifold_from_header(name: &str, header: &Meta) -> Result<ManifoldSpec> {
    let m = match name {
        "torus" => ManifoldSpec::Torus {
            d: header_f64(header, "d")? as usize,
        },
        "sphere" => ManifoldSpec::Sphere,
        "dented-sphere" => ManifoldSpec::DentedSphere {
            alpha: header_f64(header, "alpha")?,
        },
        "hyperboloid" => ManifoldSpec::CompactHyperboloid {
            r: header_f64(header, "r")?,
        },
        other => {
            return Err(Error::Parse {
                line: 0,
                msg: format!("unknown manifold '{other}'"),
            })
        }
    };
    m.validate()?;
    Ok(m)
}
