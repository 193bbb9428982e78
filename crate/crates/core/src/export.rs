//! Bundle serialization.
//!
//! CSV (canonical): header `path_id,node_index,t,B,I,Z`, one line per
//! (path, node), path-major.
//!
//! Binary: `b"DDSE"`, a version byte, `n_paths` and `n_nodes` as
//! little-endian `u64`, then `t, B, I, Z` as little-endian `f64` for every
//! (path, node) in the same row-major order as the CSV.

use std::io::{BufRead, BufWriter, Read, Write};

use crate::error::{Error, Result};
use crate::paths::PathBundle;

pub const MAGIC: &[u8; 4] = b"DDSE";
pub const VERSION: u8 = 1;
pub const CSV_HEADER: &str = "path_id,node_index,t,B,I,Z";

/// Shortest decimal that round-trips, switching to exponent form outside
/// `[1e-5, 1e16)` so very large or small values stay short.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathRecord {
    pub path_id: u64,
    pub node_index: u64,
    pub t: f64,
    pub b: f64,
    pub i: f64,
    pub z: f64,
}

/// Flattens a bundle into records; `B` is the running sum of increments.
pub fn records(bundle: &PathBundle) -> Vec<PathRecord> {
    let t = bundle.grid.times();
    let mut out = Vec::with_capacity(bundle.n_paths * t.len());
    for p in 0..bundle.n_paths {
        let db = bundle.increments.row(p);
        let mut b = 0.0;
        for (j, &tj) in t.iter().enumerate() {
            if j > 0 {
                b += db[j - 1];
            }
            out.push(PathRecord {
                path_id: p as u64,
                node_index: j as u64,
                t: tj,
                b,
                i: bundle.ito.get(p, j),
                z: bundle.z.get(p, j),
            });
        }
    }
    out
}

pub fn write_csv<W: Write>(bundle: &PathBundle, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{CSV_HEADER}")?;
    for r in records(bundle) {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.path_id,
            r.node_index,
            fmt_f64(r.t),
            fmt_f64(r.b),
            fmt_f64(r.i),
            fmt_f64(r.z)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<PathRecord>> {
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        _ => return Err(Error::Format("missing CSV header".into())),
    }
    let num = |s: &str, line: usize| -> Result<f64> {
        s.parse().map_err(|_| Error::Format(format!("line {line}: bad number {s:?}")))
    };
    let int = |s: &str, line: usize| -> Result<u64> {
        s.parse().map_err(|_| Error::Format(format!("line {line}: bad integer {s:?}")))
    };
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        let n = k + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::Format(format!("line {n}: expected 6 fields, got {}", f.len())));
        }
        out.push(PathRecord {
            path_id: int(f[0], n)?,
            node_index: int(f[1], n)?,
            t: num(f[2], n)?,
            b: num(f[3], n)?,
            i: num(f[4], n)?,
            z: num(f[5], n)?,
        });
    }
    Ok(out)
}

pub fn write_binary<W: Write>(bundle: &PathBundle, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(bundle.n_paths as u64).to_le_bytes())?;
    w.write_all(&(bundle.n_nodes() as u64).to_le_bytes())?;
    for r in records(bundle) {
        for v in [r.t, r.b, r.i, r.z] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<PathRecord>> {
    let mut head = [0u8; 21];
    input.read_exact(&mut head).map_err(|_| Error::Format("truncated header".into()))?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    if head[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", head[4])));
    }
    let n_paths = u64::from_le_bytes(head[5..13].try_into().expect("8 bytes"));
    let n_nodes = u64::from_le_bytes(head[13..21].try_into().expect("8 bytes"));
    let mut out = Vec::new();
    let mut buf = [0u8; 32];
    for p in 0..n_paths {
        for j in 0..n_nodes {
            input.read_exact(&mut buf).map_err(|_| Error::Format(format!("truncated at path {p} node {j}")))?;
            let f = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().expect("8 bytes"));
            out.push(PathRecord { path_id: p, node_index: j, t: f(0), b: f(1), i: f(2), z: f(3) });
        }
    }
    Ok(out)
}
