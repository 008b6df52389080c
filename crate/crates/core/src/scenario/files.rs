//! Text formats for gains, traces, profiles, kernels and reports.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::TriangularKernel;
use crate::sim::{SimTrace, Snapshot};
use crate::synthesis::RegulatorGains;

const GAINS_HEADER: &str = "# regulator gains, 17 significant digits";

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn join17(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt17).collect::<Vec<_>>().join(" ")
}

pub fn gains_to_string(g: &RegulatorGains) -> String {
    let n = g.n_w();
    let mut out = String::new();
    let _ = writeln!(out, "{GAINS_HEADER}");
    let _ = writeln!(out, "intervals = {}", g.intervals());
    let _ = writeln!(out, "n_w = {n}");
    let _ = writeln!(out, "mu_c = {}", fmt17(g.mu_c));
    let _ = writeln!(out, "k_1 = {}", fmt17(g.k_1));
    let _ = writeln!(out, "k_v = {}", join17(g.k_v.iter().copied()));
    let _ = writeln!(out, "b_y = {}", join17(g.b_y.iter().copied()));
    let _ = writeln!(out, "s = {}", join17((0..n * n).map(|k| g.s[(k / n, k % n)])));
    let _ = writeln!(out, "k_x = {}", join17(g.k_x.values().iter().copied()));
    let _ = writeln!(out, "r_x = {}", join17(g.r_x.values().iter().copied()));
    out
}

pub fn parse_gains(text: &str) -> Result<RegulatorGains> {
    let mut fields: Vec<(&str, usize, Vec<f64>)> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: Some(k + 1),
            field: None,
            message: "expected `key = values`".into(),
        })?;
        let key = key.trim();
        let values = rest
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| Error::Parse {
                    line: Some(k + 1),
                    field: Some(key.to_string()),
                    message: format!("`{t}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        fields.push((key, k + 1, values));
    }
    let get = |name: &str, len: Option<usize>| -> Result<Vec<f64>> {
        let (_, line, values) = fields.iter().find(|(k, _, _)| *k == name).ok_or_else(|| Error::Parse {
            line: None,
            field: Some(name.to_string()),
            message: "missing".into(),
        })?;
        if let Some(len) = len {
            if values.len() != len {
                return Err(Error::Parse {
                    line: Some(*line),
                    field: Some(name.to_string()),
                    message: format!("expected {len} values, found {}", values.len()),
                });
            }
        }
        Ok(values.clone())
    };
    let count = |name: &str| -> Result<usize> {
        let v = get(name, Some(1))?[0];
        if v >= 0.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(Error::Parse {
                line: None,
                field: Some(name.to_string()),
                message: format!("{v} is not a count"),
            })
        }
    };
    let m = count("intervals")?;
    let n = count("n_w")?;
    Ok(RegulatorGains {
        k_v: DVector::from_vec(get("k_v", Some(n))?),
        k_1: get("k_1", Some(1))?[0],
        k_x: GridFunction::new(get("k_x", Some(m + 1))?)?,
        r_x: GridFunction::new(get("r_x", Some(m + 1))?)?,
        b_y: DVector::from_vec(get("b_y", Some(n))?),
        s: DMatrix::from_row_slice(n, n, &get("s", Some(n * n))?),
        mu_c: get("mu_c", Some(1))?[0],
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_gains(path: &Path, g: &RegulatorGains) -> Result<()> {
    write_text(path, &gains_to_string(g))
}

pub fn read_gains(path: &Path) -> Result<RegulatorGains> {
    parse_gains(&read_text(path)?)
}

/// Header `t,r,y_1..y_N,e_1..e_N,u_1..u_N`, one row per sample.
pub fn trace_csv(trace: &SimTrace) -> String {
    let n = trace.n_agents();
    let mut out = String::from("t,r");
    for prefix in ["y", "e", "u"] {
        for i in 1..=n {
            let _ = write!(out, ",{prefix}_{i}");
        }
    }
    out.push('\n');
    for k in 0..trace.times.len() {
        let _ = write!(out, "{},{}", trace.times[k], trace.reference[k]);
        for row in [&trace.outputs[k], &trace.errors[k], &trace.inputs[k]] {
            for v in row.iter() {
                let _ = write!(out, ",{v}");
            }
        }
        out.push('\n');
    }
    out
}

/// Header `z,x_1..x_N`.
pub fn snapshot_csv(snapshot: &Snapshot) -> String {
    let n = snapshot.profiles.len();
    let mut out = String::from("z");
    for i in 1..=n {
        let _ = write!(out, ",x_{i}");
    }
    out.push('\n');
    let m = snapshot.profiles.first().map_or(0, |p| p.intervals());
    for j in 0..=m {
        let _ = write!(out, "{}", j as f64 / m as f64);
        for p in &snapshot.profiles {
            let _ = write!(out, ",{}", p.values()[j]);
        }
        out.push('\n');
    }
    out
}

/// Header `i,j,z,ζ,value` over the lower triangle `j ≤ i`.
pub fn kernel_csv(k: &TriangularKernel) -> String {
    let m = k.intervals();
    let mut out = String::from("i,j,z,ζ,value\n");
    for i in 0..=m {
        for j in 0..=i {
            let _ = writeln!(out, "{i},{j},{},{},{}", i as f64 / m as f64, j as f64 / m as f64, k.get(i, j));
        }
    }
    out
}

/// Pretty JSON with fields in declaration order and a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
