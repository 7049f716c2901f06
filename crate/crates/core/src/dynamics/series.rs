//! Uniformly sampled simulation output and its CSV form.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const THETA_TORSIONAL: &str = "theta_torsional";
pub const THETA_FLAPPING: &str = "theta_flapping";
pub const N_LEFT: &str = "n_left";
pub const N_RIGHT: &str = "n_right";
pub const PROBE_TRANSMISSION: &str = "probe_transmission";
pub const P_OUT_RIGHT: &str = "p_out_right";
pub const U_LEFT: &str = "u_left";
pub const U_RIGHT: &str = "u_right";

pub const COLUMNS: [&str; 8] = [
    THETA_TORSIONAL,
    THETA_FLAPPING,
    N_LEFT,
    N_RIGHT,
    PROBE_TRANSMISSION,
    P_OUT_RIGHT,
    U_LEFT,
    U_RIGHT,
];

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Samples where |θ| exceeded the dispersive map range.
    pub range_violations: usize,
    pub first_violation_time: Option<f64>,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    pub diagnostics: Diagnostics,
}

impl TimeSeries {
    pub fn with_columns(names: &[&str]) -> Self {
        Self {
            t: Vec::new(),
            columns: names.iter().map(|n| (n.to_string(), Vec::new())).collect(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn push(&mut self, t: f64, row: &[f64]) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.t.push(t);
        for ((_, col), &v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_slice())
    }

    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .ok_or_else(|| Error::InsufficientData(format!("time series has no column '{name}'")))
    }

    /// Sample spacing, checked to be uniform.
    pub fn stride(&self) -> Result<f64> {
        uniform_stride(&self.t)
    }

    pub fn duration(&self) -> f64 {
        match (self.t.first(), self.t.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Copy restricted to samples with `t >= t0`.
    pub fn after(&self, t0: f64) -> TimeSeries {
        let k = self.t.partition_point(|&t| t < t0);
        TimeSeries {
            t: self.t[k..].to_vec(),
            columns: self.columns.iter().map(|(n, c)| (n.clone(), c[k..].to_vec())).collect(),
            diagnostics: self.diagnostics.clone(),
        }
    }

    /// Header row plus data rows. Values use the shortest representation that
    /// parses back to the same f64.
    pub fn csv_body(&self) -> String {
        let mut out = String::from("t");
        for (n, _) in &self.columns {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for k in 0..self.t.len() {
            out.push_str(&format!("{:e}", self.t[k]));
            for (_, c) in &self.columns {
                out.push_str(&format!(",{:e}", c[k]));
            }
            out.push('\n');
        }
        out
    }

    /// Full artifact: `#` metadata, the body hash, `#%` config echo lines,
    /// then the body.
    pub fn to_csv(&self, meta: &[(String, String)], config_echo: &str) -> String {
        let body = self.csv_body();
        let mut out = String::from("# seesaw time series\n");
        for (k, v) in meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&format!("# content-sha256: {}\n", content_hash(&body)));
        for line in config_echo.lines() {
            out.push_str("#% ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&body);
        out
    }

    /// Parses the body of a CSV written by [`TimeSeries::to_csv`].
    pub fn from_csv(text: &str) -> Result<TimeSeries> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::InsufficientData("empty csv".into()))?;
        let names: Vec<&str> = header.split(',').skip(1).collect();
        let mut ts = TimeSeries::with_columns(&names);
        for (i, line) in lines.enumerate() {
            let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse).collect();
            let vals = vals.map_err(|e| Error::InsufficientData(format!("row {}: {e}", i + 1)))?;
            if vals.len() != names.len() + 1 {
                return Err(Error::InsufficientData(format!(
                    "row {} has {} fields",
                    i + 1,
                    vals.len()
                )));
            }
            ts.push(vals[0], &vals[1..]);
        }
        Ok(ts)
    }
}

pub fn uniform_stride(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 samples".into()));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::NonUniformStride { index: 1 });
    }
    for (k, w) in t.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(Error::NonUniformStride { index: k + 1 });
        }
    }
    Ok(dt)
}

/// SHA-256 over a git-blob style preimage: `blob <len>\0<content>`.
pub fn content_hash(body: &str) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut ts = TimeSeries::with_columns(&["a", "b"]);
        for k in 0..10 {
            let t = k as f64 * 1.1e-9;
            ts.push(t, &[(t * 1e7).sin(), 1.0 / (k as f64 + 3.0)]);
        }
        let csv = ts.to_csv(&[("seed".into(), "1".into())], "x = 1\ny = 2");
        assert!(csv.contains("#% x = 1\n"));
        let back = TimeSeries::from_csv(&csv).unwrap();
        assert_eq!(back.t, ts.t);
        assert_eq!(back.columns, ts.columns);
        let line = csv.lines().find(|l| l.starts_with("# content-sha256")).unwrap();
        assert!(line.ends_with(&content_hash(&ts.csv_body())));
    }

    #[test]
    fn hash_of_empty_blob() {
        // sha256 of "blob 0\0"
        assert_eq!(
            content_hash(""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }

    #[test]
    fn stride_checks() {
        assert!(uniform_stride(&[0.0, 1.0, 2.0]).is_ok());
        assert!(matches!(
            uniform_stride(&[0.0, 1.0, 2.5, 3.0]),
            Err(Error::NonUniformStride { .. })
        ));
    }
}
