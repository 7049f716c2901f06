//! Resonance trajectory from probe transmission traces taken at several
//! fixed probe detunings.
//!
//! For each time sample the instantaneous line center `c` (normalized, in
//! units of the cavity's own `1/τ`) is the value minimizing
//! `Σ_k (T(δ_b,k − c) − T_k)²` with the single-cavity all-pass line shape.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optics::waveguide_transmission;
use crate::params::{Cavity, DeviceParams};

pub const MIN_DETUNINGS: usize = 5;

/// `(δ_b, transmission samples)` for one probe detuning.
pub type Trace = (f64, Vec<f64>);

/// Transmission at probe detuning `delta_b` when the resonance sits at
/// normalized offset `center`.
pub fn forward_model(p: &DeviceParams, c: Cavity, delta_b: f64, center: f64) -> f64 {
    waveguide_transmission(p, c, delta_b - center)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reconstruction {
    pub cavity: Cavity,
    pub t: Vec<f64>,
    /// Normalized line-center offset from the rest resonance.
    pub center: Vec<f64>,
    /// Absolute resonance angular frequency (rad/s).
    pub omega: Vec<f64>,
    /// False where the transmission minimum sits at the edge of the sampled
    /// detunings.
    pub covered: Vec<bool>,
    /// `1 − √(SSE / Σ(T − mean T)²)`, zero where uncovered.
    pub confidence: Vec<f64>,
}

impl Reconstruction {
    pub fn coverage(&self) -> f64 {
        self.covered.iter().filter(|&&c| c).count() as f64 / self.covered.len().max(1) as f64
    }

    /// Pairs `(θ, ω_c − ω_c0)` for covered samples.
    pub fn shift_vs_angle(&self, p: &DeviceParams, theta: &[f64]) -> Vec<(f64, f64)> {
        let tau = p.optics.tau(self.cavity);
        self.center
            .iter()
            .zip(theta)
            .zip(&self.covered)
            .filter(|(_, &ok)| ok)
            .map(|((c, th), _)| (*th, c / tau))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,center,omega,covered,confidence\n");
        for i in 0..self.t.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e},{},{:e}\n",
                self.t[i], self.center[i], self.omega[i], self.covered[i] as u8, self.confidence[i]
            ));
        }
        out
    }
}

fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > 1e-11 * (1.0 + a.abs().max(b.abs())) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// `traces` share the time axis `t`.
pub fn strobo_reconstruct(p: &DeviceParams, cavity: Cavity, t: &[f64], traces: &[Trace]) -> Result<Reconstruction> {
    if traces.len() < MIN_DETUNINGS {
        return Err(Error::InsufficientData(format!(
            "need at least {MIN_DETUNINGS} probe detunings, got {}",
            traces.len()
        )));
    }
    if traces.iter().any(|(_, x)| x.len() != t.len()) {
        return Err(Error::InsufficientData("traces do not share the time axis".into()));
    }
    let mut order: Vec<usize> = (0..traces.len()).collect();
    order.sort_by(|&a, &b| traces[a].0.total_cmp(&traces[b].0));
    let deltas: Vec<f64> = order.iter().map(|&k| traces[k].0).collect();
    if deltas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Grid("duplicate probe detunings".into()));
    }
    let k_last = deltas.len() - 1;
    let tau = p.optics.tau(cavity);
    let omega0 = p.optics.omega0(cavity);

    let mut out = Reconstruction {
        cavity,
        t: t.to_vec(),
        center: Vec::with_capacity(t.len()),
        omega: Vec::with_capacity(t.len()),
        covered: Vec::with_capacity(t.len()),
        confidence: Vec::with_capacity(t.len()),
    };
    let mut samples = vec![0.0; deltas.len()];
    for i in 0..t.len() {
        for (j, &k) in order.iter().enumerate() {
            samples[j] = traces[k].1[i];
        }
        let kmin = samples
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap();
        let lo = deltas[kmin.saturating_sub(1)];
        let hi = deltas[(kmin + 1).min(k_last)];
        let sse = |c: f64| {
            deltas
                .iter()
                .zip(&samples)
                .map(|(&d, &s)| (forward_model(p, cavity, d, c) - s).powi(2))
                .sum::<f64>()
        };
        let c = golden_min(lo, hi, sse);
        let covered = kmin > 0 && kmin < k_last;
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var: f64 = samples.iter().map(|s| (s - mean).powi(2)).sum();
        let conf = if covered && var > 0.0 {
            (1.0 - (sse(c) / var).sqrt()).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.center.push(c);
        out.omega.push(omega0 + c / tau);
        out.covered.push(covered);
        out.confidence.push(conf);
    }
    Ok(out)
}

/// Whether `ω_L − ω_R` changes sign over samples covered in both.
pub fn trajectories_cross(left: &Reconstruction, right: &Reconstruction) -> bool {
    let diffs: Vec<f64> = left
        .omega
        .iter()
        .zip(&right.omega)
        .zip(left.covered.iter().zip(&right.covered))
        .filter(|(_, (a, b))| **a && **b)
        .map(|((l, r), _)| l - r)
        .collect();
    diffs.iter().any(|&d| d > 0.0) && diffs.iter().any(|&d| d < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;

    fn synthetic(p: &DeviceParams, amp: f64, offset: f64) -> (Vec<f64>, Vec<f64>, Vec<Trace>) {
        let t: Vec<f64> = (0..500).map(|k| k as f64 * 1e-8).collect();
        let truth: Vec<f64> = t.iter().map(|&ti| offset + amp * (TWO_PI * 441e3 * ti).sin()).collect();
        let traces = (-16..=16)
            .map(|k| {
                let d = k as f64 * 0.5;
                (
                    d,
                    truth.iter().map(|&c| forward_model(p, Cavity::Right, d, c)).collect(),
                )
            })
            .collect();
        (t, truth, traces)
    }

    #[test]
    fn round_trip_recovers_trajectory() {
        let p = DeviceParams::paper_device();
        let amp = 3.0;
        let (t, truth, traces) = synthetic(&p, amp, 0.4);
        let r = strobo_reconstruct(&p, Cavity::Right, &t, &traces).unwrap();
        let rms = (r.center.iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / t.len() as f64).sqrt();
        assert!(rms < 1e-6 * amp, "{rms}");
        assert_eq!(r.coverage(), 1.0);
    }

    #[test]
    fn static_beam_gives_rest_frequency() {
        let p = DeviceParams::paper_device();
        let (t, _, traces) = synthetic(&p, 0.0, 0.0);
        let r = strobo_reconstruct(&p, Cavity::Right, &t, &traces).unwrap();
        for w in &r.omega {
            assert!((w - p.optics.omega_right).abs() < 1e-9 * p.optics.gamma(Cavity::Right));
        }
    }

    #[test]
    fn resonance_outside_band_is_masked() {
        let p = DeviceParams::paper_device();
        let (t, _, traces) = synthetic(&p, 12.0, 0.0);
        let r = strobo_reconstruct(&p, Cavity::Right, &t, &traces).unwrap();
        assert!(r.coverage() < 1.0 && r.coverage() > 0.0);
    }

    #[test]
    fn too_few_detunings() {
        let p = DeviceParams::paper_device();
        let (t, _, traces) = synthetic(&p, 1.0, 0.0);
        assert!(strobo_reconstruct(&p, Cavity::Right, &t, &traces[..4]).is_err());
    }
}
