//! Per-cycle photon transfer, peak counting and detuning-plane paths.

use serde::Serialize;

use crate::dynamics::series::{TimeSeries, N_RIGHT, THETA_FLAPPING, THETA_TORSIONAL, U_LEFT, U_RIGHT};
use crate::error::{Error, Result};
use crate::optics::Detunings;
use crate::params::{Cavity, DeviceParams, PerCavity};
use crate::thermal::{thermo_optic_shift, ThermalState};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShuttleStats {
    /// Mean over cycles of `∫ γ_R n_R dt`.
    pub n_tr: f64,
    pub n_tr_std: f64,
    pub peaks_per_cycle: usize,
    /// Mean cycle period (s).
    pub cycle_period: f64,
    pub cycles: usize,
    #[serde(skip)]
    pub peak_counts: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShuttleOptions {
    /// Minimum peak prominence as a fraction of the cycle's maximum n_R.
    pub prominence: f64,
    /// Oscillation amplitude (rad) below which the beam counts as static.
    pub static_amplitude: f64,
    pub min_cycles: usize,
}

impl Default for ShuttleOptions {
    fn default() -> Self {
        Self {
            prominence: 0.05,
            static_amplitude: 1e-12,
            min_cycles: 3,
        }
    }
}

/// Prominence of every strict local maximum, as `(index, prominence)`.
pub fn peak_prominences(x: &[f64]) -> Vec<(usize, f64)> {
    let n = x.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if x[i] > x[i - 1] {
            // Plateaus count once, at their left edge.
            let mut j = i;
            while j + 1 < n && x[j + 1] == x[i] {
                j += 1;
            }
            if j + 1 < n && x[j + 1] < x[i] {
                let h = x[i];
                let mut left_min = h;
                let mut k = i;
                while k > 0 {
                    k -= 1;
                    if x[k] > h {
                        break;
                    }
                    left_min = left_min.min(x[k]);
                }
                let mut right_min = h;
                let mut k = j;
                while k + 1 < n {
                    k += 1;
                    if x[k] > h {
                        break;
                    }
                    right_min = right_min.min(x[k]);
                }
                out.push((i, h - left_min.max(right_min)));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

fn upward_crossings(t: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..x.len().saturating_sub(1) {
        if x[k] < 0.0 && x[k + 1] >= 0.0 {
            let f = -x[k] / (x[k + 1] - x[k]);
            out.push(t[k] + f * (t[k + 1] - t[k]));
        }
    }
    out
}

fn interp(t: &[f64], y: &[f64], at: f64) -> f64 {
    let k = t.partition_point(|&v| v <= at).clamp(1, t.len() - 1);
    let (t0, t1) = (t[k - 1], t[k]);
    let f = (at - t0) / (t1 - t0);
    y[k - 1] + f * (y[k] - y[k - 1])
}

/// Trapezoid integral of the piecewise-linear `y` over `[a, b]`.
fn integrate(t: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let lo = t.partition_point(|&v| v <= a);
    let hi = t.partition_point(|&v| v < b);
    let mut prev = (a, interp(t, y, a));
    let mut acc = 0.0;
    for k in lo..hi {
        acc += 0.5 * (prev.1 + y[k]) * (t[k] - prev.0);
        prev = (t[k], y[k]);
    }
    let end = interp(t, y, b);
    acc + 0.5 * (prev.1 + end) * (b - prev.0)
}

pub fn count_shuttled_photons(ts: &TimeSeries, p: &DeviceParams, opts: ShuttleOptions) -> Result<ShuttleStats> {
    let t = &ts.t;
    let theta = ts.require(THETA_TORSIONAL)?;
    let n_r = ts.require(N_RIGHT)?;
    if t.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 samples".into()));
    }
    let gamma_r = p.optics.gamma(Cavity::Right);
    let mean = theta.iter().sum::<f64>() / theta.len() as f64;
    let x: Vec<f64> = theta.iter().map(|v| v - mean).collect();
    let amp = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let period_m = p.torsional.period();
    if amp <= opts.static_amplitude {
        let n_mean = n_r.iter().sum::<f64>() / n_r.len() as f64;
        return Ok(ShuttleStats {
            n_tr: gamma_r * n_mean * period_m,
            n_tr_std: 0.0,
            peaks_per_cycle: 0,
            cycle_period: period_m,
            cycles: 0,
            peak_counts: Vec::new(),
        });
    }

    let bounds = upward_crossings(t, &x);
    if bounds.len() < opts.min_cycles + 1 {
        return Err(Error::NoCycles(format!(
            "found {} complete cycles, need {}",
            bounds.len().saturating_sub(1),
            opts.min_cycles
        )));
    }
    let prominences = peak_prominences(n_r);
    let mut transfers = Vec::new();
    let mut counts = Vec::new();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        transfers.push(gamma_r * integrate(t, n_r, a, b));
        let lo = t.partition_point(|&v| v < a);
        let hi = t.partition_point(|&v| v < b);
        let cycle_max = n_r[lo..hi].iter().cloned().fold(0.0, f64::max);
        let count = prominences
            .iter()
            .filter(|(i, pr)| *i >= lo && *i < hi && *pr >= opts.prominence * cycle_max && *pr > 0.0)
            .count();
        counts.push(count);
    }
    let m = transfers.len() as f64;
    let n_tr = transfers.iter().sum::<f64>() / m;
    let n_tr_std = (transfers.iter().map(|v| (v - n_tr).powi(2)).sum::<f64>() / m).sqrt();
    // Most common count; ties go to the smaller count.
    let mut hist = [0usize; 3];
    for &c in &counts {
        hist[c.min(2)] += 1;
    }
    let peaks_per_cycle = (0..3).max_by(|&a, &b| hist[a].cmp(&hist[b]).then(b.cmp(&a))).unwrap();
    Ok(ShuttleStats {
        n_tr,
        n_tr_std,
        peaks_per_cycle,
        cycle_period: (bounds[bounds.len() - 1] - bounds[0]) / m,
        cycles: transfers.len(),
        peak_counts: counts,
    })
}

/// `(δ_L, δ_R)` along the trace for a laser at `omega_laser`, with repeated
/// consecutive points collapsed.
pub fn detuning_trajectory(ts: &TimeSeries, p: &DeviceParams, omega_laser: f64) -> Result<Vec<(f64, f64)>> {
    let th = ts.require(THETA_TORSIONAL)?;
    let fl = ts.column(THETA_FLAPPING);
    let ul = ts.column(U_LEFT);
    let ur = ts.column(U_RIGHT);
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(th.len());
    for k in 0..th.len() {
        let angles = [th[k], fl.map_or(0.0, |c| c[k])];
        let mut shifts = PerCavity::new(
            p.mechanical_shift(Cavity::Left, angles),
            p.mechanical_shift(Cavity::Right, angles),
        );
        if let (Some(ul), Some(ur)) = (ul, ur) {
            let s = thermo_optic_shift(ThermalState { u_l: ul[k], u_r: ur[k] }, &p.thermal);
            shifts.left += s.left;
            shifts.right += s.right;
        }
        let d = Detunings::from_shifts(p, shifts, omega_laser).delta;
        if out.last() != Some(&(d.left, d.right)) {
            out.push((d.left, d.right));
        }
    }
    Ok(out)
}

pub fn trajectory_csv(path: &[(f64, f64)]) -> String {
    let mut out = String::from("delta_L,delta_R\n");
    for (l, r) in path {
        out.push_str(&format!("{l:e},{r:e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;
    use crate::dynamics::series::COLUMNS;

    fn series(
        p: &DeviceParams,
        amp: f64,
        cycles: f64,
        per_cycle: usize,
        offset: f64,
        n_fn: impl Fn(f64) -> f64,
    ) -> TimeSeries {
        let w = p.torsional.omega;
        let dt = p.torsional.period() / per_cycle as f64;
        let n = (cycles * per_cycle as f64) as usize;
        let mut ts = TimeSeries::with_columns(&COLUMNS);
        for k in 0..=n {
            let t = k as f64 * dt;
            let th = amp * (w * t + 0.3).cos();
            ts.push(t + offset, &[th, 0.0, 0.0, n_fn(th), 1.0, 0.0, 0.0, 0.0]);
        }
        ts
    }

    #[test]
    fn static_beam_transfer() {
        let p = DeviceParams::paper_device();
        let ts = series(&p, 0.0, 4.0, 100, 0.0, |_| 0.02);
        let s = count_shuttled_photons(&ts, &p, ShuttleOptions::default()).unwrap();
        let want = p.optics.gamma(Cavity::Right) * 0.02 * TWO_PI / p.torsional.omega;
        assert!((s.n_tr / want - 1.0).abs() < 1e-12, "{} {want}", s.n_tr);
        assert_eq!(s.peaks_per_cycle, 0);
    }

    #[test]
    fn one_and_two_peaks() {
        let p = DeviceParams::paper_device();
        // Lorentzian in θ centred at -1: one peak if the swing stops short of
        // it, two if it passes through.
        let lor = |th: f64| 1.0 / (1.0 + ((th + 1.0) / 0.2).powi(2));
        let one = count_shuttled_photons(&series(&p, 0.8, 6.0, 400, 0.0, lor), &p, ShuttleOptions::default()).unwrap();
        assert_eq!(one.peaks_per_cycle, 1);
        let two = count_shuttled_photons(&series(&p, 1.5, 6.0, 400, 0.0, lor), &p, ShuttleOptions::default()).unwrap();
        assert_eq!(two.peaks_per_cycle, 2);
        assert_eq!(two.cycles, 5);
    }

    #[test]
    fn offset_and_resampling_invariance() {
        let p = DeviceParams::paper_device();
        let lor = |th: f64| 1.0 / (1.0 + ((th + 1.0) / 0.3).powi(2));
        let base = count_shuttled_photons(&series(&p, 1.2, 6.0, 400, 0.0, lor), &p, ShuttleOptions::default()).unwrap();
        let shifted =
            count_shuttled_photons(&series(&p, 1.2, 6.0, 400, 3.7e-3, lor), &p, ShuttleOptions::default()).unwrap();
        assert!((shifted.n_tr / base.n_tr - 1.0).abs() < 1e-6);
        let fine = count_shuttled_photons(&series(&p, 1.2, 6.0, 800, 0.0, lor), &p, ShuttleOptions::default()).unwrap();
        assert!((fine.n_tr / base.n_tr - 1.0).abs() < 1e-2);
        assert_eq!(fine.peaks_per_cycle, base.peaks_per_cycle);
    }

    #[test]
    fn too_short_for_cycles() {
        let p = DeviceParams::paper_device();
        let ts = series(&p, 1.0, 1.5, 100, 0.0, |_| 1.0);
        assert!(matches!(
            count_shuttled_photons(&ts, &p, ShuttleOptions::default()),
            Err(Error::NoCycles(_))
        ));
    }

    #[test]
    fn prominence_basics() {
        let x = [0.0, 2.0, 1.0, 3.0, 0.5, 0.6, 0.0];
        let pr = peak_prominences(&x);
        assert_eq!(pr, vec![(1, 1.0), (3, 3.0), (5, 0.09999999999999998)]);
    }

    #[test]
    fn trajectory_shapes() {
        let mut p = DeviceParams::paper_device();
        p.flapping.enabled = false;
        let w = p.alignment().0;
        let flat = series(&p, 0.0, 2.0, 50, 0.0, |_| 0.0);
        assert_eq!(detuning_trajectory(&flat, &p, w).unwrap().len(), 1);
        let swing = series(&p, 1e-3, 1.0, 50, 0.0, |_| 0.0);
        let path = detuning_trajectory(&swing, &p, w).unwrap();
        let (a, b) = (path[0], path[10]);
        let slope = (b.1 - a.1) / (b.0 - a.0);
        let tr = p.optics.tau(Cavity::Right) / p.optics.tau(Cavity::Left);
        assert!((slope + tr).abs() < 1e-6, "{slope}");
    }
}
