//! Windowed one-sided FFT spectra and peak location.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dynamics::series::TimeSeries;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => {
                if n == 1 {
                    return vec![1.0];
                }
                (0..n)
                    .map(|k| {
                        let x = std::f64::consts::PI * k as f64 / n as f64;
                        x.sin().powi(2)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    /// Bin frequencies (Hz).
    pub freq: Vec<f64>,
    /// One-sided amplitude spectrum, scaled so a sinusoid of amplitude A on
    /// a bin reads A.
    pub magnitude: Vec<f64>,
    pub window: Window,
    pub samples: usize,
    pub dt: f64,
    /// `|Σ|x_w|² − Σ|X|²/N| / Σ|x_w|²`.
    pub parseval_error: f64,
    /// `max |X[N−k] − conj X[k]| / max |X|` before one-siding.
    pub symmetry_error: f64,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        1.0 / (self.samples as f64 * self.dt)
    }

    /// Peak frequency from a parabola through the log magnitude of bin `k`
    /// and its neighbours.
    pub fn interpolate(&self, k: usize) -> f64 {
        let m = &self.magnitude;
        if k == 0 || k + 1 >= m.len() {
            return self.freq[k];
        }
        let (a, b, c) = if m[k - 1] > 0.0 && m[k] > 0.0 && m[k + 1] > 0.0 {
            (m[k - 1].ln(), m[k].ln(), m[k + 1].ln())
        } else {
            (m[k - 1], m[k], m[k + 1])
        };
        let den = a - 2.0 * b + c;
        let off = if den != 0.0 { 0.5 * (a - c) / den } else { 0.0 };
        self.freq[k] + off.clamp(-0.5, 0.5) * self.bin_width()
    }

    /// Local maxima at least `min_rel` of the global maximum, strongest
    /// first, as interpolated frequencies.
    pub fn peaks(&self, min_rel: f64, max_count: usize) -> Vec<f64> {
        let m = &self.magnitude;
        let top = m.iter().cloned().fold(0.0, f64::max);
        if top <= 0.0 {
            return Vec::new();
        }
        let mut idx: Vec<usize> = (1..m.len().saturating_sub(1))
            .filter(|&k| m[k] > m[k - 1] && m[k] >= m[k + 1] && m[k] >= min_rel * top)
            .collect();
        idx.sort_by(|&a, &b| m[b].total_cmp(&m[a]));
        idx.into_iter().take(max_count).map(|k| self.interpolate(k)).collect()
    }

    pub fn dominant_peak(&self) -> Option<f64> {
        self.peaks(0.0, 1).into_iter().next()
    }

    /// Strongest local maximum inside `[lo, hi]` Hz.
    pub fn peak_in(&self, lo: f64, hi: f64) -> Option<f64> {
        let m = &self.magnitude;
        (1..m.len().saturating_sub(1))
            .filter(|&k| self.freq[k] >= lo && self.freq[k] <= hi)
            .filter(|&k| m[k] > m[k - 1] && m[k] >= m[k + 1])
            .max_by(|&a, &b| m[a].total_cmp(&m[b]))
            .map(|k| self.interpolate(k))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,magnitude\n");
        for (f, m) in self.freq.iter().zip(&self.magnitude) {
            out.push_str(&format!("{f:e},{m:e}\n"));
        }
        out
    }
}

pub fn fft_spectrum(x: &[f64], dt: f64) -> Result<Spectrum> {
    fft_spectrum_with(x, dt, Window::Hann)
}

pub fn fft_spectrum_with(x: &[f64], dt: f64, window: Window) -> Result<Spectrum> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!("spectrum needs >= 2 samples, got {n}")));
    }
    if !(dt > 0.0) {
        return Err(Error::NonUniformStride { index: 1 });
    }
    let w = window.weights(n);
    let mut buf: Vec<Complex64> = x.iter().zip(&w).map(|(v, w)| Complex64::new(v * w, 0.0)).collect();
    let time_energy: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let freq_energy: f64 = buf.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let parseval_error = if time_energy > 0.0 {
        (time_energy - freq_energy).abs() / time_energy
    } else {
        0.0
    };
    let peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let symmetry_error = if peak > 0.0 {
        (1..n).map(|k| (buf[n - k] - buf[k].conj()).norm()).fold(0.0, f64::max) / peak
    } else {
        0.0
    };
    debug_assert!(parseval_error < 1e-9, "Parseval check failed: {parseval_error}");
    debug_assert!(
        symmetry_error < 1e-9,
        "real-input symmetry check failed: {symmetry_error}"
    );

    let wsum: f64 = w.iter().sum();
    let half = n / 2;
    let mut magnitude = Vec::with_capacity(half + 1);
    let mut freq = Vec::with_capacity(half + 1);
    for (k, z) in buf.iter().enumerate().take(half + 1) {
        let edge = k == 0 || (n.is_multiple_of(2) && k == half);
        let scale = if edge { 1.0 } else { 2.0 };
        magnitude.push(scale * z.norm() / wsum);
        freq.push(k as f64 / (n as f64 * dt));
    }
    Ok(Spectrum {
        freq,
        magnitude,
        window,
        samples: n,
        dt,
        parseval_error,
        symmetry_error,
    })
}

/// Spectrum of one column, after checking the time axis is uniform.
pub fn series_spectrum(ts: &TimeSeries, column: &str) -> Result<Spectrum> {
    let dt = ts.stride()?;
    let x = ts.require(column)?;
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    fft_spectrum(&centered, dt)
}
