//! Damped-cosine fit `A·exp(−Γt/2)·cos(Ωt + φ) + C`.

use nalgebra::{Matrix3, Matrix5, Vector3, Vector5};
use serde::Serialize;

use crate::constants::TWO_PI;
use crate::dynamics::series::uniform_stride;
use crate::error::{Error, Result};

use super::spectrum::fft_spectrum;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingdownFit {
    pub omega: f64,
    /// Energy decay rate; the amplitude decays at half this.
    pub gamma: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    /// RMS residual.
    pub residual: f64,
    pub iterations: usize,
    pub low_confidence: bool,
}

const MAX_ITER: usize = 200;

// Parameters in scaled time s = (t − t0)/span: [a, b, C, g, w] with
// model e^{−g s/2}(a cos ws + b sin ws) + C.
fn model_and_jacobian(s: f64, p: &Vector5<f64>) -> (f64, Vector5<f64>) {
    let e = (-0.5 * p[3] * s).exp();
    let (sn, cs) = (p[4] * s).sin_cos();
    let osc = p[0] * cs + p[1] * sn;
    let f = e * osc + p[2];
    let j = Vector5::new(
        e * cs,
        e * sn,
        1.0,
        -0.5 * s * e * osc,
        e * s * (-p[0] * sn + p[1] * cs),
    );
    (f, j)
}

fn cost(s: &[f64], x: &[f64], p: &Vector5<f64>) -> f64 {
    s.iter()
        .zip(x)
        .map(|(&si, &xi)| {
            let r = xi - model_and_jacobian(si, p).0;
            r * r
        })
        .sum()
}

/// Linear least squares for (a, b, C) at fixed decay and frequency.
fn linear_init(s: &[f64], x: &[f64], g: f64, w: f64) -> Vector3<f64> {
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for (&si, &xi) in s.iter().zip(x) {
        let e = (-0.5 * g * si).exp();
        let (sn, cs) = (w * si).sin_cos();
        let row = Vector3::new(e * cs, e * sn, 1.0);
        ata += row * row.transpose();
        atb += row * xi;
    }
    ata.lu().solve(&atb).unwrap_or_else(Vector3::zeros)
}

/// Log-envelope slope over one-period windows, as an energy decay rate in
/// scaled time.
fn envelope_decay(s: &[f64], x: &[f64], offset: f64, w: f64) -> f64 {
    let period = TWO_PI / w;
    let n = s.len();
    let mut pts = Vec::new();
    let mut start = 0;
    while start < n {
        let t0 = s[start];
        let mut end = start;
        let mut peak: f64 = 0.0;
        while end < n && s[end] < t0 + period {
            peak = peak.max((x[end] - offset).abs());
            end += 1;
        }
        if end >= n {
            break;
        }
        if peak > 0.0 {
            pts.push((0.5 * (t0 + s[end - 1]), peak.ln()));
        }
        start = end;
    }
    if pts.len() < 3 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    -2.0 * sxy / sxx
}

pub fn ringdown_fit(t: &[f64], x: &[f64]) -> Result<RingdownFit> {
    if t.len() != x.len() || t.len() < 16 {
        return Err(Error::InsufficientData(
            "ring-down fit needs >= 16 matched samples".into(),
        ));
    }
    let dt = uniform_stride(t)?;
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let spread = x.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let rms = |r: f64| (r / n as f64).sqrt();
    if spread <= 1e-12 * mean.abs() || spread == 0.0 {
        let res: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        return Ok(RingdownFit {
            omega: 0.0,
            gamma: 0.0,
            amplitude: 0.0,
            phase: 0.0,
            offset: mean,
            residual: rms(res),
            iterations: 0,
            low_confidence: true,
        });
    }

    let span = t[n - 1] - t[0];
    let s: Vec<f64> = t.iter().map(|v| (v - t[0]) / span).collect();
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let f0 = fft_spectrum(&centered, dt)?
        .dominant_peak()
        .ok_or_else(|| Error::InsufficientData("no spectral peak".into()))?;
    let w0 = TWO_PI * f0 * span;
    let g0 = envelope_decay(&s, x, mean, w0).max(0.0);
    let lin = linear_init(&s, x, g0, w0);
    let mut p = Vector5::new(lin[0], lin[1], lin[2], g0, w0);

    let mut c = cost(&s, x, &p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        let mut jtj = Matrix5::zeros();
        let mut jtr = Vector5::zeros();
        for (&si, &xi) in s.iter().zip(x) {
            let (f, j) = model_and_jacobian(si, &p);
            jtj += j * j.transpose();
            jtr += j * (xi - f);
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj;
            for i in 0..5 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let ct = cost(&s, x, &trial);
            if ct.is_finite() && ct <= c {
                let small = step
                    .iter()
                    .zip(p.iter())
                    .all(|(d, v)| d.abs() <= 1e-12 * v.abs().max(1e-12));
                let flat = (c - ct) <= 1e-15 * c.max(f64::MIN_POSITIVE);
                p = trial;
                c = ct;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                converged = small || flat;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || converged {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::FitNonConvergence {
            iterations,
            residual: rms(c),
        });
    }

    let amplitude = p[0].hypot(p[1]);
    // Undo the time scaling and move the phase back to t = 0.
    let omega = p[4] / span;
    let gamma = p[3] / span;
    let phase0 = (-p[1]).atan2(p[0]);
    let amp0 = amplitude * (0.5 * gamma * t[0]).exp();
    Ok(RingdownFit {
        omega,
        gamma,
        amplitude: amp0,
        phase: phase0 - omega * t[0],
        offset: p[2],
        residual: rms(c),
        iterations,
        low_confidence: amplitude <= 1e-9 * spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn synth(omega: f64, gamma: f64, n: usize, dt: f64, noise: f64, t0: f64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dist = Normal::new(0.0, noise.max(1e-300)).unwrap();
        let t: Vec<f64> = (0..n).map(|k| t0 + k as f64 * dt).collect();
        let x = t
            .iter()
            .map(|&ti| {
                1.0 * (-0.5 * gamma * ti).exp() * (omega * ti + 0.4).cos()
                    + 0.2
                    + if noise > 0.0 { dist.sample(&mut rng) } else { 0.0 }
            })
            .collect();
        (t, x)
    }

    #[test]
    fn recovers_parameters_at_snr_100() {
        let omega = TWO_PI * 441e3;
        let gamma = 2.0e4;
        let dt = 1.0 / (441e3 * 40.0);
        let (t, x) = synth(omega, gamma, 20_000, dt, 0.01, 0.0);
        let f = ringdown_fit(&t, &x).unwrap();
        assert!((f.omega / omega - 1.0).abs() < 1e-3, "{}", f.omega / omega);
        assert!((f.gamma / gamma - 1.0).abs() < 1e-3, "{}", f.gamma / gamma);
        assert!(!f.low_confidence);
    }

    #[test]
    fn exact_data_with_time_offset() {
        let omega = TWO_PI * 1e3;
        let gamma = 300.0;
        let (t, x) = synth(omega, gamma, 5000, 1e-5, 0.0, 0.013);
        let f = ringdown_fit(&t, &x).unwrap();
        assert!((f.omega / omega - 1.0).abs() < 1e-9);
        assert!((f.gamma / gamma - 1.0).abs() < 1e-7);
        assert!((f.amplitude - 1.0).abs() < 1e-6, "{}", f.amplitude);
        assert!((f.offset - 0.2).abs() < 1e-9);
    }

    #[test]
    fn constant_trace_is_low_confidence() {
        let t: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let f = ringdown_fit(&t, &[3.0; 100]).unwrap();
        assert!(f.low_confidence);
        assert_eq!(f.amplitude, 0.0);
        assert_eq!(f.offset, 3.0);
    }
}
