//! Self-oscillation by per-cycle energy balance, and the pump threshold.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::mechanics::Environment;
use crate::params::{DeviceParams, MechKind};
use crate::thermal::ThermalState;

use super::drive::DriveConfig;
use super::model::Model;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCycle {
    /// Amplitude θ₀ of `θ = θ_c + θ₀ cos Ωt` (rad).
    pub amplitude: f64,
    /// Static offset θ_c balancing the mean optical torque (rad).
    pub center: f64,
    pub omega: f64,
    /// Optical work per cycle (J).
    pub work: f64,
    /// Mechanical dissipation per cycle `π I Γ Ω θ₀²` (J).
    pub dissipation: f64,
    pub converged: bool,
}

impl LimitCycle {
    pub fn relative_residual(&self) -> f64 {
        if self.dissipation > 0.0 {
            (self.work - self.dissipation).abs() / self.dissipation
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleOptions {
    /// Phase samples per cycle.
    pub samples: usize,
    /// Amplitude grid points used to bracket roots.
    pub grid: usize,
    pub min_amplitude: f64,
    pub environment: Environment,
    /// Target `|W − W_diss| / W_diss` for the refined root.
    pub tolerance: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            samples: 4096,
            grid: 120,
            min_amplitude: 1e-7,
            environment: Environment::Vacuum,
            tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Eval {
    work: f64,
    dissipation: f64,
    center: f64,
}

impl Eval {
    fn residual(&self) -> f64 {
        self.work - self.dissipation
    }
}

pub struct CycleSolver<'a> {
    p: &'a DeviceParams,
    model: Model<'a>,
    kind: MechKind,
    opts: CycleOptions,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl<'a> CycleSolver<'a> {
    pub fn new(p: &'a DeviceParams, drive: &DriveConfig, kind: MechKind, opts: CycleOptions) -> Result<Self> {
        if !drive.is_cw() {
            return Err(Error::Validation("limit-cycle search needs a CW drive".into()));
        }
        drive.validate()?;
        if !p.mode(kind).enabled {
            return Err(Error::Validation(format!("{} mode is disabled", kind.name())));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            p,
            model: Model::new(p, drive, false, true),
            kind,
            opts,
            fft: planner.plan_fft_forward(opts.samples),
            ifft: planner.plan_fft_inverse(opts.samples),
        })
    }

    fn mode_omega(&self) -> f64 {
        self.p.mode(self.kind).omega
    }

    fn dissipation(&self, theta0: f64) -> f64 {
        let m = self.p.mode(self.kind);
        std::f64::consts::PI * m.inertia * m.gamma_m(self.opts.environment) * m.omega * theta0 * theta0
    }

    /// Optical work per cycle and mean torque for the trial orbit.
    pub fn work(&self, theta0: f64, center: f64) -> Result<(f64, f64)> {
        let n = self.opts.samples;
        let omega = self.mode_omega();
        let idx = self.kind.index();
        let mut torque = vec![0.0; n];
        let mut rate = vec![0.0; n];
        let mut dp = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            let phi = TWO_PI * k as f64 / n as f64;
            let mut angles = [0.0; 2];
            let mut rates = [0.0; 2];
            angles[idx] = center + theta0 * phi.cos();
            rates[idx] = -theta0 * omega * phi.sin();
            let snap = self
                .model
                .quasistatic_snapshot(0.0, angles, rates, ThermalState::default())?;
            torque[k] = snap.torque[idx];
            rate[k] = rates[idx];
            dp[k] = Complex64::new(snap.p_abs.left - snap.p_abs.right, 0.0);
        }
        let pt = &self.p.photothermal;
        if pt.enabled && self.kind == MechKind::Torsional {
            // Periodic solution of τ̇ = (gain·ΔP − τ)/delay, harmonic by harmonic.
            self.fft.process(&mut dp);
            for (k, x) in dp.iter_mut().enumerate() {
                let h = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                *x *= pt.gain / Complex64::new(1.0, h * omega * pt.delay);
            }
            self.ifft.process(&mut dp);
            for k in 0..n {
                torque[k] += dp[k].re / n as f64;
            }
        }
        let dt = TWO_PI / omega / n as f64;
        let work = torque.iter().zip(&rate).map(|(t, r)| t * r).sum::<f64>() * dt;
        let mean = torque.iter().sum::<f64>() / n as f64;
        Ok((work, mean))
    }

    fn evaluate(&self, theta0: f64) -> Result<Eval> {
        let m = self.p.mode(self.kind);
        let stiffness = m.inertia * m.omega * m.omega;
        let g = |c: f64| -> Result<(f64, f64)> {
            let (w, mean) = self.work(theta0, c)?;
            Ok((c - mean / stiffness, w))
        };
        let mut c0 = 0.0;
        let (mut g0, mut w0) = g(c0)?;
        let mut c1 = c0 - g0;
        let tol = 1e-10 * theta0.max(1e-9);
        for _ in 0..30 {
            if (c1 - c0).abs() <= tol {
                break;
            }
            let (g1, w1) = g(c1)?;
            let next = if g1 != g0 {
                c1 - g1 * (c1 - c0) / (g1 - g0)
            } else {
                c1 - g1
            };
            c0 = c1;
            g0 = g1;
            w0 = w1;
            c1 = next;
        }
        let (_, w) = if c1 == c0 { (g0, w0) } else { g(c1)? };
        Ok(Eval {
            work: w,
            dissipation: self.dissipation(theta0),
            center: c1,
        })
    }

    fn amplitude_grid(&self) -> Vec<f64> {
        let hi = 0.999 * self.p.map.range;
        let lo = self.opts.min_amplitude.min(hi / 10.0);
        let n = self.opts.grid.max(2);
        (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
    }

    fn scan(&self) -> Result<Vec<(f64, Eval)>> {
        self.amplitude_grid()
            .into_iter()
            .map(|a| self.evaluate(a).map(|e| (a, e)))
            .collect()
    }

    /// Largest-amplitude stable balance point (work crossing dissipation from
    /// above).
    pub fn solve(&self) -> Result<LimitCycle> {
        let grid = self.scan()?;
        let last = grid.last().unwrap();
        if last.1.residual() > 0.0 {
            return Err(Error::MapRangeExceeded {
                range: self.p.map.range,
            });
        }
        let bracket = grid
            .windows(2)
            .rev()
            .find(|w| w[0].1.residual() > 0.0 && w[1].1.residual() <= 0.0);
        let Some(w) = bracket else {
            return Ok(LimitCycle {
                amplitude: 0.0,
                center: grid[0].1.center,
                omega: self.mode_omega(),
                work: 0.0,
                dissipation: 0.0,
                converged: false,
            });
        };
        let (mut lo, mut hi) = (w[0].0, w[1].0);
        let mut best = w[1].1;
        let mut best_a = hi;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let e = self.evaluate(mid)?;
            if e.residual().abs() < best.residual().abs() {
                best = e;
                best_a = mid;
            }
            if e.residual().abs() < self.opts.tolerance * e.dissipation || hi - lo < 1e-15 * hi {
                break;
            }
            if e.residual() > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cycle = LimitCycle {
            amplitude: best_a,
            center: best.center,
            omega: self.mode_omega(),
            work: best.work,
            dissipation: best.dissipation,
            converged: false,
        };
        let converged = cycle.relative_residual() < 1e-3;
        Ok(LimitCycle { converged, ..cycle })
    }

    /// Whether a self-sustained orbit exists: some amplitude gains more than
    /// it loses.
    fn exists(&self) -> Result<bool> {
        for a in self.amplitude_grid() {
            if self.evaluate(a)?.residual() > 0.0 {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `max_θ₀ W/W_diss` at the configured power, with `θ_c = 0`, and its
    /// argument.
    fn best_gain(&self) -> Result<(f64, f64)> {
        let mut best = (0.0, 0.0);
        for a in self.amplitude_grid() {
            let (w, _) = self.work(a, 0.0)?;
            let r = w / self.dissipation(a);
            if r > best.0 {
                best = (r, a);
            }
        }
        Ok(best)
    }
}

pub fn find_limit_cycle(
    p: &DeviceParams,
    drive: &DriveConfig,
    kind: MechKind,
    opts: CycleOptions,
) -> Result<LimitCycle> {
    CycleSolver::new(p, drive, kind, opts)?.solve()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub power: f64,
    /// Amplitude at which the gain first matches the loss.
    pub marginal_amplitude: f64,
    /// `min_θ₀ W_diss/(W/P)` from a single evaluation at the upper bracket.
    pub direct_estimate: f64,
    pub bracket: (f64, f64),
}

fn with_pump_power(drive: &DriveConfig, power: f64) -> Result<DriveConfig> {
    let mut d = drive.clone();
    d.pump
        .as_mut()
        .ok_or_else(|| Error::Validation("threshold search needs a pump laser".into()))?
        .power = power;
    Ok(d)
}

/// Lowest pump power with a self-sustained orbit, by bisection in log power.
pub fn find_threshold(
    p: &DeviceParams,
    drive_template: &DriveConfig,
    kind: MechKind,
    bracket: (f64, f64),
    opts: CycleOptions,
) -> Result<Threshold> {
    let (lo0, hi0) = bracket;
    if !(lo0 > 0.0 && hi0 > lo0) {
        return Err(Error::Validation(format!("bad power bracket [{lo0:e}, {hi0:e}]")));
    }
    let exists = |power: f64| -> Result<bool> {
        let d = with_pump_power(drive_template, power)?;
        CycleSolver::new(p, &d, kind, opts)?.exists()
    };
    if !exists(hi0)? || exists(lo0)? {
        return Err(Error::NoThreshold { lo: lo0, hi: hi0 });
    }
    let (mut lo, mut hi) = (lo0.ln(), hi0.ln());
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if exists(mid.exp())? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let power = hi.exp();
    let at = with_pump_power(drive_template, power)?;
    let (_, marginal) = CycleSolver::new(p, &at, kind, opts)?.best_gain()?;
    let top = with_pump_power(drive_template, hi0)?;
    let (gain, _) = CycleSolver::new(p, &top, kind, opts)?.best_gain()?;
    Ok(Threshold {
        power,
        marginal_amplitude: marginal,
        direct_estimate: hi0 / gain,
        bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::drive::{Carrier, Laser};
    use crate::params::Cavity;

    fn pump(power: f64) -> DriveConfig {
        DriveConfig::pump_only(Laser::cw(Cavity::Left, power, Carrier::Alignment))
    }

    fn fast() -> CycleOptions {
        CycleOptions {
            samples: 1024,
            grid: 60,
            ..CycleOptions::default()
        }
    }

    #[test]
    fn no_light_no_cycle() {
        let p = DeviceParams::paper_device_photothermal_fit();
        let c = find_limit_cycle(&p, &pump(0.0), MechKind::Torsional, fast()).unwrap();
        assert!(!c.converged);
        assert_eq!(c.amplitude, 0.0);
    }

    #[test]
    fn balance_residual_when_converged() {
        let p = DeviceParams::paper_device_photothermal_fit();
        let c = find_limit_cycle(&p, &pump(3.4e-6), MechKind::Torsional, CycleOptions::default()).unwrap();
        assert!(c.converged);
        assert!(c.relative_residual() < 1e-3);
    }

    #[test]
    fn work_vanishes_without_retardation_or_photothermal() {
        // A conservative instantaneous force does no net work per cycle.
        let p = DeviceParams::paper_device();
        let drive = pump(1e-3);
        let mut s = CycleSolver::new(&p, &drive, MechKind::Torsional, fast()).unwrap();
        s.model.retardation = false;
        let (w, _) = s.work(1e-3, 0.0).unwrap();
        let (w_ret, _) = CycleSolver::new(&p, &drive, MechKind::Torsional, fast())
            .unwrap()
            .work(1e-3, 0.0)
            .unwrap();
        assert!(w.abs() < 1e-6 * w_ret.abs(), "{w} vs {w_ret}");
    }
}
