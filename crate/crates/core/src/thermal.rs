//! Two-compartment thermo-optic channel and the optional delayed
//! photothermal torque.

use serde::Serialize;

use crate::params::PerCavity;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermalParams {
    /// Relaxation of each region to the substrate (s).
    pub tau_local: f64,
    /// Conduction time between the two regions (s).
    pub tau_cross: f64,
    /// Fraction of intrinsic cavity loss that becomes heat.
    pub eta_abs: f64,
    /// Heat capacity of one region (J/K).
    pub c_heat: f64,
    /// Thermo-optic shift per kelvin (rad/s/K); negative is a red shift.
    pub dw_dt: f64,
}

impl ThermalParams {
    /// Calibrated so the air impulse response changes sign near 1.9 µs and
    /// peaks near 3.2 µs.
    pub fn paper_device() -> Self {
        Self {
            tau_local: 2.5e-6,
            tau_cross: 4.0e-6,
            eta_abs: 1.0,
            c_heat: 5.0e-9,
            dw_dt: -crate::constants::TWO_PI * 10e9,
        }
    }

    /// Time of the interior maximum of `u_R` after an impulse into `u_L`.
    pub fn cross_peak_time(&self) -> f64 {
        let s1 = 1.0 / self.tau_local;
        let s2 = s1 + 2.0 / self.tau_cross;
        (s2 / s1).ln() / (s2 - s1)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ThermalState {
    pub u_l: f64,
    pub u_r: f64,
}

impl ThermalState {
    pub fn norm_sqr(&self) -> f64 {
        self.u_l * self.u_l + self.u_r * self.u_r
    }
}

pub fn thermal_derivatives(s: ThermalState, p_abs_l: f64, p_abs_r: f64, tp: &ThermalParams) -> ThermalState {
    let cross = (s.u_l - s.u_r) / tp.tau_cross;
    ThermalState {
        u_l: p_abs_l / tp.c_heat - s.u_l / tp.tau_local - cross,
        u_r: p_abs_r / tp.c_heat - s.u_r / tp.tau_local + cross,
    }
}

pub fn thermo_optic_shift(s: ThermalState, tp: &ThermalParams) -> PerCavity<f64> {
    PerCavity::new(tp.dw_dt * s.u_l, tp.dw_dt * s.u_r)
}

/// Heat deposited per second by intracavity energy `energy` in a cavity with
/// intrinsic rate `gamma_i`.
pub fn absorbed_power(tp: &ThermalParams, gamma_i: f64, energy: f64) -> f64 {
    tp.eta_abs * gamma_i * energy
}

/// `(u_L, u_R)` at time `t` after depositing `heat` joules into the left
/// region at `t = 0`.
pub fn impulse_closed_form(tp: &ThermalParams, heat: f64, t: f64) -> ThermalState {
    let s1 = 1.0 / tp.tau_local;
    let s2 = s1 + 2.0 / tp.tau_cross;
    let a = heat / (2.0 * tp.c_heat);
    let (e1, e2) = ((-s1 * t).exp(), (-s2 * t).exp());
    ThermalState {
        u_l: a * (e1 + e2),
        u_r: a * (e1 - e2),
    }
}

/// Delayed first-order torque driven by the absorbed-power imbalance, acting
/// on the torsional mode only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhotothermalParams {
    pub enabled: bool,
    /// Steady torque per watt of `P_abs,L − P_abs,R` (N·m/W).
    pub gain: f64,
    /// Response time (s).
    pub delay: f64,
}

impl Default for PhotothermalParams {
    fn default() -> Self {
        Self {
            enabled: false,
            gain: 0.0,
            delay: 2.5e-6,
        }
    }
}

impl PhotothermalParams {
    /// Fitted so that the self-oscillation threshold of the measured device
    /// is 0.135 µW. A fit, not a measurement.
    pub fn fitted() -> Self {
        Self {
            enabled: true,
            gain: 9.74e-11,
            delay: 2.5e-6,
        }
    }

    pub fn derivative(&self, torque: f64, p_abs_l: f64, p_abs_r: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        (self.gain * (p_abs_l - p_abs_r) - torque) / self.delay
    }
}
