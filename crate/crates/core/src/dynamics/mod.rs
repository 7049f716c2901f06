//! Time-domain integration and the solvers built on it.

pub mod backaction;
pub mod cycle;
pub mod drive;
pub mod integrate;
pub mod model;
pub mod series;
pub mod sim;

pub use backaction::{backaction_rates, dressed_cavity, Backaction};
pub use cycle::{find_limit_cycle, find_threshold, CycleOptions, LimitCycle, Threshold};
pub use drive::{Carrier, Combine, DriveConfig, Laser, Waveform};
pub use model::{Model, Snapshot};
pub use series::TimeSeries;
pub use sim::{simulate, simulate_full, simulate_quasistatic, InitialState, Method, SimConfig};

use crate::error::{Error, Result};
use crate::mechanics::Environment;
use crate::params::{Cavity, DeviceParams, MechKind};
use crate::thermal::ThermalState;

/// Pump pulse into the left cavity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub start: f64,
    pub width: f64,
    pub peak_power: f64,
    pub carrier: Carrier,
}

/// Pulse into the left cavity, readout by `probe` (normally on the right
/// cavity).
pub fn impulse_response(
    p: &DeviceParams,
    pulse: PulseSpec,
    probe: Option<Laser>,
    env: Environment,
    sim: &SimConfig,
) -> Result<TimeSeries> {
    let period = p.enabled_modes().map(|m| m.period()).fold(f64::INFINITY, f64::min);
    if pulse.width >= 0.1 * period {
        return Err(Error::Validation(format!(
            "pulse width {:e} s is not short against the mechanical period {:e} s",
            pulse.width, period
        )));
    }
    let drive = DriveConfig {
        pump: Some(Laser {
            port: Cavity::Left,
            power: pulse.peak_power,
            carrier: pulse.carrier,
            waveform: Waveform::Pulse {
                start: pulse.start,
                width: pulse.width,
            },
        }),
        probe,
        combine: Combine::Coherent,
    };
    let sim = SimConfig {
        environment: env,
        ..sim.clone()
    };
    simulate(p, &drive, &sim)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equilibrium {
    pub angles: [f64; 2],
    pub u: ThermalState,
    pub photothermal_torque: f64,
    pub snapshot: Snapshot,
}

impl Equilibrium {
    pub fn initial_state(&self) -> InitialState {
        InitialState {
            theta: self.angles,
            theta_dot: [0.0; 2],
            u: self.u,
            photothermal_torque: self.photothermal_torque,
        }
    }
}

/// Static balance of optical, photothermal and spring torques under a CW
/// drive, by fixed-point iteration.
pub fn static_equilibrium(p: &DeviceParams, drive: &DriveConfig, thermal: bool) -> Result<Equilibrium> {
    let model = Model::new(p, drive, thermal, false);
    let tp = &p.thermal;
    let mut angles = [0.0; 2];
    let mut u = ThermalState::default();
    let mut change = f64::INFINITY;
    for _ in 0..1000 {
        let snap = model.quasistatic_snapshot(0.0, angles, [0.0; 2], u)?;
        if thermal {
            // Steady two-compartment temperatures.
            let a = 1.0 / tp.tau_local + 1.0 / tp.tau_cross;
            let b = 1.0 / tp.tau_cross;
            let (pl, pr) = (snap.p_abs.left / tp.c_heat, snap.p_abs.right / tp.c_heat);
            let det = a * a - b * b;
            u = ThermalState {
                u_l: (a * pl + b * pr) / det,
                u_r: (a * pr + b * pl) / det,
            };
        }
        let pt = if p.photothermal.enabled {
            p.photothermal.gain * (snap.p_abs.left - snap.p_abs.right)
        } else {
            0.0
        };
        let mut next = [0.0; 2];
        for kind in MechKind::ALL {
            let m = p.mode(kind);
            if !m.enabled {
                continue;
            }
            let extra = if kind == MechKind::Torsional { pt } else { 0.0 };
            next[kind.index()] = (snap.torque[kind.index()] + extra) / (m.inertia * m.omega * m.omega);
        }
        change = (next[0] - angles[0]).abs().max((next[1] - angles[1]).abs());
        angles = next;
        if change <= 1e-14 * angles[0].abs().max(angles[1].abs()).max(1e-12) {
            let snapshot = model.quasistatic_snapshot(0.0, angles, [0.0; 2], u)?;
            return Ok(Equilibrium {
                angles,
                u,
                photothermal_torque: pt,
                snapshot,
            });
        }
    }
    Err(Error::FitNonConvergence {
        iterations: 1000,
        residual: change,
    })
}
