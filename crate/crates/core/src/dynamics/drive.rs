//! Laser drive definitions.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optics::input_amplitude;
use crate::params::{Cavity, DeviceParams, PerCavity};

/// Laser carrier frequency, relative to the rest frequency of the cavity the
/// laser is coupled into.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Carrier {
    /// `ω_laser − ω_port,0` in rad/s.
    Offset(f64),
    /// Normalized detuning `(ω_laser − ω_port,0)·τ_port`.
    Normalized(f64),
    /// The frequency where both resonances meet under the linear torsional
    /// map.
    Alignment,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Waveform {
    Cw,
    /// Rectangular pulse on `[start, start + width)`.
    Pulse {
        start: f64,
        width: f64,
    },
}

impl Waveform {
    pub fn envelope(&self, t: f64) -> f64 {
        match *self {
            Waveform::Cw => 1.0,
            Waveform::Pulse { start, width } => {
                if t >= start && t < start + width {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Laser {
    pub port: Cavity,
    /// Peak power at the cavity coupling point (W).
    pub power: f64,
    pub carrier: Carrier,
    pub waveform: Waveform,
}

impl Laser {
    pub fn cw(port: Cavity, power: f64, carrier: Carrier) -> Self {
        Self {
            port,
            power,
            carrier,
            waveform: Waveform::Cw,
        }
    }

    pub fn omega(&self, p: &DeviceParams) -> f64 {
        let w0 = p.optics.omega0(self.port);
        match self.carrier {
            Carrier::Offset(d) => w0 + d,
            Carrier::Normalized(d) => w0 + d / p.optics.tau(self.port),
            Carrier::Alignment => p.alignment().0,
        }
    }

    pub fn power_at(&self, t: f64) -> f64 {
        self.power * self.waveform.envelope(t)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    /// Lasers at the same frequency add as fields.
    #[default]
    Coherent,
    /// Every laser is its own field; powers add.
    Incoherent,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DriveConfig {
    pub pump: Option<Laser>,
    pub probe: Option<Laser>,
    pub combine: Combine,
}

impl DriveConfig {
    pub fn pump_only(pump: Laser) -> Self {
        Self {
            pump: Some(pump),
            ..Self::default()
        }
    }

    pub fn lasers(&self) -> impl Iterator<Item = &Laser> {
        self.pump.iter().chain(self.probe.iter())
    }

    pub fn is_cw(&self) -> bool {
        self.lasers().all(|l| l.waveform == Waveform::Cw)
    }

    pub fn validate(&self) -> Result<()> {
        for l in self.lasers() {
            if !(l.power.is_finite() && l.power >= 0.0) {
                return Err(Error::Validation(format!(
                    "laser power must be >= 0, got {:e}",
                    l.power
                )));
            }
            if let Waveform::Pulse { width, start } = l.waveform {
                if !(width > 0.0 && width.is_finite() && start.is_finite()) {
                    return Err(Error::Validation(format!("pulse width must be > 0, got {width:e}")));
                }
            }
        }
        Ok(())
    }
}

/// Lasers grouped into independent optical fields, each in its own rotating
/// frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldGroup {
    pub omega: f64,
    /// Indices into `[pump, probe]`.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ResolvedDrive {
    pub lasers: Vec<(usize, Laser, f64)>,
    pub groups: Vec<FieldGroup>,
    /// Group carrying the probe, if any.
    pub probe_group: Option<usize>,
}

impl ResolvedDrive {
    pub fn new(p: &DeviceParams, drive: &DriveConfig) -> Self {
        let mut lasers = Vec::new();
        if let Some(l) = &drive.pump {
            lasers.push((0, l.clone(), l.omega(p)));
        }
        if let Some(l) = &drive.probe {
            lasers.push((1, l.clone(), l.omega(p)));
        }
        let mut groups: Vec<FieldGroup> = Vec::new();
        for (k, (_, _, w)) in lasers.iter().enumerate() {
            let shared = match drive.combine {
                Combine::Coherent => groups.iter_mut().find(|g| g.omega == *w),
                Combine::Incoherent => None,
            };
            match shared {
                Some(g) => g.members.push(k),
                None => groups.push(FieldGroup {
                    omega: *w,
                    members: vec![k],
                }),
            }
        }
        let probe_group = lasers
            .iter()
            .position(|(role, _, _)| *role == 1)
            .and_then(|k| groups.iter().position(|g| g.members.contains(&k)));
        Self {
            lasers,
            groups,
            probe_group,
        }
    }

    pub fn inputs(&self, group: usize, t: f64) -> PerCavity<Complex64> {
        let mut s = PerCavity::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &k in &self.groups[group].members {
            let (_, l, _) = &self.lasers[k];
            s[l.port] += input_amplitude(l.power_at(t), 0.0);
        }
        s
    }

    pub fn probe(&self) -> Option<&Laser> {
        self.lasers.iter().find(|(r, _, _)| *r == 1).map(|(_, l, _)| l)
    }

    pub fn has_light(&self) -> bool {
        self.lasers.iter().any(|(_, l, _)| l.power > 0.0)
    }
}
