//! Flat `key = value` configuration.
//!
//! Lines are `dotted.key = value`; `#` starts a comment. Every angular
//! frequency or rate key also accepts a `_hz` twin, which is multiplied by 2π
//! on load. Cavity frequencies additionally accept `optics.wavelength_left`
//! and `optics.wavelength_right` in metres. Keys not set in a file keep the
//! value of the base preset (`preset = ...`, default `paper_device`).
//! Unknown keys are errors.
//!
//! [`Config::to_text`] writes the canonical form: every key, rad/s units,
//! shortest round-trip float formatting, so parsing it back reproduces every
//! value bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::constants::TWO_PI;
use crate::dynamics::drive::{Carrier, Combine, DriveConfig, Laser, Waveform};
use crate::dynamics::sim::{Method, SimConfig};
use crate::error::{Error, Result};
use crate::mechanics::Environment;
use crate::params::{inertia_from_spring, omega_from_wavelength, validate_params, Cavity, DeviceParams, MechKind};

pub const PRESETS: [&str; 3] = ["paper_device", "paper_device_photothermal", "reduced_stiffness"];

pub fn preset(name: &str) -> Result<DeviceParams> {
    match name {
        "paper_device" => Ok(DeviceParams::paper_device()),
        "paper_device_photothermal" => Ok(DeviceParams::paper_device_photothermal_fit()),
        "reduced_stiffness" => {
            let mut p = DeviceParams::paper_device().reduced_stiffness(1e3);
            p.flapping.enabled = false;
            Ok(p)
        }
        _ => Err(Error::Config {
            line: 0,
            msg: format!("unknown preset '{name}' (known: {})", PRESETS.join(", ")),
        }),
    }
}

/// Laser settings kept even while the laser is disabled, so the canonical
/// text round-trips.
#[derive(Clone, Debug, PartialEq)]
pub struct LaserSlot {
    pub enabled: bool,
    pub laser: Laser,
    offset: f64,
    delta: f64,
    pulse_start: f64,
    pulse_width: f64,
}

impl LaserSlot {
    fn new(enabled: bool, laser: Laser) -> Self {
        let mut s = Self {
            enabled,
            laser,
            offset: 0.0,
            delta: 0.0,
            pulse_start: 0.0,
            pulse_width: 10e-9,
        };
        s.absorb();
        s
    }

    fn absorb(&mut self) {
        match self.laser.carrier {
            Carrier::Offset(d) => self.offset = d,
            Carrier::Normalized(d) => self.delta = d,
            Carrier::Alignment => {}
        }
        if let Waveform::Pulse { start, width } = self.laser.waveform {
            self.pulse_start = start;
            self.pulse_width = width;
        }
    }

    fn get(&self) -> Option<Laser> {
        self.enabled.then(|| self.laser.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub preset: String,
    pub params: DeviceParams,
    pub pump: LaserSlot,
    pub probe: LaserSlot,
    pub combine: Combine,
    pub sim: SimConfig,
}

fn cfg_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, got '{v}'"))
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("expected true/false, got '{v}'")),
    }
}

fn parse_cavity(v: &str) -> std::result::Result<Cavity, String> {
    match v {
        "left" => Ok(Cavity::Left),
        "right" => Ok(Cavity::Right),
        _ => Err(format!("expected left/right, got '{v}'")),
    }
}

fn key_aliases(key: &str) -> &str {
    match key {
        "q_mech" => "mech.torsional.q",
        _ => key,
    }
}

impl Config {
    pub fn from_preset(name: &str) -> Result<Self> {
        let params = preset(name)?;
        let pump = Laser::cw(Cavity::Left, 0.0, Carrier::Alignment);
        let probe = Laser::cw(Cavity::Right, 0.0, Carrier::Normalized(0.0));
        Ok(Self {
            preset: name.to_string(),
            params,
            pump: LaserSlot::new(false, pump),
            probe: LaserSlot::new(false, probe),
            combine: Combine::Coherent,
            sim: SimConfig::default(),
        })
    }

    pub fn drive(&self) -> DriveConfig {
        DriveConfig {
            pump: self.pump.get(),
            probe: self.probe.get(),
            combine: self.combine,
        }
    }

    pub fn set_pump(&mut self, enabled: bool, laser: Laser) {
        self.pump = LaserSlot::new(enabled, laser);
    }

    pub fn set_probe(&mut self, enabled: bool, laser: Laser) {
        self.probe = LaserSlot::new(enabled, laser);
    }

    /// Parses config text on top of its `preset` (default `paper_device`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        let mut base = "paper_device".to_string();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(line_no, format!("expected 'key = value', got '{line}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "preset" {
                base = v.to_string();
            } else {
                entries.push((line_no, k.to_string(), v.to_string()));
            }
        }
        let mut cfg = Self::from_preset(&base).map_err(|e| match e {
            Error::Config { msg, .. } => cfg_err(0, msg),
            e => e,
        })?;
        for (line, k, v) in entries {
            cfg.set(&k, &v).map_err(|m| cfg_err(line, m))?;
        }
        cfg.finish();
        Ok(cfg)
    }

    /// Reads the `#%` config echo of an artifact written by this crate.
    pub fn from_artifact(text: &str) -> Result<Self> {
        let echo: String = text
            .lines()
            .filter_map(|l| l.strip_prefix("#%"))
            .map(|l| format!("{}\n", l.trim_start()))
            .collect();
        if echo.is_empty() {
            return Err(cfg_err(0, "artifact carries no '#%' config lines"));
        }
        Self::parse(&echo)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if text.lines().any(|l| l.starts_with("#%")) {
            Self::from_artifact(&text)
        } else {
            Self::parse(&text)
        }
    }

    /// Applies `key=value` overrides; each key must already exist.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| cfg_err(0, format!("override '{o}' is not key=value")))?;
            self.set(k.trim(), v.trim())
                .map_err(|m| cfg_err(0, format!("override '{o}': {m}")))?;
        }
        self.finish();
        Ok(())
    }

    /// Validates parameters and drive.
    pub fn validate(&self) -> Result<()> {
        validate_params(&self.params).into_result()?;
        self.drive().validate()
    }

    /// Keeps derived couplings consistent after edits.
    fn finish(&mut self) {
        let p = &mut self.params;
        p.torsional.coupling_left = p.map.linear_coefficient(Cavity::Left);
        p.torsional.coupling_right = p.map.linear_coefficient(Cavity::Right);
        for slot in [&mut self.pump, &mut self.probe] {
            if let Waveform::Pulse { .. } = slot.laser.waveform {
                slot.laser.waveform = Waveform::Pulse {
                    start: slot.pulse_start,
                    width: slot.pulse_width,
                };
            }
        }
    }

    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let key = key_aliases(key);
        let (key, scale) = match key.strip_suffix("_hz") {
            Some(base) if Self::accepts_hz(base) => (base, TWO_PI),
            _ => (key, 1.0),
        };
        let num = || parse_f64(v).map(|x| x * scale);
        let p = &mut self.params;
        match key {
            "optics.omega_left" => p.optics.omega_left = num()?,
            "optics.omega_right" => p.optics.omega_right = num()?,
            "optics.wavelength_left" => p.optics.omega_left = omega_from_wavelength(parse_f64(v)?),
            "optics.wavelength_right" => p.optics.omega_right = omega_from_wavelength(parse_f64(v)?),
            "optics.gamma_i_left" => p.optics.gamma_i_left = num()?,
            "optics.gamma_e_left" => p.optics.gamma_e_left = num()?,
            "optics.gamma_i_right" => p.optics.gamma_i_right = num()?,
            "optics.gamma_e_right" => p.optics.gamma_e_right = num()?,
            "optics.kappa" => p.optics.kappa = num()?,
            "device.g_om" => p.g_om = num()?,
            "device.k_eff" => p.k_eff = num()?,
            "device.lever_arm" => p.lever_arm = num()?,
            "map.range" => p.map.range = num()?,
            "thermal.tau_local" => p.thermal.tau_local = num()?,
            "thermal.tau_cross" => p.thermal.tau_cross = num()?,
            "thermal.eta_abs" => p.thermal.eta_abs = num()?,
            "thermal.c_heat" => p.thermal.c_heat = num()?,
            "thermal.dw_dt" => p.thermal.dw_dt = num()?,
            "photothermal.enabled" => p.photothermal.enabled = parse_bool(v)?,
            "photothermal.gain" => p.photothermal.gain = num()?,
            "photothermal.delay" => p.photothermal.delay = num()?,
            "drive.combine" => {
                self.combine = match v {
                    "coherent" => Combine::Coherent,
                    "incoherent" => Combine::Incoherent,
                    _ => return Err(format!("expected coherent/incoherent, got '{v}'")),
                }
            }
            "sim.method" => {
                self.sim.method = match v {
                    "full" => Method::Full,
                    "quasistatic" => Method::Quasistatic,
                    _ => return Err(format!("expected full/quasistatic, got '{v}'")),
                }
            }
            "sim.dt" => self.sim.dt = num()?,
            "sim.duration" => self.sim.duration = num()?,
            "sim.output_stride" => {
                self.sim.output_stride = v
                    .parse()
                    .map_err(|_| format!("expected a positive integer, got '{v}'"))?
            }
            "sim.environment" => {
                self.sim.environment = Environment::parse(v).ok_or_else(|| format!("expected vacuum/air, got '{v}'"))?
            }
            "sim.thermal" => self.sim.thermal_enabled = parse_bool(v)?,
            "sim.retardation" => self.sim.retardation_enabled = parse_bool(v)?,
            "sim.allow_long_runs" => self.sim.allow_long_runs = parse_bool(v)?,
            "sim.steady_initial_fields" => self.sim.steady_initial_fields = parse_bool(v)?,
            "noise.enabled" => self.sim.noise.enabled = parse_bool(v)?,
            "noise.temperature" => self.sim.noise.temperature = num()?,
            "noise.seed" => {
                self.sim.noise.seed = v.parse().map_err(|_| format!("expected an integer seed, got '{v}'"))?
            }
            "init.theta_torsional" => self.sim.init.theta[0] = num()?,
            "init.theta_flapping" => self.sim.init.theta[1] = num()?,
            "init.theta_dot_torsional" => self.sim.init.theta_dot[0] = num()?,
            "init.theta_dot_flapping" => self.sim.init.theta_dot[1] = num()?,
            "init.u_left" => self.sim.init.u.u_l = num()?,
            "init.u_right" => self.sim.init.u.u_r = num()?,
            "init.photothermal_torque" => self.sim.init.photothermal_torque = num()?,
            _ => {
                if let Some(rest) = key.strip_prefix("map.") {
                    return self.set_map(rest, num()?);
                }
                if let Some(rest) = key.strip_prefix("mech.") {
                    return self.set_mech(rest, v, scale);
                }
                if let Some(rest) = key.strip_prefix("pump.") {
                    return set_laser(&mut self.pump, rest, v, scale);
                }
                if let Some(rest) = key.strip_prefix("probe.") {
                    return set_laser(&mut self.probe, rest, v, scale);
                }
                return Err(format!("unknown key '{key}'"));
            }
        }
        Ok(())
    }

    fn accepts_hz(base: &str) -> bool {
        matches!(
            base,
            "optics.omega_left"
                | "optics.omega_right"
                | "optics.gamma_i_left"
                | "optics.gamma_e_left"
                | "optics.gamma_i_right"
                | "optics.gamma_e_right"
                | "optics.kappa"
                | "device.g_om"
                | "thermal.dw_dt"
                | "mech.torsional.omega"
                | "mech.flapping.omega"
                | "mech.flapping.coupling_left"
                | "mech.flapping.coupling_right"
                | "pump.offset"
                | "probe.offset"
        ) || (base.starts_with("map.") && base != "map.range")
    }

    fn set_map(&mut self, rest: &str, x: f64) -> std::result::Result<(), String> {
        let (side, coef) = rest
            .split_once('.')
            .ok_or_else(|| format!("unknown key 'map.{rest}'"))?;
        let n: usize = coef
            .strip_prefix('c')
            .and_then(|d| d.parse().ok())
            .filter(|&n| (1..=16).contains(&n))
            .ok_or_else(|| format!("map coefficient must be c1..c16, got '{coef}'"))?;
        let coeffs = match side {
            "left" => &mut self.params.map.left,
            "right" => &mut self.params.map.right,
            _ => return Err(format!("unknown key 'map.{rest}'")),
        };
        if coeffs.len() < n {
            coeffs.resize(n, 0.0);
        }
        coeffs[n - 1] = x;
        Ok(())
    }

    fn set_mech(&mut self, rest: &str, v: &str, scale: f64) -> std::result::Result<(), String> {
        let (mode, field) = rest
            .split_once('.')
            .ok_or_else(|| format!("unknown key 'mech.{rest}'"))?;
        let kind = match mode {
            "torsional" => MechKind::Torsional,
            "flapping" => MechKind::Flapping,
            _ => return Err(format!("unknown mechanical mode '{mode}'")),
        };
        let (k_eff, lever) = (self.params.k_eff, self.params.lever_arm);
        let m = self.params.mode_mut(kind);
        let num = || parse_f64(v).map(|x| x * scale);
        match field {
            "enabled" => m.enabled = parse_bool(v)?,
            "omega" => m.omega = num()?,
            "q" => m.q = num()?,
            "q_air" => m.q_air = num()?,
            "inertia" if v == "auto" => m.inertia = inertia_from_spring(k_eff, lever, m.omega),
            "inertia" => m.inertia = num()?,
            "coupling_left" if kind == MechKind::Flapping => m.coupling_left = num()?,
            "coupling_right" if kind == MechKind::Flapping => m.coupling_right = num()?,
            _ => return Err(format!("unknown key 'mech.{rest}'")),
        }
        Ok(())
    }

    /// Canonical text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn entries(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let mut e: Vec<(String, String)> = Vec::new();
        let mut f = |k: &str, v: f64| e.push((k.to_string(), format!("{v:e}")));
        f("optics.omega_left", p.optics.omega_left);
        f("optics.omega_right", p.optics.omega_right);
        f("optics.gamma_i_left", p.optics.gamma_i_left);
        f("optics.gamma_e_left", p.optics.gamma_e_left);
        f("optics.gamma_i_right", p.optics.gamma_i_right);
        f("optics.gamma_e_right", p.optics.gamma_e_right);
        f("optics.kappa", p.optics.kappa);
        f("device.g_om", p.g_om);
        f("device.k_eff", p.k_eff);
        f("device.lever_arm", p.lever_arm);
        f("map.range", p.map.range);
        for (i, c) in p.map.left.iter().enumerate() {
            f(&format!("map.left.c{}", i + 1), *c);
        }
        for (i, c) in p.map.right.iter().enumerate() {
            f(&format!("map.right.c{}", i + 1), *c);
        }
        for m in [&p.torsional, &p.flapping] {
            let name = m.kind.name();
            e.push((format!("mech.{name}.enabled"), m.enabled.to_string()));
            let mut f = |k: &str, v: f64| e.push((format!("mech.{name}.{k}"), format!("{v:e}")));
            f("omega", m.omega);
            f("q", m.q);
            f("q_air", m.q_air);
            f("inertia", m.inertia);
            if m.kind == MechKind::Flapping {
                f("coupling_left", m.coupling_left);
                f("coupling_right", m.coupling_right);
            }
        }
        let mut f = |k: &str, v: f64| e.push((k.to_string(), format!("{v:e}")));
        f("thermal.tau_local", p.thermal.tau_local);
        f("thermal.tau_cross", p.thermal.tau_cross);
        f("thermal.eta_abs", p.thermal.eta_abs);
        f("thermal.c_heat", p.thermal.c_heat);
        f("thermal.dw_dt", p.thermal.dw_dt);
        e.push(("photothermal.enabled".into(), p.photothermal.enabled.to_string()));
        e.push(("photothermal.gain".into(), format!("{:e}", p.photothermal.gain)));
        e.push(("photothermal.delay".into(), format!("{:e}", p.photothermal.delay)));
        laser_entries(&mut e, "pump", &self.pump);
        laser_entries(&mut e, "probe", &self.probe);
        e.push((
            "drive.combine".into(),
            match self.combine {
                Combine::Coherent => "coherent",
                Combine::Incoherent => "incoherent",
            }
            .into(),
        ));
        let s = &self.sim;
        e.push(("sim.method".into(), s.method.name().into()));
        e.push(("sim.dt".into(), format!("{:e}", s.dt)));
        e.push(("sim.duration".into(), format!("{:e}", s.duration)));
        e.push(("sim.output_stride".into(), s.output_stride.to_string()));
        e.push(("sim.environment".into(), s.environment.name().into()));
        e.push(("sim.thermal".into(), s.thermal_enabled.to_string()));
        e.push(("sim.retardation".into(), s.retardation_enabled.to_string()));
        e.push(("sim.allow_long_runs".into(), s.allow_long_runs.to_string()));
        e.push(("sim.steady_initial_fields".into(), s.steady_initial_fields.to_string()));
        e.push(("noise.enabled".into(), s.noise.enabled.to_string()));
        e.push(("noise.temperature".into(), format!("{:e}", s.noise.temperature)));
        e.push(("noise.seed".into(), s.noise.seed.to_string()));
        let i = &s.init;
        for (k, v) in [
            ("init.theta_torsional", i.theta[0]),
            ("init.theta_flapping", i.theta[1]),
            ("init.theta_dot_torsional", i.theta_dot[0]),
            ("init.theta_dot_flapping", i.theta_dot[1]),
            ("init.u_left", i.u.u_l),
            ("init.u_right", i.u.u_r),
            ("init.photothermal_torque", i.photothermal_torque),
        ] {
            e.push((k.into(), format!("{v:e}")));
        }
        let mut out = vec![("preset".to_string(), self.preset.clone())];
        out.extend(e);
        out
    }

    /// Same entries as a JSON object, numbers as numbers.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (k, v) in self.entries() {
            let val = if let Ok(x) = v.parse::<f64>() {
                serde_json::Number::from_f64(x).map_or(serde_json::Value::String(v.clone()), serde_json::Value::Number)
            } else if let Ok(b) = v.parse::<bool>() {
                serde_json::Value::Bool(b)
            } else {
                serde_json::Value::String(v.clone())
            };
            map.insert(k, val);
        }
        serde_json::Value::Object(map)
    }
}

fn set_laser(slot: &mut LaserSlot, field: &str, v: &str, scale: f64) -> std::result::Result<(), String> {
    let num = || parse_f64(v).map(|x| x * scale);
    match field {
        "enabled" => slot.enabled = parse_bool(v)?,
        "port" => slot.laser.port = parse_cavity(v)?,
        "power_w" => slot.laser.power = num()?,
        "carrier" => {
            slot.laser.carrier = match v {
                "alignment" => Carrier::Alignment,
                "offset" => Carrier::Offset(slot.offset),
                "normalized" => Carrier::Normalized(slot.delta),
                _ => return Err(format!("expected alignment/offset/normalized, got '{v}'")),
            }
        }
        "offset" => {
            slot.offset = num()?;
            slot.laser.carrier = Carrier::Offset(slot.offset);
        }
        "delta" => {
            slot.delta = num()?;
            slot.laser.carrier = Carrier::Normalized(slot.delta);
        }
        "waveform" => {
            slot.laser.waveform = match v {
                "cw" => Waveform::Cw,
                "pulse" => Waveform::Pulse {
                    start: slot.pulse_start,
                    width: slot.pulse_width,
                },
                _ => return Err(format!("expected cw/pulse, got '{v}'")),
            }
        }
        "pulse_start" => slot.pulse_start = num()?,
        "pulse_width" => slot.pulse_width = num()?,
        _ => return Err(format!("unknown laser key '{field}'")),
    }
    Ok(())
}

fn laser_entries(e: &mut Vec<(String, String)>, name: &str, s: &LaserSlot) {
    let l = &s.laser;
    e.push((format!("{name}.enabled"), s.enabled.to_string()));
    e.push((format!("{name}.port"), l.port.name().into()));
    e.push((format!("{name}.power_w"), format!("{:e}", l.power)));
    e.push((format!("{name}.offset"), format!("{:e}", s.offset)));
    e.push((format!("{name}.delta"), format!("{:e}", s.delta)));
    // The carrier comes after offset/delta so it wins on reload.
    let carrier = match l.carrier {
        Carrier::Alignment => "alignment",
        Carrier::Offset(_) => "offset",
        Carrier::Normalized(_) => "normalized",
    };
    e.push((format!("{name}.carrier"), carrier.into()));
    e.push((format!("{name}.pulse_start"), format!("{:e}", s.pulse_start)));
    e.push((format!("{name}.pulse_width"), format!("{:e}", s.pulse_width)));
    let wf = match l.waveform {
        Waveform::Cw => "cw",
        Waveform::Pulse { .. } => "pulse",
    };
    e.push((format!("{name}.waveform"), wf.into()));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip_is_bit_identical() {
        for name in PRESETS {
            let mut c = Config::from_preset(name).unwrap();
            c.set_pump(true, Laser::cw(Cavity::Left, 3.4e-6, Carrier::Normalized(0.123456789)));
            c.sim.init.theta[0] = -0.914e-3;
            let text = c.to_text();
            let back = Config::parse(&text).unwrap();
            assert_eq!(back.to_text(), text);
            assert_eq!(back.params, c.params);
            assert_eq!(back.drive(), c.drive());
            assert_eq!(back.sim, c.sim);
        }
    }

    #[test]
    fn hz_keys_scale_once() {
        let c = Config::parse("optics.kappa_hz = 0.72e9\nmech.torsional.omega_hz = 441e3\n").unwrap();
        assert_eq!(c.params.optics.kappa, 0.72e9 * TWO_PI);
        assert_eq!(c.params.torsional.omega, 441e3 * TWO_PI);
        let back = Config::parse(&c.to_text()).unwrap();
        assert_eq!(back.params.optics.kappa.to_bits(), c.params.optics.kappa.to_bits());
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = Config::parse("# header\n\nsim.dt = 1e-9\nsim.dtt = 2\n").unwrap_err();
        match err {
            Error::Config { line, msg } => {
                assert_eq!(line, 4);
                assert!(msg.contains("sim.dtt"));
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn negative_q_fails_validation() {
        let c = Config::parse("q_mech = -1\n").unwrap();
        let e = c.validate().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn override_shows_in_echo() {
        let mut c = Config::from_preset("paper_device").unwrap();
        c.apply_overrides(&["pump.power_w=6.76e-6"]).unwrap();
        assert!(c.to_text().contains("pump.power_w = 6.76e-6\n"));
        assert!(c.apply_overrides(&["pump.power=1"]).is_err());
        assert!(c.apply_overrides(&["pump.power_w"]).is_err());
    }

    #[test]
    fn artifact_echo_reloads() {
        let mut c = Config::from_preset("paper_device_photothermal").unwrap();
        c.sim.noise.seed = 99;
        let artifact: String = c.to_text().lines().map(|l| format!("#% {l}\n")).collect::<String>() + "t,x\n0,1\n";
        let back = Config::from_artifact(&artifact).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn map_keys_sync_torsional_coupling() {
        let c = Config::parse("map.left.c1 = -1e14\nmap.right.c1 = 1.2e14\nmap.right.c2 = 3e15\n").unwrap();
        assert_eq!(c.params.torsional.coupling_left, -1e14);
        assert_eq!(c.params.torsional.coupling_right, 1.2e14);
        assert_eq!(c.params.map.right, vec![1.2e14, 3e15]);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_preset() {
        assert!(Config::parse("preset = nope\n").is_err());
    }
}
