//! Device parameters, unit conventions and derived quantities.
//!
//! Every angular frequency and rate is stored in rad/s. Conversions from Hz
//! happen once, at the config boundary (see [`crate::config`]).

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::constants::{C_LIGHT, HBAR, TWO_PI};
use crate::error::{Error, Result};
use crate::mechanics::Environment;
use crate::thermal::{PhotothermalParams, ThermalParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cavity {
    Left,
    Right,
}

impl Cavity {
    pub const BOTH: [Cavity; 2] = [Cavity::Left, Cavity::Right];

    pub fn other(self) -> Cavity {
        match self {
            Cavity::Left => Cavity::Right,
            Cavity::Right => Cavity::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cavity::Left => "left",
            Cavity::Right => "right",
        }
    }
}

impl fmt::Display for Cavity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A value held once per cavity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PerCavity<T> {
    pub left: T,
    pub right: T,
}

impl<T> PerCavity<T> {
    pub fn new(left: T, right: T) -> Self {
        Self { left, right }
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> PerCavity<U> {
        PerCavity {
            left: f(self.left),
            right: f(self.right),
        }
    }
}

impl<T> Index<Cavity> for PerCavity<T> {
    type Output = T;
    fn index(&self, c: Cavity) -> &T {
        match c {
            Cavity::Left => &self.left,
            Cavity::Right => &self.right,
        }
    }
}

impl<T> IndexMut<Cavity> for PerCavity<T> {
    fn index_mut(&mut self, c: Cavity) -> &mut T {
        match c {
            Cavity::Left => &mut self.left,
            Cavity::Right => &mut self.right,
        }
    }
}

/// Optical side of the device: two cavities with intrinsic (`gamma_i`) and
/// waveguide (`gamma_e`) energy decay rates and a field coupling `kappa`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpticalParams {
    pub omega_left: f64,
    pub omega_right: f64,
    pub gamma_i_left: f64,
    pub gamma_e_left: f64,
    pub gamma_i_right: f64,
    pub gamma_e_right: f64,
    pub kappa: f64,
}

impl OpticalParams {
    pub fn omega0(&self, c: Cavity) -> f64 {
        match c {
            Cavity::Left => self.omega_left,
            Cavity::Right => self.omega_right,
        }
    }

    pub fn gamma_i(&self, c: Cavity) -> f64 {
        match c {
            Cavity::Left => self.gamma_i_left,
            Cavity::Right => self.gamma_i_right,
        }
    }

    pub fn gamma_e(&self, c: Cavity) -> f64 {
        match c {
            Cavity::Left => self.gamma_e_left,
            Cavity::Right => self.gamma_e_right,
        }
    }

    /// Total energy decay rate.
    pub fn gamma(&self, c: Cavity) -> f64 {
        self.gamma_i(c) + self.gamma_e(c)
    }

    /// Field decay time `2 / gamma`.
    pub fn tau(&self, c: Cavity) -> f64 {
        2.0 / self.gamma(c)
    }

    /// Waveguide-coupling field decay time `2 / gamma_e`.
    pub fn tau_e(&self, c: Cavity) -> f64 {
        2.0 / self.gamma_e(c)
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma(Cavity::Left).max(self.gamma(Cavity::Right))
    }

    pub fn gamma_min(&self) -> f64 {
        self.gamma(Cavity::Left).min(self.gamma(Cavity::Right))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MechKind {
    Torsional,
    Flapping,
}

impl MechKind {
    pub const ALL: [MechKind; 2] = [MechKind::Torsional, MechKind::Flapping];

    pub fn index(self) -> usize {
        match self {
            MechKind::Torsional => 0,
            MechKind::Flapping => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MechKind::Torsional => "torsional",
            MechKind::Flapping => "flapping",
        }
    }
}

/// One out-of-plane mechanical mode. The generalized coordinate is an angle
/// (rad); `coupling_*` are the cavity shifts per unit of that coordinate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MechMode {
    pub kind: MechKind,
    pub enabled: bool,
    pub omega: f64,
    pub q: f64,
    /// Effective quality factor at atmospheric pressure.
    pub q_air: f64,
    /// Effective moment of inertia (kg·m²).
    pub inertia: f64,
    pub coupling_left: f64,
    pub coupling_right: f64,
}

impl MechMode {
    pub fn coupling(&self, c: Cavity) -> f64 {
        match c {
            Cavity::Left => self.coupling_left,
            Cavity::Right => self.coupling_right,
        }
    }

    pub fn quality(&self, env: Environment) -> f64 {
        match env {
            Environment::Vacuum => self.q,
            Environment::Air => self.q_air,
        }
    }

    /// Energy damping rate `Omega_m / Q_m`.
    pub fn gamma_m(&self, env: Environment) -> f64 {
        self.omega / self.quality(env)
    }

    pub fn period(&self) -> f64 {
        TWO_PI / self.omega
    }
}

/// Relative cavity frequency shift versus torsional angle, as a polynomial
/// with no constant term: `shift(θ) = c1·θ + c2·θ² + ...`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersiveMap {
    /// Coefficients `c1, c2, ...` of the left cavity (rad/s per radⁿ).
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Validity half-range in rad.
    pub range: f64,
}

impl DispersiveMap {
    pub fn linear(left: f64, right: f64, range: f64) -> Self {
        Self {
            left: vec![left],
            right: vec![right],
            range,
        }
    }

    pub fn coefficients(&self, c: Cavity) -> &[f64] {
        match c {
            Cavity::Left => &self.left,
            Cavity::Right => &self.right,
        }
    }

    pub fn shift(&self, c: Cavity, theta: f64) -> f64 {
        // Horner over c_n..c_1, then one more factor of θ.
        self.coefficients(c).iter().rev().fold(0.0, |acc, &k| acc * theta + k) * theta
    }

    pub fn slope(&self, c: Cavity, theta: f64) -> f64 {
        self.coefficients(c)
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, &k)| acc * theta + (i + 1) as f64 * k)
    }

    pub fn linear_coefficient(&self, c: Cavity) -> f64 {
        self.coefficients(c).first().copied().unwrap_or(0.0)
    }

    pub fn check_range(&self, theta: f64) -> Result<()> {
        if theta.abs() > self.range {
            Err(Error::OutOfRange {
                theta,
                range: self.range,
            })
        } else {
            Ok(())
        }
    }
}

/// Full physical description of the device.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviceParams {
    pub optics: OpticalParams,
    /// Torsional dispersive map; its linear term is the torsional coupling.
    pub map: DispersiveMap,
    pub torsional: MechMode,
    pub flapping: MechMode,
    /// Linear optomechanical coupling dω/dz (rad/s per m).
    pub g_om: f64,
    /// Effective linear spring constant at the cavity position (N/m).
    pub k_eff: f64,
    /// Distance from cavity center to the rotation axis (m).
    pub lever_arm: f64,
    pub thermal: ThermalParams,
    pub photothermal: PhotothermalParams,
}

/// Lever arm: half of the 23 µm cavity-center separation.
pub const DEFAULT_LEVER_ARM: f64 = 11.5e-6;
/// Flapping-mode effective inertia relative to the torsional one. The
/// flapping coordinate moves the whole beam, so its effective mass at the
/// cavity exceeds the torsional one.
pub const FLAPPING_INERTIA_RATIO: f64 = 2.0;
/// Half-range of the default linear dispersive map (rad).
pub const DEFAULT_MAP_RANGE: f64 = 8e-3;
/// Effective air-damped quality factor, calibrated against the 1.9 µs / 3.2 µs
/// timing of the air impulse response.
pub const DEFAULT_Q_AIR: f64 = 0.4;

pub fn omega_from_wavelength(lambda: f64) -> f64 {
    TWO_PI * C_LIGHT / lambda
}

pub fn decay_rate_from_q(omega: f64, q: f64) -> f64 {
    omega / q
}

pub fn q_from_decay_rate(omega: f64, gamma: f64) -> f64 {
    omega / gamma
}

/// Torsional inertia from the linear spring constant at the cavity:
/// `I = k·l² / Ω²`.
pub fn inertia_from_spring(k_eff: f64, lever_arm: f64, omega: f64) -> f64 {
    k_eff * lever_arm * lever_arm / (omega * omega)
}

impl DeviceParams {
    /// The measured device: λ_L0 = 1541.574 nm, λ_R0 = 1541.219 nm,
    /// loaded Q 1.0e4, intrinsic Q 1.6e4, κ = 2π·0.72 GHz,
    /// g_OM = 2π·2.13 GHz/nm, k = 0.11 N/m, torsional 441 kHz / Q 1.66e4,
    /// flapping 514 kHz / Q 1.68e4.
    pub fn paper_device() -> Self {
        let q_loaded = 1.0e4;
        let q_intrinsic = 1.6e4;
        let omega_left = omega_from_wavelength(1541.574e-9);
        let omega_right = omega_from_wavelength(1541.219e-9);
        let split = |omega: f64| {
            let gamma = decay_rate_from_q(omega, q_loaded);
            let gamma_i = decay_rate_from_q(omega, q_intrinsic);
            (gamma_i, gamma - gamma_i)
        };
        let (gamma_i_left, gamma_e_left) = split(omega_left);
        let (gamma_i_right, gamma_e_right) = split(omega_right);

        let g_om = TWO_PI * 2.13e9 / 1e-9;
        let k_eff = 0.11;
        let lever_arm = DEFAULT_LEVER_ARM;
        let g_angular = g_om * lever_arm;

        let omega_t = TWO_PI * 441e3;
        let omega_f = TWO_PI * 514e3;
        let inertia_t = inertia_from_spring(k_eff, lever_arm, omega_t);

        // θ > 0 tilts the left side toward the substrate: left red-shifts.
        let map = DispersiveMap::linear(-g_angular, g_angular, DEFAULT_MAP_RANGE);
        let torsional = MechMode {
            kind: MechKind::Torsional,
            enabled: true,
            omega: omega_t,
            q: 1.66e4,
            q_air: DEFAULT_Q_AIR,
            inertia: inertia_t,
            coupling_left: -g_angular,
            coupling_right: g_angular,
        };
        let flapping = MechMode {
            kind: MechKind::Flapping,
            enabled: true,
            omega: omega_f,
            q: 1.68e4,
            q_air: DEFAULT_Q_AIR,
            inertia: FLAPPING_INERTIA_RATIO * inertia_t,
            coupling_left: -g_angular,
            coupling_right: -g_angular,
        };

        DeviceParams {
            optics: OpticalParams {
                omega_left,
                omega_right,
                gamma_i_left,
                gamma_e_left,
                gamma_i_right,
                gamma_e_right,
                kappa: TWO_PI * 0.72e9,
            },
            map,
            torsional,
            flapping,
            g_om,
            k_eff,
            lever_arm,
            thermal: ThermalParams::paper_device(),
            photothermal: PhotothermalParams::default(),
        }
    }

    /// The measured device plus the photothermal torque channel with its gain
    /// fitted so the self-oscillation threshold lands at 0.135 µW. The gain is
    /// a fit, not a measured property.
    pub fn paper_device_photothermal_fit() -> Self {
        let mut p = Self::paper_device();
        p.photothermal = PhotothermalParams::fitted();
        p
    }

    /// Same device with both cavity linewidths scaled to `ratio · Ω_torsional`
    /// (the waveguide/intrinsic split is kept). Makes direct integration of
    /// the cavity fields affordable.
    pub fn reduced_stiffness(&self, ratio: f64) -> Self {
        let mut p = self.clone();
        let target = ratio * self.torsional.omega;
        for c in Cavity::BOTH {
            let scale = target / self.optics.gamma(c);
            let (gi, ge) = (self.optics.gamma_i(c) * scale, self.optics.gamma_e(c) * scale);
            match c {
                Cavity::Left => {
                    p.optics.gamma_i_left = gi;
                    p.optics.gamma_e_left = ge;
                }
                Cavity::Right => {
                    p.optics.gamma_i_right = gi;
                    p.optics.gamma_e_right = ge;
                }
            }
        }
        p
    }

    pub fn mode(&self, kind: MechKind) -> &MechMode {
        match kind {
            MechKind::Torsional => &self.torsional,
            MechKind::Flapping => &self.flapping,
        }
    }

    pub fn mode_mut(&mut self, kind: MechKind) -> &mut MechMode {
        match kind {
            MechKind::Torsional => &mut self.torsional,
            MechKind::Flapping => &mut self.flapping,
        }
    }

    pub fn enabled_modes(&self) -> impl Iterator<Item = &MechMode> {
        [&self.torsional, &self.flapping].into_iter().filter(|m| m.enabled)
    }

    /// Mechanical cavity shift for the given mode angles
    /// (`[torsional, flapping]`).
    pub fn mechanical_shift(&self, c: Cavity, angles: [f64; 2]) -> f64 {
        let mut shift = self.map.shift(c, angles[0]);
        if self.flapping.enabled {
            shift += self.flapping.coupling(c) * angles[1];
        }
        shift
    }

    /// dω_c/dθ for one mode at the given angles.
    pub fn shift_slope(&self, c: Cavity, kind: MechKind, angles: [f64; 2]) -> f64 {
        match kind {
            MechKind::Torsional => self.map.slope(c, angles[0]),
            MechKind::Flapping => {
                if self.flapping.enabled {
                    self.flapping.coupling(c)
                } else {
                    0.0
                }
            }
        }
    }

    /// Torsional Ω_m / γ_min.
    pub fn sideband_ratio(&self) -> f64 {
        self.torsional.omega / self.optics.gamma_min()
    }

    /// Largest Ω_m / γ_min over enabled modes.
    pub fn worst_sideband_ratio(&self) -> f64 {
        let omega_max = self.enabled_modes().map(|m| m.omega).fold(0.0_f64, f64::max);
        omega_max / self.optics.gamma_min()
    }

    /// Laser frequency where both cavity resonances coincide under the linear
    /// torsional map, and the angle at which that happens.
    pub fn alignment(&self) -> (f64, f64) {
        let cl = self.map.linear_coefficient(Cavity::Left);
        let cr = self.map.linear_coefficient(Cavity::Right);
        let theta = (self.optics.omega_left - self.optics.omega_right) / (cr - cl);
        (self.optics.omega_left + cl * theta, theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub rule: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.issues.iter().any(|i| i.rule == rule)
    }

    fn push(&mut self, severity: Severity, rule: &str, detail: String) {
        self.issues.push(Issue {
            severity,
            rule: rule.to_string(),
            detail,
        });
    }

    fn require(&mut self, ok: bool, rule: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.push(Severity::Error, rule, detail());
        }
    }

    fn warn_unless(&mut self, ok: bool, rule: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.push(Severity::Warning, rule, detail());
        }
    }

    /// Converts a failed report into an error listing every violation.
    pub fn into_result(self) -> Result<Vec<Issue>> {
        if self.passed() {
            Ok(self.issues)
        } else {
            let msg = self
                .errors()
                .map(|i| format!("{}: {}", i.rule, i.detail))
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::Validation(msg))
        }
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

pub fn validate_params(p: &DeviceParams) -> ValidationReport {
    let mut r = ValidationReport::default();
    let o = &p.optics;

    for c in Cavity::BOTH {
        r.require(positive(o.omega0(c)), "omega > 0", || {
            format!("{c} cavity frequency {:e}", o.omega0(c))
        });
        r.require(positive(o.gamma_i(c)), "gamma_i > 0", || {
            format!("{c} intrinsic rate {:e}", o.gamma_i(c))
        });
        r.require(positive(o.gamma_e(c)), "gamma_e > 0", || {
            format!("{c} external rate {:e}", o.gamma_e(c))
        });
    }
    r.require(o.kappa.is_finite() && o.kappa >= 0.0, "kappa >= 0", || {
        format!("inter-cavity coupling {:e}", o.kappa)
    });
    if r.passed() {
        r.warn_unless(o.kappa < o.gamma_min() / 10.0, "weak coupling regime", || {
            format!(
                "kappa = {:e} is not below min(gamma)/10 = {:e}",
                o.kappa,
                o.gamma_min() / 10.0
            )
        });
    }

    for m in [&p.torsional, &p.flapping] {
        let name = m.kind.name();
        r.require(positive(m.omega), "Omega_m > 0", || {
            format!("{name} frequency {:e}", m.omega)
        });
        r.require(positive(m.q) && positive(m.omega / m.q), "Gamma_m > 0", || {
            format!("{name} Q_m = {:e}", m.q)
        });
        r.require(positive(m.q_air), "Gamma_air > 0", || {
            format!("{name} Q_air = {:e}", m.q_air)
        });
        r.require(positive(m.inertia), "inertia > 0", || {
            format!("{name} inertia {:e}", m.inertia)
        });
        let (sl, sr) = (m.coupling_left.signum(), m.coupling_right.signum());
        match m.kind {
            MechKind::Torsional => r.require(sl == -sr && m.coupling_left != 0.0, "anti-symmetric signs", || {
                format!(
                    "torsional couplings {:e}, {:e} must have opposite signs",
                    m.coupling_left, m.coupling_right
                )
            }),
            MechKind::Flapping => r.require(sl == sr, "symmetric signs", || {
                format!(
                    "flapping couplings {:e}, {:e} must share a sign",
                    m.coupling_left, m.coupling_right
                )
            }),
        }
    }
    r.require(p.torsional.enabled, "torsional mode enabled", || {
        "the torsional mode carries the dispersive map and cannot be disabled".into()
    });

    let map = &p.map;
    r.require(positive(map.range), "map range > 0", || {
        format!("range {:e}", map.range)
    });
    for c in Cavity::BOTH {
        let c1 = map.linear_coefficient(c);
        r.require(c1 == p.torsional.coupling(c), "map linear coefficient", || {
            format!(
                "{c} map c1 = {c1:e} differs from torsional coupling {:e}",
                p.torsional.coupling(c)
            )
        });
        r.require(
            map.coefficients(c).iter().all(|k| k.is_finite()),
            "finite map coefficients",
            || format!("{c} map has non-finite coefficients"),
        );
    }
    r.warn_unless(
        map.linear_coefficient(Cavity::Left) == -map.linear_coefficient(Cavity::Right),
        "ideal anti-symmetric map",
        || "linear map coefficients are not exact negatives".into(),
    );

    r.require(positive(p.g_om), "g_om > 0", || format!("{:e}", p.g_om));
    r.require(positive(p.k_eff), "k_eff > 0", || format!("{:e}", p.k_eff));
    r.require(positive(p.lever_arm), "lever arm > 0", || format!("{:e}", p.lever_arm));

    let t = &p.thermal;
    r.require(
        positive(t.tau_local) && positive(t.tau_cross),
        "thermal times > 0",
        || format!("tau_local {:e}, tau_cross {:e}", t.tau_local, t.tau_cross),
    );
    r.require((0.0..=1.0).contains(&t.eta_abs), "0 <= eta_abs <= 1", || {
        format!("eta_abs {}", t.eta_abs)
    });
    r.require(positive(t.c_heat), "c_heat > 0", || format!("{:e}", t.c_heat));
    r.require(t.dw_dt.is_finite(), "finite dw_dT", || format!("{:e}", t.dw_dt));
    r.require(positive(p.photothermal.delay), "photothermal delay > 0", || {
        format!("{:e}", p.photothermal.delay)
    });
    r.require(p.photothermal.gain.is_finite(), "finite photothermal gain", || {
        format!("{:e}", p.photothermal.gain)
    });

    if r.passed() {
        let ratio = p.worst_sideband_ratio();
        r.warn_unless(ratio < 1e-2, "sideband unresolved", || {
            format!("Omega_m/gamma = {ratio:e}; quasistatic integration unavailable")
        });
    }
    r
}

/// Quantities computed from the primary parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub gamma_left: f64,
    pub gamma_right: f64,
    pub tau_left: f64,
    pub tau_right: f64,
    pub k_eff: f64,
    pub lever_arm: f64,
    /// g_OM · l (rad/s per rad).
    pub angular_coupling: f64,
    /// Torsional-mode effective mass at the cavity, k/Ω² (kg).
    pub effective_mass: f64,
    pub x_zpf: f64,
    pub g_0: f64,
    /// ħ g_OM² / k.
    pub delta_omega_c: f64,
    /// 2 g_0² / Ω_m, the same quantity by the second route.
    pub delta_omega_c_vacuum: f64,
    pub sideband_ratio: f64,
}

pub fn derive_quantities(p: &DeviceParams) -> Result<DerivedQuantities> {
    if !positive(p.k_eff) {
        return Err(Error::Validation(format!("k_eff must be > 0, got {:e}", p.k_eff)));
    }
    if !positive(p.torsional.inertia) || !positive(p.flapping.inertia) {
        return Err(Error::Validation("inertia must be > 0".into()));
    }
    let omega_m = p.torsional.omega;
    let effective_mass = p.k_eff / (omega_m * omega_m);
    let x_zpf = (HBAR / (2.0 * effective_mass * omega_m)).sqrt();
    let g_0 = p.g_om * x_zpf;
    Ok(DerivedQuantities {
        gamma_left: p.optics.gamma(Cavity::Left),
        gamma_right: p.optics.gamma(Cavity::Right),
        tau_left: p.optics.tau(Cavity::Left),
        tau_right: p.optics.tau(Cavity::Right),
        k_eff: p.k_eff,
        lever_arm: p.lever_arm,
        angular_coupling: p.g_om * p.lever_arm,
        effective_mass,
        x_zpf,
        g_0,
        delta_omega_c: HBAR * p.g_om * p.g_om / p.k_eff,
        delta_omega_c_vacuum: 2.0 * g_0 * g_0 / omega_m,
        sideband_ratio: p.sideband_ratio(),
    })
}
