//! Stateless optics: detunings, steady-state coupled-mode fields, waveguide
//! transmission and the n_R(δ_L, δ_R) map.
//!
//! Field convention: `|a|²` is intracavity energy in J and `|s|²` is input
//! power in W. In the frame rotating at the laser frequency
//!
//! ```text
//! da_L/dt = (iΔ_L − γ_L/2) a_L + iκ a_R + √γ_eL s_L
//! da_R/dt = (iΔ_R − γ_R/2) a_R + iκ a_L + √γ_eR s_R
//! ```
//!
//! with `Δ = ω_laser − ω_cav`. The output field of each waveguide is
//! `s − √γ_e a` (all-pass side coupling).

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::params::{Cavity, DeviceParams, PerCavity};

/// Ratio `|a_R|²/ħω` (linear solve) over the closed-form expression in
/// [`photon_number_right`], in the weak-coupling limit. The closed form uses
/// `1/τ_Le = γ_eL/2` where the linear solve has `γ_eL`.
pub const CLOSED_FORM_RATIO: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detunings {
    /// Normalized detuning `Δ·τ`.
    pub delta: PerCavity<f64>,
    /// Raw detuning `ω_laser − ω_cav` (rad/s).
    pub raw: PerCavity<f64>,
    pub omega_laser: f64,
}

impl Detunings {
    /// Detunings of a laser at `omega_laser` given the total frequency shift
    /// (mechanical plus thermo-optic) of each cavity.
    pub fn from_shifts(p: &DeviceParams, shifts: PerCavity<f64>, omega_laser: f64) -> Self {
        let raw = PerCavity::new(
            omega_laser - (p.optics.omega_left + shifts.left),
            omega_laser - (p.optics.omega_right + shifts.right),
        );
        Self::from_raw(p, raw, omega_laser)
    }

    pub fn from_raw(p: &DeviceParams, raw: PerCavity<f64>, omega_laser: f64) -> Self {
        Self {
            delta: PerCavity::new(
                raw.left * p.optics.tau(Cavity::Left),
                raw.right * p.optics.tau(Cavity::Right),
            ),
            raw,
            omega_laser,
        }
    }

    /// Detunings specified in normalized form. `omega_laser` is only used to
    /// convert energies into photon numbers.
    pub fn from_normalized(p: &DeviceParams, delta: PerCavity<f64>, omega_laser: f64) -> Self {
        Self {
            delta,
            raw: PerCavity::new(
                delta.left / p.optics.tau(Cavity::Left),
                delta.right / p.optics.tau(Cavity::Right),
            ),
            omega_laser,
        }
    }
}

/// Detunings at torsional angle `theta` using the dispersive map only.
pub fn cavity_detunings(
    p: &DeviceParams,
    theta: f64,
    omega_laser: f64,
    allow_extrapolation: bool,
) -> Result<Detunings> {
    if !allow_extrapolation {
        p.map.check_range(theta)?;
    }
    let shifts = PerCavity::new(p.map.shift(Cavity::Left, theta), p.map.shift(Cavity::Right, theta));
    Ok(Detunings::from_shifts(p, shifts, omega_laser))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPair {
    pub a: PerCavity<Complex64>,
}

impl FieldPair {
    pub const ZERO: FieldPair = FieldPair {
        a: PerCavity {
            left: Complex64::new(0.0, 0.0),
            right: Complex64::new(0.0, 0.0),
        },
    };

    pub fn energy(&self, c: Cavity) -> f64 {
        self.a[c].norm_sqr()
    }

    pub fn photons(&self, c: Cavity, omega_laser: f64) -> f64 {
        self.energy(c) / (HBAR * omega_laser)
    }
}

/// Input amplitude with `|s|² = power`.
pub fn input_amplitude(power: f64, phase: f64) -> Complex64 {
    Complex64::from_polar(power.max(0.0).sqrt(), phase)
}

/// Steady state of the coupled-mode equations for one laser frequency.
/// `inputs` are the waveguide input amplitudes of each cavity.
pub fn steady_state_fields(p: &DeviceParams, det: &Detunings, inputs: PerCavity<Complex64>) -> Result<FieldPair> {
    let o = &p.optics;
    let i = Complex64::i();
    let m11 = Complex64::new(-o.gamma(Cavity::Left) / 2.0, det.raw.left);
    let m22 = Complex64::new(-o.gamma(Cavity::Right) / 2.0, det.raw.right);
    let m12 = i * o.kappa;
    let b_l = o.gamma_e(Cavity::Left).sqrt() * inputs.left;
    let b_r = o.gamma_e(Cavity::Right).sqrt() * inputs.right;

    let d = m11 * m22 - m12 * m12;
    if d.norm() == 0.0 || !d.is_finite() {
        return Err(Error::Singular);
    }
    // M a = -b
    let a_l = -(m22 * b_l - m12 * b_r) / d;
    let a_r = -(m11 * b_r - m12 * b_l) / d;
    Ok(FieldPair {
        a: PerCavity::new(a_l, a_r),
    })
}

/// Right-cavity photon number with only the left cavity pumped, from the
/// weak-coupling closed form
/// `n_R = (κ τ_R τ_L)² / τ_Le / ((δ_R²+1)(δ_L²+1)) · P_in/ħω`.
pub fn photon_number_right(p: &DeviceParams, det: &Detunings, p_in: f64) -> f64 {
    let o = &p.optics;
    let tau_l = o.tau(Cavity::Left);
    let tau_r = o.tau(Cavity::Right);
    let tau_le = o.tau_e(Cavity::Left);
    let k = o.kappa * tau_r * tau_l;
    let (dl, dr) = (det.delta.left, det.delta.right);
    k * k / tau_le / ((dr * dr + 1.0) * (dl * dl + 1.0)) * p_in / (HBAR * det.omega_laser)
}

/// Complex all-pass transmission amplitude of one cavity alone.
pub fn transmission_amplitude(p: &DeviceParams, c: Cavity, delta: f64) -> Complex64 {
    let o = &p.optics;
    let k = 2.0 * o.gamma_e(c) / o.gamma(c);
    Complex64::new(1.0, 0.0) - k / Complex64::new(1.0, -delta)
}

/// Power transmission `T(δ) = (r² + δ²)/(1 + δ²)` with
/// `r = (γ_i − γ_e)/γ`.
pub fn waveguide_transmission(p: &DeviceParams, c: Cavity, delta: f64) -> f64 {
    let o = &p.optics;
    if !delta.is_finite() {
        return 1.0;
    }
    let r = (o.gamma_i(c) - o.gamma_e(c)) / o.gamma(c);
    (r * r + delta * delta) / (1.0 + delta * delta)
}

/// Waveguide output amplitudes `s − √γ_e a`.
pub fn output_fields(p: &DeviceParams, fields: &FieldPair, inputs: PerCavity<Complex64>) -> PerCavity<Complex64> {
    let o = &p.optics;
    PerCavity::new(
        inputs.left - o.gamma_e(Cavity::Left).sqrt() * fields.a.left,
        inputs.right - o.gamma_e(Cavity::Right).sqrt() * fields.a.right,
    )
}

/// Power lost to intrinsic loss in both cavities.
pub fn dissipated_power(p: &DeviceParams, fields: &FieldPair) -> f64 {
    Cavity::BOTH
        .iter()
        .map(|&c| p.optics.gamma_i(c) * fields.energy(c))
        .sum()
}

/// n_R over a grid of normalized detunings. Rows follow `delta_l`, columns
/// follow `delta_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShuttleMap {
    pub delta_l: Vec<f64>,
    pub delta_r: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub normalized: bool,
}

impl ShuttleMap {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// First row is the δ_R grid (after a leading label cell), first column
    /// is the δ_L grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(if self.normalized {
            "# n_R normalized to its (0,0) value; rows: delta_L, columns: delta_R\n"
        } else {
            "# n_R in photons; rows: delta_L, columns: delta_R\n"
        });
        out.push_str("delta_L\\delta_R");
        for d in &self.delta_r {
            out.push_str(&format!(",{d}"));
        }
        out.push('\n');
        for (dl, row) in self.delta_l.iter().zip(&self.values) {
            out.push_str(&format!("{dl}"));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Grid(format!("{name} grid has non-finite entries")));
    }
    let up = grid.windows(2).all(|w| w[1] > w[0]);
    let down = grid.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::Grid(format!("{name} grid is not strictly monotone")));
    }
    Ok(())
}

/// Evaluates the closed form over the grid. With `normalize` every value is
/// divided by the (0,0) value of the closed form, which is its global peak.
pub fn shuttle_map(
    p: &DeviceParams,
    delta_l: &[f64],
    delta_r: &[f64],
    p_in: f64,
    omega_laser: f64,
    normalize: bool,
) -> Result<ShuttleMap> {
    check_grid("delta_L", delta_l)?;
    check_grid("delta_R", delta_r)?;
    let eval = |dl: f64, dr: f64| {
        let det = Detunings::from_normalized(p, PerCavity::new(dl, dr), omega_laser);
        photon_number_right(p, &det, p_in)
    };
    let values = delta_l
        .iter()
        .map(|&dl| {
            delta_r
                .iter()
                .map(|&dr| {
                    if normalize {
                        1.0 / ((1.0 + dl * dl) * (1.0 + dr * dr))
                    } else {
                        eval(dl, dr)
                    }
                })
                .collect()
        })
        .collect();
    Ok(ShuttleMap {
        delta_l: delta_l.to_vec(),
        delta_r: delta_r.to_vec(),
        values,
        normalized: normalize,
    })
}
