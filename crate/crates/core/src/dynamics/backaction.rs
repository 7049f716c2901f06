//! Small-signal dynamical backaction in the Doppler regime.

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::optics::Detunings;
use crate::params::{Cavity, DeviceParams, MechMode};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Backaction {
    /// Optical damping rate (energy); positive cools.
    pub gamma_opt: f64,
    /// Optical spring shift of the angular frequency.
    pub omega_shift: f64,
}

/// Backaction of `n_cav` photons in cavity `c` at normalized detuning
/// `delta` on `mode`. Expanding the retarded field to first order in the
/// velocity gives
/// `Γ_opt = −(ħ g² n / I)·4τ²δ/(1+δ²)²` and
/// `δΩ = ħ g² n τ δ / (I Ω (1+δ²))`.
pub fn backaction_rates(p: &DeviceParams, c: Cavity, delta: f64, n_cav: f64, mode: &MechMode) -> Backaction {
    let tau = p.optics.tau(c);
    let g = mode.coupling(c);
    let l = 1.0 + delta * delta;
    let scale = HBAR * g * g * n_cav / mode.inertia;
    Backaction {
        gamma_opt: -scale * 4.0 * tau * tau * delta / (l * l),
        omega_shift: scale * tau * delta / (mode.omega * l),
    }
}

/// Normalized detuning and total decay rate of cavity `c` after eliminating
/// the other cavity, whose self-energy `κ²/(iΔ_o − γ_o/2)` shifts and
/// broadens it.
pub fn dressed_cavity(p: &DeviceParams, det: &Detunings, c: Cavity) -> (f64, f64) {
    let o = &p.optics;
    let other = c.other();
    let m_o = Complex64::new(-o.gamma(other) / 2.0, det.raw[other]);
    let m = Complex64::new(-o.gamma(c) / 2.0, det.raw[c]) + o.kappa * o.kappa / m_o;
    let gamma = -2.0 * m.re;
    (m.im * 2.0 / gamma, gamma)
}
