//! Instantaneous optical response of the device for a given mechanical and
//! thermal configuration. Shared by the quasistatic integrator and the
//! limit-cycle solver.

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::params::{Cavity, DeviceParams, MechKind, PerCavity};
use crate::thermal::{absorbed_power, thermo_optic_shift, ThermalState};

use super::drive::{DriveConfig, ResolvedDrive};

/// Solves `M a = rhs` for the 2×2 complex system.
pub fn solve2(m: [[Complex64; 2]; 2], rhs: [Complex64; 2]) -> Result<[Complex64; 2]> {
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if d.norm() == 0.0 || !d.is_finite() {
        return Err(Error::Singular);
    }
    Ok([
        (m[1][1] * rhs[0] - m[0][1] * rhs[1]) / d,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / d,
    ])
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Snapshot {
    /// Photon numbers summed over all field groups.
    pub n: PerCavity<f64>,
    pub energy: PerCavity<f64>,
    pub p_abs: PerCavity<f64>,
    /// Radiation-pressure torque on `[torsional, flapping]`.
    pub torque: [f64; 2],
    pub probe_transmission: f64,
    /// Power leaving the right cavity into its waveguide.
    pub p_out_right: f64,
}

pub struct Model<'a> {
    pub p: &'a DeviceParams,
    pub drive: ResolvedDrive,
    pub thermal: bool,
    pub retardation: bool,
}

impl<'a> Model<'a> {
    pub fn new(p: &'a DeviceParams, drive: &DriveConfig, thermal: bool, retardation: bool) -> Self {
        Self {
            p,
            drive: ResolvedDrive::new(p, drive),
            thermal,
            retardation,
        }
    }

    /// Total resonance shift of each cavity.
    pub fn shifts(&self, angles: [f64; 2], u: ThermalState) -> PerCavity<f64> {
        let mut s = PerCavity::new(
            self.p.mechanical_shift(Cavity::Left, angles),
            self.p.mechanical_shift(Cavity::Right, angles),
        );
        if self.thermal {
            let t = thermo_optic_shift(u, &self.p.thermal);
            s.left += t.left;
            s.right += t.right;
        }
        s
    }

    /// dω_c/dt from mechanical motion.
    pub fn shift_rates(&self, angles: [f64; 2], rates: [f64; 2]) -> PerCavity<f64> {
        let mut r = PerCavity::new(0.0, 0.0);
        for c in Cavity::BOTH {
            for kind in MechKind::ALL {
                r[c] += self.p.shift_slope(c, kind, angles) * rates[kind.index()];
            }
        }
        r
    }

    pub fn torque_from_photons(&self, angles: [f64; 2], n: PerCavity<f64>) -> [f64; 2] {
        let mut out = [0.0; 2];
        for kind in MechKind::ALL {
            out[kind.index()] = -HBAR
                * (self.p.shift_slope(Cavity::Left, kind, angles) * n.left
                    + self.p.shift_slope(Cavity::Right, kind, angles) * n.right);
        }
        out
    }

    fn matrix(&self, raw: PerCavity<f64>) -> [[Complex64; 2]; 2] {
        let o = &self.p.optics;
        let k = Complex64::new(0.0, o.kappa);
        [
            [Complex64::new(-o.gamma(Cavity::Left) / 2.0, raw.left), k],
            [k, Complex64::new(-o.gamma(Cavity::Right) / 2.0, raw.right)],
        ]
    }

    /// Fields of every group, quasistatically, with the optional first-order
    /// retardation correction `a₁ = −M⁻² Ṁ a_ss`.
    pub fn quasistatic_fields(
        &self,
        t: f64,
        angles: [f64; 2],
        rates: [f64; 2],
        u: ThermalState,
    ) -> Result<Vec<PerCavity<Complex64>>> {
        let shifts = self.shifts(angles, u);
        let rate = if self.retardation {
            Some(self.shift_rates(angles, rates))
        } else {
            None
        };
        let o = &self.p.optics;
        let mut out = Vec::with_capacity(self.drive.groups.len());
        for (g, group) in self.drive.groups.iter().enumerate() {
            let s = self.drive.inputs(g, t);
            if s.left == Complex64::new(0.0, 0.0) && s.right == Complex64::new(0.0, 0.0) {
                out.push(PerCavity::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
                continue;
            }
            let raw = PerCavity::new(
                group.omega - (o.omega_left + shifts.left),
                group.omega - (o.omega_right + shifts.right),
            );
            let m = self.matrix(raw);
            let b = [
                -o.gamma_e(Cavity::Left).sqrt() * s.left,
                -o.gamma_e(Cavity::Right).sqrt() * s.right,
            ];
            let mut a = solve2(m, b)?;
            if let Some(r) = rate {
                // Δ̇ = −ω̇_c
                let md = [
                    Complex64::new(0.0, -r.left) * a[0],
                    Complex64::new(0.0, -r.right) * a[1],
                ];
                let x = solve2(m, md)?;
                let y = solve2(m, x)?;
                a[0] -= y[0];
                a[1] -= y[1];
            }
            out.push(PerCavity::new(a[0], a[1]));
        }
        Ok(out)
    }

    /// Observables and torques for given group fields.
    pub fn snapshot(&self, t: f64, angles: [f64; 2], fields: &[PerCavity<Complex64>]) -> Snapshot {
        let o = &self.p.optics;
        let mut snap = Snapshot {
            probe_transmission: 1.0,
            ..Snapshot::default()
        };
        for (g, a) in fields.iter().enumerate() {
            let w = self.drive.groups[g].omega;
            for c in Cavity::BOTH {
                let e = a[c].norm_sqr();
                snap.energy[c] += e;
                snap.n[c] += e / (HBAR * w);
            }
            snap.p_out_right += o.gamma_e(Cavity::Right) * a.right.norm_sqr();
            if Some(g) == self.drive.probe_group {
                if let Some(probe) = self.drive.probe() {
                    let s = self.drive.inputs(g, t)[probe.port];
                    let p_in = s.norm_sqr();
                    if p_in > 0.0 {
                        let out = s - o.gamma_e(probe.port).sqrt() * a[probe.port];
                        snap.probe_transmission = out.norm_sqr() / p_in;
                    }
                }
            }
        }
        for c in Cavity::BOTH {
            snap.p_abs[c] = absorbed_power(&self.p.thermal, o.gamma_i(c), snap.energy[c]);
        }
        snap.torque = self.torque_from_photons(angles, snap.n);
        snap
    }

    pub fn quasistatic_snapshot(&self, t: f64, angles: [f64; 2], rates: [f64; 2], u: ThermalState) -> Result<Snapshot> {
        let fields = self.quasistatic_fields(t, angles, rates, u)?;
        Ok(self.snapshot(t, angles, &fields))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::drive::{Carrier, Laser};
    use crate::optics::{photon_number_right, steady_state_fields, Detunings};

    #[test]
    fn static_snapshot_matches_optics() {
        let p = DeviceParams::paper_device();
        let drive = DriveConfig::pump_only(Laser::cw(Cavity::Left, 1e-6, Carrier::Alignment));
        let m = Model::new(&p, &drive, false, true);
        let th = -0.5e-3;
        let snap = m
            .quasistatic_snapshot(0.0, [th, 0.0], [0.0, 0.0], ThermalState::default())
            .unwrap();
        let w = p.alignment().0;
        let shifts = PerCavity::new(
            p.mechanical_shift(Cavity::Left, [th, 0.0]),
            p.mechanical_shift(Cavity::Right, [th, 0.0]),
        );
        let det = Detunings::from_shifts(&p, shifts, w);
        let s = PerCavity::new(Complex64::new(1e-3, 0.0), Complex64::new(0.0, 0.0));
        let f = steady_state_fields(&p, &det, s).unwrap();
        assert_eq!(snap.n.right, f.photons(Cavity::Right, w));
        let closed = photon_number_right(&p, &det, 1e-6);
        assert!((snap.n.right / closed / 2.0 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn solve2_identity() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let x = solve2([[one, zero], [zero, one]], [Complex64::new(2.0, 1.0), one]).unwrap();
        assert_eq!(x, [Complex64::new(2.0, 1.0), one]);
        assert!(solve2([[zero, zero], [zero, zero]], [one, one]).is_err());
    }
}
