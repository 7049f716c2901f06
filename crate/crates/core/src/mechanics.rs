//! Mechanical modes: damped harmonic oscillators in angle, driven by the
//! optical torque and optionally by thermal Langevin torque.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B};
use crate::params::MechMode;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    #[default]
    Vacuum,
    Air,
}

impl Environment {
    pub fn name(self) -> &'static str {
        match self {
            Environment::Vacuum => "vacuum",
            Environment::Air => "air",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "vacuum" => Some(Environment::Vacuum),
            "air" => Some(Environment::Air),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ModeState {
    pub theta: f64,
    pub theta_dot: f64,
}

impl ModeState {
    pub fn energy(&self, mode: &MechMode) -> f64 {
        0.5 * mode.inertia * (self.theta_dot * self.theta_dot + mode.omega * mode.omega * self.theta * self.theta)
    }
}

/// `τ = −ħ (gA_L n_L + gA_R n_R)` with the mode's linear couplings.
pub fn optical_torque(mode: &MechMode, n_l: f64, n_r: f64) -> f64 {
    torque_from_slopes(mode.coupling_left, mode.coupling_right, n_l, n_r)
}

/// Same as [`optical_torque`] with explicit local slopes dω/dθ, for
/// nonlinear maps.
pub fn torque_from_slopes(slope_l: f64, slope_r: f64, n_l: f64, n_r: f64) -> f64 {
    -HBAR * (slope_l * n_l + slope_r * n_r)
}

/// `(θ̇, θ̈)` with `θ̈ = −Ω²θ − Γθ̇ + τ/I`.
pub fn mech_derivatives(state: ModeState, torque: f64, mode: &MechMode, env: Environment) -> (f64, f64) {
    let w2 = mode.omega * mode.omega;
    (
        state.theta_dot,
        -w2 * state.theta - mode.gamma_m(env) * state.theta_dot + torque / mode.inertia,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseSpec {
    pub enabled: bool,
    pub temperature: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            enabled: false,
            temperature: 300.0,
            seed: 0,
        }
    }
}

/// One-sided thermal torque spectral density `4 k_B T I Γ_m` (N²m²/Hz).
pub fn torque_psd(mode: &MechMode, env: Environment, temperature: f64) -> f64 {
    4.0 * K_B * temperature * mode.inertia * mode.gamma_m(env)
}

/// Thermomechanical torque floor `√(4 k_B T I Γ_m)` in vacuum.
pub fn torque_sensitivity(mode: &MechMode, temperature: f64) -> f64 {
    torque_psd(mode, Environment::Vacuum, temperature).sqrt()
}

/// `⟨θ²⟩ = k_B T / (I Ω²)`.
pub fn equipartition_variance(mode: &MechMode, temperature: f64) -> f64 {
    K_B * temperature / (mode.inertia * mode.omega * mode.omega)
}

/// Variance of the torque held constant over one step of length `dt`.
/// A one-sided density S corresponds to a two-sided white level S/2, hence
/// `S/(2 dt)`.
pub fn step_torque_variance(noise: &NoiseSpec, mode: &MechMode, env: Environment, dt: f64) -> f64 {
    if !noise.enabled || noise.temperature <= 0.0 {
        return 0.0;
    }
    torque_psd(mode, env, noise.temperature) / (2.0 * dt)
}

/// Seeded Gaussian stream owned by one simulation run.
#[derive(Clone, Debug)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

pub fn thermal_torque_sample(
    noise: &NoiseSpec,
    mode: &MechMode,
    env: Environment,
    dt: f64,
    source: &mut NoiseSource,
) -> f64 {
    let var = step_torque_variance(noise, mode, env, dt);
    if var == 0.0 {
        return 0.0;
    }
    var.sqrt() * source.standard_normal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;
    use crate::dynamics::integrate::rk4_step;
    use crate::params::{DeviceParams, MechKind};
    use proptest::prelude::*;

    fn torsional() -> MechMode {
        DeviceParams::paper_device().torsional
    }

    fn integrate(mode: &MechMode, env: Environment, torque: f64, y0: [f64; 2], dt: f64, steps: usize) -> Vec<[f64; 2]> {
        let f = |_t: f64, y: &[f64; 2]| {
            let (a, b) = mech_derivatives(
                ModeState {
                    theta: y[0],
                    theta_dot: y[1],
                },
                torque,
                mode,
                env,
            );
            [a, b]
        };
        let mut y = y0;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(y);
        for k in 0..steps {
            y = rk4_step(&f, k as f64 * dt, &y, dt);
            out.push(y);
        }
        out
    }

    #[test]
    fn one_photon_torque() {
        let m = torsional();
        let t = optical_torque(&m, 1.0, 0.0);
        assert!(t > 0.0);
        assert!((t - 1.62e-20).abs() / 1.62e-20 < 5e-3, "{t}");
        assert_eq!(optical_torque(&m, 3.0, 3.0), 0.0);
    }

    #[test]
    fn flapping_torque_adds() {
        let p = DeviceParams::paper_device();
        let f = &p.flapping;
        assert_eq!(f.kind, MechKind::Flapping);
        let n = 5.0;
        let t = optical_torque(f, n, n);
        assert!((t.abs() - 2.0 * HBAR * f.coupling_left.abs() * n).abs() < 1e-12 * t.abs());
    }

    #[test]
    fn static_deflection() {
        let m = torsional();
        let tau = 1e-18;
        let (_, acc) = mech_derivatives(
            ModeState {
                theta: tau / (m.inertia * m.omega * m.omega),
                theta_dot: 0.0,
            },
            tau,
            &m,
            Environment::Vacuum,
        );
        assert!(acc.abs() < 1e-9 * tau / m.inertia);
    }

    #[test]
    fn undamped_energy_conserved_over_1000_periods() {
        let mut m = torsional();
        m.q = f64::INFINITY;
        let dt = m.period() / 1000.0;
        let traj = integrate(&m, Environment::Vacuum, 0.0, [1e-3, 0.0], dt, 1_000_000);
        let e = |y: &[f64; 2]| {
            ModeState {
                theta: y[0],
                theta_dot: y[1],
            }
            .energy(&m)
        };
        let e0 = e(&traj[0]);
        let e1 = e(traj.last().unwrap());
        assert!(((e1 - e0) / e0).abs() < 1e-8, "{}", (e1 - e0) / e0);
    }

    #[test]
    fn ringdown_matches_closed_form() {
        let m = torsional();
        let g = m.gamma_m(Environment::Vacuum);
        let wd = (m.omega * m.omega - g * g / 4.0).sqrt();
        let dt = m.period() / 2000.0;
        let steps = 200_000;
        let th0 = 1e-4;
        let traj = integrate(&m, Environment::Vacuum, 0.0, [th0, 0.0], dt, steps);
        let mut worst = 0.0_f64;
        for (k, y) in traj.iter().enumerate().step_by(997) {
            let t = k as f64 * dt;
            let exact = th0 * (-g * t / 2.0).exp() * ((wd * t).cos() + g / (2.0 * wd) * (wd * t).sin());
            worst = worst.max((y[0] - exact).abs());
        }
        assert!(worst < 1e-6 * th0, "{worst}");
    }

    #[test]
    fn sensitivity_scaling() {
        let m = torsional();
        let s = torque_sensitivity(&m, 300.0);
        assert!((s - 2.289e-21).abs() / 2.289e-21 < 2e-3, "{s}");
        let mut m2 = m.clone();
        m2.q *= 2.0;
        assert!((s / torque_sensitivity(&m2, 300.0) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(torque_sensitivity(&m, 0.0), 0.0);
    }

    #[test]
    fn zero_temperature_is_silent() {
        let m = torsional();
        let spec = NoiseSpec {
            enabled: true,
            temperature: 0.0,
            seed: 3,
        };
        let mut src = NoiseSource::new(3);
        for _ in 0..100 {
            assert_eq!(
                thermal_torque_sample(&spec, &m, Environment::Vacuum, 1e-9, &mut src),
                0.0
            );
        }
    }

    #[test]
    fn sample_variance() {
        let m = torsional();
        let spec = NoiseSpec {
            enabled: true,
            temperature: 300.0,
            seed: 42,
        };
        let dt = 1e-8;
        let mut src = NoiseSource::new(spec.seed);
        let n = 1_000_000;
        let mut s2 = 0.0;
        for _ in 0..n {
            let x = thermal_torque_sample(&spec, &m, Environment::Vacuum, dt, &mut src);
            s2 += x * x;
        }
        let var = s2 / n as f64;
        let want = torque_psd(&m, Environment::Vacuum, 300.0) / (2.0 * dt);
        assert!((var / want - 1.0).abs() < 0.01, "{}", var / want);
    }

    #[test]
    fn seeded_streams_repeat() {
        let mut a = NoiseSource::new(7);
        let mut b = NoiseSource::new(7);
        for _ in 0..1000 {
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
        }
    }

    #[test]
    fn free_oscillation_frequency() {
        let mut m = torsional();
        m.q = f64::INFINITY;
        let dt = m.period() / 200.0;
        let traj = integrate(&m, Environment::Vacuum, 0.0, [1e-3, 0.0], dt, 200 * 400);
        let x: Vec<f64> = traj.iter().map(|y| y[0]).collect();
        let spec = crate::analysis::spectrum::fft_spectrum(&x, dt).unwrap();
        let peak = spec.dominant_peak().unwrap();
        let f0 = m.omega / TWO_PI;
        assert!((peak - f0).abs() < 0.1 * spec.bin_width(), "{peak} vs {f0}");
    }

    proptest! {
        #[test]
        fn torsional_torque_antisymmetric(nl in 0.0f64..1e6, nr in 0.0f64..1e6) {
            let m = torsional();
            prop_assert_eq!(optical_torque(&m, nl, nr), -optical_torque(&m, nr, nl));
        }
    }
}
