//! Time-domain integrators.

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::mechanics::{thermal_torque_sample, Environment, NoiseSource, NoiseSpec};
use crate::params::{Cavity, DeviceParams, MechKind, PerCavity};
use crate::thermal::{thermal_derivatives, ThermalState};

use super::drive::DriveConfig;
use super::integrate::rk4_step;
use super::model::{Model, Snapshot};
use super::series::{TimeSeries, COLUMNS};

pub const MAX_STEPS: f64 = 1e10;
/// Full integration needs `dt · γ_max` at or below this.
pub const FULL_DT_LIMIT: f64 = 0.05;
/// Quasistatic integration needs `dt` at or below this fraction of the
/// shortest mechanical period.
pub const QUASISTATIC_DT_LIMIT: f64 = 0.01;
/// Largest `Ω_m/γ` accepted by the quasistatic integrator.
pub const QUASISTATIC_REGIME_LIMIT: f64 = 1e-2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Full,
    #[default]
    Quasistatic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Quasistatic => "quasistatic",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InitialState {
    /// `[torsional, flapping]` angles (rad).
    pub theta: [f64; 2],
    pub theta_dot: [f64; 2],
    pub u: ThermalState,
    pub photothermal_torque: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub method: Method,
    pub dt: f64,
    pub duration: f64,
    pub output_stride: usize,
    pub environment: Environment,
    pub noise: NoiseSpec,
    pub thermal_enabled: bool,
    pub retardation_enabled: bool,
    pub allow_long_runs: bool,
    /// Full method only: start the cavity fields at their quasistatic value
    /// instead of empty.
    pub steady_initial_fields: bool,
    pub init: InitialState,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            method: Method::Quasistatic,
            dt: 1e-9,
            duration: 1e-5,
            output_stride: 1,
            environment: Environment::Vacuum,
            noise: NoiseSpec::default(),
            thermal_enabled: false,
            retardation_enabled: true,
            allow_long_runs: false,
            steady_initial_fields: true,
            init: InitialState::default(),
        }
    }
}

impl SimConfig {
    pub fn steps(&self) -> Result<u64> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::StepConstraint(format!("dt must be > 0, got {:e}", self.dt)));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::StepConstraint(format!(
                "duration must be >= 0, got {:e}",
                self.duration
            )));
        }
        if self.output_stride == 0 {
            return Err(Error::StepConstraint("output stride must be >= 1".into()));
        }
        let n = (self.duration / self.dt).round();
        if n > MAX_STEPS && !self.allow_long_runs {
            return Err(Error::StepConstraint(format!(
                "{n:e} steps exceeds the {MAX_STEPS:e} guard; set sim.allow_long_runs to override"
            )));
        }
        Ok(n as u64)
    }
}

pub fn simulate(p: &DeviceParams, drive: &DriveConfig, sim: &SimConfig) -> Result<TimeSeries> {
    match sim.method {
        Method::Full => simulate_full(p, drive, sim),
        Method::Quasistatic => simulate_quasistatic(p, drive, sim),
    }
}

// Real state layout: θ_t, θ̇_t, θ_f, θ̇_f, u_L, u_R, τ_pt.
type Real = [f64; 7];

fn initial_real(sim: &SimConfig) -> Real {
    let i = &sim.init;
    [
        i.theta[0],
        i.theta_dot[0],
        i.theta[1],
        i.theta_dot[1],
        i.u.u_l,
        i.u.u_r,
        i.photothermal_torque,
    ]
}

fn unpack(y: &Real) -> ([f64; 2], [f64; 2], ThermalState) {
    ([y[0], y[2]], [y[1], y[3]], ThermalState { u_l: y[4], u_r: y[5] })
}

/// Derivative of the real state given the optical snapshot.
fn real_rhs(model: &Model, sim: &SimConfig, y: &Real, snap: &Snapshot) -> Real {
    let p = model.p;
    let env = sim.environment;
    let mut d = [0.0; 7];
    let t = &p.torsional;
    d[0] = y[1];
    d[1] = -t.omega * t.omega * y[0] - t.gamma_m(env) * y[1] + (snap.torque[0] + y[6]) / t.inertia;
    let f = &p.flapping;
    if f.enabled {
        d[2] = y[3];
        d[3] = -f.omega * f.omega * y[2] - f.gamma_m(env) * y[3] + snap.torque[1] / f.inertia;
    }
    if model.thermal {
        let du = thermal_derivatives(
            ThermalState { u_l: y[4], u_r: y[5] },
            snap.p_abs.left,
            snap.p_abs.right,
            &p.thermal,
        );
        d[4] = du.u_l;
        d[5] = du.u_r;
    }
    d[6] = p.photothermal.derivative(y[6], snap.p_abs.left, snap.p_abs.right);
    d
}

fn check_method_inputs(p: &DeviceParams, drive: &DriveConfig, sim: &SimConfig) -> Result<u64> {
    drive.validate()?;
    crate::params::validate_params(p).into_result()?;
    sim.steps()
}

fn nan_snapshot() -> Snapshot {
    Snapshot {
        torque: [f64::NAN; 2],
        ..Snapshot::default()
    }
}

struct Recorder {
    ts: TimeSeries,
    stride: u64,
    range: f64,
}

impl Recorder {
    fn new(p: &DeviceParams, sim: &SimConfig) -> Self {
        Self {
            ts: TimeSeries::with_columns(&COLUMNS),
            stride: sim.output_stride as u64,
            range: p.map.range,
        }
    }

    fn record(&mut self, k: u64, t: f64, y: &Real, snap: &Snapshot) -> Result<()> {
        if !k.is_multiple_of(self.stride) {
            return Ok(());
        }
        let row = [
            y[0],
            y[2],
            snap.n.left,
            snap.n.right,
            snap.probe_transmission,
            snap.p_out_right,
            y[4],
            y[5],
        ];
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t });
        }
        if y[0].abs() > self.range {
            self.ts.diagnostics.range_violations += 1;
            self.ts.diagnostics.first_violation_time.get_or_insert(t);
        }
        self.ts.push(t, &row);
        Ok(())
    }
}

fn apply_noise(p: &DeviceParams, sim: &SimConfig, y: &mut Real, source: &mut Option<NoiseSource>) {
    let Some(src) = source.as_mut() else { return };
    for kind in MechKind::ALL {
        let mode = p.mode(kind);
        if !mode.enabled {
            continue;
        }
        let tau = thermal_torque_sample(&sim.noise, mode, sim.environment, sim.dt, src);
        y[2 * kind.index() + 1] += tau * sim.dt / mode.inertia;
    }
}

fn noise_source(sim: &SimConfig) -> Option<NoiseSource> {
    (sim.noise.enabled && sim.noise.temperature > 0.0).then(|| NoiseSource::new(sim.noise.seed))
}

/// Cavity fields slaved to their instantaneous steady state; mechanics,
/// thermal and photothermal states integrated with RK4.
pub fn simulate_quasistatic(p: &DeviceParams, drive: &DriveConfig, sim: &SimConfig) -> Result<TimeSeries> {
    let steps = check_method_inputs(p, drive, sim)?;
    let ratio = p.worst_sideband_ratio();
    if ratio >= QUASISTATIC_REGIME_LIMIT {
        return Err(Error::Regime(format!(
            "Omega_m/gamma = {ratio:e} is not below {QUASISTATIC_REGIME_LIMIT:e}; the cavity cannot be \
             eliminated adiabatically, use the full method"
        )));
    }
    let min_period = p.enabled_modes().map(|m| m.period()).fold(f64::INFINITY, f64::min);
    if sim.dt > QUASISTATIC_DT_LIMIT * min_period {
        return Err(Error::StepConstraint(format!(
            "quasistatic dt = {:e} s exceeds {QUASISTATIC_DT_LIMIT} of the mechanical period ({:e} s)",
            sim.dt, min_period
        )));
    }

    let model = Model::new(p, drive, sim.thermal_enabled, sim.retardation_enabled);
    let snap_at = |t: f64, y: &Real| {
        let (angles, rates, u) = unpack(y);
        model
            .quasistatic_snapshot(t, angles, rates, u)
            .unwrap_or_else(|_| nan_snapshot())
    };
    let rhs = |t: f64, y: &Real| real_rhs(&model, sim, y, &snap_at(t, y));

    let mut rec = Recorder::new(p, sim);
    let mut source = noise_source(sim);
    let mut y = initial_real(sim);
    rec.record(0, 0.0, &y, &snap_at(0.0, &y))?;
    for k in 0..steps {
        let t = k as f64 * sim.dt;
        y = rk4_step(&rhs, t, &y, sim.dt);
        apply_noise(p, sim, &mut y, &mut source);
        let t1 = (k + 1) as f64 * sim.dt;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: t1 });
        }
        if (k + 1) % rec.stride == 0 {
            rec.record(k + 1, t1, &y, &snap_at(t1, &y))?;
        }
    }
    rec.ts.diagnostics.steps = steps;
    Ok(rec.ts)
}

/// Complex fields of all groups, flattened `[a_L0, a_R0, a_L1, ...]`.
type Fields = Vec<Complex64>;

fn to_groups(a: &Fields) -> Vec<PerCavity<Complex64>> {
    a.chunks(2).map(|c| PerCavity::new(c[0], c[1])).collect()
}

/// Direct integration of the coupled-mode equations together with the
/// mechanical and thermal states. Integrating-factor RK4: the diagonal
/// `i(ω_laser − ω_c0) − γ_c/2` part is propagated exactly, the rest
/// (mechanical and thermal shifts, inter-cavity coupling, drive) with RK4.
pub fn simulate_full(p: &DeviceParams, drive: &DriveConfig, sim: &SimConfig) -> Result<TimeSeries> {
    let steps = check_method_inputs(p, drive, sim)?;
    let gmax = p.optics.gamma_max();
    if sim.dt * gmax > FULL_DT_LIMIT {
        return Err(Error::StepConstraint(format!(
            "full-method dt = {:e} s exceeds {FULL_DT_LIMIT}/gamma_max = {:e} s",
            sim.dt,
            FULL_DT_LIMIT / gmax
        )));
    }
    let model = Model::new(p, drive, sim.thermal_enabled, sim.retardation_enabled);
    let o = &p.optics;
    let groups = model.drive.groups.len();

    let mut lambda = Vec::with_capacity(2 * groups);
    for g in &model.drive.groups {
        for c in Cavity::BOTH {
            lambda.push(Complex64::new(-o.gamma(c) / 2.0, g.omega - o.omega0(c)));
        }
    }
    let h = sim.dt;
    let coef: Vec<EtdCoefficients> = lambda.iter().map(|&l| EtdCoefficients::new(l, h)).collect();
    let sq_e = PerCavity::new(o.gamma_e(Cavity::Left).sqrt(), o.gamma_e(Cavity::Right).sqrt());
    let ik = Complex64::new(0.0, o.kappa);

    let rhs = |t: f64, a: &Fields, y: &Real| -> (Fields, Real) {
        let (angles, _, u) = unpack(y);
        let shifts = model.shifts(angles, u);
        let mut da = Vec::with_capacity(a.len());
        for g in 0..groups {
            let s = model.drive.inputs(g, t);
            let (al, ar) = (a[2 * g], a[2 * g + 1]);
            da.push(Complex64::new(0.0, -shifts.left) * al + ik * ar + sq_e.left * s.left);
            da.push(Complex64::new(0.0, -shifts.right) * ar + ik * al + sq_e.right * s.right);
        }
        let snap = model.snapshot(t, angles, &to_groups(a));
        (da, real_rhs(&model, sim, y, &snap))
    };

    let mut y = initial_real(sim);
    let mut a: Fields = if sim.steady_initial_fields {
        let (angles, rates, u) = unpack(&y);
        let init = Model::new(p, drive, sim.thermal_enabled, true);
        init.quasistatic_fields(0.0, angles, rates, u)?
            .into_iter()
            .flat_map(|f| [f.left, f.right])
            .collect()
    } else {
        vec![Complex64::new(0.0, 0.0); 2 * groups]
    };

    let mut rec = Recorder::new(p, sim);
    let mut source = noise_source(sim);
    let snap0 = model.snapshot(0.0, unpack(&y).0, &to_groups(&a));
    rec.record(0, 0.0, &y, &snap0)?;

    let n = a.len();
    let mut a2 = vec![Complex64::new(0.0, 0.0); n];
    let mut a3 = vec![Complex64::new(0.0, 0.0); n];
    let mut a4 = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..steps {
        let t = k as f64 * h;
        let (k1a, k1y) = rhs(t, &a, &y);
        for i in 0..n {
            a2[i] = coef[i].e_half * a[i] + coef[i].q * k1a[i];
        }
        let y2 = add(&y, &k1y, 0.5 * h);
        let (k2a, k2y) = rhs(t + 0.5 * h, &a2, &y2);
        for i in 0..n {
            a3[i] = coef[i].e_half * a[i] + coef[i].q * k2a[i];
        }
        let y3 = add(&y, &k2y, 0.5 * h);
        let (k3a, k3y) = rhs(t + 0.5 * h, &a3, &y3);
        for i in 0..n {
            a4[i] = coef[i].e_half * a2[i] + coef[i].q * (2.0 * k3a[i] - k1a[i]);
        }
        let y4 = add(&y, &k3y, h);
        let (k4a, k4y) = rhs(t + h, &a4, &y4);
        for i in 0..n {
            let c = &coef[i];
            a[i] = c.e_full * a[i] + c.f1 * k1a[i] + 2.0 * c.f2 * (k2a[i] + k3a[i]) + c.f3 * k4a[i];
        }
        for i in 0..7 {
            y[i] += h / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
        apply_noise(p, sim, &mut y, &mut source);

        let t1 = (k + 1) as f64 * h;
        if (k + 1) % rec.stride == 0 {
            if a.iter().any(|z| !z.is_finite()) || y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { time: t1 });
            }
            let snap = model.snapshot(t1, unpack(&y).0, &to_groups(&a));
            rec.record(k + 1, t1, &y, &snap)?;
        }
    }
    rec.ts.diagnostics.steps = steps;
    Ok(rec.ts)
}

/// Cox-Matthews ETDRK4 weights for `da/dt = λa + N`, exact for constant
/// `N`. The φ-functions are averaged over a unit circle around `λh` so small
/// `|λh|` does not cancel catastrophically.
struct EtdCoefficients {
    e_half: Complex64,
    e_full: Complex64,
    q: Complex64,
    f1: Complex64,
    f2: Complex64,
    f3: Complex64,
}

impl EtdCoefficients {
    const CONTOUR_POINTS: usize = 32;

    fn new(lambda: Complex64, h: f64) -> Self {
        let c = lambda * h;
        let m = Self::CONTOUR_POINTS;
        let mean = |f: &dyn Fn(Complex64) -> Complex64| {
            let sum: Complex64 = (0..m)
                .map(|j| f(c + Complex64::from_polar(1.0, TWO_PI * (j as f64 + 0.5) / m as f64)))
                .sum();
            sum / m as f64 * h
        };
        Self {
            e_half: (c / 2.0).exp(),
            e_full: c.exp(),
            q: mean(&|r| ((r / 2.0).exp() - 1.0) / r),
            f1: mean(&|r| (-4.0 - r + r.exp() * (4.0 - 3.0 * r + r * r)) / (r * r * r)),
            f2: mean(&|r| (2.0 + r + r.exp() * (r - 2.0)) / (r * r * r)),
            f3: mean(&|r| (-4.0 - 3.0 * r - r * r + r.exp() * (4.0 - r)) / (r * r * r)),
        }
    }
}

fn add(y: &Real, k: &Real, s: f64) -> Real {
    let mut out = *y;
    for i in 0..7 {
        out[i] += s * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::drive::{Carrier, Laser};
    use crate::dynamics::series::{N_RIGHT, THETA_TORSIONAL};
    use crate::optics::{steady_state_fields, Detunings};

    fn quiet(p: &DeviceParams) -> DeviceParams {
        let mut p = p.clone();
        p.flapping.enabled = false;
        p
    }

    #[test]
    fn rejects_large_steps() {
        let p = DeviceParams::paper_device();
        let drive = DriveConfig::default();
        let sim = SimConfig {
            method: Method::Full,
            dt: 1e-9,
            duration: 1e-8,
            ..SimConfig::default()
        };
        assert!(matches!(simulate(&p, &drive, &sim), Err(Error::StepConstraint(_))));
        let sim = SimConfig {
            dt: 1e-7,
            duration: 1e-6,
            ..SimConfig::default()
        };
        assert!(matches!(simulate(&p, &drive, &sim), Err(Error::StepConstraint(_))));
        let sim = SimConfig {
            dt: 1e-12,
            duration: 1.0,
            ..SimConfig::default()
        };
        assert!(matches!(simulate(&p, &drive, &sim), Err(Error::StepConstraint(_))));
    }

    #[test]
    fn quasistatic_refuses_resolved_sideband() {
        let p = DeviceParams::paper_device().reduced_stiffness(10.0);
        let sim = SimConfig {
            dt: 1e-9,
            duration: 1e-8,
            ..SimConfig::default()
        };
        assert!(matches!(
            simulate_quasistatic(&p, &DriveConfig::default(), &sim),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn static_beam_matches_optics() {
        let mut p = quiet(&DeviceParams::paper_device());
        // Stiffen the beam so it stays put.
        p.torsional.inertia *= 1e12;
        let drive = DriveConfig::pump_only(Laser::cw(Cavity::Left, 1e-6, Carrier::Normalized(0.3)));
        let th = 2e-4;
        let sim = SimConfig {
            dt: 1e-9,
            duration: 2e-8,
            init: InitialState {
                theta: [th, 0.0],
                ..InitialState::default()
            },
            ..SimConfig::default()
        };
        let ts = simulate_quasistatic(&p, &drive, &sim).unwrap();
        let w = drive.pump.as_ref().unwrap().omega(&p);
        let det = Detunings::from_shifts(
            &p,
            PerCavity::new(p.map.shift(Cavity::Left, th), p.map.shift(Cavity::Right, th)),
            w,
        );
        let s = PerCavity::new(Complex64::new(1e-3, 0.0), Complex64::new(0.0, 0.0));
        let want = steady_state_fields(&p, &det, s).unwrap().photons(Cavity::Right, w);
        assert_eq!(ts.column(N_RIGHT).unwrap()[0], want);
    }

    #[test]
    fn undriven_full_ringdown() {
        let mut p = quiet(&DeviceParams::paper_device().reduced_stiffness(1e3));
        p.optics.kappa = 0.0;
        let period = p.torsional.period();
        let dt = 0.05 / p.optics.gamma_max();
        let sim = SimConfig {
            method: Method::Full,
            dt,
            duration: 3.0 * period,
            output_stride: 100,
            init: InitialState {
                theta: [1e-6, 0.0],
                ..InitialState::default()
            },
            ..SimConfig::default()
        };
        let ts = simulate_full(&p, &DriveConfig::default(), &sim).unwrap();
        let th = ts.column(THETA_TORSIONAL).unwrap();
        let g = p.torsional.gamma_m(Environment::Vacuum);
        let wd = (p.torsional.omega.powi(2) - g * g / 4.0).sqrt();
        for (k, &v) in th.iter().enumerate().step_by(37) {
            let t = ts.t[k];
            let exact = 1e-6 * (-g * t / 2.0).exp() * ((wd * t).cos() + g / (2.0 * wd) * (wd * t).sin());
            assert!((v - exact).abs() < 1e-12, "{v} {exact}");
        }
    }

    #[test]
    fn full_fields_relax_to_steady_state() {
        let p = quiet(&DeviceParams::paper_device().reduced_stiffness(1e3));
        let mut q = p.clone();
        q.torsional.inertia *= 1e15;
        let drive = DriveConfig::pump_only(Laser::cw(Cavity::Left, 1e-6, Carrier::Normalized(0.5)));
        let dt = 0.05 / q.optics.gamma_max();
        let sim = SimConfig {
            method: Method::Full,
            dt,
            duration: 4000.0 * dt,
            output_stride: 4000,
            steady_initial_fields: false,
            ..SimConfig::default()
        };
        let ts = simulate_full(&q, &drive, &sim).unwrap();
        let n_end = *ts.column(N_RIGHT).unwrap().last().unwrap();
        let w = drive.pump.as_ref().unwrap().omega(&q);
        let det = Detunings::from_shifts(&q, PerCavity::new(0.0, 0.0), w);
        let s = PerCavity::new(Complex64::new(1e-3, 0.0), Complex64::new(0.0, 0.0));
        let want = steady_state_fields(&q, &det, s).unwrap().photons(Cavity::Right, w);
        assert!((n_end / want - 1.0).abs() < 1e-6, "{n_end} {want}");
    }

    #[test]
    fn zero_drive_full_and_quasistatic_agree_on_ringdown() {
        let p = quiet(&DeviceParams::paper_device());
        let sim = SimConfig {
            dt: p.torsional.period() / 500.0,
            duration: 5.0 * p.torsional.period(),
            init: InitialState {
                theta: [1e-4, 0.0],
                ..InitialState::default()
            },
            ..SimConfig::default()
        };
        let ts = simulate_quasistatic(&p, &DriveConfig::default(), &sim).unwrap();
        assert_eq!(ts.len(), 2501);
        assert!(ts.column(N_RIGHT).unwrap().iter().all(|&n| n == 0.0));
    }
}
