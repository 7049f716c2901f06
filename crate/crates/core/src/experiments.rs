//! Named scenarios behind the `seesaw` subcommands.
//!
//! Each scenario takes a resolved [`Config`] and returns a JSON summary plus
//! CSV artifacts. Everything a scenario needs beyond the config is a constant
//! here, so re-running from the config echoed into any artifact reproduces
//! the same numbers.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::shuttle::trajectory_csv;
use crate::analysis::{
    count_shuttled_photons, detuning_trajectory, ringdown_fit, series_spectrum, strobo_reconstruct, trajectories_cross,
    Reconstruction, ShuttleOptions, ShuttleStats, Spectrum, Trace,
};
use crate::config::Config;
use crate::constants::TWO_PI;
use crate::dynamics::series::{content_hash, PROBE_TRANSMISSION, THETA_TORSIONAL};
use crate::dynamics::{
    backaction_rates, dressed_cavity, find_limit_cycle, find_threshold, simulate, static_equilibrium, Carrier,
    CycleOptions, DriveConfig, Laser, LimitCycle, Method, SimConfig, TimeSeries, Waveform,
};
use crate::error::{Error, Result};
use crate::mechanics::{equipartition_variance, torque_sensitivity, Environment};
use crate::optics::{input_amplitude, shuttle_map, steady_state_fields, Detunings};
use crate::params::{Cavity, DeviceParams, MechKind, PerCavity};

pub const NAMES: [&str; 8] = [
    "spectrum",
    "impulse",
    "selfosc",
    "shuttle",
    "map",
    "noise",
    "threshold",
    "strobo",
];

/// Pump pulse of the impulse experiments: 10 ns at 4 mW peak.
pub const PULSE_WIDTH: f64 = 10e-9;
pub const PULSE_POWER: f64 = 4e-3;
/// Readout probe for impulse runs.
pub const IMPULSE_PROBE_POWER: f64 = 30e-9;
pub const IMPULSE_PROBE_DELTA: f64 = -0.8;
pub const SELFOSC_PUMP_POWER: f64 = 3.4e-6;
pub const THRESHOLD_PUMP_POWER: f64 = 0.135e-6;
pub const STROBO_PROBE_POWER: f64 = 2.3e-9;
/// Probe detunings for the stroboscopic scan, in units of the probed
/// cavity's `1/τ`.
pub const STROBO_DELTAS: [f64; 41] = {
    let mut d = [0.0; 41];
    let mut k = 0;
    while k < 41 {
        d[k] = -10.0 + 0.5 * k as f64;
        k += 1;
    }
    d
};
/// Linewidth-to-Ω_m ratio of the reduced-stiffness instance.
pub const REDUCED_RATIO: f64 = 1e3;
pub const MAP_HALF_WIDTH: f64 = 6.0;
pub const MAP_POINTS: usize = 241;
pub const THRESHOLD_BRACKET: (f64, f64) = (1e-10, 1e-1);

/// Preset used when neither `--preset` nor `--config` is given.
pub fn default_preset(name: &str) -> &'static str {
    match name {
        "selfosc" | "shuttle" | "strobo" | "threshold" => "paper_device_photothermal",
        _ => "paper_device",
    }
}

fn check_name(name: &str) -> Result<()> {
    if NAMES.contains(&name) {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "unknown experiment '{name}' (known: {})",
            NAMES.join(", ")
        )))
    }
}

fn torsional_period(p: &DeviceParams) -> f64 {
    p.torsional.period()
}

fn shortest_period(p: &DeviceParams) -> f64 {
    p.enabled_modes().map(|m| m.period()).fold(f64::INFINITY, f64::min)
}

/// Preset plus the scenario's drive and integration settings.
pub fn default_config(name: &str, preset: Option<&str>) -> Result<Config> {
    check_name(name)?;
    let mut c = Config::from_preset(preset.unwrap_or(default_preset(name)))?;
    let p = c.params.clone();
    let t_m = torsional_period(&p);
    let t_min = shortest_period(&p);
    let pulse = Laser {
        port: Cavity::Left,
        power: PULSE_POWER,
        carrier: Carrier::Normalized(0.0),
        waveform: Waveform::Pulse {
            start: 0.0,
            width: PULSE_WIDTH,
        },
    };
    let readout = Laser::cw(
        Cavity::Right,
        IMPULSE_PROBE_POWER,
        Carrier::Normalized(IMPULSE_PROBE_DELTA),
    );
    let cw_pump = |power| Laser::cw(Cavity::Left, power, Carrier::Alignment);
    match name {
        "spectrum" => {
            c.set_pump(true, pulse);
            c.set_probe(true, readout);
            c.sim.dt = 10e-9;
            c.sim.duration = 400e-6;
            c.sim.environment = Environment::Vacuum;
            c.sim.thermal_enabled = false;
        }
        "impulse" => {
            c.set_pump(true, pulse);
            c.set_probe(true, readout);
            c.sim.dt = 1e-9;
            c.sim.duration = 10e-6;
            c.sim.output_stride = 5;
            c.sim.environment = Environment::Air;
            c.sim.thermal_enabled = true;
        }
        "selfosc" => {
            c.set_pump(true, cw_pump(SELFOSC_PUMP_POWER));
            c.sim.dt = t_m / 200.0;
            c.sim.duration = 100.0 * t_m;
            c.sim.output_stride = 4;
        }
        "shuttle" => {
            c.set_pump(true, cw_pump(THRESHOLD_PUMP_POWER));
            c.sim.dt = t_m / 400.0;
            c.sim.duration = 12.0 * t_m;
        }
        "threshold" => {
            c.set_pump(true, cw_pump(THRESHOLD_PUMP_POWER));
        }
        "strobo" => {
            c.set_pump(true, cw_pump(SELFOSC_PUMP_POWER));
            c.set_probe(
                true,
                Laser::cw(Cavity::Right, STROBO_PROBE_POWER, Carrier::Normalized(0.0)),
            );
            c.sim.dt = t_m / 400.0;
            c.sim.duration = 6.0 * t_m;
        }
        "map" => {
            c.set_pump(true, cw_pump(THRESHOLD_PUMP_POWER));
        }
        "noise" => {
            c.sim.dt = (t_min / 200.0).min(10e-9);
            c.sim.duration = 20e-3;
            c.sim.output_stride = 100;
            c.sim.environment = Environment::Air;
            c.sim.noise.enabled = true;
        }
        _ => unreachable!(),
    }
    Ok(c)
}

/// A file produced by a scenario.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub experiment: String,
    pub summary: Value,
    pub artifacts: Vec<Artifact>,
}

fn annotated_csv(title: &str, cfg: &Config, body: &str) -> String {
    let mut out = format!("# seesaw {title}\n# seed: {}\n", cfg.sim.noise.seed);
    out.push_str(&format!("# content-sha256: {}\n", content_hash(body)));
    for line in cfg.to_text().lines() {
        out.push_str("#% ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(body);
    out
}

fn series_artifact(file: &str, cfg: &Config, ts: &TimeSeries) -> Artifact {
    let meta = vec![
        ("seed".to_string(), cfg.sim.noise.seed.to_string()),
        ("method".to_string(), cfg.sim.method.name().to_string()),
        (
            "range_violations".to_string(),
            ts.diagnostics.range_violations.to_string(),
        ),
    ];
    Artifact {
        file: file.into(),
        contents: ts.to_csv(&meta, &cfg.to_text()),
    }
}

fn csv_artifact(file: &str, title: &str, cfg: &Config, body: &str) -> Artifact {
    Artifact {
        file: file.into(),
        contents: annotated_csv(title, cfg, body),
    }
}

/// Thread pool honouring `SEESAW_THREADS`.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("SEESAW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            b = b.num_threads(n);
        }
    }
    b.build().map_err(|e| Error::Validation(format!("thread pool: {e}")))
}

pub fn run(name: &str, cfg: &Config) -> Result<Outcome> {
    check_name(name)?;
    cfg.validate()?;
    let (summary, artifacts) = match name {
        "spectrum" => spectrum(cfg)?,
        "impulse" => impulse(cfg)?,
        "selfosc" => selfosc(cfg)?,
        "shuttle" => shuttle(cfg)?,
        "map" => map(cfg)?,
        "noise" => noise(cfg)?,
        "threshold" => threshold(cfg)?,
        "strobo" => strobo(cfg)?,
        _ => unreachable!(),
    };
    let summary = json!({
        "experiment": name,
        "seed": cfg.sim.noise.seed,
        "results": summary,
        "config": cfg.to_json(),
    });
    Ok(Outcome {
        experiment: name.into(),
        summary,
        artifacts,
    })
}

impl Outcome {
    /// Writes the artifacts and `<experiment>_summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for a in &self.artifacts {
            let path = dir.join(&a.file);
            std::fs::write(&path, &a.contents)?;
            written.push(path);
        }
        let path = dir.join(format!("{}_summary.json", self.experiment));
        std::fs::write(&path, serde_json::to_string_pretty(&self.summary)? + "\n")?;
        written.push(path);
        Ok(written)
    }
}

type Parts = (Value, Vec<Artifact>);

fn peaks_khz(s: &Spectrum, count: usize) -> Vec<f64> {
    let mut p = s.peaks(0.02, count);
    p.sort_by(f64::total_cmp);
    p.into_iter().map(|f| f / 1e3).collect()
}

/// Pulse response; the probe transmission relative to its value before the
/// pulse is the measured signal.
pub fn impulse_series(cfg: &Config) -> Result<TimeSeries> {
    simulate(&cfg.params, &cfg.drive(), &cfg.sim)
}

fn spectrum(cfg: &Config) -> Result<Parts> {
    let ts = impulse_series(cfg)?;
    let spec = series_spectrum(&ts, PROBE_TRANSMISSION)?;
    let theta_spec = series_spectrum(&ts, THETA_TORSIONAL)?;
    let ringdowns = backaction_ringdowns(&cfg.params, 20.0)?;
    let summary = json!({
        "peaks_khz": peaks_khz(&spec, 2),
        "bin_width_hz": spec.bin_width(),
        "torsional_theta_peak_khz": theta_spec.dominant_peak().map(|f| f / 1e3),
        "parseval_error": spec.parseval_error,
        "backaction_ringdowns": ringdowns,
    });
    Ok((
        summary,
        vec![
            series_artifact("spectrum_timeseries.csv", cfg, &ts),
            csv_artifact("spectrum_probe.csv", "probe transmission spectrum", cfg, &spec.to_csv()),
        ],
    ))
}

/// Sign change and extremum of the late (thermal) part of an impulse
/// response, measured from the pre-pulse baseline.
#[derive(Clone, Debug, Serialize)]
pub struct ImpulseTiming {
    pub baseline: f64,
    pub early_peak: f64,
    pub sign_change_time: Option<f64>,
    pub late_peak_time: Option<f64>,
    pub late_peak: f64,
}

pub fn impulse_timing(ts: &TimeSeries) -> Result<ImpulseTiming> {
    let x = ts.require(PROBE_TRANSMISSION)?;
    let base = x[0];
    let r: Vec<f64> = x.iter().map(|v| v - base).collect();
    let k0 = r.iter().position(|v| v.abs() > 0.0).unwrap_or(r.len());
    let early_sign = r.get(k0).copied().unwrap_or(0.0).signum();
    let mut sign_change = None;
    let mut late = None::<usize>;
    for k in k0 + 1..r.len() {
        if sign_change.is_none() && r[k - 1] * early_sign > 0.0 && r[k] * early_sign <= 0.0 {
            // Linear interpolation between the bracketing samples.
            let f = r[k - 1] / (r[k - 1] - r[k]);
            sign_change = Some(ts.t[k - 1] + f * (ts.t[k] - ts.t[k - 1]));
        }
        if sign_change.is_some() && late.is_none_or(|j| r[k].abs() > r[j].abs()) {
            late = Some(k);
        }
    }
    let early_peak = r.iter().map(|v| v * early_sign).fold(0.0, f64::max) * early_sign;
    Ok(ImpulseTiming {
        baseline: base,
        early_peak,
        sign_change_time: sign_change,
        late_peak_time: late.map(|k| ts.t[k]),
        late_peak: late.map_or(0.0, |k| r[k]),
    })
}

fn impulse(cfg: &Config) -> Result<Parts> {
    let ts = impulse_series(cfg)?;
    let timing = impulse_timing(&ts)?;
    let spec = series_spectrum(&ts, PROBE_TRANSMISSION)?;
    let summary = json!({
        "environment": cfg.sim.environment.name(),
        "timing": timing,
        "peaks_khz": peaks_khz(&spec, 2),
        "bin_width_hz": spec.bin_width(),
    });
    Ok((
        summary,
        vec![
            series_artifact("impulse_timeseries.csv", cfg, &ts),
            csv_artifact(
                "impulse_spectrum.csv",
                "probe transmission spectrum",
                cfg,
                &spec.to_csv(),
            ),
        ],
    ))
}

/// Fitted ring-down of the reduced-stiffness instance under a detuned probe,
/// with the small-signal prediction.
#[derive(Clone, Debug, Serialize)]
pub struct RingdownCase {
    pub label: String,
    pub probe_delta: f64,
    pub n_right: f64,
    pub gamma_m: f64,
    pub gamma_fit: f64,
    pub omega_fit: f64,
    pub gamma_opt_fit: f64,
    pub gamma_opt_predicted: f64,
}

pub const RINGDOWN_PROBE_POWER: f64 = 23e-9;
pub const RINGDOWN_PROBE_DELTA: f64 = 0.8;
pub const RINGDOWN_AMPLITUDE: f64 = 5e-7;

/// `reduced_stiffness(REDUCED_RATIO)` of `base`, torsional mode only.
pub fn reduced_instance(base: &DeviceParams) -> DeviceParams {
    let mut p = base.reduced_stiffness(REDUCED_RATIO);
    p.flapping.enabled = false;
    p.photothermal.enabled = false;
    p
}

/// Full-integrator settings for the reduced instance: `dt = 0.05/γ_max`,
/// about 200 output samples per mechanical period.
pub fn reduced_sim(p: &DeviceParams, cycles: f64) -> SimConfig {
    let dt = 0.05 / p.optics.gamma_max();
    let per_cycle = (p.torsional.period() / dt).round();
    SimConfig {
        method: Method::Full,
        dt,
        duration: cycles * per_cycle * dt,
        output_stride: (per_cycle / 200.0).floor().max(1.0) as usize,
        ..SimConfig::default()
    }
}

fn ringdown_case(p: &DeviceParams, label: &str, delta: Option<f64>, cycles: f64) -> Result<RingdownCase> {
    let drive = DriveConfig {
        probe: delta.map(|d| Laser::cw(Cavity::Right, RINGDOWN_PROBE_POWER, Carrier::Normalized(d))),
        ..DriveConfig::default()
    };
    let eq = static_equilibrium(p, &drive, false)?;
    let mut sim = reduced_sim(p, cycles);
    sim.init = eq.initial_state();
    sim.init.theta[0] += RINGDOWN_AMPLITUDE;
    let ts = simulate(p, &drive, &sim)?;
    let fit = ringdown_fit(&ts.t, ts.require(THETA_TORSIONAL)?)?;
    let gamma_m = p.torsional.gamma_m(Environment::Vacuum);
    let (n_right, predicted) = match delta {
        Some(_) => {
            let w = drive.probe.as_ref().unwrap().omega(p);
            let shifts = PerCavity::new(
                p.mechanical_shift(Cavity::Left, eq.angles),
                p.mechanical_shift(Cavity::Right, eq.angles),
            );
            let det = Detunings::from_shifts(p, shifts, w);
            let (d_eff, g_eff) = dressed_cavity(p, &det, Cavity::Right);
            let n = eq.snapshot.n.right;
            // The formula reads τ from the params, so hand it the dressed width.
            let mut q = p.clone();
            let s = g_eff / q.optics.gamma(Cavity::Right);
            q.optics.gamma_i_right *= s;
            q.optics.gamma_e_right *= s;
            (n, backaction_rates(&q, Cavity::Right, d_eff, n, &p.torsional).gamma_opt)
        }
        None => (0.0, 0.0),
    };
    Ok(RingdownCase {
        label: label.into(),
        probe_delta: delta.unwrap_or(f64::NAN),
        n_right,
        gamma_m,
        gamma_fit: fit.gamma,
        omega_fit: fit.omega,
        gamma_opt_fit: fit.gamma - gamma_m,
        gamma_opt_predicted: predicted,
    })
}

/// Ring-downs without probe, with a blue-detuned and with a red-detuned
/// probe, on the reduced-stiffness version of `base`.
pub fn backaction_ringdowns(base: &DeviceParams, cycles: f64) -> Result<Vec<RingdownCase>> {
    let p = reduced_instance(base);
    let cases = [
        ("none", None),
        ("blue", Some(RINGDOWN_PROBE_DELTA)),
        ("red", Some(-RINGDOWN_PROBE_DELTA)),
    ];
    thread_pool()?.install(|| {
        cases
            .par_iter()
            .map(|(label, d)| ringdown_case(&p, label, *d, cycles))
            .collect()
    })
}

/// Quasistatic run started on the energy-balance orbit.
#[derive(Clone, Debug, Serialize)]
pub struct CycleRun {
    pub cycle: Option<LimitCycle>,
    pub start_amplitude: f64,
    pub start_center: f64,
}

/// Initial state on the limit cycle of the configured pump, or, below
/// threshold, on the orbit whose extremum just touches the alignment angle.
pub fn cycle_start(cfg: &Config) -> Result<(Config, CycleRun)> {
    let p = &cfg.params;
    let drive = cfg.drive();
    let eq = static_equilibrium(p, &drive, cfg.sim.thermal_enabled)?;
    let opts = CycleOptions {
        environment: cfg.sim.environment,
        ..CycleOptions::default()
    };
    let lc = find_limit_cycle(p, &drive, MechKind::Torsional, opts)?;
    let (amp, center) = if lc.converged {
        (lc.amplitude, lc.center)
    } else {
        let (_, theta_a) = p.alignment();
        ((theta_a - eq.angles[0]).abs(), eq.angles[0])
    };
    let mut out = cfg.clone();
    out.sim.init = eq.initial_state();
    out.sim.init.theta[0] = center + amp * alignment_side(p);
    Ok((
        out,
        CycleRun {
            cycle: lc.converged.then_some(lc),
            start_amplitude: amp,
            start_center: center,
        },
    ))
}

/// Sign of the alignment angle, so the first swing heads toward it.
fn alignment_side(p: &DeviceParams) -> f64 {
    let s = p.alignment().1.signum();
    if s == 0.0 {
        1.0
    } else {
        s
    }
}

fn amplitude_drift(ts: &TimeSeries, p: &DeviceParams) -> Result<(f64, f64)> {
    let th = ts.require(THETA_TORSIONAL)?;
    let per = (torsional_period(p) / ts.stride()?).round() as usize;
    let n = th.len();
    if n < 4 * per {
        return Err(Error::NoCycles("run shorter than four periods".into()));
    }
    let half_swing = |s: &[f64]| {
        let (lo, hi) = s
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        0.5 * (hi - lo)
    };
    Ok((half_swing(&th[per..3 * per]), half_swing(&th[n - 2 * per..])))
}

fn selfosc(cfg: &Config) -> Result<Parts> {
    let (run_cfg, start) = cycle_start(cfg)?;
    let ts = simulate(&run_cfg.params, &run_cfg.drive(), &run_cfg.sim)?;
    let (a0, a1) = amplitude_drift(&ts, &run_cfg.params)?;
    let stats = count_shuttled_photons(
        &ts.after(2.0 * torsional_period(&cfg.params)),
        &cfg.params,
        ShuttleOptions::default(),
    )
    .ok();
    let summary = json!({
        "limit_cycle": start,
        "residual": start.cycle.as_ref().map(|c| c.relative_residual()),
        "amplitude_early": a0,
        "amplitude_late": a1,
        "amplitude_drift": a1 / a0 - 1.0,
        "alignment_angle": cfg.params.alignment().1,
        "shuttle": stats,
    });
    Ok((summary, vec![series_artifact("selfosc_timeseries.csv", &run_cfg, &ts)]))
}

/// Shuttle run: orbit, statistics and detuning-plane path.
pub fn shuttle_run(cfg: &Config) -> Result<(Config, CycleRun, TimeSeries, ShuttleStats)> {
    let (run_cfg, start) = cycle_start(cfg)?;
    let ts = simulate(&run_cfg.params, &run_cfg.drive(), &run_cfg.sim)?;
    let settled = ts.after(2.0 * torsional_period(&cfg.params));
    let stats = count_shuttled_photons(&settled, &cfg.params, ShuttleOptions::default())?;
    Ok((run_cfg, start, settled, stats))
}

fn shuttle(cfg: &Config) -> Result<Parts> {
    let (run_cfg, start, ts, stats) = shuttle_run(cfg)?;
    let pump = cfg
        .drive()
        .pump
        .ok_or_else(|| Error::Validation("shuttle needs a pump".into()))?;
    let path = detuning_trajectory(&ts, &cfg.params, pump.omega(&cfg.params))?;
    let summary = json!({
        "pump_power_w": pump.power,
        "orbit": start,
        "alignment_angle": cfg.params.alignment().1,
        "n_tr": stats.n_tr,
        "n_tr_std": stats.n_tr_std,
        "peaks_per_cycle": stats.peaks_per_cycle,
        "cycles": stats.cycles,
        "cycle_period_s": stats.cycle_period,
        "reference_n_tr": 1000.0,
    });
    Ok((
        summary,
        vec![
            series_artifact("shuttle_timeseries.csv", &run_cfg, &ts),
            csv_artifact(
                "shuttle_trajectory.csv",
                "detuning-plane trajectory",
                &run_cfg,
                &trajectory_csv(&path),
            ),
        ],
    ))
}

pub fn map_grid() -> Vec<f64> {
    (0..MAP_POINTS)
        .map(|k| -MAP_HALF_WIDTH + 2.0 * MAP_HALF_WIDTH * k as f64 / (MAP_POINTS - 1) as f64)
        .collect()
}

fn map(cfg: &Config) -> Result<Parts> {
    let p = &cfg.params;
    let pump = cfg
        .drive()
        .pump
        .ok_or_else(|| Error::Validation("map needs a pump laser".into()))?;
    let grid = map_grid();
    let w = pump.omega(p);
    let norm = shuttle_map(p, &grid, &grid, pump.power, w, true)?;
    let abs = shuttle_map(p, &[0.0], &[0.0], pump.power, w, false)?;
    let c = MAP_POINTS / 2;
    let summary = json!({
        "center_value": norm.at(c, c),
        "peak_photons": abs.at(0, 0),
        "grid_points": MAP_POINTS,
        "half_width": MAP_HALF_WIDTH,
    });
    Ok((
        summary,
        vec![csv_artifact(
            "map_normalized.csv",
            "normalized right-cavity photon map",
            cfg,
            &norm.to_csv(),
        )],
    ))
}

fn noise(cfg: &Config) -> Result<Parts> {
    let p = &cfg.params;
    let ts = simulate(p, &cfg.drive(), &cfg.sim)?;
    // Skip ten slow relaxation times of the damped mode.
    let m = &p.torsional;
    let env = cfg.sim.environment;
    let q = m.quality(env);
    let slow = if q > 0.5 {
        2.0 / m.gamma_m(env)
    } else {
        1.0 / (m.omega * (1.0 / (2.0 * q) - (1.0 / (4.0 * q * q) - 1.0).sqrt()))
    };
    let settled = ts.after(10.0 * slow);
    let th = settled.require(THETA_TORSIONAL)?;
    let mean = th.iter().sum::<f64>() / th.len() as f64;
    let var = th.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / th.len() as f64;
    let expect = equipartition_variance(m, cfg.sim.noise.temperature);
    let sens = torque_sensitivity(m, cfg.sim.noise.temperature);
    let spec = series_spectrum(&settled, THETA_TORSIONAL)?;
    let summary = json!({
        "environment": env.name(),
        "theta_variance": var,
        "equipartition_variance": expect,
        "variance_ratio": var / expect,
        "samples": th.len(),
        "torque_sensitivity_nm_per_rthz": sens,
        "reference_torque_sensitivity": 9.7e-21,
        "sensitivity_ratio_to_reference": sens / 9.7e-21,
    });
    Ok((
        summary,
        vec![
            series_artifact("noise_timeseries.csv", cfg, &ts),
            csv_artifact(
                "noise_theta_spectrum.csv",
                "torsional angle spectrum",
                cfg,
                &spec.to_csv(),
            ),
        ],
    ))
}

fn threshold_json(r: Result<crate::dynamics::Threshold>) -> Result<Value> {
    match r {
        Ok(t) => Ok(serde_json::to_value(t)?),
        Err(Error::NoThreshold { lo, hi }) => Ok(json!({ "power": null, "no_threshold_in": [lo, hi] })),
        Err(e) => Err(e),
    }
}

fn threshold(cfg: &Config) -> Result<Parts> {
    let drive = cfg.drive();
    let pump = drive
        .pump
        .clone()
        .ok_or_else(|| Error::Validation("threshold needs a pump laser".into()))?;
    let opts = CycleOptions {
        environment: cfg.sim.environment,
        ..CycleOptions::default()
    };
    let mut rp = cfg.params.clone();
    rp.photothermal.enabled = false;

    let configured = cfg.params.photothermal.enabled;
    let (with_pt, rp_only) = thread_pool()?.install(|| {
        rayon::join(
            || configured.then(|| find_threshold(&cfg.params, &drive, MechKind::Torsional, THRESHOLD_BRACKET, opts)),
            || find_threshold(&rp, &drive, MechKind::Torsional, THRESHOLD_BRACKET, opts),
        )
    });
    // Small-signal estimate at the rest position: the power where the
    // radiation-pressure damping of the pumped cavity cancels Γ_m.
    let w = pump.omega(&rp);
    let det = Detunings::from_shifts(&rp, PerCavity::new(0.0, 0.0), w);
    let (d_eff, _) = dressed_cavity(&rp, &det, pump.port);
    let zero = Complex64::new(0.0, 0.0);
    let mut unit = PerCavity::new(zero, zero);
    unit[pump.port] = input_amplitude(1.0, 0.0);
    let n_per_watt = steady_state_fields(&rp, &det, unit)?.photons(pump.port, w);
    let ba = backaction_rates(&rp, pump.port, d_eff, n_per_watt, &rp.torsional);
    let gamma_m = rp.torsional.gamma_m(cfg.sim.environment);
    let small_signal = if ba.gamma_opt < 0.0 {
        Some(gamma_m / -ba.gamma_opt)
    } else {
        None
    };

    let summary = json!({
        "pump_carrier_omega": w,
        "pump_delta_left": det.delta.left,
        "radiation_pressure_only": threshold_json(rp_only)?,
        "radiation_pressure_small_signal_w": small_signal,
        "with_photothermal": match with_pt { Some(r) => threshold_json(r)?, None => Value::Null },
        "photothermal_gain": cfg.params.photothermal.gain,
        "reference_threshold_w": THRESHOLD_PUMP_POWER,
    });
    Ok((summary, Vec::new()))
}

/// Probe-transmission traces for every stroboscopic detuning on `probe_port`,
/// all started from the same state.
pub fn strobo_traces(cfg: &Config, probe_port: Cavity) -> Result<(TimeSeries, Vec<Trace>)> {
    let base = cfg
        .drive()
        .probe
        .ok_or_else(|| Error::Validation("strobo needs a probe laser".into()))?;
    let runs: Vec<Result<TimeSeries>> = thread_pool()?.install(|| {
        STROBO_DELTAS
            .par_iter()
            .map(|&d| {
                let mut drive = cfg.drive();
                drive.probe = Some(Laser {
                    port: probe_port,
                    carrier: Carrier::Normalized(d),
                    ..base.clone()
                });
                simulate(&cfg.params, &drive, &cfg.sim)
            })
            .collect()
    });
    let mut traces = Vec::with_capacity(runs.len());
    let mut first = None;
    for (d, r) in STROBO_DELTAS.iter().zip(runs) {
        let ts = r?;
        traces.push((*d, ts.require(PROBE_TRANSMISSION)?.to_vec()));
        first.get_or_insert(ts);
    }
    Ok((first.unwrap(), traces))
}

/// Left and right reconstructions over the last mechanical period or so.
pub fn strobo_run(cfg: &Config) -> Result<(Config, CycleRun, TimeSeries, Reconstruction, Reconstruction)> {
    let (run_cfg, start) = cycle_start(cfg)?;
    let (ts, right) = strobo_traces(&run_cfg, Cavity::Right)?;
    let (_, left) = strobo_traces(&run_cfg, Cavity::Left)?;
    let p = &run_cfg.params;
    let rec_r = strobo_reconstruct(p, Cavity::Right, &ts.t, &right)?;
    let rec_l = strobo_reconstruct(p, Cavity::Left, &ts.t, &left)?;
    Ok((run_cfg, start, ts, rec_l, rec_r))
}

fn strobo(cfg: &Config) -> Result<Parts> {
    let (run_cfg, start, ts, left, right) = strobo_run(cfg)?;
    let theta = ts.require(THETA_TORSIONAL)?;
    let p = &run_cfg.params;
    let mut shift = String::from("cavity,theta,shift_rad_s\n");
    for (rec, name) in [(&left, "left"), (&right, "right")] {
        for (th, s) in rec.shift_vs_angle(p, theta) {
            shift.push_str(&format!("{name},{th:e},{s:e}\n"));
        }
    }
    let summary = json!({
        "orbit": start,
        "probe_deltas": STROBO_DELTAS.to_vec(),
        "coverage_left": left.coverage(),
        "coverage_right": right.coverage(),
        "trajectories_cross": trajectories_cross(&left, &right),
        "omega_sweep_right_hz": sweep(&right) / TWO_PI,
        "omega_sweep_left_hz": sweep(&left) / TWO_PI,
    });
    Ok((
        summary,
        vec![
            series_artifact("strobo_timeseries.csv", &run_cfg, &ts),
            csv_artifact(
                "strobo_left.csv",
                "left resonance reconstruction",
                &run_cfg,
                &left.to_csv(),
            ),
            csv_artifact(
                "strobo_right.csv",
                "right resonance reconstruction",
                &run_cfg,
                &right.to_csv(),
            ),
            csv_artifact("strobo_shift_vs_angle.csv", "shift versus angle", &run_cfg, &shift),
        ],
    ))
}

fn sweep(r: &Reconstruction) -> f64 {
    let vals: Vec<f64> = r
        .omega
        .iter()
        .zip(&r.covered)
        .filter(|(_, c)| **c)
        .map(|(w, _)| *w)
        .collect();
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if vals.is_empty() {
        0.0
    } else {
        hi - lo
    }
}
