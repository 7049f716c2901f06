//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seesaw::analysis::strobo::forward_model;
use seesaw::analysis::{count_shuttled_photons, strobo_reconstruct, trajectories_cross, ShuttleOptions};
use seesaw::config::Config;
use seesaw::constants::TWO_PI;
use seesaw::dynamics::series::{N_LEFT, N_RIGHT, THETA_TORSIONAL};
use seesaw::dynamics::{
    find_limit_cycle, simulate, static_equilibrium, Carrier, CycleOptions, DriveConfig, Laser, Method, SimConfig,
};
use seesaw::experiments::{self, STROBO_DELTAS};
use seesaw::mechanics::torque_sensitivity;
use seesaw::optics::{dissipated_power, input_amplitude, output_fields, shuttle_map, steady_state_fields, Detunings};
use seesaw::params::{derive_quantities, MechKind, DEFAULT_LEVER_ARM};
use seesaw::{Cavity, DeviceParams, PerCavity, Result};

type Verdict = Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn half_swing(x: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    0.5 * (hi - lo)
}

fn device() -> DeviceParams {
    DeviceParams::paper_device()
}

fn c1_single_photon_shift() -> Verdict {
    let d = derive_quantities(&device())?;
    let hz = d.delta_omega_c / TWO_PI;
    Ok((rel(hz, 27e3) <= 0.02, format!("δω_c = 2π·{:.3} kHz", hz / 1e3)))
}

fn c2_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut p = device();
        p.g_om *= rng.random_range(0.1..10.0);
        p.k_eff *= rng.random_range(0.1..10.0);
        p.torsional.omega *= rng.random_range(0.1..10.0);
        let d = derive_quantities(&p)?;
        worst = worst.max(rel(d.delta_omega_c_vacuum, d.delta_omega_c));
    }
    Ok((
        worst <= 1e-10,
        format!("worst relative difference {worst:.2e} over 1000 draws"),
    ))
}

fn c3_decay_rate() -> Verdict {
    let d = derive_quantities(&device())?;
    let ghz = d.gamma_left / TWO_PI / 1e9;
    let ok = rel(ghz, 19.4) <= 5e-3 && rel(ghz, 19.0) <= 0.05;
    Ok((ok, format!("γ = 2π·{ghz:.3} GHz")))
}

fn c4_angular_coupling() -> Verdict {
    let p = device();
    let d = derive_quantities(&p)?;
    let per_mrad = p.g_om * DEFAULT_LEVER_ARM * 1e-3 / TWO_PI / 1e9;
    let ok = rel(per_mrad, 24.5) <= 0.02 && rel(d.angular_coupling, p.g_om * DEFAULT_LEVER_ARM) <= 1e-15;
    Ok((ok, format!("g_OM·l = 2π·{per_mrad:.3} GHz/mrad")))
}

fn c5_shuttle_map() -> Verdict {
    let p = device();
    let w = p.optics.omega_left;
    let pts = [-1.0, 0.0, 1.0];
    let m = shuttle_map(&p, &pts, &pts, 1e-6, w, true)?;
    let mut worst = 0.0f64;
    for (i, &dl) in pts.iter().enumerate() {
        for (j, &dr) in pts.iter().enumerate() {
            let expect = 1.0 / ((1.0 + dl * dl) * (1.0 + dr * dr));
            worst = worst.max((m.at(i, j) - expect).abs());
        }
    }
    let grid = experiments::map_grid();
    let full = shuttle_map(&p, &grid, &grid, 1e-6, w, true)?;
    let n = grid.len();
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((full.at(i, j) - full.at(n - 1 - i, n - 1 - j)).abs());
        }
    }
    Ok((
        worst <= 1e-12 && asym <= 1e-12,
        format!("lattice error {worst:.1e}, joint-flip asymmetry {asym:.1e}"),
    ))
}

fn c6_impulse_spectrum() -> Verdict {
    let cfg = experiments::default_config("spectrum", None)?;
    let start = Instant::now();
    let ts = experiments::impulse_series(&cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let spec = seesaw::analysis::series_spectrum(&ts, seesaw::dynamics::series::PROBE_TRANSMISSION)?;
    let bin = spec.bin_width();
    let found: Vec<Option<f64>> = [441e3, 514e3]
        .iter()
        .map(|&f| spec.peak_in(f - 10.0 * bin, f + 10.0 * bin))
        .collect();
    let ok = found
        .iter()
        .zip([441e3, 514e3])
        .all(|(p, f)| p.is_some_and(|p| (p - f).abs() <= bin))
        && elapsed < 10.0;
    let shown: Vec<String> = found
        .iter()
        .map(|p| p.map_or("none".into(), |f| format!("{:.2} kHz", f / 1e3)))
        .collect();
    Ok((
        ok,
        format!("peaks {}, bin {:.2} kHz, {elapsed:.1} s", shown.join(" / "), bin / 1e3),
    ))
}

fn c7_backaction() -> Verdict {
    let cases = experiments::backaction_ringdowns(&device(), 20.0)?;
    let get = |l: &str| cases.iter().find(|c| c.label == l).unwrap();
    let (none, blue, red) = (get("none"), get("blue"), get("red"));
    let gm = none.gamma_m;
    let ordering = blue.gamma_fit < gm && gm < red.gamma_fit && rel(none.gamma_fit, gm) < 0.02;
    let err = |c: &experiments::RingdownCase| rel(gm + c.gamma_opt_predicted, c.gamma_fit);
    let (eb, er) = (err(blue), err(red));
    Ok((
        ordering && eb <= 0.1 && er <= 0.1,
        format!(
            "Γ_eff blue {:.2} < Γ_m {:.2} < red {:.2} s⁻¹; prediction error {:.2}% / {:.2}%",
            blue.gamma_fit,
            gm,
            red.gamma_fit,
            100.0 * eb,
            100.0 * er
        ),
    ))
}

fn c8_cross_integrator() -> Verdict {
    let p = experiments::reduced_instance(&device());
    let mut worst_n = 0.0f64;
    let mut worst_a = 0.0f64;
    for delta in [0.8, -0.8] {
        let drive = DriveConfig {
            probe: Some(Laser::cw(
                Cavity::Right,
                experiments::RINGDOWN_PROBE_POWER,
                Carrier::Normalized(delta),
            )),
            ..DriveConfig::default()
        };
        let eq = static_equilibrium(&p, &drive, false)?;
        let mut full = experiments::reduced_sim(&p, 50.0);
        full.init = eq.initial_state();
        full.init.theta[0] += 9e-6;
        let qs = SimConfig {
            method: Method::Quasistatic,
            dt: full.dt * full.output_stride as f64,
            output_stride: 1,
            ..full.clone()
        };
        let a = simulate(&p, &drive, &full)?;
        let b = simulate(&p, &drive, &qs)?;
        let len = a.len().min(b.len());
        let (na, nb) = (&a.require(N_RIGHT)?[..len], &b.require(N_RIGHT)?[..len]);
        let diff = na.iter().zip(nb).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let norm = na.iter().map(|x| x * x).sum::<f64>();
        worst_n = worst_n.max((diff / norm).sqrt());
        let per = (p.torsional.period() / a.stride()?).round() as usize;
        let (ta, tb) = (&a.require(THETA_TORSIONAL)?[..len], &b.require(THETA_TORSIONAL)?[..len]);
        worst_a = worst_a.max(rel(half_swing(&tb[len - per..]), half_swing(&ta[len - per..])));
    }
    Ok((
        worst_n <= 0.02 && worst_a <= 0.01,
        format!(
            "n_R RMS difference {:.3}%, final amplitude difference {:.3}%",
            100.0 * worst_n,
            100.0 * worst_a
        ),
    ))
}

fn c9_shuttled_photons() -> Verdict {
    let cfg = experiments::default_config("shuttle", None)?;
    let start = Instant::now();
    let (_, orbit, _, stats) = experiments::shuttle_run(&cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let ok = (1000.0 / 3.0..=3000.0).contains(&stats.n_tr) && elapsed < 30.0;
    Ok((
        ok,
        format!(
            "n_tr = {:.0} photons per cycle at {:.3} μW, amplitude {:.3} mrad, {elapsed:.1} s",
            stats.n_tr,
            experiments::THRESHOLD_PUMP_POWER * 1e6,
            orbit.start_amplitude * 1e3
        ),
    ))
}

fn peaks_at(cfg: &Config, factor: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    let p = &cfg.params;
    let drive = cfg.drive();
    let eq = static_equilibrium(p, &drive, false)?;
    let centre = eq.angles[0];
    let (_, theta_a) = p.alignment();
    let mut run = cfg.clone();
    run.sim.init = eq.initial_state();
    run.sim.init.theta[0] = centre + factor * (theta_a - centre);
    let ts = simulate(p, &drive, &run.sim)?;
    let stats = count_shuttled_photons(&ts, p, ShuttleOptions::default())?;
    Ok((stats.peak_counts, ts.require(N_RIGHT)?.to_vec()))
}

fn c10_peak_doubling() -> Verdict {
    let cfg = experiments::default_config("shuttle", Some("paper_device"))?;
    let factors = [0.6, 0.8, 1.3, 2.0];
    let mut ok = true;
    let mut shown = Vec::new();
    for f in factors {
        let (counts, trace) = peaks_at(&cfg, f)?;
        let (again, trace2) = peaks_at(&cfg, f)?;
        let expect = if f < 1.0 { 1 } else { 2 };
        ok &= counts == again && trace == trace2 && !counts.is_empty() && counts.iter().all(|&c| c == expect);
        shown.push(format!("{f}×: {counts:?}"));
    }
    Ok((
        ok,
        format!("peaks per cycle vs amplitude/crossover: {}", shown.join(", ")),
    ))
}

fn c11_torque_sensitivity() -> Verdict {
    let s = torque_sensitivity(&device().torsional, 300.0);
    let ratio = s / 9.7e-21;
    Ok((
        (0.5..=2.0).contains(&ratio),
        format!("√(4kTIΓ) = {s:.3e} N·m/√Hz, ratio {ratio:.3}"),
    ))
}

fn c12_strobo() -> Verdict {
    let p = device();
    let n = 400;
    let amp = 4.0;
    let t: Vec<f64> = (0..n).map(|k| k as f64 * 1e-8).collect();
    let truth: Vec<f64> = t.iter().map(|&x| 0.5 + amp * (TWO_PI * 2.5e5 * x).sin()).collect();
    let traces: Vec<(f64, Vec<f64>)> = STROBO_DELTAS
        .iter()
        .map(|&d| {
            (
                d,
                truth.iter().map(|&c| forward_model(&p, Cavity::Right, d, c)).collect(),
            )
        })
        .collect();
    let rec = strobo_reconstruct(&p, Cavity::Right, &t, &traces)?;
    let mse = rec.center.iter().zip(&truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64;
    let err = mse.sqrt() / amp;

    let cfg = experiments::default_config("strobo", None)?;
    let (_, _, _, left, right) = experiments::strobo_run(&cfg)?;
    let cross = trajectories_cross(&left, &right);
    Ok((
        err < 0.05 && rec.coverage() == 1.0 && cross,
        format!(
            "synthetic RMS error {:.2e} of sweep amplitude; device-scale trajectories cross: {cross}",
            err
        ),
    ))
}

fn c13_thermal_calibration() -> Verdict {
    let cfg = experiments::default_config("impulse", None)?;
    let ts = experiments::impulse_series(&cfg)?;
    let tm = experiments::impulse_timing(&ts)?;
    let sign = tm.sign_change_time.map(|t| t * 1e6);
    let peak = tm.late_peak_time.map(|t| t * 1e6);
    let ok = sign.is_some_and(|s| (s - 1.9).abs() <= 0.4) && peak.is_some_and(|s| (s - 3.2).abs() <= 0.6);
    let show = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.3} μs"));
    Ok((ok, format!("sign change {}, late peak {}", show(sign), show(peak))))
}

fn c14_property_suite() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;

    // Determinism and non-negativity on a short Langevin run.
    let mut cfg = experiments::default_config("noise", None)?;
    cfg.sim.duration = 1e-3;
    cfg.set_pump(true, Laser::cw(Cavity::Left, 1e-6, Carrier::Alignment));
    let a = simulate(&cfg.params, &cfg.drive(), &cfg.sim)?;
    let b = simulate(&cfg.params, &cfg.drive(), &cfg.sim)?;
    let same = a.csv_body() == b.csv_body();
    let nonneg = [N_LEFT, N_RIGHT]
        .iter()
        .all(|c| a.require(c).unwrap().iter().all(|&v| v >= 0.0));
    ok &= same && nonneg;
    notes.push(format!("bit-identical {same}, n ≥ 0 {nonneg}"));

    // Steady-state power balance.
    let p = device();
    let w = p.optics.omega_left;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = PerCavity::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let (pl, pr): (f64, f64) = (rng.random_range(1e-9..1e-3), rng.random_range(0.0..1e-3));
        let s = PerCavity::new(
            input_amplitude(pl, 0.0),
            input_amplitude(pr, rng.random_range(0.0..TWO_PI)),
        );
        let det = Detunings::from_normalized(&p, d, w);
        let f = steady_state_fields(&p, &det, s)?;
        let out = output_fields(&p, &f, s);
        let balance = out.left.norm_sqr() + out.right.norm_sqr() + dissipated_power(&p, &f);
        worst = worst.max(rel(balance, pl + pr));
    }
    ok &= worst <= 1e-9;
    notes.push(format!("power balance {worst:.1e}"));

    // Equipartition under Langevin noise.
    let noise = experiments::run("noise", &experiments::default_config("noise", None)?)?;
    let ratio = noise.summary["results"]["variance_ratio"].as_f64().unwrap_or(f64::NAN);
    ok &= (ratio - 1.0).abs() <= 0.05;
    notes.push(format!("⟨θ²⟩/(kT/IΩ²) = {ratio:.4}"));

    // Energy balance on the self-oscillation orbit.
    let sc = experiments::default_config("selfosc", None)?;
    let lc = find_limit_cycle(&sc.params, &sc.drive(), MechKind::Torsional, CycleOptions::default())?;
    let res = lc.relative_residual();
    ok &= lc.converged && res < 1e-3;
    notes.push(format!("limit-cycle residual {res:.1e}"));

    Ok((ok, notes.join("; ")))
}

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 14] = [
    (1, "single-photon shift", c1_single_photon_shift),
    (2, "ħg²/k identity", c2_identity),
    (3, "decay-rate consistency", c3_decay_rate),
    (4, "angular coupling", c4_angular_coupling),
    (5, "shuttle map", c5_shuttle_map),
    (6, "impulse spectrum", c6_impulse_spectrum),
    (7, "backaction ordering", c7_backaction),
    (8, "cross-integrator oracle", c8_cross_integrator),
    (9, "shuttled photons", c9_shuttled_photons),
    (10, "peak doubling", c10_peak_doubling),
    (11, "torque sensitivity", c11_torque_sensitivity),
    (12, "stroboscopic round trip", c12_strobo),
    (13, "thermal calibration", c13_thermal_calibration),
    (14, "substituted property suite", c14_property_suite),
];

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (n, name, f) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        println!(
            "{} criterion {n:>2} ({name}): {detail} [{secs:.1} s]",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
