use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use seesaw::config::Config;
use seesaw::dynamics::simulate;
use seesaw::experiments;

#[derive(Parser, Debug)]
#[command(
    name = "seesaw",
    version,
    about = "Two-cavity torsional optomechanics: simulations and analyses"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Parameter preset (paper_device, paper_device_photothermal, reduced_stiffness).
    #[arg(long, global = true, conflicts_with = "config")]
    preset: Option<String>,
    /// Config file, or any artifact carrying a `#%` config echo.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Noise seed (overrides noise.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Config override `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Env {
    Vacuum,
    Air,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vacuum impulse response spectrum and detuned-probe ring-downs.
    Spectrum,
    /// Time-domain response to the 10 ns pump pulse.
    Impulse {
        /// Mechanical environment.
        #[arg(long, value_enum)]
        env: Option<Env>,
    },
    /// Limit cycle at the configured pump, held over 100 periods.
    Selfosc,
    /// Photon transfer per cycle and detuning-plane trajectory.
    Shuttle {
        /// Pump power into the left cavity (W).
        #[arg(long)]
        pump_power: Option<f64>,
    },
    /// Normalized right-cavity photon number over (δ_L, δ_R).
    Map,
    /// Brownian motion, equipartition and torque sensitivity.
    Noise,
    /// Self-oscillation threshold, with and without the photothermal channel.
    Threshold,
    /// Stroboscopic reconstruction of both resonance trajectories.
    Strobo,
    /// Plain simulation of the resolved config.
    Simulate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Impulse { .. } => "impulse",
            Command::Selfosc => "selfosc",
            Command::Shuttle { .. } => "shuttle",
            Command::Map => "map",
            Command::Noise => "noise",
            Command::Threshold => "threshold",
            Command::Strobo => "strobo",
            Command::Simulate => "simulate",
        }
    }

    fn overrides(&self) -> Vec<String> {
        match self {
            Command::Impulse { env: Some(e) } => {
                vec![format!(
                    "sim.environment={}",
                    if matches!(e, Env::Air) { "air" } else { "vacuum" }
                )]
            }
            Command::Shuttle { pump_power: Some(p) } => vec![format!("pump.power_w={p:e}")],
            _ => Vec::new(),
        }
    }
}

fn resolve(cli: &Cli) -> seesaw::Result<Config> {
    let name = cli.command.name();
    let mut cfg = match (&cli.global.config, name) {
        (Some(path), _) => Config::load(path)?,
        (None, "simulate") => Config::from_preset(cli.global.preset.as_deref().unwrap_or("paper_device"))?,
        (None, _) => experiments::default_config(name, cli.global.preset.as_deref())?,
    };
    cfg.apply_overrides(&cli.command.overrides())?;
    cfg.apply_overrides(&cli.global.set)?;
    if let Some(seed) = cli.global.seed {
        cfg.sim.noise.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> seesaw::Result<()> {
    let cfg = resolve(cli)?;
    let name = cli.command.name();
    let written = if name == "simulate" {
        let ts = simulate(&cfg.params, &cfg.drive(), &cfg.sim)?;
        std::fs::create_dir_all(&cli.global.out)?;
        let path = cli.global.out.join("simulate_timeseries.csv");
        let meta = vec![("seed".to_string(), cfg.sim.noise.seed.to_string())];
        std::fs::write(&path, ts.to_csv(&meta, &cfg.to_text()))?;
        vec![path]
    } else {
        let outcome = experiments::run(name, &cfg)?;
        println!("{}", serde_json::to_string_pretty(&outcome.summary["results"])?);
        outcome.write(&cli.global.out)?
    };
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
