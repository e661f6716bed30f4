use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use levitated_nv::cli::{output_schema, parse_config, run};

#[derive(Parser)]
#[command(name = "levnv", version, about = "Levitated nanodiamond NV simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON configuration (a previous output JSON also works)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set "b_static=100 G"
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Ring-trap height, secular frequency, q and depth
    TrapDesign(Common),
    /// Synthesize an ensemble ODMR spectrum
    OdmrSim(Common),
    /// Rotation-induced resonance shift versus rotation rate
    BerryShift(Common),
    /// Dressed-state populations under a microwave pulse
    SpinDynamics(Common),
    /// Rabi frequency versus rotation phase
    RabiSweep(Common),
    /// Internal temperature versus pressure
    Thermal(Common),
    /// Driven rotor trajectory and phase lock
    Rotor(Common),
    /// Centre-of-mass Langevin simulation, PSDs and fits (needs --seed)
    CoolingSim(Common),
    /// Fit Lorentzian dips to a spectrum CSV
    FitOdmr(Common),
    /// Fit a thermal oscillator PSD to a time series CSV
    FitPsd(Common),
    /// Print the JSON schema of the output documents
    Schema,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.command {
        Command::TrapDesign(c) => ("trap-design", c),
        Command::OdmrSim(c) => ("odmr-sim", c),
        Command::BerryShift(c) => ("berry-shift", c),
        Command::SpinDynamics(c) => ("spin-dynamics", c),
        Command::RabiSweep(c) => ("rabi-sweep", c),
        Command::Thermal(c) => ("thermal", c),
        Command::Rotor(c) => ("rotor", c),
        Command::CoolingSim(c) => ("cooling-sim", c),
        Command::FitOdmr(c) => ("fit-odmr", c),
        Command::FitPsd(c) => ("fit-psd", c),
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&output_schema()).expect("serializable"));
            return ExitCode::SUCCESS;
        }
    };
    let outcome = parse_config(name, common.config.as_deref(), &common.overrides, common.seed)
        .map_err(Into::into)
        .and_then(|cfg| run(&cfg, &common.out));
    match outcome {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
