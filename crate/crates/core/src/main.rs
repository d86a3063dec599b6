use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shadowing::experiment::{
    constants_json, gen_text, run_falsify, run_shadowing, ExperimentConfig, RunOutcome, Settings,
};
use shadowing::Result;

#[derive(Parser)]
#[command(name = "shadowing", version, about = "Certified shadowing of finite-jump pseudo-orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shadow seeded pseudo-orbits and verify every certificate.
    Shadow(Flags),
    /// Search for semi-expansivity counterexamples and audit the uniform radius.
    Falsify(Flags),
    /// Print the derived constant chain.
    Constants(Flags),
    /// Print a seeded pseudo-orbit.
    Gen(Flags),
}

#[derive(Args)]
struct Flags {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `shift`, `shift(m)` or `toral`.
    #[arg(long)]
    system: Option<String>,
    /// Target distance, e.g. `2^-6` or `1/64`.
    #[arg(long)]
    epsilon: Option<String>,
    /// Largest number of jumps per trial.
    #[arg(long)]
    jumps: Option<String>,
    /// Jumps are strictly below this (at most the derived rho).
    #[arg(long)]
    jump_scale: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    window_margin: Option<String>,
    /// Write per-index error tables to certificates.jsonl.
    #[arg(long)]
    emit_error_table: bool,
    /// Falsification step bound instead of the certified delta.
    #[arg(long)]
    delta: Option<String>,
    /// Trial index for `gen`.
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

impl Flags {
    fn config(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => Settings::parse(&fs::read_to_string(path).map_err(|e| {
                shadowing::ShadowError::Precondition(format!("cannot read {}: {e}", path.display()))
            })?)?,
            None => Settings::default(),
        };
        let flags = Settings {
            system: self.system.clone(),
            epsilon: self.epsilon.clone(),
            jumps: self.jumps.clone(),
            jump_scale: self.jump_scale.clone(),
            trials: self.trials.clone(),
            seed: self.seed.clone(),
            window_margin: self.window_margin.clone(),
            out: self.out.clone(),
            emit_error_table: self.emit_error_table.then(|| "true".into()),
            delta: self.delta.clone(),
        };
        ExperimentConfig::resolve(&file.overridden_by(flags))
    }
}

fn finish(outcome: RunOutcome) -> ExitCode {
    println!("{}", outcome.summary);
    if outcome.success {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    Ok(match cli.command {
        Command::Shadow(f) => finish(run_shadowing(&f.config()?)?),
        Command::Falsify(f) => finish(run_falsify(&f.config()?)?),
        Command::Constants(f) => {
            let cfg = f.config()?;
            let doc = constants_json(&cfg)?;
            if f.out.is_some() {
                fs::create_dir_all(&cfg.out)
                    .and_then(|_| fs::write(cfg.out.join("constants.json"), &doc))
                    .map_err(|e| shadowing::ShadowError::Precondition(e.to_string()))?;
            }
            print!("{doc}");
            ExitCode::SUCCESS
        }
        Command::Gen(f) => {
            print!("{}", gen_text(&f.config()?, f.trial)?);
            ExitCode::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
