//! `mather-lab`: continued-fraction utilities and the scaling experiments.

use clap::{Parser, Subcommand};
use mather_lab::diophantine::{
    continued_fraction, continued_fraction_decimal, convergents, diophantine_exponent_estimate,
};
use mather_lab::lab::config::{ExperimentConfig, ExperimentKind};
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mather-lab", version, about = "Transport-distance laboratory for torus flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continued-fraction expansion and convergents of a real number.
    Cf {
        /// The value, as a decimal literal; long literals keep full precision.
        value: String,
        /// Number of partial quotients.
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Finite-horizon Diophantine exponent estimate.
    DiophExp {
        value: String,
        /// Scan horizon for m.
        #[arg(long, default_value_t = 100_000)]
        mmax: u64,
    },
    /// Run an experiment from a TOML config.
    Run {
        /// One of: upper-bound, lower-bound-2d, highdim-lower, birkhoff,
        /// linear-response.
        experiment: String,
        /// TOML config path; defaults apply when omitted.
        #[arg(long)]
        config: Option<String>,
        /// Output directory for report.json, rows.csv, scaling.svg.
        #[arg(long)]
        out: Option<String>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Cf { value, depth } => {
            // Literals longer than double precision go through the exact
            // decimal path.
            let digits = value.chars().filter(|c| c.is_ascii_digit()).count();
            let cf = if digits > 17 {
                continued_fraction_decimal(&value, depth).map_err(|e| e.to_string())?
            } else {
                let v: f64 = value.parse().map_err(|e| format!("bad value: {e}"))?;
                continued_fraction(v, depth).map_err(|e| e.to_string())?
            };
            let count = cf.depth().min(depth);
            let conv = convergents(&cf, count).map_err(|e| e.to_string())?;
            let record = json!({
                "input": value,
                "depth": depth,
                "quotients": cf.quotients(),
                "convergents": conv.iter().map(|r| json!({"p": r.p, "q": r.q, "err": r.err})).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&record).unwrap());
            Ok(true)
        }
        Command::DiophExp { value, mmax } => {
            let v: f64 = value.parse().map_err(|e| format!("bad value: {e}"))?;
            let tau_hat = diophantine_exponent_estimate(v, mmax).map_err(|e| e.to_string())?;
            let record = json!({
                "input": value,
                "m_max": mmax,
                "tau_hat": tau_hat,
            });
            println!("{}", serde_json::to_string_pretty(&record).unwrap());
            Ok(true)
        }
        Command::Run { experiment, config, out, seed } => {
            let kind = ExperimentKind::parse(&experiment)
                .ok_or_else(|| format!("unknown experiment '{experiment}'"))?;
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| format!("cannot read {path}: {e}"))?;
                    let cfg = ExperimentConfig::from_toml(&text).map_err(|e| e.to_string())?;
                    if cfg.experiment != kind {
                        return Err(format!(
                            "config is for '{}', requested '{}'",
                            cfg.experiment.name(),
                            kind.name()
                        ));
                    }
                    cfg
                }
                None => ExperimentConfig::defaults_for(kind),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(dir) = out {
                cfg.out_dir = Some(dir);
            }
            let report = mather_lab::lab::run(&cfg).map_err(|e| e.to_string())?;
            for v in report.verdicts() {
                println!(
                    "verdict {}: {} (observed {:.6e}, limit {:.6e})",
                    v.name,
                    if v.pass { "PASS" } else { "FAIL" },
                    v.observed,
                    v.limit
                );
            }
            if cfg.out_dir.is_none() {
                println!("{}", report.to_json());
            }
            Ok(report.all_pass())
        }
    }
}
