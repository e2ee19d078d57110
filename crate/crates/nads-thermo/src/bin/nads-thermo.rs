use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nads_thermo::catalog;
use nads_thermo::config::ExperimentConfig;
use nads_thermo::runner::run_experiment;

/// Entropy, pressure and invariant-measure experiments for nonautonomous
/// systems on finite metric models.
#[derive(Parser)]
#[command(name = "nads-thermo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate pressure/entropy curves for the configured system.
    Estimate {
        /// JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Override the config mode: top, mis or both.
        #[arg(long)]
        mode: Option<String>,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate plus the duality layer: gamma table, entropy map, report.
    Duality {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a text digest of a finished run's artifact directory.
    Report {
        /// Directory holding summary.json (and optionally the duality files).
        #[arg(long)]
        out: PathBuf,
    },
    /// List built-in systems and potential specs.
    Catalog,
}

fn load_config(
    path: &PathBuf,
    mode: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> nads_thermo::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_file(path)?;
    // command-line flags win over config fields
    if let Some(mode) = mode {
        config.mode = mode;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(out) = out {
        config.output_dir = Some(out);
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> nads_thermo::Result<()> {
    match cli.command {
        Command::Estimate {
            config,
            mode,
            seed,
            out,
        } => {
            let config = load_config(&config, mode, seed, out)?;
            let artifacts = run_experiment(&config, false)?;
            for f in &artifacts.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Duality {
            config,
            mode,
            seed,
            out,
        } => {
            let config = load_config(&config, mode, seed, out)?;
            let artifacts = run_experiment(&config, true)?;
            for f in &artifacts.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Report { out } => {
            report(&out)?;
        }
        Command::Catalog => {
            println!("systems:");
            for (key, desc) in catalog::catalog_entries() {
                println!("  {key:<24} {desc}");
            }
            println!("potentials:");
            for (key, desc) in catalog::potential_entries() {
                println!("  {key:<24} {desc}");
            }
        }
    }
    Ok(())
}

fn report(dir: &PathBuf) -> nads_thermo::Result<()> {
    let summary_path = dir.join("summary.json");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary_path)?)?;
    println!(
        "system {} (seed {})",
        summary["system"].as_str().unwrap_or("?"),
        summary["seed"]
    );
    if let Some(estimates) = summary["estimates"].as_array() {
        for est in estimates {
            println!(
                "  [{}] {:<28} extrapolated {:>12.6}  certificate {:>12.6}",
                est["mode"].as_str().unwrap_or("?"),
                est["potential_label"].as_str().unwrap_or("?"),
                est["extrapolated"].as_f64().unwrap_or(f64::NAN),
                est["orbit_certificate"].as_f64().unwrap_or(f64::NAN),
            );
            if let Some(warnings) = est["warnings"].as_array() {
                for w in warnings {
                    println!("    warning: {}", w.as_str().unwrap_or("?"));
                }
            }
        }
    }
    let report_path = dir.join("theoremB_report.json");
    if report_path.exists() {
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&report_path)?)?;
        println!("duality report:");
        println!(
            "  invariant set: {}",
            serde_json::to_string(&report["invariant_set"])?
        );
        println!(
            "  item (a) maximizer invariance: {}",
            report["item_a"]["passed"]
        );
        println!(
            "  item (b) entropy dichotomy:    {}",
            report["item_b"]["passed"]
        );
        let skipped = report["item_c"]["skipped_reason"].as_str();
        match skipped {
            Some(reason) => println!("  items (c),(d) skipped: {reason}"),
            None => {
                println!("  item (c) observed orderings:");
                if let Some(rows) = report["item_c"]["rows"].as_array() {
                    for row in rows {
                        println!(
                            "    {}: {}",
                            row["measure"].as_str().unwrap_or("?"),
                            row["observed_order"].as_str().unwrap_or("?")
                        );
                    }
                }
                println!(
                    "  item (d) zero-potential gap:   {}",
                    report["item_d"]["zero_gap"]
                );
            }
        }
        if let Some(notes) = report["notes"].as_array() {
            for n in notes {
                println!("  note: {}", n.as_str().unwrap_or("?"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
