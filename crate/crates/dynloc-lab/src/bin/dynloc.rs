//! Batch experiment runner for the dynloc laboratory.
//!
//! Exit codes: 0 all criteria pass, 1 numerical failure or failing
//! criteria, 2 configuration/parse errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dynloc_lab::config::ExperimentConfig;
use dynloc_lab::registry::{registry, resolve_out_dir, run_config, verify_all};
use dynloc_lab::report::summary_lines;
use dynloc_lab::LabError;

#[derive(Parser)]
#[command(
    name = "dynloc",
    about = "Configuration-space dynamics laboratory: run experiments and verification suites",
    version
)]
struct Cli {
    /// Print the experiment registry and exit.
    #[arg(long)]
    list: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment from a TOML config file.
    Run {
        /// Path to the experiment config (omit with --list).
        config: Option<PathBuf>,
        /// Output directory (overrides DYNLOC_OUT and the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the exemplar registry instead of running.
        #[arg(long)]
        list: bool,
    },
    /// Run every registered experiment and oracle-comparison suite.
    VerifyAll {
        /// Maximum number of experiments run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory (overrides DYNLOC_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the experiment registry.
    List,
}

fn print_registry() {
    for exp in registry() {
        println!("{:<24} {}", exp.name, exp.about);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        print_registry();
        return ExitCode::SUCCESS;
    }
    let outcome = match cli.command {
        None => {
            eprintln!(
                "nothing to do; try `dynloc --list`, `dynloc run <config>` or `dynloc verify-all`"
            );
            return ExitCode::from(2);
        }
        Some(Command::List) => {
            print_registry();
            return ExitCode::SUCCESS;
        }
        Some(Command::Run { config, out, list }) => {
            if list {
                print_registry();
                return ExitCode::SUCCESS;
            }
            let Some(config) = config else {
                eprintln!("error: missing config path (or pass --list)");
                return ExitCode::from(2);
            };
            run_one(&config, out.as_deref())
        }
        Some(Command::VerifyAll { jobs, out }) => {
            let out_dir = resolve_out_dir(out.as_deref(), None, None);
            match verify_all(&registry(), &out_dir, jobs) {
                Ok(summary) => {
                    for result in &summary.results {
                        for line in summary_lines(result) {
                            println!("{line}");
                        }
                    }
                    println!(
                        "{} experiments in {:.1}s -> {}",
                        summary.results.len(),
                        summary.total_seconds,
                        out_dir.display()
                    );
                    if summary.all_pass {
                        println!("verify-all: PASS");
                        Ok(())
                    } else {
                        let failing: Vec<&str> = summary
                            .results
                            .iter()
                            .filter(|r| !r.pass)
                            .map(|r| r.name.as_str())
                            .collect();
                        eprintln!("verify-all: FAIL ({})", failing.join(", "));
                        Err(LabError::Config(String::new()).into_exit(1))
                    }
                }
                Err(e) => {
                    let code = e.exit_code();
                    eprintln!("error: {e}");
                    Err(e.into_exit(code))
                }
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

trait IntoExit {
    fn into_exit(self, code: i32) -> u8;
}

impl IntoExit for LabError {
    fn into_exit(self, code: i32) -> u8 {
        code.clamp(0, 255) as u8
    }
}

fn run_one(config_path: &std::path::Path, out_flag: Option<&std::path::Path>) -> Result<(), u8> {
    let cfg = match ExperimentConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let config_dir = config_path
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let out_dir = resolve_out_dir(out_flag, Some(&config_dir), Some(&cfg));
    match run_config(&cfg, &config_dir, &out_dir) {
        Ok(result) => {
            for line in summary_lines(&result) {
                println!("{line}");
            }
            println!("artifacts -> {}", out_dir.display());
            if result.pass {
                Ok(())
            } else {
                Err(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            Err(e.exit_code().clamp(0, 255) as u8)
        }
    }
}
