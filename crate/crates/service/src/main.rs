use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use pedoop_service::config::RunConfig;
use pedoop_service::store::Store;
use pedoop_service::validate::{self, Perturbation};
use pedoop_service::{http, simulate, ServiceError};

#[derive(Debug, Parser)]
#[command(name = "pedoop", version, about = "Seamless phase I-II dose finding: simulation, validation and trial conduct")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate operating characteristics for every scenario in a config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the reference checks.
    Validate {
        /// Add this relative error to the closed-form cumulative effect.
        #[arg(long, default_value_t = 0.0)]
        perturb_eta: f64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Serve the trial-conduct API.
    Serve {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
    },
}

fn simulate_cmd(config: PathBuf, out: Option<PathBuf>) -> Result<(), ServiceError> {
    let (cfg, text) = RunConfig::load(&config)?;
    let out = simulate::resolve_out_dir(out.as_deref(), &cfg)?;
    let manifest = simulate::run(&cfg, &text, &out)?;
    for s in &manifest.scenarios {
        println!(
            "{}: {} of {} replicates, avg N {:.2}, no recommendation {:.3} -> {}",
            s.label,
            s.completed,
            manifest.replications,
            s.avg_total_n,
            s.pct_no_recommendation,
            out.join(&s.csv).display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => simulate_cmd(config, out),
        Command::Validate { perturb_eta, json } => {
            validate::run(Perturbation { eta_closed_form: perturb_eta }).and_then(|report| {
                if json {
                    let text = serde_json::to_string_pretty(&report).map_err(|e| ServiceError::Io(e.to_string()))?;
                    println!("{text}");
                } else {
                    print!("{}", report.render());
                }
                if report.passed() {
                    Ok(())
                } else {
                    Err(ServiceError::Conflict(format!("failed checks: {}", report.failed().join(", "))))
                }
            })
        }
        Command::Serve { data_dir, port, bind } => Store::open(data_dir).and_then(|store| {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(http::serve(Arc::new(store), SocketAddr::new(bind, port)))
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
