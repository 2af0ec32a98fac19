use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use coadapt_cli::commands::{self, ConfigArgs};
use coadapt_cli::exit_code;

#[derive(Parser)]
#[command(name = "coadapt", version, about = "Human-robot mutual adaptation: planning, simulation and learning")]
struct Cli {
    /// Worker threads for parallel solving and simulation.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted config override, e.g. `environment.horizon=6`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn args(&self) -> ConfigArgs {
        ConfigArgs { config: self.config.clone(), overrides: self.set.clone(), seed: self.seed }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the robot policy and write `policy.json`.
    Solve(Common),
    /// Run closed-loop episodes for one condition.
    Simulate(Common),
    /// Compare the three conditions over a population of simulated humans.
    Population(Common),
    /// Cross-train against a simulated human on a role-swappable task.
    CrossTrain(Common),
    /// Discover human types from demonstrations and fit per-type models.
    Cluster(Common),
    /// Export the policy tree of a saved policy as Graphviz DOT.
    Tree {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// DOT file to write.
        #[arg(long, default_value = "tree.dot")]
        out: PathBuf,
    },
    /// Serve interactive sessions over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Allowed CORS origin of the web client; any when omitted.
        #[arg(long)]
        origin: Option<String>,
    },
}

fn run(cli: Cli) -> anyhow::Result<serde_json::Value> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Solve(c) => commands::solve(&c.args(), &c.out),
        Command::Simulate(c) => commands::simulate(&c.args(), &c.out),
        Command::Population(c) => commands::population(&c.args(), &c.out),
        Command::CrossTrain(c) => commands::crosstrain(&c.args(), &c.out),
        Command::Cluster(c) => commands::cluster(&c.args(), &c.out),
        Command::Tree { policy, depth, out } => commands::tree(&policy, depth, &out),
        Command::Serve { addr, origin } => {
            tokio::runtime::Runtime::new()?.block_on(coadapt_cli::server::serve(addr, origin))?;
            Ok(json!({ "command": "serve", "stopped": true }))
        }
    }
}

/// Writes the one JSON document of this invocation; a closed pipe is not an error.
fn emit(v: &serde_json::Value) {
    let _ = writeln!(std::io::stdout().lock(), "{v}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("COADAPT_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = exit_code(&e);
            log::error!("{e:#}");
            emit(&json!({ "error": format!("{e:#}"), "exit_code": code }));
            ExitCode::from(code as u8)
        }
    }
}
