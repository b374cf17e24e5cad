use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context as _};
use clap::{Parser, Subcommand, ValueEnum};
use grounded_dialog::learning::{metrics_csv, AgentSnapshot};
use grounded_dialog::world::Split;
use grounded_dialog_service::store::generate_world;
use grounded_dialog_service::{api, ops, Sessions, Store};

#[derive(Parser)]
#[command(name = "agent", version, about = "Grounded dialog agent: conversations, training and evaluation")]
struct Cli {
    /// Where the world, snapshots, logs and sessions live.
    #[arg(long, env = "AGENT_DATA_DIR", default_value = "agent-data", global = true)]
    data_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Talk to the agent in the terminal.
    Repl {
        /// Snapshot version; the latest by default.
        #[arg(long)]
        snapshot: Option<usize>,
    },
    /// Generate the world and its object features.
    GenWorld {
        #[arg(long)]
        seed: u64,
        /// Replace an existing world.
        #[arg(long)]
        force: bool,
    },
    /// Hold simulated conversations with snapshot N and store their logs.
    Simulate {
        #[arg(long)]
        phase: usize,
        /// Tasks per action.
        #[arg(long, default_value_t = 15)]
        tasks: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Retrain snapshot N on conversation logs, publishing snapshot N+1.
    Train {
        #[arg(long)]
        phase: usize,
        /// Log directory; defaults to the logs of conversations held with snapshot N.
        #[arg(long)]
        logs: Option<PathBuf>,
    },
    /// Evaluate snapshots with simulated users.
    Eval {
        /// Comma separated names such as A1,A3,A4*; a trailing * keeps the
        /// first snapshot's parser.
        #[arg(long, value_delimiter = ',', required = true)]
        snapshots: Vec<String>,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        /// Tasks per action before the split is taken.
        #[arg(long, default_value_t = 100)]
        tasks: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// CSV output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, env = "AGENT_PORT", default_value_t = 8080)]
        port: u16,
    },
    /// Copy a snapshot out of the store.
    ExportSnapshot {
        #[arg(long)]
        version: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Publish a snapshot file into the store under its own version.
    ImportSnapshot { path: PathBuf },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let dir = cli.data_dir;
    match cli.command {
        Command::GenWorld { seed, force } => {
            generate_world(&dir, seed, force)?;
            println!("world for seed {seed} written to {}", dir.display());
        }
        Command::Repl { snapshot } => {
            let store = Store::open(&dir)?;
            let version = match snapshot {
                Some(v) => v,
                None => store.latest()?,
            };
            let log = ops::repl(&store, version, BufReader::new(io::stdin()), io::stdout())?;
            if let Some(log) = log {
                store.save_log(version, &log)?;
            }
        }
        Command::Simulate { phase, tasks, seed } => {
            let store = Store::open(&dir)?;
            let (ok, total) = ops::simulate_phase(&store, phase, tasks, seed)?;
            println!("{ok}/{total} conversations completed; logs in {}", store.phase_logs_dir(phase).display());
        }
        Command::Train { phase, logs } => {
            let store = Store::open(&dir)?;
            let (snap, hash) = store.train_phase(phase, logs.as_deref())?;
            println!("v{} {hash}", snap.version);
        }
        Command::Eval {
            snapshots,
            split,
            tasks,
            seed,
            out,
        } => {
            let store = Store::open(&dir)?;
            let split = match split {
                SplitArg::Train => Split::Train,
                SplitArg::Test => Split::Test,
            };
            let rows = ops::evaluate(&store, &snapshots, split, tasks, seed)?;
            let csv = metrics_csv(&rows);
            match out {
                Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
        }
        Command::Serve { port } => {
            let store = Arc::new(Store::open(&dir)?);
            let sessions = Arc::new(Sessions::load(store)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(api::serve(sessions, port))?;
        }
        Command::ExportSnapshot { version, out } => {
            let store = Store::open(&dir)?;
            store.snapshot(version)?.save(&out)?;
            println!("v{version} written to {}", out.display());
        }
        Command::ImportSnapshot { path } => {
            let store = Store::open(&dir)?;
            let snap = AgentSnapshot::load(&path)?;
            if snap.version == 0 {
                bail!("snapshot versions start at 1");
            }
            let hash = store.publish(&snap)?;
            println!("v{} {hash}", snap.version);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
