//! `dvsl`: lane-level variable speed limit control on a simulated freeway
//! merge bottleneck. Train controllers, evaluate them on shared demand,
//! probe their policies and build comparison reports.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dvsl_cli::config::{ExperimentConfig, Preset};
use dvsl_cli::controllers::ControllerArg;
use dvsl_cli::error::{CliError, Result};
use dvsl_env::RewardKind;

#[derive(Parser)]
#[command(name = "dvsl", version, about = "per-lane speed limit control on a simulated freeway")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment TOML ([scenario] and [agent] tables).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in configuration preset.
    #[arg(long, value_enum, global = true)]
    preset: Option<Preset>,

    /// Master seed; every random draw descends from it.
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,

    /// Output directory for artifacts.
    #[arg(long, default_value = "out", global = true)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train a controller and write its checkpoint and logs.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Controller family: qlearning, dqn or ddpg.
        #[arg(long)]
        agent: String,
        /// Training reward: r1, r2, r3 or r4.
        #[arg(long, default_value = "r1")]
        reward: String,
        /// Episode count; defaults to the preset's protocol.
        #[arg(long)]
        episodes: Option<usize>,
        /// Checkpoint stem; defaults to `<agent>-<reward>`.
        #[arg(long)]
        label: Option<String>,
    },
    /// Evaluate frozen controllers on identical seeded demand.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Controller spec `kind[:label][=checkpoint]`; repeatable.
        #[arg(long = "controller", required = true)]
        controllers: Vec<String>,
        /// Evaluation episodes; defaults to the preset's protocol.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Evaluate controllers on the 16 synthetic merge-occupancy states.
    Probe {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "controller", required = true)]
        controllers: Vec<String>,
    },
    /// Build the comparison table and correlation matrix from eval outputs.
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// Eval output directory; repeatable.
        #[arg(long = "eval", required = true)]
        eval_dirs: Vec<PathBuf>,
    },
    /// Run one episode with a controller and print interval summaries.
    Demo {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "novsl")]
        controller: String,
    },
}

fn parse_reward(text: &str) -> Result<RewardKind> {
    text.parse::<RewardKind>().map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_controllers(specs: &[String]) -> Result<Vec<ControllerArg>> {
    specs.iter().map(|s| ControllerArg::parse(s)).collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { common, agent, reward, episodes, label } => {
            let config = ExperimentConfig::resolve(common.config.as_deref(), common.preset)?;
            let preset = common.preset.unwrap_or(Preset::Desk);
            let episodes = episodes.unwrap_or_else(|| preset.default_train_episodes());
            let reward = parse_reward(&reward)?;
            let summary = dvsl_cli::train::train(
                &config,
                &agent,
                reward,
                episodes,
                common.seed,
                &common.out,
                label.as_deref(),
            )?;
            println!(
                "trained {} for {} episodes (seed {})",
                summary.label, summary.episodes, summary.master_seed
            );
            for p in &summary.checkpoints {
                println!("checkpoint: {}", p.display());
            }
            Ok(())
        }
        Command::Eval { common, controllers, episodes } => {
            let config = ExperimentConfig::resolve(common.config.as_deref(), common.preset)?;
            let preset = common.preset.unwrap_or(Preset::Desk);
            let episodes = episodes.unwrap_or_else(|| preset.default_eval_episodes());
            let args = parse_controllers(&controllers)?;
            let report =
                dvsl_cli::eval::evaluate(&config, &args, episodes, common.seed, Some(&common.out))?;
            print!("{}", dvsl_cli::eval::report_csv(&report));
            println!("wrote {}", common.out.join("eval_report.json").display());
            Ok(())
        }
        Command::Probe { common, controllers } => {
            let config = ExperimentConfig::resolve(common.config.as_deref(), common.preset)?;
            let args = parse_controllers(&controllers)?;
            let results = dvsl_cli::probe::probe(&config, &args, Some(&common.out))?;
            print!("{}", dvsl_cli::probe::probe_csv(&results));
            Ok(())
        }
        Command::Report { common, eval_dirs } => {
            let mut reports = Vec::new();
            let mut traces = BTreeMap::new();
            for dir in &eval_dirs {
                let report = dvsl_cli::eval::load_report(&dvsl_cli::eval::out_path(dir))?;
                for c in &report.controllers {
                    let path = dir.join(format!("limits_{}.csv", c.label));
                    if path.exists() {
                        traces.insert(c.label.clone(), dvsl_cli::report::load_limit_trace(&path)?);
                    }
                }
                reports.push(report);
            }
            let report = dvsl_cli::report::build_report(&reports, &traces)?;
            std::fs::create_dir_all(&common.out)?;
            std::fs::write(common.out.join("report.txt"), &report.table)?;
            std::fs::write(
                common.out.join("report.json"),
                serde_json::to_string_pretty(&report)
                    .map_err(|e| CliError::Runtime(e.to_string()))?,
            )?;
            std::fs::write(
                common.out.join("correlation.csv"),
                dvsl_cli::report::correlation_csv(&report.correlation),
            )?;
            print!("{}", report.table);
            Ok(())
        }
        Command::Demo { common, controller } => {
            let config = ExperimentConfig::resolve(common.config.as_deref(), common.preset)?;
            let arg = ControllerArg::parse(&controller)?;
            let lines = dvsl_cli::demo::demo(&config, &arg, common.seed, Some(&common.out))?;
            print!("{lines}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
