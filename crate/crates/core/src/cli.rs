//! `noma-ra` command line. Exit codes: 0 success, 1 runtime error, 2 usage.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::baseline::{grid_search, random_search};
use crate::beta::{action_to_matrix_with_clamp, RawAction, ACTION_CLAMP};
use crate::config::{Config, Scenario};
use crate::error::{Error, Result};
use crate::oracle::exact_expected_throughput;
use crate::power::{geometric_level_set, max_num_levels};
use crate::ppo::{train, Convergence, TrainOptions, TrainingHistory};
use crate::rewards::RewardKind;
use crate::sim::{run_epoch, TransmissionMatrix};

#[derive(Debug, Parser)]
#[command(
    name = "noma-ra",
    version,
    about = "NOMA slotted-ALOHA simulator and PPO tuner for transmission probabilities",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RewardArg {
    Min,
    Geomean,
    Total,
}

impl From<RewardArg> for RewardKind {
    fn from(r: RewardArg) -> Self {
        match r {
            RewardArg::Min => RewardKind::MinThroughput,
            RewardArg::Geomean => RewardKind::GeometricMean,
            RewardArg::Total => RewardKind::TotalThroughput,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Grid,
    Random,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the geometric level set and the maximum level count as JSON.
    DesignLevels {
        #[arg(long)]
        vmax: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        noise: f64,
        /// Number of levels (default: the maximum that fits).
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Monte Carlo epoch for a given matrix; writes per-device CSV.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        slots: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact per-type expected throughput by enumeration (small instances).
    Oracle {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Map a raw action JSON array `[a1, b1, ..., aM, bM]` to a matrix.
    MatrixFromAction {
        #[arg(long)]
        action: PathBuf,
        #[arg(long, default_value_t = ACTION_CLAMP)]
        clamp: f64,
    },
    /// Train the PPO agent.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        reward: RewardArg,
        #[arg(long)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        /// Stop early once the 200-epoch moving average changes by < 1%.
        #[arg(long)]
        converge: bool,
    },
    /// Grid or random search reference optimizer.
    Baseline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        reward: RewardArg,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 51)]
        resolution: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train on the 2..=M weakest levels; one history CSV per level count.
    SweepLevels {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        reward: RewardArg,
        #[arg(long)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds per level count.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        max_levels: Option<usize>,
    },
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().ansi().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => Config::load(p).map_err(|e| match e {
            Error::Json(j) => Error::InvalidArgument(format!("{}: {j}", p.display())),
            other => other,
        }),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn print_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::DesignLevels {
            vmax,
            gamma,
            noise,
            levels,
        } => {
            let bound = max_num_levels(vmax, gamma, noise)?;
            let set = geometric_level_set(vmax, gamma, noise, levels.unwrap_or(bound))?;
            print_json(
                out,
                &json!({
                    "max_levels": bound,
                    "M": set.len(),
                    "levels": set.levels(),
                    "gamma": gamma,
                    "noise": noise,
                }),
            )
        }
        Command::Simulate {
            config,
            matrix,
            slots,
            seed,
            out: csv_out,
        } => {
            let scenario = load_config(config.as_deref())?.scenario()?;
            let matrix: TransmissionMatrix = read_json(&matrix)?;
            let slots = slots.unwrap_or(scenario.slots);
            let r = run_epoch(&matrix, &scenario.population, &scenario.levels, slots, seed)?;
            if let Some(path) = csv_out {
                let mut w = csv::Writer::from_path(path)?;
                w.write_record(["device_id", "type", "mean_throughput"])?;
                for (id, (&t, &v)) in r.device_types.iter().zip(&r.device_means).enumerate() {
                    w.write_record([id.to_string(), (t + 1).to_string(), v.to_string()])?;
                }
                w.flush()?;
            }
            print_json(
                out,
                &json!({
                    "slots": slots,
                    "seed": seed,
                    "min": r.min(),
                    "geomean": r.geo_mean(),
                    "total": r.total(),
                    "arith_mean": r.arith_mean(),
                    "type_means": r.type_means,
                }),
            )
        }
        Command::Oracle { config, matrix } => {
            let scenario = load_config(config.as_deref())?.scenario()?;
            let matrix: TransmissionMatrix = read_json(&matrix)?;
            let types = exact_expected_throughput(&matrix, &scenario.population, &scenario.levels)?;
            let devices = crate::oracle::per_device(&types, &scenario.population);
            let mut rewards = serde_json::Map::new();
            for kind in RewardKind::ALL {
                rewards.insert(kind.to_string(), json!(kind.evaluate(&devices)?));
            }
            print_json(out, &json!({ "type_means": types, "rewards": rewards }))
        }
        Command::MatrixFromAction { action, clamp } => {
            let raw: RawAction = read_json(&action)?;
            if raw.0.is_empty() || !raw.0.len().is_multiple_of(2) {
                return Err(Error::InvalidArgument(format!(
                    "raw action must hold an even, non-zero number of values, got {}",
                    raw.0.len()
                )));
            }
            let m = raw.levels();
            let matrix = action_to_matrix_with_clamp(&raw, m, clamp)?;
            print_json(out, &matrix)
        }
        Command::Train {
            config,
            reward,
            epochs,
            seed,
            out: csv_out,
            matrix_out,
            converge,
        } => {
            let cfg = load_config(config.as_deref())?;
            let scenario = cfg.scenario()?;
            let mut opts = TrainOptions::new(reward.into(), epochs, seed);
            if converge {
                opts.convergence = Some(Convergence::default());
            }
            let history = train(&scenario, &cfg.ppo()?, &opts)?;
            history.save_csv(&csv_out)?;
            let matrix = history.final_matrix(&scenario)?;
            if let Some(path) = matrix_out {
                write_json(&path, &matrix)?;
            }
            print_json(out, &train_summary(&history, &scenario)?)
        }
        Command::Baseline {
            config,
            reward,
            method,
            out: json_out,
            resolution,
            samples,
            seed,
        } => {
            let scenario = load_config(config.as_deref())?.scenario()?;
            let (pop, set) = (&scenario.population, &scenario.levels);
            let result = match method {
                Method::Grid => grid_search(pop, set, reward.into(), resolution)?,
                Method::Random => random_search(pop, set, reward.into(), samples, seed)?,
            };
            write_json(&json_out, &result)?;
            print_json(out, &result)
        }
        Command::SweepLevels {
            config,
            reward,
            epochs,
            seed,
            seeds,
            out_dir,
            max_levels,
        } => {
            let cfg = load_config(config.as_deref())?;
            let base = cfg.scenario()?;
            let ppo = cfg.ppo()?;
            let top = max_levels.unwrap_or(base.num_levels());
            fs::create_dir_all(&out_dir)?;
            let mut summary = csv::Writer::from_path(out_dir.join("summary.csv"))?;
            summary.write_record(["levels", "seed", "tail_reward", "epochs"])?;
            let mut report = Vec::new();
            for m in 2..=top {
                let scenario = base.truncated(m)?;
                for s in seed..seed + seeds.max(1) {
                    let opts = TrainOptions::new(reward.into(), epochs, s);
                    let history = train(&scenario, &ppo, &opts)?;
                    let name = if seeds > 1 {
                        format!("history_M{m}_seed{s}.csv")
                    } else {
                        format!("history_M{m}.csv")
                    };
                    history.save_csv(out_dir.join(name))?;
                    let tail = history.tail_mean(SUMMARY_TAIL, |r| r.reward);
                    summary.write_record([
                        m.to_string(),
                        s.to_string(),
                        tail.to_string(),
                        history.rows.len().to_string(),
                    ])?;
                    report.push(json!({ "levels": m, "seed": s, "tail_reward": tail }));
                }
            }
            summary.flush()?;
            print_json(out, &report)
        }
    }
}

/// Epochs averaged for reported "converged" rewards.
const SUMMARY_TAIL: usize = 200;

fn train_summary(history: &TrainingHistory, scenario: &Scenario) -> Result<serde_json::Value> {
    let last = history.rows.last();
    Ok(json!({
        "reward_kind": history.reward,
        "epochs": history.rows.len(),
        "converged_at": history.converged_at,
        "final_reward": last.map(|r| r.reward),
        "tail_reward": history.tail_mean(SUMMARY_TAIL, |r| r.reward),
        "matrix": history.final_matrix(scenario)?,
    }))
}
