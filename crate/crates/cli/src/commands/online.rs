//! `gpk online` — the two-process online training architecture, either as
//! a deterministic single-process loopback or as real UDP roles.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gpk_core::control::{ControllerConfig, ExoParams, Strategy};
use gpk_core::estimators::{regression_layer_sizes, rom_scaling, Activation};
use gpk_core::gait::{generate_gait_with_phase, SpeedProfile};
use gpk_core::metrics::mean_windowed_accuracy;
use gpk_core::online::{
    run_control_udp, run_loopback, run_trainer_udp, ControlConfig, LoopbackConfig, TrainCycle,
    TrainerConfig,
};
use gpk_core::training::SeqTrainConfig;
use gpk_core::FeedforwardNet;

use crate::util::{run_dir, write_manifest, write_metrics_csv, write_trace_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Both roles stepped by one simulated clock; deterministic
    Loopback,
    /// One role over real UDP sockets, paced in real time
    Udp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Control,
    Trainer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkKind {
    Steady,
    Free,
    Calibration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Fsm,
    Sfsm,
    Blend,
}

impl From<StrategyArg> for Strategy {
    fn from(value: StrategyArg) -> Strategy {
        match value {
            StrategyArg::Fsm => Strategy::Fsm,
            StrategyArg::Sfsm => Strategy::SmoothedFsm,
            StrategyArg::Blend => Strategy::Blend,
        }
    }
}

#[derive(Debug, clap::Args, serde::Serialize)]
pub struct OnlineArgs {
    #[arg(long, value_enum, default_value_t = Mode::Loopback)]
    pub mode: Mode,
    /// Which role this process plays (udp mode)
    #[arg(long, value_enum, default_value_t = Role::Control)]
    pub role: Role,
    /// Run length, seconds
    #[arg(long, default_value_t = 300.0)]
    pub duration: f64,
    /// Training schedule period, seconds
    #[arg(long, default_value_t = 20.0)]
    pub period: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.02)]
    pub noise_std: f64,
    #[arg(long, value_enum, default_value_t = WalkKind::Steady)]
    pub walk: WalkKind,
    /// Belt speed for the steady walk, km/h
    #[arg(long, default_value_t = 3.5)]
    pub speed_kmh: f64,
    /// Sequential-training learning rate
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    /// Sliding metric window, seconds
    #[arg(long, default_value_t = 5.0)]
    pub window: f64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Blend)]
    pub strategy: StrategyArg,
    /// Let the estimate drive the Blend strategy instead of shadow mode
    #[arg(long)]
    pub closed_loop: bool,
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.2)]
    pub tau: f64,
    /// Control endpoint (udp mode)
    #[arg(long, env = "GPK_CTRL_ADDR", default_value = "127.0.0.1:47001")]
    pub ctrl_addr: String,
    /// Trainer endpoint (udp mode)
    #[arg(long, env = "GPK_TRAIN_ADDR", default_value = "127.0.0.1:47002")]
    pub train_addr: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

impl OnlineArgs {
    fn profile(&self) -> Result<SpeedProfile> {
        Ok(match self.walk {
            WalkKind::Steady => SpeedProfile::steady(self.speed_kmh, self.duration)?,
            WalkKind::Free => SpeedProfile::free(self.duration, self.seed)?,
            WalkKind::Calibration => SpeedProfile::calibration(),
        })
    }

    fn control_config(&self) -> ControlConfig {
        ControlConfig {
            strategy: self.strategy.into(),
            controller: ControllerConfig {
                theta: self.theta,
                tau: self.tau,
            },
            params: ExoParams::default(),
            shadow: !self.closed_loop,
            ..ControlConfig::default()
        }
    }

    fn trainer_config(&self) -> TrainerConfig {
        TrainerConfig {
            period_s: self.period,
            seq: SeqTrainConfig {
                learning_rate: self.lr,
                epochs: 1,
            },
            net_seed: self.seed,
            ..TrainerConfig::default()
        }
    }
}

fn write_cycles_csv(cycles: &[TrainCycle], path: &Path) -> Result<()> {
    let mut csv = Vec::new();
    writeln!(csv, "t,buffer_len,buffer_full,updates_applied,skipped_non_finite,seq")?;
    for c in cycles {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            c.t, c.buffer_len, c.buffer_full as u8, c.updates_applied, c.skipped_non_finite, c.seq
        )?;
    }
    std::fs::write(path, csv)?;
    Ok(())
}

fn run_loopback_mode(args: &OnlineArgs) -> Result<()> {
    let config = LoopbackConfig {
        profile: args.profile()?,
        seed: args.seed,
        noise_std: args.noise_std,
        control: args.control_config(),
        trainer: args.trainer_config(),
        window_s: args.window,
    };
    let report = run_loopback(&config)?;
    let dir = run_dir(&args.out, "online", args.seed)?;
    write_metrics_csv(&report.metrics, &dir.join("metrics.csv"))?;
    write_trace_csv(&report.trace, &dir.join("trace.csv"))?;
    write_cycles_csv(&report.train_cycles, &dir.join("cycles.csv"))?;
    write_manifest(&dir, "online", args)?;

    println!(
        "loopback run: {} ticks, {} weight updates emitted, {} applied",
        report.trace.len(),
        report.updates_emitted,
        report.control_stats.updates_applied
    );
    if let Some(full) = report.buffer_full_at_first_training {
        println!("buffer full at first training cycle: {full}");
    }
    match report.post10s_mean_windowed_accuracy {
        Some(acc) => println!("mean {}s-window accuracy after first 10 s: {acc:.2}%", args.window),
        None => println!("run too short for post-10 s accuracy"),
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn run_udp_mode(args: &OnlineArgs) -> Result<()> {
    match args.role {
        Role::Control => {
            let (dataset, truth_phi) =
                generate_gait_with_phase(&args.profile()?, args.seed, args.noise_std)?;
            // Trainer and control initialize the same net from the shared
            // seed, so the first estimates match on both sides.
            let initial_net = FeedforwardNet::random(
                regression_layer_sizes(),
                Activation::Linear,
                rom_scaling(),
                args.seed,
            )?;
            let (trace, metrics, stats) = run_control_udp(
                &dataset,
                &truth_phi,
                args.control_config(),
                initial_net,
                &args.ctrl_addr,
                &args.train_addr,
                args.window,
                true,
            )
            .with_context(|| format!("control endpoint {}", args.ctrl_addr))?;
            let dir = run_dir(&args.out, "online", args.seed)?;
            write_metrics_csv(&metrics, &dir.join("metrics.csv"))?;
            write_trace_csv(&trace, &dir.join("trace.csv"))?;
            write_manifest(&dir, "online", args)?;
            println!(
                "control run: {} ticks, {} batches sent, {} updates applied, {} decode errors",
                stats.ticks, stats.batches_sent, stats.updates_applied, stats.decode_errors
            );
            if let Some(acc) = mean_windowed_accuracy(&metrics, 10.0) {
                println!("mean {}s-window accuracy after first 10 s: {acc:.2}%", args.window);
            }
            println!("wrote {}", dir.display());
        }
        Role::Trainer => {
            let stats = run_trainer_udp(
                args.trainer_config(),
                &args.train_addr,
                &args.ctrl_addr,
                args.duration,
            )
            .with_context(|| format!("trainer endpoint {}", args.train_addr))?;
            let dir = run_dir(&args.out, "online-trainer", args.seed)?;
            write_cycles_csv(&stats.cycles, &dir.join("cycles.csv"))?;
            write_manifest(&dir, "online", args)?;
            println!(
                "trainer run: {} cycles, {} weight frames sent, {} retries, {} unacknowledged, \
                 {} decode errors, {} dropped samples",
                stats.cycles.len(),
                stats.weights_sent,
                stats.retries,
                stats.unacknowledged,
                stats.decode_errors,
                stats.dropped_samples
            );
            println!("wrote {}", dir.display());
        }
    }
    Ok(())
}

pub fn run(args: OnlineArgs) -> Result<()> {
    match args.mode {
        Mode::Loopback => run_loopback_mode(&args),
        Mode::Udp => run_udp_mode(&args),
    }
}
