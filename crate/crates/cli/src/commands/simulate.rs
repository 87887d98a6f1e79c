//! `gpk simulate` — replay test walks through the three switching
//! strategies with a trained model in the loop, reporting estimator
//! quality per condition and the torque discontinuities per strategy.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use gpk_core::control::{
    discontinuity_metric, Controller, ControllerConfig, ExoParams, Strategy, TorqueCommand,
};
use gpk_core::gait::{generate_gait_with_phase, load_csv, SpeedProfile};
use gpk_core::metrics::{accuracy, rmse};
use gpk_core::{GaitDataset, PhaseLabel};

use super::model::Model;
use crate::util::{run_dir, write_manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseSource {
    /// Closed loop: the model's estimate drives the controllers
    Model,
    /// The ground-truth phase drives the controllers
    Truth,
}

#[derive(Debug, clap::Args, serde::Serialize)]
pub struct SimulateArgs {
    /// Trained model file (.json linear or .nnw network)
    #[arg(long)]
    pub model: PathBuf,
    /// Training dataset for the whole-set training row
    #[arg(long)]
    pub train_data: Option<PathBuf>,
    /// Seed for the generated test walks
    #[arg(long, default_value_t = 100)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.02)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,
    /// sFSM smoothing time constant, seconds
    #[arg(long, default_value_t = 0.2)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = PhaseSource::Model)]
    pub phase_source: PhaseSource,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

struct ConditionResult {
    rmse: f64,
    accuracy: f64,
}

fn estimator_quality(
    model: &Model,
    dataset: &GaitDataset,
    theta: f64,
) -> Result<(ConditionResult, Vec<f64>)> {
    let mut values = Vec::with_capacity(dataset.len());
    let mut labels = Vec::with_capacity(dataset.len());
    for s in &dataset.samples {
        let (v, l) = model.predict(&s.angles, theta);
        values.push(v);
        labels.push(l);
    }
    let truth: Vec<PhaseLabel> = dataset.samples.iter().map(|s| s.phase).collect();
    let result = ConditionResult {
        rmse: rmse(&values, &dataset.phase_values())?,
        accuracy: accuracy(&labels, &truth)?,
    };
    Ok((result, values))
}

fn write_torque_trace(
    path: &PathBuf,
    dataset: &GaitDataset,
    torques: &[TorqueCommand],
    strategy: Strategy,
    phi: &[f64],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,tau_lh,tau_lk,tau_la,tau_rh,tau_rk,tau_ra,strategy,phi")?;
    for ((s, tau), p) in dataset.samples.iter().zip(torques).zip(phi) {
        write!(w, "{}", s.t)?;
        for v in tau.0 {
            write!(w, ",{v}")?;
        }
        writeln!(w, ",{},{}", strategy.name(), p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let dir = run_dir(&args.out, "simulate", args.seed)?;
    let mut csv = Vec::new();
    writeln!(csv, "strategy,condition,rmse,accuracy,max_jump,mean_jump")?;
    println!("model: {}", model.describe());
    println!(
        "{:<8} {:<10} {:>8} {:>9} {:>9} {:>9}",
        "strategy", "condition", "RMSE", "accuracy", "max_jump", "mean_jump"
    );

    if let Some(train_path) = &args.train_data {
        let train = load_csv(train_path)
            .with_context(|| format!("loading {}", train_path.display()))?;
        let (q, _) = estimator_quality(&model, &train, args.theta)?;
        writeln!(csv, "training,train,{},{},,", q.rmse, q.accuracy)?;
        println!(
            "{:<8} {:<10} {:>8.4} {:>8.2}% {:>9} {:>9}",
            "training", "train", q.rmse, q.accuracy, "-", "-"
        );
    }

    let conditions: [(&str, SpeedProfile, u64); 3] = [
        ("steady-1", SpeedProfile::steady(1.0, 30.0)?, args.seed + 1),
        ("steady-3.5", SpeedProfile::steady(3.5, 30.0)?, args.seed + 2),
        ("free", SpeedProfile::free(30.0, args.seed + 3)?, args.seed + 3),
    ];
    let config = ControllerConfig {
        theta: args.theta,
        tau: args.tau,
    };

    for (name, profile, cond_seed) in &conditions {
        let (dataset, truth_phi) = generate_gait_with_phase(profile, *cond_seed, args.noise_std)?;
        let (quality, estimates) = estimator_quality(&model, &dataset, args.theta)?;
        let drive: &[f64] = match args.phase_source {
            PhaseSource::Model => &estimates,
            PhaseSource::Truth => &truth_phi,
        };
        for strategy in Strategy::ALL {
            let mut controller = Controller::new(strategy, config, ExoParams::default());
            let dt = 1.0 / dataset.sample_rate;
            let torques: Vec<TorqueCommand> = dataset
                .samples
                .iter()
                .zip(drive)
                .map(|(s, &phi)| controller.step(phi, &s.angles, dt).0)
                .collect();
            let jumps = discontinuity_metric(&torques)?;
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                strategy.name(),
                name,
                quality.rmse,
                quality.accuracy,
                jumps.max_jump,
                jumps.mean_jump
            )?;
            println!(
                "{:<8} {:<10} {:>8.4} {:>8.2}% {:>9.4} {:>9.5}",
                strategy.name(),
                name,
                quality.rmse,
                quality.accuracy,
                jumps.max_jump,
                jumps.mean_jump
            );
            let trace_path = dir.join(format!("trace_{}_{}.csv", strategy.name(), name));
            write_torque_trace(&trace_path, &dataset, &torques, strategy, drive)?;
        }
    }

    std::fs::write(dir.join("simulate.csv"), csv)?;
    write_manifest(&dir, "simulate", &args)?;
    println!("wrote {}", dir.join("simulate.csv").display());
    Ok(())
}
