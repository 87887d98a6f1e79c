//! `gpk train` — fit one estimator and save the model file.

use std::path::PathBuf;

use anyhow::{Context, Result};
use gpk_core::estimators::fit_linear;
use gpk_core::gait::{generate_gait, load_csv};
use gpk_core::metrics::{accuracy, rmse};
use gpk_core::training::{train_network, LMConfig, ModelKind};
use gpk_core::GaitDataset;

use super::model::Model;
use crate::util::{run_dir, write_manifest, ProfileArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKindArg {
    Linear,
    NnFit,
    NnClass,
}

impl From<ModelKindArg> for ModelKind {
    fn from(value: ModelKindArg) -> ModelKind {
        match value {
            ModelKindArg::Linear => ModelKind::Linear,
            ModelKindArg::NnFit => ModelKind::NnFit,
            ModelKindArg::NnClass => ModelKind::NnClass,
        }
    }
}

#[derive(Debug, clap::Args, serde::Serialize)]
pub struct TrainArgs {
    /// Training dataset CSV; generated from the profile flags when absent
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub profile_args: ProfileArgs,
    #[arg(long, value_enum, default_value_t = ModelKindArg::NnFit)]
    pub model_kind: ModelKindArg,
    /// Seed for data generation and weight initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Angle noise for generated data, radians
    #[arg(long, default_value_t = 0.02)]
    pub noise_std: f64,
    /// Levenberg-Marquardt epoch cap
    #[arg(long, default_value_t = 60)]
    pub max_epochs: usize,
    /// Accepted epochs without a validation best before stopping
    #[arg(long, default_value_t = 12)]
    pub patience: usize,
    /// Decision threshold for regression models
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn load_or_generate(
    data: &Option<PathBuf>,
    profile_args: &ProfileArgs,
    seed: u64,
    noise_std: f64,
) -> Result<GaitDataset> {
    match data {
        Some(path) => load_csv(path).with_context(|| format!("loading {}", path.display())),
        None => Ok(generate_gait(&profile_args.build(seed)?, seed, noise_std)?),
    }
}

pub fn lm_config(seed: u64, max_epochs: usize, patience: usize) -> LMConfig {
    LMConfig {
        max_epochs,
        max_validation_failures: patience,
        rng_seed: seed,
        ..LMConfig::default()
    }
}

pub fn run(args: TrainArgs) -> Result<()> {
    let dataset = load_or_generate(&args.data, &args.profile_args, args.seed, args.noise_std)?;
    let dir = run_dir(&args.out, "train", args.seed)?;
    let config = lm_config(args.seed, args.max_epochs, args.patience);

    let model = match args.model_kind.into() {
        ModelKind::Linear => Model::Linear(fit_linear(&dataset)?),
        kind => {
            let (net, log) = train_network(kind, &dataset, &config, args.seed)?;
            let mut csv = Vec::new();
            log.write_csv(&mut csv)?;
            std::fs::write(dir.join("training_log.csv"), csv)?;
            println!(
                "trained {} epochs, stop {:?}, best val epoch {}",
                log.accepted_epochs(),
                log.stop,
                log.best_val_epoch
            );
            Model::Net(net)
        }
    };

    let path = model.save(&dir)?;
    write_manifest(&dir, "train", &args)?;

    // Whole-dataset fit quality (no cross-validation).
    let mut values = Vec::with_capacity(dataset.len());
    let mut labels = Vec::with_capacity(dataset.len());
    for s in &dataset.samples {
        let (v, l) = model.predict(&s.angles, args.theta);
        values.push(v);
        labels.push(l);
    }
    let truth: Vec<_> = dataset.samples.iter().map(|s| s.phase).collect();
    println!("saved {} ({})", path.display(), model.describe());
    println!(
        "training-set rmse {:.4}, accuracy {:.2}%",
        rmse(&values, &dataset.phase_values())?,
        accuracy(&labels, &truth)?
    );
    Ok(())
}
