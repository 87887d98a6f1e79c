//! `gpk eval` — cross-validate linear, network regression and classifier
//! on one dataset, reproducing the three-row RMSE/accuracy table.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use gpk_core::estimators::fit_linear;
use gpk_core::metrics::{accuracy, rmse};
use gpk_core::training::{kfold_evaluate, train_network, FoldReport, ModelKind};
use gpk_core::GaitDataset;

use super::model::Model;
use super::train::{lm_config, load_or_generate};
use crate::util::{run_dir, write_manifest, ProfileArgs};

#[derive(Debug, clap::Args, serde::Serialize)]
pub struct EvalArgs {
    /// Dataset CSV; generated from the profile flags when absent
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub profile_args: ProfileArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Angle noise for generated data, radians
    #[arg(long, default_value_t = 0.02)]
    pub noise_std: f64,
    /// Number of contiguous temporal folds
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub theta: f64,
    #[arg(long, default_value_t = 60)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 12)]
    pub patience: usize,
    /// Train and score on the whole dataset instead of cross-validating
    #[arg(long)]
    pub no_cv: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

const KINDS: [ModelKind; 3] = [ModelKind::Linear, ModelKind::NnFit, ModelKind::NnClass];

/// Whole-dataset fit without cross-validation (the asterisked training row).
fn evaluate_no_cv(
    dataset: &GaitDataset,
    kind: ModelKind,
    args: &EvalArgs,
) -> Result<(f64, f64)> {
    let model = match kind {
        ModelKind::Linear => Model::Linear(fit_linear(dataset)?),
        kind => {
            let config = lm_config(args.seed, args.max_epochs, args.patience);
            Model::Net(train_network(kind, dataset, &config, args.seed)?.0)
        }
    };
    let mut values = Vec::with_capacity(dataset.len());
    let mut labels = Vec::with_capacity(dataset.len());
    for s in &dataset.samples {
        let (v, l) = model.predict(&s.angles, args.theta);
        values.push(v);
        labels.push(l);
    }
    let truth: Vec<_> = dataset.samples.iter().map(|s| s.phase).collect();
    Ok((
        rmse(&values, &dataset.phase_values())?,
        accuracy(&labels, &truth)?,
    ))
}

pub fn run(args: EvalArgs) -> Result<()> {
    let dataset = load_or_generate(&args.data, &args.profile_args, args.seed, args.noise_std)?;
    let dir = run_dir(&args.out, "eval", args.seed)?;
    let config = lm_config(args.seed, args.max_epochs, args.patience);

    let mut csv = Vec::new();
    writeln!(csv, "model,fold,rmse,accuracy,n_samples")?;
    println!("{:<10} {:>8} {:>10}", "model", "RMSE", "accuracy");

    for kind in KINDS {
        if args.no_cv {
            let (r, a) = evaluate_no_cv(&dataset, kind, &args)?;
            writeln!(csv, "{},all,{},{},{}", kind.name(), r, a, dataset.len())?;
            println!("{:<10} {:>8.4} {:>9.2}%", kind.name(), r, a);
        } else {
            let report: FoldReport = kfold_evaluate(&dataset, args.k, kind, &config, args.theta)?;
            for (i, fold) in report.folds.iter().enumerate() {
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    kind.name(),
                    i,
                    fold.rmse,
                    fold.accuracy,
                    fold.n_samples
                )?;
            }
            writeln!(
                csv,
                "{},mean,{},{},{}",
                kind.name(),
                report.mean_rmse,
                report.mean_accuracy,
                dataset.len()
            )?;
            println!(
                "{:<10} {:>8.4} {:>9.2}%",
                kind.name(),
                report.mean_rmse,
                report.mean_accuracy
            );
            for w in &report.warnings {
                eprintln!("warning ({}): {w}", kind.name());
            }
        }
    }

    std::fs::write(dir.join("eval.csv"), csv)?;
    write_manifest(&dir, "eval", &args)?;
    println!("wrote {}", dir.join("eval.csv").display());
    Ok(())
}
