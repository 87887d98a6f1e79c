//! `gpk generate` — write a synthetic gait dataset.

use std::path::PathBuf;

use anyhow::{Context, Result};
use gpk_core::gait::{generate_gait, save_csv, PhaseLabel};

use crate::util::{run_dir, write_manifest, ProfileArgs};

#[derive(Debug, clap::Args, serde::Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub profile_args: ProfileArgs,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gaussian angle noise, radians
    #[arg(long, default_value_t = 0.0)]
    pub noise_std: f64,
    /// Output directory root
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(args: GenerateArgs) -> Result<()> {
    let profile = args.profile_args.build(args.seed)?;
    let dataset = generate_gait(&profile, args.seed, args.noise_std)?;
    let dir = run_dir(&args.out, "generate", args.seed)?;
    let csv = dir.join("dataset.csv");
    save_csv(&dataset, &csv).with_context(|| format!("writing {}", csv.display()))?;
    write_manifest(&dir, "generate", &args)?;

    let n = dataset.len() as f64;
    println!("wrote {} ({} samples at {} Hz)", csv.display(), dataset.len(), dataset.sample_rate);
    for label in PhaseLabel::ALL {
        let count = dataset.samples.iter().filter(|s| s.phase == label).count();
        println!(
            "  {:>6} ({:>2}): {:>7} samples ({:.1}%)",
            format!("{label:?}"),
            label.token(),
            count,
            100.0 * count as f64 / n
        );
    }
    Ok(())
}
