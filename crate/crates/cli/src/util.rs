//! Shared CLI plumbing: config-file splicing, output directories, manifest
//! and CSV writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gpk_core::gait::SpeedProfile;
use gpk_core::metrics::StreamPoint;
use gpk_core::online::TraceRow;

/// Expands `--config FILE` into command-line flags inserted right after the
/// subcommand, so explicitly passed flags still win (last value wins).
///
/// The file holds one `key = value` pair per line, keys named like the long
/// flags without the leading dashes; `#` starts a comment. Boolean keys
/// emit a bare flag when true.
pub fn splice_config_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut path: Option<PathBuf> = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    // Flags given explicitly on the command line beat the config file.
    let explicit: std::collections::HashSet<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "config {}:{}: expected key=value, found {line:?}",
                path.display(),
                lineno + 1
            );
        };
        let (key, value) = (key.trim(), value.trim());
        if explicit.contains(key) {
            continue;
        }
        match value {
            "true" => injected.push(format!("--{key}")),
            "false" => {}
            _ => {
                injected.push(format!("--{key}"));
                injected.push(value.to_string());
            }
        }
    }
    // Insert after the subcommand token.
    let subcommand_at = args
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| !a.starts_with('-'))
        .map(|(i, _)| i);
    let Some(at) = subcommand_at else {
        return Ok(args);
    };
    let mut out = args[..=at].to_vec();
    out.extend(injected);
    out.extend(args[at + 1..].iter().cloned());
    Ok(out)
}

/// Creates `<base>/<command>_<seed>/` for this run's outputs.
pub fn run_dir(base: &Path, command: &str, seed: u64) -> Result<PathBuf> {
    let dir = base.join(format!("{command}_{seed}"));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Records the fully resolved configuration next to the outputs.
pub fn write_manifest(dir: &Path, command: &str, config: &impl serde::Serialize) -> Result<()> {
    let manifest = serde_json::json!({ "command": command, "config": config });
    let path = dir.join("manifest.json");
    std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&manifest)?))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Profile selection shared by the data-generating commands.
#[derive(Debug, Clone, clap::Args, serde::Serialize)]
pub struct ProfileArgs {
    /// Walking protocol
    #[arg(long, value_enum, default_value_t = ProfileKind::Calibration)]
    pub profile: ProfileKind,
    /// Belt speed for the steady profile, km/h
    #[arg(long, default_value_t = 3.0)]
    pub speed_kmh: f64,
    /// Duration of the steady/free profiles, seconds
    #[arg(long, default_value_t = 30.0)]
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// 1, 2, 3, 3.5, 3, 2, 1 km/h for 30 s each
    Calibration,
    /// One constant-speed segment
    Steady,
    /// Ground walking, speed jittered per cycle
    Free,
}

impl ProfileArgs {
    pub fn build(&self, seed: u64) -> Result<SpeedProfile> {
        let profile = match self.profile {
            ProfileKind::Calibration => SpeedProfile::calibration(),
            ProfileKind::Steady => SpeedProfile::steady(self.speed_kmh, self.duration)?,
            ProfileKind::Free => SpeedProfile::free(self.duration, seed)?,
        };
        Ok(profile)
    }
}

/// Writes the online metric series: Fig. 6/7-style accuracy and RMSE.
pub fn write_metrics_csv(points: &[StreamPoint], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,acc_window,acc_cum,rmse_window,rmse_cum")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{}",
            p.t, p.acc_window, p.acc_cum, p.rmse_window, p.rmse_cum
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a control-loop trace: estimate, net generation, blend weights
/// and commanded torques per tick.
pub fn write_trace_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "t,estimate,label,generation,w_lgf,w_rgf,tau_lh,tau_lk,tau_la,tau_rh,tau_rk,tau_ra"
    )?;
    for r in rows {
        write!(
            w,
            "{},{},{},{},{},{}",
            r.t,
            r.estimate,
            r.label.value(),
            r.generation,
            r.weights.w_lgf,
            r.weights.w_rgf
        )?;
        for tau in r.torques {
            write!(w, ",{tau}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
