//! CSV persistence for gait datasets.
//!
//! Fixed schema: `t,lh,lk,la,rh,rk,ra,phase`. Floats are written in Rust's
//! shortest round-trip decimal form, so save/load preserves every field
//! exactly. Phase tokens are the numeric encoding `-1`, `0`, `1`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{GaitDataset, GaitSample, JointAngles, PhaseLabel, DEFAULT_SAMPLE_RATE};
use crate::error::{Error, Result};

/// Fixed header row.
pub const CSV_HEADER: &str = "t,lh,lk,la,rh,rk,ra,phase";

/// Writes a dataset to `path`.
pub fn save_csv(dataset: &GaitDataset, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{CSV_HEADER}")?;
    for s in &dataset.samples {
        let a = &s.angles;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.t,
            a[0],
            a[1],
            a[2],
            a[3],
            a[4],
            a[5],
            s.phase.token()
        )?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field(field: &str, name: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {name} value {field:?}"),
    })
}

/// Reads a dataset from `path`.
///
/// Errors name the offending line: malformed rows, unknown phase tokens and
/// non-monotone timestamps are rejected, and a file without data rows is a
/// "no samples" error.
pub fn load_csv(path: &Path) -> Result<GaitDataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut samples: Vec<GaitSample> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if idx == 0 {
            if line.trim_end() != CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header {CSV_HEADER:?}, found {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let t = parse_field(fields[0], "t", lineno)?;
        let mut angles: JointAngles = [0.0; 6];
        for (j, slot) in angles.iter_mut().enumerate() {
            *slot = parse_field(fields[j + 1], "angle", lineno)?;
        }
        let phase = PhaseLabel::from_token(fields[7].trim()).ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("unknown phase token {:?}", fields[7].trim()),
        })?;
        if let Some(prev) = samples.last() {
            if t <= prev.t {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("non-monotone timestamp {} after {}", t, prev.t),
                });
            }
        }
        samples.push(GaitSample { t, angles, phase });
    }

    if samples.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no samples".into(),
        });
    }

    let sample_rate = if samples.len() >= 2 {
        let dt = samples[1].t - samples[0].t;
        let rate = 1.0 / dt;
        // Quantization of t = k / rate leaves the reciprocal a hair off an
        // integer rate; snap when it is this close.
        if (rate - rate.round()).abs() < 1e-6 {
            rate.round()
        } else {
            rate
        }
    } else {
        DEFAULT_SAMPLE_RATE
    };

    Ok(GaitDataset {
        samples,
        sample_rate,
    })
}
