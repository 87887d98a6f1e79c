//! Evaluation metrics: RMSE, label accuracy, the sorted-signal monotonicity
//! deviation, and sliding-window online metrics.

use std::collections::VecDeque;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::gait::PhaseLabel;

/// Point metrics over one evaluation set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub rmse: f64,
    /// Percent in [0, 100].
    pub accuracy: f64,
    pub n_samples: usize,
}

/// Root mean squared error between two equally long sequences.
pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != targets.len() {
        return Err(Error::Contract(format!(
            "rmse needs equal nonzero lengths, got {} and {}",
            predictions.len(),
            targets.len()
        )));
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok((sum / predictions.len() as f64).sqrt())
}

/// Percentage of positions where the labels match.
pub fn accuracy(predicted: &[PhaseLabel], targets: &[PhaseLabel]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != targets.len() {
        return Err(Error::Contract(format!(
            "accuracy needs equal nonzero lengths, got {} and {}",
            predicted.len(),
            targets.len()
        )));
    }
    let hits = predicted
        .iter()
        .zip(targets)
        .filter(|(p, t)| p == t)
        .count();
    Ok(100.0 * hits as f64 / predicted.len() as f64)
}

/// RMSE between a segment and its descending-sorted copy.
///
/// Zero exactly when the segment is already non-increasing; spikes and
/// reversals inside an ideally monotone stretch show up as positive
/// deviation.
pub fn monotonicity_deviation(segment: &[f64]) -> Result<f64> {
    if segment.len() < 2 {
        return Err(Error::Contract(format!(
            "monotonicity deviation needs at least 2 samples, got {}",
            segment.len()
        )));
    }
    let mut sorted = segment.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite segment values"));
    rmse(segment, &sorted)
}

/// Index ranges of descending stretches of the target phase.
///
/// A descending transition runs from the last sample still at +1, through
/// the zero plateau, to the first sample at -1 (about a quarter of a gait
/// cycle); it is split at the midpoint of the zero plateau into two
/// segments, across each of which the ideal estimate descends
/// monotonically.
pub fn descending_segments(target_values: &[f64]) -> Vec<Range<usize>> {
    // Collapse into (value, start, end) plateaus.
    let mut plateaus: Vec<(f64, usize, usize)> = Vec::new();
    for (i, &v) in target_values.iter().enumerate() {
        match plateaus.last_mut() {
            Some((pv, _, end)) if *pv == v => *end = i + 1,
            _ => plateaus.push((v, i, i + 1)),
        }
    }
    let mut segments = Vec::new();
    for w in plateaus.windows(3) {
        if w[0].0 == 1.0 && w[1].0 == 0.0 && w[2].0 == -1.0 {
            let top = w[0].2 - 1; // last sample at +1
            let mid = (w[1].1 + w[1].2) / 2; // middle of the zero plateau
            let bottom = w[2].1; // first sample at -1
            if mid > top + 1 {
                segments.push(top..mid + 1);
            }
            if bottom > mid + 1 {
                segments.push(mid..bottom + 1);
            }
        }
    }
    segments
}

/// Mean monotonicity deviation of an estimate over all auto-extracted
/// descending stretches of its target.
pub fn mean_descent_deviation(estimates: &[f64], target_values: &[f64]) -> Result<f64> {
    if estimates.len() != target_values.len() {
        return Err(Error::Contract("estimate/target length mismatch".into()));
    }
    let segments = descending_segments(target_values);
    if segments.is_empty() {
        return Err(Error::Contract(
            "no descending phase segments in target".into(),
        ));
    }
    let mut total = 0.0;
    let n = segments.len();
    for range in segments {
        total += monotonicity_deviation(&estimates[range])?;
    }
    Ok(total / n as f64)
}

/// One emitted point of the online metric stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamPoint {
    pub t: f64,
    /// Accuracy over the trailing window, percent.
    pub acc_window: f64,
    /// Accuracy over the whole prefix, percent.
    pub acc_cum: f64,
    pub rmse_window: f64,
    pub rmse_cum: f64,
}

/// Sliding-window and cumulative accuracy/RMSE over a prediction stream.
///
/// The window is truncated at stream start, so windowed and cumulative
/// metrics coincide until one full window has elapsed.
#[derive(Debug)]
pub struct StreamMetrics {
    window: VecDeque<(bool, f64)>,
    capacity: usize,
    sample_rate: f64,
    ticks: usize,
    hits_window: usize,
    sqerr_window: f64,
    hits_cum: usize,
    sqerr_cum: f64,
}

impl StreamMetrics {
    pub fn new(window_s: f64, sample_rate: f64) -> Result<Self> {
        let capacity = (window_s * sample_rate).round() as usize;
        if capacity < 1 {
            return Err(Error::Config(
                "window must cover at least one sample".into(),
            ));
        }
        Ok(StreamMetrics {
            window: VecDeque::with_capacity(capacity),
            capacity,
            sample_rate,
            ticks: 0,
            hits_window: 0,
            sqerr_window: 0.0,
            hits_cum: 0,
            sqerr_cum: 0.0,
        })
    }

    /// Feeds one (prediction, target) pair and reports the metrics at this
    /// tick. `predicted_value` is the raw numeric estimate scored by RMSE;
    /// the labels are scored by accuracy.
    pub fn push(
        &mut self,
        predicted_value: f64,
        predicted: PhaseLabel,
        target: PhaseLabel,
    ) -> StreamPoint {
        let hit = predicted == target;
        let err = predicted_value - target.value();
        let sq = err * err;

        if self.window.len() == self.capacity {
            let (old_hit, old_sq) = self.window.pop_front().unwrap();
            self.hits_window -= old_hit as usize;
            self.sqerr_window -= old_sq;
        }
        self.window.push_back((hit, sq));
        self.hits_window += hit as usize;
        self.sqerr_window += sq;
        self.hits_cum += hit as usize;
        self.sqerr_cum += sq;

        let t = self.ticks as f64 / self.sample_rate;
        self.ticks += 1;
        let wn = self.window.len() as f64;
        let cn = self.ticks as f64;
        StreamPoint {
            t,
            acc_window: 100.0 * self.hits_window as f64 / wn,
            acc_cum: 100.0 * self.hits_cum as f64 / cn,
            // Running subtraction can leave a tiny negative residue.
            rmse_window: (self.sqerr_window / wn).max(0.0).sqrt(),
            rmse_cum: (self.sqerr_cum / cn).max(0.0).sqrt(),
        }
    }
}

/// Mean windowed accuracy over all points at or after `from_t`.
pub fn mean_windowed_accuracy(points: &[StreamPoint], from_t: f64) -> Option<f64> {
    let tail: Vec<f64> = points
        .iter()
        .filter(|p| p.t >= from_t)
        .map(|p| p.acc_window)
        .collect();
    if tail.is_empty() {
        None
    } else {
        Some(tail.iter().sum::<f64>() / tail.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rmse_hand_examples() {
        assert_eq!(rmse(&[1.0, 0.0, -1.0], &[1.0, 0.0, -1.0]).unwrap(), 0.0);
        let v = rmse(&[1.0, 0.0, -1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert!((v - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn classifier_errors_contribute_one_or_four() {
        // On the {-1, 0, 1} domain every mistake costs squared 1 or 4.
        let v = rmse(&[-1.0], &[1.0]).unwrap();
        assert_eq!(v * v, 4.0);
        let v = rmse(&[0.0], &[1.0]).unwrap();
        assert_eq!(v * v, 1.0);
    }

    #[test]
    fn accuracy_hand_examples() {
        use PhaseLabel::*;
        assert_eq!(accuracy(&[Left, Right], &[Left, Right]).unwrap(), 100.0);
        assert_eq!(accuracy(&[Left, Right], &[Right, Left]).unwrap(), 0.0);
        assert_eq!(
            accuracy(&[Left, Left, Left, Right], &[Left, Left, Left, Left]).unwrap(),
            75.0
        );
        assert!(accuracy(&[Left], &[]).is_err());
    }

    #[test]
    fn monotonicity_of_sorted_input_is_zero() {
        assert_eq!(monotonicity_deviation(&[1.0, 0.5, 0.0]).unwrap(), 0.0);
        assert_eq!(monotonicity_deviation(&[1.0, 1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn monotonicity_hand_example() {
        // [1.0, 0.8, 0.9, 0.5] sorts to [1.0, 0.9, 0.8, 0.5].
        let v = monotonicity_deviation(&[1.0, 0.8, 0.9, 0.5]).unwrap();
        assert!((v - (0.02f64 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn monotonicity_needs_two_samples() {
        assert!(monotonicity_deviation(&[1.0]).is_err());
    }

    #[test]
    fn descending_segments_cover_the_transition() {
        // +1 plateau [0,4), 0 plateau [4,10), -1 plateau [10,14).
        let mut target = vec![1.0; 4];
        target.extend(vec![0.0; 6]);
        target.extend(vec![-1.0; 4]);
        let segs = descending_segments(&target);
        // Last +1 sample is index 3, zero midpoint 7, first -1 sample 10.
        assert_eq!(segs, vec![3..8, 7..11]);
        // Ascending transitions produce nothing.
        let ascending: Vec<f64> = target.iter().rev().cloned().collect();
        assert!(descending_segments(&ascending).is_empty());
    }

    #[test]
    fn stream_metrics_constant_correct_is_pinned_at_100() {
        let mut sm = StreamMetrics::new(0.05, 100.0).unwrap();
        for _ in 0..20 {
            let p = sm.push(1.0, PhaseLabel::Right, PhaseLabel::Right);
            assert_eq!(p.acc_window, 100.0);
            assert_eq!(p.acc_cum, 100.0);
            assert_eq!(p.rmse_window, 0.0);
        }
    }

    #[test]
    fn stream_metrics_window_recovers_while_cumulative_lags() {
        // First half wrong, second half right, window shorter than a half.
        let mut sm = StreamMetrics::new(0.1, 100.0).unwrap(); // 10 ticks
        let mut last = None;
        for i in 0..100 {
            let (pred, value) = if i < 50 {
                (PhaseLabel::Left, -1.0)
            } else {
                (PhaseLabel::Right, 1.0)
            };
            last = Some(sm.push(value, pred, PhaseLabel::Right));
        }
        let last = last.unwrap();
        assert_eq!(last.acc_window, 100.0);
        assert!((last.acc_cum - 50.0).abs() < 1e-9);
        assert!(last.acc_cum < 100.0);
    }

    #[test]
    fn windowed_equals_cumulative_before_one_window_elapses() {
        let mut sm = StreamMetrics::new(0.2, 100.0).unwrap(); // 20 ticks
        for i in 0..20 {
            let pred = if i % 3 == 0 {
                PhaseLabel::Right
            } else {
                PhaseLabel::Double
            };
            let p = sm.push(pred.value(), pred, PhaseLabel::Right);
            assert_eq!(p.acc_window, p.acc_cum);
            assert_eq!(p.rmse_window, p.rmse_cum);
        }
    }

    proptest! {
        /// Deviation is zero iff the segment is non-increasing.
        #[test]
        fn zero_deviation_iff_sorted(values in proptest::collection::vec(-1.0f64..1.0, 2..40)) {
            let dev = monotonicity_deviation(&values).unwrap();
            let non_increasing = values.windows(2).all(|w| w[0] >= w[1]);
            if non_increasing {
                prop_assert_eq!(dev, 0.0);
            } else {
                prop_assert!(dev > 0.0);
            }
        }

        /// Appending a value below the minimum extends both the segment and
        /// its sorted copy in place, leaving the summed squared deviation
        /// unchanged (the mean-based RMSE just renormalizes by length).
        #[test]
        fn appending_below_minimum_preserves_squared_deviation(
            values in proptest::collection::vec(-1.0f64..1.0, 2..40),
        ) {
            let n = values.len() as f64;
            let before = monotonicity_deviation(&values).unwrap();
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut extended = values.clone();
            extended.push(min - 0.5);
            let after = monotonicity_deviation(&extended).unwrap();
            let sum_before = before * before * n;
            let sum_after = after * after * (n + 1.0);
            prop_assert!((sum_before - sum_after).abs() < 1e-9);
        }
    }
}
