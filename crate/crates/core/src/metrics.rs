//! Run-level evaluation: throughput-per-utilization, switch activity, and
//! thermal aggregates computed from a completed run log.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::RunLog;

/// Switch count within `[start_frame, end_frame)`. The final bin may be
/// shorter than the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HistogramBin {
    pub start_frame: u32,
    pub end_frame: u32,
    pub count: u32,
}

/// Aggregates for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    /// Observed targets per unit utilization, summed over the run.
    pub avtg: f64,
    pub total_nt_observed: u64,
    pub total_gu: f64,
    pub switch_count: u32,
    pub switch_histogram: Vec<HistogramBin>,
    pub peak_temp_c: f64,
    pub mean_temp_c: f64,
    /// Frames each model label was active, sorted by label.
    pub per_model_frames: BTreeMap<String, u64>,
}

/// Default histogram bin width, in frames.
pub const DEFAULT_BIN_WIDTH: u32 = 500;

/// Average targets per unit of utilization: `sum(nt_obs) / sum(gu)`.
/// Undefined when the utilization total is zero.
pub fn avtg(log: &RunLog) -> Result<f64> {
    let total_nt: u64 = log.records.iter().map(|r| u64::from(r.nt_obs)).sum();
    let total_gu: f64 = log.records.iter().map(|r| r.gu).sum();
    if total_gu <= 0.0 {
        return Err(Error::AvtgUndefined);
    }
    Ok(total_nt as f64 / total_gu)
}

/// Bucket committed switches by frame index. Panics if `bin_width` is zero.
pub fn switch_histogram(log: &RunLog, bin_width: u32) -> Vec<HistogramBin> {
    assert!(bin_width > 0, "histogram bin width must be positive");
    let frames = log.records.len() as u32;
    let n_bins = frames.div_ceil(bin_width);
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            start_frame: i * bin_width,
            end_frame: ((i + 1) * bin_width).min(frames),
            count: 0,
        })
        .collect();
    for r in &log.records {
        if r.switched {
            bins[(r.frame / bin_width) as usize].count += 1;
        }
    }
    bins
}

/// Compute the full summary for a run.
pub fn summarize(log: &RunLog, bin_width: u32) -> Result<RunSummary> {
    let avtg = avtg(log)?;
    let total_nt_observed: u64 = log.records.iter().map(|r| u64::from(r.nt_obs)).sum();
    let total_gu: f64 = log.records.iter().map(|r| r.gu).sum();
    let switch_count = log.records.iter().filter(|r| r.switched).count() as u32;
    let peak_temp_c = log
        .records
        .iter()
        .map(|r| r.gt)
        .fold(f64::NEG_INFINITY, f64::max);
    let mean_temp_c = log.records.iter().map(|r| r.gt).sum::<f64>() / log.records.len() as f64;
    let mut per_model_frames = BTreeMap::new();
    for r in &log.records {
        *per_model_frames.entry(r.model.clone()).or_insert(0u64) += 1;
    }
    Ok(RunSummary {
        avtg,
        total_nt_observed,
        total_gu,
        switch_count,
        switch_histogram: switch_histogram(log, bin_width),
        peak_temp_c,
        mean_temp_c,
        per_model_frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::FrameRecord;
    use approx::assert_relative_eq;

    fn record(frame: u32, gu: f64, gt: f64, nt_obs: u32, switched: bool) -> FrameRecord {
        FrameRecord {
            frame,
            model: if frame.is_multiple_of(2) {
                "small".into()
            } else {
                "large".into()
            },
            gu,
            gt,
            nt_true: nt_obs + 1,
            nt_obs,
            score: Some(40.0),
            switched,
        }
    }

    fn log_of(records: Vec<FrameRecord>) -> RunLog {
        RunLog {
            records,
            scenario_name: None,
            seed: None,
        }
    }

    #[test]
    fn avtg_is_ratio_of_totals() {
        let log = log_of(vec![
            record(0, 50.0, 30.0, 10, false),
            record(1, 50.0, 31.0, 20, false),
        ]);
        assert_relative_eq!(avtg(&log).unwrap(), 0.3);
    }

    #[test]
    fn avtg_undefined_without_utilization() {
        let log = log_of(vec![record(0, 0.0, 30.0, 5, false)]);
        assert!(matches!(avtg(&log), Err(Error::AvtgUndefined)));
        assert!(matches!(avtg(&log_of(vec![])), Err(Error::AvtgUndefined)));
    }

    #[test]
    fn histogram_buckets_by_frame_index() {
        let mut records = Vec::new();
        for f in 0..1100u32 {
            let switched = matches!(f, 0 | 499 | 500 | 999 | 1000);
            records.push(record(f, 50.0, 30.0, 5, switched));
        }
        let bins = switch_histogram(&log_of(records), 500);
        assert_eq!(bins.len(), 3);
        assert_eq!(
            (bins[0].start_frame, bins[0].end_frame, bins[0].count),
            (0, 500, 2)
        );
        assert_eq!(
            (bins[1].start_frame, bins[1].end_frame, bins[1].count),
            (500, 1000, 2)
        );
        // trailing bin is cut short at the end of the run
        assert_eq!(
            (bins[2].start_frame, bins[2].end_frame, bins[2].count),
            (1000, 1100, 1)
        );
    }

    #[test]
    fn histogram_of_exact_multiple_has_full_bins() {
        let records = (0..1000u32)
            .map(|f| record(f, 50.0, 30.0, 5, false))
            .collect();
        let bins = switch_histogram(&log_of(records), 500);
        assert_eq!(bins.len(), 2);
        assert!(bins.iter().all(|b| b.end_frame - b.start_frame == 500));
    }

    #[test]
    fn histogram_of_empty_log_is_empty() {
        assert!(switch_histogram(&log_of(vec![]), 500).is_empty());
    }

    #[test]
    fn summary_aggregates_everything() {
        let log = log_of(vec![
            record(0, 40.0, 30.0, 8, false),
            record(1, 60.0, 35.0, 12, true),
            record(2, 50.0, 34.0, 10, false),
        ]);
        let s = summarize(&log, 2).unwrap();
        assert_relative_eq!(s.avtg, 30.0 / 150.0);
        assert_eq!(s.total_nt_observed, 30);
        assert_relative_eq!(s.total_gu, 150.0);
        assert_eq!(s.switch_count, 1);
        assert_eq!(s.switch_histogram.len(), 2);
        assert_relative_eq!(s.peak_temp_c, 35.0);
        assert_relative_eq!(s.mean_temp_c, 33.0);
        assert_eq!(s.per_model_frames["small"], 2);
        assert_eq!(s.per_model_frames["large"], 1);
    }
}
