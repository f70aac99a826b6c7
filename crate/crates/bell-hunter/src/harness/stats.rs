//! Aggregation of trajectory records into the summary statistics the
//! experiment pipelines emit: per-iteration means over trajectories, set
//! means/medians/quartiles, squared-error metrics and violation times.

use crate::cspsa::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One emitted row of per-iteration statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStatistics<T: Scalar> {
    pub k: u32,
    pub mean_s: T,
    pub median_s: T,
    pub q1: T,
    pub q3: T,
    pub mse_mean: T,
    pub mse_median: T,
    pub theory_s: T,
}

/// Mean, median and quartiles of a set of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetStats<T: Scalar> {
    pub mean: T,
    pub median: T,
    pub q1: T,
    pub q3: T,
}

/// Which statistic `k_violation` tracks against the classical bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationMode {
    Q1Above2,
    MeanAbove2,
}

/// Arithmetic mean of the exact-value diagnostic at iteration `k` (1-based)
/// across trajectory records.
pub fn mean_over_trajectories<T: Scalar>(records: &[TrajectoryRecord<T>], k: u32) -> Result<T> {
    if records.is_empty() {
        return Err(Error::EmptyInput("trajectory records"));
    }
    let mut sum = T::zero();
    for record in records {
        sum += diagnostic_at(record, k)?;
    }
    Ok(sum / T::from_usize(records.len()).unwrap())
}

/// Mean plus median and quartiles (linear interpolation between order
/// statistics, the "type 7" convention).
pub fn set_statistics<T: Scalar>(values: &[T]) -> Result<SetStats<T>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("value set"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("statistics over finite values"));
    let mean = values.iter().copied().sum::<T>() / T::from_usize(values.len()).unwrap();
    Ok(SetStats {
        mean,
        median: quantile_type7(&sorted, 0.5),
        q1: quantile_type7(&sorted, 0.25),
        q3: quantile_type7(&sorted, 0.75),
    })
}

/// Per-trajectory squared error `|S_k - S_max|^2` against the oracle value,
/// reduced to its mean and median across trajectories.
pub fn squared_error_stats<T: Scalar>(
    records: &[TrajectoryRecord<T>],
    k: u32,
    s_max_theory: T,
) -> Result<(T, T)> {
    if records.is_empty() {
        return Err(Error::EmptyInput("trajectory records"));
    }
    let mut errors = Vec::with_capacity(records.len());
    for record in records {
        let s = diagnostic_at(record, k)?;
        let diff = s - s_max_theory;
        errors.push(diff * diff);
    }
    let stats = set_statistics(&errors)?;
    Ok((stats.mean, stats.median))
}

/// Smallest `k` at which the selected statistic exceeds 2 and stays above 2
/// for every subsequently recorded `k`; `None` when that never happens.
pub fn k_violation<T: Scalar>(
    stats_by_k: &[SummaryStatistics<T>],
    mode: ViolationMode,
) -> Option<u32> {
    let bound = T::lit(2.0);
    let mut first: Option<u32> = None;
    for row in stats_by_k {
        if violation_value(row, mode) > bound {
            first.get_or_insert(row.k);
        } else {
            first = None;
        }
    }
    first
}

/// Smallest `k` at which the selected statistic first exceeds 2, with no
/// requirement that it stays above afterwards.
pub fn k_violation_first_crossing<T: Scalar>(
    stats_by_k: &[SummaryStatistics<T>],
    mode: ViolationMode,
) -> Option<u32> {
    let bound = T::lit(2.0);
    stats_by_k
        .iter()
        .find(|row| violation_value(row, mode) > bound)
        .map(|row| row.k)
}

fn violation_value<T: Scalar>(row: &SummaryStatistics<T>, mode: ViolationMode) -> T {
    match mode {
        ViolationMode::Q1Above2 => row.q1,
        ViolationMode::MeanAbove2 => row.mean_s,
    }
}

fn diagnostic_at<T: Scalar>(record: &TrajectoryRecord<T>, k: u32) -> Result<T> {
    if k == 0 || record.len() < k as usize {
        return Err(Error::InvalidConfig(format!(
            "iteration {k} outside recorded range 1..={}",
            record.len()
        )));
    }
    record.exact_at(k).ok_or_else(|| {
        Error::InvalidConfig("trajectory record carries no exact-value diagnostic".into())
    })
}

fn quantile_type7<T: Scalar>(sorted: &[T], p: f64) -> T {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = T::lit(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
