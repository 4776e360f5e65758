//! Inlier removal ("tonsuring") and tonsure grids.

use serde::{Deserialize, Serialize};

use crate::distance::{DistanceVector, Metric, Space};
use crate::error::{Error, Result};

/// Survivor counts below this are flagged as low confidence.
pub const RELIABILITY_FLOOR: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TonsureResult {
    /// Surviving indices, ascending.
    pub survivors: Vec<usize>,
    /// Number of inliers removed.
    pub removed_count: usize,
    /// Largest removed distance (0 when nothing was removed).
    pub cutoff_delta: f64,
    /// Realized percentage, 100 * removed / n.
    pub percent: f64,
    pub metric: Metric,
    pub space: Space,
}

impl TonsureResult {
    pub fn n_used(&self) -> usize {
        self.survivors.len()
    }

    pub fn low_confidence(&self) -> bool {
        self.survivors.len() < RELIABILITY_FLOOR
    }

    /// Removed indices, ascending.
    pub fn removed(&self, n: usize) -> Vec<usize> {
        let mut keep = vec![false; n];
        for &i in &self.survivors {
            keep[i] = true;
        }
        (0..n).filter(|&i| !keep[i]).collect()
    }
}

/// Removes the `count` smallest-distance points.
pub fn tonsure_by_count(dist: &DistanceVector, count: usize, space: Space) -> Result<TonsureResult> {
    let n = dist.len();
    if n < count + 2 {
        return Err(Error::TooFewSurvivors {
            percent: 100.0 * count as f64 / n as f64,
            survivors: n.saturating_sub(count),
            needed: 2,
        });
    }
    let mut survivors = dist.order[count..].to_vec();
    survivors.sort_unstable();
    let cutoff_delta = if count == 0 {
        0.0
    } else {
        dist.deltas[dist.order[count - 1]]
    };
    Ok(TonsureResult {
        survivors,
        removed_count: count,
        cutoff_delta,
        percent: 100.0 * count as f64 / n as f64,
        metric: dist.metric,
        space,
    })
}

/// Removes round(n * percent / 100) inliers and reports the realized
/// percentage.
pub fn tonsure_by_percent(dist: &DistanceVector, percent: f64, space: Space) -> Result<TonsureResult> {
    if !(0.0..100.0).contains(&percent) {
        return Err(Error::InvalidPercent(percent));
    }
    let n = dist.len();
    let count = (n as f64 * percent / 100.0).round() as usize;
    if n < count + 2 {
        return Err(Error::TooFewSurvivors {
            percent,
            survivors: n.saturating_sub(count),
            needed: 2,
        });
    }
    tonsure_by_count(dist, count, space)
}

/// Tonsure levels 0, step, 2*step, ... until fewer than `min_survivors`
/// would remain. Levels that round to an already-seen count are skipped.
pub fn tonsure_grid(
    dist: &DistanceVector,
    step_percent: f64,
    min_survivors: usize,
    space: Space,
) -> Result<Vec<TonsureResult>> {
    if step_percent.is_nan() || step_percent <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tonsure step must be positive, got {step_percent}"
        )));
    }
    if min_survivors < 2 {
        return Err(Error::InvalidParameter(format!(
            "min_survivors must be at least 2, got {min_survivors}"
        )));
    }
    let n = dist.len();
    let mut out: Vec<TonsureResult> = Vec::new();
    for k in 0.. {
        let percent = k as f64 * step_percent;
        if percent >= 100.0 {
            break;
        }
        let count = (n as f64 * percent / 100.0).round() as usize;
        if count + min_survivors > n {
            break;
        }
        if out.last().is_some_and(|r| r.removed_count == count) {
            continue;
        }
        out.push(tonsure_by_count(dist, count, space)?);
    }
    Ok(out)
}
