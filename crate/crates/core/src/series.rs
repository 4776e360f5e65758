//! Paired observations, mid-ranks and centroids.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Aligned `(x, y)` samples. Always at least two points, all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSeries {
    xs: Vec<f64>,
    ys: Vec<f64>,
    pub labels: [String; 2],
    /// Free-form provenance: source file, transform, join statistics.
    pub meta: BTreeMap<String, String>,
}

impl PairedSeries {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                xs: xs.len(),
                ys: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: xs.len(),
            });
        }
        if let Some(index) = xs
            .iter()
            .zip(&ys)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            xs,
            ys,
            labels: ["x".to_string(), "y".to_string()],
            meta: BTreeMap::new(),
        })
    }

    pub fn with_labels(mut self, x: impl Into<String>, y: impl Into<String>) -> Self {
        self.labels = [x.into(), y.into()];
        self
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// The same observations with the axes exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            labels: [self.labels[1].clone(), self.labels[0].clone()],
            meta: self.meta.clone(),
        }
    }

    /// Values of both coordinates restricted to `subset`, in subset order.
    pub fn gather(&self, subset: &[usize]) -> (Vec<f64>, Vec<f64>) {
        subset
            .iter()
            .map(|&i| (self.xs[i], self.ys[i]))
            .unzip()
    }

    /// SHA-256 over the little-endian bytes of xs then ys.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for v in self.xs.iter().chain(&self.ys) {
            hasher.update(v.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Sizes of tied groups (only groups of two or more).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TieGroups {
    pub sizes: Vec<usize>,
}

impl TieGroups {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn has_ties(&self) -> bool {
        !self.sizes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedSeries {
    pub ranks_x: Vec<f64>,
    pub ranks_y: Vec<f64>,
    pub tie_groups_x: TieGroups,
    pub tie_groups_y: TieGroups,
}

impl RankedSeries {
    pub fn len(&self) -> usize {
        self.ranks_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks_x.is_empty()
    }
}

/// Mid-ranks (1-based) of `values`; tied values share the average of the
/// ranks they span.
pub fn mid_ranks(values: &[f64]) -> (Vec<f64>, TieGroups) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; n];
    let mut ties = TieGroups::default();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share their mean
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        if end - start > 1 {
            ties.sizes.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

pub fn compute_ranks(series: &PairedSeries) -> RankedSeries {
    let (ranks_x, tie_groups_x) = mid_ranks(series.xs());
    let (ranks_y, tie_groups_y) = mid_ranks(series.ys());
    RankedSeries {
        ranks_x,
        ranks_y,
        tie_groups_x,
        tie_groups_y,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentroidMode {
    Mean,
    Median,
}

/// Center of the cloud. Scales are sample standard deviations in mean mode
/// and absent in median mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub mode: CentroidMode,
    pub cx: f64,
    pub cy: f64,
    pub sx: Option<f64>,
    pub sy: Option<f64>,
}

pub fn compute_centroid(series: &PairedSeries, mode: CentroidMode) -> Result<Centroid> {
    match mode {
        CentroidMode::Mean => {
            let (cx, sx) = mean_and_sd(series.xs());
            let (cy, sy) = mean_and_sd(series.ys());
            if sx == 0.0 {
                return Err(Error::ConstantSeries { axis: "x" });
            }
            if sy == 0.0 {
                return Err(Error::ConstantSeries { axis: "y" });
            }
            Ok(Centroid {
                mode,
                cx,
                cy,
                sx: Some(sx),
                sy: Some(sy),
            })
        }
        CentroidMode::Median => Ok(Centroid {
            mode,
            cx: median(series.xs()),
            cy: median(series.ys()),
            sx: None,
            sy: None,
        }),
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Arithmetic mean and (n - 1)-denominator standard deviation.
pub(crate) fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (m, (ss / (values.len() - 1) as f64).sqrt())
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}
