//! Pearson, Spearman and Somers d_BA on full or tonsured subsets.
//!
//! Every measure takes the original series plus the subset of surviving
//! indices. Means and ranks are recomputed on the subset, so a tonsured
//! Spearman is the rank correlation of the survivors among themselves, not a
//! correlation of their full-sample ranks.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scans::ScanPoint;
use crate::series::{mid_ranks, PairedSeries};
use crate::tonsure::{TonsureResult, RELIABILITY_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Pearson,
    Spearman,
    SomersDba,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::Pearson, Measure::Spearman, Measure::SomersDba];

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Pearson => "pearson",
            Measure::Spearman => "spearman",
            Measure::SomersDba => "somers_dba",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pearson" => Ok(Measure::Pearson),
            "spearman" => Ok(Measure::Spearman),
            "somers" | "somers_dba" | "somers-dba" => Ok(Measure::SomersDba),
            other => Err(Error::InvalidParameter(format!("unknown measure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationValue {
    pub measure: Measure,
    pub value: f64,
    pub n_used: usize,
    pub tonsure_percent: f64,
    pub low_confidence: bool,
}

impl AssociationValue {
    fn new(measure: Measure, value: f64, n_used: usize) -> Self {
        Self {
            measure,
            value,
            n_used,
            tonsure_percent: 0.0,
            low_confidence: n_used < RELIABILITY_FLOOR,
        }
    }
}

/// Every index of a series, ascending.
pub fn full_subset(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn check_subset(subset: &[usize]) -> Result<()> {
    if subset.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: subset.len(),
        });
    }
    Ok(())
}

/// Product-moment correlation of two equal-length slices.
pub(crate) fn product_moment(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantSubset { size: xs.len() });
    }
    // sqrt of the product (not product of sqrts) keeps y == x at exactly 1
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn pearson(series: &PairedSeries, subset: &[usize]) -> Result<AssociationValue> {
    check_subset(subset)?;
    let (xs, ys) = series.gather(subset);
    let r = product_moment(&xs, &ys)?;
    Ok(AssociationValue::new(Measure::Pearson, r, subset.len()))
}

pub fn spearman(series: &PairedSeries, subset: &[usize]) -> Result<AssociationValue> {
    check_subset(subset)?;
    let (xs, ys) = series.gather(subset);
    let (rx, _) = mid_ranks(&xs);
    let (ry, _) = mid_ranks(&ys);
    let r = product_moment(&rx, &ry)?;
    Ok(AssociationValue::new(Measure::Spearman, r, subset.len()))
}

/// Pair counts over ordered pairs `i != j`. A pair tied in both
/// coordinates is counted nowhere.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SomersCounts {
    pub concordant: u64,
    pub discordant: u64,
    /// Tied in x, untied in y.
    pub tied_x: u64,
    /// Tied in y, untied in x.
    pub tied_y: u64,
}

impl SomersCounts {
    /// `(S_X, S_Y, d_BA)`, or `None` when a denominator vanishes.
    pub fn ratios(&self) -> Option<(f64, f64, f64)> {
        let c = self.concordant as f64;
        let d = self.discordant as f64;
        let den_x = c + d + self.tied_x as f64;
        let den_y = c + d + self.tied_y as f64;
        if den_x == 0.0 || den_y == 0.0 {
            return None;
        }
        let sx = (c - d) / den_x;
        let sy = (c - d) / den_y;
        Some((sx, sy, 0.5 * (sx + sy)))
    }
}

fn tied_pairs(sorted: impl Iterator<Item = (f64, f64)>, both: bool) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut prev: Option<(f64, f64)> = None;
    for cur in sorted {
        let same = prev.is_some_and(|p| p.0 == cur.0 && (!both || p.1 == cur.1));
        if same {
            run += 1;
        } else {
            total += run * run.saturating_sub(1) / 2;
            run = 1;
        }
        prev = Some(cur);
    }
    total + run * run.saturating_sub(1) / 2
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn sort_counting_inversions(v: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = v.len();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        buf.clear();
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j) = (lo, mid);
            while i < mid && j < hi {
                if v[j] < v[i] {
                    swaps += (mid - i) as u64;
                    buf.push(v[j]);
                    j += 1;
                } else {
                    buf.push(v[i]);
                    i += 1;
                }
            }
            buf.extend_from_slice(&v[i..mid]);
            buf.extend_from_slice(&v[j..hi]);
            lo = hi;
        }
        v.copy_from_slice(buf);
        width *= 2;
    }
    swaps
}

/// Counts concordant, discordant and singly-tied ordered pairs in
/// O(m log m): sort by (x, y), count tie runs, and count discordant pairs
/// as the strict inversions left in y.
pub fn somers_counts(rx: &[f64], ry: &[f64]) -> SomersCounts {
    let m = rx.len() as u64;
    let mut pairs: Vec<(f64, f64)> = rx.iter().copied().zip(ry.iter().copied()).collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let tied_x = tied_pairs(pairs.iter().copied(), false);
    let tied_both = tied_pairs(pairs.iter().copied(), true);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = Vec::with_capacity(ys.len());
    let discordant = sort_counting_inversions(&mut ys, &mut buf);
    let tied_y = tied_pairs(ys.iter().map(|&y| (y, 0.0)), false);
    let all = m * m.saturating_sub(1) / 2;
    let concordant = all + tied_both - tied_x - tied_y - discordant;
    // each unordered pair is two ordered pairs
    SomersCounts {
        concordant: 2 * concordant,
        discordant: 2 * discordant,
        tied_x: 2 * (tied_x - tied_both),
        tied_y: 2 * (tied_y - tied_both),
    }
}

pub fn somers_dba(series: &PairedSeries, subset: &[usize]) -> Result<AssociationValue> {
    check_subset(subset)?;
    let (xs, ys) = series.gather(subset);
    let (rx, _) = mid_ranks(&xs);
    let (ry, _) = mid_ranks(&ys);
    let (_, _, s) = somers_counts(&rx, &ry)
        .ratios()
        .ok_or(Error::DegenerateSubset)?;
    Ok(AssociationValue::new(Measure::SomersDba, s, subset.len()))
}

pub fn measure(series: &PairedSeries, subset: &[usize], which: Measure) -> Result<AssociationValue> {
    match which {
        Measure::Pearson => pearson(series, subset),
        Measure::Spearman => spearman(series, subset),
        Measure::SomersDba => somers_dba(series, subset),
    }
}

/// Evaluates each measure at each tonsure level. Levels where a measure
/// degenerates become gaps (`value: None`) instead of aborting the scan.
pub fn tonsured_scan(
    series: &PairedSeries,
    measures: &[Measure],
    grid: &[TonsureResult],
) -> Vec<(Measure, Vec<ScanPoint>)> {
    measures
        .iter()
        .map(|&m| {
            let points = grid
                .par_iter()
                .map(|level| {
                    let value = measure(series, &level.survivors, m).ok().map(|v| v.value);
                    ScanPoint {
                        x: level.percent,
                        value,
                        n_used: level.n_used(),
                        low_confidence: level.low_confidence(),
                        over_one: false,
                    }
                })
                .collect();
            (m, points)
        })
        .collect()
}
