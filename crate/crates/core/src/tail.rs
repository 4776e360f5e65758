//! Copula-space tail measures: corner tail dependence, edge tail insulation
//! and octant populations.
//!
//! All region tests are done on mid-ranks rather than on `rank / n` floats so
//! that boundaries are exact. A tail size `u` is snapped to the nearest
//! `k / n` (k >= 1); the upper band of a marginal is then `rank > n - k` and
//! the lower band `rank < k + 1`, which hold exactly `k` untied points each.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distance::Metric;
use crate::error::{Error, Result};
use crate::series::{compute_ranks, PairedSeries, RankedSeries};
use crate::tonsure::TonsureResult;

/// Corner or edge curves whose squares hold fewer points than this are flagged.
pub const MIN_REGION_COUNT: usize = 5;

/// Pseudo-observations `rank / n` in (0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoObservations {
    pub us: Vec<f64>,
    pub vs: Vec<f64>,
    ranks_x: Vec<f64>,
    ranks_y: Vec<f64>,
}

impl PseudoObservations {
    pub fn from_ranks(ranked: &RankedSeries) -> Self {
        let n = ranked.len() as f64;
        Self {
            us: ranked.ranks_x.iter().map(|r| r / n).collect(),
            vs: ranked.ranks_y.iter().map(|r| r / n).collect(),
            ranks_x: ranked.ranks_x.clone(),
            ranks_y: ranked.ranks_y.clone(),
        }
    }

    pub fn from_series(series: &PairedSeries) -> Self {
        Self::from_ranks(&compute_ranks(series))
    }

    pub fn len(&self) -> usize {
        self.us.len()
    }

    pub fn is_empty(&self) -> bool {
        self.us.is_empty()
    }

    /// The sample rotated by 180 degrees: rank r becomes n + 1 - r.
    pub fn rotated_180(&self) -> Self {
        let n1 = self.len() as f64 + 1.0;
        let ranked = RankedSeries {
            ranks_x: self.ranks_x.iter().map(|r| n1 - r).collect(),
            ranks_y: self.ranks_y.iter().map(|r| n1 - r).collect(),
            tie_groups_x: Default::default(),
            tie_groups_y: Default::default(),
        };
        Self::from_ranks(&ranked)
    }

    /// The sample with u and v exchanged.
    pub fn transposed(&self) -> Self {
        Self {
            us: self.vs.clone(),
            vs: self.us.clone(),
            ranks_x: self.ranks_y.clone(),
            ranks_y: self.ranks_x.clone(),
        }
    }
}

/// The eight tail regions. Corners measure tail dependence, edges measure
/// tail insulation (one variable extreme while the other stays central).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailRegion {
    Ur,
    Ul,
    Br,
    Bl,
    T0,
    R0,
    B0,
    L0,
}

impl TailRegion {
    pub const CORNERS: [TailRegion; 4] = [TailRegion::Ur, TailRegion::Ul, TailRegion::Br, TailRegion::Bl];
    pub const EDGES: [TailRegion; 4] = [TailRegion::T0, TailRegion::R0, TailRegion::B0, TailRegion::L0];

    pub fn as_str(self) -> &'static str {
        match self {
            TailRegion::Ur => "ur",
            TailRegion::Ul => "ul",
            TailRegion::Br => "br",
            TailRegion::Bl => "bl",
            TailRegion::T0 => "t0",
            TailRegion::R0 => "r0",
            TailRegion::B0 => "b0",
            TailRegion::L0 => "l0",
        }
    }

    pub fn is_corner(self) -> bool {
        Self::CORNERS.contains(&self)
    }

    /// Band conditions for (x, y).
    fn bands(self) -> (Band, Band) {
        use Band::*;
        match self {
            TailRegion::Ur => (Upper, Upper),
            TailRegion::Ul => (Lower, Upper),
            TailRegion::Br => (Upper, Lower),
            TailRegion::Bl => (Lower, Lower),
            TailRegion::T0 => (Central, Upper),
            TailRegion::R0 => (Upper, Central),
            TailRegion::B0 => (Central, Lower),
            TailRegion::L0 => (Lower, Central),
        }
    }
}

impl fmt::Display for TailRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TailRegion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let region = match s.trim().to_ascii_lowercase().as_str() {
            "ur" => TailRegion::Ur,
            "ul" => TailRegion::Ul,
            "br" => TailRegion::Br,
            "bl" => TailRegion::Bl,
            "t0" | "0t" => TailRegion::T0,
            "r0" => TailRegion::R0,
            "b0" | "0b" => TailRegion::B0,
            "l0" => TailRegion::L0,
            other => return Err(Error::InvalidParameter(format!("unknown tail region {other:?}"))),
        };
        Ok(region)
    }
}

#[derive(Debug, Clone, Copy)]
enum Band {
    Upper,
    Lower,
    Central,
}

impl Band {
    #[inline]
    fn contains(self, rank: f64, n: f64, k: f64) -> bool {
        match self {
            Band::Upper => rank > n - k,
            Band::Lower => rank < k + 1.0,
            // |rank - (n + 1)/2| < k/2, doubled to stay in exact arithmetic
            Band::Central => (2.0 * rank - (n + 1.0)).abs() < k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    /// Tail size after snapping to k / n.
    pub u: f64,
    pub lambda: f64,
    pub count: usize,
    /// Tied ranks pushed more than n*u points into the square.
    pub over_one: bool,
    /// Fewer than [`MIN_REGION_COUNT`] points in the square.
    pub low_count: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub region: TailRegion,
    /// Strictly decreasing in u.
    pub points: Vec<TailPoint>,
}

/// Geometric grid from 0.5 down to max(5/n, 0.001).
pub fn default_u_grid(n: usize, count: usize) -> Vec<f64> {
    let hi: f64 = 0.5;
    let lo = (5.0 / n as f64).max(0.001).min(hi);
    if count < 2 || lo == hi {
        return vec![hi];
    }
    let ratio = (lo / hi).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| hi * ratio.powi(i as i32)).collect()
}

/// Snaps each u to a count k = round(n u), clamped to [1, max(1, n/2)];
/// returns distinct k in decreasing order.
pub fn snap_u_grid(u_grid: &[f64], n: usize) -> Result<Vec<usize>> {
    let k_max = (n / 2).max(1);
    let mut ks = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        if !(u > 0.0 && u <= 0.5) {
            return Err(Error::InvalidParameter(format!("tail size {u} outside (0, 0.5]")));
        }
        ks.push(((n as f64 * u).round() as usize).clamp(1, k_max));
    }
    ks.sort_unstable_by(|a, b| b.cmp(a));
    ks.dedup();
    Ok(ks)
}

fn region_count(pseudo: &PseudoObservations, region: TailRegion, k: usize) -> usize {
    let n = pseudo.len() as f64;
    let k = k as f64;
    let (bx, by) = region.bands();
    pseudo
        .ranks_x
        .iter()
        .zip(&pseudo.ranks_y)
        .filter(|(&rx, &ry)| bx.contains(rx, n, k) && by.contains(ry, n, k))
        .count()
}

/// lambda(u) = (#points in the region) / (n u) at each snapped grid value.
pub fn tail_curve(pseudo: &PseudoObservations, region: TailRegion, u_grid: &[f64]) -> Result<TailCurve> {
    let n = pseudo.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let points = snap_u_grid(u_grid, n)?
        .into_iter()
        .map(|k| {
            let count = region_count(pseudo, region, k);
            let lambda = count as f64 / k as f64;
            TailPoint {
                u: k as f64 / n as f64,
                lambda,
                count,
                over_one: lambda > 1.0,
                low_count: count < MIN_REGION_COUNT,
            }
        })
        .collect();
    Ok(TailCurve { region, points })
}

/// Corner tail dependence (ur, ul, br, bl).
pub fn tail_dependence(pseudo: &PseudoObservations, corner: TailRegion, u_grid: &[f64]) -> Result<TailCurve> {
    if !corner.is_corner() {
        return Err(Error::InvalidParameter(format!("{corner} is not a corner")));
    }
    tail_curve(pseudo, corner, u_grid)
}

/// Edge tail insulation (t0, r0, b0, l0).
pub fn tail_insulation(pseudo: &PseudoObservations, edge: TailRegion, u_grid: &[f64]) -> Result<TailCurve> {
    if edge.is_corner() {
        return Err(Error::InvalidParameter(format!("{edge} is not an edge")));
    }
    tail_curve(pseudo, edge, u_grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctantSummary {
    pub tonsure_percent: f64,
    /// N_1 .. N_8, numbered clockwise from 9 o'clock.
    pub counts: [usize; 8],
    /// Mean of octants 1, 2, 5, 6.
    pub n_a: f64,
    /// Mean of octants 3, 4, 7, 8.
    pub n_b: f64,
    pub ratio: f64,
    /// N_i over its own group mean; `None` when that mean is zero.
    pub asymmetry: [Option<f64>; 8],
}

const GROUP_A: [usize; 4] = [0, 1, 4, 5];

/// Octant (0-based) of a point centered on the rank median. Each octant is
/// half-open clockwise: a point on a dividing ray belongs to the octant that
/// starts at that ray. The exact center goes to the first octant.
pub fn octant_of(a: f64, b: f64) -> usize {
    if a < 0.0 && b >= 0.0 {
        if b < -a {
            0
        } else {
            1
        }
    } else if a >= 0.0 && b > 0.0 {
        if b > a {
            2
        } else {
            3
        }
    } else if a > 0.0 && b <= 0.0 {
        if -b < a {
            4
        } else {
            5
        }
    } else if a <= 0.0 && b < 0.0 {
        if b < a {
            6
        } else {
            7
        }
    } else {
        0
    }
}

/// Octant populations of the tonsure survivors, the two group averages and
/// their ratio.
pub fn octant_summary(pseudo: &PseudoObservations, tonsure: &TonsureResult) -> Result<OctantSummary> {
    if tonsure.metric != Metric::R1 {
        return Err(Error::InvalidParameter(
            "octant populations need an R1 (rank space) tonsure".into(),
        ));
    }
    let counts = octant_counts(pseudo, &tonsure.survivors);
    summarize(tonsure.percent, counts)
}

/// Populations N_1 .. N_8 of the given points.
pub fn octant_counts(pseudo: &PseudoObservations, indices: &[usize]) -> [usize; 8] {
    let center = (pseudo.len() as f64 + 1.0) / 2.0;
    let mut counts = [0usize; 8];
    for &i in indices {
        counts[octant_of(pseudo.ranks_x[i] - center, pseudo.ranks_y[i] - center)] += 1;
    }
    counts
}

fn summarize(tonsure_percent: f64, counts: [usize; 8]) -> Result<OctantSummary> {
    let mut a_sum = 0usize;
    let mut b_sum = 0usize;
    for (i, &c) in counts.iter().enumerate() {
        if GROUP_A.contains(&i) {
            a_sum += c;
        } else {
            b_sum += c;
        }
    }
    let n_a = a_sum as f64 / 4.0;
    let n_b = b_sum as f64 / 4.0;
    if b_sum == 0 {
        return Err(Error::DegenerateOctants);
    }
    let mut asymmetry = [None; 8];
    for (i, slot) in asymmetry.iter_mut().enumerate() {
        let group = if GROUP_A.contains(&i) { n_a } else { n_b };
        if group > 0.0 {
            *slot = Some(counts[i] as f64 / group);
        }
    }
    Ok(OctantSummary {
        tonsure_percent,
        counts,
        n_a,
        n_b,
        ratio: n_a / n_b,
        asymmetry,
    })
}
