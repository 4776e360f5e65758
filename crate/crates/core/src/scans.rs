//! End-to-end scans: tonsured association, tail curves, octant tables and
//! tonsured beta, each with an optional matched Gaussian envelope.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::association::{full_subset, pearson, tonsured_scan, Measure};
use crate::distance::{distances, Metric, Space};
use crate::error::{Error, Result};
use crate::null::{null_envelope, MarginalScale, NullEnvelope, NullSpec, GENERATOR_ID};
use crate::series::PairedSeries;
use crate::tail::{octant_counts, octant_summary, tail_curve, OctantSummary, PseudoObservations, TailRegion};
use crate::tonsure::{tonsure_grid, RELIABILITY_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    /// Tonsure percent, tail size u, or beta threshold.
    pub x: f64,
    /// `None` where the statistic degenerated.
    pub value: Option<f64>,
    pub n_used: usize,
    pub low_confidence: bool,
    pub over_one: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanKind {
    TonsureAssoc,
    Tail,
    Octant,
    Beta,
}

impl ScanKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanKind::TonsureAssoc => "tonsure_assoc",
            ScanKind::Tail => "tail",
            ScanKind::Octant => "octant",
            ScanKind::Beta => "beta",
        }
    }

    pub fn x_label(self) -> &'static str {
        match self {
            ScanKind::TonsureAssoc | ScanKind::Octant => "tonsure_percent",
            ScanKind::Tail => "u",
            ScanKind::Beta => "threshold",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedCurve {
    pub name: String,
    pub points: Vec<ScanPoint>,
    pub envelope: Option<NullEnvelope>,
    /// First x at which the curve turns back on its initial direction.
    pub monotonicity_loss: Option<f64>,
}

impl NamedCurve {
    fn new(name: impl Into<String>, points: Vec<ScanPoint>) -> Self {
        let monotonicity_loss = first_reversal(&points);
        Self {
            name: name.into(),
            points,
            envelope: None,
            monotonicity_loss,
        }
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.value).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCurve {
    pub kind: ScanKind,
    pub curves: Vec<NamedCurve>,
    /// Everything needed to re-run the scan.
    pub metadata: BTreeMap<String, String>,
}

impl ScanCurve {
    pub fn curve(&self, name: &str) -> Option<&NamedCurve> {
        self.curves.iter().find(|c| c.name == name)
    }

    fn attach(&mut self, envelopes: Vec<NullEnvelope>, null: &NullSpec, matched_rho: f64) {
        for (curve, env) in self.curves.iter_mut().zip(envelopes) {
            curve.envelope = Some(env);
        }
        self.metadata.insert("null.replicates".into(), null.replicates.to_string());
        self.metadata.insert("null.seed".into(), null.seed.to_string());
        self.metadata.insert("null.band".into(), format!("{},{}", null.band[0], null.band[1]));
        self.metadata.insert("null.matched_rho".into(), matched_rho.to_string());
        self.metadata.insert("null.generator".into(), GENERATOR_ID.into());
    }
}

fn first_reversal(points: &[ScanPoint]) -> Option<f64> {
    let present: Vec<(f64, f64)> = points.iter().filter_map(|p| p.value.map(|v| (p.x, v))).collect();
    let mut direction = 0.0f64;
    for w in present.windows(2) {
        let step = w[1].1 - w[0].1;
        if step == 0.0 {
            continue;
        }
        if direction == 0.0 {
            direction = step.signum();
        } else if step.signum() != direction {
            return Some(w[1].0);
        }
    }
    None
}

fn base_metadata(kind: ScanKind, series: &PairedSeries) -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("kind".into(), kind.as_str().into());
    meta.insert("x_axis".into(), kind.x_label().into());
    meta.insert("n".into(), series.len().to_string());
    meta.insert("input.hash".into(), series.content_hash());
    meta.insert("input.labels".into(), series.labels.join(","));
    for (k, v) in &series.meta {
        meta.insert(format!("input.{k}"), v.clone());
    }
    meta.insert("library.version".into(), env!("CARGO_PKG_VERSION").into());
    meta
}

fn full_pearson(series: &PairedSeries) -> Result<f64> {
    Ok(pearson(series, &full_subset(series.len()))?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TonsureScanConfig {
    pub metric: Metric,
    pub space: Space,
    pub measures: Vec<Measure>,
    pub step_percent: f64,
    pub min_survivors: usize,
}

impl Default for TonsureScanConfig {
    fn default() -> Self {
        Self {
            metric: Metric::L2,
            space: Space::Values,
            measures: Measure::ALL.to_vec(),
            step_percent: 5.0,
            min_survivors: RELIABILITY_FLOOR,
        }
    }
}

fn tonsure_curves(series: &PairedSeries, cfg: &TonsureScanConfig) -> Result<Vec<NamedCurve>> {
    let dist = distances(series, cfg.metric, cfg.space)?;
    let grid = tonsure_grid(&dist, cfg.step_percent, cfg.min_survivors, cfg.space)?;
    Ok(tonsured_scan(series, &cfg.measures, &grid)
        .into_iter()
        .map(|(m, points)| NamedCurve::new(m.as_str(), points))
        .collect())
}

fn gapped_values(curves: Result<Vec<NamedCurve>>, expected: usize) -> Vec<Vec<Option<f64>>> {
    match curves {
        Ok(curves) => curves.iter().map(NamedCurve::values).collect(),
        Err(_) => vec![Vec::new(); expected],
    }
}

/// Association measures against tonsure percentage.
pub fn run_tonsure_scan(
    series: &PairedSeries,
    cfg: &TonsureScanConfig,
    null: Option<&NullSpec>,
) -> Result<ScanCurve> {
    if cfg.measures.is_empty() {
        return Err(Error::InvalidParameter("no measures requested".into()));
    }
    let mut metadata = base_metadata(ScanKind::TonsureAssoc, series);
    metadata.insert("metric".into(), cfg.metric.as_str().into());
    metadata.insert("space".into(), cfg.space.as_str().into());
    metadata.insert(
        "measures".into(),
        cfg.measures.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(","),
    );
    metadata.insert("step_percent".into(), cfg.step_percent.to_string());
    metadata.insert("min_survivors".into(), cfg.min_survivors.to_string());

    let mut scan = ScanCurve {
        kind: ScanKind::TonsureAssoc,
        curves: tonsure_curves(series, cfg)?,
        metadata,
    };
    if let Some(null) = null {
        let rho = full_pearson(series)?;
        let k = cfg.measures.len();
        let envs = null_envelope(series.len(), rho, null, None, |s| gapped_values(tonsure_curves(s, cfg), k))?;
        scan.attach(envs, null, rho);
    }
    Ok(scan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailScanConfig {
    pub regions: Vec<TailRegion>,
    pub u_grid: Vec<f64>,
}

fn tail_curves(series: &PairedSeries, cfg: &TailScanConfig) -> Result<Vec<NamedCurve>> {
    let pseudo = PseudoObservations::from_series(series);
    cfg.regions
        .iter()
        .map(|&region| {
            let curve = tail_curve(&pseudo, region, &cfg.u_grid)?;
            let points = curve
                .points
                .iter()
                .map(|p| ScanPoint {
                    x: p.u,
                    value: Some(p.lambda),
                    n_used: p.count,
                    low_confidence: p.low_count,
                    over_one: p.over_one,
                })
                .collect();
            Ok(NamedCurve::new(region.as_str(), points))
        })
        .collect()
}

/// Tail dependence and tail insulation curves against u.
pub fn run_tail_scan(series: &PairedSeries, cfg: &TailScanConfig, null: Option<&NullSpec>) -> Result<ScanCurve> {
    if cfg.regions.is_empty() {
        return Err(Error::InvalidParameter("no tail regions requested".into()));
    }
    let mut metadata = base_metadata(ScanKind::Tail, series);
    metadata.insert(
        "regions".into(),
        cfg.regions.iter().map(|r| r.as_str()).collect::<Vec<_>>().join(","),
    );
    metadata.insert(
        "u_grid".into(),
        cfg.u_grid.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    );
    metadata.insert("space".into(), Space::Ranks.as_str().into());

    let mut scan = ScanCurve {
        kind: ScanKind::Tail,
        curves: tail_curves(series, cfg)?,
        metadata,
    };
    if let Some(null) = null {
        let rho = full_pearson(series)?;
        let k = cfg.regions.len();
        let envs = null_envelope(series.len(), rho, null, None, |s| gapped_values(tail_curves(s, cfg), k))?;
        scan.attach(envs, null, rho);
    }
    Ok(scan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctantScanConfig {
    pub step_percent: f64,
    pub min_survivors: usize,
}

impl Default for OctantScanConfig {
    fn default() -> Self {
        Self {
            step_percent: 10.0,
            min_survivors: RELIABILITY_FLOOR,
        }
    }
}

pub const OCTANT_CURVES: [&str; 9] = ["ratio", "n1", "n2", "n3", "n4", "n5", "n6", "n7", "n8"];

fn octant_levels(series: &PairedSeries, cfg: &OctantScanConfig) -> Result<(Vec<NamedCurve>, Vec<OctantSummary>)> {
    let pseudo = PseudoObservations::from_series(series);
    let dist = distances(series, Metric::R1, Space::Ranks)?;
    let grid = tonsure_grid(&dist, cfg.step_percent, cfg.min_survivors, Space::Ranks)?;
    let mut columns: Vec<Vec<ScanPoint>> = vec![Vec::with_capacity(grid.len()); OCTANT_CURVES.len()];
    let mut summaries = Vec::new();
    for level in &grid {
        let summary = octant_summary(&pseudo, level).ok();
        let point = |value: Option<f64>| ScanPoint {
            x: level.percent,
            value,
            n_used: level.n_used(),
            low_confidence: level.low_confidence(),
            over_one: false,
        };
        columns[0].push(point(summary.as_ref().map(|s| s.ratio)));
        let counts = octant_counts(&pseudo, &level.survivors);
        for (i, c) in counts.iter().enumerate() {
            columns[i + 1].push(point(Some(*c as f64)));
        }
        if let Some(s) = summary {
            summaries.push(s);
        }
    }
    let curves = OCTANT_CURVES
        .iter()
        .zip(columns)
        .map(|(name, points)| NamedCurve::new(*name, points))
        .collect();
    Ok((curves, summaries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctantScan {
    pub curve: ScanCurve,
    /// One per level where group b is non-empty.
    pub summaries: Vec<OctantSummary>,
}

/// Octant populations and the a/b ratio against R1 tonsure percentage.
pub fn run_octant_scan(series: &PairedSeries, cfg: &OctantScanConfig, null: Option<&NullSpec>) -> Result<OctantScan> {
    let mut metadata = base_metadata(ScanKind::Octant, series);
    metadata.insert("metric".into(), Metric::R1.as_str().into());
    metadata.insert("space".into(), Space::Ranks.as_str().into());
    metadata.insert("step_percent".into(), cfg.step_percent.to_string());
    metadata.insert("min_survivors".into(), cfg.min_survivors.to_string());

    let (curves, summaries) = octant_levels(series, cfg)?;
    let mut curve = ScanCurve {
        kind: ScanKind::Octant,
        curves,
        metadata,
    };
    if let Some(null) = null {
        let rho = full_pearson(series)?;
        let envs = null_envelope(series.len(), rho, null, None, |s| {
            gapped_values(octant_levels(s, cfg).map(|(c, _)| c), OCTANT_CURVES.len())
        })?;
        curve.attach(envs, null, rho);
    }
    Ok(OctantScan { curve, summaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaScanConfig {
    /// Non-negative, ascending market-move magnitudes.
    pub thresholds: Vec<f64>,
}

/// Least-squares slope of `stock` on `market`: cov / var(market).
pub fn ols_beta(stock: &[f64], market: &[f64]) -> Option<f64> {
    if stock.len() < 2 {
        return None;
    }
    let n = stock.len() as f64;
    let ms = stock.iter().sum::<f64>() / n;
    let mm = market.iter().sum::<f64>() / n;
    let (mut cov, mut var) = (0.0, 0.0);
    for (s, m) in stock.iter().zip(market) {
        cov += (s - ms) * (m - mm);
        var += (m - mm) * (m - mm);
    }
    (var > 0.0).then(|| cov / var)
}

fn beta_points(series: &PairedSeries, thresholds: &[f64]) -> Vec<ScanPoint> {
    thresholds
        .iter()
        .map(|&t| {
            let kept: Vec<usize> = (0..series.len()).filter(|&i| series.ys()[i].abs() >= t).collect();
            let (stock, market) = series.gather(&kept);
            ScanPoint {
                x: t,
                value: ols_beta(&stock, &market),
                n_used: kept.len(),
                low_confidence: kept.len() < RELIABILITY_FLOOR,
                over_one: false,
            }
        })
        .collect()
}

/// Tonsured CAPM beta: `xs` is the stock, `ys` the market. At each threshold
/// only observations with |market| >= threshold are kept.
pub fn run_beta_scan(series: &PairedSeries, cfg: &BetaScanConfig, null: Option<&NullSpec>) -> Result<ScanCurve> {
    if cfg.thresholds.is_empty() {
        return Err(Error::InvalidParameter("no beta thresholds given".into()));
    }
    if cfg.thresholds.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter("beta thresholds must be finite and non-negative".into()));
    }
    if cfg.thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("beta thresholds must be strictly ascending".into()));
    }
    let mut metadata = base_metadata(ScanKind::Beta, series);
    metadata.insert(
        "thresholds".into(),
        cfg.thresholds.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    );
    let mut scan = ScanCurve {
        kind: ScanKind::Beta,
        curves: vec![NamedCurve::new("beta", beta_points(series, &cfg.thresholds))],
        metadata,
    };
    if let Some(null) = null {
        let rho = full_pearson(series)?;
        let scale = MarginalScale::of(series);
        let envs = null_envelope(series.len(), rho, null, Some(scale), |s| {
            vec![beta_points(s, &cfg.thresholds).iter().map(|p| p.value).collect()]
        })?;
        scan.attach(envs, null, rho);
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::{measure, somers_dba, spearman};
    use crate::null::{gen_gaussian_pair, GaussianPairSpec};

    fn identity_series(n: usize) -> PairedSeries {
        let xs: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64 + 0.25 * (i as f64).sin()).collect();
        PairedSeries::new(xs.clone(), xs).unwrap()
    }

    #[test]
    fn identity_is_flat_at_one() {
        let s = identity_series(120);
        for metric in [Metric::L2, Metric::R1] {
            let cfg = TonsureScanConfig { metric, ..Default::default() };
            let scan = run_tonsure_scan(&s, &cfg, None).unwrap();
            assert_eq!(scan.curves.len(), 3);
            for c in &scan.curves {
                assert!(c.points.iter().all(|p| p.value == Some(1.0)), "{}", c.name);
                assert_eq!(c.monotonicity_loss, None);
            }
        }
    }

    #[test]
    fn zero_level_equals_full_sample_exactly() {
        let s = gen_gaussian_pair(&GaussianPairSpec { n: 300, rho: 0.3, seed: 1 }).unwrap();
        let scan = run_tonsure_scan(&s, &TonsureScanConfig::default(), None).unwrap();
        let idx = full_subset(s.len());
        for c in &scan.curves {
            let m: Measure = c.name.parse().unwrap();
            assert_eq!(c.points[0].x, 0.0);
            assert_eq!(c.points[0].value, Some(measure(&s, &idx, m).unwrap().value));
        }
    }

    #[test]
    fn grid_respects_min_survivors() {
        let s = gen_gaussian_pair(&GaussianPairSpec { n: 40, rho: 0.3, seed: 2 }).unwrap();
        let scan = run_tonsure_scan(&s, &TonsureScanConfig::default(), None).unwrap();
        for c in &scan.curves {
            assert!(c.points.iter().all(|p| p.n_used >= 24));
        }
    }

    #[test]
    fn degenerate_levels_become_gaps() {
        // the second level keeps only points sharing one x value
        let s = PairedSeries::new(vec![1.0, 2.0, 3.0, 3.0, 3.0], vec![5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        let dist = crate::distance::DistanceVector::new(Metric::R1, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
        let grid = vec![
            crate::tonsure::tonsure_by_count(&dist, 0, Space::Ranks).unwrap(),
            crate::tonsure::tonsure_by_count(&dist, 2, Space::Ranks).unwrap(),
        ];
        for (m, points) in tonsured_scan(&s, &Measure::ALL, &grid) {
            assert!(points[0].value.is_some(), "{m}");
            assert_eq!(points[1].value, None, "{m}");
            assert_eq!(points[1].n_used, 3);
        }
    }

    #[test]
    fn metadata_is_complete() {
        let s = gen_gaussian_pair(&GaussianPairSpec { n: 100, rho: 0.3, seed: 5 }).unwrap();
        let null = NullSpec { replicates: 3, seed: 8, ..Default::default() };
        let scan = run_tonsure_scan(&s, &TonsureScanConfig::default(), Some(&null)).unwrap();
        for key in ["metric", "space", "measures", "input.hash", "null.seed", "null.generator", "input.seed"] {
            assert!(scan.metadata.contains_key(key), "{key}");
        }
        assert!(scan.curves.iter().all(|c| c.envelope.is_some()));
    }

    #[test]
    fn comonotone_tail_scan() {
        let s = identity_series(500);
        let cfg = TailScanConfig {
            regions: TailRegion::CORNERS.to_vec(),
            u_grid: crate::tail::default_u_grid(500, 15),
        };
        let scan = run_tail_scan(&s, &cfg, None).unwrap();
        for (name, want) in [("ur", 1.0), ("bl", 1.0), ("ul", 0.0), ("br", 0.0)] {
            let c = scan.curve(name).unwrap();
            assert!(c.points.iter().all(|p| p.value == Some(want)), "{name}");
        }
    }

    #[test]
    fn beta_examples() {
        let market: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.7).sin() * 0.02).collect();
        let cfg = BetaScanConfig { thresholds: vec![0.0, 0.005, 0.01, 0.015] };

        let same = PairedSeries::new(market.clone(), market.clone()).unwrap();
        let scan = run_beta_scan(&same, &cfg, None).unwrap();
        assert!(scan.curves[0].points.iter().all(|p| (p.value.unwrap() - 1.0).abs() < 1e-12));

        let double = PairedSeries::new(market.iter().map(|m| 2.0 * m).collect(), market.clone()).unwrap();
        let scan = run_beta_scan(&double, &cfg, None).unwrap();
        assert!(scan.curves[0].points.iter().all(|p| (p.value.unwrap() - 2.0).abs() < 1e-12));
        assert_eq!(scan.curves[0].points[0].n_used, 200);
    }

    #[test]
    fn beta_zero_threshold_is_ols() {
        let s = gen_gaussian_pair(&GaussianPairSpec { n: 500, rho: 0.7, seed: 3 }).unwrap();
        let scan = run_beta_scan(&s, &BetaScanConfig { thresholds: vec![0.0] }, None).unwrap();
        assert_eq!(scan.curves[0].points[0].value, ols_beta(s.xs(), s.ys()));
    }

    #[test]
    fn beta_gap_when_too_few_retained() {
        let s = gen_gaussian_pair(&GaussianPairSpec { n: 50, rho: 0.7, seed: 3 }).unwrap();
        let scan = run_beta_scan(&s, &BetaScanConfig { thresholds: vec![0.0, 100.0] }, None).unwrap();
        assert_eq!(scan.curves[0].points[1].value, None);
        assert_eq!(scan.curves[0].points[1].n_used, 0);
    }

    #[test]
    fn beta_rejects_bad_thresholds() {
        let s = identity_series(10);
        for t in [vec![], vec![-1.0], vec![0.2, 0.1]] {
            assert!(run_beta_scan(&s, &BetaScanConfig { thresholds: t }, None).is_err());
        }
    }

    #[test]
    fn octant_scan_counts_add_up() {
        let s = gen_gaussian_pair(&GaussianPairSpec { n: 400, rho: 0.5, seed: 9 }).unwrap();
        let scan = run_octant_scan(&s, &OctantScanConfig::default(), None).unwrap();
        let levels = scan.curve.curves[0].points.len();
        for j in 0..levels {
            let total: f64 = scan.curve.curves[1..].iter().map(|c| c.points[j].value.unwrap()).sum();
            assert_eq!(total as usize, scan.curve.curves[0].points[j].n_used);
        }
        assert_eq!(scan.summaries.len(), levels);
        // positive dependence loads the concordant octants
        assert!(scan.summaries[0].ratio < 1.0);
    }

    #[test]
    fn reversal_annotation() {
        let pts = |vals: &[f64]| -> Vec<ScanPoint> {
            vals.iter()
                .enumerate()
                .map(|(i, v)| ScanPoint { x: i as f64 * 10.0, value: Some(*v), n_used: 100, low_confidence: false, over_one: false })
                .collect()
        };
        assert_eq!(first_reversal(&pts(&[0.1, 0.2, 0.2, 0.3, 0.25, 0.4])), Some(40.0));
        assert_eq!(first_reversal(&pts(&[0.5, 0.4, 0.3])), None);
    }

    #[test]
    fn rank_measures_unchanged_by_monotone_input_transform() {
        let s = gen_gaussian_pair(&GaussianPairSpec { n: 200, rho: 0.4, seed: 6 }).unwrap();
        let t = PairedSeries::new(s.xs().iter().map(|x| x.exp()).collect(), s.ys().to_vec()).unwrap();
        let idx = full_subset(200);
        assert_eq!(spearman(&s, &idx).unwrap().value, spearman(&t, &idx).unwrap().value);
        assert_eq!(somers_dba(&s, &idx).unwrap().value, somers_dba(&t, &idx).unwrap().value);
    }
}
