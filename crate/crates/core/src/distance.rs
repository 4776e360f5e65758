//! Per-observation inlier distances under the L2 and R1 metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{compute_centroid, compute_ranks, Centroid, CentroidMode, PairedSeries, RankedSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Standardized Euclidean distance from the mean.
    L2,
    /// Sum of absolute mid-rank deviations from the rank center.
    R1,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::L2 => "l2",
            Metric::R1 => "r1",
        }
    }
}

/// Which cloud the distance is measured in: the observed values, or their
/// ranks (copula space).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Values,
    Ranks,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::Values => "values",
            Space::Ranks => "ranks",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceVector {
    pub metric: Metric,
    pub deltas: Vec<f64>,
    /// Indices sorted by ascending distance, ties kept in original order.
    pub order: Vec<usize>,
}

impl DistanceVector {
    pub fn new(metric: Metric, deltas: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..deltas.len()).collect();
        // sort_by is stable, so equal distances stay in index order
        order.sort_by(|&a, &b| deltas[a].total_cmp(&deltas[b]));
        Self {
            metric,
            deltas,
            order,
        }
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

pub fn l2_distances(series: &PairedSeries, c: &Centroid) -> Result<DistanceVector> {
    if c.mode != CentroidMode::Mean {
        return Err(Error::InvalidParameter(
            "L2 distances need a mean centroid".into(),
        ));
    }
    let sx = c.sx.filter(|s| *s > 0.0).ok_or(Error::ConstantSeries { axis: "x" })?;
    let sy = c.sy.filter(|s| *s > 0.0).ok_or(Error::ConstantSeries { axis: "y" })?;
    let deltas = series
        .xs()
        .iter()
        .zip(series.ys())
        .map(|(x, y)| {
            let dx = (x - c.cx) / sx;
            let dy = (y - c.cy) / sy;
            (dx * dx + dy * dy).sqrt()
        })
        .collect();
    Ok(DistanceVector::new(Metric::L2, deltas))
}

/// R1 distance with the rank center fixed at n/2.
pub fn r1_distances(ranked: &RankedSeries) -> DistanceVector {
    let center = ranked.len() as f64 / 2.0;
    let deltas = ranked
        .ranks_x
        .iter()
        .zip(&ranked.ranks_y)
        .map(|(rx, ry)| (rx - center).abs() + (ry - center).abs())
        .collect();
    DistanceVector::new(Metric::R1, deltas)
}

/// Distances for `metric` measured in `space`. R1 only ever looks at ranks,
/// so the space makes no difference to it; L2 in rank space standardizes the
/// mid-rank vectors instead of the values.
pub fn distances(series: &PairedSeries, metric: Metric, space: Space) -> Result<DistanceVector> {
    match (metric, space) {
        (Metric::R1, _) => Ok(r1_distances(&compute_ranks(series))),
        (Metric::L2, Space::Values) => {
            let c = compute_centroid(series, CentroidMode::Mean)?;
            l2_distances(series, &c)
        }
        (Metric::L2, Space::Ranks) => {
            let ranked = compute_ranks(series);
            let rank_series = PairedSeries::new(ranked.ranks_x, ranked.ranks_y)?;
            let c = compute_centroid(&rank_series, CentroidMode::Mean)?;
            l2_distances(&rank_series, &c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn series(xs: &[f64], ys: &[f64]) -> PairedSeries {
        PairedSeries::new(xs.to_vec(), ys.to_vec()).unwrap()
    }

    #[test]
    fn l2_point_at_centroid_is_zero() {
        let s = series(&[-1.0, 0.0, 1.0], &[1.0, 0.0, -1.0]);
        let c = compute_centroid(&s, CentroidMode::Mean).unwrap();
        assert_eq!(l2_distances(&s, &c).unwrap().deltas[1], 0.0);
    }

    #[test]
    fn l2_three_four_five() {
        let c = Centroid {
            mode: CentroidMode::Mean,
            cx: 0.0,
            cy: 0.0,
            sx: Some(1.0),
            sy: Some(1.0),
        };
        let s = series(&[3.0, 0.0], &[4.0, 0.0]);
        assert_eq!(l2_distances(&s, &c).unwrap().deltas[0], 5.0);
    }

    #[test]
    fn l2_hand_evaluated() {
        // mean (1, 2), sd (1, 2): outer points sit one sd out on each axis
        let s = series(&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0]);
        let c = compute_centroid(&s, CentroidMode::Mean).unwrap();
        let d = l2_distances(&s, &c).unwrap();
        assert_relative_eq!(d.deltas[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(d.deltas[1], 0.0);
        assert_relative_eq!(d.deltas[2], 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(d.order, vec![1, 0, 2]);
    }

    #[test]
    fn l2_rejects_median_centroid_and_zero_scale() {
        let s = series(&[0.0, 1.0, 2.0], &[0.0, 2.0, 4.0]);
        let c = compute_centroid(&s, CentroidMode::Median).unwrap();
        assert!(l2_distances(&s, &c).is_err());
        let flat = Centroid {
            mode: CentroidMode::Mean,
            cx: 0.0,
            cy: 0.0,
            sx: Some(0.0),
            sy: Some(1.0),
        };
        assert!(matches!(
            l2_distances(&s, &flat),
            Err(Error::ConstantSeries { axis: "x" })
        ));
    }

    #[test]
    fn r1_hand_evaluated() {
        let ranked = RankedSeries {
            ranks_x: vec![1.0, 2.0, 3.0, 4.0],
            ranks_y: vec![4.0, 2.0, 1.0, 3.0],
            tie_groups_x: Default::default(),
            tie_groups_y: Default::default(),
        };
        let d = r1_distances(&ranked);
        assert_eq!(d.deltas[0], 3.0);
        assert_eq!(d.deltas[1], 0.0);

        let two = RankedSeries {
            ranks_x: vec![1.0, 2.0],
            ranks_y: vec![1.0, 2.0],
            tie_groups_x: Default::default(),
            tie_groups_y: Default::default(),
        };
        assert_eq!(r1_distances(&two).deltas[0], 0.0);
    }

    #[test]
    fn distance_ties_keep_index_order() {
        let d = DistanceVector::new(Metric::R1, vec![2.0, 1.0, 2.0, 1.0, 0.0]);
        assert_eq!(d.order, vec![4, 1, 3, 0, 2]);
    }

    fn arb_series() -> impl Strategy<Value = PairedSeries> {
        (3usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(-1000i32..1000, n),
                prop::collection::vec(-1000i32..1000, n),
            )
                .prop_map(|(xs, ys)| {
                    PairedSeries::new(
                        xs.into_iter().map(|v| f64::from(v) / 10.0).collect(),
                        ys.into_iter().map(|v| f64::from(v) / 10.0).collect(),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn r1_ignores_monotone_marginal_transforms(s in arb_series()) {
            let before = distances(&s, Metric::R1, Space::Values).unwrap();
            let t = PairedSeries::new(
                s.xs().iter().map(|x| x.powi(3)).collect(),
                s.ys().iter().map(|y| (y / 100.0).exp()).collect(),
            ).unwrap();
            let after = distances(&t, Metric::R1, Space::Values).unwrap();
            prop_assert_eq!(before, after);
        }

        #[test]
        fn l2_ignores_positive_affine_maps(s in arb_series(), a in 0.5f64..4.0, b in -10.0f64..10.0) {
            prop_assume!(compute_centroid(&s, CentroidMode::Mean).is_ok());
            let before = distances(&s, Metric::L2, Space::Values).unwrap();
            let t = PairedSeries::new(
                s.xs().iter().map(|x| a * x + b).collect(),
                s.ys().iter().map(|y| a * y - b).collect(),
            ).unwrap();
            let after = distances(&t, Metric::L2, Space::Values).unwrap();
            for (p, q) in before.deltas.iter().zip(&after.deltas) {
                prop_assert!((p - q).abs() < 1e-9 * (1.0 + p.abs()));
            }
        }

        #[test]
        fn order_is_a_sorting_permutation(s in arb_series(), metric in prop_oneof![Just(Metric::L2), Just(Metric::R1)]) {
            prop_assume!(compute_centroid(&s, CentroidMode::Mean).is_ok());
            let d = distances(&s, metric, Space::Values).unwrap();
            let mut seen = d.order.clone();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..s.len()).collect::<Vec<_>>());
            for w in d.order.windows(2) {
                prop_assert!(d.deltas[w[0]] <= d.deltas[w[1]]);
            }
        }

        #[test]
        fn r1_bounded_for_untied_data(values in prop::collection::hash_set(-1000i32..1000, 2..40), seed in any::<u64>()) {
            let xs: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
            // a deterministic shuffle of the same values for y
            let mut ys = xs.clone();
            let n = ys.len();
            for i in 0..n {
                let j = (seed.wrapping_mul(i as u64 + 1) % n as u64) as usize;
                ys.swap(i, j);
            }
            let d = distances(&PairedSeries::new(xs, ys).unwrap(), Metric::R1, Space::Values).unwrap();
            // the point ranked (n, n) sits n/2 + n/2 away from the n/2 center
            prop_assert!(d.deltas.iter().all(|&v| v <= n as f64));
        }
    }
}
