use std::f64::consts::PI;

use tonsure_core::association::{full_subset, measure, somers_counts, tonsured_scan};
use tonsure_core::series::mid_ranks;
use tonsure_core::tail::{octant_counts, tail_dependence};
use tonsure_core::tonsure::tonsure_by_percent;
use tonsure_core::{
    distances, gen_gaussian_pair, pearson, somers_dba, spearman, tonsure_grid, GaussianPairSpec, Measure, Metric,
    PairedSeries, PseudoObservations, Space, TailRegion,
};

fn gaussian(n: usize, rho: f64, seed: u64) -> PairedSeries {
    gen_gaussian_pair(&GaussianPairSpec { n, rho, seed }).unwrap()
}

/// Ordered-pair counts (C, D, T_X, T_Y) on raw values.
fn naive_counts(xs: &[f64], ys: &[f64]) -> [u64; 4] {
    let mut k = [0u64; 4];
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if i == j {
                continue;
            }
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            if dx == 0.0 && dy == 0.0 {
                continue;
            } else if dx == 0.0 {
                k[2] += 1;
            } else if dy == 0.0 {
                k[3] += 1;
            } else if (dx > 0.0) == (dy > 0.0) {
                k[0] += 1;
            } else {
                k[1] += 1;
            }
        }
    }
    k
}

#[test]
fn somers_counts_match_enumeration_for_small_tied_samples() {
    for n in 2..=4usize {
        let cases = 3usize.pow(2 * n as u32);
        for code in 0..cases {
            let mut c = code;
            let mut vals = Vec::with_capacity(2 * n);
            for _ in 0..2 * n {
                vals.push((c % 3 + 1) as f64);
                c /= 3;
            }
            let (xs, ys) = vals.split_at(n);
            let (rx, _) = mid_ranks(xs);
            let (ry, _) = mid_ranks(ys);
            let got = somers_counts(&rx, &ry);
            let want = naive_counts(xs, ys);
            assert_eq!(
                [got.concordant, got.discordant, got.tied_x, got.tied_y],
                want,
                "xs={xs:?} ys={ys:?}"
            );
        }
    }
}

#[test]
fn gaussian_rank_measures_match_closed_forms() {
    let s = gaussian(20_000, 0.5, 11);
    let all = full_subset(s.len());
    let rs = spearman(&s, &all).unwrap().value;
    let d = somers_dba(&s, &all).unwrap().value;
    assert!((rs - 6.0 / PI * (0.25f64).asin()).abs() < 0.02, "spearman {rs}");
    assert!((d - 2.0 / PI * (0.5f64).asin()).abs() < 0.02, "somers {d}");
}

#[test]
fn tonsuring_raises_gaussian_pearson() {
    let reps = 30;
    let mut diffs = Vec::new();
    for seed in 0..reps {
        let s = gaussian(2_000, 0.5, seed);
        let dist = distances(&s, Metric::L2, Space::Values).unwrap();
        let half = tonsure_by_percent(&dist, 50.0, Space::Values).unwrap();
        let full = pearson(&s, &full_subset(s.len())).unwrap().value;
        diffs.push(pearson(&s, &half.survivors).unwrap().value - full);
    }
    let mean = diffs.iter().sum::<f64>() / reps as f64;
    assert!(mean > 0.0, "mean increase {mean}");
}

#[test]
fn grids_nest_and_start_at_the_full_sample() {
    for seed in 0..20 {
        let s = gaussian(150, 0.3, 100 + seed);
        for metric in [Metric::L2, Metric::R1] {
            let dist = distances(&s, metric, Space::Values).unwrap();
            let grid = tonsure_grid(&dist, 5.0, 24, Space::Values).unwrap();
            assert_eq!(grid[0].survivors, full_subset(s.len()));
            for w in grid.windows(2) {
                assert!(w[1].survivors.iter().all(|i| w[0].survivors.binary_search(i).is_ok()));
            }
            let scan = tonsured_scan(&s, &Measure::ALL, &grid);
            for (m, points) in scan {
                let full = measure(&s, &full_subset(s.len()), m).unwrap().value;
                assert_eq!(points[0].value.unwrap().to_bits(), full.to_bits());
                assert!(points.iter().all(|p| p.n_used >= 24));
            }
        }
    }
}

#[test]
fn independent_corners_are_near_u() {
    let s = gaussian(50_000, 0.0, 5);
    let pseudo = PseudoObservations::from_series(&s);
    let u = [0.2, 0.1];
    for corner in TailRegion::CORNERS {
        let curve = tail_dependence(&pseudo, corner, &u).unwrap();
        for p in &curve.points {
            // count ~ Binomial(n u, u)
            let sd = (p.u * (1.0 - p.u) / (50_000.0 * p.u)).sqrt();
            assert!((p.lambda - p.u).abs() < 5.0 * sd, "{corner} u={} lambda={}", p.u, p.lambda);
        }
    }
}

#[test]
fn octant_counts_partition_the_sample() {
    let s = gaussian(1_000, 0.5, 9);
    let pseudo = PseudoObservations::from_series(&s);
    let counts = octant_counts(&pseudo, &full_subset(s.len()));
    assert_eq!(counts.iter().sum::<usize>(), 1_000);
}
