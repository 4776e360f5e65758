//! Seeded Gaussian null models, Tukey g-and-h transforms and Monte Carlo
//! envelopes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{mean_and_sd, PairedSeries};

/// Identifies the random stream layout. Written into every manifest; bump it
/// whenever generated values could change.
pub const GENERATOR_ID: &str =
    "chacha8-seed_from_u64/rand-0.9/rand_distr-0.5-standard-normal/v1";

/// Inputs beyond this are rejected by [`gh_transform`].
pub const GH_INPUT_LIMIT: f64 = 38.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPairSpec {
    pub n: usize,
    pub rho: f64,
    pub seed: u64,
}

impl GaussianPairSpec {
    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooShort { needed: 2, got: self.n });
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("rho {} outside [-1, 1]", self.rho)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GandHSpec {
    /// Skewness parameter.
    pub g: f64,
    /// Elongation parameter, h >= 0.
    pub h: f64,
    pub standardize: bool,
}

impl GandHSpec {
    pub fn new(g: f64, h: f64) -> Self {
        Self {
            g,
            h,
            standardize: true,
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_pair_from(spec: &GaussianPairSpec, rng: &mut ChaCha8Rng) -> Result<PairedSeries> {
    let k = (1.0 - spec.rho * spec.rho).sqrt();
    let mut xs = Vec::with_capacity(spec.n);
    let mut ys = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x: f64 = StandardNormal.sample(rng);
        let e: f64 = StandardNormal.sample(rng);
        xs.push(x);
        ys.push(spec.rho * x + k * e);
    }
    PairedSeries::new(xs, ys)
}

/// `y = rho x + sqrt(1 - rho^2) e` with x, e independent standard normals
/// drawn alternately from stream 0 of the seeded generator.
pub fn gen_gaussian_pair(spec: &GaussianPairSpec) -> Result<PairedSeries> {
    spec.validate()?;
    let mut series = gaussian_pair_from(spec, &mut rng_for(spec.seed, 0))?;
    series.meta.insert("generator".into(), GENERATOR_ID.into());
    series.meta.insert("seed".into(), spec.seed.to_string());
    series.meta.insert("rho".into(), spec.rho.to_string());
    Ok(series)
}

/// Standard normals from stream 0 of the seeded generator.
pub fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, 0);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Tukey g-and-h: `((exp(g z) - 1) / g) exp(h z^2 / 2)`, or
/// `z exp(h z^2 / 2)` when g = 0. Optionally rescaled to sample mean 0 and
/// sample variance 1.
pub fn gh_transform(zs: &[f64], spec: &GandHSpec) -> Result<Vec<f64>> {
    if spec.h.is_nan() || spec.h < 0.0 {
        return Err(Error::InvalidParameter(format!("h must be >= 0, got {}", spec.h)));
    }
    if !spec.g.is_finite() {
        return Err(Error::InvalidParameter(format!("g must be finite, got {}", spec.g)));
    }
    if let Some(&z) = zs.iter().find(|z| z.is_nan() || z.abs() > GH_INPUT_LIMIT) {
        return Err(Error::Overflow(z));
    }
    let mut out: Vec<f64> = zs
        .iter()
        .map(|&z| {
            let elongation = (spec.h * z * z / 2.0).exp();
            if spec.g == 0.0 {
                z * elongation
            } else {
                (spec.g * z).exp_m1() / spec.g * elongation
            }
        })
        .collect();
    if let Some(v) = out.iter().find(|v| !v.is_finite()) {
        return Err(Error::Overflow(*v));
    }
    if spec.standardize && out.len() >= 2 {
        let (m, sd) = mean_and_sd(&out);
        if sd > 0.0 {
            for v in &mut out {
                *v = (*v - m) / sd;
            }
        }
    }
    Ok(out)
}

/// Moment skewness m3 / m2^(3/2).
pub fn sample_skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for v in values {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
    }
    (m3 / n) / (m2 / n).powf(1.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullSpec {
    pub replicates: usize,
    pub seed: u64,
    /// Lower and upper quantile of the band.
    pub band: [f64; 2],
    /// Keep every replicate's curve in the envelope.
    pub keep_values: bool,
}

impl Default for NullSpec {
    fn default() -> Self {
        Self {
            replicates: 1000,
            seed: 0,
            band: [0.05, 0.95],
            keep_values: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub mean: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Replicates that produced a value at this point.
    pub present: usize,
    /// Present in at least half of the replicates.
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullEnvelope {
    pub replicates: usize,
    pub seed: u64,
    pub band: [f64; 2],
    pub points: Vec<EnvelopePoint>,
    /// Replicate-major values, when requested.
    pub values: Option<Vec<Vec<Option<f64>>>>,
}

/// Mean and per-axis scale to give the null replicates, so scans with
/// absolute thresholds see data on the same scale as the real series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalScale {
    pub mean: [f64; 2],
    pub sd: [f64; 2],
}

impl MarginalScale {
    pub fn of(series: &PairedSeries) -> Self {
        let (mx, sx) = mean_and_sd(series.xs());
        let (my, sy) = mean_and_sd(series.ys());
        Self {
            mean: [mx, my],
            sd: [sx, sy],
        }
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn aggregate(per_replicate: &[Vec<Option<f64>>], spec: &NullSpec) -> Vec<EnvelopePoint> {
    let width = per_replicate.iter().map(Vec::len).max().unwrap_or(0);
    (0..width)
        .map(|j| {
            let mut vals: Vec<f64> = per_replicate
                .iter()
                .filter_map(|r| r.get(j).copied().flatten())
                .collect();
            let present = vals.len();
            let reliable = 2 * present >= per_replicate.len();
            if vals.is_empty() {
                return EnvelopePoint {
                    mean: None,
                    lower: None,
                    upper: None,
                    present,
                    reliable,
                };
            }
            let mean = vals.iter().sum::<f64>() / present as f64;
            vals.sort_by(f64::total_cmp);
            EnvelopePoint {
                mean: Some(mean),
                lower: Some(quantile(&vals, spec.band[0])),
                upper: Some(quantile(&vals, spec.band[1])),
                present,
                reliable,
            }
        })
        .collect()
}

/// Runs `scan` on `spec.replicates` Gaussian pairs of length `n` with
/// correlation `matched_rho` and aggregates each returned curve pointwise.
///
/// Replicate r draws from generator stream r + 1 of `spec.seed` (stream 0 is
/// what [`gen_gaussian_pair`] uses), so results do not depend on scheduling.
/// `scan` returns one `Vec<Option<f64>>` per curve; `None` marks a gap.
pub fn null_envelope<F>(
    n: usize,
    matched_rho: f64,
    spec: &NullSpec,
    scale: Option<MarginalScale>,
    scan: F,
) -> Result<Vec<NullEnvelope>>
where
    F: Fn(&PairedSeries) -> Vec<Vec<Option<f64>>> + Sync,
{
    if spec.replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    if !(0.0..=1.0).contains(&spec.band[0]) || !(spec.band[0]..=1.0).contains(&spec.band[1]) {
        return Err(Error::InvalidParameter(format!("bad quantile band {:?}", spec.band)));
    }
    let pair = GaussianPairSpec {
        n,
        rho: matched_rho,
        seed: spec.seed,
    };
    pair.validate()?;

    let runs: Vec<Vec<Vec<Option<f64>>>> = (0..spec.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut series = gaussian_pair_from(&pair, &mut rng_for(spec.seed, r + 1))?;
            if let Some(s) = scale {
                series = PairedSeries::new(
                    series.xs().iter().map(|x| s.mean[0] + s.sd[0] * x).collect(),
                    series.ys().iter().map(|y| s.mean[1] + s.sd[1] * y).collect(),
                )?;
            }
            Ok(scan(&series))
        })
        .collect::<Result<_>>()?;

    let curves = runs.iter().map(Vec::len).max().unwrap_or(0);
    Ok((0..curves)
        .map(|c| {
            let per_replicate: Vec<Vec<Option<f64>>> = runs
                .iter()
                .map(|r| r.get(c).cloned().unwrap_or_default())
                .collect();
            NullEnvelope {
                replicates: spec.replicates,
                seed: spec.seed,
                band: spec.band,
                points: aggregate(&per_replicate, spec),
                values: spec.keep_values.then_some(per_replicate),
            }
        })
        .collect())
}
