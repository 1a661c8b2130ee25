use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::accumulator::{psnr, vote_accumulator, Accumulator2D, VoteStrategy, SIGMA_ACC};
use crate::eval::scene::{add_gaussian_noise, synth_scene, SceneSpec};
use crate::image::GrayImage;
use crate::preprocess::{sobel_edges, sobel_magnitude, EdgePoint};
use crate::sampling::CircleHypothesis;

pub const CSV_HEADER: &str = "strategy,radius,variance,trials,mean_psnr_db,delta_psnr_db";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub radii: Vec<f64>,
    pub variances: Vec<f64>,
    pub strategies: Vec<VoteStrategy>,
    pub trials: usize,
    pub seed: u64,
    pub iterations: usize,
    pub size: usize,
    /// Sobel threshold as a fraction of the image's maximum magnitude.
    pub sobel_ratio: f64,
    pub background: f64,
    pub foreground: f64,
    /// Hard-edged disks by default, as in a plain binary synthetic image.
    pub antialias: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            radii: vec![50.0],
            variances: vec![0.0, 0.01, 0.05, 0.1, 0.2],
            strategies: vec![
                VoteStrategy::ThreePoint,
                VoteStrategy::FourPoint,
                VoteStrategy::Its { delta_k: 0.05 },
            ],
            trials: 100,
            seed: 0,
            iterations: 500,
            size: 256,
            sobel_ratio: 0.2,
            background: 0.0,
            foreground: 1.0,
            antialias: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub strategy: VoteStrategy,
    pub radius: f64,
    pub variance: f64,
    pub trials: usize,
    /// PSNR of the trial-averaged noisy accumulator against the
    /// trial-averaged noiseless one.
    pub mean_psnr: f64,
    /// PSNR of the first gradient-pair strategy minus the four-point PSNR at
    /// the same radius and variance.
    pub delta_psnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.6}")
    }
}

impl SweepTable {
    pub fn get(&self, strategy: VoteStrategy, radius: f64, variance: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.strategy == strategy && r.radius == radius && r.variance == variance)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.strategy,
                r.radius,
                r.variance,
                r.trials,
                fmt_real(r.mean_psnr),
                r.delta_psnr.map(fmt_real).unwrap_or_default()
            );
        }
        out
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be >= 1"));
        }
        if self.radii.is_empty() || self.variances.is_empty() || self.strategies.is_empty() {
            return Err(Error::param("radii, variances and strategies must be nonempty"));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations must be >= 1"));
        }
        if let Some(v) = self.variances.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::param(format!("variance {v} must be >= 0")));
        }
        if !(self.sobel_ratio > 0.0 && self.sobel_ratio <= 1.0) {
            return Err(Error::param("sobel_ratio must lie in (0, 1]"));
        }
        Ok(())
    }
}

fn mix(parts: &[u64]) -> u64 {
    // FNV-1a over the words, then a final avalanche
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^ (h >> 33)
}

/// Sobel edges thresholded at `ratio` of the image's maximum magnitude.
pub fn sobel_edges_relative(img: &GrayImage, ratio: f64) -> Result<Vec<EdgePoint>> {
    let max = sobel_magnitude(img).into_iter().fold(0.0, f64::max);
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    sobel_edges(img, ratio * max)
}

fn strategy_code(i: usize) -> u64 {
    i as u64 + 1
}

/// PSNR of noisy against noiseless centre-vote accumulators over a grid of
/// circle radii, noise variances and sampling strategies. Noisy trial `t`
/// reuses the vote seed of noiseless trial `t`, and all strategies share
/// each trial's noisy edge map.
pub fn psnr_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    cfg.validate()?;
    let size = cfg.size;
    let centre = size as f64 / 2.0;
    let mut rows = Vec::new();
    for &radius in &cfg.radii {
        let mut spec = SceneSpec::single_circle(size, size, CircleHypothesis::new(centre, centre, radius), cfg.background, cfg.foreground);
        spec.shapes[0].antialias = cfg.antialias;
        let (clean, _) = synth_scene(&spec)?;
        let vote_seed = |t: usize, s: usize| mix(&[cfg.seed, radius.to_bits(), t as u64, strategy_code(s)]);

        let mean_over_trials = |edges_of: &(dyn Fn(usize) -> Result<Vec<EdgePoint>> + Sync)| -> Result<Vec<Accumulator2D>> {
            let per_trial: Vec<Vec<Accumulator2D>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let edges = edges_of(t)?;
                    cfg.strategies
                        .iter()
                        .enumerate()
                        .map(|(s, &strategy)| vote_accumulator(&edges, size, size, strategy, cfg.iterations, vote_seed(t, s)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            (0..cfg.strategies.len())
                .map(|s| {
                    let accs: Vec<Accumulator2D> = per_trial.iter().map(|v| v[s].clone()).collect();
                    Accumulator2D::mean(&accs).map(|m| m.smoothed(SIGMA_ACC))
                })
                .collect()
        };

        let clean_edges = sobel_edges_relative(&clean, cfg.sobel_ratio)?;
        let reference = mean_over_trials(&|_| Ok(clean_edges.clone()))?;

        for &variance in &cfg.variances {
            let noisy = mean_over_trials(&|t| {
                let img = add_gaussian_noise(&clean, variance, mix(&[cfg.seed, radius.to_bits(), variance.to_bits(), t as u64]))?;
                sobel_edges_relative(&img, cfg.sobel_ratio)
            })?;
            let psnrs: Vec<f64> = reference
                .iter()
                .zip(&noisy)
                .map(|(r, t)| psnr(r, t).unwrap_or(f64::NEG_INFINITY))
                .collect();
            let its = cfg.strategies.iter().position(|s| matches!(s, VoteStrategy::Its { .. }));
            let four = cfg.strategies.iter().position(|s| *s == VoteStrategy::FourPoint);
            let delta = match (its, four) {
                (Some(i), Some(f)) => Some(psnrs[i] - psnrs[f]),
                _ => None,
            };
            for (s, &strategy) in cfg.strategies.iter().enumerate() {
                rows.push(SweepRow {
                    strategy,
                    radius,
                    variance,
                    trials: cfg.trials,
                    mean_psnr: psnrs[s],
                    delta_psnr: delta,
                });
            }
        }
    }
    Ok(SweepTable { rows })
}
