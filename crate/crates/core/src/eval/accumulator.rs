use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{self, GrayImage};
use crate::preprocess::{gaussian_kernel, EdgePoint};
use crate::sampling::{draw_hypothesis, SamplingParams, Strategy};

/// Smoothing applied to every accumulator before comparison.
pub const SIGMA_ACC: f64 = 1.0;

/// Image-sized grid of centre votes.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator2D {
    pub width: usize,
    pub height: usize,
    pub votes: Vec<f64>,
    /// Samples that passed their strategy's test and landed on the grid.
    pub accepted: u64,
    /// Samples that passed but whose centre fell outside the grid.
    pub outside: u64,
}

impl Accumulator2D {
    pub fn new(width: usize, height: usize) -> Self {
        Accumulator2D {
            width,
            height,
            votes: vec![0.0; width * height],
            accepted: 0,
            outside: 0,
        }
    }

    pub fn total(&self) -> f64 {
        self.votes.iter().sum()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.votes[y * self.width + x]
    }

    /// First cell holding the maximum, in row-major order.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.votes.iter().enumerate() {
            if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| (i % self.width, i / self.width))
    }

    /// Vote mass in cells whose centres lie within `radius` of `c`.
    pub fn mass_within(&self, c: [f64; 2], radius: f64) -> f64 {
        let mut m = 0.0;
        for y in 0..self.height {
            for x in 0..self.width {
                if (x as f64 - c[0]).hypot(y as f64 - c[1]) <= radius {
                    m += self.get(x, y);
                }
            }
        }
        m
    }

    /// Gaussian-smoothed copy with zero padding; kernel spans 3 sigma.
    pub fn smoothed(&self, sigma: f64) -> Self {
        let ksize = 2 * (3.0 * sigma).ceil() as usize + 1;
        let k = gaussian_kernel(sigma, ksize);
        let half = (ksize / 2) as isize;
        let (w, h) = (self.width, self.height);
        let mut tmp = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (i, wt) in k.iter().enumerate() {
                    let xx = x as isize + i as isize - half;
                    if (0..w as isize).contains(&xx) {
                        acc += wt * self.votes[y * w + xx as usize];
                    }
                }
                tmp[y * w + x] = acc;
            }
        }
        let mut votes = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (i, wt) in k.iter().enumerate() {
                    let yy = y as isize + i as isize - half;
                    if (0..h as isize).contains(&yy) {
                        acc += wt * tmp[yy as usize * w + x];
                    }
                }
                votes[y * w + x] = acc;
            }
        }
        Accumulator2D { votes, ..self.clone() }
    }

    /// Cell-wise mean of equally sized accumulators.
    pub fn mean(accs: &[Accumulator2D]) -> Result<Self> {
        let first = accs.first().ok_or_else(|| Error::param("no accumulators to average"))?;
        let mut out = Accumulator2D::new(first.width, first.height);
        for a in accs {
            if (a.width, a.height) != (first.width, first.height) {
                return Err(Error::param("accumulator dimensions differ"));
            }
            for (o, v) in out.votes.iter_mut().zip(&a.votes) {
                *o += v;
            }
            out.accepted += a.accepted;
            out.outside += a.outside;
        }
        let n = accs.len() as f64;
        out.votes.iter_mut().for_each(|v| *v /= n);
        Ok(out)
    }

    /// Grayscale rendering scaled so the peak is white.
    pub fn to_image(&self) -> GrayImage {
        let max = self.votes.iter().cloned().fold(0.0, f64::max);
        let data = if max > 0.0 {
            self.votes.iter().map(|v| v / max).collect()
        } else {
            vec![0.0; self.votes.len()]
        };
        GrayImage::from_vec_clamped(self.width, self.height, data)
    }

    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        image::write_file(path.as_ref(), &self.to_image().encode_pgm())
    }
}

/// Sampling strategy for vote accumulation. The gradient-pair strategy
/// carries its own angle tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VoteStrategy {
    ThreePoint,
    FourPoint,
    Its { delta_k: f64 },
}

impl VoteStrategy {
    pub fn sampler(&self) -> Strategy {
        match self {
            VoteStrategy::ThreePoint => Strategy::ThreePoint,
            VoteStrategy::FourPoint => Strategy::FourPoint,
            VoteStrategy::Its { .. } => Strategy::Its,
        }
    }

    pub fn params(&self, base: &SamplingParams) -> SamplingParams {
        match *self {
            VoteStrategy::Its { delta_k } => SamplingParams { delta_k, ..base.clone() },
            _ => base.clone(),
        }
    }
}

impl fmt::Display for VoteStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VoteStrategy::ThreePoint => f.write_str("three-point"),
            VoteStrategy::FourPoint => f.write_str("four-point"),
            VoteStrategy::Its { delta_k } => write!(f, "its:{delta_k}"),
        }
    }
}

impl FromStr for VoteStrategy {
    type Err = Error;

    /// Accepts `three-point`, `four-point`, `its` (default tolerance) and
    /// `its:<delta_k>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "three-point" | "3pt" => Ok(VoteStrategy::ThreePoint),
            "four-point" | "4pt" => Ok(VoteStrategy::FourPoint),
            "its" => Ok(VoteStrategy::Its {
                delta_k: SamplingParams::default().delta_k,
            }),
            other => other
                .strip_prefix("its:")
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| *v >= 0.0 && v.is_finite())
                .map(|delta_k| VoteStrategy::Its { delta_k })
                .ok_or_else(|| Error::param(format!("unknown strategy '{other}'"))),
        }
    }
}

/// Runs `iterations` samples over the whole edge map and casts one vote at
/// the rounded centre of every accepted sample.
pub fn vote_accumulator(
    edges: &[EdgePoint],
    width: usize,
    height: usize,
    strategy: VoteStrategy,
    iterations: usize,
    seed: u64,
) -> Result<Accumulator2D> {
    vote_accumulator_with(edges, width, height, strategy, iterations, seed, &SamplingParams::default())
}

pub fn vote_accumulator_with(
    edges: &[EdgePoint],
    width: usize,
    height: usize,
    strategy: VoteStrategy,
    iterations: usize,
    seed: u64,
    base: &SamplingParams,
) -> Result<Accumulator2D> {
    if iterations == 0 {
        return Err(Error::param("iterations must be > 0"));
    }
    let mut acc = Accumulator2D::new(width, height);
    let sampler = strategy.sampler();
    if edges.len() < sampler.points_needed() {
        return Ok(acc);
    }
    let params = strategy.params(base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..iterations {
        let Ok(hyp) = draw_hypothesis(sampler, edges, &params, &mut rng) else {
            continue;
        };
        let (x, y) = (hyp.center[0].round(), hyp.center[1].round());
        if x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64 {
            acc.votes[y as usize * width + x as usize] += 1.0;
            acc.accepted += 1;
        } else {
            acc.outside += 1;
        }
    }
    Ok(acc)
}

/// `10 log10(sum r^2 / sum (r - t)^2)` in dB; infinite when the grids match.
pub fn psnr(reference: &Accumulator2D, test: &Accumulator2D) -> Result<f64> {
    if (reference.width, reference.height) != (test.width, test.height) {
        return Err(Error::param(format!(
            "accumulator sizes differ: {}x{} vs {}x{}",
            reference.width, reference.height, test.width, test.height
        )));
    }
    let signal: f64 = reference.votes.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return Err(Error::UndefinedReference);
    }
    let noise: f64 = reference.votes.iter().zip(&test.votes).map(|(r, t)| (r - t).powi(2)).sum();
    if noise == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal / noise).log10())
}
