//! End-to-end multi-circle detection.
//!
//! Gradients and Canny edges are computed once; edges are split into
//! 8-connected segments and each segment is sampled independently with its
//! own cluster store and random stream. A cluster that collects
//! `cluster_min_members` hypotheses is refined and validated; accepted circles
//! deactivate their supporting points and sampling continues on the rest.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::preprocess::{self, EdgePoint, EdgeSegment};
use crate::refine::{refine_cluster, RefineParams};
use crate::sampling::{cluster_insert_capped, draw_hypothesis, CircleHypothesis, Cluster, Rejection, SamplingParams, Strategy};
use crate::validate::{min_votes_for, sector_vote_with_support, validate_circle, Verdict, MIN_SECTORS};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Derivative-of-Gaussian standard deviation.
    pub sigma: f64,
    pub ksize: usize,
    /// Gaussian pre-smoothing applied before gradient estimation; 0 disables.
    pub smooth_sigma: f64,
    pub canny_low: f64,
    pub canny_high: f64,
    pub sampling: SamplingParams,
    pub refine: RefineParams,
    pub n_sectors: usize,
    pub min_votes_ratio: f64,
    pub r_min: f64,
    pub cluster_min_members: usize,
    pub iteration_budget_factor: f64,
    /// Segments with fewer points are ignored.
    pub min_segment: usize,
    pub strategy: Strategy,
    pub rng_seed: u64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            sigma: preprocess::DEFAULT_SIGMA,
            ksize: preprocess::DEFAULT_KSIZE,
            smooth_sigma: 1.0,
            canny_low: preprocess::DEFAULT_CANNY_LOW,
            canny_high: preprocess::DEFAULT_CANNY_HIGH,
            sampling: SamplingParams::default(),
            refine: RefineParams::default(),
            n_sectors: 16,
            min_votes_ratio: 0.5,
            r_min: 5.0,
            cluster_min_members: 6,
            iteration_budget_factor: 1.0,
            min_segment: preprocess::DEFAULT_MIN_SEGMENT,
            strategy: Strategy::Its,
            rng_seed: 0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ksize < 3 || self.ksize % 2 == 0 {
            return Err(Error::param(format!("ksize must be odd and >= 3, got {}", self.ksize)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.smooth_sigma >= 0.0 && self.smooth_sigma.is_finite()) {
            return Err(Error::param(format!("smooth_sigma must be >= 0, got {}", self.smooth_sigma)));
        }
        if !(self.canny_low > 0.0 && self.canny_low < self.canny_high && self.canny_high <= 1.0) {
            return Err(Error::param(format!(
                "Canny thresholds need 0 < low < high <= 1, got {} and {}",
                self.canny_low, self.canny_high
            )));
        }
        self.sampling.validate()?;
        self.refine.validate()?;
        if self.n_sectors < MIN_SECTORS {
            return Err(Error::param(format!("n_sectors must be >= {MIN_SECTORS}, got {}", self.n_sectors)));
        }
        if !(self.min_votes_ratio > 0.0 && self.min_votes_ratio <= 1.0) {
            return Err(Error::param(format!("min_votes_ratio must lie in (0, 1], got {}", self.min_votes_ratio)));
        }
        if !(self.r_min >= 0.0 && self.r_min.is_finite()) {
            return Err(Error::param(format!("r_min must be >= 0, got {}", self.r_min)));
        }
        if self.cluster_min_members < 2 {
            return Err(Error::param("cluster_min_members must be >= 2"));
        }
        if !(self.iteration_budget_factor >= 0.0 && self.iteration_budget_factor.is_finite()) {
            return Err(Error::param("iteration_budget_factor must be >= 0"));
        }
        if self.min_segment < self.strategy.points_needed() {
            return Err(Error::param(format!(
                "min_segment must be >= {}, got {}",
                self.strategy.points_needed(),
                self.min_segment
            )));
        }
        Ok(())
    }

    pub fn min_votes(&self) -> usize {
        min_votes_for(self.n_sectors, self.min_votes_ratio)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub circle: CircleHypothesis,
    pub votes: usize,
    pub n_sectors: usize,
    pub completeness: f64,
    /// Edge points that supported validation.
    pub support: usize,
    pub segment_id: usize,
}

/// Exact counters for one detection run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub edge_pixels: usize,
    pub segments: usize,
    pub budget: usize,
    pub iterations: usize,
    pub pairs_accepted: usize,
    pub rejected_too_close: usize,
    pub rejected_not_isosceles: usize,
    pub rejected_parallel: usize,
    pub rejected_no_intersection: usize,
    pub rejected_collinear: usize,
    pub rejected_fourth_point: usize,
    pub rejected_radius: usize,
    pub clusters_created: usize,
    pub candidates_refined: usize,
    pub candidates_validated: usize,
    pub candidates_rejected: usize,
}

impl Stats {
    fn reject(&mut self, why: Rejection) {
        let slot = match why {
            Rejection::TooClose => &mut self.rejected_too_close,
            Rejection::NotIsosceles => &mut self.rejected_not_isosceles,
            Rejection::Parallel => &mut self.rejected_parallel,
            Rejection::NoIntersection => &mut self.rejected_no_intersection,
            Rejection::Collinear => &mut self.rejected_collinear,
            Rejection::FourthPoint => &mut self.rejected_fourth_point,
            Rejection::Radius => &mut self.rejected_radius,
        };
        *slot += 1;
    }

    fn merge(&mut self, o: &Stats) {
        self.iterations += o.iterations;
        self.pairs_accepted += o.pairs_accepted;
        self.rejected_too_close += o.rejected_too_close;
        self.rejected_not_isosceles += o.rejected_not_isosceles;
        self.rejected_parallel += o.rejected_parallel;
        self.rejected_no_intersection += o.rejected_no_intersection;
        self.rejected_collinear += o.rejected_collinear;
        self.rejected_fourth_point += o.rejected_fourth_point;
        self.rejected_radius += o.rejected_radius;
        self.clusters_created += o.clusters_created;
        self.candidates_refined += o.candidates_refined;
        self.candidates_validated += o.candidates_validated;
        self.candidates_rejected += o.candidates_rejected;
    }

    /// Name/value pairs in a fixed order.
    pub fn fields(&self) -> [(&'static str, usize); 16] {
        [
            ("edge_pixels", self.edge_pixels),
            ("segments", self.segments),
            ("budget", self.budget),
            ("iterations", self.iterations),
            ("pairs_accepted", self.pairs_accepted),
            ("rejected_too_close", self.rejected_too_close),
            ("rejected_not_isosceles", self.rejected_not_isosceles),
            ("rejected_parallel", self.rejected_parallel),
            ("rejected_no_intersection", self.rejected_no_intersection),
            ("rejected_collinear", self.rejected_collinear),
            ("rejected_fourth_point", self.rejected_fourth_point),
            ("rejected_radius", self.rejected_radius),
            ("clusters_created", self.clusters_created),
            ("candidates_refined", self.candidates_refined),
            ("candidates_validated", self.candidates_validated),
            ("candidates_rejected", self.candidates_rejected),
        ]
    }
}

/// Wall time spent per pipeline stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub edges: Duration,
    pub sampling: Duration,
    pub refinement: Duration,
    pub validation: Duration,
    pub total: Duration,
}

impl StageTimings {
    pub fn other(&self) -> Duration {
        self.total
            .saturating_sub(self.edges + self.sampling + self.refinement + self.validation)
    }

    /// Percentages for edges, sampling, refinement, validation and other.
    pub fn percentages(&self) -> [f64; 5] {
        let total = self.total.as_secs_f64();
        if total <= 0.0 {
            return [0.0, 0.0, 0.0, 0.0, 100.0];
        }
        let parts = [self.edges, self.sampling, self.refinement, self.validation, self.other()];
        parts.map(|d| 100.0 * d.as_secs_f64() / total)
    }
}

pub fn detect(img: &GrayImage, cfg: &DetectorConfig) -> Result<Vec<Detection>> {
    detect_with_stats(img, cfg).map(|(d, _)| d)
}

pub fn detect_with_stats(img: &GrayImage, cfg: &DetectorConfig) -> Result<(Vec<Detection>, Stats)> {
    detect_profiled(img, cfg).map(|(d, s, _)| (d, s))
}

/// Gradient field and Canny edges exactly as the detector computes them.
pub fn detector_edges(img: &GrayImage, cfg: &DetectorConfig) -> Result<Vec<EdgePoint>> {
    let smoothed;
    let src = if cfg.smooth_sigma > 0.0 {
        smoothed = preprocess::gaussian_smooth(img, cfg.smooth_sigma, cfg.ksize)?;
        &smoothed
    } else {
        img
    };
    let field = preprocess::dog_gradient(src, cfg.sigma, cfg.ksize)?;
    preprocess::canny_from_field(&field, cfg.canny_low, cfg.canny_high)
}

pub fn detect_profiled(img: &GrayImage, cfg: &DetectorConfig) -> Result<(Vec<Detection>, Stats, StageTimings)> {
    cfg.validate()?;
    if img.is_empty() {
        return Err(Error::param("image is empty"));
    }
    let start = Instant::now();
    let mut timings = StageTimings::default();

    let edges = detector_edges(img, cfg)?;
    let segments = preprocess::connected_components(&edges, cfg.min_segment);
    timings.edges = start.elapsed();

    let mut stats = Stats {
        edge_pixels: edges.len(),
        segments: segments.len(),
        budget: (cfg.iteration_budget_factor * edges.len() as f64).floor() as usize,
        ..Stats::default()
    };

    let mut detections = Vec::new();
    for (id, segment) in segments.into_iter().enumerate() {
        // shares are floored so they never sum past the global budget
        let share = (stats.budget as u128 * segment.len() as u128 / edges.len() as u128) as usize;
        let mut run = SegmentRun::new(id, segment, cfg);
        run.sample(share, &mut timings);
        stats.merge(&run.stats);
        detections.extend(run.detections);
    }
    canonical_order(&mut detections);
    suppress_duplicates(&mut detections);
    timings.total = start.elapsed();
    Ok((detections, stats, timings))
}

/// Descending support, then ascending centre x, y.
pub fn canonical_order(d: &mut [Detection]) {
    d.sort_by(|p, q| {
        q.support
            .cmp(&p.support)
            .then(p.circle.a.total_cmp(&q.circle.a))
            .then(p.circle.b.total_cmp(&q.circle.b))
            .then(p.circle.r.total_cmp(&q.circle.r))
    });
}

/// Centre and radius tolerance under which two detections count as the same circle.
pub const DUPLICATE_TOL: f64 = 3.0;

/// Greedy in canonical order: a detection is dropped when an earlier kept one
/// lies within [`DUPLICATE_TOL`] in both centre distance and radius.
/// Segments are sampled independently, so a circle split across two segments
/// (or whose leftover points still validate) can otherwise be emitted twice.
pub fn suppress_duplicates(d: &mut Vec<Detection>) {
    let mut kept: Vec<Detection> = Vec::with_capacity(d.len());
    for x in d.drain(..) {
        let dup = kept.iter().any(|k| {
            (k.circle.a - x.circle.a).hypot(k.circle.b - x.circle.b) < DUPLICATE_TOL
                && (k.circle.r - x.circle.r).abs() < DUPLICATE_TOL
        });
        if !dup {
            kept.push(x);
        }
    }
    *d = kept;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent, reproducible stream for one segment.
pub fn segment_rng(seed: u64, segment_id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(segment_id as u64)))
}

struct SegmentRun<'a> {
    id: usize,
    segment: EdgeSegment,
    cfg: &'a DetectorConfig,
    rng: ChaCha8Rng,
    clusters: Vec<Cluster>,
    pool: Vec<EdgePoint>,
    stats: Stats,
    detections: Vec<Detection>,
}

impl<'a> SegmentRun<'a> {
    fn new(id: usize, segment: EdgeSegment, cfg: &'a DetectorConfig) -> Self {
        let pool = segment.points.clone();
        SegmentRun {
            id,
            segment,
            cfg,
            rng: segment_rng(cfg.rng_seed, id),
            clusters: Vec::new(),
            pool,
            stats: Stats::default(),
            detections: Vec::new(),
        }
    }

    fn sample(&mut self, share: usize, timings: &mut StageTimings) {
        let cfg = self.cfg;
        let mut t = Instant::now();
        while self.stats.iterations < share {
            if self.pool.len() < cfg.min_segment.max(cfg.strategy.points_needed()) {
                break;
            }
            self.stats.iterations += 1;
            let pair = match draw_hypothesis(cfg.strategy, &self.pool, &cfg.sampling, &mut self.rng) {
                Ok(p) if p.radius >= cfg.r_min && p.radius.is_finite() => p,
                Ok(_) => {
                    self.stats.reject(Rejection::Radius);
                    continue;
                }
                Err(why) => {
                    self.stats.reject(why);
                    continue;
                }
            };
            self.stats.pairs_accepted += 1;
            let before = self.clusters.len();
            let idx = cluster_insert_capped(&mut self.clusters, pair, cfg.sampling.d0, cfg.sampling.d_cap);
            if self.clusters.len() > before {
                self.stats.clusters_created += 1;
            }
            if self.clusters[idx].n() >= cfg.cluster_min_members {
                timings.sampling += t.elapsed();
                let cluster = self.clusters.swap_remove(idx);
                self.try_candidate(&cluster, timings);
                t = Instant::now();
            }
        }
        timings.sampling += t.elapsed();
    }

    fn try_candidate(&mut self, cluster: &Cluster, timings: &mut StageTimings) {
        let cfg = self.cfg;
        let t = Instant::now();
        self.stats.candidates_refined += 1;
        let refined = refine_cluster(cluster, &self.segment, &cfg.refine, &mut self.rng);
        timings.refinement += t.elapsed();

        let t = Instant::now();
        let circle = refined.circle;
        let accepted = if refined.degraded || !circle.is_valid() || circle.r < cfg.r_min {
            None
        } else {
            sector_vote_with_support(&circle, &self.segment, cfg.n_sectors, &cfg.refine)
                .ok()
                .filter(|(v, _)| validate_circle(v, cfg.min_votes()) == Verdict::Accepted)
        };
        match accepted {
            Some((vote, support)) => {
                self.stats.candidates_validated += 1;
                for &i in &support {
                    self.segment.active[i] = false;
                }
                self.pool = self.segment.active_points().copied().collect();
                self.detections.push(Detection {
                    circle,
                    votes: vote.votes,
                    n_sectors: vote.n_sectors,
                    completeness: vote.votes as f64 / vote.n_sectors as f64,
                    support: support.len(),
                    segment_id: self.id,
                });
            }
            None => self.stats.candidates_rejected += 1,
        }
        timings.validation += t.elapsed();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_image_yields_nothing() {
        let img = GrayImage::filled(64, 64, 0.4);
        let (d, s) = detect_with_stats(&img, &DetectorConfig::default()).unwrap();
        assert!(d.is_empty());
        assert_eq!(s, Stats::default());
    }

    #[test]
    fn invalid_config_rejected() {
        let img = GrayImage::filled(8, 8, 0.0);
        let bad = [
            DetectorConfig { ksize: 4, ..Default::default() },
            DetectorConfig { canny_low: 0.5, canny_high: 0.4, ..Default::default() },
            DetectorConfig { n_sectors: 4, ..Default::default() },
            DetectorConfig { min_votes_ratio: 0.0, ..Default::default() },
            DetectorConfig {
                sampling: SamplingParams { delta_p: 1.0, ..Default::default() },
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(detect(&img, &cfg), Err(Error::InvalidParameter(_))), "{cfg:?}");
        }
    }

    fn det(a: f64, b: f64, r: f64, support: usize) -> Detection {
        Detection {
            circle: CircleHypothesis { a, b, r },
            votes: 16,
            n_sectors: 16,
            completeness: 1.0,
            support,
            segment_id: 0,
        }
    }

    #[test]
    fn duplicates_keep_strongest() {
        let mut d = vec![det(10.0, 10.0, 20.0, 50), det(11.5, 11.0, 21.0, 90), det(40.0, 10.0, 20.0, 30), det(10.0, 10.0, 24.0, 20)];
        canonical_order(&mut d);
        suppress_duplicates(&mut d);
        let kept: Vec<_> = d.iter().map(|x| x.support).collect();
        assert_eq!(kept, vec![90, 30, 20]);
    }

    #[test]
    fn percentages_partition_total() {
        let t = StageTimings {
            edges: Duration::from_millis(5),
            sampling: Duration::from_millis(2),
            refinement: Duration::from_millis(1),
            validation: Duration::from_millis(1),
            total: Duration::from_millis(10),
        };
        let p = t.percentages();
        assert!((p.iter().sum::<f64>() - 100.0).abs() < 1e-9);
        assert!((p[4] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn segment_streams_differ() {
        use rand::Rng;
        let a: u64 = segment_rng(1, 0).random();
        let b: u64 = segment_rng(1, 1).random();
        let c: u64 = segment_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
