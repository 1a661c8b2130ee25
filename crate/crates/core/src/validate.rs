//! Sector-based completeness check.
//!
//! The circumference is split into `n` equal sectors. A sector is valid when
//! it holds at least one active edge point inside the inlier band whose
//! gradient is radially aligned. Maximal circular runs of at least three
//! valid sectors contribute their length as votes.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::preprocess::{EdgePoint, EdgeSegment};
use crate::refine::{is_inlier, RefineParams};
use crate::sampling::CircleHypothesis;

pub const MIN_RUN: usize = 3;
pub const MIN_SECTORS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorVote {
    pub n_sectors: usize,
    pub valid: Vec<bool>,
    pub votes: usize,
}

impl SectorVote {
    pub fn from_valid(valid: Vec<bool>) -> Self {
        let votes = run_votes(&valid);
        SectorVote {
            n_sectors: valid.len(),
            valid,
            votes,
        }
    }
}

/// Sum of lengths of circular runs of valid sectors that are at least
/// [`MIN_RUN`] long.
pub fn run_votes(valid: &[bool]) -> usize {
    let n = valid.len();
    let Some(start) = valid.iter().position(|v| !v) else {
        return if n >= MIN_RUN { n } else { 0 };
    };
    // scan once around the circle beginning just after an invalid sector
    let mut votes = 0;
    let mut run = 0;
    for k in 1..=n {
        if valid[(start + k) % n] {
            run += 1;
        } else {
            if run >= MIN_RUN {
                votes += run;
            }
            run = 0;
        }
    }
    votes
}

#[inline]
pub fn sector_of(c: &CircleHypothesis, p: [f64; 2], n_sectors: usize) -> usize {
    let angle = (p[1] - c.b).atan2(p[0] - c.a).rem_euclid(TAU);
    ((angle / TAU * n_sectors as f64) as usize).min(n_sectors - 1)
}

/// Votes for `c` from the active points of `segment`, together with the
/// indices of the points that made sectors valid.
pub fn sector_vote_with_support(
    c: &CircleHypothesis,
    segment: &EdgeSegment,
    n_sectors: usize,
    params: &RefineParams,
) -> Result<(SectorVote, Vec<usize>)> {
    if n_sectors < MIN_SECTORS {
        return Err(Error::param(format!("n_sectors must be >= {MIN_SECTORS}, got {n_sectors}")));
    }
    let mut valid = vec![false; n_sectors];
    let mut support = Vec::new();
    for (i, p) in segment.points.iter().enumerate() {
        if segment.active[i] && is_inlier(p, c, params) {
            valid[sector_of(c, p.pos(), n_sectors)] = true;
            support.push(i);
        }
    }
    Ok((SectorVote::from_valid(valid), support))
}

pub fn sector_vote(
    c: &CircleHypothesis,
    segment: &EdgeSegment,
    n_sectors: usize,
    params: &RefineParams,
) -> Result<SectorVote> {
    sector_vote_with_support(c, segment, n_sectors, params).map(|(v, _)| v)
}

/// Votes from arbitrary points, used where points are not grouped in a segment.
pub fn sector_vote_points(c: &CircleHypothesis, points: &[EdgePoint], n_sectors: usize, params: &RefineParams) -> Result<SectorVote> {
    sector_vote(c, &EdgeSegment::new(points.to_vec()), n_sectors, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected,
}

/// Accepts when votes reach `min_votes` (inclusive).
pub fn validate_circle(v: &SectorVote, min_votes: usize) -> Verdict {
    if v.votes >= min_votes {
        Verdict::Accepted
    } else {
        Verdict::Rejected
    }
}

/// `ceil(ratio * n_sectors)`.
pub fn min_votes_for(n_sectors: usize, ratio: f64) -> usize {
    (ratio * n_sectors as f64 - 1e-9).ceil().max(0.0) as usize
}
