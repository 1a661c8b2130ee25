//! Two-stage candidate refinement.
//!
//! Stage one relocates the centre to the crossing of the perpendicular
//! bisectors of two chords taken from cluster members, which does not depend
//! on gradient directions. Stage two is an algebraic least-squares circle fit
//! over edge points that sit near the circumference and whose gradients are
//! aligned with the radial direction.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::preprocess::{EdgePoint, EdgeSegment};
use crate::sampling::{CircleHypothesis, Cluster, GeometryError, EPSILON_DEN};

#[derive(Debug, Clone, PartialEq)]
pub struct RefineParams {
    /// Half-width of the inlier band around the circumference, pixels.
    pub delta_d: f64,
    /// Minimum `|cos|` between a point's gradient and the radial direction.
    pub align_min: f64,
}

impl Default for RefineParams {
    fn default() -> Self {
        RefineParams {
            delta_d: 1.0,
            align_min: 0.95,
        }
    }
}

impl RefineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_d > 0.0 && self.delta_d.is_finite()) {
            return Err(Error::param(format!("delta_d must be positive, got {}", self.delta_d)));
        }
        if !(self.align_min > 0.0 && self.align_min < 1.0) {
            return Err(Error::param(format!("align_min must lie in (0, 1), got {}", self.align_min)));
        }
        Ok(())
    }
}

/// Intersection of the perpendicular bisectors of chords `a1a2` and `b1b2`.
pub fn chord_center(
    a1: [f64; 2],
    a2: [f64; 2],
    b1: [f64; 2],
    b2: [f64; 2],
) -> std::result::Result<[f64; 2], GeometryError> {
    // bisector of p1p2: (p2 - p1) . x = (|p2|^2 - |p1|^2) / 2
    let da = [a2[0] - a1[0], a2[1] - a1[1]];
    let db = [b2[0] - b1[0], b2[1] - b1[1]];
    let ca = 0.5 * ((a2[0] * a2[0] + a2[1] * a2[1]) - (a1[0] * a1[0] + a1[1] * a1[1]));
    let cb = 0.5 * ((b2[0] * b2[0] + b2[1] * b2[1]) - (b1[0] * b1[0] + b1[1] * b1[1]));
    let det = da[0] * db[1] - da[1] * db[0];
    if det.abs() < EPSILON_DEN {
        return Err(GeometryError::Parallel);
    }
    Ok([(ca * db[1] - da[1] * cb) / det, (da[0] * cb - ca * db[0]) / det])
}

/// Whether `p` lies in the band around `c` with a radially aligned gradient.
#[inline]
pub(crate) fn is_inlier(p: &EdgePoint, c: &CircleHypothesis, params: &RefineParams) -> bool {
    let dx = f64::from(p.x) - c.a;
    let dy = f64::from(p.y) - c.b;
    let d = dx.hypot(dy);
    if d < 1e-9 || (d - c.r).abs() > params.delta_d {
        return false;
    }
    ((p.g[0] * dx + p.g[1] * dy) / d).abs() >= params.align_min
}

/// Indices of active segment points that are inliers of `c`.
pub fn inlier_indices(segment: &EdgeSegment, c: &CircleHypothesis, params: &RefineParams) -> Vec<usize> {
    segment
        .points
        .iter()
        .enumerate()
        .filter(|&(i, p)| segment.active[i] && is_inlier(p, c, params))
        .map(|(i, _)| i)
        .collect()
}

pub fn select_inliers(segment: &EdgeSegment, c: &CircleHypothesis, params: &RefineParams) -> Vec<EdgePoint> {
    inlier_indices(segment, c, params)
        .into_iter()
        .map(|i| segment.points[i])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsFit {
    pub circle: CircleHypothesis,
    /// Set when the fit could not be computed and `circle` is the seed.
    pub degraded: bool,
}

/// Algebraic circle fit minimizing `sum (x^2 + y^2 + D x + E y + F)^2`.
pub fn least_squares_refine(inliers: &[EdgePoint], seed: CircleHypothesis) -> LsFit {
    let pts: Vec<[f64; 2]> = inliers.iter().map(EdgePoint::pos).collect();
    fit_algebraic(&pts).map_or(LsFit { circle: seed, degraded: true }, |circle| LsFit {
        circle,
        degraded: false,
    })
}

pub(crate) fn fit_algebraic(pts: &[[f64; 2]]) -> Option<CircleHypothesis> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = pts.iter().map(|p| p[1]).sum::<f64>() / n;

    // normal equations in centred coordinates, unknowns (D, E, F)
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for p in pts {
        let (u, v) = (p[0] - mx, p[1] - my);
        let row = [u, v, 1.0];
        let z = u * u + v * v;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            rhs[i] -= z * row[i];
        }
    }
    let [d, e, f] = solve3(m, rhs)?;
    let r2 = 0.25 * (d * d + e * e) - f;
    if !(r2 > 0.0) {
        return None;
    }
    let c = CircleHypothesis::new(mx - 0.5 * d, my - 0.5 * e, r2.sqrt());
    c.is_valid().then_some(c)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let k = m[row][col] / m[col][col];
            for c in col..3 {
                m[row][c] -= k * m[col][c];
            }
            b[row] -= k * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|c| m[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// Chord pairs tried before stage one is skipped.
pub const CHORD_ATTEMPTS: usize = 5;
const LS_ROUNDS: usize = 3;

#[derive(Debug, Clone)]
pub struct Refinement {
    pub circle: CircleHypothesis,
    /// Stage one produced the starting circle for stage two.
    pub chord_used: bool,
    /// Stage two could not fit and the stage-one circle was kept.
    pub degraded: bool,
}

/// Stage one on a cluster: the bisector crossing of two member chords, with
/// radius the mean distance of the four chord points. `None` when every
/// attempt was degenerate or the result left the cluster's search range.
pub fn chord_stage<R: Rng + ?Sized>(cluster: &Cluster, rng: &mut R) -> Option<CircleHypothesis> {
    if cluster.n() < 2 {
        return None;
    }
    let seed = cluster.circle();
    for _ in 0..CHORD_ATTEMPTS {
        let pick = index::sample(rng, cluster.n(), 2);
        let (m1, m2) = (&cluster.members[pick.index(0)], &cluster.members[pick.index(1)]);
        let quad = [m1.a.pos(), m1.b.pos(), m2.a.pos(), m2.b.pos()];
        let Ok(center) = chord_center(quad[0], quad[1], quad[2], quad[3]) else {
            continue;
        };
        let r = quad.iter().map(|p| (p[0] - center[0]).hypot(p[1] - center[1])).sum::<f64>() / 4.0;
        let c = CircleHypothesis::new(center[0], center[1], r);
        let moved = ((c.a - seed.a).powi(2) + (c.b - seed.b).powi(2) + (c.r - seed.r).powi(2)).sqrt();
        return (c.is_valid() && moved <= cluster.d).then_some(c);
    }
    None
}

/// Full refinement of a cluster against the active points of its segment.
pub fn refine_cluster<R: Rng + ?Sized>(
    cluster: &Cluster,
    segment: &EdgeSegment,
    params: &RefineParams,
    rng: &mut R,
) -> Refinement {
    let stage_one = chord_stage(cluster, rng);
    let chord_used = stage_one.is_some();
    let mut circle = stage_one.unwrap_or_else(|| cluster.circle());
    let mut degraded = false;
    for round in 0..LS_ROUNDS {
        let inliers = select_inliers(segment, &circle, params);
        let fit = least_squares_refine(&inliers, circle);
        if fit.degraded {
            degraded = round == 0;
            break;
        }
        let shift = (fit.circle.a - circle.a).abs() + (fit.circle.b - circle.b).abs() + (fit.circle.r - circle.r).abs();
        circle = fit.circle;
        if shift < 1e-9 {
            break;
        }
    }
    Refinement {
        circle,
        chord_used,
        degraded,
    }
}
