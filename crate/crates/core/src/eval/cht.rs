//! Brute-force circular Hough transform.
//!
//! Every Canny edge point votes along full circles for each candidate radius
//! in a 3D `(x, y, r)` grid. Votes are normalized by the circumference in
//! cells so large and small circles compete on completeness. Peaks above a
//! fraction of the global maximum survive non-maximum suppression and are
//! refined to sub-cell precision by a weighted centroid.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::preprocess::{canny_edges, DEFAULT_CANNY_HIGH, DEFAULT_CANNY_LOW};
use crate::sampling::CircleHypothesis;

#[derive(Debug, Clone, PartialEq)]
pub struct ChtParams {
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    /// Centre cell edge length in pixels.
    pub cell_size: f64,
    /// Peaks must reach this fraction of the global maximum.
    pub threshold: f64,
    /// Suppression radius in cells, applied in all three dimensions.
    pub nms_cells: usize,
}

impl ChtParams {
    pub fn new(r_min: f64, r_max: f64) -> Self {
        ChtParams {
            r_min,
            r_max,
            r_step: 1.0,
            cell_size: 1.0,
            threshold: 0.5,
            nms_cells: 3,
        }
    }
}

pub fn cht_detect(img: &GrayImage, params: &ChtParams) -> Result<Vec<CircleHypothesis>> {
    let p = params;
    if !(p.r_step > 0.0 && p.cell_size > 0.0 && p.r_min > 0.0 && p.r_max >= p.r_min) {
        return Err(Error::param("CHT needs 0 < r_min <= r_max and positive steps"));
    }
    if p.r_max > img.width().max(img.height()) as f64 {
        return Err(Error::param("CHT radius range exceeds the image"));
    }
    let edges = canny_edges(img, DEFAULT_CANNY_LOW, DEFAULT_CANNY_HIGH)?;
    if edges.is_empty() {
        return Ok(Vec::new());
    }
    let nx = (img.width() as f64 / p.cell_size).ceil() as usize;
    let ny = (img.height() as f64 / p.cell_size).ceil() as usize;
    let nr = ((p.r_max - p.r_min) / p.r_step).floor() as usize + 1;
    let plane = nx * ny;
    let mut acc = vec![0f32; plane * nr];

    for ri in 0..nr {
        let r = p.r_min + ri as f64 * p.r_step;
        let steps = ((TAU * r / p.cell_size) * 2.0).ceil() as usize;
        let offsets: Vec<(f64, f64)> = (0..steps)
            .map(|k| {
                let t = k as f64 / steps as f64 * TAU;
                (r * t.cos(), r * t.sin())
            })
            .collect();
        let weight = (p.cell_size / (TAU * r)) as f32;
        let layer = &mut acc[ri * plane..(ri + 1) * plane];
        let mut touched: Vec<usize> = Vec::with_capacity(steps);
        for e in &edges {
            touched.clear();
            for &(dx, dy) in &offsets {
                let cx = ((f64::from(e.x) + dx) / p.cell_size).round();
                let cy = ((f64::from(e.y) + dy) / p.cell_size).round();
                if cx < 0.0 || cy < 0.0 || cx >= nx as f64 || cy >= ny as f64 {
                    continue;
                }
                touched.push(cy as usize * nx + cx as usize);
            }
            // one vote per cell per edge point
            touched.sort_unstable();
            touched.dedup();
            for &c in &touched {
                layer[c] += weight;
            }
        }
    }

    let max = acc.iter().cloned().fold(0f32, f32::max);
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    let floor = p.threshold as f32 * max;
    let at = |x: usize, y: usize, r: usize| acc[r * plane + y * nx + x];

    let mut peaks: Vec<(f32, usize, usize, usize)> = Vec::new();
    for r in 0..nr {
        for y in 0..ny {
            for x in 0..nx {
                let v = at(x, y, r);
                if v < floor {
                    continue;
                }
                let mut is_max = true;
                'n: for dr in -1i64..=1 {
                    for dy in -1i64..=1 {
                        for dx in -1i64..=1 {
                            let (xx, yy, rr) = (x as i64 + dx, y as i64 + dy, r as i64 + dr);
                            if (dx, dy, dr) == (0, 0, 0) || xx < 0 || yy < 0 || rr < 0 || xx >= nx as i64 || yy >= ny as i64 || rr >= nr as i64 {
                                continue;
                            }
                            if at(xx as usize, yy as usize, rr as usize) > v {
                                is_max = false;
                                break 'n;
                            }
                        }
                    }
                }
                if is_max {
                    peaks.push((v, x, y, r));
                }
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2, a.3).cmp(&(b.1, b.2, b.3))));

    let mut kept: Vec<(usize, usize, usize)> = Vec::new();
    let reach = p.nms_cells as i64;
    for &(_, x, y, r) in &peaks {
        let close = kept.iter().any(|&(kx, ky, kr)| {
            (kx as i64 - x as i64).abs() <= reach && (ky as i64 - y as i64).abs() <= reach && (kr as i64 - r as i64).abs() <= reach
        });
        if !close {
            kept.push((x, y, r));
        }
    }

    Ok(kept
        .into_iter()
        .map(|(x, y, r)| {
            let (mut w, mut sx, mut sy, mut sr) = (0.0f64, 0.0, 0.0, 0.0);
            for dr in -1i64..=1 {
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        let (xx, yy, rr) = (x as i64 + dx, y as i64 + dy, r as i64 + dr);
                        if xx < 0 || yy < 0 || rr < 0 || xx >= nx as i64 || yy >= ny as i64 || rr >= nr as i64 {
                            continue;
                        }
                        let v = f64::from(at(xx as usize, yy as usize, rr as usize));
                        w += v;
                        sx += v * xx as f64;
                        sy += v * yy as f64;
                        sr += v * rr as f64;
                    }
                }
            }
            CircleHypothesis::new(sx / w * p.cell_size, sy / w * p.cell_size, p.r_min + sr / w * p.r_step)
        })
        .collect())
}
