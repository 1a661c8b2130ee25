//! Gradient estimation and edge extraction.
//!
//! Gradients come from derivative-of-Gaussian kernels and are normalized to
//! unit vectors; every [`EdgePoint`] carries such a vector regardless of which
//! edge operator selected it. All convolutions replicate border pixels.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Gradient magnitude below which a pixel has no usable direction.
pub const EPSILON_MAG: f64 = 1e-4;

pub const DEFAULT_SIGMA: f64 = 1.28;
pub const DEFAULT_KSIZE: usize = 5;
pub const DEFAULT_CANNY_LOW: f64 = 0.1;
pub const DEFAULT_CANNY_HIGH: f64 = 0.3;
pub const DEFAULT_MIN_SEGMENT: usize = 8;

/// Per-pixel unit gradient with a validity mask.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    /// Magnitude before normalization, in intensity per pixel.
    pub magnitude: Vec<f64>,
    pub valid: Vec<bool>,
}

impl GradientField {
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> Option<[f64; 2]> {
        let i = y * self.width + x;
        self.valid[i].then(|| [self.gx[i], self.gy[i]])
    }

    fn edge_point(&self, x: usize, y: usize) -> Option<EdgePoint> {
        self.at(x, y).map(|g| EdgePoint {
            x: x as i32,
            y: y as i32,
            g,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub x: i32,
    pub y: i32,
    /// Unit gradient, pointing toward increasing intensity.
    pub g: [f64; 2],
}

impl EdgePoint {
    pub fn new(x: i32, y: i32, g: [f64; 2]) -> Self {
        EdgePoint { x, y, g }
    }

    #[inline]
    pub fn pos(&self) -> [f64; 2] {
        [f64::from(self.x), f64::from(self.y)]
    }
}

/// An 8-connected chain of edge points. Points consumed by an accepted circle
/// are flagged inactive rather than removed.
#[derive(Debug, Clone, Default)]
pub struct EdgeSegment {
    pub points: Vec<EdgePoint>,
    pub active: Vec<bool>,
}

impl EdgeSegment {
    pub fn new(points: Vec<EdgePoint>) -> Self {
        let active = vec![true; points.len()];
        EdgeSegment { points, active }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn active_points(&self) -> impl Iterator<Item = &EdgePoint> {
        self.points.iter().zip(&self.active).filter(|(_, &a)| a).map(|(p, _)| p)
    }
}

fn check_kernel(sigma: f64, ksize: usize) -> Result<()> {
    if ksize < 3 || ksize % 2 == 0 {
        return Err(Error::param(format!("kernel size must be odd and >= 3, got {ksize}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!("sigma must be positive, got {sigma}")));
    }
    Ok(())
}

/// Sampled Gaussian, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64, ksize: usize) -> Vec<f64> {
    let half = (ksize / 2) as i64;
    let mut k: Vec<f64> = (-half..=half)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Sampled first derivative of a Gaussian, scaled so that correlating it with
/// the ramp `f(x) = x` yields exactly 1.
fn derivative_kernel(sigma: f64, ksize: usize) -> Vec<f64> {
    let g = gaussian_kernel(sigma, ksize);
    let half = (ksize / 2) as i64;
    let offsets = (-half..=half).map(|i| i as f64);
    let norm: f64 = offsets.clone().zip(&g).map(|(k, w)| k * k * w).sum();
    offsets.zip(&g).map(|(k, w)| k * w / norm).collect()
}

/// Separable correlation with replicated borders: `kx` runs along rows,
/// `ky` along columns.
fn correlate_separable(img: &GrayImage, kx: &[f64], ky: &[f64]) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let hx = (kx.len() / 2) as isize;
    let hy = (ky.len() / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, wgt) in kx.iter().enumerate() {
                acc += wgt * img.get_clamped(x as isize + i as isize - hx, y as isize);
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, wgt) in ky.iter().enumerate() {
                let yy = (y as isize + i as isize - hy).clamp(0, h as isize - 1) as usize;
                acc += wgt * tmp[yy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

pub fn gaussian_smooth(img: &GrayImage, sigma: f64, ksize: usize) -> Result<GrayImage> {
    check_kernel(sigma, ksize)?;
    if img.is_empty() {
        return Ok(img.clone());
    }
    let k = gaussian_kernel(sigma, ksize);
    let data = correlate_separable(img, &k, &k);
    Ok(GrayImage::from_vec_clamped(img.width(), img.height(), data))
}

/// Derivative-of-Gaussian gradient, normalized to unit length where the raw
/// magnitude reaches [`EPSILON_MAG`].
pub fn dog_gradient(img: &GrayImage, sigma: f64, ksize: usize) -> Result<GradientField> {
    check_kernel(sigma, ksize)?;
    let g = gaussian_kernel(sigma, ksize);
    let d = derivative_kernel(sigma, ksize);
    let (mut gx, mut gy) = if img.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        (correlate_separable(img, &d, &g), correlate_separable(img, &g, &d))
    };
    let n = gx.len();
    let mut magnitude = vec![0.0; n];
    let mut valid = vec![false; n];
    for i in 0..n {
        let m = gx[i].hypot(gy[i]);
        magnitude[i] = m;
        if m >= EPSILON_MAG {
            valid[i] = true;
            gx[i] /= m;
            gy[i] /= m;
        } else {
            gx[i] = 0.0;
            gy[i] = 0.0;
        }
    }
    Ok(GradientField {
        width: img.width(),
        height: img.height(),
        gx,
        gy,
        magnitude,
        valid,
    })
}

/// Sobel gradient magnitude in intensity per pixel (kernel scaled by 1/8).
pub fn sobel_magnitude(img: &GrayImage) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let p = |dx: isize, dy: isize| img.get_clamped(x + dx, y + dy);
            let sx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            out[y as usize * w + x as usize] = sx.hypot(sy) / 8.0;
        }
    }
    out
}

/// Pixels whose Sobel magnitude reaches `threshold`, carrying default DoG
/// gradients.
pub fn sobel_edges(img: &GrayImage, threshold: f64) -> Result<Vec<EdgePoint>> {
    let field = dog_gradient(img, DEFAULT_SIGMA, DEFAULT_KSIZE)?;
    sobel_edges_with(img, threshold, &field)
}

pub fn sobel_edges_with(img: &GrayImage, threshold: f64, field: &GradientField) -> Result<Vec<EdgePoint>> {
    if !(threshold > 0.0) {
        return Err(Error::param(format!("Sobel threshold must be positive, got {threshold}")));
    }
    let mag = sobel_magnitude(img);
    let w = img.width();
    Ok(mag
        .iter()
        .enumerate()
        .filter(|(_, &m)| m >= threshold)
        .filter_map(|(i, _)| field.edge_point(i % w, i / w))
        .collect())
}

/// Canny edges on default DoG gradients. Thresholds are ratios of the
/// maximum gradient magnitude.
pub fn canny_edges(img: &GrayImage, low: f64, high: f64) -> Result<Vec<EdgePoint>> {
    check_canny(low, high)?;
    let field = dog_gradient(img, DEFAULT_SIGMA, DEFAULT_KSIZE)?;
    canny_from_field(&field, low, high)
}

fn check_canny(low: f64, high: f64) -> Result<()> {
    if !(low > 0.0 && low < high && high <= 1.0) {
        return Err(Error::param(format!(
            "Canny thresholds need 0 < low < high <= 1, got low={low} high={high}"
        )));
    }
    Ok(())
}

/// Non-maximum suppression and hysteresis over an existing gradient field.
pub fn canny_from_field(field: &GradientField, low: f64, high: f64) -> Result<Vec<EdgePoint>> {
    check_canny(low, high)?;
    let (w, h) = (field.width, field.height);
    let max = field.magnitude.iter().cloned().fold(0.0, f64::max);
    if max < EPSILON_MAG || w < 3 || h < 3 {
        return Ok(Vec::new());
    }
    let (t_low, t_high) = (low * max, high * max);

    // 0 = suppressed, 1 = weak, 2 = strong
    let mut class = vec![0u8; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = field.magnitude[i];
            if m < t_low || !field.valid[i] {
                continue;
            }
            let (gx, gy) = (field.gx[i], field.gy[i]);
            // quantize the gradient direction to one of four neighbour axes
            let angle = gy.atan2(gx).to_degrees().rem_euclid(180.0);
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let fwd = field.magnitude[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
            let bwd = field.magnitude[(y as isize - dy) as usize * w + (x as isize - dx) as usize];
            if m > fwd && m >= bwd {
                class[i] = if m >= t_high { 2 } else { 1 };
            }
        }
    }

    let mut keep = vec![false; w * h];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &c) in class.iter().enumerate() {
        if c == 2 {
            keep[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !keep[j] && class[j] == 1 {
                    keep[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    Ok(keep
        .iter()
        .enumerate()
        .filter(|(_, &k)| k)
        .filter_map(|(i, _)| field.edge_point(i % w, i / w))
        .collect())
}

/// Groups points into maximal 8-connected components, dropping those with
/// fewer than `min_size` points. Segments are ordered by their first point in
/// the input.
pub fn connected_components(points: &[EdgePoint], min_size: usize) -> Vec<EdgeSegment> {
    if points.is_empty() {
        return Vec::new();
    }
    let min_x = points.iter().map(|p| p.x).min().unwrap();
    let max_x = points.iter().map(|p| p.x).max().unwrap();
    let min_y = points.iter().map(|p| p.y).min().unwrap();
    let max_y = points.iter().map(|p| p.y).max().unwrap();
    let gw = (max_x - min_x + 1) as usize;
    let gh = (max_y - min_y + 1) as usize;
    let cell = |x: i32, y: i32| (y - min_y) as usize * gw + (x - min_x) as usize;

    const EMPTY: usize = usize::MAX;
    let mut grid = vec![EMPTY; gw * gh];
    for (i, p) in points.iter().enumerate() {
        grid[cell(p.x, p.y)] = i;
    }

    let mut seen = vec![false; points.len()];
    let mut segments = Vec::new();
    let mut stack = Vec::new();
    for start in 0..points.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            let p = points[i];
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (p.x + dx, p.y + dy);
                    if nx < min_x || nx > max_x || ny < min_y || ny > max_y {
                        continue;
                    }
                    let j = grid[cell(nx, ny)];
                    if j != EMPTY && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        if members.len() >= min_size {
            members.sort_unstable();
            segments.push(EdgeSegment::new(members.into_iter().map(|i| points[i]).collect()));
        }
    }
    segments
}
