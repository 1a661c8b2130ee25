use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::sampling::CircleHypothesis;

fn yes() -> bool {
    true
}

fn one() -> f64 {
    1.0
}

/// Geometry of one primitive. Angles are in degrees; outlines are drawn with
/// `stroke` width when `filled` is false.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
        #[serde(default = "yes")]
        filled: bool,
        #[serde(default = "one")]
        stroke: f64,
    },
    Ellipse {
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
        #[serde(default)]
        angle: f64,
        #[serde(default = "yes")]
        filled: bool,
        #[serde(default = "one")]
        stroke: f64,
    },
    Rectangle {
        cx: f64,
        cy: f64,
        w: f64,
        h: f64,
        #[serde(default)]
        angle: f64,
        #[serde(default = "yes")]
        filled: bool,
        #[serde(default = "one")]
        stroke: f64,
    },
    Triangle {
        vertices: [[f64; 2]; 3],
        #[serde(default = "yes")]
        filled: bool,
        #[serde(default = "one")]
        stroke: f64,
    },
    Line {
        from: [f64; 2],
        to: [f64; 2],
        #[serde(default = "one")]
        width: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub shape: Shape,
    pub intensity: f64,
    #[serde(default = "yes")]
    pub antialias: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub background: f64,
    #[serde(default)]
    pub shapes: Vec<ShapeSpec>,
}

fn rot(p: [f64; 2], c: [f64; 2], deg: f64) -> [f64; 2] {
    let (s, co) = deg.to_radians().sin_cos();
    let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
    [co * dx + s * dy, -s * dx + co * dy]
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * ab[0]).hypot(p[1] - a[1] - t * ab[1])
}

impl Shape {
    fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Shape::Circle { cx, cy, r, filled, stroke } => {
                let d = (p[0] - cx).hypot(p[1] - cy);
                if filled {
                    d <= r
                } else {
                    (d - r).abs() <= stroke / 2.0
                }
            }
            Shape::Ellipse { cx, cy, rx, ry, angle, filled, stroke } => {
                let q = rot(p, [cx, cy], angle);
                let inside = |a: f64, b: f64| a > 0.0 && b > 0.0 && (q[0] / a).powi(2) + (q[1] / b).powi(2) <= 1.0;
                if filled {
                    inside(rx, ry)
                } else {
                    let h = stroke / 2.0;
                    inside(rx + h, ry + h) && !inside(rx - h, ry - h)
                }
            }
            Shape::Rectangle { cx, cy, w, h, angle, filled, stroke } => {
                let q = rot(p, [cx, cy], angle);
                let inside = |a: f64, b: f64| q[0].abs() <= a / 2.0 && q[1].abs() <= b / 2.0;
                if filled {
                    inside(w, h)
                } else {
                    inside(w + stroke, h + stroke) && !inside(w - stroke, h - stroke)
                }
            }
            Shape::Triangle { vertices: v, filled, stroke } => {
                if filled {
                    let side = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                    let s = [side(v[0], v[1]), side(v[1], v[2]), side(v[2], v[0])];
                    s.iter().all(|&x| x >= 0.0) || s.iter().all(|&x| x <= 0.0)
                } else {
                    (0..3).any(|i| seg_dist(p, v[i], v[(i + 1) % 3]) <= stroke / 2.0)
                }
            }
            Shape::Line { from, to, width } => seg_dist(p, from, to) <= width / 2.0,
        }
    }

    /// Axis-aligned bounding box `[min_x, min_y, max_x, max_y]`.
    /// Area centroid; the midpoint for line segments.
    pub fn centroid(&self) -> [f64; 2] {
        match *self {
            Shape::Circle { cx, cy, .. } | Shape::Ellipse { cx, cy, .. } | Shape::Rectangle { cx, cy, .. } => [cx, cy],
            Shape::Triangle { vertices: v, .. } => [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0],
            Shape::Line { from, to, .. } => [(from[0] + to[0]) / 2.0, (from[1] + to[1]) / 2.0],
        }
    }

    fn bounds(&self) -> [f64; 4] {
        let pad = |b: [f64; 4], h: f64| [b[0] - h, b[1] - h, b[2] + h, b[3] + h];
        let of_points = |pts: &[[f64; 2]]| {
            pts.iter().fold([f64::MAX, f64::MAX, f64::MIN, f64::MIN], |b, p| {
                [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])]
            })
        };
        match *self {
            Shape::Circle { cx, cy, r, filled, stroke } => {
                let e = if filled { r } else { r + stroke / 2.0 };
                [cx - e, cy - e, cx + e, cy + e]
            }
            Shape::Ellipse { cx, cy, rx, ry, filled, stroke, .. } => {
                let e = rx.max(ry) + if filled { 0.0 } else { stroke / 2.0 };
                [cx - e, cy - e, cx + e, cy + e]
            }
            Shape::Rectangle { cx, cy, w, h, angle, filled, stroke } => {
                let (s, c) = angle.to_radians().sin_cos();
                let corners: Vec<[f64; 2]> = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
                    .iter()
                    .map(|&(sx, sy)| {
                        let (x, y) = (sx * w / 2.0, sy * h / 2.0);
                        [cx + c * x - s * y, cy + s * x + c * y]
                    })
                    .collect();
                pad(of_points(&corners), if filled { 0.0 } else { stroke })
            }
            Shape::Triangle { vertices, filled, stroke } => {
                pad(of_points(&vertices), if filled { 0.0 } else { stroke / 2.0 })
            }
            Shape::Line { from, to, width } => pad(of_points(&[from, to]), width / 2.0),
        }
    }

    fn positive_size(&self) -> bool {
        match *self {
            Shape::Circle { r, stroke, .. } => r > 0.0 && stroke > 0.0,
            Shape::Ellipse { rx, ry, stroke, .. } => rx > 0.0 && ry > 0.0 && stroke > 0.0,
            Shape::Rectangle { w, h, stroke, .. } => w > 0.0 && h > 0.0 && stroke > 0.0,
            Shape::Triangle { stroke, .. } => stroke > 0.0,
            Shape::Line { width, .. } => width > 0.0,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidSpec("scene must have positive size".into()));
        }
        if !(0.0..=1.0).contains(&self.background) {
            return Err(Error::InvalidSpec(format!("background {} outside [0, 1]", self.background)));
        }
        let (w, h) = (self.width as f64, self.height as f64);
        for (i, s) in self.shapes.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.intensity) {
                return Err(Error::InvalidSpec(format!("shape {i}: intensity {} outside [0, 1]", s.intensity)));
            }
            if !s.shape.positive_size() {
                return Err(Error::InvalidSpec(format!("shape {i}: sizes must be positive")));
            }
            let b = s.shape.bounds();
            if b.iter().any(|v| !v.is_finite()) || b[0] < -0.5 || b[1] < -0.5 || b[2] > w - 0.5 || b[3] > h - 0.5 {
                return Err(Error::InvalidSpec(format!("shape {i} extends outside the {w}x{h} image")));
            }
        }
        Ok(())
    }

    /// Single filled disk on a uniform background.
    pub fn single_circle(width: usize, height: usize, circle: CircleHypothesis, background: f64, intensity: f64) -> Self {
        SceneSpec {
            width,
            height,
            background,
            shapes: vec![ShapeSpec {
                shape: Shape::Circle {
                    cx: circle.a,
                    cy: circle.b,
                    r: circle.r,
                    filled: true,
                    stroke: 1.0,
                },
                intensity,
                antialias: true,
            }],
        }
    }

    /// 256x256 shape-discrimination scene: a disk at (30, 60) with radius 20
    /// among an ellipse, rectangles, a triangle and two parallel bars, each with
    /// an outline about as long as the circle's.
    pub fn distractor_scene() -> Self {
        let fg = |shape| ShapeSpec {
            shape,
            intensity: 0.85,
            antialias: true,
        };
        SceneSpec {
            width: 256,
            height: 256,
            background: 0.15,
            shapes: vec![
                fg(Shape::Circle { cx: 30.0, cy: 60.0, r: 20.0, filled: true, stroke: 1.0 }),
                fg(Shape::Ellipse { cx: 100.0, cy: 175.0, rx: 28.0, ry: 14.0, angle: 20.0, filled: true, stroke: 1.0 }),
                fg(Shape::Rectangle { cx: 190.0, cy: 60.0, w: 40.0, h: 25.0, angle: 0.0, filled: true, stroke: 1.0 }),
                fg(Shape::Rectangle { cx: 105.0, cy: 60.0, w: 30.0, h: 30.0, angle: 30.0, filled: true, stroke: 1.0 }),
                fg(Shape::Triangle { vertices: [[175.0, 140.0], [220.0, 140.0], [197.0, 180.0]], filled: true, stroke: 1.0 }),
                fg(Shape::Line { from: [15.0, 130.0], to: [15.0, 190.0], width: 3.0 }),
                fg(Shape::Line { from: [35.0, 130.0], to: [35.0, 190.0], width: 3.0 }),
            ],
        }
    }

    pub fn circles(&self) -> Vec<CircleHypothesis> {
        self.shapes
            .iter()
            .filter_map(|s| match s.shape {
                Shape::Circle { cx, cy, r, .. } => Some(CircleHypothesis::new(cx, cy, r)),
                _ => None,
            })
            .collect()
    }
}

const SUPERSAMPLE: usize = 4;

/// Rasterizes `spec`, painting shapes in order over the background. Returns
/// the image and the exact parameters of every circle in the scene.
pub fn synth_scene(spec: &SceneSpec) -> Result<(GrayImage, Vec<CircleHypothesis>)> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut data = vec![spec.background; w * h];
    for s in &spec.shapes {
        let b = s.shape.bounds();
        let x0 = (b[0] - 1.0).floor().max(0.0) as usize;
        let y0 = (b[1] - 1.0).floor().max(0.0) as usize;
        let x1 = ((b[2] + 1.0).ceil() as usize).min(w - 1);
        let y1 = ((b[3] + 1.0).ceil() as usize).min(h - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let coverage = if s.antialias {
                    let mut hits = 0;
                    for sy in 0..SUPERSAMPLE {
                        for sx in 0..SUPERSAMPLE {
                            let off = |k: usize| (k as f64 + 0.5) / SUPERSAMPLE as f64 - 0.5;
                            if s.shape.contains([x as f64 + off(sx), y as f64 + off(sy)]) {
                                hits += 1;
                            }
                        }
                    }
                    hits as f64 / (SUPERSAMPLE * SUPERSAMPLE) as f64
                } else if s.shape.contains([x as f64, y as f64]) {
                    1.0
                } else {
                    0.0
                };
                let v = &mut data[y * w + x];
                *v = *v * (1.0 - coverage) + s.intensity * coverage;
            }
        }
    }
    Ok((GrayImage::from_vec_clamped(w, h, data), spec.circles()))
}

/// Additive zero-mean Gaussian noise with the given variance, clamped to
/// `[0, 1]`.
pub fn add_gaussian_noise(img: &GrayImage, variance: f64, seed: u64) -> Result<GrayImage> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::param(format!("noise variance must be >= 0, got {variance}")));
    }
    if variance == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| Error::param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = img.data().iter().map(|&v| v + normal.sample(&mut rng)).collect();
    Ok(GrayImage::from_vec_clamped(img.width(), img.height(), data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_var(img: &GrayImage) -> f64 {
        let n = img.data().len() as f64;
        let m = img.data().iter().sum::<f64>() / n;
        img.data().iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn single_circle_boundary_matches_truth() {
        let spec = SceneSpec::single_circle(256, 256, CircleHypothesis::new(128.0, 128.0, 50.0), 0.0, 1.0);
        let (img, truth) = synth_scene(&spec).unwrap();
        assert_eq!(truth, vec![CircleHypothesis::new(128.0, 128.0, 50.0)]);
        let mut n = 0;
        for y in 1..255 {
            for x in 1..255 {
                // foreground pixels with a background 4-neighbour
                let boundary = img.get(x, y) >= 0.5
                    && [(1i32, 0i32), (-1, 0), (0, 1), (0, -1)]
                        .iter()
                        .any(|&(dx, dy)| img.get((x as i32 + dx) as usize, (y as i32 + dy) as usize) < 0.5);
                if boundary {
                    let d = (x as f64 - 128.0).hypot(y as f64 - 128.0);
                    assert!((d - 50.0).abs() <= 1.0, "({x},{y}) at {d}");
                    n += 1;
                }
            }
        }
        assert!(n > 250);
    }

    #[test]
    fn empty_scene_is_background() {
        let spec = SceneSpec { width: 10, height: 8, background: 0.3, shapes: vec![] };
        let (img, truth) = synth_scene(&spec).unwrap();
        assert!(truth.is_empty());
        assert!(img.data().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn distractor_scene_truth() {
        let (img, truth) = synth_scene(&SceneSpec::distractor_scene()).unwrap();
        assert_eq!(truth, vec![CircleHypothesis::new(30.0, 60.0, 20.0)]);
        assert_eq!((img.width(), img.height()), (256, 256));
        assert!((img.get(30, 60) - 0.85).abs() < 1e-12);
    }

    #[test]
    fn out_of_bounds_rejected() {
        let spec = SceneSpec::single_circle(64, 64, CircleHypothesis::new(10.0, 30.0, 15.0), 0.0, 1.0);
        assert!(matches!(synth_scene(&spec), Err(Error::InvalidSpec(_))));
        let mut spec = SceneSpec::single_circle(64, 64, CircleHypothesis::new(30.0, 30.0, 10.0), 0.0, 1.0);
        spec.shapes[0].intensity = 1.2;
        assert!(synth_scene(&spec).is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = SceneSpec::distractor_scene();
        let text = serde_json::to_string(&spec).unwrap();
        let back: SceneSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
        let minimal: SceneSpec = serde_json::from_str(
            r#"{"width": 32, "height": 32, "shapes": [{"kind": "circle", "cx": 16, "cy": 16, "r": 5, "intensity": 1}]}"#,
        )
        .unwrap();
        assert!(matches!(minimal.shapes[0].shape, Shape::Circle { filled: true, .. }));
    }

    #[test]
    fn outlines_and_aliasing() {
        let spec = SceneSpec {
            width: 40,
            height: 40,
            background: 0.0,
            shapes: vec![ShapeSpec {
                shape: Shape::Circle { cx: 20.0, cy: 20.0, r: 10.0, filled: false, stroke: 1.0 },
                intensity: 1.0,
                antialias: false,
            }],
        };
        let (img, _) = synth_scene(&spec).unwrap();
        assert_eq!(img.get(20, 20), 0.0);
        assert_eq!(img.get(30, 20), 1.0);
        assert!(img.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn noise_variance_zero_is_identity() {
        let img = GrayImage::filled(16, 16, 0.5);
        assert_eq!(add_gaussian_noise(&img, 0.0, 9).unwrap(), img);
        assert!(add_gaussian_noise(&img, -1.0, 9).is_err());
    }

    #[test]
    fn noise_sample_variance() {
        let img = GrayImage::filled(256, 256, 0.5);
        let v = sample_var(&add_gaussian_noise(&img, 0.01, 1).unwrap());
        assert!((0.009..=0.011).contains(&v), "{v}");
        let a = add_gaussian_noise(&img, 0.01, 1).unwrap();
        assert_eq!(a, add_gaussian_noise(&img, 0.01, 1).unwrap());
    }

    #[test]
    fn clamped_noise_variance_matches_integration() {
        // oracle: variance of clamp(0.5 + N(0, 0.25), 0, 1) by midpoint quadrature
        let sd = 0.5f64;
        let pdf = |z: f64| (-z * z / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let steps = 200_000;
        let (lo, hi) = (-6.0 * sd, 6.0 * sd);
        let dz = (hi - lo) / steps as f64;
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in 0..steps {
            let z = lo + (i as f64 + 0.5) * dz;
            let v = (0.5 + z).clamp(0.0, 1.0);
            m1 += v * pdf(z) * dz;
            m2 += v * v * pdf(z) * dz;
        }
        let expected = m2 - m1 * m1;
        assert!(expected < 0.25);
        let img = GrayImage::filled(256, 256, 0.5);
        let v = sample_var(&add_gaussian_noise(&img, 0.25, 4).unwrap());
        assert!(v < 0.25);
        assert!((v - expected).abs() < 0.005, "{v} vs {expected}");
    }
}
