//! Grayscale rasters and their on-disk formats.
//!
//! Intensities are stored as `f64` in `[0, 1]`, row-major. Pixel `(x, y)` is
//! centred on integer coordinates, so a pixel covers `[x - 0.5, x + 0.5)`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sampling::CircleHypothesis;

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    /// Constant image.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        GrayImage {
            width,
            height,
            data: vec![value.clamp(0.0, 1.0); width * height],
        }
    }

    /// Wraps row-major data. Fails when the length does not match or a value
    /// lies outside `[0, 1]`.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::param(format!(
                "image data has {} values, expected {}x{}",
                data.len(),
                width,
                height
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param(format!("intensity {v} outside [0, 1]")));
        }
        Ok(GrayImage { width, height, data })
    }

    /// Builds an image from 8-bit samples, scaling to `[0, 1]`.
    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != width * height {
            return Err(Error::param(format!(
                "image data has {} bytes, expected {}x{}",
                bytes.len(),
                width,
                height
            )));
        }
        let data = bytes.iter().map(|&b| f64::from(b) / 255.0).collect();
        Ok(GrayImage { width, height, data })
    }

    pub(crate) fn from_vec_clamped(width: usize, height: usize, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        for v in &mut data {
            *v = v.clamp(0.0, 1.0);
        }
        GrayImage { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with replicated borders.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value.clamp(0.0, 1.0);
    }

    /// 8-bit quantization, rounded to nearest.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    /// Loads a PGM (P5) or PNG file, choosing the decoder by magic bytes.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        if bytes.starts_with(b"P5") {
            decode_pgm(&bytes).map_err(|message| Error::Decode {
                path: path.to_owned(),
                message,
            })
        } else {
            decode_png(&bytes).map_err(|message| Error::Decode {
                path: path.to_owned(),
                message,
            })
        }
    }

    /// Writes a binary PGM with maxval 255.
    pub fn save_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_file(path, &self.encode_pgm())
    }

    pub fn encode_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend(self.to_u8());
        out
    }

    /// Writes an 8-bit grayscale PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let buf = image::GrayImage::from_raw(self.width as u32, self.height as u32, self.to_u8())
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| io_or_decode(path, e))
    }

    /// Writes an RGB PNG of the image with each circle stroked in red and a
    /// green 3x3 dot at its centre.
    pub fn save_overlay(&self, circles: &[CircleHypothesis], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let (w, h) = (self.width as u32, self.height as u32);
        let mut buf = image::RgbImage::from_fn(w, h, |x, y| {
            let v = quantize(self.get(x as usize, y as usize));
            image::Rgb([v, v, v])
        });
        let mut put = |x: f64, y: f64, c: [u8; 3]| {
            let (x, y) = (x.round(), y.round());
            if x >= 0.0 && y >= 0.0 && x < f64::from(w) && y < f64::from(h) {
                buf.put_pixel(x as u32, y as u32, image::Rgb(c));
            }
        };
        for c in circles {
            let steps = (std::f64::consts::TAU * c.r * 2.0).ceil().max(8.0) as usize;
            for k in 0..steps {
                let t = k as f64 / steps as f64 * std::f64::consts::TAU;
                put(c.a + c.r * t.cos(), c.b + c.r * t.sin(), [255, 0, 0]);
            }
        }
        for c in circles {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    put(c.a + f64::from(dx), c.b + f64::from(dy), [0, 255, 0]);
                }
            }
        }
        buf.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| io_or_decode(path, e))
    }

    /// Saves as PNG when the extension is `.png`, PGM otherwise.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("png") => self.save_png(path),
            _ => self.save_pgm(path),
        }
    }
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
}

fn io_or_decode(path: &Path, err: image::ImageError) -> Error {
    match err {
        image::ImageError::IoError(source) => Error::Io {
            path: path.to_owned(),
            source,
        },
        other => Error::Decode {
            path: path.to_owned(),
            message: other.to_string(),
        },
    }
}

fn decode_png(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| e.to_string())?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let data = match img {
        image::DynamicImage::ImageLuma8(buf) => {
            buf.into_raw().into_iter().map(|b| f64::from(b) / 255.0).collect()
        }
        image::DynamicImage::ImageLuma16(buf) => {
            buf.into_raw().into_iter().map(|b| f64::from(b) / 65535.0).collect()
        }
        other => other
            .to_rgb32f()
            .pixels()
            .map(|p| (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64).clamp(0.0, 1.0))
            .collect(),
    };
    Ok(GrayImage { width, height, data })
}

/// Parses a binary PGM. Comments are allowed between header tokens; 16-bit
/// samples are big-endian.
fn decode_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed PGM header")?;
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("unsupported PGM maxval {maxval}"));
    }
    let n = width * height;
    let raster = bytes.get(pos..).ok_or("truncated PGM raster")?;
    let data: Vec<f64> = if maxval < 256 {
        if raster.len() < n {
            return Err("truncated PGM raster".into());
        }
        raster[..n].iter().map(|&b| (f64::from(b) / maxval as f64).min(1.0)).collect()
    } else {
        if raster.len() < 2 * n {
            return Err("truncated PGM raster".into());
        }
        raster[..2 * n]
            .chunks_exact(2)
            .map(|c| (f64::from(u16::from_be_bytes([c[0], c[1]])) / maxval as f64).min(1.0))
            .collect()
    };
    Ok(GrayImage { width, height, data })
}
