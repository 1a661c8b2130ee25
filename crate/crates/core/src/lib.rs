//! Multi-circle detection by randomized isosceles-triangle sampling.
//!
//! Pairs of edge points whose gradients form an isosceles triangle with the
//! chord between them each propose one circle. Proposals are clustered in
//! `(x, y, r)` space per edge segment, refined in two stages and finally
//! validated by angular sector coverage.
//!
//! ```no_run
//! use isocircle::{detect, DetectorConfig, GrayImage};
//!
//! let img = GrayImage::load("coins.png").unwrap();
//! for d in detect(&img, &DetectorConfig::default()).unwrap() {
//!     println!("{:.2} {:.2} {:.2}", d.circle.a, d.circle.b, d.circle.r);
//! }
//! ```

pub mod cli;
pub mod detector;
pub mod error;
pub mod eval;
pub mod image;
pub mod preprocess;
pub mod refine;
pub mod report;
pub mod sampling;
pub mod validate;

pub use detector::{detect, detect_profiled, detect_with_stats, Detection, DetectorConfig, StageTimings, Stats};
pub use error::{Error, Result};
pub use image::GrayImage;
pub use report::DetectionReport;
pub use sampling::{CircleHypothesis, SamplingParams, Strategy};
