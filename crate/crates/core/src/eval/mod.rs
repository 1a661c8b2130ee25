//! Evaluation harness: synthetic scenes, centre-vote accumulators, PSNR
//! sweeps and a brute-force circular Hough transform used as ground truth.

pub mod accumulator;
pub mod cht;
pub mod scene;
pub mod sweep;

pub use accumulator::{psnr, vote_accumulator, Accumulator2D, VoteStrategy, SIGMA_ACC};
pub use cht::{cht_detect, ChtParams};
pub use scene::{add_gaussian_noise, synth_scene, SceneSpec, Shape, ShapeSpec};
pub use sweep::{psnr_sweep, SweepConfig, SweepRow, SweepTable};
