//! Plain-text detection report.
//!
//! One `key: value` pair per line in a fixed order; reals use six decimals.
//! The `config.*` block can be read back to reproduce a run.

use std::fmt::Write as _;

use crate::detector::{Detection, DetectorConfig, Stats};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub source: String,
    pub width: usize,
    pub height: usize,
    pub config: DetectorConfig,
    pub stats: Stats,
    pub detections: Vec<Detection>,
    pub wall_time_ms: Option<f64>,
}

/// Six-decimal fixed point without a negative zero.
pub fn real(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn q(v: f64) -> f64 {
    real(v).parse().unwrap_or(v)
}

/// Rounds every real-valued field to the precision the report echoes, so
/// that a run and its echoed configuration are the same run.
pub fn quantize_config(cfg: &DetectorConfig) -> DetectorConfig {
    let mut c = cfg.clone();
    for v in [
        &mut c.sigma,
        &mut c.smooth_sigma,
        &mut c.canny_low,
        &mut c.canny_high,
        &mut c.sampling.delta_k,
        &mut c.sampling.delta_p,
        &mut c.sampling.t_r,
        &mut c.sampling.d_min,
        &mut c.sampling.d0,
        &mut c.refine.delta_d,
        &mut c.refine.align_min,
        &mut c.min_votes_ratio,
        &mut c.r_min,
        &mut c.iteration_budget_factor,
    ] {
        *v = q(*v);
    }
    c.sampling.d_cap = c.sampling.d_cap.map(q);
    c
}

fn config_lines(c: &DetectorConfig) -> Vec<(&'static str, String)> {
    vec![
        ("sigma", real(c.sigma)),
        ("ksize", c.ksize.to_string()),
        ("smooth_sigma", real(c.smooth_sigma)),
        ("canny_low", real(c.canny_low)),
        ("canny_high", real(c.canny_high)),
        ("delta_k", real(c.sampling.delta_k)),
        ("delta_p", real(c.sampling.delta_p)),
        ("t_r", real(c.sampling.t_r)),
        ("d_min", real(c.sampling.d_min)),
        ("d0", real(c.sampling.d0)),
        ("d_cap", c.sampling.d_cap.map_or_else(|| "none".to_string(), real)),
        ("delta_d", real(c.refine.delta_d)),
        ("align_min", real(c.refine.align_min)),
        ("n_sectors", c.n_sectors.to_string()),
        ("min_votes_ratio", real(c.min_votes_ratio)),
        ("r_min", real(c.r_min)),
        ("cluster_min_members", c.cluster_min_members.to_string()),
        ("iteration_budget_factor", real(c.iteration_budget_factor)),
        ("min_segment", c.min_segment.to_string()),
        ("strategy", c.strategy.to_string()),
        ("seed", c.rng_seed.to_string()),
    ]
}

impl DetectionReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "source: {}", self.source);
        let _ = writeln!(out, "width: {}", self.width);
        let _ = writeln!(out, "height: {}", self.height);
        for (k, v) in config_lines(&self.config) {
            let _ = writeln!(out, "config.{k}: {v}");
        }
        for (k, v) in self.stats.fields() {
            let _ = writeln!(out, "stats.{k}: {v}");
        }
        let _ = writeln!(out, "detections: {}", self.detections.len());
        for (i, d) in self.detections.iter().enumerate() {
            let _ = writeln!(
                out,
                "detection.{i}: a={} b={} r={} votes={} n_sectors={} completeness={} support={}",
                real(d.circle.a),
                real(d.circle.b),
                real(d.circle.r),
                d.votes,
                d.n_sectors,
                real(d.completeness),
                d.support
            );
        }
        if let Some(ms) = self.wall_time_ms {
            let _ = writeln!(out, "wall_time_ms: {}", real(ms));
        }
        out
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::param(format!("config.{key}: cannot parse '{v}'")))
}

/// Reads the `config.*` lines of a report over the defaults. Other lines are
/// ignored; unknown `config.*` keys are an error.
pub fn parse_config(text: &str) -> Result<DetectorConfig> {
    let mut c = DetectorConfig::default();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("config.") else {
            continue;
        };
        let (key, v) = rest
            .split_once(':')
            .ok_or_else(|| Error::param(format!("malformed line '{line}'")))?;
        let v = v.trim();
        match key {
            "sigma" => c.sigma = parse_num(key, v)?,
            "ksize" => c.ksize = parse_num(key, v)?,
            "smooth_sigma" => c.smooth_sigma = parse_num(key, v)?,
            "canny_low" => c.canny_low = parse_num(key, v)?,
            "canny_high" => c.canny_high = parse_num(key, v)?,
            "delta_k" => c.sampling.delta_k = parse_num(key, v)?,
            "delta_p" => c.sampling.delta_p = parse_num(key, v)?,
            "t_r" => c.sampling.t_r = parse_num(key, v)?,
            "d_min" => c.sampling.d_min = parse_num(key, v)?,
            "d0" => c.sampling.d0 = parse_num(key, v)?,
            "d_cap" => c.sampling.d_cap = if v == "none" { None } else { Some(parse_num(key, v)?) },
            "delta_d" => c.refine.delta_d = parse_num(key, v)?,
            "align_min" => c.refine.align_min = parse_num(key, v)?,
            "n_sectors" => c.n_sectors = parse_num(key, v)?,
            "min_votes_ratio" => c.min_votes_ratio = parse_num(key, v)?,
            "r_min" => c.r_min = parse_num(key, v)?,
            "cluster_min_members" => c.cluster_min_members = parse_num(key, v)?,
            "iteration_budget_factor" => c.iteration_budget_factor = parse_num(key, v)?,
            "min_segment" => c.min_segment = parse_num(key, v)?,
            "strategy" => c.strategy = v.parse()?,
            "seed" => c.rng_seed = parse_num(key, v)?,
            other => return Err(Error::param(format!("unknown config key '{other}'"))),
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{CircleHypothesis, Strategy};

    #[test]
    fn reals_have_six_decimals() {
        assert_eq!(real(1.28), "1.280000");
        assert_eq!(real(2.0 / 3.0), "0.666667");
        assert_eq!(real(-0.0), "0.000000");
        assert_eq!(real(-1e-9), "0.000000");
        assert_eq!(real(-1.5), "-1.500000");
    }

    #[test]
    fn render_layout() {
        let report = DetectionReport {
            source: "a.pgm".into(),
            width: 4,
            height: 3,
            config: DetectorConfig::default(),
            stats: Stats::default(),
            detections: vec![Detection {
                circle: CircleHypothesis::new(30.0, 60.0, 20.25),
                votes: 16,
                n_sectors: 16,
                completeness: 1.0,
                support: 120,
                segment_id: 0,
            }],
            wall_time_ms: None,
        };
        let text = report.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(&lines[..4], &["source: a.pgm", "width: 4", "height: 3", "config.sigma: 1.280000"]);
        assert!(lines.contains(&"config.d_cap: none"));
        assert!(lines.contains(&"config.strategy: its"));
        assert!(lines.contains(&"stats.budget: 0"));
        assert_eq!(
            lines[lines.len() - 1],
            "detection.0: a=30.000000 b=60.000000 r=20.250000 votes=16 n_sectors=16 completeness=1.000000 support=120"
        );
        assert!(!text.contains("wall_time_ms"));
    }

    #[test]
    fn config_roundtrip() {
        let mut c = DetectorConfig::default();
        c.sigma = 1.1234567;
        c.sampling.d_cap = Some(12.0);
        c.strategy = Strategy::FourPoint;
        c.rng_seed = u64::MAX;
        c.n_sectors = 24;
        let c = quantize_config(&c);
        assert_eq!(c.sigma, 1.123457);
        let report = DetectionReport {
            source: String::new(),
            width: 1,
            height: 1,
            config: c.clone(),
            stats: Stats::default(),
            detections: vec![],
            wall_time_ms: Some(1.0),
        };
        assert_eq!(parse_config(&report.render()).unwrap(), c);
        assert_eq!(quantize_config(&DetectorConfig::default()), DetectorConfig::default());
    }

    #[test]
    fn bad_config_lines() {
        assert!(parse_config("config.sigma: abc").is_err());
        assert!(parse_config("config.bogus: 1").is_err());
        assert!(parse_config("config.strategy: five-point").is_err());
        assert_eq!(parse_config("detections: 0\n").unwrap(), DetectorConfig::default());
    }
}
