//! Command-line front end.
//!
//! Exit status is 0 on success, 2 when a file cannot be read, written or
//! decoded, and 3 for invalid parameters or scene specs.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::detector::{detect_profiled, DetectorConfig, StageTimings};
use crate::error::{Error, Result};
use crate::eval::{add_gaussian_noise, psnr_sweep, synth_scene, SceneSpec, SweepConfig, VoteStrategy};
use crate::image::{self, GrayImage};
use crate::report::{parse_config, quantize_config, real, DetectionReport};
use crate::sampling::CircleHypothesis;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_PARAM: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "isocircle", version, about = "Circle detection by isosceles-triangle sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect circles in a PGM or PNG image and write a report.
    Detect(DetectArgs),
    /// Render a scene spec (JSON) to an image plus a truth sidecar.
    Synth(SynthArgs),
    /// PSNR sweep of centre-vote accumulators; writes CSV.
    EvalSampling(EvalArgs),
    /// Time detection over repeated runs.
    Bench(BenchArgs),
}

/// Every detector setting, named after its config field.
#[derive(Debug, Args, Default)]
struct ConfigFlags {
    /// Start from the `config.*` lines of an earlier report.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    ksize: Option<usize>,
    #[arg(long)]
    smooth_sigma: Option<f64>,
    #[arg(long)]
    canny_low: Option<f64>,
    #[arg(long)]
    canny_high: Option<f64>,
    #[arg(long)]
    delta_k: Option<f64>,
    #[arg(long)]
    delta_p: Option<f64>,
    #[arg(long)]
    t_r: Option<f64>,
    #[arg(long)]
    d_min: Option<f64>,
    #[arg(long)]
    d0: Option<f64>,
    /// Upper bound on cluster search range; `none` disables.
    #[arg(long)]
    d_cap: Option<String>,
    #[arg(long)]
    delta_d: Option<f64>,
    #[arg(long)]
    align_min: Option<f64>,
    #[arg(long)]
    n_sectors: Option<usize>,
    #[arg(long)]
    min_votes_ratio: Option<f64>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    cluster_min_members: Option<usize>,
    #[arg(long)]
    iteration_budget_factor: Option<f64>,
    #[arg(long)]
    min_segment: Option<usize>,
    /// its, three-point or four-point.
    #[arg(long)]
    strategy: Option<String>,
}

impl ConfigFlags {
    fn build(&self) -> Result<DetectorConfig> {
        let mut c = match &self.config {
            Some(p) => parse_config(&read_text(p)?)?,
            None => DetectorConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set!(
            seed => rng_seed,
            sigma => sigma,
            ksize => ksize,
            smooth_sigma => smooth_sigma,
            canny_low => canny_low,
            canny_high => canny_high,
            delta_k => sampling.delta_k,
            delta_p => sampling.delta_p,
            t_r => sampling.t_r,
            d_min => sampling.d_min,
            d0 => sampling.d0,
            delta_d => refine.delta_d,
            align_min => refine.align_min,
            n_sectors => n_sectors,
            min_votes_ratio => min_votes_ratio,
            r_min => r_min,
            cluster_min_members => cluster_min_members,
            iteration_budget_factor => iteration_budget_factor,
            min_segment => min_segment,
        );
        if let Some(v) = &self.d_cap {
            c.sampling.d_cap = match v.as_str() {
                "none" => None,
                s => Some(s.parse().map_err(|_| Error::param(format!("--d-cap: cannot parse '{s}'")))?),
            };
        }
        if let Some(s) = &self.strategy {
            c.strategy = s.parse()?;
        }
        let c = quantize_config(&c);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Report path; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// PNG with detections drawn over the input.
    #[arg(long)]
    overlay: Option<PathBuf>,
    /// Leave out `wall_time_ms` so reports of identical runs are identical.
    #[arg(long)]
    omit_timing: bool,
    #[command(flatten)]
    config: ConfigFlags,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Scene spec JSON.
    #[arg(long)]
    input: PathBuf,
    /// Image path; `.png` writes PNG, anything else PGM.
    #[arg(long)]
    output: PathBuf,
    /// Truth sidecar; defaults to the output path with extension `truth.json`.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    noise_variance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_delimiter = ',', default_value = "50")]
    radii: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.05,0.1,0.2")]
    variances: Vec<f64>,
    /// Comma list of three-point, four-point, its or its:<delta_k>.
    #[arg(long, value_delimiter = ',', default_value = "three-point,four-point,its:0.05")]
    strategies: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// CSV path; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, num_args = 1.., required = true)]
    input: Vec<PathBuf>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Report path; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigFlags,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => image::write_file(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn cmd_detect(a: &DetectArgs, out: &mut dyn Write) -> Result<()> {
    let img = GrayImage::load(&a.input)?;
    let cfg = a.config.build()?;
    let (detections, stats, timings) = detect_profiled(&img, &cfg)?;
    let report = DetectionReport {
        source: a.input.display().to_string(),
        width: img.width(),
        height: img.height(),
        config: cfg,
        stats,
        detections,
        wall_time_ms: (!a.omit_timing).then(|| timings.total.as_secs_f64() * 1e3),
    };
    emit(&report.render(), a.output.as_deref(), out)?;
    if let Some(p) = &a.overlay {
        let circles: Vec<CircleHypothesis> = report.detections.iter().map(|d| d.circle).collect();
        img.save_overlay(&circles, p)?;
    }
    Ok(())
}

fn truth_path(output: &Path) -> PathBuf {
    output.with_extension("truth.json")
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let text = read_text(&a.input)?;
    let spec: SceneSpec = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidSpec(format!("{}: {e}", a.input.display())))?;
    let (img, truth) = synth_scene(&spec)?;
    let img = add_gaussian_noise(&img, a.noise_variance, a.seed)?;
    img.save(&a.output)?;
    let truth: Vec<serde_json::Value> = truth
        .iter()
        .map(|c| serde_json::json!({ "a": c.a, "b": c.b, "r": c.r }))
        .collect();
    let doc = serde_json::to_string_pretty(&serde_json::json!({ "circles": truth })).expect("plain JSON values");
    let path = a.truth.clone().unwrap_or_else(|| truth_path(&a.output));
    image::write_file(&path, format!("{doc}\n").as_bytes())
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let strategies = a
        .strategies
        .iter()
        .map(|s| s.parse::<VoteStrategy>())
        .collect::<Result<Vec<_>>>()?;
    let cfg = SweepConfig {
        radii: a.radii.clone(),
        variances: a.variances.clone(),
        strategies,
        trials: a.trials,
        seed: a.seed,
        iterations: a.iterations,
        ..SweepConfig::default()
    };
    let table = psnr_sweep(&cfg)?;
    emit(&table.to_csv(), a.output.as_deref(), out)
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    if a.reps == 0 {
        return Err(Error::param("reps must be >= 1"));
    }
    let cfg = a.config.build()?;
    let mut text = String::new();
    for path in &a.input {
        let img = GrayImage::load(path)?;
        let mut times = Vec::with_capacity(a.reps);
        let mut sum = StageTimings::default();
        for _ in 0..a.reps {
            let t = Instant::now();
            let (_, _, st) = detect_profiled(&img, &cfg)?;
            times.push(t.elapsed().as_secs_f64() * 1e3);
            sum.edges += st.edges;
            sum.sampling += st.sampling;
            sum.refinement += st.refinement;
            sum.validation += st.validation;
            sum.total += st.total;
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let min = times.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = times.iter().cloned().fold(0.0, f64::max);
        let _ = writeln!(text, "image: {}", path.display());
        let _ = writeln!(text, "reps: {}", a.reps);
        let _ = writeln!(text, "mean_ms: {}", real(mean));
        let _ = writeln!(text, "min_ms: {}", real(min));
        let _ = writeln!(text, "max_ms: {}", real(max));
        let names = ["edges", "sampling", "refinement", "validation", "other"];
        for (name, pct) in names.iter().zip(sum.percentages()) {
            let _ = writeln!(text, "stage.{name}_pct: {}", real(pct));
        }
    }
    emit(&text, a.output.as_deref(), out)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        EXIT_IO
    } else {
        EXIT_PARAM
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_PARAM
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Detect(a) => cmd_detect(a, out),
        Command::Synth(a) => cmd_synth(a),
        Command::EvalSampling(a) => cmd_eval(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
