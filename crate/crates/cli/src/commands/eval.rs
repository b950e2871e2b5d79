use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use emc_core::eval::{
    change_point_f1, detections, drift_ratio, mean_recognition_lag, record_ari, steady_only_ari,
    DetectionSource,
};
use emc_core::{EmcError, LabeledStream};

use crate::error::{CliError, CliResult};
use crate::formats::{change_points, create, read_labels, read_predictions, write_err};
use crate::settings::{real_path, RunManifest, Settings};

pub const DEFAULT_MOE: usize = 250;

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Prediction CSV written by `emc run`
    #[arg(long)]
    input: Option<PathBuf>,
    /// True labels, `t,mode`
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Margin of error for change point matching
    #[arg(long)]
    moe: Option<usize>,
    /// Which records count as change point detections
    #[arg(long, value_enum)]
    detections: Option<Detections>,
    /// Metrics to report; all when omitted
    #[arg(long = "metric", value_enum)]
    metrics: Vec<Metric>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Metrics CSV; stdout when absent or `-`
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Detections {
    ModeSwitch,
    DriftEntered,
}

impl std::str::FromStr for Detections {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

impl Detections {
    fn source(self) -> DetectionSource {
        match self {
            Detections::ModeSwitch => DetectionSource::ModeSwitch,
            Detections::DriftEntered => DetectionSource::DriftEntered,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Detections::ModeSwitch => "mode-switch",
            Detections::DriftEntered => "drift-entered",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Ari,
    SteadyAri,
    DriftRatio,
    ChangePoints,
    RecognitionLag,
}

const KEYS: [&str; 5] = ["input", "labels", "moe", "detections", "output"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn execute(args: EvalArgs) -> CliResult<()> {
    let mut s = Settings::load(args.config.as_deref())?;
    let input = s.path("input", args.input);
    let labels_path = s.path("labels", args.labels);
    let moe = s.get("moe", args.moe).unwrap_or(DEFAULT_MOE);
    let which = s
        .get("detections", args.detections)
        .unwrap_or(Detections::ModeSwitch);
    let output = real_path(s.path("output", args.output));
    s.finish(&KEYS)?;
    let input = input.ok_or_else(|| CliError::Validation("--input is required".into()))?;
    let labels_path =
        labels_path.ok_or_else(|| CliError::Validation("--labels is required".into()))?;

    let records = read_predictions(&input)?;
    let labels = read_labels(&labels_path)?;
    if records.len() != labels.len() {
        return Err(EmcError::LengthMismatch {
            left: records.len(),
            right: labels.len(),
        }
        .into());
    }
    let all = args.metrics.is_empty();
    let wants = |m: Metric| all || args.metrics.contains(&m);

    let mut body = format!("metric,value\nsteps,{}\n", records.len());
    if wants(Metric::Ari) {
        let _ = writeln!(body, "ari,{}", record_ari(&records, &labels)?);
    }
    if wants(Metric::SteadyAri) {
        let _ = writeln!(
            body,
            "steady_ari,{}",
            opt(steady_only_ari(&records, &labels)?)
        );
    }
    if wants(Metric::DriftRatio) {
        let _ = writeln!(body, "drift_ratio,{}", drift_ratio(&records));
    }
    let truth_cps = change_points(&labels);
    if wants(Metric::ChangePoints) {
        let found = detections(&records, which.source());
        let r = change_point_f1(&found, &truth_cps, moe);
        let _ = writeln!(body, "moe,{moe}");
        let _ = writeln!(body, "detection_source,{}", which.name());
        let _ = writeln!(body, "change_points,{}", truth_cps.len());
        let _ = writeln!(body, "detections,{}", found.len());
        let _ = writeln!(body, "true_positives,{}", r.true_positives);
        let _ = writeln!(body, "false_positives,{}", r.false_positives);
        let _ = writeln!(body, "false_negatives,{}", r.false_negatives);
        let _ = writeln!(body, "f1,{}", r.f1);
        let _ = writeln!(body, "mean_detection_lag,{}", opt(r.mean_detection_lag));
    }
    if wants(Metric::RecognitionLag) {
        let truth = LabeledStream {
            symbols: records.iter().map(|r| r.symbol).collect(),
            labels: labels.clone(),
            change_points: truth_cps,
            true_tensors: Vec::new(),
        };
        let preds: Vec<_> = records.iter().map(|r| r.mode).collect();
        let _ = writeln!(
            body,
            "mean_recognition_lag,{}",
            opt(mean_recognition_lag(&preds, &truth))
        );
    }

    let mut out = create(output.as_deref())?;
    let werr = write_err(output.as_deref());
    out.write_all(body.as_bytes()).map_err(&werr)?;
    out.flush().map_err(&werr)?;

    let mut manifest = RunManifest::new("eval");
    manifest
        .path("input", Some(&input))
        .path("labels", Some(&labels_path))
        .set("moe", moe)
        .set("detections", which.name())
        .path("output", output.as_deref());
    manifest.emit(output.as_deref())
}
