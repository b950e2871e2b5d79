use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use emc_core::{synthesize, EmcError, SyntheticSpec};

use crate::error::{CliError, CliResult};
use crate::formats::{create, write_err, write_labels, write_truth};
use crate::settings::{RunManifest, Settings};

/// Writes `stream.csv`, `labels.csv`, `truth.txt` and `synth.manifest`.
#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Number of modes
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Shortest regime
    #[arg(long)]
    duration_low: Option<usize>,
    /// Longest regime
    #[arg(long)]
    duration_high: Option<usize>,
    /// Number of regimes
    #[arg(long)]
    regimes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing
    #[arg(long)]
    output: Option<PathBuf>,
}

const KEYS: [&str; 8] = [
    "modes",
    "k",
    "m",
    "duration_low",
    "duration_high",
    "regimes",
    "seed",
    "output",
];

pub fn execute(args: SynthArgs) -> CliResult<()> {
    let mut s = Settings::load(args.config.as_deref())?;
    let base = SyntheticSpec::medium(0);
    let spec = SyntheticSpec {
        n_modes: s.get("modes", args.modes).unwrap_or(base.n_modes),
        order: s.get("k", args.k).unwrap_or(base.order),
        alphabet_size: s.get("m", args.m).unwrap_or(base.alphabet_size),
        duration_low: s
            .get("duration_low", args.duration_low)
            .unwrap_or(base.duration_low),
        duration_high: s
            .get("duration_high", args.duration_high)
            .unwrap_or(base.duration_high),
        n_regimes: s.get("regimes", args.regimes).unwrap_or(base.n_regimes),
        seed: s.get("seed", args.seed).unwrap_or(base.seed),
    };
    let dir = s.path("output", args.output);
    s.finish(&KEYS)?;
    let dir = dir.ok_or_else(|| CliError::Validation("--output directory is required".into()))?;
    let stream = synthesize(&spec).map_err(|e| match e {
        EmcError::Config(errs) => CliError::Validation(format!("invalid generator spec: {errs}")),
        other => other.into(),
    })?;

    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let stream_path = dir.join("stream.csv");
    let mut out = create(Some(&stream_path))?;
    let werr = write_err(Some(&stream_path));
    writeln!(out, "t,symbol").map_err(&werr)?;
    for (t, sym) in stream.symbols.iter().enumerate() {
        writeln!(out, "{t},{sym}").map_err(&werr)?;
    }
    out.flush().map_err(&werr)?;
    write_labels(&dir.join("labels.csv"), &stream.labels)?;
    write_truth(&dir.join("truth.txt"), &stream.true_tensors)?;

    let mut manifest = RunManifest::new("synth");
    manifest
        .set("modes", spec.n_modes)
        .set("k", spec.order)
        .set("m", spec.alphabet_size)
        .set("duration_low", spec.duration_low)
        .set("duration_high", spec.duration_high)
        .set("regimes", spec.n_regimes)
        .set("seed", spec.seed)
        .path("output", Some(&dir));
    let path = dir.join("synth.manifest");
    fs::write(&path, manifest.render()).map_err(|e| CliError::io(&path, e))
}
