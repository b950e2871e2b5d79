use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use emc_core::{snapshot, Emc};

use crate::error::{CliError, CliResult};
use crate::formats::{create, prediction_row, symbols, write_err, Input, PREDICTION_HEADER};
use crate::settings::{real_path, validated, ModelArgs, RunManifest, Settings, MODEL_KEYS};

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// `key = value` config file or a previous run's manifest
    #[arg(long)]
    config: Option<PathBuf>,
    /// Symbol stream; stdin when absent or `-`
    #[arg(long)]
    input: Option<PathBuf>,
    /// Prediction CSV; stdout when absent or `-`
    #[arg(long)]
    output: Option<PathBuf>,
    /// Continue from a saved snapshot instead of a fresh model
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Save the final model state here
    #[arg(long)]
    save_snapshot: Option<PathBuf>,
}

const KEYS: [&str; 4] = ["input", "output", "resume", "save_snapshot"];

pub fn execute(args: RunArgs) -> CliResult<()> {
    let mut settings = Settings::load(args.config.as_deref())?;
    let input = real_path(settings.path("input", args.input));
    let output = real_path(settings.path("output", args.output));
    let resume = settings.path("resume", args.resume);
    let save = settings.path("save_snapshot", args.save_snapshot);

    let mut emc = match &resume {
        Some(path) => {
            if args.model.any_set() {
                return Err(CliError::Validation(
                    "model flags cannot be combined with --resume".to_string(),
                ));
            }
            let emc = snapshot::load(path).map_err(|e| CliError::snapshot(path, e))?;
            if settings.has_any(&MODEL_KEYS) {
                // a manifest of a resumed run repeats the snapshot's config
                let file = settings.model(&ModelArgs::default(), None);
                if file.is_some_and(|c| c != *emc.config()) {
                    return Err(CliError::Validation(
                        "config file parameters differ from the resumed snapshot".to_string(),
                    ));
                }
            }
            settings.finish(&[&MODEL_KEYS[..], &KEYS].concat())?;
            emc
        }
        None => {
            let config = settings.model(&args.model, None);
            settings.finish(&[&MODEL_KEYS[..], &KEYS].concat())?;
            Emc::new(validated(config.expect("finish reports a missing config"))?)?
        }
    };

    let mut manifest = RunManifest::new("run");
    manifest
        .path("input", input.as_deref())
        .path("output", output.as_deref());
    if let Some(p) = &resume {
        manifest.path("resume", Some(p));
    }
    if let Some(p) = &save {
        manifest.path("save_snapshot", Some(p));
    }
    manifest.config(emc.config());

    let alphabet = emc.config().alphabet_size;
    let stream = symbols(Input::open(input.as_deref())?, alphabet);
    let mut out = create(output.as_deref())?;
    let werr = write_err(output.as_deref());
    writeln!(out, "{PREDICTION_HEADER}").map_err(&werr)?;
    for s in stream {
        let record = emc.step(s?)?;
        writeln!(out, "{}", prediction_row(&record)).map_err(&werr)?;
    }
    out.flush().map_err(&werr)?;

    if let Some(path) = &save {
        snapshot::save(&emc, path).map_err(|e| CliError::snapshot(path, e))?;
    }
    manifest.emit(output.as_deref())
}
