use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use emc_core::eval::{abs_error, SlidingWindowChain};
use emc_core::{Emc, EmcError};

use crate::error::{CliError, CliResult};
use crate::formats::{create, read_labels, read_truth, symbols, write_err, Input};
use crate::settings::{real_path, validated, ModelArgs, RunManifest, Settings, MODEL_KEYS};

#[derive(Args, Debug)]
pub struct TrackArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Symbol stream; stdin when absent or `-`
    #[arg(long)]
    input: Option<PathBuf>,
    /// True labels, `t,mode`
    #[arg(long)]
    labels: Option<PathBuf>,
    /// True mode tensors written by `emc synth`
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Sliding-window baseline sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    window: Vec<usize>,
    /// Summary metrics CSV; stdout when absent or `-`
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-step absolute error series
    #[arg(long)]
    series: Option<PathBuf>,
}

const DEFAULT_WINDOWS: [usize; 2] = [100, 500];
const KEYS: [&str; 6] = ["input", "labels", "truth", "window", "output", "series"];

pub fn execute(args: TrackArgs) -> CliResult<()> {
    let mut s = Settings::load(args.config.as_deref())?;
    let input = real_path(s.path("input", args.input));
    let labels_path = s.path("labels", args.labels);
    let truth_path = s.path("truth", args.truth);
    let output = real_path(s.path("output", args.output));
    let series_path = s.path("series", args.series);
    let windows: Vec<usize> = if !args.window.is_empty() {
        args.window.clone()
    } else {
        match s.get::<String>("window", None) {
            Some(list) => parse_windows(&list)?,
            None => DEFAULT_WINDOWS.to_vec(),
        }
    };
    let (Some(labels_path), Some(truth_path)) = (labels_path, truth_path) else {
        return Err(CliError::Validation(
            "--labels and --truth are required".into(),
        ));
    };
    let truth = read_truth(&truth_path)?;
    let labels = read_labels(&labels_path)?;
    let first = truth
        .first()
        .ok_or_else(|| CliError::Validation("truth file holds no modes".into()))?;
    if let Some(&bad) = labels.iter().find(|&&l| l >= truth.len()) {
        return Err(CliError::Validation(format!(
            "label {bad} has no tensor in {}",
            truth_path.display()
        )));
    }

    let config = s.model(&args.model, Some((first.order(), first.alphabet_size())));
    s.finish(&[&MODEL_KEYS[..], &KEYS].concat())?;
    let config = validated(config.expect("finish reports a missing config"))?;
    if (config.order, config.alphabet_size) != (first.order(), first.alphabet_size()) {
        return Err(CliError::Validation(format!(
            "model shape k = {}, m = {} differs from truth k = {}, m = {}",
            config.order,
            config.alphabet_size,
            first.order(),
            first.alphabet_size()
        )));
    }

    let mut emc = Emc::new(config)?;
    let mut baselines = windows
        .iter()
        .map(|&w| SlidingWindowChain::new(w, config.order, config.alphabet_size))
        .collect::<Result<Vec<_>, _>>()?;

    let mut series = match &series_path {
        Some(p) => {
            let mut w = create(Some(p))?;
            let mut head = String::from("t,emc");
            for w in &windows {
                head.push_str(&format!(",mcsw_{w}"));
            }
            writeln!(w, "{head}").map_err(write_err(Some(p)))?;
            Some(w)
        }
        None => None,
    };

    let mut totals = vec![0.0; 1 + windows.len()];
    let mut steps = 0usize;
    for (t, sym) in symbols(Input::open(input.as_deref())?, config.alphabet_size).enumerate() {
        let sym = sym?;
        let Some(&label) = labels.get(t) else {
            return Err(EmcError::LengthMismatch {
                left: t + 1,
                right: labels.len(),
            }
            .into());
        };
        let active = &truth[label];
        emc.step(sym)?;
        let mut row = vec![abs_error(emc.estimator().tensor(), active)?];
        for chain in &mut baselines {
            chain.observe(sym)?;
            row.push(chain.abs_error(active)?);
        }
        for (acc, e) in totals.iter_mut().zip(&row) {
            *acc += e;
        }
        if let (Some(w), Some(p)) = (series.as_mut(), series_path.as_deref()) {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(w, "{t},{}", cells.join(",")).map_err(write_err(Some(p)))?;
        }
        steps += 1;
    }
    if steps != labels.len() {
        return Err(EmcError::LengthMismatch {
            left: steps,
            right: labels.len(),
        }
        .into());
    }
    if let (Some(mut w), Some(p)) = (series, series_path.as_deref()) {
        w.flush().map_err(write_err(Some(p)))?;
    }

    let mut out = create(output.as_deref())?;
    let werr = write_err(output.as_deref());
    let mean = |total: f64| {
        if steps == 0 {
            0.0
        } else {
            total / steps as f64
        }
    };
    writeln!(out, "metric,value").map_err(&werr)?;
    writeln!(out, "steps,{steps}").map_err(&werr)?;
    writeln!(out, "mae_emc,{}", mean(totals[0])).map_err(&werr)?;
    writeln!(out, "cae_emc,{}", totals[0]).map_err(&werr)?;
    for (w, total) in windows.iter().zip(&totals[1..]) {
        writeln!(out, "mae_mcsw_{w},{}", mean(*total)).map_err(&werr)?;
        writeln!(out, "cae_mcsw_{w},{total}").map_err(&werr)?;
    }
    out.flush().map_err(&werr)?;

    let list: Vec<String> = windows.iter().map(usize::to_string).collect();
    let mut manifest = RunManifest::new("track");
    manifest
        .path("input", input.as_deref())
        .path("labels", Some(&labels_path))
        .path("truth", Some(&truth_path))
        .set("window", list.join(","))
        .path("output", output.as_deref());
    if let Some(p) = &series_path {
        manifest.path("series", Some(p));
    }
    manifest.config(&config);
    manifest.emit(output.as_deref())
}

fn parse_windows(list: &str) -> CliResult<Vec<usize>> {
    list.split(',')
        .map(|w| {
            w.trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("window = {w:?} is not a size")))
        })
        .collect()
}
