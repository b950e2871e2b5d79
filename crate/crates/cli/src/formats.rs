//! Text formats read and written by the commands.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use emc_core::{
    DriftEvent, ModeEvent, ModeId, Phase, PredictionRecord, StepEvents, StochasticTensor, Symbol,
};

use crate::error::{display, CliError, CliResult};

pub const PREDICTION_HEADER: &str = "t,symbol,phi,distance,mode,event";
pub const LABELS_HEADER: &str = "t,mode";
pub const TRUTH_MAGIC: &str = "EMCTRUTH";

/// A named line source; `None` reads stdin.
pub struct Input {
    name: String,
    reader: Box<dyn BufRead>,
}

impl Input {
    pub fn open(path: Option<&Path>) -> CliResult<Self> {
        match path {
            Some(p) => {
                let file = File::open(p).map_err(|e| CliError::io(p, e))?;
                Ok(Self {
                    name: display(p),
                    reader: Box::new(BufReader::new(file)),
                })
            }
            None => Ok(Self {
                name: "<stdin>".to_string(),
                reader: Box::new(BufReader::new(io::stdin())),
            }),
        }
    }

    /// Non-blank lines with their 1-based line numbers.
    pub fn lines(self) -> impl Iterator<Item = CliResult<(usize, String)>> {
        let name = self.name;
        self.reader
            .lines()
            .enumerate()
            .filter_map(move |(i, line)| match line {
                Ok(l) if l.trim().is_empty() => None,
                Ok(l) => Some(Ok((i + 1, l.trim().to_string()))),
                Err(e) => Some(Err(CliError::Io {
                    path: name.clone(),
                    source: e,
                })),
            })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

pub fn create(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(p, e))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Maps a write failure onto the output's name.
pub fn write_err(path: Option<&Path>) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::io(path.unwrap_or(Path::new("<stdout>")), e)
}

fn parse_err(source: &str, line: usize, msg: impl AsRef<str>) -> CliError {
    CliError::Validation(format!("{source}:{line}: {}", msg.as_ref()))
}

fn is_header(line: usize, text: &str, header: &str) -> bool {
    line == 1 && text.eq_ignore_ascii_case(header)
}

/// Symbols from one-per-line or `t,symbol` rows. An optional first-line
/// header `symbol` or `t,symbol` is skipped.
pub fn symbols(input: Input, alphabet: usize) -> impl Iterator<Item = CliResult<Symbol>> {
    let name = input.name().to_string();
    input.lines().filter_map(move |item| {
        let (line, text) = match item {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        if is_header(line, &text, "symbol") || is_header(line, &text, "t,symbol") {
            return None;
        }
        Some(parse_symbol(&name, line, &text, alphabet))
    })
}

fn parse_symbol(name: &str, line: usize, text: &str, alphabet: usize) -> CliResult<Symbol> {
    let field = match text.split_once(',') {
        Some((t, s)) => {
            t.trim()
                .parse::<u64>()
                .map_err(|_| parse_err(name, line, format!("bad time index {:?}", t.trim())))?;
            s.trim()
        }
        None => text,
    };
    let s: Symbol = field
        .parse()
        .map_err(|_| parse_err(name, line, format!("expected a symbol, found {field:?}")))?;
    if s >= alphabet {
        return Err(parse_err(
            name,
            line,
            format!("symbol {s} outside alphabet of size {alphabet}"),
        ));
    }
    Ok(s)
}

pub fn prediction_row(r: &PredictionRecord) -> String {
    let mode = r.mode.map(|m| m.0.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{}",
        r.t,
        r.symbol,
        r.phase.indicator(),
        r.distance,
        mode,
        r.events
    )
}

/// Reads a prediction CSV back into records. Mode events take the id in the
/// row's mode column, which is the mode the event left predicted.
pub fn read_predictions(path: &Path) -> CliResult<Vec<PredictionRecord>> {
    let name = display(path);
    let mut out = Vec::new();
    for item in Input::open(Some(path))?.lines() {
        let (line, text) = item?;
        if is_header(line, &text, PREDICTION_HEADER) {
            continue;
        }
        out.push(parse_prediction(&text).map_err(|m| parse_err(&name, line, m))?);
    }
    Ok(out)
}

fn parse_prediction(text: &str) -> Result<PredictionRecord, String> {
    let f: Vec<&str> = text.split(',').map(str::trim).collect();
    if f.len() != 6 {
        return Err(format!("expected 6 fields, found {}", f.len()));
    }
    let num = |i: usize, what: &str| -> Result<u64, String> {
        f[i].parse().map_err(|_| format!("bad {what} {:?}", f[i]))
    };
    let mode = match f[4] {
        "" => None,
        s => Some(ModeId(s.parse().map_err(|_| format!("bad mode {s:?}"))?)),
    };
    let phase = match f[2] {
        "1" => Phase::Steady,
        "0" => Phase::Drift,
        s => return Err(format!("bad phi {s:?}")),
    };
    Ok(PredictionRecord {
        t: num(0, "time index")?,
        symbol: num(1, "symbol")? as Symbol,
        phase,
        distance: f[3]
            .parse()
            .map_err(|_| format!("bad distance {:?}", f[3]))?,
        mode,
        events: parse_events(f[5], mode)?,
    })
}

fn parse_events(label: &str, mode: Option<ModeId>) -> Result<StepEvents, String> {
    let mut ev = StepEvents::default();
    if label == "none" {
        return Ok(ev);
    }
    for part in label.split('+') {
        let id = || mode.ok_or_else(|| format!("{part} without a mode"));
        match part {
            "drift_entered" if ev.drift.is_none() => ev.drift = Some(DriftEvent::Entered),
            "drift_ended" if ev.drift.is_none() => ev.drift = Some(DriftEvent::Ended),
            "mode_created" if ev.mode.is_none() => ev.mode = Some(ModeEvent::Created(id()?)),
            "mode_refined" if ev.mode.is_none() => ev.mode = Some(ModeEvent::Refined(id()?)),
            "mode_matched" if ev.mode.is_none() => ev.mode = Some(ModeEvent::Matched(id()?)),
            _ => return Err(format!("bad event {label:?}")),
        }
    }
    Ok(ev)
}

pub fn write_labels(path: &Path, labels: &[usize]) -> CliResult<()> {
    let mut out = String::with_capacity(labels.len() * 8);
    out.push_str(LABELS_HEADER);
    out.push('\n');
    for (t, l) in labels.iter().enumerate() {
        let _ = writeln!(out, "{t},{l}");
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Reads `t,mode` rows; the time column must count up from 0.
pub fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    let name = display(path);
    let mut labels = Vec::new();
    for item in Input::open(Some(path))?.lines() {
        let (line, text) = item?;
        if is_header(line, &text, LABELS_HEADER) {
            continue;
        }
        let (t, mode) = text
            .split_once(',')
            .ok_or_else(|| parse_err(&name, line, "expected `t,mode`"))?;
        let t: usize = t
            .trim()
            .parse()
            .map_err(|_| parse_err(&name, line, format!("bad time index {t:?}")))?;
        if t != labels.len() {
            return Err(parse_err(
                &name,
                line,
                format!("expected t = {}, found {t}", labels.len()),
            ));
        }
        labels.push(
            mode.trim()
                .parse()
                .map_err(|_| parse_err(&name, line, format!("bad mode {mode:?}")))?,
        );
    }
    Ok(labels)
}

/// Change points are the steps whose label differs from the previous one.
pub fn change_points(labels: &[usize]) -> Vec<usize> {
    (1..labels.len())
        .filter(|&t| labels[t] != labels[t - 1])
        .collect()
}

pub fn write_truth(path: &Path, tensors: &[StochasticTensor]) -> CliResult<()> {
    let (k, m) = tensors
        .first()
        .map(|t| (t.order(), t.alphabet_size()))
        .unwrap_or((0, 0));
    let mut out = format!("{TRUTH_MAGIC} 1 {k} {m} {}\n", tensors.len());
    for (i, t) in tensors.iter().enumerate() {
        let _ = writeln!(out, "mode {i}");
        for row in t.rows() {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.16e}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn read_truth(path: &Path) -> CliResult<Vec<StochasticTensor>> {
    let name = display(path);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let bad = |line: usize, msg: &str| parse_err(&name, line, msg);

    let (_, head) = lines.next().ok_or_else(|| bad(1, "empty truth file"))?;
    let h: Vec<&str> = head.split_whitespace().collect();
    if h.len() != 5 || h[0] != TRUTH_MAGIC || h[1] != "1" {
        return Err(bad(1, "expected `EMCTRUTH 1 <k> <m> <n>`"));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad(1, "bad header field"));
    let (k, m, n) = (parse(h[2])?, parse(h[3])?, parse(h[4])?);
    let conditions = m
        .checked_pow(k as u32)
        .ok_or_else(|| bad(1, "tensor too large"))?;

    let mut tensors = Vec::with_capacity(n);
    for i in 0..n {
        let (line, tag) = lines.next().ok_or_else(|| bad(0, "truncated truth file"))?;
        if tag != format!("mode {i}") {
            return Err(bad(line, &format!("expected `mode {i}`")));
        }
        let mut values = Vec::with_capacity(conditions * m);
        for _ in 0..conditions {
            let (line, row) = lines.next().ok_or_else(|| bad(0, "truncated truth file"))?;
            let before = values.len();
            for cell in row.split_whitespace() {
                values.push(
                    cell.parse::<f64>()
                        .map_err(|_| bad(line, "bad probability"))?,
                );
            }
            if values.len() - before != m {
                return Err(bad(line, &format!("expected {m} probabilities")));
            }
        }
        let t = StochasticTensor::from_values(k, m, values)
            .map_err(|e| CliError::Validation(format!("{name}: mode {i}: {e}")))?;
        tensors.push(t);
    }
    Ok(tensors)
}
