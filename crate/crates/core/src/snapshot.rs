//! Versioned text snapshots of a running [`Emc`].
//!
//! Layout, one item per line:
//!
//! ```text
//! EMCSNAP 1 <k> <m>
//! config <lambda_fast> <lambda_slow> <beta> <delta_fast> <delta_slow> <eta_fast> <eta_slow> <tau>
//! estimator <observations> <renormalizations> <window symbols, comma separated, or ->
//! tensor
//! <m probabilities>            (m^k rows, lexicographic condition order)
//! modes <count> <prediction or -> <mutations>
//! mode <id> <updates> <renormalizations>
//! <m probabilities>            (m^k rows per mode)
//! drift <phi> <distance> <since_check>
//! prev
//! <m probabilities>            (m^k rows)
//! checksum <sha256 of every preceding byte, hex>
//! ```
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::drift::{DriftState, Phase};
use crate::emc::{Emc, EmcConfig};
use crate::error::EmcError;
use crate::estimator::{Estimator, ObservationWindow};
use crate::memory::{Mode, ModeId, ModeMemory};
use crate::tensor::StochasticTensor;

pub const MAGIC: &str = "EMCSNAP";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("unsupported snapshot version {0}")]
    Version(String),
    #[error("not a snapshot (missing {MAGIC} header)")]
    NotASnapshot,
    #[error("snapshot is truncated")]
    Truncated,
    #[error("snapshot checksum mismatch")]
    Checksum,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("snapshot state is invalid: {0}")]
    Invalid(#[from] EmcError),
}

impl SnapshotError {
    /// Whether the file was read but its contents cannot be trusted.
    pub fn is_integrity(&self) -> bool {
        !matches!(self, SnapshotError::Io(_))
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_rows(out: &mut String, t: &StochasticTensor) {
    for row in t.rows() {
        let line: Vec<String> = row.iter().map(|&p| float(p)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

fn digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

/// Serializes the full pipeline state.
pub fn encode(emc: &Emc) -> String {
    let cfg = emc.config();
    let est = emc.estimator();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION} {} {}", cfg.order, cfg.alphabet_size);
    let _ = writeln!(
        out,
        "config {} {} {} {} {} {} {} {}",
        float(cfg.lambda_fast),
        float(cfg.lambda_slow),
        float(cfg.beta),
        float(cfg.delta_fast),
        float(cfg.delta_slow),
        float(cfg.eta_fast),
        float(cfg.eta_slow),
        cfg.tau
    );
    let window: Vec<String> = est.window().symbols().map(|s| s.to_string()).collect();
    let window = if window.is_empty() {
        "-".to_string()
    } else {
        window.join(",")
    };
    let _ = writeln!(
        out,
        "estimator {} {} {window}",
        est.observations(),
        est.tensor().renormalizations()
    );
    out.push_str("tensor\n");
    write_rows(&mut out, est.tensor());

    let mem = emc.memory();
    let prediction = mem
        .prediction()
        .map_or_else(|| "-".to_string(), |id| id.to_string());
    let _ = writeln!(out, "modes {} {prediction} {}", mem.len(), mem.mutations());
    for mode in mem.modes() {
        let _ = writeln!(
            out,
            "mode {} {} {}",
            mode.id(),
            mode.updates(),
            mode.mean().renormalizations()
        );
        write_rows(&mut out, mode.mean());
    }

    let drift = emc.drift();
    let _ = writeln!(
        out,
        "drift {} {} {}",
        drift.phase().indicator(),
        float(drift.last_distance()),
        drift.since_check()
    );
    out.push_str("prev\n");
    write_rows(&mut out, drift.reference());

    let sum = digest(&out);
    let _ = writeln!(out, "checksum {sum}");
    out
}

struct Cursor<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn next(&mut self) -> Result<&'a str, SnapshotError> {
        let (i, l) = self.lines.next().ok_or(SnapshotError::Truncated)?;
        self.line = i + 1;
        Ok(l)
    }

    fn err(&self, reason: impl Into<String>) -> SnapshotError {
        SnapshotError::Malformed {
            line: self.line,
            reason: reason.into(),
        }
    }

    /// Next line split into fields, which must start with `tag`.
    fn tagged(&mut self, tag: &str) -> Result<Vec<&'a str>, SnapshotError> {
        let line = self.next()?;
        let mut fields = line.split_ascii_whitespace();
        if fields.next() != Some(tag) {
            return Err(self.err(format!("expected `{tag}`")));
        }
        Ok(fields.collect())
    }

    fn parse<T: std::str::FromStr>(
        &self,
        field: Option<&&str>,
        what: &str,
    ) -> Result<T, SnapshotError> {
        field
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| self.err(format!("bad or missing {what}")))
    }

    fn rows(&mut self, order: usize, alphabet: usize) -> Result<StochasticTensor, SnapshotError> {
        let conditions = StochasticTensor::new_uniform(order, alphabet)?.n_conditions();
        let mut values = Vec::with_capacity(conditions * alphabet);
        for _ in 0..conditions {
            let line = self.next()?;
            let before = values.len();
            for f in line.split_ascii_whitespace() {
                values.push(f.parse::<f64>().map_err(|_| self.err("bad probability"))?);
            }
            if values.len() - before != alphabet {
                return Err(self.err(format!("expected {alphabet} probabilities")));
            }
        }
        StochasticTensor::from_values(order, alphabet, values).map_err(|e| self.err(e.to_string()))
    }
}

/// Restores a pipeline from [`encode`] output, verifying version and checksum.
pub fn decode(text: &str) -> Result<Emc, SnapshotError> {
    let header = text.lines().next().ok_or(SnapshotError::Truncated)?;
    let mut fields = header.split_ascii_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(SnapshotError::NotASnapshot);
    }
    match fields.next() {
        Some(v) if v == VERSION.to_string() => {}
        Some(v) => return Err(SnapshotError::Version(v.to_string())),
        None => return Err(SnapshotError::Truncated),
    }

    let body_end = text
        .rfind("checksum ")
        .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
        .ok_or(SnapshotError::Truncated)?;
    let (body, tail) = text.split_at(body_end);
    let stored = tail
        .strip_prefix("checksum ")
        .and_then(|s| s.strip_suffix('\n'))
        .ok_or(SnapshotError::Truncated)?;
    if stored != digest(body) {
        return Err(SnapshotError::Checksum);
    }

    let mut cur = Cursor {
        lines: body.lines().enumerate(),
        line: 0,
    };
    let head = cur.tagged(MAGIC)?;
    let order: usize = cur.parse(head.get(1), "order")?;
    let alphabet: usize = cur.parse(head.get(2), "alphabet size")?;

    let c = cur.tagged("config")?;
    let config = EmcConfig {
        order,
        alphabet_size: alphabet,
        lambda_fast: cur.parse(c.first(), "lambda_fast")?,
        lambda_slow: cur.parse(c.get(1), "lambda_slow")?,
        beta: cur.parse(c.get(2), "beta")?,
        delta_fast: cur.parse(c.get(3), "delta_fast")?,
        delta_slow: cur.parse(c.get(4), "delta_slow")?,
        eta_fast: cur.parse(c.get(5), "eta_fast")?,
        eta_slow: cur.parse(c.get(6), "eta_slow")?,
        tau: cur.parse(c.get(7), "tau")?,
    };
    config.validate()?;

    let e = cur.tagged("estimator")?;
    let observations: u64 = cur.parse(e.first(), "observation count")?;
    let est_renorm: u64 = cur.parse(e.get(1), "renormalization count")?;
    let mut window = ObservationWindow::new(order);
    match e.get(2) {
        Some(&"-") => {}
        Some(list) => {
            for s in list.split(',') {
                let s: usize = s.parse().map_err(|_| cur.err("bad window symbol"))?;
                if s >= alphabet {
                    return Err(cur.err("window symbol out of range"));
                }
                window.push(s);
            }
        }
        None => return Err(cur.err("missing window")),
    }
    if window.len() as u64 != observations.min(order as u64) {
        return Err(cur.err("window length disagrees with observation count"));
    }
    cur.tagged("tensor")?;
    let mut tensor = cur.rows(order, alphabet)?;
    tensor.set_renormalizations(est_renorm);

    let m = cur.tagged("modes")?;
    let n_modes: usize = cur.parse(m.first(), "mode count")?;
    let prediction = match m.get(1) {
        Some(&"-") => None,
        other => Some(ModeId(cur.parse(other, "prediction")?)),
    };
    let mutations: u64 = cur.parse(m.get(2), "mutation count")?;
    let mut modes = Vec::with_capacity(n_modes);
    for want in 0..n_modes {
        let f = cur.tagged("mode")?;
        let id: usize = cur.parse(f.first(), "mode id")?;
        if id != want {
            return Err(cur.err(format!("expected mode {want}")));
        }
        let updates: u64 = cur.parse(f.get(1), "update count")?;
        if updates == 0 {
            return Err(cur.err("mode update count must be positive"));
        }
        let renorm: u64 = cur.parse(f.get(2), "renormalization count")?;
        let mut mean = cur.rows(order, alphabet)?;
        mean.set_renormalizations(renorm);
        modes.push(Mode::from_parts(ModeId(id), mean, updates));
    }
    if prediction.is_some_and(|p| p.0 >= n_modes) {
        return Err(cur.err("prediction names a missing mode"));
    }

    let d = cur.tagged("drift")?;
    let phase = Phase::from_indicator(cur.parse(d.first(), "phi")?)
        .ok_or_else(|| cur.err("phi must be 0 or 1"))?;
    let distance: f64 = cur.parse(d.get(1), "distance")?;
    let since_check: u64 = cur.parse(d.get(2), "check counter")?;
    if since_check >= config.tau {
        return Err(cur.err("check counter exceeds tau"));
    }
    cur.tagged("prev")?;
    let prev = cur.rows(order, alphabet)?;
    if cur.next().is_ok() {
        return Err(cur.err("unexpected trailing content"));
    }

    Ok(Emc {
        config,
        estimator: Estimator::from_parts(tensor, window, config.beta, observations),
        drift: DriftState::from_parts(phase, prev, distance, config.tau, since_check),
        memory: ModeMemory::from_parts(modes, prediction, mutations),
    })
}

pub fn save(emc: &Emc, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
    std::fs::write(path, encode(emc))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Emc, SnapshotError> {
    decode(&std::fs::read_to_string(path)?)
}
