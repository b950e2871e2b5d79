use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use emc_core::snapshot::{self, VERSION};

use crate::error::{CliError, CliResult};
use crate::formats::{create, write_err};

/// Loads a snapshot, which checks its version and checksum, and prints a
/// summary. With `--output` the state is re-encoded to a new file.
#[derive(Args, Debug)]
pub struct SnapshotArgs {
    /// Snapshot to verify
    #[arg(long)]
    input: PathBuf,
    /// Re-save the loaded state here
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn execute(args: SnapshotArgs) -> CliResult<()> {
    let emc = snapshot::load(&args.input).map_err(|e| CliError::snapshot(&args.input, e))?;
    let c = emc.config();
    let prediction = emc
        .memory()
        .prediction()
        .map(|m| m.to_string())
        .unwrap_or_default();
    let summary = format!(
        "key,value\nversion,{VERSION}\nk,{}\nm,{}\nobservations,{}\nphi,{}\nmodes,{}\nprediction,{prediction}\nmutations,{}\nrenormalizations,{}\n",
        c.order,
        c.alphabet_size,
        emc.observations(),
        emc.phase().indicator(),
        emc.memory().len(),
        emc.memory().mutations(),
        emc.estimator().tensor().renormalizations(),
    );
    let mut out = create(None)?;
    out.write_all(summary.as_bytes()).map_err(write_err(None))?;
    out.flush().map_err(write_err(None))?;
    if let Some(path) = &args.output {
        snapshot::save(&emc, path).map_err(|e| CliError::snapshot(path, e))?;
    }
    Ok(())
}
