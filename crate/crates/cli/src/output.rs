//! Output destinations: stdout, or files that are never silently replaced.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::OutputOptions;
use crate::CliError;

pub fn ensure_writable(path: &Path, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::Usage(format!(
            "refusing to overwrite {} (pass --force to replace it)",
            path.display()
        )));
    }
    Ok(())
}

/// Path of the JSON metadata written next to a CSV file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn open(opts: &OutputOptions) -> Result<Box<dyn Write>, CliError> {
    match &opts.out {
        Some(p) => {
            ensure_writable(p, opts.force)?;
            Ok(Box::new(BufWriter::new(File::create(p)?)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
