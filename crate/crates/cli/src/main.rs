mod commands;
mod config;
mod svg;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use crate::config::{Cli, Settings};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] pq_stancu::Error),
    #[error("{}: {1}", .0.display())]
    Io(PathBuf, #[source] io::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = match Settings::from_cli(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&settings) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("  while running: {}", settings.describe());
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Runs the command and writes its artifacts; `Ok(false)` when an asserted
/// invariant failed.
fn run(s: &Settings) -> Result<bool, CliError> {
    let out = commands::run(s)?;
    // With the table on stdout the summary goes to stderr, keeping stdout pure CSV.
    let mut report: Box<dyn Write> = match &s.out_csv {
        Some(path) => {
            write_file(path, |w| Ok(out.table.write_csv(w)?))?;
            Box::new(io::stdout())
        }
        None => {
            out.table.write_csv(io::stdout().lock())?;
            Box::new(io::stderr())
        }
    };
    if let (Some(path), Some(svg)) = (&s.out_svg, &out.svg) {
        write_file(path, |w| {
            w.write_all(svg.as_bytes())
                .map_err(|e| CliError::Io(path.clone(), e))
        })?;
    }
    let _ = writeln!(report, "{}", s.describe());
    for line in &out.summary {
        let _ = writeln!(report, "  {line}");
    }
    if out.violations.is_empty() {
        let _ = writeln!(report, "  all asserted invariants hold");
        return Ok(true);
    }
    let _ = writeln!(report, "  {} violation(s):", out.violations.len());
    for v in &out.violations {
        let _ = writeln!(report, "    {v}");
    }
    Ok(false)
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| CliError::Io(path.to_path_buf(), e))
}
