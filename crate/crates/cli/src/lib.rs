//! Command-line front end: reads a JSON problem description, runs one command
//! and writes a JSON or CSV report.

pub mod config;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use config::{parse_config_with, Format, Overrides};
use run::{render, run, write_atomic, RunError};

#[derive(Debug, Parser)]
#[command(name = "vsl", version, about = "Spectra of vectorial Sturm-Liouville problems")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Report destination; stdout when neither this nor `output_path` is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Omit timings so identical configs give byte-identical reports.
    #[arg(long)]
    pub canonical: bool,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub order: Option<u8>,
    /// Inclusive window range, `A:B`.
    #[arg(long, value_parser = parse_range)]
    pub n_range: Option<(u32, u32)>,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected A:B, got {s}"))?;
    let a = a.trim().parse::<u32>().map_err(|e| format!("{a}: {e}"))?;
    let b = b.trim().parse::<u32>().map_err(|e| format!("{b}: {e}"))?;
    Ok((a, b))
}

/// Runs the tool and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vsl: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| RunError::Io {
        path: cli.config.display().to_string(),
        source: e,
    })?;
    let overrides = Overrides {
        out: cli.out.clone(),
        format: cli.format,
        delta: cli.delta,
        order: cli.order,
        n_range: cli.n_range,
    };
    let config = parse_config_with(&text, &overrides)?;
    let mut report = run(&config)?;
    if cli.canonical {
        report.timings = None;
    }
    let body = render(&report, config.format);
    match &config.output_path {
        Some(path) => write_atomic(path, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_flag() {
        assert_eq!(parse_range("10:40"), Ok((10, 40)));
        assert!(parse_range("10-40").is_err());
        assert!(parse_range("a:3").is_err());
    }

    #[test]
    fn config_flag_is_required() {
        assert!(Cli::try_parse_from(["vsl"]).is_err());
        let cli = Cli::try_parse_from(["vsl", "--config", "c.json", "--format", "csv", "--n-range", "3:5"]).unwrap();
        assert_eq!(cli.format, Some(Format::Csv));
        assert_eq!(cli.n_range, Some((3, 5)));
    }
}
