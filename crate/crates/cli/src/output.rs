//! CSV emission: `# key: value` header block followed by a fixed column
//! schema. LF line endings, `.` decimal separator, 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::config::{fmt17, RunConfig};
use crate::AppError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub enum Sink {
    Stdout(io::Stdout),
    File(BufWriter<File>),
}

impl Sink {
    pub fn create(path: Option<&Path>) -> Result<Sink, AppError> {
        match path {
            None => Ok(Sink::Stdout(io::stdout())),
            Some(p) => {
                let f = File::create(p).map_err(|e| {
                    AppError::Config(format!("cannot create output file {}: {e}", p.display()))
                })?;
                Ok(Sink::File(BufWriter::new(f)))
            }
        }
    }

    pub fn writer(&mut self) -> &mut dyn Write {
        match self {
            Sink::Stdout(s) => s,
            Sink::File(f) => f,
        }
    }

    pub fn finish(self) -> Result<(), AppError> {
        if let Sink::File(mut f) = self {
            f.flush()
                .map_err(|e| AppError::Numerical(format!("write failed: {e}")))?;
        }
        Ok(())
    }
}

/// Writes the `# key: value` header block and the plain column row.
pub fn write_header(
    w: &mut dyn Write,
    command: &str,
    cfg: &RunConfig,
    columns: &[&str],
) -> Result<(), AppError> {
    let io_err = |e: io::Error| AppError::Numerical(format!("write failed: {e}"));
    writeln!(w, "# version: {VERSION}").map_err(io_err)?;
    writeln!(w, "# command: {command}").map_err(io_err)?;
    writeln!(w, "# units: J = 1").map_err(io_err)?;
    for (k, v) in cfg.echo_entries() {
        writeln!(w, "# {k}: {v}").map_err(io_err)?;
    }
    writeln!(w, "# columns: {}", columns.join(",")).map_err(io_err)?;
    writeln!(w, "{}", columns.join(",")).map_err(io_err)?;
    Ok(())
}

pub fn write_row(w: &mut dyn Write, fields: &[String]) -> Result<(), AppError> {
    writeln!(w, "{}", fields.join(","))
        .map_err(|e| AppError::Numerical(format!("write failed: {e}")))
}

pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        fmt17(v)
    }
}
