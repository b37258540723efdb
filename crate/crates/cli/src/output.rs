use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::error::{CliError, CliResult};

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Appends `suffix` to the file name of `prefix`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

/// Pretty JSON with object keys sorted and a trailing newline.
pub fn json_string<T: Serialize>(value: &T) -> CliResult<String> {
    // `Value` objects are ordered maps, so the round trip sorts every key
    let value: Value = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn write_table_to<W: Write, T: Serialize>(w: W, rows: &[T], format: Format) -> CliResult<()> {
    match format {
        Format::Csv => {
            let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
            for row in rows {
                writer.serialize(row)?;
            }
            writer.flush().map_err(csv::Error::from)?;
        }
        Format::Json => {
            let mut w = w;
            w.write_all(json_string(&rows)?.as_bytes()).map_err(csv::Error::from)?;
            w.flush().map_err(csv::Error::from)?;
        }
    }
    Ok(())
}

/// Writes rows to `path`, or to standard output when `path` is `None`.
pub fn write_table<T: Serialize>(path: Option<&Path>, rows: &[T], format: Format) -> CliResult<()> {
    match path {
        Some(p) => write_table_to(create(p)?, rows, format).map_err(|e| match e {
            CliError::Csv(c) if c.is_io_error() => CliError::Io { path: p.to_path_buf(), source: io::Error::other(c.to_string()) },
            other => other,
        }),
        None => write_table_to(io::stdout().lock(), rows, format),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(json_string(value)?.as_bytes()).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}
