//! CSV and JSON result files.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::harness::SweepRow;

/// Columns of the CSV output, in order.
pub const CSV_COLUMNS: [&str; 14] = [
    "scheme",
    "detector",
    "modulation",
    "n_reflectors",
    "snr_db",
    "trials",
    "bit_errors",
    "total_bits",
    "ber",
    "block_errors",
    "bler",
    "asbt_perbit",
    "asbt_block",
    "mean_mac",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config("format", format!("unknown format `{other}`"))),
        }
    }
}

/// JSON results file: the rows plus everything needed to regenerate them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub seed: u64,
    pub detector: String,
    pub config: SystemConfig,
    pub rows: Vec<SweepRow>,
}

pub fn to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Serialize(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn from_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Serialize(e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::Serialize(format!("unexpected CSV header {header:?}")));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::Serialize(e.to_string())))
        .collect()
}

pub fn to_json(doc: &ResultsDocument) -> Result<String> {
    serde_json::to_string_pretty(doc).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn from_json(text: &str) -> Result<ResultsDocument> {
    serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
}

/// Renders `rows` and writes them to `path` by replacing the file
/// atomically, or to standard output when `path` is `None`.
pub fn emit_results(
    rows: &[SweepRow],
    format: OutputFormat,
    path: Option<&Path>,
    config: &SystemConfig,
    detector: &str,
) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyOutcomes);
    }
    let text = match format {
        OutputFormat::Csv => to_csv(rows)?,
        OutputFormat::Json => to_json(&ResultsDocument {
            seed: config.seed,
            detector: detector.to_string(),
            config: config.clone(),
            rows: rows.to_vec(),
        })?,
    };
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
        Some(path) => write_atomic(path, text.as_bytes()),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(snr_db: f64) -> SweepRow {
        SweepRow {
            scheme: "mas".into(),
            detector: "ssd".into(),
            modulation: "bpsk".into(),
            n_reflectors: 64,
            snr_db,
            trials: 1000,
            bit_errors: 3,
            total_bits: 8000,
            ber: 3.0 / 8000.0,
            block_errors: 2,
            bler: 0.002,
            asbt_perbit: 8.0 - 0.003,
            asbt_block: 8.0 * 0.998,
            mean_mac: 50_155.0 + 1.0 / 3.0,
        }
    }

    #[test]
    fn csv_layout() {
        let text = to_csv(&[row(-20.0), row(-18.0)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(from_csv(&text).unwrap(), vec![row(-20.0), row(-18.0)]);
    }

    #[test]
    fn infinite_snr_survives_both_formats() {
        let rows = vec![row(f64::INFINITY)];
        assert_eq!(from_csv(&to_csv(&rows).unwrap()).unwrap(), rows);
        let doc = ResultsDocument {
            seed: 9,
            detector: "ssd".into(),
            config: SystemConfig::default(),
            rows,
        };
        assert_eq!(from_json(&to_json(&doc).unwrap()).unwrap(), doc);
    }

    #[test]
    fn atomic_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let cfg = SystemConfig::default();
        emit_results(&[row(0.0), row(1.0)], OutputFormat::Csv, Some(&path), &cfg, "ssd").unwrap();
        emit_results(&[row(0.0), row(1.0)], OutputFormat::Csv, Some(&path), &cfg, "ssd").unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_path() {
        let cfg = SystemConfig::default();
        let path = Path::new("/nonexistent-dir/xyz/out.csv");
        assert!(emit_results(&[row(0.0)], OutputFormat::Csv, Some(path), &cfg, "ssd").is_err());
        assert!(emit_results(&[], OutputFormat::Csv, None, &cfg, "ssd").is_err());
    }
}
