//! Line-delimited JSON dataset files.
//!
//! The first line is a header with the format version, scenario, report mode
//! and dimensions; every following line is one sample
//! `{"idx": snapshot, "label": 0|1, "rows": [[...], ...]}`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use coopsense_core::dataset::LabeledSample;
use coopsense_core::{Dataset, Hypothesis, ReportMode, ScenarioConfig, SensingMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DATASET_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    version: u32,
    scenario: ScenarioConfig,
    mode: ReportMode,
    n_su: usize,
    n_bands: usize,
    n_samples: usize,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    idx: u64,
    label: u8,
    rows: Vec<Vec<f64>>,
}

pub fn write_dataset<W: Write>(ds: &Dataset, mut w: W) -> std::io::Result<()> {
    let header = Header {
        version: DATASET_VERSION,
        scenario: ds.scenario.clone(),
        mode: ds.mode,
        n_su: ds.n_su,
        n_bands: ds.n_bands,
        n_samples: ds.len(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for s in &ds.samples {
        let rows = (0..s.matrix.n_su).map(|r| s.matrix.row(r).to_vec()).collect();
        let rec = Record { idx: s.snapshot_index, label: s.label.index() as u8, rows };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(ds, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

/// Parse a dataset; `path` only labels diagnostics.
pub fn read_dataset<R: BufRead>(r: R, path: &Path) -> Result<Dataset> {
    let mut lines = r.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
    let (_, first) = lines.next().ok_or_else(|| Error::format(path, 1, "empty file, expected a header"))?;
    let first = first.map_err(|e| Error::io(path, e))?;
    let version = serde_json::from_str::<serde_json::Value>(&first)
        .map_err(|e| Error::format(path, 1, e))?
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::format(path, 1, "header has no version"))?;
    if version != DATASET_VERSION as u64 {
        return Err(Error::Version { path: path.into(), found: version as u32, expected: DATASET_VERSION });
    }
    let header: Header = serde_json::from_str(&first).map_err(|e| Error::format(path, 1, e))?;
    let mut samples = Vec::with_capacity(header.n_samples);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::format(path, lineno, e))?;
        let label = Hypothesis::from_index(rec.label as usize)
            .ok_or_else(|| Error::format(path, lineno, format!("label must be 0 or 1, got {}", rec.label)))?;
        if rec.rows.len() != header.n_su || rec.rows.iter().any(|r| r.len() != header.n_bands) {
            return Err(Error::format(
                path,
                lineno,
                format!("expected {} rows of {} values", header.n_su, header.n_bands),
            ));
        }
        let values = rec.rows.into_iter().flatten().collect();
        let matrix = SensingMatrix::new(header.mode, header.n_su, header.n_bands, values)
            .map_err(|e| Error::format(path, lineno, e))?;
        samples.push(LabeledSample { matrix, label, snapshot_index: rec.idx });
    }
    if samples.len() != header.n_samples {
        return Err(Error::format(
            path,
            samples.len() + 1,
            format!("header announces {} samples, found {}", header.n_samples, samples.len()),
        ));
    }
    let ds = Dataset { scenario: header.scenario, mode: header.mode, n_su: header.n_su, n_bands: header.n_bands, samples };
    ds.validate()?;
    Ok(ds)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(f), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use coopsense_core::dataset::generate_dataset;

    fn small() -> Dataset {
        let cfg = ScenarioConfig { n_su: 3, n_bands: 4, n_ed: 8, ..Default::default() };
        generate_dataset(&cfg, 12, ReportMode::Sd, 3).unwrap()
    }

    fn roundtrip(ds: &Dataset) -> Dataset {
        let mut buf = Vec::new();
        write_dataset(ds, &mut buf).unwrap();
        read_dataset(buf.as_slice(), Path::new("mem")).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let ds = small();
        assert_eq!(roundtrip(&ds), ds);
        let hd = ds.to_hard(-90.0).unwrap();
        assert_eq!(roundtrip(&hd), hd);
    }

    #[test]
    fn diagnostics_name_the_line() {
        let mut buf = Vec::new();
        write_dataset(&small(), &mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text = text.replacen("\"label\":", "\"label\":7,\"x\":", 1);
        let err = read_dataset(text.as_bytes(), Path::new("d.jsonl")).unwrap_err();
        assert!(err.to_string().starts_with("d.jsonl:2:"), "{err}");
    }

    #[test]
    fn version_and_count_are_checked() {
        let mut buf = Vec::new();
        write_dataset(&small(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let bumped = text.replacen("\"version\":1", "\"version\":9", 1);
        assert!(matches!(read_dataset(bumped.as_bytes(), Path::new("x")), Err(Error::Version { found: 9, .. })));
        let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_dataset(truncated.as_bytes(), Path::new("x")), Err(Error::Format { .. })));
        assert!(matches!(read_dataset(&b""[..], Path::new("x")), Err(Error::Format { line: 1, .. })));
    }
}
