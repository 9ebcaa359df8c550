//! Result emission as CSV or JSON. Files are written to a temporary sibling
//! and renamed into place.

use crate::experiment::ResultRow;
use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub fn render(rows: &[ResultRow], format: Format) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::EmptyResults);
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| Error::Io(e.into()))?;
            }
            w.into_inner().map_err(|e| Error::Io(e.into_error()))
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rows).map_err(|e| Error::Io(e.into()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Writes `rows` to `path` atomically.
pub fn emit(rows: &[ResultRow], format: Format, path: &Path) -> Result<()> {
    let bytes = render(rows, format)?;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(&bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: f64) -> ResultRow {
        ResultRow {
            sweep_var: "bler".into(),
            sweep_value: v,
            lambda_factor: 1.0,
            theta_factor: 0.8,
            mean_bitrate_bps: 446523840.0,
            mean_block_prob: 0.1234567890123,
            sim_bitrate_bps: None,
            sim_block_prob: None,
            sim_tv_distance: None,
        }
    }

    #[test]
    fn empty_set_is_an_error() {
        assert!(matches!(render(&[], Format::Csv), Err(Error::EmptyResults)));
        let dir = tempfile::tempdir().unwrap();
        assert!(emit(&[], Format::Json, &dir.path().join("x.json")).is_err());
        assert!(!dir.path().join("x.json").exists());
    }

    #[test]
    fn one_row_gives_two_lines() {
        let text = String::from_utf8(render(&[row(0.1)], Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "sweep_var,sweep_value,lambda_factor,theta_factor,mean_bitrate_bps,mean_block_prob,\
             sim_bitrate_bps,sim_block_prob,sim_tv_distance"
        );
        assert_eq!(lines[1], "bler,0.1,1.0,0.8,446523840.0,0.1234567890123,,,");
    }

    #[test]
    fn re_emission_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        let rows = vec![row(0.0), row(0.5)];
        emit(&rows, Format::Csv, &p).unwrap();
        let a = std::fs::read(&p).unwrap();
        emit(&rows, Format::Csv, &p).unwrap();
        assert_eq!(a, std::fs::read(&p).unwrap());
        let j = dir.path().join("out.json");
        emit(&rows, Format::Json, &j).unwrap();
        let back: serde_json::Value = serde_json::from_slice(&std::fs::read(&j).unwrap()).unwrap();
        assert_eq!(back.as_array().unwrap().len(), 2);
        assert!(back[0]["sim_tv_distance"].is_null());
    }
}
