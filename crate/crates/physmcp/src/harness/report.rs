//! Report writers: pretty JSON for the structured reports, CSV for the
//! per-run overhead samples.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::harness::bench::OverheadSample;

/// Writes `value` as pretty-printed JSON with a trailing newline.
pub fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

/// Writes the overhead samples as `backend,mode,run,latency_ms` rows.
pub fn write_overhead_csv(path: &Path, samples: &[OverheadSample]) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "backend,mode,run,latency_ms")?;
    for sample in samples {
        writeln!(
            file,
            "{},{},{},{:.6}",
            sample.backend, sample.mode, sample.run, sample.latency_ms
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_one_row_per_sample() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("overhead.csv");
        let samples = vec![OverheadSample {
            backend: "local-fast".into(),
            mode: "direct".into(),
            run: 0,
            latency_ms: 0.125,
        }];
        write_overhead_csv(&path, &samples).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "backend,mode,run,latency_ms");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("local-fast,direct,0,"));
    }
}
