//! Report emission: stdout or an atomically written file, plus the
//! timeline CSV used for external Gantt plotting.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process;

use serde::Serialize;

use gcs_core::pipeline::SimReport;
use gcs_core::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

/// Writes through a temp file in the same directory so readers never see a
/// partial report.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp.{}", process::id()));
    fs::write(&tmp, text)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e.into())
        }
    }
}

pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// serde_json writes structs in declaration order and maps in key order, so
/// equal inputs produce byte-equal reports.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| gcs_core::Error::Format(format!("serializing report: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// One row per pipeline stage, times in microseconds.
pub fn timeline_csv(report: &SimReport) -> String {
    let mut csv = String::from("gpu,minibatch,stage,start_us,end_us\n");
    for timeline in &report.per_gpu {
        for mb in &timeline.minibatches {
            for (stage, iv) in [
                ("sampler", &mb.sampler),
                ("producer", &mb.producer),
                ("consumer", &mb.consumer),
            ] {
                csv.push_str(&format!(
                    "{},{},{},{:.3},{:.3}\n",
                    timeline.gpu,
                    mb.minibatch,
                    stage,
                    iv.start * 1e6,
                    iv.end * 1e6,
                ));
            }
        }
    }
    csv
}

pub fn fmt_bytes(bytes: u64) -> String {
    let b = bytes as f64;
    if b >= 1e9 {
        format!("{:.2} GB", b / 1e9)
    } else if b >= 1e6 {
        format!("{:.2} MB", b / 1e6)
    } else if b >= 1e3 {
        format!("{:.2} kB", b / 1e3)
    } else {
        format!("{bytes} B")
    }
}

pub fn fmt_bandwidth(bytes_per_sec: f64) -> String {
    format!("{:.2} GB/s", bytes_per_sec / 1e9)
}

pub fn fmt_seconds(seconds: f64) -> String {
    if seconds == 0.0 {
        "0 s".into()
    } else if seconds < 1e-3 {
        format!("{:.1} us", seconds * 1e6)
    } else if seconds < 1.0 {
        format!("{:.3} ms", seconds * 1e3)
    } else {
        format!("{:.3} s", seconds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        write_atomic(&path, "first").unwrap();
        write_atomic(&path, "second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn human_units_round_sensibly() {
        assert_eq!(fmt_bytes(512), "512 B");
        assert_eq!(fmt_bytes(2048), "2.05 kB");
        assert_eq!(fmt_bytes(161_500_000), "161.50 MB");
        assert_eq!(fmt_bandwidth(24.62e9), "24.62 GB/s");
        assert_eq!(fmt_seconds(0.0), "0 s");
        assert_eq!(fmt_seconds(8.5e-3), "8.500 ms");
        assert_eq!(fmt_seconds(1.385), "1.385 s");
    }
}
