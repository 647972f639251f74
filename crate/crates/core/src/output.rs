//! CSV emission for sweep results and the run manifest written beside it.
//!
//! CSV rules: one header row, LF line endings, comma separators, floats as
//! 17 significant digits in scientific notation (`{:.16e}`), integers in
//! plain decimal. Nothing depends on locale.

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::config::SystemConfig;
use crate::sim::{Stat, SweepAxis, SweepPoint, SweepResult};

pub const CSV_HEADER: [&str; 12] = [
    "axis",
    "axis_value",
    "trials",
    "err_f2_mean",
    "err_f2_se",
    "thr_zf_bps",
    "thr_svdde_bps",
    "ptot_zf_w",
    "ptot_svdde_w",
    "ee_zf",
    "ee_svdde",
    "m_used",
];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: malformed row {row}: {reason}")]
    Malformed {
        path: PathBuf,
        row: usize,
        reason: String,
    },
}

/// Everything needed to regenerate an output file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    /// Fully resolved configuration, defaults included.
    pub config: SystemConfig,
    pub tool_version: String,
    /// Subcommand and its arguments, e.g. `sweep-users --k-min 4 --k-max 40 --k-step 2`.
    pub command: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(config: SystemConfig, command: impl Into<String>) -> Self {
        Self {
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            outputs: Vec::new(),
        }
    }

    /// The manifest is itself a valid config document: metadata lives in
    /// `#` comments and the resolved configuration follows.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# hpsim {}\n", self.tool_version));
        s.push_str(&format!("# command: {}\n", self.command));
        s.push_str(&format!("# timestamp: {}\n", self.timestamp));
        for o in &self.outputs {
            s.push_str(&format!("# output: {}\n", o.display()));
        }
        s.push_str(&self.config.to_kv_string());
        s
    }

    /// Path of the manifest that accompanies `output`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest");
        PathBuf::from(name)
    }

    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        fs::write(path, self.to_text()).map_err(|source| OutputError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Float formatting used in every CSV cell.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(axis: SweepAxis, p: &SweepPoint) -> Vec<String> {
    vec![
        axis.name().to_string(),
        p.axis_value.to_string(),
        p.trials.to_string(),
        fmt_float(p.error_f2.mean),
        fmt_float(p.error_f2.se),
        fmt_float(p.thr_zf.mean),
        fmt_float(p.thr_svdde.mean),
        fmt_float(p.ptot_zf.mean),
        fmt_float(p.ptot_svdde.mean),
        fmt_float(p.ee_zf.mean),
        fmt_float(p.ee_svdde.mean),
        p.m_used.to_string(),
    ]
}

/// Writes the sweep as CSV to any sink.
pub fn write_csv<W: io::Write>(result: &SweepResult, sink: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for p in &result.points {
        w.write_record(row(result.axis, p))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the sweep as CSV to `path` and the manifest to `<path>.manifest`.
pub fn emit_csv(result: &SweepResult, manifest: &RunManifest, path: &Path) -> Result<(), OutputError> {
    let file = fs::File::create(path).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(result, io::BufWriter::new(file)).map_err(|source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut manifest = manifest.clone();
    if !manifest.outputs.iter().any(|o| o == path) {
        manifest.outputs.push(path.to_path_buf());
    }
    manifest.write(&RunManifest::path_for(path))
}

/// One parsed CSV row. Only means are stored for throughput, power and EE.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub axis: String,
    pub axis_value: usize,
    pub trials: usize,
    pub err_f2_mean: f64,
    pub err_f2_se: f64,
    pub thr_zf_bps: f64,
    pub thr_svdde_bps: f64,
    pub ptot_zf_w: f64,
    pub ptot_svdde_w: f64,
    pub ee_zf: f64,
    pub ee_svdde: f64,
    pub m_used: usize,
}

impl CsvRow {
    /// The values `emit_csv` writes for `p`.
    pub fn from_point(axis: SweepAxis, p: &SweepPoint) -> Self {
        let m = |s: &Stat| s.mean;
        Self {
            axis: axis.name().to_string(),
            axis_value: p.axis_value,
            trials: p.trials,
            err_f2_mean: p.error_f2.mean,
            err_f2_se: p.error_f2.se,
            thr_zf_bps: m(&p.thr_zf),
            thr_svdde_bps: m(&p.thr_svdde),
            ptot_zf_w: m(&p.ptot_zf),
            ptot_svdde_w: m(&p.ptot_svdde),
            ee_zf: m(&p.ee_zf),
            ee_svdde: m(&p.ee_svdde),
            m_used: p.m_used,
        }
    }
}

/// Parses a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, OutputError> {
    let csv_err = |source| OutputError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(OutputError::Malformed {
            path: path.to_path_buf(),
            row: 0,
            reason: "unexpected header".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let bad = |reason: String| OutputError::Malformed {
            path: path.to_path_buf(),
            row: i + 1,
            reason,
        };
        let f = |j: usize| -> Result<f64, OutputError> {
            rec[j].parse().map_err(|e| bad(format!("{}: {e}", CSV_HEADER[j])))
        };
        let u = |j: usize| -> Result<usize, OutputError> {
            rec[j].parse().map_err(|e| bad(format!("{}: {e}", CSV_HEADER[j])))
        };
        rows.push(CsvRow {
            axis: rec[0].to_string(),
            axis_value: u(1)?,
            trials: u(2)?,
            err_f2_mean: f(3)?,
            err_f2_se: f(4)?,
            thr_zf_bps: f(5)?,
            thr_svdde_bps: f(6)?,
            ptot_zf_w: f(7)?,
            ptot_svdde_w: f(8)?,
            ee_zf: f(9)?,
            ee_svdde: f(10)?,
            m_used: u(11)?,
        });
    }
    Ok(rows)
}

/// Writes `(m, error)` pairs for a single-realization truncation curve.
pub fn emit_error_curve(points: &[(usize, f64)], path: &Path) -> Result<(), OutputError> {
    let io_err = |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    writeln!(f, "m,err_f2").map_err(io_err)?;
    for (m, e) in points {
        writeln!(f, "{m},{}", fmt_float(*e)).map_err(io_err)?;
    }
    f.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::sweep_users;

    fn tiny() -> SystemConfig {
        SystemConfig {
            n_tx: 16,
            n_rf: 6,
            n_users: 3,
            n_paths: 4,
            trials: 3,
            ..Default::default()
        }
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0 / 3.0, 6.02e23, -1e-300, f64::MAX, 5e-324] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_float(2.0), "2.0000000000000000e0");
    }

    #[test]
    fn single_point_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let cfg = tiny();
        let res = sweep_users(&cfg, &[2]).unwrap();
        emit_csv(&res, &RunManifest::new(cfg.clone(), "test"), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("n_users,2,3,"));

        let rows = read_csv(&path).unwrap();
        assert_eq!(rows, vec![CsvRow::from_point(res.axis, &res.points[0])]);

        let manifest = fs::read_to_string(RunManifest::path_for(&path)).unwrap();
        assert_eq!(SystemConfig::parse_str(&manifest).unwrap(), cfg);
        assert!(manifest.contains("# output: "));
    }

    #[test]
    fn unwritable_path_reports_context() {
        let res = sweep_users(&tiny(), &[2]).unwrap();
        let path = Path::new("/nonexistent-dir/x.csv");
        let err = emit_csv(&res, &RunManifest::new(tiny(), "t"), path).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
