//! Report emission: `report.json`, the resolved `config.json`, `data.csv` and one
//! two-column file per curve.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::study::RunOutput;

fn pretty<S: serde::Serialize>(value: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes every artifact of a run into `dir` and returns the paths in write order.
/// The bytes depend only on the run's content.
pub fn emit_report(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();

    let report = dir.join("report.json");
    fs::write(&report, pretty(&out.report)?)?;
    paths.push(report);

    let config = dir.join("config.json");
    fs::write(&config, pretty(&out.report.config_echo)?)?;
    paths.push(config);

    if !out.rows.is_empty() {
        let csv_path = dir.join("data.csv");
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Io(e.into()))?;
        for row in &out.rows {
            w.serialize(row).map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        paths.push(csv_path);
    }

    for plot in &out.plots {
        let path = dir.join(format!("{}.dat", plot.name));
        let mut f = fs::File::create(&path)?;
        writeln!(f, "# {} {}", plot.columns[0], plot.columns[1])?;
        for [x, y] in &plot.points {
            writeln!(f, "{x:e} {y:e}")?;
        }
        paths.push(path);
    }
    Ok(paths)
}
