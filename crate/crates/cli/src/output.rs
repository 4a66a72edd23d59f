use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use prandtl4_core::Profile;

/// Full double precision: 17 significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Header row then one record per row, every number at full precision.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `y, a, a_y, a_yy`.
pub fn write_profile(path: &Path, a: &Profile) -> anyhow::Result<()> {
    let ay = a.derivative(1);
    let ayy = a.derivative(2);
    let grid = a.grid();
    let rows = (0..a.len()).map(|i| vec![grid.node(i), a.values()[i], ay.values()[i], ayy.values()[i]]);
    write_csv(path, &["y", "a", "a_y", "a_yy"], rows)
}
