//! CSV emitters for the observables. Column layouts are fixed; every float
//! is written with 17 significant digits so repeated runs produce
//! byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Result as IoResult, Write};
use std::path::Path;

use crate::evolve::{ScanPoint, StateVector};
use crate::husimi::HusimiGrid;
use crate::scalar::Real;
use crate::spectrum::QeSpectrum;

/// 17-significant-digit float formatting shared by all writers.
pub fn fmt17<T: Real>(v: T) -> String {
    format!("{:.16e}", v.to_f64().expect("scalar converts to f64"))
}

fn create(path: &Path) -> IoResult<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// `n,prob` rows of the level occupations of a state.
pub fn write_snapshot<T: Real>(path: &Path, state: &StateVector<T>) -> IoResult<()> {
    let mut w = create(path)?;
    writeln!(w, "n,prob")?;
    for (n, p) in state.probabilities().iter().enumerate() {
        writeln!(w, "{n},{}", fmt17(*p))?;
    }
    w.flush()
}

/// `t,P1,...,Pk` rows of per-cell probabilities over time.
pub fn write_cell_series<T: Real>(path: &Path, times: &[T], rows: &[Vec<T>]) -> IoResult<()> {
    let mut w = create(path)?;
    let k = rows.first().map_or(0, Vec::len);
    let header: Vec<String> = (1..=k).map(|i| format!("P{i}")).collect();
    writeln!(w, "t,{}", header.join(","))?;
    for (t, row) in times.iter().zip(rows) {
        let cells: Vec<String> = row.iter().map(|&p| fmt17(p)).collect();
        writeln!(w, "{},{}", fmt17(*t), cells.join(","))?;
    }
    w.flush()
}

/// `cell,p_mean` rows of a time-averaged cell profile (cells are 1-based).
pub fn write_cell_profile<T: Real>(path: &Path, profile: &[T]) -> IoResult<()> {
    let mut w = create(path)?;
    writeln!(w, "cell,p_mean")?;
    for (i, p) in profile.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, fmt17(*p))?;
    }
    w.flush()
}

/// `inv_h,penetration` rows of a penetration scan; skipped grid points are
/// omitted.
pub fn write_scan<T: Real>(path: &Path, points: &[ScanPoint<T>]) -> IoResult<()> {
    let mut w = create(path)?;
    writeln!(w, "inv_h,penetration")?;
    for point in points {
        if let Some(p) = point.penetration {
            writeln!(w, "{},{}", fmt17(point.inv_h), fmt17(p))?;
        }
    }
    w.flush()
}

/// `q,energy` rows of the sorted spectrum.
pub fn write_spectrum<T: Real>(path: &Path, spectrum: &QeSpectrum<T>) -> IoResult<()> {
    let mut w = create(path)?;
    writeln!(w, "q,energy")?;
    for (q, e) in spectrum.eigenvalues().iter().enumerate() {
        writeln!(w, "{q},{}", fmt17(*e))?;
    }
    w.flush()
}

/// Eigenvector matrix, one row per level: `n,q0,...,q{N-1}`.
pub fn write_eigenvectors<T: Real>(path: &Path, spectrum: &QeSpectrum<T>) -> IoResult<()> {
    let mut w = create(path)?;
    let n = spectrum.len();
    let header: Vec<String> = (0..n).map(|q| format!("q{q}")).collect();
    writeln!(w, "n,{}", header.join(","))?;
    for k in 0..n {
        let row: Vec<String> = (0..n)
            .map(|q| fmt17(spectrum.eigenvectors()[(k, q)]))
            .collect();
        writeln!(w, "{k},{}", row.join(","))?;
    }
    w.flush()
}

/// Husimi grid as `x,p,q` rows, preceded by `#`-prefixed metadata lines
/// (caller-supplied parameter description, normalization defect, iso-levels).
pub fn write_husimi<T: Real>(
    path: &Path,
    grid: &HusimiGrid<T>,
    levels: &[T],
    metadata: &[String],
) -> IoResult<()> {
    let mut w = create(path)?;
    for line in metadata {
        writeln!(w, "# {line}")?;
    }
    writeln!(
        w,
        "# normalization_defect = {}",
        fmt17(grid.normalization_defect())
    )?;
    if !levels.is_empty() {
        let l: Vec<String> = levels.iter().map(|&v| fmt17(v)).collect();
        writeln!(w, "# iso_levels = {}", l.join(" "))?;
    }
    writeln!(w, "x,p,q")?;
    let coords = grid.coords();
    for (i, &x) in coords.iter().enumerate() {
        for (j, &p) in coords.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                fmt17(x),
                fmt17(p),
                fmt17(grid.values()[(i, j)])
            )?;
        }
    }
    w.flush()
}
