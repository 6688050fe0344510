//! Log–log slope fitting of error curves: estimates the convergence
//! exponent `p` in `err ≈ α t^p` for each error column of a CSV.

use std::path::Path;

use serde::Serialize;

use crate::output::fmt_f64;
use crate::RunError;

/// Errors at or below this value sit on the double-precision floor and are
/// excluded from fits.
pub const ERROR_FLOOR: f64 = 1e-13;

/// Minimum usable points for a least-squares fit.
pub const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub series: String,
    pub status: FitStatus,
    pub n_points: usize,
    pub slope: Option<f64>,
    pub stderr: Option<f64>,
    /// 95% confidence band around the slope.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// Fewer than [`MIN_POINTS`] usable points: the curve sits at the
    /// numerical floor over the window (e.g. an exactly invariant
    /// subspace) or the window is too narrow.
    SkippedFloor,
}

/// Least squares on `(ln t, ln err)` over `t ∈ [t_lo, t_hi]`, ignoring
/// points at or below the error floor.
pub fn fit_slope(
    points: &[(f64, f64)],
    t_lo: f64,
    t_hi: f64,
) -> (FitStatus, usize, Option<(f64, f64)>) {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(t, err)| t >= t_lo && t <= t_hi && err > ERROR_FLOOR && t > 0.0)
        .map(|&(t, e)| (t.ln(), e.ln()))
        .collect();
    let n = usable.len();
    if n < MIN_POINTS {
        return (FitStatus::SkippedFloor, n, None);
    }
    let nf = n as f64;
    let mean_x = usable.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = usable.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = usable
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (FitStatus::Ok, n, Some((slope, stderr)))
}

/// A parsed error-curve CSV: a `t` column plus one column per series.
pub struct ErrorTable {
    pub series_names: Vec<String>,
    pub times: Vec<f64>,
    /// `columns[s][i]` is the error of series `s` at `times[i]`.
    pub columns: Vec<Vec<f64>>,
}

pub fn read_error_csv(path: &Path) -> Result<ErrorTable, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| RunError::Config(format!("{}: empty file", path.display())))?;
    let names: Vec<&str> = header.split(',').collect();
    let t_idx = names
        .iter()
        .position(|&n| n == "t")
        .ok_or_else(|| RunError::Config(format!("{}: no 't' column", path.display())))?;
    let err_cols: Vec<(usize, String)> = names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.starts_with("err"))
        .map(|(i, n)| (i, n.to_string()))
        .collect();
    if err_cols.is_empty() {
        return Err(RunError::Config(format!(
            "{}: no error columns (err*)",
            path.display()
        )));
    }
    let mut times = Vec::new();
    let mut columns = vec![Vec::new(); err_cols.len()];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize| -> Result<f64, RunError> {
            cells
                .get(idx)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    RunError::Config(format!(
                        "{}: line {}: bad cell {idx}",
                        path.display(),
                        lineno + 2
                    ))
                })
        };
        times.push(parse(t_idx)?);
        for (slot, (idx, _)) in err_cols.iter().enumerate() {
            columns[slot].push(parse(*idx)?);
        }
    }
    Ok(ErrorTable {
        series_names: err_cols.into_iter().map(|(_, n)| n).collect(),
        times,
        columns,
    })
}

/// Fits every error column of the CSV and returns one record per series.
pub fn fit_order_slopes(path: &Path, t_lo: f64, t_hi: f64) -> Result<Vec<SlopeFit>, RunError> {
    let table = read_error_csv(path)?;
    let mut fits = Vec::new();
    for (name, col) in table.series_names.iter().zip(table.columns.iter()) {
        let pts: Vec<(f64, f64)> = table
            .times
            .iter()
            .copied()
            .zip(col.iter().copied())
            .collect();
        let (status, n, est) = fit_slope(&pts, t_lo, t_hi);
        let (slope, stderr) = match est {
            Some((s, se)) => (Some(s), Some(se)),
            None => (None, None),
        };
        fits.push(SlopeFit {
            series: name.clone(),
            status,
            n_points: n,
            slope,
            stderr,
            ci_low: slope.zip(stderr).map(|(s, se)| s - 1.96 * se),
            ci_high: slope.zip(stderr).map(|(s, se)| s + 1.96 * se),
        });
    }
    Ok(fits)
}

pub fn slopes_csv_rows(fits: &[SlopeFit]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = vec![
        "series".to_string(),
        "status".to_string(),
        "n_points".to_string(),
        "slope".to_string(),
        "stderr".to_string(),
        "ci_low".to_string(),
        "ci_high".to_string(),
    ];
    let rows = fits
        .iter()
        .map(|f| {
            let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            vec![
                f.series.clone(),
                match f.status {
                    FitStatus::Ok => "ok".to_string(),
                    FitStatus::SkippedFloor => "skipped_floor".to_string(),
                },
                f.n_points.to_string(),
                opt(f.slope),
                opt(f.stderr),
                opt(f.ci_low),
                opt(f.ci_high),
            ]
        })
        .collect();
    (header, rows)
}
