//! Cellwise outlier detection: every cell is predicted from correlated
//! columns in the same row, and cells whose robustly standardized prediction
//! residual is extreme get flagged. Output is a renderable cell map.
//!
//! This is a compact approximation of the DetectDeviatingCells idea:
//! median/MAD standardization, pre-trimmed Pearson as the robust bivariate
//! correlation, |corr|-weighted predictions, and a chi-squared(1) cutoff.
//! It deliberately omits the original's imputation/refinement iterations.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::stats::{chi2_1_quantile_sqrt, mad_scale, median};
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DdcConfig {
    /// Minimum |robust correlation| for a column to predict another.
    pub corr_threshold: f64,
    /// Quantile of chi-squared(1) whose square root is the flag cutoff.
    pub flag_quantile: f64,
    /// At most this many predictor columns per target column.
    pub max_predictors: usize,
    /// Floor for robust scales, so constant columns stay well-defined.
    pub min_mad: f64,
    /// Predictor cells with |z| beyond this are ignored when predicting
    /// (same spirit as the correlation pre-trim); keeps one gross cell from
    /// contaminating the predictions of its whole row.
    pub univariate_trim: f64,
}

impl Default for DdcConfig {
    fn default() -> Self {
        Self {
            corr_threshold: 0.5,
            flag_quantile: 0.99,
            max_predictors: 10,
            min_mad: 1e-8,
            univariate_trim: 3.0,
        }
    }
}

impl DdcConfig {
    fn validate(&self) -> Result<()> {
        if !(self.corr_threshold > 0.0 && self.corr_threshold < 1.0) {
            return Err(Error::InvalidArgument(
                "corr_threshold must lie strictly between 0 and 1".into(),
            ));
        }
        if !(self.flag_quantile > 0.5 && self.flag_quantile < 1.0) {
            return Err(Error::InvalidArgument(
                "flag_quantile must lie strictly between 0.5 and 1".into(),
            ));
        }
        if self.max_predictors == 0 {
            return Err(Error::InvalidArgument("max_predictors must be positive".into()));
        }
        if !(self.min_mad > 0.0) {
            return Err(Error::InvalidArgument("min_mad must be positive".into()));
        }
        if !(self.univariate_trim > 0.0) {
            return Err(Error::InvalidArgument("univariate_trim must be positive".into()));
        }
        Ok(())
    }

    /// Flag cutoff: `sqrt(chi2_1(flag_quantile))`.
    pub fn cutoff(&self) -> f64 {
        chi2_1_quantile_sqrt(self.flag_quantile)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellFlag {
    Normal,
    High,
    Low,
    Missing,
}

impl CellFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            CellFlag::Normal => "normal",
            CellFlag::High => "high",
            CellFlag::Low => "low",
            CellFlag::Missing => "missing",
        }
    }

    fn glyph(self) -> char {
        match self {
            CellFlag::Normal => '.',
            CellFlag::High => '+',
            CellFlag::Low => '-',
            CellFlag::Missing => '?',
        }
    }

    fn color(self) -> &'static str {
        match self {
            CellFlag::Normal => "#ffe97f",
            CellFlag::High => "#e8000b",
            CellFlag::Low => "#1f77b4",
            CellFlag::Missing => "#ffffff",
        }
    }
}

/// Full result of a cellwise detection pass.
#[derive(Debug, Clone)]
pub struct CellMap {
    pub flags: Vec<Vec<CellFlag>>,
    /// `(z - predicted) / s_j` with `s_j` the robust scale of column j's
    /// prediction residuals; NaN for missing cells.
    pub standardized_residuals: Array2<f64>,
    pub predicted: Array2<f64>,
    /// Mean of squared residuals over each row's finite cells.
    pub row_scores: Array1<f64>,
    pub cutoff: f64,
    pub row_ids: Vec<String>,
    pub col_names: Vec<String>,
}

impl CellMap {
    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_names.len()
    }

    pub fn n_flagged(&self) -> usize {
        self.flags
            .iter()
            .flatten()
            .filter(|f| matches!(f, CellFlag::High | CellFlag::Low))
            .count()
    }

    /// One CSV line per cell: `row,col,flag,residual` (residual empty for
    /// missing cells).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "row,col,flag,residual")?;
        for i in 0..self.n_rows() {
            for j in 0..self.n_cols() {
                let r = self.standardized_residuals[[i, j]];
                let printed = if r.is_nan() { String::new() } else { r.to_string() };
                writeln!(
                    w,
                    "{},{},{},{}",
                    self.row_ids[i],
                    self.col_names[j],
                    self.flags[i][j].as_str(),
                    printed
                )?;
            }
        }
        Ok(())
    }
}

/// Robust column standardization: median center, `1.4826 * MAD` scale floored
/// at `min_mad`. Missing (NaN) entries propagate; the column must have at
/// least 3 finite values.
pub fn robust_standardize(column: &[f64], min_mad: f64) -> Result<(f64, f64, Vec<f64>)> {
    let finite = column.iter().filter(|v| v.is_finite()).count();
    if finite < 3 {
        return Err(Error::Invalid(format!(
            "column needs at least 3 finite values for robust standardization, got {finite}"
        )));
    }
    let center = median(column).expect("at least 3 finite values");
    let scale = mad_scale(column, center, min_mad).expect("at least 3 finite values");
    let z = column.iter().map(|v| (v - center) / scale).collect();
    Ok((center, scale, z))
}

/// Robust bivariate correlation of two standardized columns: drop pairs where
/// either value is missing or `|z| > 3`, then plain Pearson on the survivors,
/// clamped to `[-1, 1]`. Fewer than 10 clean pairs makes the pair unusable
/// (correlation 0).
pub fn robust_bivariate_corr(zj: &[f64], zk: &[f64]) -> f64 {
    const TRIM: f64 = 3.0;
    const MIN_PAIRS: usize = 10;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (a, b) in zj.iter().zip(zk.iter()) {
        if a.is_finite() && b.is_finite() && a.abs() <= TRIM && b.abs() <= TRIM {
            xs.push(*a);
            ys.push(*b);
        }
    }
    if xs.len() < MIN_PAIRS {
        return 0.0;
    }
    pearson(&xs, &ys).clamp(-1.0, 1.0)
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// Predict every standardized cell from its column's predictor set: the up
/// to `max_predictors` other columns with `|corr| >= corr_threshold`, each
/// contributing slope `corr` and weight `|corr|`. Predictor cells that are
/// missing or beyond the univariate trim are skipped; with nothing usable
/// the prediction falls back to the column center (0).
pub fn predict_cells(z: &Array2<f64>, config: &DdcConfig) -> Result<Array2<f64>> {
    config.validate()?;
    let (n, p) = z.dim();

    // Pairwise robust correlations, computed in parallel and merged in a
    // fixed order.
    let cols: Vec<Vec<f64>> = (0..p).map(|j| z.column(j).to_vec()).collect();
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|j| ((j + 1)..p).map(move |k| (j, k)))
        .collect();
    let corr_values: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, k)| robust_bivariate_corr(&cols[j], &cols[k]))
        .collect();
    let mut corr = Array2::zeros((p, p));
    for (idx, &(j, k)) in pairs.iter().enumerate() {
        corr[[j, k]] = corr_values[idx];
        corr[[k, j]] = corr_values[idx];
    }

    // Predictor sets: strongest |corr| first, ties toward the lower index.
    let predictors: Vec<Vec<(usize, f64)>> = (0..p)
        .map(|j| {
            let mut cand: Vec<(usize, f64)> = (0..p)
                .filter(|&k| k != j && corr[[j, k]].abs() >= config.corr_threshold)
                .map(|k| (k, corr[[j, k]]))
                .collect();
            cand.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
            cand.truncate(config.max_predictors);
            cand
        })
        .collect();

    let mut predicted = Array2::zeros((n, p));
    for i in 0..n {
        for j in 0..p {
            let mut num = 0.0;
            let mut den = 0.0;
            for &(k, c) in &predictors[j] {
                let zik = z[[i, k]];
                if zik.is_finite() && zik.abs() <= config.univariate_trim {
                    num += c.abs() * (c * zik);
                    den += c.abs();
                }
            }
            predicted[[i, j]] = if den > 0.0 { num / den } else { 0.0 };
        }
    }
    Ok(predicted)
}

/// Turn observed and predicted standardized matrices into flags. The
/// residual of a cell is its prediction difference divided by the robust
/// (median/MAD) scale of that column's differences; cells beyond
/// `sqrt(chi2_1(flag_quantile))` in either direction are flagged.
pub fn flag_cells(
    z: &Array2<f64>,
    predicted: &Array2<f64>,
    row_ids: &[String],
    col_names: &[String],
    config: &DdcConfig,
) -> Result<CellMap> {
    config.validate()?;
    if z.dim() != predicted.dim() {
        return Err(Error::DimensionMismatch {
            context: "predicted matrix".into(),
            expected: z.len(),
            actual: predicted.len(),
        });
    }
    let (n, p) = z.dim();
    let cutoff = config.cutoff();

    let mut residuals = Array2::from_elem((n, p), f64::NAN);
    for j in 0..p {
        let diffs: Vec<f64> = (0..n).map(|i| z[[i, j]] - predicted[[i, j]]).collect();
        let center = median(&diffs).unwrap_or(0.0);
        let scale = mad_scale(&diffs, center, config.min_mad).unwrap_or(config.min_mad);
        for i in 0..n {
            if diffs[i].is_finite() {
                residuals[[i, j]] = diffs[i] / scale;
            }
        }
    }

    let mut flags = vec![vec![CellFlag::Normal; p]; n];
    let mut row_scores = Array1::zeros(n);
    for i in 0..n {
        let mut sum = 0.0;
        let mut count = 0usize;
        for j in 0..p {
            let r = residuals[[i, j]];
            flags[i][j] = if r.is_nan() {
                CellFlag::Missing
            } else if r > cutoff {
                CellFlag::High
            } else if r < -cutoff {
                CellFlag::Low
            } else {
                CellFlag::Normal
            };
            if r.is_finite() {
                sum += r * r;
                count += 1;
            }
        }
        row_scores[i] = if count > 0 { sum / count as f64 } else { 0.0 };
    }

    Ok(CellMap {
        flags,
        standardized_residuals: residuals,
        predicted: predicted.clone(),
        row_scores,
        cutoff,
        row_ids: row_ids.to_vec(),
        col_names: col_names.to_vec(),
    })
}

/// End-to-end cellwise detection on a dataset (NaN cells allowed here).
pub fn detect(data: &Dataset, config: &DdcConfig) -> Result<CellMap> {
    config.validate()?;
    let (n, p) = data.x().dim();
    if n == 0 || p == 0 {
        return Err(Error::Invalid("empty dataset".into()));
    }
    let mut z = Array2::zeros((n, p));
    for j in 0..p {
        let col = data.x().column(j).to_vec();
        let (_, _, zs) = robust_standardize(&col, config.min_mad).map_err(|e| {
            Error::Invalid(format!("column '{}': {e}", data.col_names()[j]))
        })?;
        for i in 0..n {
            z[[i, j]] = zs[i];
        }
    }
    let predicted = predict_cells(&z, config)?;
    flag_cells(&z, &predicted, data.row_ids(), data.col_names(), config)
}

/// Rendering format for a cell map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Svg,
    Txt,
}

/// Render a subset of the map. `rows`/`cols` default to the full map in
/// stored order; the given order is preserved in the output.
pub fn render_cell_map(
    map: &CellMap,
    rows: Option<&[usize]>,
    cols: Option<&[usize]>,
    format: RenderFormat,
) -> Result<String> {
    let all_rows: Vec<usize> = (0..map.n_rows()).collect();
    let all_cols: Vec<usize> = (0..map.n_cols()).collect();
    let rows = rows.unwrap_or(&all_rows);
    let cols = cols.unwrap_or(&all_cols);
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptySelection("cell map render subset"));
    }
    for &i in rows {
        if i >= map.n_rows() {
            return Err(Error::Invalid(format!("row index {i} out of range")));
        }
    }
    for &j in cols {
        if j >= map.n_cols() {
            return Err(Error::Invalid(format!("column index {j} out of range")));
        }
    }
    Ok(match format {
        RenderFormat::Txt => render_txt(map, rows, cols),
        RenderFormat::Svg => render_svg(map, rows, cols),
    })
}

fn render_txt(map: &CellMap, rows: &[usize], cols: &[usize]) -> String {
    let mut out = String::new();
    let names: Vec<&str> = cols.iter().map(|&j| map.col_names[j].as_str()).collect();
    let _ = writeln!(out, "# columns: {}", names.join(" "));
    let _ = writeln!(out, "# legend: + high, - low, . normal, ? missing");
    let width = rows
        .iter()
        .map(|&i| map.row_ids[i].len())
        .max()
        .unwrap_or(0);
    for &i in rows {
        let glyphs: String = cols.iter().map(|&j| map.flags[i][j].glyph()).collect();
        let _ = writeln!(out, "{:>width$}  {}", map.row_ids[i], glyphs, width = width);
    }
    out
}

fn render_svg(map: &CellMap, rows: &[usize], cols: &[usize]) -> String {
    const CELL: usize = 12;
    const FONT: usize = 9;
    let left = 6 * rows
        .iter()
        .map(|&i| map.row_ids[i].len())
        .max()
        .unwrap_or(1)
        + 8;
    let top = 6 * cols
        .iter()
        .map(|&j| map.col_names[j].len())
        .max()
        .unwrap_or(1)
        + 8;
    let width = left + cols.len() * CELL + 4;
    let height = top + rows.len() * CELL + 4;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(out, "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>");
    for (cx, &j) in cols.iter().enumerate() {
        let x = left + cx * CELL + CELL / 2 + 2;
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"{FONT}\" font-family=\"monospace\" text-anchor=\"start\" transform=\"rotate(-90 {x} {y})\">{}</text>",
            escape_xml(&map.col_names[j]),
            y = top - 4,
        );
    }
    for (ry, &i) in rows.iter().enumerate() {
        let y = top + ry * CELL + CELL - 3;
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"{FONT}\" font-family=\"monospace\" text-anchor=\"end\">{}</text>",
            escape_xml(&map.row_ids[i]),
            x = left - 4,
        );
        for (cx, &j) in cols.iter().enumerate() {
            let x = left + cx * CELL;
            let ytop = top + ry * CELL;
            let _ = writeln!(
                out,
                "<rect x=\"{x}\" y=\"{ytop}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\" stroke=\"#999999\" stroke-width=\"0.5\"/>",
                map.flags[i][j].color()
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
