//! Repeated stratified k-fold cross-validation over an (alpha, lambda) grid,
//! scoring held-out mean deviance, for the classical and the robust
//! estimator.

use crate::dataset::Dataset;
use crate::enet::{fit_enet_path, lambda_grid, SolverConfig};
use crate::error::{Error, Result};
use crate::lts::{fit_enet_lts_path, pearson_residual, LtsConfig};
use crate::model::{deviance, Coefficients};
use crate::stats::derive_seed;
use ndarray::Array1;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    Classical,
    Robust,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvConfig {
    pub k_folds: usize,
    pub n_repeats: usize,
    pub alpha_grid: Vec<f64>,
    pub n_lambda: usize,
    pub lambda_ratio: f64,
    pub stratified: bool,
    pub rng_seed: u64,
    pub estimator: Estimator,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k_folds: 5,
            n_repeats: 10,
            alpha_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            n_lambda: 40,
            lambda_ratio: 0.01,
            stratified: true,
            rng_seed: 0,
            estimator: Estimator::Classical,
        }
    }
}

impl CvConfig {
    fn validate(&self, n: usize) -> Result<()> {
        if self.k_folds < 2 {
            return Err(Error::InvalidArgument("k_folds must be at least 2".into()));
        }
        if self.k_folds > n {
            return Err(Error::InvalidArgument(format!(
                "k_folds = {} exceeds the number of rows {n}",
                self.k_folds
            )));
        }
        if self.n_repeats == 0 {
            return Err(Error::InvalidArgument("n_repeats must be positive".into()));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::EmptySelection("alpha grid"));
        }
        if self
            .alpha_grid
            .iter()
            .any(|a| !a.is_finite() || !(0.0..=1.0).contains(a))
        {
            return Err(Error::InvalidArgument(
                "alpha grid values must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One (alpha, lambda) grid point with its pooled score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvCell {
    pub alpha: f64,
    pub lambda: f64,
    /// Mean of the per-fold held-out mean deviances; `None` when every fold
    /// failed for this cell.
    pub mean_deviance: Option<f64>,
    /// Sample SD over the per-fold scores (0 when fewer than 2 scores).
    pub sd_deviance: f64,
    /// Nonzero coefficients of the full-data fit at this grid point.
    pub n_nonzero: usize,
    /// Number of fold scores that entered the mean.
    pub n_scores: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvResult {
    pub cells: Vec<CvCell>,
    pub best_alpha: f64,
    pub best_lambda: f64,
    /// Per repeat, per cell: mean of that repeat's fold scores (NaN when the
    /// repeat produced no score for the cell).
    pub per_repeat_scores: Vec<Vec<f64>>,
    pub k_folds: usize,
    pub n_repeats: usize,
    pub estimator: Estimator,
    pub warnings: Vec<String>,
}

impl CvResult {
    /// CV table as CSV: `alpha,lambda,mean_deviance,sd_deviance,n_nonzero`.
    /// Cells whose every fold failed are written with an empty mean.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "alpha,lambda,mean_deviance,sd_deviance,n_nonzero")?;
        for c in &self.cells {
            let mean = c
                .mean_deviance
                .map(|m| m.to_string())
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{}",
                c.alpha, c.lambda, mean, c.sd_deviance, c.n_nonzero
            )?;
        }
        Ok(())
    }
}

/// Deal rows into `k` folds. Returns a fold id in `0..k` per row. With
/// stratification each class is shuffled and dealt round-robin, continuing
/// the deal across classes so fold sizes differ by at most one both overall
/// and within each class.
pub fn make_folds(
    y: &Array1<f64>,
    k: usize,
    stratified: bool,
    seed: u64,
) -> Result<Vec<usize>> {
    let n = y.len();
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!(
            "fold count {k} must lie in [2, {n}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; n];
    if stratified {
        let mut offset = 0usize;
        for class in [0.0, 1.0] {
            let mut rows: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
            if rows.len() < k {
                return Err(Error::InvalidArgument(format!(
                    "stratified folding needs at least {k} rows of class {class}, got {}",
                    rows.len()
                )));
            }
            rows.shuffle(&mut rng);
            for (j, &i) in rows.iter().enumerate() {
                assignment[i] = (offset + j) % k;
            }
            offset = (offset + rows.len()) % k;
        }
    } else {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        for (j, &i) in rows.iter().enumerate() {
            assignment[i] = j % k;
        }
    }
    Ok(assignment)
}

/// Score matrix of one (repeat, fold, alpha) job: held-out mean deviance per
/// lambda, or an error message covering the whole path.
struct JobScores {
    repeat: usize,
    alpha_idx: usize,
    scores: std::result::Result<Vec<f64>, String>,
}

fn held_out_mean_deviance(
    coefs: &Coefficients,
    test: &Dataset,
    exclude: Option<&[bool]>,
) -> f64 {
    let y = test.require_y().expect("CV data is labeled");
    let eta = coefs.linear_predictor(test.x());
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..y.len() {
        if exclude.map_or(false, |e| e[i]) {
            continue;
        }
        sum += deviance(eta[i], y[i]);
        count += 1;
    }
    if count == 0 {
        // Every held-out row was flagged; fall back to all of them rather
        // than scoring on an empty set.
        let all: f64 = eta
            .iter()
            .zip(y.iter())
            .map(|(e, yi)| deviance(*e, *yi))
            .sum();
        return all / y.len() as f64;
    }
    sum / count as f64
}

/// Run repeated stratified CV over the (alpha, lambda) grid and pick the
/// best cell. The lambda path of each alpha is derived once from the full
/// data, so every fold scores the same grid.
///
/// Robust scoring: the training fit is the reweighted trimmed estimator, and
/// a held-out row is excluded from the fold score when the training fit's
/// reweighting criterion (raw-fit residual at or beyond the cutoff) flags it.
pub fn cross_validate(
    data: &Dataset,
    cv: &CvConfig,
    lts: Option<&LtsConfig>,
    solver: &SolverConfig,
) -> Result<CvResult> {
    data.require_complete()?;
    let y = data.require_y()?.clone();
    cv.validate(data.n_rows())?;
    let lts_base = match (cv.estimator, lts) {
        (Estimator::Robust, Some(cfg)) => Some(cfg.clone()),
        (Estimator::Robust, None) => Some(LtsConfig::default()),
        (Estimator::Classical, _) => None,
    };

    // Per-alpha lambda grids from the full data.
    let mut lambda_grids = Vec::with_capacity(cv.alpha_grid.len());
    for &alpha in &cv.alpha_grid {
        lambda_grids.push(lambda_grid(
            data,
            alpha,
            None,
            cv.n_lambda,
            cv.lambda_ratio,
            solver,
        )?);
    }

    // Full-data fits provide the per-cell sparsity column.
    let mut n_nonzero: Vec<Vec<usize>> = Vec::with_capacity(cv.alpha_grid.len());
    for (a, &alpha) in cv.alpha_grid.iter().enumerate() {
        match cv.estimator {
            Estimator::Classical => {
                let path = fit_enet_path(data, alpha, None, &lambda_grids[a], solver)?;
                n_nonzero.push(path.iter().map(|f| f.coefs.n_nonzero()).collect());
            }
            Estimator::Robust => {
                let mut cfg = lts_base.clone().expect("robust estimator has a config");
                cfg.rng_seed = derive_seed(cv.rng_seed, 2_000_000 + a as u64);
                let spec = crate::model::PenaltySpec::new(alpha, lambda_grids[a][0]);
                let path = fit_enet_lts_path(data, &spec, &lambda_grids[a], &cfg, solver)?;
                n_nonzero.push(
                    path.iter()
                        .map(|f| f.reweighted_fit.coefs.n_nonzero())
                        .collect(),
                );
            }
        }
    }

    // Fold assignments per repeat, from seeds derived off the base seed.
    let folds_per_repeat: Vec<Vec<usize>> = (0..cv.n_repeats)
        .map(|r| make_folds(&y, cv.k_folds, cv.stratified, derive_seed(cv.rng_seed, r as u64)))
        .collect::<Result<_>>()?;

    cv_over_folds(
        data,
        cv,
        lts_base.as_ref(),
        solver,
        &lambda_grids,
        &n_nonzero,
        &folds_per_repeat,
    )
}

/// Inner CV driver with explicit fold assignments (one vector per repeat).
/// Split out so invariance tests can remap folds under row permutations.
pub(crate) fn cv_over_folds(
    data: &Dataset,
    cv: &CvConfig,
    lts: Option<&LtsConfig>,
    solver: &SolverConfig,
    lambda_grids: &[Vec<f64>],
    n_nonzero: &[Vec<usize>],
    folds_per_repeat: &[Vec<usize>],
) -> Result<CvResult> {
    let n_alpha = cv.alpha_grid.len();
    let k = cv.k_folds;

    // Flatten (repeat, fold, alpha) into independent jobs; rayon preserves
    // input order on collect, so aggregation below is deterministic.
    let mut jobs = Vec::with_capacity(folds_per_repeat.len() * k * n_alpha);
    for (r, folds) in folds_per_repeat.iter().enumerate() {
        for f in 0..k {
            for a in 0..n_alpha {
                jobs.push((r, f, a, folds));
            }
        }
    }

    let results: Vec<JobScores> = jobs
        .par_iter()
        .map(|&(r, f, a, folds)| {
            let scores = score_one_fold(data, cv, lts, solver, lambda_grids, r, f, a, folds);
            JobScores {
                repeat: r,
                alpha_idx: a,
                scores: scores.map_err(|e| e.to_string()),
            }
        })
        .collect();

    // Aggregate in fixed order.
    let n_lambda = cv.n_lambda;
    let n_cells = n_alpha * n_lambda;
    let mut per_cell_scores: Vec<Vec<f64>> = vec![Vec::new(); n_cells];
    let mut per_repeat_sums = vec![vec![(0.0f64, 0usize); n_cells]; folds_per_repeat.len()];
    let mut warnings = Vec::new();
    for job in &results {
        match &job.scores {
            Ok(scores) => {
                for (l, &s) in scores.iter().enumerate() {
                    let cell = job.alpha_idx * n_lambda + l;
                    per_cell_scores[cell].push(s);
                    let (sum, cnt) = &mut per_repeat_sums[job.repeat][cell];
                    *sum += s;
                    *cnt += 1;
                }
            }
            Err(msg) => warnings.push(format!(
                "repeat {}, alpha {}: fold fit failed: {msg}",
                job.repeat + 1,
                cv.alpha_grid[job.alpha_idx]
            )),
        }
    }

    let mut cells = Vec::with_capacity(n_cells);
    for a in 0..n_alpha {
        for l in 0..n_lambda {
            let cell = a * n_lambda + l;
            let scores = &per_cell_scores[cell];
            let (mean, sd) = if scores.is_empty() {
                (None, 0.0)
            } else {
                let m = scores.iter().sum::<f64>() / scores.len() as f64;
                let sd = if scores.len() > 1 {
                    (scores.iter().map(|s| (s - m) * (s - m)).sum::<f64>()
                        / (scores.len() - 1) as f64)
                        .sqrt()
                } else {
                    0.0
                };
                (Some(m), sd)
            };
            if mean.is_none() {
                warnings.push(format!(
                    "grid cell (alpha {}, lambda {}) excluded: every fold failed",
                    cv.alpha_grid[a], lambda_grids[a][l]
                ));
            }
            cells.push(CvCell {
                alpha: cv.alpha_grid[a],
                lambda: lambda_grids[a][l],
                mean_deviance: mean,
                sd_deviance: sd,
                n_nonzero: n_nonzero[a][l],
                n_scores: scores.len(),
            });
        }
    }

    let (best_alpha, best_lambda) = select_best(&cells)?;
    let per_repeat_scores = per_repeat_sums
        .into_iter()
        .map(|sums| {
            sums.into_iter()
                .map(|(sum, cnt)| if cnt == 0 { f64::NAN } else { sum / cnt as f64 })
                .collect()
        })
        .collect();

    Ok(CvResult {
        cells,
        best_alpha,
        best_lambda,
        per_repeat_scores,
        k_folds: cv.k_folds,
        n_repeats: cv.n_repeats,
        estimator: cv.estimator,
        warnings,
    })
}

#[allow(clippy::too_many_arguments)]
fn score_one_fold(
    data: &Dataset,
    cv: &CvConfig,
    lts: Option<&LtsConfig>,
    solver: &SolverConfig,
    lambda_grids: &[Vec<f64>],
    repeat: usize,
    fold: usize,
    alpha_idx: usize,
    folds: &[usize],
) -> Result<Vec<f64>> {
    let train_rows: Vec<usize> = (0..data.n_rows()).filter(|i| folds[*i] != fold).collect();
    let test_rows: Vec<usize> = (0..data.n_rows()).filter(|i| folds[*i] == fold).collect();
    let train = data.subset_rows(&train_rows)?;
    let test = data.subset_rows(&test_rows)?;
    let alpha = cv.alpha_grid[alpha_idx];
    let grid = &lambda_grids[alpha_idx];

    match cv.estimator {
        Estimator::Classical => {
            let path = fit_enet_path(&train, alpha, None, grid, solver)?;
            Ok(path
                .iter()
                .map(|fit| held_out_mean_deviance(&fit.coefs, &test, None))
                .collect())
        }
        Estimator::Robust => {
            let mut cfg = lts.cloned().unwrap_or_default();
            cfg.rng_seed = derive_seed(
                cv.rng_seed,
                1_000_000 + (repeat * cv.k_folds + fold) as u64,
            );
            let spec = crate::model::PenaltySpec::new(alpha, grid[0]);
            let path = fit_enet_lts_path(&train, &spec, grid, &cfg, solver)?;
            let y_test = test.require_y()?;
            Ok(path
                .iter()
                .map(|fit| {
                    // Exclude held-out rows the training fit's reweighting
                    // criterion would flag (raw-fit residuals vs cutoff).
                    let probs = fit.raw_fit.coefs.predict_prob(test.x());
                    let exclude: Vec<bool> = y_test
                        .iter()
                        .zip(probs.iter())
                        .map(|(yi, pi)| {
                            pearson_residual(*yi, *pi, cfg.residual_variant).abs() >= fit.cutoff
                        })
                        .collect();
                    held_out_mean_deviance(&fit.reweighted_fit.coefs, &test, Some(&exclude))
                })
                .collect())
        }
    }
}

/// Best grid cell: smallest mean deviance, ties broken toward larger lambda,
/// then larger alpha (the sparser model). Pure function of the table.
pub fn select_best(cells: &[CvCell]) -> Result<(f64, f64)> {
    let mut best: Option<&CvCell> = None;
    for c in cells {
        let Some(m) = c.mean_deviance else { continue };
        let better = match best {
            None => true,
            Some(b) => {
                let bm = b.mean_deviance.expect("best always has a score");
                match m.total_cmp(&bm) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => {
                        c.lambda > b.lambda || (c.lambda == b.lambda && c.alpha > b.alpha)
                    }
                }
            }
        };
        if better {
            best = Some(c);
        }
    }
    best.map(|c| (c.alpha, c.lambda))
        .ok_or_else(|| Error::Invalid("every cross-validation cell failed".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sigmoid;
    use ndarray::Array2;
    use rand_distr::StandardNormal;

    fn synth(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Array2::zeros((n, p));
        for i in 0..n {
            for j in 0..p {
                x[[i, j]] = rng.sample::<f64, _>(StandardNormal);
            }
        }
        let mut y = Array1::zeros(n);
        for i in 0..n {
            let eta = 1.5 * x[[i, 0]] - 1.0 * x[[i, 1]] + 0.7 * x[[i, 2]];
            y[i] = if rng.gen::<f64>() < sigmoid(eta) { 1.0 } else { 0.0 };
        }
        Dataset::from_matrix(x, Some(y)).unwrap()
    }

    #[test]
    fn folds_cover_exactly_and_balance() {
        let y = Array1::from_iter((0..10).map(|i| (i % 2) as f64));
        let folds = make_folds(&y, 5, false, 3).unwrap();
        let mut counts = [0usize; 5];
        for f in &folds {
            counts[*f] += 1;
        }
        assert_eq!(counts, [2, 2, 2, 2, 2]);

        // five 0s and five 1s, stratified: one of each per fold
        let folds = make_folds(&y, 5, true, 3).unwrap();
        for f in 0..5 {
            let rows: Vec<usize> = (0..10).filter(|&i| folds[i] == f).collect();
            assert_eq!(rows.len(), 2);
            let ones = rows.iter().filter(|&&i| y[i] == 1.0).count();
            assert_eq!(ones, 1, "fold {f}");
        }
    }

    #[test]
    fn fold_sizes_differ_by_at_most_one() {
        let data = synth(103, 3, 5);
        let y = data.require_y().unwrap();
        let folds = make_folds(y, 5, true, 11).unwrap();
        let mut counts = vec![0usize; 5];
        let mut class1 = vec![0usize; 5];
        for i in 0..103 {
            counts[folds[i]] += 1;
            if y[i] == 1.0 {
                class1[folds[i]] += 1;
            }
        }
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        assert!(class1.iter().max().unwrap() - class1.iter().min().unwrap() <= 1);
    }

    #[test]
    fn folds_are_seed_deterministic() {
        let y = Array1::from_iter((0..40).map(|i| f64::from(i % 3 == 0)));
        assert_eq!(
            make_folds(&y, 4, true, 7).unwrap(),
            make_folds(&y, 4, true, 7).unwrap()
        );
        assert_ne!(
            make_folds(&y, 4, true, 7).unwrap(),
            make_folds(&y, 4, true, 8).unwrap()
        );
    }

    #[test]
    fn stratified_rejects_small_class() {
        let y = Array1::from_iter((0..10).map(|i| f64::from(i < 3)));
        assert!(make_folds(&y, 5, true, 0).is_err());
        assert!(make_folds(&y, 5, false, 0).is_ok());
    }

    #[test]
    fn single_point_grid_is_chosen() {
        let data = synth(60, 4, 9);
        let cv = CvConfig {
            k_folds: 3,
            n_repeats: 2,
            alpha_grid: vec![0.5],
            n_lambda: 2,
            lambda_ratio: 0.5,
            rng_seed: 1,
            ..CvConfig::default()
        };
        let res = cross_validate(&data, &cv, None, &SolverConfig::default()).unwrap();
        assert_eq!(res.cells.len(), 2);
        assert!(res
            .cells
            .iter()
            .any(|c| c.alpha == res.best_alpha && c.lambda == res.best_lambda));

        // trivially single cell
        let cv1 = CvConfig {
            n_lambda: 2,
            alpha_grid: vec![1.0],
            k_folds: 3,
            n_repeats: 1,
            lambda_ratio: 0.9,
            rng_seed: 1,
            ..CvConfig::default()
        };
        let res1 = cross_validate(&data, &cv1, None, &SolverConfig::default()).unwrap();
        assert_eq!(res1.best_alpha, 1.0);
    }

    #[test]
    fn lambda_max_scores_worse_than_best() {
        let data = synth(150, 8, 12);
        let cv = CvConfig {
            k_folds: 5,
            n_repeats: 2,
            alpha_grid: vec![1.0],
            n_lambda: 10,
            lambda_ratio: 0.01,
            rng_seed: 4,
            ..CvConfig::default()
        };
        let res = cross_validate(&data, &cv, None, &SolverConfig::default()).unwrap();
        let at_max = res.cells[0].mean_deviance.unwrap();
        let best = res
            .cells
            .iter()
            .find(|c| c.lambda == res.best_lambda)
            .unwrap()
            .mean_deviance
            .unwrap();
        assert!(at_max >= best);
        // the null fit at lambda_max has no active coefficients
        assert_eq!(res.cells[0].n_nonzero, 0);
    }

    #[test]
    fn cv_is_deterministic_and_csv_stable() {
        let data = synth(60, 4, 20);
        let cv = CvConfig {
            k_folds: 3,
            n_repeats: 2,
            alpha_grid: vec![0.3, 1.0],
            n_lambda: 4,
            lambda_ratio: 0.05,
            rng_seed: 33,
            ..CvConfig::default()
        };
        let a = cross_validate(&data, &cv, None, &SolverConfig::default()).unwrap();
        let b = cross_validate(&data, &cv, None, &SolverConfig::default()).unwrap();
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        a.write_csv(&mut csv_a).unwrap();
        b.write_csv(&mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
        assert_eq!(a.best_lambda, b.best_lambda);
        let header = String::from_utf8(csv_a.clone()).unwrap();
        assert!(header.starts_with("alpha,lambda,mean_deviance,sd_deviance,n_nonzero\n"));
    }

    #[test]
    fn permuting_rows_with_remapped_folds_gives_identical_scores() {
        let data = synth(48, 3, 25);
        let y = data.require_y().unwrap().clone();
        let cv = CvConfig {
            k_folds: 4,
            n_repeats: 1,
            alpha_grid: vec![0.8],
            n_lambda: 3,
            lambda_ratio: 0.1,
            rng_seed: 5,
            ..CvConfig::default()
        };
        let solver = SolverConfig::default();
        let grids = vec![lambda_grid(&data, 0.8, None, 3, 0.1, &solver).unwrap()];
        let nnz = vec![vec![0usize; 3]];
        let folds = make_folds(&y, 4, true, derive_seed(5, 0)).unwrap();
        let base = cv_over_folds(&data, &cv, None, &solver, &grids, &nnz, &[folds.clone()])
            .unwrap();

        let mut perm: Vec<usize> = (0..48).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        perm.shuffle(&mut rng);
        let permuted = data.subset_rows(&perm).unwrap();
        let remapped: Vec<usize> = perm.iter().map(|&old| folds[old]).collect();
        let grids_p = vec![lambda_grid(&permuted, 0.8, None, 3, 0.1, &solver).unwrap()];
        let moved =
            cv_over_folds(&permuted, &cv, None, &solver, &grids_p, &nnz, &[remapped]).unwrap();
        for (a, b) in base.cells.iter().zip(moved.cells.iter()) {
            let (ma, mb) = (a.mean_deviance.unwrap(), b.mean_deviance.unwrap());
            assert!((ma - mb).abs() < 1e-9, "{ma} vs {mb}");
        }
    }

    #[test]
    fn repeats_reduce_selection_variance() {
        let data = synth(60, 3, 31);
        let solver = SolverConfig::default();
        let mut var = [0.0f64; 2];
        for (slot, n_repeats) in [(0usize, 1usize), (1, 8)] {
            let mut scores = Vec::new();
            for rerun in 0..20 {
                let cv = CvConfig {
                    k_folds: 3,
                    n_repeats,
                    alpha_grid: vec![1.0],
                    n_lambda: 3,
                    lambda_ratio: 0.1,
                    rng_seed: 100 + rerun,
                    ..CvConfig::default()
                };
                let res = cross_validate(&data, &cv, None, &solver).unwrap();
                scores.push(res.cells[1].mean_deviance.unwrap());
            }
            let m = scores.iter().sum::<f64>() / scores.len() as f64;
            var[slot] =
                scores.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (scores.len() - 1) as f64;
        }
        assert!(
            var[1] < var[0],
            "averaging over repeats should stabilize the score: {} vs {}",
            var[1],
            var[0]
        );
    }

    #[test]
    fn select_best_prefers_sparser_on_ties() {
        let mk = |alpha: f64, lambda: f64, mean: f64| CvCell {
            alpha,
            lambda,
            mean_deviance: Some(mean),
            sd_deviance: 0.0,
            n_nonzero: 0,
            n_scores: 1,
        };
        let cells = vec![
            mk(0.5, 0.1, 1.0),
            mk(0.5, 0.2, 1.0),
            mk(1.0, 0.2, 1.0),
            mk(1.0, 0.05, 1.5),
        ];
        assert_eq!(select_best(&cells).unwrap(), (1.0, 0.2));
        let empty = vec![CvCell {
            alpha: 0.1,
            lambda: 0.1,
            mean_deviance: None,
            sd_deviance: 0.0,
            n_nonzero: 0,
            n_scores: 0,
        }];
        assert!(select_best(&empty).is_err());
    }

    #[test]
    fn robust_estimator_runs_through_cv() {
        let data = synth(60, 4, 41);
        let cv = CvConfig {
            k_folds: 3,
            n_repeats: 1,
            alpha_grid: vec![0.8],
            n_lambda: 3,
            lambda_ratio: 0.1,
            rng_seed: 9,
            estimator: Estimator::Robust,
            ..CvConfig::default()
        };
        let lts = LtsConfig {
            n_initial_subsets: 30,
            ..LtsConfig::default()
        };
        let res = cross_validate(&data, &cv, Some(&lts), &SolverConfig::default()).unwrap();
        assert_eq!(res.cells.len(), 3);
        assert!(res.cells.iter().all(|c| c.mean_deviance.is_some()));
    }
}
