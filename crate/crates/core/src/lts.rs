//! Robust sparse logistic regression: the trimmed elastic-net estimator.
//! A raw phase searches h-subsets by concentration steps from many elemental
//! starts, then a reweighting phase downweights observations with large
//! Pearson residuals and refits.

use crate::dataset::Dataset;
use crate::enet::{
    assemble_result, fit_enet_logistic, kkt_violation_std, prepare_design, solve_inner,
    FitResult, PreparedDesign, SolverConfig, StandardizationMode,
};
use crate::error::{Error, Result};
use crate::model::{deviance, Coefficients, PenaltySpec};
use crate::stats::normal_quantile;
use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Probabilities are clamped to `[1e-10, 1 - 1e-10]` before residuals are
/// formed, so separation cannot produce infinite residuals.
pub const PROB_CLAMP: f64 = 1e-10;

/// Which denominator the Pearson-style residual uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualVariant {
    /// `(y - pi) / (pi (1 - pi))` — no square root in the denominator.
    AsPrinted,
    /// `(y - pi) / sqrt(pi (1 - pi))` — the textbook Pearson residual.
    Sqrt,
}

/// Residual of one observation under fitted probability `pi`.
pub fn pearson_residual(y: f64, pi: f64, variant: ResidualVariant) -> f64 {
    let pi = pi.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let var = pi * (1.0 - pi);
    match variant {
        ResidualVariant::AsPrinted => (y - pi) / var,
        ResidualVariant::Sqrt => (y - pi) / var.sqrt(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LtsConfig {
    /// Fraction of observations retained by the trimmed objective, in (0.5, 1].
    pub h_fraction: f64,
    pub n_initial_subsets: usize,
    /// Size of each elemental start (split evenly between the classes).
    pub elemental_size: usize,
    pub n_best_keep: usize,
    pub warmup_csteps: usize,
    pub max_csteps: usize,
    /// Reweighting cutoff on |residual|; defaults to the 97.5% Gaussian quantile.
    pub cutoff: f64,
    pub residual_variant: ResidualVariant,
    pub rng_seed: u64,
}

impl Default for LtsConfig {
    fn default() -> Self {
        Self {
            h_fraction: 0.85,
            n_initial_subsets: 500,
            elemental_size: 4,
            n_best_keep: 10,
            warmup_csteps: 2,
            max_csteps: 50,
            cutoff: normal_quantile(0.975),
            residual_variant: ResidualVariant::AsPrinted,
            rng_seed: 0,
        }
    }
}

impl LtsConfig {
    fn validate(&self) -> Result<()> {
        if !(self.h_fraction > 0.5 && self.h_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "h_fraction must lie in (0.5, 1], got {}",
                self.h_fraction
            )));
        }
        if self.elemental_size < 4 || self.elemental_size % 2 != 0 {
            return Err(Error::InvalidArgument(
                "elemental_size must be an even count of at least 4".into(),
            ));
        }
        if self.n_initial_subsets == 0 || self.n_best_keep == 0 {
            return Err(Error::InvalidArgument(
                "n_initial_subsets and n_best_keep must be positive".into(),
            ));
        }
        if self.max_csteps == 0 {
            return Err(Error::InvalidArgument("max_csteps must be positive".into()));
        }
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return Err(Error::InvalidArgument("cutoff must be positive".into()));
        }
        Ok(())
    }
}

/// Trimming size and its class-proportional split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HSplit {
    pub h: usize,
    pub h0: usize,
    pub h1: usize,
}

/// `h = floor(fraction * n)`, split between the classes proportionally:
/// `h1 = round(h * n1 / n)`, `h0 = h - h1`. Each class must keep at least
/// two rows.
pub fn h_from_fraction(n0: usize, n1: usize, fraction: f64) -> Result<HSplit> {
    if !(fraction > 0.5 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "h fraction must lie in (0.5, 1], got {fraction}"
        )));
    }
    let n = n0 + n1;
    let h = (fraction * n as f64).floor() as usize;
    let h1 = ((h as f64) * (n1 as f64) / (n as f64)).round() as usize;
    let h0 = h - h1;
    for (class, need, got, avail) in [(0u8, 2usize, h0, n0), (1, 2, h1, n1)] {
        if got < need || got > avail {
            return Err(Error::InsufficientClassSize {
                class,
                needed: need,
                got,
            });
        }
    }
    Ok(HSplit { h, h0, h1 })
}

/// Keep the `h1` smallest-deviance class-1 rows and the `h0` smallest-deviance
/// class-0 rows under `coefs`; ties broken toward the lower row index. The
/// returned indices are sorted ascending.
pub fn c_step(data: &Dataset, coefs: &Coefficients, split: &HSplit) -> Result<Vec<usize>> {
    let y = data.require_y()?;
    if coefs.beta.len() != data.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "coefficients".into(),
            expected: data.n_cols(),
            actual: coefs.beta.len(),
        });
    }
    let eta = coefs.linear_predictor(data.x());
    Ok(c_step_eta(&eta, y, split))
}

fn c_step_eta(eta: &Array1<f64>, y: &Array1<f64>, split: &HSplit) -> Vec<usize> {
    let mut by_class: [Vec<(f64, usize)>; 2] = [Vec::new(), Vec::new()];
    for i in 0..y.len() {
        let cls = if y[i] == 1.0 { 1 } else { 0 };
        by_class[cls].push((deviance(eta[i], y[i]), i));
    }
    let mut subset = Vec::with_capacity(split.h);
    for (cls, take) in [(0usize, split.h0), (1, split.h1)] {
        let rows = &mut by_class[cls];
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        subset.extend(rows.iter().take(take).map(|(_, i)| *i));
    }
    subset.sort_unstable();
    subset
}

/// Objective the raw phase minimizes:
/// `sum_{i in H} d_i + h * lambda * [(1-alpha)/2 ||p.b||^2 + alpha ||p.b||_1]`,
/// with the penalty taken on the solved (standardized) scale.
fn trimmed_objective(
    eta: &Array1<f64>,
    y: &Array1<f64>,
    subset: &[usize],
    coefs_std: &Coefficients,
    spec: &PenaltySpec,
) -> f64 {
    let loss: f64 = subset.iter().map(|&i| deviance(eta[i], y[i])).sum();
    loss + subset.len() as f64 * spec.lambda * spec.bracket(coefs_std.beta.view())
}

/// Objective trace of one candidate through its concentration steps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateTrace {
    pub candidate_id: usize,
    /// Trimmed objective after each C-step refit (warmup steps included).
    pub objectives: Vec<f64>,
    /// Whether the candidate survived the warmup cut.
    pub retained: bool,
    /// Whether the subset reached a fixed point before the step budget.
    pub converged: bool,
}

/// Result of the robust fit: the raw trimmed-objective fit, the reweighted
/// refit, and the diagnostics connecting them.
#[derive(Debug, Clone)]
pub struct RobustFitResult {
    pub raw_fit: FitResult,
    pub reweighted_fit: FitResult,
    /// Binary reweighting weights; `weights[i] = 1` iff `|residual| < cutoff`.
    pub weights: Array1<f64>,
    /// `1 - weights`, as booleans.
    pub outlier_flags: Vec<bool>,
    /// Final h-subset of the raw phase, ascending.
    pub h_subset: Vec<usize>,
    /// Residuals of ALL rows under the raw fit.
    pub pearson_residuals: Array1<f64>,
    pub spec: PenaltySpec,
    pub split: HSplit,
    pub cutoff: f64,
    pub candidate_traces: Vec<CandidateTrace>,
    pub warnings: Vec<String>,
}

impl RobustFitResult {
    pub fn raw_coefs(&self) -> &Coefficients {
        &self.raw_fit.coefs
    }

    pub fn reweighted_coefs(&self) -> &Coefficients {
        &self.reweighted_fit.coefs
    }

    pub fn n_outliers(&self) -> usize {
        self.outlier_flags.iter().filter(|f| **f).count()
    }
}

/// Probabilities for new rows under fitted coefficients.
pub fn predict_prob(coefs: &Coefficients, data: &Dataset) -> Result<Array1<f64>> {
    if coefs.beta.len() != data.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "coefficients".into(),
            expected: data.n_cols(),
            actual: coefs.beta.len(),
        });
    }
    data.require_complete()?;
    Ok(coefs.predict_prob(data.x()))
}

/// Hard 0/1 classification at a probability threshold (0.5 by default).
pub fn classify(coefs: &Coefficients, data: &Dataset, threshold: f64) -> Result<Vec<u8>> {
    Ok(predict_prob(coefs, data)?
        .iter()
        .map(|p| u8::from(*p >= threshold))
        .collect())
}

struct CandidateState {
    id: usize,
    coefs: Coefficients,
    subset: Vec<usize>,
    objective: f64,
    objectives: Vec<f64>,
    converged: bool,
}

/// Run C-steps from the candidate's current coefficients until the subset
/// stops changing or `max_steps` is reached. Each refit is warm-started from
/// the previous coefficients, which together with the fixed standardization
/// makes the trimmed objective non-increasing step over step.
#[allow(clippy::too_many_arguments)]
fn run_csteps(
    state: &mut CandidateState,
    xs: &Array2<f64>,
    y: &Array1<f64>,
    forced_zero: &[bool],
    spec: &PenaltySpec,
    split: &HSplit,
    solver: &SolverConfig,
    max_steps: usize,
) {
    let n = y.len();
    for _ in 0..max_steps {
        let eta = state.coefs.linear_predictor(xs);
        let subset = c_step_eta(&eta, y, split);
        let mut w = Array1::zeros(n);
        for &i in &subset {
            w[i] = 1.0;
        }
        let sol = solve_inner(xs, y, &w, spec, forced_zero, solver, Some(&state.coefs));
        let eta_new = sol.coefs.linear_predictor(xs);
        let obj = trimmed_objective(&eta_new, y, &subset, &sol.coefs, spec);
        let same = subset == state.subset;
        state.coefs = sol.coefs;
        state.objective = obj;
        state.objectives.push(obj);
        state.subset = subset;
        if same {
            state.converged = true;
            break;
        }
    }
}

/// Fit the trimmed elastic-net logistic estimator.
///
/// Raw phase: `n_initial_subsets` elemental starts (half of each start from
/// every class) are fit, concentrated for `warmup_csteps` steps, the
/// `n_best_keep` best candidates by trimmed objective are iterated to a
/// subset fixed point, and the best final candidate is kept. The whole raw
/// phase works on one fixed robust standardization (median/MAD of the full
/// data), so objectives of different subsets are directly comparable and the
/// concentration argument applies exactly.
///
/// Reweighting phase: residuals of all rows under the raw fit are compared
/// against `cutoff`; rows below it get weight 1 and the model is refit with
/// those weights (penalty scaled by the weight sum).
pub fn fit_enet_lts(
    data: &Dataset,
    spec: &PenaltySpec,
    lts: &LtsConfig,
    solver: &SolverConfig,
) -> Result<RobustFitResult> {
    let results = fit_enet_lts_path(data, spec, &[spec.lambda], lts, solver)?;
    Ok(results.into_iter().next().expect("one lambda in, one fit out"))
}

/// Fit the robust estimator along a λ sequence. The expensive elemental
/// search runs only at the first λ; later grid points restart their C-steps
/// from the previous point's surviving candidates (neighbor warm-starting).
/// Every returned fit still satisfies the per-point optimality expected of a
/// single fit.
pub fn fit_enet_lts_path(
    data: &Dataset,
    spec: &PenaltySpec,
    lambdas: &[f64],
    lts: &LtsConfig,
    solver: &SolverConfig,
) -> Result<Vec<RobustFitResult>> {
    if lambdas.is_empty() {
        return Err(Error::EmptySelection("lambda path"));
    }
    let n = data.n_rows();
    let p = data.n_cols();
    if n < 10 {
        return Err(Error::InvalidArgument(format!(
            "robust fitting needs at least 10 rows, got {n}"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("design matrix has no columns".into()));
    }
    spec.validate(p)?;
    lts.validate()?;
    data.require_complete()?;
    let y = data.require_y()?.clone();
    let (n0, n1) = data.class_counts()?;
    if n0 == 0 || n1 == 0 {
        return Err(Error::DegenerateResponse);
    }
    let split = h_from_fraction(n0, n1, lts.h_fraction)?;
    let per_class = lts.elemental_size / 2;
    if n0 < per_class || n1 < per_class {
        return Err(Error::InsufficientClassSize {
            class: if n1 < per_class { 1 } else { 0 },
            needed: per_class,
            got: n0.min(n1),
        });
    }

    // One fixed robust standardization for the whole raw phase: comparisons
    // of trimmed objectives across subsets and C-steps stay meaningful.
    let ones = Array1::ones(n);
    let base_spec = spec.at_lambda(lambdas[0]);
    let prepared = prepare_design(
        data.x(),
        data.col_names(),
        &ones,
        &base_spec,
        true,
        StandardizationMode::Robust,
    )?;

    // With h = n the trimmed objective keeps every row and is the convex
    // full-data objective: every start lands on the same optimum after one
    // C-step, so a single start does the work of the whole search.
    let n_starts = if split.h == n { 1 } else { lts.n_initial_subsets };

    // Elemental draws are serial so the RNG stream is independent of thread
    // scheduling; the fits themselves run in parallel and are merged in
    // draw order.
    let mut rng = ChaCha8Rng::seed_from_u64(lts.rng_seed);
    let class0: Vec<usize> = (0..n).filter(|&i| y[i] != 1.0).collect();
    let class1: Vec<usize> = (0..n).filter(|&i| y[i] == 1.0).collect();
    let draws: Vec<Vec<usize>> = (0..n_starts)
        .map(|_| {
            let mut rows: Vec<usize> = rand::seq::index::sample(&mut rng, class0.len(), per_class)
                .iter()
                .map(|k| class0[k])
                .collect();
            rows.extend(
                rand::seq::index::sample(&mut rng, class1.len(), per_class)
                    .iter()
                    .map(|k| class1[k]),
            );
            rows
        })
        .collect();

    let elemental_solver = SolverConfig {
        max_outer_iters: 25,
        max_inner_sweeps: 200,
        ..solver.clone()
    };

    let first_spec = base_spec.clone();
    let mut candidates: Vec<CandidateState> = draws
        .par_iter()
        .enumerate()
        .map(|(id, rows)| {
            let mut w = Array1::zeros(n);
            for &i in rows {
                w[i] = 1.0;
            }
            let sol = solve_inner(
                &prepared.x,
                &y,
                &w,
                &first_spec,
                &prepared.forced_zero,
                &elemental_solver,
                None,
            );
            let mut state = CandidateState {
                id,
                coefs: sol.coefs,
                subset: Vec::new(),
                objective: f64::INFINITY,
                objectives: Vec::new(),
                converged: false,
            };
            run_csteps(
                &mut state,
                &prepared.x,
                &y,
                &prepared.forced_zero,
                &first_spec,
                &split,
                solver,
                lts.warmup_csteps.max(1),
            );
            state
        })
        .collect();

    candidates.retain(|c| c.objective.is_finite() && c.coefs.beta.iter().all(|b| b.is_finite()));
    if candidates.is_empty() {
        return Err(Error::NoValidInitialSubset);
    }
    candidates.sort_by(|a, b| a.objective.total_cmp(&b.objective).then(a.id.cmp(&b.id)));

    let keep = lts.n_best_keep.min(candidates.len());
    let mut dropped_traces: Vec<CandidateTrace> = candidates[keep..]
        .iter()
        .map(|c| CandidateTrace {
            candidate_id: c.id,
            objectives: c.objectives.clone(),
            retained: false,
            converged: c.converged,
        })
        .collect();
    candidates.truncate(keep);

    let mut results = Vec::with_capacity(lambdas.len());
    for (k, &lam) in lambdas.iter().enumerate() {
        let lam_spec = spec.at_lambda(lam);
        if k > 0 {
            // New penalty level: objective values and histories start over
            // from the warm coefficients.
            for c in candidates.iter_mut() {
                c.subset = Vec::new();
                c.objective = f64::INFINITY;
                c.objectives = Vec::new();
                c.converged = false;
            }
        }
        candidates.par_iter_mut().for_each(|c| {
            run_csteps(
                c,
                &prepared.x,
                &y,
                &prepared.forced_zero,
                &lam_spec,
                &split,
                solver,
                lts.max_csteps,
            );
        });
        let best = candidates
            .iter()
            .min_by(|a, b| a.objective.total_cmp(&b.objective).then(a.id.cmp(&b.id)))
            .expect("at least one retained candidate");

        let traces: Vec<CandidateTrace> = if k == 0 {
            let mut t: Vec<CandidateTrace> = candidates
                .iter()
                .map(|c| CandidateTrace {
                    candidate_id: c.id,
                    objectives: c.objectives.clone(),
                    retained: true,
                    converged: c.converged,
                })
                .collect();
            t.append(&mut dropped_traces);
            t.sort_by_key(|t| t.candidate_id);
            t
        } else {
            candidates
                .iter()
                .map(|c| CandidateTrace {
                    candidate_id: c.id,
                    objectives: c.objectives.clone(),
                    retained: true,
                    converged: c.converged,
                })
                .collect()
        };

        results.push(finish_robust_fit(
            data,
            &lam_spec,
            lts,
            solver,
            &prepared,
            best,
            &split,
            traces,
        )?);
    }
    Ok(results)
}

#[allow(clippy::too_many_arguments)]
fn finish_robust_fit(
    data: &Dataset,
    spec: &PenaltySpec,
    lts: &LtsConfig,
    solver: &SolverConfig,
    prepared: &PreparedDesign,
    best: &CandidateState,
    split: &HSplit,
    candidate_traces: Vec<CandidateTrace>,
) -> Result<RobustFitResult> {
    let n = data.n_rows();
    let y = data.require_y()?.clone();
    let mut warnings = Vec::new();

    // Raw fit packaged as a full FitResult (its weights are the h-subset).
    let mut w_raw = Array1::zeros(n);
    for &i in &best.subset {
        w_raw[i] = 1.0;
    }
    let raw_prepared = PreparedDesign {
        x: prepared.x.clone(),
        standardization: prepared.standardization.clone(),
        forced_zero: prepared.forced_zero.clone(),
        warnings: prepared.warnings.clone(),
    };
    let raw_sol = crate::enet::InnerSolution {
        coefs: best.coefs.clone(),
        converged: best.converged,
        iters_used: best.objectives.len(),
        objective_history: best.objectives.clone(),
    };
    let raw_fit = assemble_result(data, spec, &w_raw, raw_prepared, raw_sol);

    // Reweighting: residuals of every row under the raw fit.
    let residuals = Array1::from_iter(
        y.iter()
            .zip(raw_fit.fitted_prob.iter())
            .map(|(yi, pi)| pearson_residual(*yi, *pi, lts.residual_variant)),
    );
    let mut weights = Array1::zeros(n);
    for i in 0..n {
        if residuals[i].abs() < lts.cutoff {
            weights[i] = 1.0;
        }
    }
    let outlier_flags: Vec<bool> = weights.iter().map(|w| *w == 0.0).collect();

    let mut has = [false, false];
    for i in 0..n {
        if weights[i] > 0.0 {
            has[usize::from(y[i] == 1.0)] = true;
        }
    }
    let reweighted_fit = if has[0] && has[1] {
        let config = SolverConfig {
            standardize: true,
            standardization_mode: StandardizationMode::Robust,
            weights: Some(weights.clone()),
            ..solver.clone()
        };
        fit_enet_logistic(data, spec, &config)?
    } else {
        warnings.push(
            "reweighting left a single class; keeping the raw fit as the reweighted estimate"
                .into(),
        );
        raw_fit.clone()
    };

    Ok(RobustFitResult {
        raw_fit,
        reweighted_fit,
        weights,
        outlier_flags,
        h_subset: best.subset.clone(),
        pearson_residuals: residuals,
        spec: spec.clone(),
        split: *split,
        cutoff: lts.cutoff,
        candidate_traces,
        warnings,
    })
}

/// KKT violation of the reweighted fit, re-derived on its solved scale
/// (external optimality oracle for the robust estimator).
pub fn reweighted_kkt_violation(data: &Dataset, fit: &RobustFitResult) -> f64 {
    let xs = fit.reweighted_fit.standardization.transform(data.x());
    let y = data.require_y().expect("fit came from labeled data");
    kkt_violation_std(
        &xs,
        y,
        &fit.reweighted_fit.weights,
        &fit.reweighted_fit.spec,
        fit.reweighted_fit.n_weighted,
        &fit.reweighted_fit.coefs_standardized,
    )
}
