//! Classical penalized logistic regression: IRLS outer loop with cyclic
//! coordinate descent on the quadratic approximation, soft-thresholding for
//! the L1 part, and an objective-based step-halving safeguard so the
//! penalized objective is non-increasing across outer iterations.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{deviance, sigmoid, Coefficients, PenaltySpec};
use crate::stats::{mad_scale, median};
use ndarray::{Array1, Array2, ShapeBuilder};
use serde::{Deserialize, Serialize};

/// Floor on the IRLS working weights pi*(1-pi).
const WEIGHT_FLOOR: f64 = 1e-5;
/// Internal KKT tolerance targeted by the solver; comfortably inside the
/// 1e-5 the optimality checks allow.
const KKT_TOL: f64 = 1e-6;

/// How columns are centered and scaled before solving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StandardizationMode {
    /// Weighted mean / weighted SD.
    Classical,
    /// Median / 1.4826 * MAD over positive-weight rows (falls back to the
    /// classical SD when the MAD vanishes on a non-constant column).
    Robust,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_outer_iters: usize,
    pub max_inner_sweeps: usize,
    /// Convergence threshold on the maximum absolute coefficient change per
    /// sweep, on the solved (standardized) scale.
    pub coef_tol: f64,
    pub standardize: bool,
    pub standardization_mode: StandardizationMode,
    /// Optional observation weights in [0, 1]; all ones when absent.
    pub weights: Option<Array1<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_outer_iters: 100,
            max_inner_sweeps: 1000,
            coef_tol: 1e-7,
            standardize: true,
            standardization_mode: StandardizationMode::Classical,
            weights: None,
        }
    }
}

impl SolverConfig {
    pub fn robust() -> Self {
        Self {
            standardization_mode: StandardizationMode::Robust,
            ..Self::default()
        }
    }

    pub fn with_weights(mut self, weights: Array1<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.coef_tol <= 0.0 {
            return Err(Error::InvalidArgument("coef_tol must be > 0".into()));
        }
        if let Some(w) = &self.weights {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "observation weights".into(),
                    expected: n,
                    actual: w.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidArgument(
                    "observation weights must lie in [0, 1]".into(),
                ));
            }
            if w.sum() <= 0.0 {
                return Err(Error::InvalidArgument(
                    "observation weights must not all be zero".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Column centers and scales applied before solving; identity when
/// standardization is off.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardization {
    pub centers: Array1<f64>,
    pub scales: Array1<f64>,
}

impl Standardization {
    pub fn identity(p: usize) -> Self {
        Self {
            centers: Array1::zeros(p),
            scales: Array1::ones(p),
        }
    }

    /// Apply to a matrix: `(x - center) / scale` columnwise (F-order copy,
    /// which coordinate descent sweeps favor).
    pub fn transform(&self, x: &Array2<f64>) -> Array2<f64> {
        let (n, p) = x.dim();
        let mut out = Array2::zeros((n, p).f());
        for j in 0..p {
            let c = self.centers[j];
            let s = self.scales[j];
            let mut col = out.column_mut(j);
            col.assign(&x.column(j));
            col.mapv_inplace(|v| (v - c) / s);
        }
        out
    }

    /// Map coefficients on the standardized scale back to the original scale.
    pub fn back_transform(&self, std_coefs: &Coefficients) -> Coefficients {
        let p = std_coefs.beta.len();
        let mut beta = Array1::zeros(p);
        let mut intercept = std_coefs.intercept;
        for j in 0..p {
            let b = std_coefs.beta[j] / self.scales[j];
            beta[j] = b;
            intercept -= b * self.centers[j];
        }
        Coefficients { intercept, beta }
    }
}

/// Result of a classical penalized fit. Coefficients are reported on the
/// original data scale; the standardized-scale solution and the applied
/// standardization are kept so optimality can be re-checked on the scale
/// the solver actually worked on.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefs: Coefficients,
    pub coefs_standardized: Coefficients,
    pub standardization: Standardization,
    pub spec: PenaltySpec,
    pub deviance_total: f64,
    pub per_obs_deviance: Array1<f64>,
    pub fitted_prob: Array1<f64>,
    pub converged: bool,
    pub iters_used: usize,
    /// Penalized weighted objective after each outer iteration (first entry
    /// is the starting value). Non-increasing by construction.
    pub objective_history: Vec<f64>,
    /// Observation weights the fit used (all ones when none were given).
    pub weights: Array1<f64>,
    /// Sum of the weights; the penalty in the objective is `n_w * lambda * [..]`.
    pub n_weighted: f64,
    pub warnings: Vec<String>,
}

impl FitResult {
    /// Final value of the penalized objective the solver minimized.
    pub fn objective(&self) -> f64 {
        *self
            .objective_history
            .last()
            .expect("objective history is never empty")
    }
}

/// Standardized design plus bookkeeping about degenerate columns.
pub(crate) struct PreparedDesign {
    pub x: Array2<f64>,
    pub standardization: Standardization,
    pub forced_zero: Vec<bool>,
    pub warnings: Vec<String>,
}

fn weighted_mean_sd(col: &[f64], w: &[f64], wsum: f64) -> (f64, f64) {
    let mut m = 0.0;
    for (x, wi) in col.iter().zip(w) {
        m += wi * x;
    }
    m /= wsum;
    let mut var = 0.0;
    for (x, wi) in col.iter().zip(w) {
        var += wi * (x - m) * (x - m);
    }
    (m, (var / wsum).sqrt())
}

/// Compute centers/scales per `mode` and standardize. Constant penalized
/// columns are pinned to zero with a warning; a constant unpenalized column
/// is an error because the solver could not identify its coefficient.
pub(crate) fn prepare_design(
    x: &Array2<f64>,
    col_names: &[String],
    weights: &Array1<f64>,
    spec: &PenaltySpec,
    standardize: bool,
    mode: StandardizationMode,
) -> Result<PreparedDesign> {
    let (n, p) = x.dim();
    let wsum = weights.sum();
    let mut centers = Array1::zeros(p);
    let mut scales = Array1::ones(p);
    let mut forced_zero = vec![false; p];
    let mut warnings = Vec::new();

    for j in 0..p {
        let col: Vec<f64> = x.column(j).to_vec();
        let w: Vec<f64> = weights.to_vec();
        let (mean, sd) = weighted_mean_sd(&col, &w, wsum);
        let (center, scale) = if !standardize {
            // Still probe for degeneracy so the error contract holds.
            (0.0, if sd > 0.0 { 1.0 } else { 0.0 })
        } else {
            match mode {
                StandardizationMode::Classical => (mean, sd),
                StandardizationMode::Robust => {
                    let pos: Vec<f64> = col
                        .iter()
                        .zip(&w)
                        .filter(|(_, wi)| **wi > 0.0)
                        .map(|(x, _)| *x)
                        .collect();
                    let c = median(&pos).unwrap_or(0.0);
                    let s = mad_scale(&pos, c, 0.0).unwrap_or(0.0);
                    // More than half the rows tied (MAD = 0) does not make a
                    // column constant; fall back to the classical spread.
                    if s > 0.0 {
                        (c, s)
                    } else {
                        (c, sd)
                    }
                }
            }
        };
        if scale > 0.0 {
            centers[j] = center;
            scales[j] = scale;
        } else if spec.factor(j) == 0.0 {
            return Err(Error::ConstantUnpenalizedColumn {
                name: col_names[j].clone(),
            });
        } else {
            forced_zero[j] = true;
            centers[j] = center;
            scales[j] = 1.0;
            warnings.push(format!(
                "column '{}' is constant; its coefficient is fixed at 0",
                col_names[j]
            ));
        }
    }

    let std = Standardization { centers, scales };
    let xs = if standardize || forced_zero.iter().any(|f| *f) {
        std.transform(x)
    } else {
        let mut out = Array2::zeros((n, p).f());
        out.assign(x);
        out
    };
    Ok(PreparedDesign {
        x: xs,
        standardization: std,
        forced_zero,
        warnings,
    })
}

/// Output of the standardized-scale solver core.
pub(crate) struct InnerSolution {
    pub coefs: Coefficients,
    pub converged: bool,
    pub iters_used: usize,
    pub objective_history: Vec<f64>,
}

#[inline]
fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

fn objective_at(
    xs: &Array2<f64>,
    y: &Array1<f64>,
    w: &Array1<f64>,
    spec: &PenaltySpec,
    n_w: f64,
    coefs: &Coefficients,
    eta_out: &mut Array1<f64>,
) -> f64 {
    let eta = coefs.linear_predictor(xs);
    let mut loss = 0.0;
    for i in 0..y.len() {
        if w[i] > 0.0 {
            loss += w[i] * deviance(eta[i], y[i]);
        }
    }
    *eta_out = eta;
    loss + n_w * spec.lambda * spec.bracket(coefs.beta.view())
}

/// Maximum KKT violation of `coefs` for the weighted problem on the given
/// (already standardized) design. Gradient of the loss:
/// `g_j = sum_i w_i x_ij (pi_i - y_i)`; the intercept must have zero
/// weighted residual sum; active coordinates must sit on the subgradient
/// ray, inactive penalized ones inside the threshold.
pub(crate) fn kkt_violation_std(
    xs: &Array2<f64>,
    y: &Array1<f64>,
    w: &Array1<f64>,
    spec: &PenaltySpec,
    n_w: f64,
    coefs: &Coefficients,
) -> f64 {
    let n = y.len();
    let p = coefs.beta.len();
    let eta = coefs.linear_predictor(xs);
    let mut resid = Array1::zeros(n);
    for i in 0..n {
        resid[i] = w[i] * (sigmoid(eta[i]) - y[i]);
    }
    let mut worst: f64 = resid.sum().abs();
    for j in 0..p {
        let g: f64 = xs
            .column(j)
            .iter()
            .zip(resid.iter())
            .map(|(x, r)| x * r)
            .sum();
        let pj = spec.factor(j);
        let b = coefs.beta[j];
        let v = if b != 0.0 {
            (g + n_w * spec.lambda * (1.0 - spec.alpha) * pj * pj * b
                + n_w * spec.lambda * spec.alpha * pj * b.signum())
            .abs()
        } else if pj > 0.0 {
            (g.abs() - n_w * spec.lambda * spec.alpha * pj).max(0.0)
        } else {
            g.abs()
        };
        worst = worst.max(v);
    }
    worst
}

/// IRLS + cyclic coordinate descent on a prepared (standardized) design.
/// Pure and deterministic; safe to call concurrently on shared inputs.
pub(crate) fn solve_inner(
    xs: &Array2<f64>,
    y: &Array1<f64>,
    w: &Array1<f64>,
    spec: &PenaltySpec,
    forced_zero: &[bool],
    config: &SolverConfig,
    warm: Option<&Coefficients>,
) -> InnerSolution {
    let (n, p) = xs.dim();
    let n_w = w.sum();
    let thr_l1: Vec<f64> = (0..p)
        .map(|j| n_w * spec.lambda * spec.alpha * spec.factor(j))
        .collect();
    let ridge: Vec<f64> = (0..p)
        .map(|j| {
            let pj = spec.factor(j);
            n_w * spec.lambda * (1.0 - spec.alpha) * pj * pj
        })
        .collect();

    let mut coefs = match warm {
        Some(c) => c.clone(),
        None => {
            let ybar = (y
                .iter()
                .zip(w.iter())
                .map(|(yi, wi)| wi * yi)
                .sum::<f64>()
                / n_w)
                .clamp(1e-10, 1.0 - 1e-10);
            let mut c = Coefficients::zeros(p);
            c.intercept = (ybar / (1.0 - ybar)).ln();
            c
        }
    };

    let mut eta = Array1::zeros(n);
    let mut obj = objective_at(xs, y, w, spec, n_w, &coefs, &mut eta);
    let mut history = vec![obj];
    let mut converged = false;
    let mut iters_used = 0;
    let mut inner_tol = config.coef_tol;

    let mut v = Array1::<f64>::zeros(n);
    let mut r = Array1::<f64>::zeros(n);

    for outer in 1..=config.max_outer_iters {
        iters_used = outer;
        let prev = coefs.clone();

        // Quadratic approximation at the current iterate.
        let mut sv = 0.0;
        for i in 0..n {
            let pi = sigmoid(eta[i]);
            let wwork = (pi * (1.0 - pi)).max(WEIGHT_FLOOR);
            v[i] = w[i] * wwork;
            sv += v[i];
            // r holds the working residual z_i - eta_i at the current coefs.
            r[i] = (y[i] - pi) / wwork;
        }
        let col_ss: Vec<f64> = (0..p)
            .map(|j| {
                xs.column(j)
                    .iter()
                    .zip(v.iter())
                    .map(|(x, vi)| vi * x * x)
                    .sum()
            })
            .collect();

        // Cyclic coordinate descent on the penalized weighted least squares.
        for _sweep in 0..config.max_inner_sweeps {
            let mut max_delta = 0.0f64;

            let rs: f64 = r.iter().zip(v.iter()).map(|(ri, vi)| vi * ri).sum();
            let d0 = rs / sv;
            if d0 != 0.0 {
                coefs.intercept += d0;
                r.mapv_inplace(|ri| ri - d0);
                max_delta = d0.abs();
            }

            for j in 0..p {
                if forced_zero[j] || (col_ss[j] == 0.0 && ridge[j] == 0.0) {
                    continue;
                }
                let old = coefs.beta[j];
                let col = xs.column(j);
                let mut rho = old * col_ss[j];
                for (i, x) in col.iter().enumerate() {
                    rho += v[i] * x * r[i];
                }
                let new = soft_threshold(rho, thr_l1[j]) / (col_ss[j] + ridge[j]);
                if new != old {
                    let d = old - new;
                    for (i, x) in col.iter().enumerate() {
                        r[i] += d * x;
                    }
                    coefs.beta[j] = new;
                    max_delta = max_delta.max(d.abs());
                }
            }
            if max_delta < inner_tol {
                break;
            }
        }

        // Safeguard: the quadratic step must not increase the true objective.
        let mut new_obj = objective_at(xs, y, w, spec, n_w, &coefs, &mut eta);
        if new_obj > obj + 1e-12 * (1.0 + obj.abs()) {
            let target = coefs.clone();
            let mut accepted = false;
            let mut t = 0.5;
            for _ in 0..30 {
                coefs.intercept = prev.intercept + t * (target.intercept - prev.intercept);
                for j in 0..p {
                    coefs.beta[j] = prev.beta[j] + t * (target.beta[j] - prev.beta[j]);
                }
                new_obj = objective_at(xs, y, w, spec, n_w, &coefs, &mut eta);
                if new_obj <= obj + 1e-12 * (1.0 + obj.abs()) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                coefs = prev;
                new_obj = objective_at(xs, y, w, spec, n_w, &coefs, &mut eta);
                history.push(new_obj);
                converged = true;
                break;
            }
        }
        history.push(new_obj);

        let mut outer_delta = (coefs.intercept - prev.intercept).abs();
        for j in 0..p {
            outer_delta = outer_delta.max((coefs.beta[j] - prev.beta[j]).abs());
        }
        obj = new_obj;

        if outer_delta < config.coef_tol {
            if kkt_violation_std(xs, y, w, spec, n_w, &coefs) <= KKT_TOL {
                converged = true;
                break;
            }
            // Stalled on the coefficient criterion but not yet at the
            // optimality tolerance: tighten the inner sweeps and continue.
            inner_tol = (inner_tol * 1e-2).max(1e-13);
        }
    }

    InnerSolution {
        coefs,
        converged,
        iters_used,
        objective_history: history,
    }
}

fn effective_weights(n: usize, config: &SolverConfig) -> Array1<f64> {
    config
        .weights
        .clone()
        .unwrap_or_else(|| Array1::ones(n))
}

fn check_both_classes(y: &Array1<f64>, w: &Array1<f64>) -> Result<()> {
    let mut has0 = false;
    let mut has1 = false;
    for (yi, wi) in y.iter().zip(w.iter()) {
        if *wi > 0.0 {
            if *yi == 1.0 {
                has1 = true;
            } else {
                has0 = true;
            }
        }
    }
    if has0 && has1 {
        Ok(())
    } else {
        Err(Error::DegenerateResponse)
    }
}

/// Fit a penalized logistic regression minimizing
/// `sum_i w_i d(eta_i, y_i) + n_w * lambda * [(1-alpha)/2 ||p.b||^2 + alpha ||p.b||_1]`
/// with an unpenalized intercept, where the penalty applies on the
/// standardized scale and `n_w = sum_i w_i`.
pub fn fit_enet_logistic(
    data: &Dataset,
    spec: &PenaltySpec,
    config: &SolverConfig,
) -> Result<FitResult> {
    fit_enet_logistic_warm(data, spec, config, None)
}

/// Same as [`fit_enet_logistic`] but optionally warm-started from a previous
/// solution on the standardized scale (as produced in `coefs_standardized`).
pub fn fit_enet_logistic_warm(
    data: &Dataset,
    spec: &PenaltySpec,
    config: &SolverConfig,
    warm_std: Option<&Coefficients>,
) -> Result<FitResult> {
    let p = data.n_cols();
    if p == 0 {
        return Err(Error::InvalidArgument("design matrix has no columns".into()));
    }
    spec.validate(p)?;
    data.require_complete()?;
    let y = data.require_y()?.clone();
    config.validate(data.n_rows())?;
    let w = effective_weights(data.n_rows(), config);
    check_both_classes(&y, &w)?;

    let prepared = prepare_design(
        data.x(),
        data.col_names(),
        &w,
        spec,
        config.standardize,
        config.standardization_mode,
    )?;
    let sol = solve_inner(
        &prepared.x,
        &y,
        &w,
        spec,
        &prepared.forced_zero,
        config,
        warm_std,
    );
    Ok(assemble_result(
        data, spec, &w, prepared, sol,
    ))
}

pub(crate) fn assemble_result(
    data: &Dataset,
    spec: &PenaltySpec,
    w: &Array1<f64>,
    prepared: PreparedDesign,
    sol: InnerSolution,
) -> FitResult {
    let y = data.require_y().expect("checked by caller");
    let coefs = prepared.standardization.back_transform(&sol.coefs);
    let fitted_eta = coefs.linear_predictor(data.x());
    let fitted_prob = fitted_eta.mapv(sigmoid);
    let per_obs_deviance =
        Array1::from_iter(fitted_eta.iter().zip(y.iter()).map(|(e, yi)| deviance(*e, *yi)));
    let deviance_total = per_obs_deviance.sum();
    FitResult {
        coefs,
        coefs_standardized: sol.coefs,
        standardization: prepared.standardization,
        spec: spec.clone(),
        deviance_total,
        per_obs_deviance,
        fitted_prob,
        converged: sol.converged,
        iters_used: sol.iters_used,
        objective_history: sol.objective_history,
        weights: w.clone(),
        n_weighted: w.sum(),
        warnings: prepared.warnings,
    }
}

/// Maximum KKT violation of a finished fit, re-derived from the stored
/// standardization (useful as an external optimality oracle).
pub fn kkt_max_violation(data: &Dataset, fit: &FitResult) -> f64 {
    let xs = fit.standardization.transform(data.x());
    let y = data.require_y().expect("fit came from labeled data");
    kkt_violation_std(
        &xs,
        y,
        &fit.weights,
        &fit.spec,
        fit.n_weighted,
        &fit.coefs_standardized,
    )
}

/// Geometric grid of `n_lambda` penalty levels from `lambda_max` down to
/// `lambda_max * ratio`. `lambda_max` is the smallest level at which every
/// penalized coefficient is zero, computed from the KKT bound at the null
/// model; columns with penalty factor zero are partialled out first with an
/// unpenalized fit so their influence does not inflate the bound.
pub fn lambda_grid(
    data: &Dataset,
    alpha: f64,
    penalty_factors: Option<&Array1<f64>>,
    n_lambda: usize,
    ratio: f64,
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    if n_lambda < 2 {
        return Err(Error::InvalidArgument("n_lambda must be at least 2".into()));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidArgument(
            "lambda ratio must lie strictly between 0 and 1".into(),
        ));
    }
    let p = data.n_cols();
    let probe = PenaltySpec {
        alpha,
        lambda: 0.0,
        penalty_factors: penalty_factors.cloned(),
    };
    probe.validate(p)?;
    if (0..p).all(|j| probe.factor(j) == 0.0) {
        return Err(Error::NoPenalizedCoefficients);
    }
    data.require_complete()?;
    let y = data.require_y()?.clone();
    config.validate(data.n_rows())?;
    let w = effective_weights(data.n_rows(), config);
    check_both_classes(&y, &w)?;

    let prepared = prepare_design(
        data.x(),
        data.col_names(),
        &w,
        &probe,
        config.standardize,
        config.standardization_mode,
    )?;
    let n_w = w.sum();

    // Null-model probabilities: intercept-only MLE, or an unpenalized fit on
    // the exempt columns when there are any.
    let unpenalized: Vec<usize> = (0..p)
        .filter(|&j| probe.factor(j) == 0.0 && !prepared.forced_zero[j])
        .collect();
    let eta0: Array1<f64> = if unpenalized.is_empty() {
        let ybar = (y.iter().zip(w.iter()).map(|(yi, wi)| wi * yi).sum::<f64>() / n_w)
            .clamp(1e-10, 1.0 - 1e-10);
        Array1::from_elem(data.n_rows(), (ybar / (1.0 - ybar)).ln())
    } else {
        let n = data.n_rows();
        let mut xu = Array2::zeros((n, unpenalized.len()).f());
        for (k, &j) in unpenalized.iter().enumerate() {
            xu.column_mut(k).assign(&prepared.x.column(j));
        }
        let null_spec = PenaltySpec::new(0.0, 0.0);
        let sol = solve_inner(
            &xu,
            &y,
            &w,
            &null_spec,
            &vec![false; unpenalized.len()],
            config,
            None,
        );
        sol.coefs.linear_predictor(&xu)
    };

    let alpha_eff = alpha.max(0.001);
    let mut lambda_max = 0.0f64;
    for j in 0..p {
        let pj = probe.factor(j);
        if pj == 0.0 || prepared.forced_zero[j] {
            continue;
        }
        let g: f64 = prepared
            .x
            .column(j)
            .iter()
            .zip(y.iter())
            .zip(eta0.iter())
            .zip(w.iter())
            .map(|(((x, yi), e0), wi)| wi * x * (yi - sigmoid(*e0)))
            .sum();
        lambda_max = lambda_max.max(g.abs() / (n_w * alpha_eff * pj));
    }
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(Error::Invalid(
            "lambda_max is degenerate: penalized columns carry no signal against the null model"
                .into(),
        ));
    }
    // Tiny relative headroom so the fit at grid[0] lands exactly at zero
    // despite rounding in the threshold comparison.
    lambda_max *= 1.0 + 1e-9;

    let m = n_lambda - 1;
    let mut grid = Vec::with_capacity(n_lambda);
    for k in 0..n_lambda {
        let lam = if k == m {
            lambda_max * ratio
        } else {
            lambda_max * ratio.powf(k as f64 / m as f64)
        };
        grid.push(lam);
    }
    Ok(grid)
}

/// Fit along a decreasing λ sequence, warm-starting every point from the
/// previous solution. The standardization is computed once.
pub fn fit_enet_path(
    data: &Dataset,
    alpha: f64,
    penalty_factors: Option<&Array1<f64>>,
    lambdas: &[f64],
    config: &SolverConfig,
) -> Result<Vec<FitResult>> {
    if lambdas.is_empty() {
        return Err(Error::EmptySelection("lambda path"));
    }
    let p = data.n_cols();
    let base = PenaltySpec {
        alpha,
        lambda: lambdas[0],
        penalty_factors: penalty_factors.cloned(),
    };
    base.validate(p)?;
    if lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::InvalidArgument(
            "lambda path values must be finite and >= 0".into(),
        ));
    }
    data.require_complete()?;
    let y = data.require_y()?.clone();
    config.validate(data.n_rows())?;
    let w = effective_weights(data.n_rows(), config);
    check_both_classes(&y, &w)?;

    let prepared = prepare_design(
        data.x(),
        data.col_names(),
        &w,
        &base,
        config.standardize,
        config.standardization_mode,
    )?;

    let mut results = Vec::with_capacity(lambdas.len());
    let mut warm: Option<Coefficients> = None;
    for &lam in lambdas {
        let spec = base.at_lambda(lam);
        let sol = solve_inner(
            &prepared.x,
            &y,
            &w,
            &spec,
            &prepared.forced_zero,
            config,
            warm.as_ref(),
        );
        warm = Some(sol.coefs.clone());
        let prep = PreparedDesign {
            x: prepared.x.clone(),
            standardization: prepared.standardization.clone(),
            forced_zero: prepared.forced_zero.clone(),
            warnings: prepared.warnings.clone(),
        };
        results.push(assemble_result(data, &spec, &w, prep, sol));
    }
    Ok(results)
}

/// Flag observations whose Pearson residual under the fit reaches `cutoff`
/// in absolute value (the same criterion the robust reweighting step uses).
pub fn flag_outliers_classical(
    fit: &FitResult,
    data: &Dataset,
    cutoff: f64,
    variant: crate::lts::ResidualVariant,
) -> Result<Vec<bool>> {
    let y = data.require_y()?;
    if y.len() != fit.fitted_prob.len() {
        return Err(Error::DimensionMismatch {
            context: "fitted probabilities".into(),
            expected: y.len(),
            actual: fit.fitted_prob.len(),
        });
    }
    Ok(y.iter()
        .zip(fit.fitted_prob.iter())
        .map(|(yi, pi)| crate::lts::pearson_residual(*yi, *pi, variant).abs() >= cutoff)
        .collect())
}
