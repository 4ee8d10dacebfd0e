//! Logistic model primitives: overflow-safe link functions, the deviance
//! loss, the elastic-net penalty, and the coefficient container shared by
//! all fitting routines.

use crate::error::{Error, Result};
use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

/// `log(1 + exp(eta))` without overflow for large `|eta|`.
#[inline]
pub fn log1pexp(eta: f64) -> f64 {
    eta.max(0.0) + (-eta.abs()).exp().ln_1p()
}

/// Logistic sigmoid `1 / (1 + exp(-eta))`, overflow-safe on both tails.
#[inline]
pub fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Logistic deviance contribution of one observation,
/// `d(eta, y) = log(1 + exp(eta)) - y * eta`.
#[inline]
pub fn deviance(eta: f64, y: f64) -> f64 {
    log1pexp(eta) - y * eta
}

/// Sum of per-observation deviances.
pub fn total_deviance(eta: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
    eta.iter().zip(y.iter()).map(|(&e, &yi)| deviance(e, yi)).sum()
}

/// Elastic-net penalty specification: mixing parameter, level, and optional
/// per-coefficient penalty factors. The intercept is never penalized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PenaltySpec {
    /// Mixing parameter in `[0, 1]`: 1 is the lasso, 0 is ridge.
    pub alpha: f64,
    /// Penalty level, `>= 0`.
    pub lambda: f64,
    /// Non-negative multiplier per coefficient; 0 exempts a coefficient
    /// from penalization entirely. `None` means all ones.
    pub penalty_factors: Option<Array1<f64>>,
}

impl PenaltySpec {
    pub fn new(alpha: f64, lambda: f64) -> Self {
        Self {
            alpha,
            lambda,
            penalty_factors: None,
        }
    }

    pub fn with_factors(alpha: f64, lambda: f64, factors: Array1<f64>) -> Self {
        Self {
            alpha,
            lambda,
            penalty_factors: Some(factors),
        }
    }

    /// Same spec with a different level (used when walking a λ grid).
    pub fn at_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// Validate against a design with `p` columns.
    pub fn validate(&self, p: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if let Some(f) = &self.penalty_factors {
            if f.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "penalty factors".into(),
                    expected: p,
                    actual: f.len(),
                });
            }
            if f.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidArgument(
                    "penalty factors must be finite and non-negative".into(),
                ));
            }
        }
        Ok(())
    }

    /// Penalty factor of coefficient `j` (1 when no factors are set).
    #[inline]
    pub fn factor(&self, j: usize) -> f64 {
        self.penalty_factors.as_ref().map_or(1.0, |f| f[j])
    }

    /// Penalty bracket without the `nEff * lambda` scaling:
    /// `(1 - alpha)/2 * sum((p_j b_j)^2) + alpha * sum(p_j |b_j|)`.
    pub fn bracket(&self, beta: ArrayView1<f64>) -> f64 {
        let mut l1 = 0.0;
        let mut l2 = 0.0;
        for (j, &b) in beta.iter().enumerate() {
            let pb = self.factor(j) * b;
            l1 += pb.abs();
            l2 += pb * pb;
        }
        (1.0 - self.alpha) * 0.5 * l2 + self.alpha * l1
    }
}

/// Full penalty term `nEff * lambda * [(1-alpha)/2 ||p.b||_2^2 + alpha ||p.b||_1]`.
/// `n_eff` is the (effective) number of observations entering the loss.
pub fn penalty_value(spec: &PenaltySpec, beta: ArrayView1<f64>, n_eff: f64) -> f64 {
    n_eff * spec.lambda * spec.bracket(beta)
}

/// A fitted coefficient vector on some scale of the design matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Coefficients {
    pub intercept: f64,
    pub beta: Array1<f64>,
}

impl Coefficients {
    pub fn zeros(p: usize) -> Self {
        Self {
            intercept: 0.0,
            beta: Array1::zeros(p),
        }
    }

    /// Indices of nonzero coefficients (the intercept is not counted).
    pub fn active_set(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn n_nonzero(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }

    /// Linear predictor `intercept + X beta` for each row of `x`.
    pub fn linear_predictor(&self, x: &Array2<f64>) -> Array1<f64> {
        x.dot(&self.beta) + self.intercept
    }

    /// Predicted class-1 probabilities for each row of `x`.
    pub fn predict_prob(&self, x: &Array2<f64>) -> Array1<f64> {
        self.linear_predictor(x).mapv(sigmoid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_reference_values() {
        assert_abs_diff_eq!(sigmoid(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(sigmoid(2.0), 0.8807970779778823, epsilon = 1e-15);
        assert_abs_diff_eq!(sigmoid(-2.0), 0.11920292202211755, epsilon = 1e-15);
        // extreme tails saturate without NaN/overflow
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
    }

    #[test]
    fn deviance_reference_values() {
        // log(1 + e^2) = 2.1269280110429727
        assert_abs_diff_eq!(deviance(2.0, 0.0), 2.1269280110429727, epsilon = 1e-14);
        assert_abs_diff_eq!(deviance(2.0, 1.0), 0.12692801104297263, epsilon = 1e-14);
        assert_abs_diff_eq!(deviance(0.0, 0.0), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(deviance(0.0, 1.0), std::f64::consts::LN_2, epsilon = 1e-15);
        // huge eta stays finite
        assert!(deviance(5000.0, 0.0).is_finite());
        assert!(deviance(-5000.0, 1.0).is_finite());
        assert_abs_diff_eq!(deviance(5000.0, 1.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn null_total_deviance_is_n_log2() {
        let eta = Array1::zeros(17);
        let y = Array1::from_iter((0..17).map(|i| (i % 2) as f64));
        assert_abs_diff_eq!(
            total_deviance(eta.view(), y.view()),
            17.0 * std::f64::consts::LN_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn deviance_gradient_matches_finite_difference() {
        // d/d(eta) of deviance = sigmoid(eta) - y
        let h = 1e-6;
        for &eta in &[-3.0, -0.4, 0.0, 0.7, 2.5] {
            for &y in &[0.0, 1.0] {
                let fd = (deviance(eta + h, y) - deviance(eta - h, y)) / (2.0 * h);
                assert_abs_diff_eq!(fd, sigmoid(eta) - y, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn penalty_reference_values() {
        let beta = array![1.0, -2.0];
        // lambda = 0.1, nEff = 10: lasso value 10 * 0.1 * 3 = 3.0
        let lasso = PenaltySpec::new(1.0, 0.1);
        assert_abs_diff_eq!(penalty_value(&lasso, beta.view(), 10.0), 3.0, epsilon = 1e-15);
        // alpha = 0.5: 1 * (0.5*5/2 + 0.5*3) = 2.75
        let mixed = PenaltySpec::new(0.5, 0.1);
        assert_abs_diff_eq!(penalty_value(&mixed, beta.view(), 10.0), 2.75, epsilon = 1e-15);
        // pure ridge bracket is ||b||^2 / 2
        let ridge = PenaltySpec::new(0.0, 0.1);
        assert_abs_diff_eq!(ridge.bracket(beta.view()), 2.5, epsilon = 1e-15);
        // lambda = 0 kills the term
        assert_eq!(penalty_value(&PenaltySpec::new(0.7, 0.0), beta.view(), 10.0), 0.0);
        // a zero factor removes the coefficient from the penalty
        let spec = PenaltySpec::with_factors(1.0, 1.0, array![0.0, 1.0]);
        assert_abs_diff_eq!(spec.bracket(beta.view()), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn penalty_validation() {
        assert!(PenaltySpec::new(1.5, 0.1).validate(2).is_err());
        assert!(PenaltySpec::new(0.5, -0.1).validate(2).is_err());
        assert!(PenaltySpec::with_factors(0.5, 0.1, array![-1.0, 1.0])
            .validate(2)
            .is_err());
        assert!(PenaltySpec::with_factors(0.5, 0.1, array![1.0])
            .validate(2)
            .is_err());
        assert!(PenaltySpec::new(0.5, 0.1).validate(2).is_ok());
    }

    #[test]
    fn coefficients_predict_and_active_set() {
        let c = Coefficients {
            intercept: 0.5,
            beta: array![1.0, 0.0, -2.0],
        };
        assert_eq!(c.active_set(), vec![0, 2]);
        assert_eq!(c.n_nonzero(), 2);
        let x = array![[1.0, 9.0, 0.25]];
        let eta = c.linear_predictor(&x);
        assert_abs_diff_eq!(eta[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.predict_prob(&x)[0], sigmoid(1.0), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn deviance_is_nonnegative_and_symmetric(eta in -40.0f64..40.0) {
            prop_assert!(deviance(eta, 0.0) >= 0.0);
            prop_assert!(deviance(eta, 1.0) >= 0.0);
            // swapping the class mirrors the linear predictor
            prop_assert!((deviance(eta, 1.0) - deviance(-eta, 0.0)).abs() < 1e-10);
        }

        #[test]
        fn sigmoid_bounds_and_complement(eta in -700.0f64..700.0) {
            let s = sigmoid(eta);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((s + sigmoid(-eta) - 1.0).abs() < 1e-12);
        }
    }
}
