//! Seeded synthetic instances for contamination experiments: a sparse
//! logistic model over equicorrelated Gaussian features, with optional label
//! flips, leverage-point inflation, and cellwise shifts — every injected
//! anomaly is recorded in the returned ground truth.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::sigmoid;
use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub p: usize,
    /// Number of truly active features (the first `sparsity` columns).
    pub sparsity: usize,
    /// Magnitude of the active coefficients, alternating sign.
    pub signal: f64,
    /// Baseline P(y = 1); sets the true intercept to its logit.
    pub class_balance: f64,
    /// Equicorrelation of the feature block (0 = independent columns).
    pub rho: f64,
    pub label_flip_rate: f64,
    pub leverage_rate: f64,
    pub cell_outlier_rate: f64,
    /// Cell shifts are `+cell_outlier_size` standard deviations (the clean
    /// model has unit column scale).
    pub cell_outlier_size: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n: 300,
            p: 30,
            sparsity: 5,
            signal: 1.0,
            class_balance: 0.5,
            rho: 0.0,
            label_flip_rate: 0.0,
            leverage_rate: 0.0,
            cell_outlier_rate: 0.0,
            cell_outlier_size: 6.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 4 || self.p == 0 {
            return Err(Error::InvalidArgument(format!(
                "need n >= 4 and p >= 1, got n={}, p={}",
                self.n, self.p
            )));
        }
        if self.sparsity > self.p {
            return Err(Error::InvalidArgument(format!(
                "sparsity {} exceeds p = {}",
                self.sparsity, self.p
            )));
        }
        for (name, rate) in [
            ("label_flip_rate", self.label_flip_rate),
            ("leverage_rate", self.leverage_rate),
            ("cell_outlier_rate", self.cell_outlier_rate),
        ] {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in [0, 1), got {rate}"
                )));
            }
        }
        if !(self.class_balance > 0.0 && self.class_balance < 1.0) {
            return Err(Error::InvalidArgument(
                "class_balance must lie strictly between 0 and 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidArgument(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if !self.signal.is_finite() || !self.cell_outlier_size.is_finite() {
            return Err(Error::InvalidArgument(
                "signal and cell_outlier_size must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Everything that was injected, exactly indexed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub intercept: f64,
    pub beta: Vec<f64>,
    pub support: Vec<usize>,
    pub flipped_rows: Vec<usize>,
    pub leverage_rows: Vec<usize>,
    pub outlier_cells: Vec<(usize, usize)>,
}

impl GroundTruth {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Generate one instance. The draw order is fixed — features, then labels,
/// then each contamination step — so the same seed with contamination rates
/// zeroed reproduces the clean portion bit for bit.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<(Dataset, GroundTruth)> {
    config.validate()?;
    let SyntheticConfig { n, p, .. } = *config;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // clean features: x_ij = sqrt(rho) g_i + sqrt(1 - rho) e_ij
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let shared: f64 = rng.sample(StandardNormal);
        for j in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            x[[i, j]] = config.rho.sqrt() * shared + (1.0 - config.rho).sqrt() * e;
        }
    }

    let mut beta = vec![0.0; p];
    for j in 0..config.sparsity {
        beta[j] = if j % 2 == 0 { config.signal } else { -config.signal };
    }
    let intercept = (config.class_balance / (1.0 - config.class_balance)).ln();

    let mut y = Array1::zeros(n);
    let mut eta = vec![0.0; n];
    for i in 0..n {
        eta[i] = intercept + (0..p).map(|j| beta[j] * x[[i, j]]).sum::<f64>();
        y[i] = f64::from(rng.gen::<f64>() < sigmoid(eta[i]));
    }

    // Leverage rows: all features inflated threefold. Candidates are rows
    // whose drawn label agrees with the model logit by a clear margin, so a
    // later flip on such a row records a genuine contradiction of the
    // generating model instead of a coin-toss relabel near the boundary.
    // The margin relaxes (then disappears) when too few rows qualify, e.g.
    // for a null model where every logit is the same.
    let n_lev = (config.leverage_rate * n as f64).round() as usize;
    let aligned = |i: &usize, m: f64| (2.0 * y[*i] - 1.0) * eta[*i] >= m;
    let mut pool: Vec<usize> = (0..n).filter(|i| aligned(i, 2.0)).collect();
    if pool.len() < n_lev {
        pool = (0..n).filter(|i| aligned(i, f64::MIN_POSITIVE)).collect();
    }
    if pool.len() < n_lev {
        pool = (0..n).collect();
    }
    let leverage_order: Vec<usize> = rand::seq::index::sample(&mut rng, pool.len(), n_lev)
        .into_iter()
        .map(|k| pool[k])
        .collect();
    for &i in &leverage_order {
        for j in 0..p {
            x[[i, j]] *= 3.0;
        }
    }

    // label flips target the leverage rows first, then clean rows
    let n_flip = (config.label_flip_rate * n as f64).round() as usize;
    let mut flipped: Vec<usize> = leverage_order.iter().copied().take(n_flip).collect();
    if n_flip > flipped.len() {
        let pool: Vec<usize> = (0..n).filter(|i| !leverage_order.contains(i)).collect();
        let extra = rand::seq::index::sample(&mut rng, pool.len(), n_flip - flipped.len());
        flipped.extend(extra.into_iter().map(|k| pool[k]));
    }
    for &i in &flipped {
        y[i] = 1.0 - y[i];
    }

    // cellwise shifts of +size standard deviations
    let n_cells = (config.cell_outlier_rate * (n * p) as f64).round() as usize;
    let mut cells: Vec<(usize, usize)> = rand::seq::index::sample(&mut rng, n * p, n_cells)
        .into_iter()
        .map(|flat| (flat / p, flat % p))
        .collect();
    for &(i, j) in &cells {
        x[[i, j]] += config.cell_outlier_size;
    }

    let mut leverage_rows = leverage_order;
    leverage_rows.sort_unstable();
    flipped.sort_unstable();
    cells.sort_unstable();

    let truth = GroundTruth {
        intercept,
        beta,
        support: (0..config.sparsity).collect(),
        flipped_rows: flipped,
        leverage_rows,
        outlier_cells: cells,
    };
    let data = Dataset::from_matrix(x, Some(y))?;
    Ok((data, truth))
}

/// Two-regime variant for network demos: labels are drawn first, then class
/// 1 rows get feature correlation `rho1` and class 0 rows `rho0`. No sparse
/// model, no contamination.
pub fn generate_two_regime(
    n: usize,
    p: usize,
    rho0: f64,
    rho1: f64,
    class_balance: f64,
    seed: u64,
) -> Result<Dataset> {
    if n < 6 || p == 0 {
        return Err(Error::InvalidArgument("need n >= 6 and p >= 1".into()));
    }
    for rho in [rho0, rho1] {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidArgument(format!("rho must lie in [0, 1), got {rho}")));
        }
    }
    if !(class_balance > 0.0 && class_balance < 1.0) {
        return Err(Error::InvalidArgument(
            "class_balance must lie strictly between 0 and 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y: Array1<f64> = (0..n)
        .map(|_| f64::from(rng.gen::<f64>() < class_balance))
        .collect();
    let mut x = Array2::zeros((n, p));
    for i in 0..n {
        let rho = if y[i] == 1.0 { rho1 } else { rho0 };
        let shared: f64 = rng.sample(StandardNormal);
        for j in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            x[[i, j]] = rho.sqrt() * shared + (1.0 - rho).sqrt() * e;
        }
    }
    let names = (1..=p).map(|j| format!("g{j}")).collect();
    let ids = (1..=n).map(|i| format!("r{i}")).collect();
    Dataset::with_missing(x, names, ids, Some(y))
}
