//! Select (alpha, lambda) by repeated stratified k-fold cross-validation.
//!
//! Run with: cargo run --release --example cross_validation

use trimlogit::cv::{cross_validate, CvConfig, Estimator};
use trimlogit::enet::SolverConfig;
use trimlogit::pipeline::synthetic::{generate_synthetic, SyntheticConfig};

fn main() -> trimlogit::Result<()> {
    let (data, truth) = generate_synthetic(&SyntheticConfig {
        n: 250,
        p: 15,
        sparsity: 3,
        signal: 1.5,
        seed: 11,
        ..SyntheticConfig::default()
    })?;

    let cv = CvConfig {
        k_folds: 5,
        n_repeats: 3,
        alpha_grid: vec![0.5, 1.0],
        n_lambda: 20,
        lambda_ratio: 0.01,
        rng_seed: 2024,
        estimator: Estimator::Classical,
        ..CvConfig::default()
    };
    let result = cross_validate(&data, &cv, None, &SolverConfig::default())?;

    println!("{:>6}  {:>12}  {:>13}  {:>8}", "alpha", "lambda", "mean deviance", "nonzero");
    for cell in result.cells.iter().step_by(4) {
        if let Some(mean) = cell.mean_deviance {
            println!(
                "{:>6.2}  {:>12.6}  {:>13.4}  {:>8}",
                cell.alpha, cell.lambda, mean, cell.n_nonzero
            );
        }
    }
    println!(
        "\nselected alpha = {}, lambda = {:.6}",
        result.best_alpha, result.best_lambda
    );

    let best = result
        .cells
        .iter()
        .find(|c| c.alpha == result.best_alpha && c.lambda == result.best_lambda)
        .expect("winning cell is in the table");
    println!(
        "held-out deviance {:.4} with {} nonzero coefficients (true support size {})",
        best.mean_deviance.unwrap(),
        best.n_nonzero,
        truth.support.len()
    );
    Ok(())
}
