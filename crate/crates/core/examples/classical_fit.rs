//! Fit the classical elastic-net logistic model along a lambda path and
//! inspect how the active set grows as the penalty relaxes.
//!
//! Run with: cargo run --release --example classical_fit

use trimlogit::enet::{fit_enet_path, kkt_max_violation, lambda_grid, SolverConfig};
use trimlogit::pipeline::synthetic::{generate_synthetic, SyntheticConfig};

fn main() -> trimlogit::Result<()> {
    // clean sparse instance: 4 active features out of 25
    let config = SyntheticConfig {
        n: 400,
        p: 25,
        sparsity: 4,
        signal: 1.2,
        rho: 0.2,
        seed: 1,
        ..SyntheticConfig::default()
    };
    let (data, truth) = generate_synthetic(&config)?;

    let alpha = 0.8;
    let solver = SolverConfig::default();
    let lambdas = lambda_grid(&data, alpha, None, 30, 0.01, &solver)?;
    let fits = fit_enet_path(&data, alpha, None, &lambdas, &solver)?;

    println!("{:>12}  {:>7}  {:>10}  {:>9}", "lambda", "nonzero", "deviance", "kkt");
    for (lambda, fit) in lambdas.iter().zip(&fits).step_by(3) {
        println!(
            "{:>12.6}  {:>7}  {:>10.3}  {:>9.2e}",
            lambda,
            fit.coefs.n_nonzero(),
            fit.deviance_total,
            kkt_max_violation(&data, fit)
        );
    }

    // a mid-path model usually recovers the planted support
    let mid = &fits[lambdas.len() / 2];
    println!("\nplanted support: {:?}", truth.support);
    println!("mid-path active set: {:?}", mid.coefs.active_set());
    println!("mid-path intercept: {:.4} (true {:.4})", mid.coefs.intercept, truth.intercept);
    for j in &truth.support {
        println!("  beta[{j}] = {:>8.4}   (true {:>5.2})", mid.coefs.beta[*j], truth.beta[*j]);
    }
    Ok(())
}
