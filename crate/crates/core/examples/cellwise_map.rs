//! Detect deviating cells in a correlated matrix and render the cell map.
//!
//! Run with: cargo run --release --example cellwise_map

use trimlogit::ddc::{detect, render_cell_map, CellFlag, DdcConfig, RenderFormat};
use trimlogit::pipeline::synthetic::{generate_synthetic, SyntheticConfig};

fn main() -> trimlogit::Result<()> {
    // strongly correlated columns, 4% of cells shifted by +6 sigma
    let config = SyntheticConfig {
        n: 120,
        p: 12,
        sparsity: 0,
        rho: 0.7,
        cell_outlier_rate: 0.04,
        cell_outlier_size: 6.0,
        seed: 23,
        ..SyntheticConfig::default()
    };
    let (data, truth) = generate_synthetic(&config)?;

    let map = detect(&data, &DdcConfig::default())?;

    let caught = truth
        .outlier_cells
        .iter()
        .filter(|&&(i, j)| map.flags[i][j] == CellFlag::High)
        .count();
    println!(
        "planted {} bad cells, recovered {} (cutoff |r| > {:.3})",
        truth.outlier_cells.len(),
        caught,
        map.cutoff
    );

    // text render of the most anomalous rows
    let mut by_score: Vec<usize> = (0..map.n_rows()).collect();
    by_score.sort_by(|&a, &b| map.row_scores[b].total_cmp(&map.row_scores[a]));
    let worst: Vec<usize> = by_score.into_iter().take(12).collect();
    println!("\nworst rows by score:\n");
    print!("{}", render_cell_map(&map, Some(&worst), None, RenderFormat::Txt)?);

    // full SVG lands in the temp directory
    let svg = render_cell_map(&map, None, None, RenderFormat::Svg)?;
    let path = std::env::temp_dir().join("cellmap_example.svg");
    std::fs::write(&path, svg)?;
    println!("\nfull map written to {}", path.display());
    Ok(())
}
