//! Measure the projection constants empirically: seeded random ensembles of
//! band-limited fields, ratios `|u - Tu|_W^{k,p} / |Au|_Lp` and friends, and
//! their stability under grid refinement.
//!
//! ```sh
//! cargo run --release --example empirical_constants
//! ```

use maxrank::catalog;
use maxrank::domain::named_mask;
use maxrank::grid::BoxGrid;
use maxrank::project::{empirical_constant, EnsembleConfig, ProjectionConfig};

fn main() -> maxrank::Result<()> {
    let cr = catalog::cauchy_riemann();
    let cfg = ProjectionConfig::default();
    let ens = EnsembleConfig {
        seed: 31337,
        samples: 32,
        band: Some(8), // fixed across the ladder: both grids see the same data
        p_values: vec![1.5, 2.0, 3.0],
        with_negative_norm: true,
        measure_q: None,
    };

    println!("cauchy_riemann on the disk, 32-sample ensembles\n");
    let mut per_grid = Vec::new();
    for size in [64usize, 128] {
        let grid = BoxGrid::new(2, size, 1.0, 2)?;
        let mask = named_mask(&grid, "disk")?;
        let report = empirical_constant(&cr, &grid, &mask, &ens, &cfg)?;
        println!("grid {size}^2:");
        for (metric, stats) in &report.metrics {
            println!(
                "  {metric:<14} max {:>9.4}  median {:>9.4}  (kernel hits {})",
                stats.max, stats.median, stats.kernel_hits
            );
        }
        per_grid.push(report);
    }

    println!("\ncross-refinement drift of the maxima:");
    for (metric, fine) in &per_grid[1].metrics {
        let coarse = &per_grid[0].metrics[metric];
        let drift = (fine.max - coarse.max).abs() / fine.max;
        println!("  {metric:<14} {:.2}%", 100.0 * drift);
    }
    Ok(())
}
