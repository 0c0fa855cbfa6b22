//! Weak Korn projection for a constant-rank operator via its annihilator:
//! the gradient/curl pair, the generalized Laplace-Beltrami multiplier and
//! the negative-norm ratio.
//!
//! ```sh
//! cargo run --example weak_korn
//! ```

use maxrank::catalog::catalog_annihilator;
use maxrank::classify::{classify, delta_w, SampleConfig};
use maxrank::domain::named_mask;
use maxrank::grid::{random_band_limited, BoxGrid};
use maxrank::multiplier::apply_operator;
use maxrank::norms::{lp_norm, neg_sobolev_norm_2};
use maxrank::project::{delta_w_multiplier, weak_korn_project, ProjectionConfig};
use std::collections::BTreeMap;

fn main() -> maxrank::Result<()> {
    let params: BTreeMap<String, i64> = [("n".to_string(), 2i64)].into_iter().collect();
    let pair = catalog_annihilator("grad_curl", &params)?;
    println!(
        "pair grad_curl(n=2): verified {}, k = {}, k_Q = {}",
        pair.verified_exact(),
        pair.order_k(),
        pair.order_kq()
    );

    // Delta_W is an elliptic system with symbol |xi|^2 I
    let dw = delta_w(&pair)?;
    let c = classify(&dw, &SampleConfig::default())?;
    println!(
        "Delta_W: order {}, elliptic system {}, maximal rank {}",
        dw.order(),
        c.is_elliptic_system,
        c.is_maximal_rank
    );

    let grid = BoxGrid::new(2, 128, 1.0, 2)?;
    let table = delta_w_multiplier(&pair, &grid)?;
    let scale = 2.0 * std::f64::consts::PI / grid.length();
    let mut max_dev = 0.0f64;
    for p in 1..grid.points() {
        let m = grid.freq(p);
        let m2: f64 = m.iter().map(|&x| (x * x) as f64).sum();
        for r in 0..2 {
            for cc in 0..2 {
                let want = if r == cc { scale * scale * m2 } else { 0.0 };
                max_dev = max_dev.max((table.value(p, r, cc).re - want).abs() / (scale * scale * m2));
            }
        }
    }
    println!("Delta_W multiplier vs (2 pi |m| / L)^2 I: max deviation {max_dev:.3e}");

    let mask = named_mask(&grid, "disk")?;
    let u = random_band_limited(&grid, 1, 16, 5150);
    let res = weak_korn_project(&pair, &u, &mask, &ProjectionConfig::default())?;
    println!(
        "interior residual of Delta_A(Pi u) = {:.3e}",
        res.kernel_residual.value
    );

    let au = apply_operator(pair.operator(), &u)?;
    let (den, _) = neg_sobolev_norm_2(&au, 1);
    let num = lp_norm(&res.w, &mask, 2.0)?.value;
    println!(
        "|u - Pi u|_L2(disk) / |grad u|_H^-1(box) = {:.4}",
        num / den.value
    );
    Ok(())
}
