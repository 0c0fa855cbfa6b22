//! The Korn projection for the Cauchy-Riemann system on a disk: project the
//! anti-holomorphic field `zbar` and compare the projection distance with an
//! independent least-squares projection onto holomorphic polynomials.
//!
//! ```sh
//! cargo run --example korn_projection
//! ```

use maxrank::catalog;
use maxrank::domain::{DomainMask, Shape};
use maxrank::grid::{BoxGrid, GridField};
use maxrank::norms::sobolev_norm_with_poly;
use maxrank::project::{korn_project, ProjectionConfig};
use nalgebra::{DMatrix, DVector};

fn main() -> maxrank::Result<()> {
    let grid = BoxGrid::new(2, 256, 1.0, 2)?;
    let center = [0.5, 0.5];
    let mask = DomainMask::from_shape(
        &grid,
        &Shape::Ball {
            center: center.to_vec(),
            radius: 0.15,
        },
    )?;
    let cr = catalog::cauchy_riemann();

    // u = zbar about the disk center; A u = (2, 0)
    let u = GridField::from_real_fn(&grid, 2, |x, c| {
        if c == 0 {
            x[0] - center[0]
        } else {
            -(x[1] - center[1])
        }
    });
    let au = GridField::from_real_fn(&grid, 2, |_, c| if c == 0 { 2.0 } else { 0.0 });

    let cfg = ProjectionConfig::default();
    let res = korn_project(&cr, &u, &au, &mask, &cfg)?;
    let dist = sobolev_norm_with_poly(&res.w_periodic, Some(&res.w_poly), &mask, 1, 2.0)?;
    println!("|zbar - T zbar|_W^{{1,2}}(disk) = {:.6e}", dist.value);
    println!("interior CR-residual of T zbar  = {:.3e}", res.kernel_residual.value);

    // least-squares oracle: distance from zbar to holomorphic polynomials of
    // degree <= 12 in the same discrete W^{1,2} inner product
    let oracle = holomorphic_distance(&grid, &mask, center, 12);
    println!("degree-12 holomorphic least-squares distance = {oracle:.6e}");
    println!(
        "relative agreement: {:.2}%",
        100.0 * (dist.value - oracle).abs() / oracle
    );
    Ok(())
}

/// Brute-force projection of zbar onto span{z^j, i z^j : j <= degree} in the
/// discrete W^{1,2}(mask) inner product; all derivatives analytic.
fn holomorphic_distance(grid: &BoxGrid, mask: &DomainMask, center: [f64; 2], degree: usize) -> f64 {
    // basis fields and their first derivatives as real 2-vectors
    type F = Box<dyn Fn(f64, f64) -> [[f64; 2]; 3]>; // [value, d/dx, d/dy]
    let mut basis: Vec<F> = Vec::new();
    for j in 0..=degree {
        for imag in [false, true] {
            basis.push(Box::new(move |x, y| {
                // z^j and its derivative j z^(j-1), multiplied by i when imag
                let z = num_complex::Complex64::new(x, y);
                let zj = z.powu(j as u32);
                let dz = if j == 0 {
                    num_complex::Complex64::new(0.0, 0.0)
                } else {
                    z.powu(j as u32 - 1) * j as f64
                };
                let (v, d) = if imag {
                    (
                        num_complex::Complex64::new(0.0, 1.0) * zj,
                        num_complex::Complex64::new(0.0, 1.0) * dz,
                    )
                } else {
                    (zj, dz)
                };
                // holomorphic: du/dx = f', du/dy = i f'
                let dy = num_complex::Complex64::new(0.0, 1.0) * d;
                [[v.re, v.im], [d.re, d.im], [dy.re, dy.im]]
            }));
        }
    }
    let target = |x: f64, y: f64| -> [[f64; 2]; 3] {
        // zbar = (x, -y): gradient rows
        [[x, -y], [1.0, 0.0], [0.0, -1.0]]
    };

    let hn = grid.h() * grid.h();
    let nb = basis.len();
    let mut gram = DMatrix::<f64>::zeros(nb, nb);
    let mut rhs = DVector::<f64>::zeros(nb);
    let mut target_sq = 0.0;
    for &idx in mask.true_cells() {
        let xy = grid.coord(idx);
        let (x, y) = (xy[0] - center[0], xy[1] - center[1]);
        let t = target(x, y);
        let vals: Vec<[[f64; 2]; 3]> = basis.iter().map(|b| b(x, y)).collect();
        for a in 0..nb {
            for b in a..nb {
                let mut dot = 0.0;
                for part in 0..3 {
                    for comp in 0..2 {
                        dot += vals[a][part][comp] * vals[b][part][comp];
                    }
                }
                gram[(a, b)] += dot * hn;
                if a != b {
                    gram[(b, a)] = gram[(a, b)];
                }
            }
            let mut dot = 0.0;
            for part in 0..3 {
                for comp in 0..2 {
                    dot += vals[a][part][comp] * t[part][comp];
                }
            }
            rhs[a] += dot * hn;
        }
        for part in 0..3 {
            for comp in 0..2 {
                target_sq += t[part][comp] * t[part][comp] * hn;
            }
        }
    }
    let coeffs = maxrank::linalg::pinv(&gram, 1e-12) * &rhs;
    (target_sq - coeffs.dot(&rhs)).max(0.0).sqrt()
}
