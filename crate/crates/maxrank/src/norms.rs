//! Discrete norms on masked domains: `L^p`, Sobolev `W^{k,p}` with spectral
//! derivatives of box fields, and homogeneous negative Sobolev norms at
//! `p = 2` as diagonal Fourier weights.

use crate::domain::DomainMask;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::multiplier::spectral_derivative;
use crate::solver::ParticularPolynomial;
use crate::symbol::multi_indices_up_to;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Lp,
    Sobolev,
    SobolevInterior,
    NegSobolev2,
}

/// A computed norm with its provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormReport {
    pub which: NormKind,
    pub p: f64,
    pub order: i32,
    pub value: f64,
    pub cells_used: usize,
}

/// `(sum_cells |u(x)|^p h^n)^(1/p)` over the mask, Euclidean norm on values.
pub fn lp_norm(u: &GridField, mask: &DomainMask, p: f64) -> Result<NormReport> {
    if u.grid() != mask.grid() {
        return Err(Error::DimensionMismatch(
            "field and mask live on different grids".into(),
        ));
    }
    if p < 1.0 {
        return Err(Error::InvalidConfig(format!("p = {p} must be >= 1")));
    }
    let hn = u.grid().h().powi(u.grid().n() as i32);
    let mut acc = 0.0;
    for &idx in mask.true_cells() {
        acc += u.value_norm(idx).powf(p);
    }
    Ok(NormReport {
        which: NormKind::Lp,
        p,
        order: 0,
        value: (acc * hn).powf(1.0 / p),
        cells_used: mask.cell_count(),
    })
}

/// `L^p` norm over the full box (no mask).
pub fn lp_norm_box(u: &GridField, p: f64) -> NormReport {
    let hn = u.grid().h().powi(u.grid().n() as i32);
    let acc: f64 = (0..u.grid().points())
        .map(|idx| u.value_norm(idx).powf(p))
        .sum();
    NormReport {
        which: NormKind::Lp,
        p,
        order: 0,
        value: (acc * hn).powf(1.0 / p),
        cells_used: u.grid().points(),
    }
}

/// Inhomogeneous Sobolev norm
/// `( sum_{|alpha| <= k} |D^alpha u|_{L^p(mask)}^p )^{1/p}` with spectral
/// derivatives; `u` must be a full box field.
pub fn sobolev_norm(u: &GridField, mask: &DomainMask, k: u32, p: f64) -> Result<NormReport> {
    sobolev_norm_with_poly(u, None, mask, k, p)
}

/// Sobolev norm of a field split as `periodic + polynomial`; the polynomial
/// part is differentiated analytically, so the non-periodic component never
/// passes through the FFT.
pub fn sobolev_norm_with_poly(
    periodic: &GridField,
    poly: Option<&ParticularPolynomial>,
    mask: &DomainMask,
    k: u32,
    p: f64,
) -> Result<NormReport> {
    if periodic.grid() != mask.grid() {
        return Err(Error::DimensionMismatch(
            "field and mask live on different grids".into(),
        ));
    }
    if p < 1.0 {
        return Err(Error::InvalidConfig(format!("p = {p} must be >= 1")));
    }
    let grid = periodic.grid();
    let hn = grid.h().powi(grid.n() as i32);
    let mut acc = 0.0;
    for alpha in multi_indices_up_to(grid.n(), k) {
        let d = spectral_derivative(periodic, alpha.entries())?;
        let dp = poly.map(|q| q.derivative(alpha.entries()));
        for &idx in mask.true_cells() {
            let mut v2 = 0.0;
            let x = grid.coord(idx);
            for c in 0..periodic.dim() {
                let mut z = d.at(idx, c);
                if let Some(q) = &dp {
                    z += q.eval_component(&x, c);
                }
                v2 += z.norm_sqr();
            }
            acc += v2.sqrt().powf(p);
        }
    }
    Ok(NormReport {
        which: NormKind::Sobolev,
        p,
        order: k as i32,
        value: (acc * hn).powf(1.0 / p),
        cells_used: mask.cell_count(),
    })
}

/// Evaluates the `W^{k,p}(mask)` norm of `periodic + poly` for several
/// exponents at once, computing each spectral derivative a single time.
pub fn sobolev_norms_multi(
    periodic: &GridField,
    poly: Option<&ParticularPolynomial>,
    mask: &DomainMask,
    k: u32,
    ps: &[f64],
) -> Result<Vec<f64>> {
    if periodic.grid() != mask.grid() {
        return Err(Error::DimensionMismatch(
            "field and mask live on different grids".into(),
        ));
    }
    let grid = periodic.grid();
    let hn = grid.h().powi(grid.n() as i32);
    let mut acc = vec![0.0; ps.len()];
    for alpha in multi_indices_up_to(grid.n(), k) {
        let d = spectral_derivative(periodic, alpha.entries())?;
        let dp = poly.map(|q| q.derivative(alpha.entries()));
        for &idx in mask.true_cells() {
            let mut v2 = 0.0;
            let x = grid.coord(idx);
            for c in 0..periodic.dim() {
                let mut z = d.at(idx, c);
                if let Some(q) = &dp {
                    z += q.eval_component(&x, c);
                }
                v2 += z.norm_sqr();
            }
            let v = v2.sqrt();
            for (slot, &p) in acc.iter_mut().zip(ps.iter()) {
                *slot += v.powf(p);
            }
        }
    }
    Ok(acc
        .iter()
        .zip(ps.iter())
        .map(|(&a, &p)| (a * hn).powf(1.0 / p))
        .collect())
}

/// Homogeneous negative Sobolev norm at `p = 2` of a box field:
/// `( L^n sum_{m != 0} (2 pi |m| / L)^{-2r} |f_hat(m)|^2 )^{1/2}`.
/// Returns the report and the Euclidean norm of the DC coefficient, which is
/// excluded from the sum.
pub fn neg_sobolev_norm_2(f: &GridField, r: u32) -> (NormReport, f64) {
    let grid = f.grid();
    let spec = f.fft();
    let ln = grid.length().powi(grid.n() as i32);
    let scale = 2.0 * std::f64::consts::PI / grid.length();
    let mut acc = 0.0;
    let mut dc = 0.0;
    for point in 0..grid.points() {
        let m = grid.freq(point);
        let m2: f64 = m.iter().map(|&x| (x * x) as f64).sum();
        let mut mag = 0.0;
        for c in 0..f.dim() {
            mag += spec.at(point, c).norm_sqr();
        }
        if m2 == 0.0 {
            dc = mag.sqrt();
            continue;
        }
        let weight = (scale * m2.sqrt()).powi(-2 * r as i32);
        acc += weight * mag;
    }
    (
        NormReport {
            which: NormKind::NegSobolev2,
            p: 2.0,
            order: -(r as i32),
            value: (ln * acc).sqrt(),
            cells_used: grid.points() - 1,
        },
        dc,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::domain::{named_mask, DomainMask, Shape};
    use crate::grid::{random_band_limited, BoxGrid};
    use crate::multiplier::apply_operator;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid2(size: usize) -> BoxGrid {
        BoxGrid::new(2, size, 1.0, 2).unwrap()
    }

    fn unpadded_box_mask(g: &BoxGrid) -> DomainMask {
        let (lo, hi) = g.unpadded_range();
        let l = g.size() as f64;
        DomainMask::from_shape(
            g,
            &Shape::AxisBox {
                min: vec![lo as f64 / l - 1e-9; g.n()],
                max: vec![hi as f64 / l - 1e-9; g.n()],
            },
        )
        .unwrap()
    }

    #[test]
    fn constant_field_lp_matches_volume() {
        let g = grid2(64);
        let mask = named_mask(&g, "disk").unwrap();
        let u = GridField::from_real_fn(&g, 1, |_, _| 1.0);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let r = lp_norm(&u, &mask, p).unwrap();
            assert_relative_eq!(r.value, mask.volume().powf(1.0 / p), epsilon = 1e-12);
        }
        let z = GridField::zeros(&g, 1);
        assert_eq!(lp_norm(&z, &mask, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn single_mode_l2_on_subbox_matches_parseval() {
        // the unpadded box is grid aligned, so the midpoint sum of sin^2 over
        // half a period is exact
        let g = grid2(64);
        let mask = unpadded_box_mask(&g);
        let l = g.length();
        let u = GridField::from_real_fn(&g, 1, |x, _| {
            (2.0 * std::f64::consts::PI * x[0] / l).sin()
        });
        let r = lp_norm(&u, &mask, 2.0).unwrap();
        // integral of sin^2 over the central half in x, times width L/2
        let expect = (l / 4.0 * (l / 2.0)).sqrt();
        assert_relative_eq!(r.value, expect, epsilon = 1e-10);
    }

    #[test]
    fn sobolev_constant_equals_lp() {
        let g = grid2(32);
        let mask = named_mask(&g, "square").unwrap();
        let u = GridField::from_real_fn(&g, 2, |_, c| if c == 0 { 2.0 } else { -1.0 });
        let s = sobolev_norm(&u, &mask, 1, 2.0).unwrap();
        let l = lp_norm(&u, &mask, 2.0).unwrap();
        assert_relative_eq!(s.value, l.value, epsilon = 1e-10);
    }

    #[test]
    fn sobolev_sine_closed_form() {
        let g = grid2(64);
        let mask = unpadded_box_mask(&g);
        let l = g.length();
        let u = GridField::from_real_fn(&g, 1, |x, _| {
            (2.0 * std::f64::consts::PI * x[0] / l).sin()
        });
        let s = sobolev_norm(&u, &mask, 1, 2.0).unwrap();
        let u22 = l / 4.0 * (l / 2.0); // |u|_2^2 on the sub-box
        let du22 = (2.0 * std::f64::consts::PI / l).powi(2) * u22; // cos has the same L2 there
        assert_relative_eq!(s.value, (u22 + du22).sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn neg_sobolev_single_mode() {
        let g = grid2(32);
        let l = g.length();
        let u = GridField::from_real_fn(&g, 1, |x, _| {
            (2.0 * std::f64::consts::PI * (3.0 * x[0] + x[1]) / l).cos()
        });
        let (r0, dc) = neg_sobolev_norm_2(&u, 0);
        let box_l2 = lp_norm_box(&u, 2.0);
        assert_relative_eq!(r0.value, box_l2.value, epsilon = 1e-10);
        assert!(dc < 1e-14);
        let (r2, _) = neg_sobolev_norm_2(&u, 2);
        let m = (10.0f64).sqrt() * 2.0 * std::f64::consts::PI / l;
        assert_relative_eq!(r2.value, box_l2.value * m.powi(-2), epsilon = 1e-10);
    }

    #[test]
    fn neg_sobolev_cancels_laplacian() {
        let g = grid2(64);
        let lap = catalog::laplacian(2).unwrap();
        let u = random_band_limited(&g, 1, 8, 5);
        let au = apply_operator(&lap, &u).unwrap();
        let (r, dc) = neg_sobolev_norm_2(&au, 2);
        let box_l2 = lp_norm_box(&u, 2.0);
        assert!(dc < 1e-12);
        assert_relative_eq!(r.value, box_l2.value, epsilon = 1e-9);
    }

    #[test]
    fn mask_monotonicity() {
        let g = grid2(64);
        let small = named_mask(&g, "small_disk").unwrap();
        let big = named_mask(&g, "disk").unwrap();
        let u = random_band_limited(&g, 2, 6, 3);
        for p in [1.0, 2.0, 3.0] {
            let a = lp_norm(&u, &small, p).unwrap().value;
            let b = lp_norm(&u, &big, p).unwrap().value;
            assert!(a <= b + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn norm_axioms(seed in 0u64..1000, c in -3.0f64..3.0) {
            let g = grid2(32);
            let mask = named_mask(&g, "disk").unwrap();
            let u = random_band_limited(&g, 2, 4, seed);
            let v = random_band_limited(&g, 2, 4, seed.wrapping_add(1));
            for p in [1.0, 1.5, 2.0] {
                // absolute homogeneity
                let cu = {
                    let mut t = GridField::zeros(&g, 2);
                    t.axpy(&u, c).unwrap();
                    t
                };
                let nu = lp_norm(&u, &mask, p).unwrap().value;
                let ncu = lp_norm(&cu, &mask, p).unwrap().value;
                prop_assert!((ncu - c.abs() * nu).abs() <= 1e-9 * (1.0 + nu));
                // triangle inequality
                let mut sum = u.clone();
                sum.axpy(&v, 1.0).unwrap();
                let ns = lp_norm(&sum, &mask, p).unwrap().value;
                let nv = lp_norm(&v, &mask, p).unwrap().value;
                prop_assert!(ns <= nu + nv + 1e-9);
            }
        }
    }
}
