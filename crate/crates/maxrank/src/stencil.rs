//! Central finite-difference stencils on masked grids.
//!
//! Masked fields are not periodic-smooth, so kernel-membership checks use
//! local stencils instead of spectral differentiation. Stencil coefficients
//! are generated by solving the moment (Vandermonde) system exactly for the
//! requested derivative and accuracy order; tensor products of the 1-D rules
//! realize mixed multi-index derivatives.

use crate::domain::DomainMask;
use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::norms::{NormKind, NormReport};
use crate::symbol::OperatorSpec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Radius of the central stencil for the `m`-th derivative at accuracy `q`
/// (`q` even).
pub fn stencil_radius(m: u32, q: usize) -> usize {
    if m == 0 {
        return 0;
    }
    let m = m as usize;
    if m % 2 == 1 {
        (m + q - 1) / 2
    } else {
        (m + q - 2) / 2
    }
}

/// Coefficients `c_{-r..r}` (for unit spacing) with
/// `D^m u(x) ~ h^-m sum_j c_j u(x + j h)`, exact on polynomials of degree
/// `<= m + q - 1`.
pub fn stencil_1d(m: u32, q: usize) -> (usize, Vec<f64>) {
    assert!(q > 0 && q % 2 == 0, "stencil order must be positive and even");
    if m == 0 {
        return (0, vec![1.0]);
    }
    let r = stencil_radius(m, q);
    let npts = 2 * r + 1;
    // moment conditions: sum_j c_j j^t = m! delta_{t m}, t = 0..2r
    let a = DMatrix::from_fn(npts, npts, |t, j| {
        let node = j as f64 - r as f64;
        node.powi(t as i32)
    });
    let mut b = DVector::zeros(npts);
    let mfact: f64 = (1..=m as u64).product::<u64>() as f64;
    b[m as usize] = mfact;
    let c = a
        .full_piv_lu()
        .solve(&b)
        .expect("stencil moment system is nonsingular");
    (r, c.iter().cloned().collect())
}

/// Flattened tensor-product stencil: a list of (index offsets, weight) taps,
/// weights already scaled by `h^{-|alpha|}`.
fn alpha_taps(alpha: &[u32], q: usize, h: f64) -> Vec<(Vec<i64>, f64)> {
    let order: u32 = alpha.iter().sum();
    let scale = h.powi(-(order as i32));
    let mut taps: Vec<(Vec<i64>, f64)> = vec![(Vec::new(), scale)];
    for &m in alpha {
        let (r, c) = stencil_1d(m, q);
        let mut next = Vec::with_capacity(taps.len() * (2 * r + 1));
        for (off, w) in &taps {
            for (j, &cj) in c.iter().enumerate() {
                if cj == 0.0 {
                    continue;
                }
                let mut o = off.clone();
                o.push(j as i64 - r as i64);
                next.push((o, w * cj));
            }
        }
        taps = next;
    }
    taps
}

/// The conservative interior-margin radius for evaluating `spec` with
/// accuracy-`q` stencils: enough for the largest per-axis derivative.
pub fn operator_stencil_radius(spec: &OperatorSpec, q: usize) -> usize {
    let mut r = 0;
    for alpha in spec.coeffs().keys() {
        for &m in alpha.entries() {
            r = r.max(stencil_radius(m, q));
        }
    }
    r
}

/// Evaluates `A u` by order-`q` central differences on the interior cells of
/// the mask (cells whose stencils stay inside the mask); zero elsewhere.
/// Returns the field and the interior cell list.
pub fn fd_operator_field(
    spec: &OperatorSpec,
    u: &GridField,
    mask: &DomainMask,
    q: usize,
) -> Result<(GridField, Vec<usize>)> {
    if u.dim() != spec.dim_v() {
        return Err(Error::DimensionMismatch(format!(
            "field has dim {}, operator acts on R^{}",
            u.dim(),
            spec.dim_v()
        )));
    }
    if u.grid() != mask.grid() {
        return Err(Error::DimensionMismatch(
            "field and mask live on different grids".into(),
        ));
    }
    let grid = u.grid();
    let radius = operator_stencil_radius(spec, q);
    let interior = mask.interior_cells(radius);
    if interior.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "interior margin at radius {radius} is empty"
        )));
    }
    let stencils: Vec<(&DMatrix<f64>, Vec<(Vec<i64>, f64)>)> = spec
        .coeffs()
        .iter()
        .map(|(alpha, m)| (m, alpha_taps(alpha.entries(), q, grid.h())))
        .collect();

    let mut out = GridField::zeros(grid, spec.dim_w());
    for &idx in &interior {
        let ix = grid.decompose(idx);
        let mut val = vec![Complex64::new(0.0, 0.0); spec.dim_w()];
        for (mat, taps) in &stencils {
            for (off, w) in taps {
                let mut jx = ix.clone();
                for (a, &o) in off.iter().enumerate() {
                    jx[a] = (ix[a] as i64 + o) as usize;
                }
                let j = grid.flatten(&jx);
                for (row, slot) in val.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for col in 0..spec.dim_v() {
                        let c = mat[(row, col)];
                        if c != 0.0 {
                            acc += u.at(j, col) * c;
                        }
                    }
                    *slot += acc * *w;
                }
            }
        }
        for (c, v) in val.iter().enumerate() {
            out.set(idx, c, *v);
        }
    }
    Ok((out, interior))
}

/// L2 norm over interior cells of the finite-difference evaluation of `A u`;
/// small for restrictions of A-free fields, with order-`q` decay for smooth
/// ones.
pub fn interior_residual(
    spec: &OperatorSpec,
    u: &GridField,
    mask: &DomainMask,
    q: usize,
) -> Result<NormReport> {
    let (field, interior) = fd_operator_field(spec, u, mask, q)?;
    let grid = u.grid();
    let hn = grid.h().powi(grid.n() as i32);
    let mut acc = 0.0;
    for &idx in &interior {
        acc += field.value_norm(idx).powi(2);
    }
    Ok(NormReport {
        which: NormKind::SobolevInterior,
        p: 2.0,
        order: q as i32,
        value: (acc * hn).sqrt(),
        cells_used: interior.len(),
    })
}
