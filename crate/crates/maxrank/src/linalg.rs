//! Dense linear-algebra helpers: Moore-Penrose pseudo-inverse with a relative
//! rank cutoff, numerical rank, and subspace bookkeeping (range bases,
//! orthogonal projectors, iterated intersections).
//!
//! The SVD is a one-sided Jacobi iteration. The matrices here are tiny
//! (symbol evaluations, a handful of rows), and one-sided Jacobi delivers
//! high relative accuracy on rank-deficient inputs where bidiagonalization
//! solvers were observed to return inaccurate factors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Thin SVD `m = u * diag(sigma) * v^T`, singular values non-increasing.
pub struct Svd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// One-sided Jacobi SVD. Columns of `u` with `sigma = 0` are zero vectors.
pub fn jacobi_svd(m: &DMatrix<f64>) -> Svd {
    let transposed = m.nrows() < m.ncols();
    let mut g = if transposed { m.transpose() } else { m.clone() };
    let rows = g.nrows();
    let cols = g.ncols();
    let mut v = DMatrix::<f64>::identity(cols, cols);

    let tol = 1e-15;
    for _sweep in 0..64 {
        let mut changed = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut a = 0.0;
                let mut b = 0.0;
                let mut d = 0.0;
                for i in 0..rows {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)];
                    a += gp * gp;
                    b += gq * gq;
                    d += gp * gq;
                }
                if a == 0.0 || b == 0.0 || d.abs() <= tol * (a * b).sqrt() {
                    continue;
                }
                changed = true;
                let zeta = (b - a) / (2.0 * d);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let gp = g[(i, p)];
                    let gq = g[(i, q)];
                    g[(i, p)] = c * gp - s * gq;
                    g[(i, q)] = s * gp + c * gq;
                }
                for i in 0..cols {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| g.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());

    let mut u = DMatrix::<f64>::zeros(rows, cols);
    let mut vv = DMatrix::<f64>::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            u.set_column(slot, &(g.column(j) / s));
        }
        vv.set_column(slot, &v.column(j));
    }

    if transposed {
        Svd {
            u: vv,
            sigma,
            v: u,
        }
    } else {
        Svd { u, sigma, v: vv }
    }
}

/// Moore-Penrose pseudo-inverse via the Jacobi SVD.
///
/// A singular value sigma_i is inverted iff `sigma_i > rel_tol * sigma_max`.
/// The zero matrix maps to the (transposed-shape) zero matrix.
pub fn pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let svd = jacobi_svd(m);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let cut = rel_tol * smax;
    let mut out = DMatrix::<f64>::zeros(cols, rows);
    for i in 0..svd.sigma.len() {
        let s = svd.sigma[i];
        if s > cut && s > 0.0 {
            let vi = svd.v.column(i);
            let ui = svd.u.column(i);
            out += vi * ui.transpose() / s;
        }
    }
    out
}

/// Pseudo-inverse of a complex matrix via the realification
/// `M -> [[Re M, -Im M], [Im M, Re M]]`; the embedding preserves products and
/// adjoints, so the four Moore-Penrose identities transport verbatim.
pub fn pinv_complex(m: &DMatrix<Complex64>, rel_tol: f64) -> DMatrix<Complex64> {
    let (rows, cols) = m.shape();
    let mut real = DMatrix::<f64>::zeros(2 * rows, 2 * cols);
    for r in 0..rows {
        for c in 0..cols {
            let z = m[(r, c)];
            real[(r, c)] = z.re;
            real[(r, c + cols)] = -z.im;
            real[(r + rows, c)] = z.im;
            real[(r + rows, c + cols)] = z.re;
        }
    }
    let p = pinv(&real, rel_tol);
    DMatrix::from_fn(cols, rows, |r, c| Complex64::new(p[(r, c)], p[(r + cols, c)]))
}

/// Numerical rank with the same relative cutoff as [`pinv`].
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = jacobi_svd(m).sigma;
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    jacobi_svd(m).sigma
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    jacobi_svd(m).sigma.first().copied().unwrap_or(0.0)
}

/// Spectral norm of a complex matrix (via realification; the real embedding
/// has the same singular values, doubled in multiplicity).
pub fn spectral_norm_complex(m: &DMatrix<Complex64>) -> f64 {
    let (rows, cols) = m.shape();
    let mut real = DMatrix::<f64>::zeros(2 * rows, 2 * cols);
    for r in 0..rows {
        for c in 0..cols {
            let z = m[(r, c)];
            real[(r, c)] = z.re;
            real[(r, c + cols)] = -z.im;
            real[(r + rows, c)] = z.im;
            real[(r + rows, c + cols)] = z.re;
        }
    }
    spectral_norm(&real)
}

/// Orthonormal basis of the column space, as the columns of the result.
pub fn range_basis(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    let svd = jacobi_svd(m);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return DMatrix::zeros(rows, 0);
    }
    let r = svd.sigma.iter().filter(|&&s| s > rel_tol * smax).count();
    svd.u.columns(0, r).into_owned()
}

/// Orthogonal projector `Q Q^T` onto the span of an orthonormal `basis`.
pub fn projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

/// Extends an orthonormal set `basis` (columns) by the columns of `m`,
/// keeping only directions with residual norm above `tol`.
pub fn grow_span(basis: &mut Vec<DVector<f64>>, m: &DMatrix<f64>, tol: f64) {
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        // two passes of Gram-Schmidt for stability
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        let nrm = v.norm();
        if nrm > tol {
            basis.push(v / nrm);
        }
    }
}

/// Intersection of `span(current)` with the column space of the orthonormal
/// basis `other`. Both inputs and the output hold orthonormal columns.
pub fn intersect_spans(current: &DMatrix<f64>, other: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let rows = current.nrows();
    if current.ncols() == 0 || other.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    // Directions c in span(current) with (I - P_other) c = 0.
    let p_other = projector(other);
    let defect = current - &p_other * current; // rows x dim(current)
    let svd = jacobi_svd(&defect);
    let mut keep: Vec<DVector<f64>> = Vec::new();
    for i in 0..svd.sigma.len() {
        if svd.sigma[i] <= tol {
            let coeffs = svd.v.column(i).into_owned();
            keep.push(current * coeffs);
        }
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in keep {
        let m = DMatrix::from_column_slice(rows, 1, v.as_slice());
        grow_span(&mut basis, &m, 1e-10);
    }
    let mut res = DMatrix::zeros(rows, basis.len());
    for (i, b) in basis.iter().enumerate() {
        res.set_column(i, b);
    }
    res
}

/// Minimum-norm least-squares solution of `a x = b` together with the
/// residual norm `|a x - b|`.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> (DVector<f64>, f64) {
    let p = pinv(a, rel_tol);
    let x = &p * b;
    let res = (a * &x - b).norm();
    (x, res)
}

/// Maximum relative defect of the four Moore-Penrose identities for `(m, p)`.
///
/// Independent check used by tests and the acceptance suite: it never calls
/// back into [`pinv`] internals.
pub fn mp_identity_defect(m: &DMatrix<f64>, p: &DMatrix<f64>) -> f64 {
    let scale_m = m.norm().max(1e-300);
    let scale_p = p.norm().max(1e-300);
    let mpm = (m * p * m - m).norm() / scale_m;
    let pmp = (p * m * p - p).norm() / scale_p;
    let mp = m * p;
    let pm = p * m;
    let sym1 = (&mp - mp.transpose()).norm() / mp.norm().max(1.0);
    let sym2 = (&pm - pm.transpose()).norm() / pm.norm().max(1.0);
    mpm.max(pmp).max(sym1).max(sym2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pinv_row_vector_closed_form() {
        // [1, 2]^dag = (0.2, 0.4)^T, i.e. xi^T / |xi|^2
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let p = pinv(&m, 1e-9);
        assert_relative_eq!(p[(0, 0)], 0.2, epsilon = 1e-14);
        assert_relative_eq!(p[(1, 0)], 0.4, epsilon = 1e-14);
        assert!(mp_identity_defect(&m, &p) < 1e-12);
    }

    #[test]
    fn pinv_identity_and_zero() {
        let id = DMatrix::<f64>::identity(3, 3);
        let p = pinv(&id, 1e-9);
        assert_relative_eq!((p - &id).norm(), 0.0, epsilon = 1e-14);

        let z = DMatrix::<f64>::zeros(2, 4);
        let pz = pinv(&z, 1e-9);
        assert_eq!(pz.shape(), (4, 2));
        assert_eq!(pz.norm(), 0.0);
    }

    #[test]
    fn pinv_cauchy_riemann_symbol() {
        // L(xi) at xi = (1,2) has pinv L^T / 5.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 2.0, 1.0]);
        let p = pinv(&m, 1e-9);
        let expect = m.transpose() / 5.0;
        assert_relative_eq!((p - expect).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn pinv_rank_deficient() {
        // rank-1 2x3 matrix
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(rank(&m, 1e-9), 1);
        let p = pinv(&m, 1e-9);
        assert!(mp_identity_defect(&m, &p) < 1e-12);
    }

    #[test]
    fn pinv_complex_matrix() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let m = DMatrix::from_row_slice(2, 2, &[one, i, -i, one]);
        let p = pinv_complex(&m, 1e-9);
        // m is singular (rank 1): check MP identities hold
        let mpm = (&m * &p * &m - &m).norm();
        let pmp = (&p * &m * &p - &p).norm();
        assert!(mpm < 1e-12 && pmp < 1e-12, "mpm={mpm} pmp={pmp}");
        // hermitian products
        let mp = &m * &p;
        assert!((&mp - mp.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn jacobi_svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..500 {
            let r = rng.gen_range(1..=8);
            let c = rng.gen_range(1..=8);
            let m = if trial % 3 == 0 {
                let k = rng.gen_range(1..=r.min(c));
                let a = DMatrix::<f64>::from_fn(r, k, |_, _| rng.gen_range(-1.0..1.0));
                let b = DMatrix::<f64>::from_fn(k, c, |_, _| rng.gen_range(-1.0..1.0));
                a * b
            } else {
                DMatrix::<f64>::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
            };
            let svd = jacobi_svd(&m);
            let mut rec = DMatrix::<f64>::zeros(r, c);
            for i in 0..svd.sigma.len() {
                rec += svd.u.column(i) * svd.v.column(i).transpose() * svd.sigma[i];
            }
            let err = (rec - &m).norm() / m.norm().max(1e-300);
            assert!(err < 1e-12, "trial {trial}: reconstruction error {err}");
        }
    }

    #[test]
    fn mp_identities_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..200 {
            let r = rng.gen_range(1..=8);
            let c = rng.gen_range(1..=8);
            let mut m = DMatrix::<f64>::zeros(r, c);
            if trial % 5 == 0 {
                // deliberately rank-deficient via thin product
                let k = rng.gen_range(1..=r.min(c));
                let a = DMatrix::<f64>::from_fn(r, k, |_, _| rng.gen_range(-1.0..1.0));
                let b = DMatrix::<f64>::from_fn(k, c, |_, _| rng.gen_range(-1.0..1.0));
                m = a * b;
            } else {
                for v in m.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
            let p = pinv(&m, 1e-12);
            assert!(
                mp_identity_defect(&m, &p) < 1e-10,
                "trial {trial} defect {}",
                mp_identity_defect(&m, &p)
            );
        }
    }

    #[test]
    fn range_and_intersection() {
        // im of (e1, e2) spans, intersect with span{e2, e3} -> span{e2}
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let ba = range_basis(&a, 1e-9);
        let bb = range_basis(&b, 1e-9);
        let inter = intersect_spans(&ba, &bb, 1e-9);
        assert_eq!(inter.ncols(), 1);
        assert_relative_eq!(inter[(1, 0)].abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn min_norm_divergence_example() {
        // B = [1 0 0 1], c = 1 -> x = (1/2, 0, 0, 1/2)
        let a = DMatrix::from_row_slice(1, 4, &[1.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0]);
        let (x, res) = min_norm_solve(&a, &b, 1e-12);
        assert!(res < 1e-14);
        assert_relative_eq!(x[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(x[3], 0.5, epsilon = 1e-14);
        assert_relative_eq!(x[1], 0.0, epsilon = 1e-14);
    }
}
