//! Catalog of concrete operators: divergence, higher-order divergence,
//! gradients, Laplacians, the Cauchy-Riemann system, symmetric and deviatoric
//! gradients, and the exterior-calculus family (d, delta, Laplace-Beltrami),
//! each bundled with its expected classification flags and, where available,
//! an annihilator partner. This is the golden corpus for the test suites.

use crate::classify::{self, AnnihilatorPair, Classification, SampleConfig};
use crate::error::{Error, Result};
use crate::symbol::{multi_indices_of_order, MultiIndex, OperatorSpec};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Known subset of classification flags for a catalog entry; every field
/// left `None` is not asserted.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ExpectedFlags {
    pub maximal_rank: Option<bool>,
    pub elliptic: Option<bool>,
    pub elliptic_system: Option<bool>,
    pub canceling: Option<bool>,
    pub constant_rank: Option<bool>,
    pub rank: Option<usize>,
}

impl ExpectedFlags {
    /// Returns the list of mismatches between the expected flags and an
    /// actual classification (empty = consistent).
    pub fn mismatches(&self, c: &Classification) -> Vec<String> {
        let mut out = Vec::new();
        let mut chk = |name: &str, expect: Option<bool>, got: bool| {
            if let Some(e) = expect {
                if e != got {
                    out.push(format!("{name}: expected {e}, classified {got}"));
                }
            }
        };
        chk("maximal_rank", self.maximal_rank, c.is_maximal_rank);
        chk("elliptic", self.elliptic, c.is_elliptic);
        chk("elliptic_system", self.elliptic_system, c.is_elliptic_system);
        chk("canceling", self.canceling, c.is_canceling);
        chk("constant_rank", self.constant_rank, c.is_constant_rank);
        if let Some(r) = self.rank {
            if c.rank_min != r || c.rank_max != r {
                out.push(format!(
                    "rank: expected {r}, classified [{}, {}]",
                    c.rank_min, c.rank_max
                ));
            }
        }
        out
    }
}

/// A named operator with parameters, expected flags and optional partner.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub params: BTreeMap<String, i64>,
    pub spec: OperatorSpec,
    pub expected: ExpectedFlags,
    pub partner: Option<&'static str>,
}

impl CatalogEntry {
    /// Builds and verifies the annihilator partner named by this entry.
    pub fn partner_pair(&self) -> Option<Result<AnnihilatorPair>> {
        self.partner
            .map(|name| catalog_annihilator(name, &self.params))
    }

    pub fn label(&self) -> String {
        if self.params.is_empty() {
            self.name.clone()
        } else {
            let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("{}({})", self.name, ps.join(","))
        }
    }
}

// ---------------------------------------------------------------------------
// basic constructors
// ---------------------------------------------------------------------------

fn unit_alpha(n: usize, axis: usize) -> MultiIndex {
    let mut e = vec![0u32; n];
    e[axis] = 1;
    MultiIndex::new(e).unwrap()
}

/// Row-wise divergence on fields `R^n -> R^{rows x n}` (row-major flattening
/// of the unknown into `V = R^{rows*n}`).
pub fn divergence(n: usize, rows: usize) -> Result<OperatorSpec> {
    if n < 1 || rows < 1 {
        return Err(Error::InvalidParams("divergence requires n, rows >= 1".into()));
    }
    let dim_v = rows * n;
    let mut coeffs = BTreeMap::new();
    for l in 0..n {
        let mut m = DMatrix::zeros(rows, dim_v);
        for i in 0..rows {
            m[(i, i * n + l)] = 1.0;
        }
        coeffs.insert(unit_alpha(n, l), m);
    }
    OperatorSpec::new(n, dim_v, rows, 1, coeffs)
}

/// k-th order divergence `div^k F = sum_{|beta|=k} D^beta F_beta` from
/// `R^{#(|beta|=k)}` to `R`; components ordered lexicographically by beta.
pub fn div_k(n: usize, k: u32) -> Result<OperatorSpec> {
    if n < 1 || k < 1 {
        return Err(Error::InvalidParams("div_k requires n >= 1, k >= 1".into()));
    }
    let betas = multi_indices_of_order(n, k);
    let dim_v = betas.len();
    let mut coeffs = BTreeMap::new();
    for (i, beta) in betas.iter().enumerate() {
        let mut m = DMatrix::zeros(1, dim_v);
        m[(0, i)] = 1.0;
        coeffs.insert(beta.clone(), m);
    }
    OperatorSpec::new(n, dim_v, 1, k, coeffs)
}

/// Gradient on scalars, components in axis order.
pub fn gradient(n: usize) -> Result<OperatorSpec> {
    if n < 1 {
        return Err(Error::InvalidParams("gradient requires n >= 1".into()));
    }
    let mut coeffs = BTreeMap::new();
    for l in 0..n {
        let mut m = DMatrix::zeros(n, 1);
        m[(l, 0)] = 1.0;
        coeffs.insert(unit_alpha(n, l), m);
    }
    OperatorSpec::new(n, 1, n, 1, coeffs)
}

/// k-th order gradient `u -> (D^alpha u)_{|alpha|=k}`, components ordered
/// lexicographically by alpha.
pub fn grad_k(n: usize, k: u32) -> Result<OperatorSpec> {
    if n < 1 || k < 1 {
        return Err(Error::InvalidParams("grad_k requires n >= 1, k >= 1".into()));
    }
    let alphas = multi_indices_of_order(n, k);
    let dim_w = alphas.len();
    let mut coeffs = BTreeMap::new();
    for (i, alpha) in alphas.iter().enumerate() {
        let mut m = DMatrix::zeros(dim_w, 1);
        m[(i, 0)] = 1.0;
        coeffs.insert(alpha.clone(), m);
    }
    OperatorSpec::new(n, 1, dim_w, k, coeffs)
}

/// Scalar Laplacian; symbol `|xi|^2`.
pub fn laplacian(n: usize) -> Result<OperatorSpec> {
    if n < 1 {
        return Err(Error::InvalidParams("laplacian requires n >= 1".into()));
    }
    let mut coeffs = BTreeMap::new();
    for l in 0..n {
        let mut e = vec![0u32; n];
        e[l] = 2;
        coeffs.insert(MultiIndex::new(e).unwrap(), DMatrix::from_element(1, 1, 1.0));
    }
    OperatorSpec::new(n, 1, 1, 2, coeffs)
}

/// Bi-Laplacian; symbol `|xi|^4`.
pub fn bilaplacian(n: usize) -> Result<OperatorSpec> {
    let l = laplacian(n)?;
    OperatorSpec::compose(&l, &l)
}

/// The real 2x2 first-order Cauchy-Riemann system with symbol
/// `[[xi1, -xi2], [xi2, xi1]]`.
pub fn cauchy_riemann() -> OperatorSpec {
    let mut coeffs = BTreeMap::new();
    coeffs.insert(
        MultiIndex::new(vec![1, 0]).unwrap(),
        DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
    );
    coeffs.insert(
        MultiIndex::new(vec![0, 1]).unwrap(),
        DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
    );
    OperatorSpec::new(2, 2, 2, 1, coeffs).unwrap()
}

/// Scalar curl in two dimensions: `Q u = d1 u2 - d2 u1`.
pub fn curl2() -> OperatorSpec {
    let mut coeffs = BTreeMap::new();
    coeffs.insert(
        MultiIndex::new(vec![1, 0]).unwrap(),
        DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
    );
    coeffs.insert(
        MultiIndex::new(vec![0, 1]).unwrap(),
        DMatrix::from_row_slice(1, 2, &[-1.0, 0.0]),
    );
    OperatorSpec::new(2, 2, 1, 1, coeffs).unwrap()
}

/// Vector curl in three dimensions: `(curl u)_i = eps_{ijk} d_j u_k`.
pub fn curl3() -> OperatorSpec {
    let eps = |i: usize, j: usize, k: usize| -> f64 {
        match (i, j, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    let mut coeffs = BTreeMap::new();
    for j in 0..3 {
        let m = DMatrix::from_fn(3, 3, |i, k| eps(i, j, k));
        coeffs.insert(unit_alpha(3, j), m);
    }
    OperatorSpec::new(3, 3, 3, 1, coeffs).unwrap()
}

// ---------------------------------------------------------------------------
// symmetric / deviatoric gradients via orthonormal matrix bases
// ---------------------------------------------------------------------------

/// Orthonormal (Frobenius) basis of Sym(n): `E_ii`, then
/// `(E_ij + E_ji)/sqrt(2)` for i < j, in lexicographic (i, j) order.
fn sym_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut m = DMatrix::zeros(n, n);
            if i == j {
                m[(i, i)] = 1.0;
            } else {
                let s = 1.0 / 2.0f64.sqrt();
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
            out.push(m);
        }
    }
    out
}

/// Orthonormal basis of trace-free Sym(n): the off-diagonal elements of
/// [`sym_basis`] plus the diagonal trace-free ladder
/// `(E_00 + .. + E_{m-1,m-1} - m E_mm) / sqrt(m(m+1))`.
fn dev_sym_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for m_idx in 1..n {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..m_idx {
            m[(i, i)] = 1.0;
        }
        m[(m_idx, m_idx)] = -(m_idx as f64);
        let norm = ((m_idx * (m_idx + 1)) as f64).sqrt();
        out.push(m / norm);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = DMatrix::zeros(n, n);
            let s = 1.0 / 2.0f64.sqrt();
            m[(i, j)] = s;
            m[(j, i)] = s;
            out.push(m);
        }
    }
    out
}

fn frobenius_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Builds the coefficient matrices of a first-order operator whose value at
/// axis `l`, input component `c` is the matrix `cell(l, c)`, expressed in the
/// orthonormal basis `basis` of the target matrix space.
fn matrix_valued_first_order(
    n: usize,
    basis: &[DMatrix<f64>],
    cell: impl Fn(usize, usize) -> DMatrix<f64>,
) -> OperatorSpec {
    let dim_w = basis.len();
    let mut coeffs = BTreeMap::new();
    for l in 0..n {
        let mut m = DMatrix::zeros(dim_w, n);
        for c in 0..n {
            let val = cell(l, c);
            for (s, b) in basis.iter().enumerate() {
                m[(s, c)] = frobenius_dot(&val, b);
            }
        }
        coeffs.insert(unit_alpha(n, l), m);
    }
    OperatorSpec::new(n, n, dim_w, 1, coeffs).unwrap()
}

/// Symmetric gradient `eps(u) = (Du + Du^T)/2` into Sym(n) with an
/// orthonormal basis, so the adjoint is the plain coefficient transpose.
pub fn sym_gradient(n: usize) -> Result<OperatorSpec> {
    if n < 2 {
        return Err(Error::InvalidParams("sym_gradient requires n >= 2".into()));
    }
    let basis = sym_basis(n);
    Ok(matrix_valued_first_order(n, &basis, |l, c| {
        let mut e = DMatrix::zeros(n, n);
        e[(l, c)] += 0.5;
        e[(c, l)] += 0.5;
        e
    }))
}

/// Deviatoric (trace-free) part of the symmetric gradient.
pub fn deviatoric(n: usize) -> Result<OperatorSpec> {
    if n < 2 {
        return Err(Error::InvalidParams("deviatoric requires n >= 2".into()));
    }
    let basis = dev_sym_basis(n);
    Ok(matrix_valued_first_order(n, &basis, |l, c| {
        let mut e = DMatrix::zeros(n, n);
        e[(l, c)] += 0.5;
        e[(c, l)] += 0.5;
        if l == c {
            for i in 0..n {
                e[(i, i)] -= 1.0 / n as f64;
            }
        }
        e
    }))
}

// ---------------------------------------------------------------------------
// exterior calculus
// ---------------------------------------------------------------------------

/// Strictly increasing `l`-subsets of `{0..n-1}` in lexicographic order; the
/// basis ordering for `Lambda^l R^n`.
pub fn form_basis(n: usize, l: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, l: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, l, &mut Vec::new(), &mut out);
    out
}

fn form_index(basis: &[Vec<usize>], set: &[usize]) -> usize {
    basis.iter().position(|b| b == set).expect("form basis index")
}

/// Exterior derivative on `l`-forms: symbol `xi ^ v`. Valid for
/// `0 <= l <= n-1`.
pub fn ext_derivative(n: usize, l: usize) -> Result<OperatorSpec> {
    if n < 2 || l + 1 > n {
        return Err(Error::InvalidParams(format!(
            "ext_derivative requires n >= 2 and 0 <= l <= n-1, got n={n}, l={l}"
        )));
    }
    let src = form_basis(n, l);
    let dst = form_basis(n, l + 1);
    let mut coeffs = BTreeMap::new();
    for j in 0..n {
        let mut m = DMatrix::zeros(dst.len(), src.len());
        for (col, set) in src.iter().enumerate() {
            if set.contains(&j) {
                continue;
            }
            let pos = set.iter().filter(|&&e| e < j).count();
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let mut merged = set.clone();
            merged.insert(pos, j);
            m[(form_index(&dst, &merged), col)] = sign;
        }
        coeffs.insert(unit_alpha(n, j), m);
    }
    OperatorSpec::new(n, src.len(), dst.len(), 1, coeffs)
}

/// Codifferential on `l`-forms (maps `l`-forms to `(l-1)`-forms): the
/// interior product `iota_xi`, realized as the coefficient transpose of the
/// exterior derivative on `(l-1)`-forms. Valid for `1 <= l <= n`.
pub fn codifferential(n: usize, l: usize) -> Result<OperatorSpec> {
    if n < 2 || l < 1 || l > n {
        return Err(Error::InvalidParams(format!(
            "codifferential requires n >= 2 and 1 <= l <= n, got n={n}, l={l}"
        )));
    }
    Ok(ext_derivative(n, l - 1)?.transposed_symbol())
}

/// Hodge star on the lexicographic form basis with the standard orientation;
/// used by tests to cross-check [`codifferential`] against the literal
/// `(-1)^(l-1) star (xi ^ star v)` formula.
pub fn hodge_star_matrix(n: usize, l: usize) -> DMatrix<f64> {
    let src = form_basis(n, l);
    let dst = form_basis(n, n - l);
    let mut m = DMatrix::zeros(dst.len(), src.len());
    for (col, set) in src.iter().enumerate() {
        let comp: Vec<usize> = (0..n).filter(|j| !set.contains(j)).collect();
        // parity of the permutation (set, comp) of 0..n-1
        let mut perm: Vec<usize> = set.iter().chain(comp.iter()).copied().collect();
        let mut sign = 1.0;
        for i in 0..perm.len() {
            while perm[i] != i {
                let t = perm[i];
                perm.swap(i, t);
                sign = -sign;
            }
        }
        m[(form_index(&dst, &comp), col)] = sign;
    }
    m
}

/// Laplace-Beltrami on `l`-forms: `delta d + d delta`, symbol `|xi|^2 I`.
/// Valid for `1 <= l <= n-1`.
pub fn laplace_beltrami(n: usize, l: usize) -> Result<OperatorSpec> {
    if n < 2 || l < 1 || l + 1 > n {
        return Err(Error::InvalidParams(format!(
            "laplace_beltrami requires n >= 2 and 1 <= l <= n-1, got n={n}, l={l}"
        )));
    }
    let dd = OperatorSpec::compose(&codifferential(n, l + 1)?, &ext_derivative(n, l)?)?;
    let sd = OperatorSpec::compose(&ext_derivative(n, l - 1)?, &codifferential(n, l)?)?;
    dd.add(&sd)
}

// ---------------------------------------------------------------------------
// registry
// ---------------------------------------------------------------------------

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn params(kv: &[(&str, i64)]) -> BTreeMap<String, i64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn entry(
    name: &str,
    ps: &[(&str, i64)],
    spec: OperatorSpec,
    expected: ExpectedFlags,
    partner: Option<&'static str>,
) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        params: params(ps),
        spec,
        expected,
        partner,
    }
}

/// Builds a catalog entry by name. Parameters default to `n = 2` and the
/// smallest valid remaining values when omitted.
pub fn make_catalog_operator(name: &str, ps: &BTreeMap<String, i64>) -> Result<CatalogEntry> {
    let geti = |key: &str, default: i64| -> i64 { ps.get(key).copied().unwrap_or(default) };
    let n = geti("n", 2);
    if n < 1 {
        return Err(Error::InvalidParams("n must be >= 1".into()));
    }
    let nu = n as usize;

    if let Some(inner) = name.strip_prefix("adjoint_of:") {
        let base = make_catalog_operator(inner, ps)?;
        let expected = ExpectedFlags {
            maximal_rank: base.expected.elliptic,
            elliptic: base.expected.maximal_rank,
            elliptic_system: base.expected.elliptic_system,
            // the adjoint of an elliptic operator has full constant image
            canceling: match base.expected.elliptic {
                Some(true) => Some(false),
                _ => None,
            },
            constant_rank: base.expected.constant_rank,
            rank: base.expected.rank,
        };
        return Ok(CatalogEntry {
            name: format!("adjoint_of:{}", base.name),
            params: base.params.clone(),
            spec: base.spec.adjoint(),
            expected,
            partner: None,
        });
    }

    match name {
        "divergence" => {
            let rows = geti("rows", 1);
            if rows < 1 {
                return Err(Error::InvalidParams("rows must be >= 1".into()));
            }
            let rows = rows as usize;
            let spec = divergence(nu, rows)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(true),
                elliptic: Some(nu == 1),
                elliptic_system: Some(nu == 1),
                canceling: Some(false),
                constant_rank: Some(true),
                rank: Some(rows),
            };
            Ok(entry("divergence", &[("n", n), ("rows", rows as i64)], spec, expected, None))
        }
        "div_k" => {
            let k = geti("k", 1);
            if k < 1 {
                return Err(Error::InvalidParams("k must be >= 1".into()));
            }
            let k = k as u32;
            let spec = div_k(nu, k)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(true),
                elliptic: Some(nu == 1),
                canceling: Some(false),
                constant_rank: Some(true),
                rank: Some(1),
                ..Default::default()
            };
            Ok(entry("div_k", &[("n", n), ("k", k as i64)], spec, expected, None))
        }
        "gradient" => {
            let spec = gradient(nu)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(nu == 1),
                elliptic: Some(true),
                elliptic_system: Some(nu == 1),
                canceling: Some(nu >= 2),
                constant_rank: Some(true),
                rank: Some(1),
            };
            let partner = match nu {
                2 => Some("grad_curl"),
                3 => Some("grad_curl"),
                _ => None,
            };
            Ok(entry("gradient", &[("n", n)], spec, expected, partner))
        }
        "grad_k" => {
            let k = geti("k", 2);
            if k < 1 {
                return Err(Error::InvalidParams("k must be >= 1".into()));
            }
            let k = k as u32;
            let spec = grad_k(nu, k)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(nu == 1),
                elliptic: Some(true),
                canceling: Some(nu >= 2),
                constant_rank: Some(true),
                rank: Some(1),
                ..Default::default()
            };
            Ok(entry("grad_k", &[("n", n), ("k", k as i64)], spec, expected, None))
        }
        "laplacian" => {
            let spec = laplacian(nu)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(true),
                elliptic: Some(true),
                elliptic_system: Some(true),
                canceling: Some(false),
                constant_rank: Some(true),
                rank: Some(1),
            };
            Ok(entry("laplacian", &[("n", n)], spec, expected, None))
        }
        "bilaplacian" => {
            let spec = bilaplacian(nu)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(true),
                elliptic: Some(true),
                elliptic_system: Some(true),
                canceling: Some(false),
                constant_rank: Some(true),
                rank: Some(1),
            };
            Ok(entry("bilaplacian", &[("n", n)], spec, expected, None))
        }
        "cauchy_riemann" => {
            let spec = cauchy_riemann();
            let expected = ExpectedFlags {
                maximal_rank: Some(true),
                elliptic: Some(true),
                elliptic_system: Some(true),
                canceling: Some(false),
                constant_rank: Some(true),
                rank: Some(2),
            };
            Ok(entry("cauchy_riemann", &[], spec, expected, None))
        }
        "sym_gradient" => {
            let spec = sym_gradient(nu)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(false),
                elliptic: Some(true),
                elliptic_system: Some(false),
                canceling: Some(true),
                constant_rank: Some(true),
                rank: Some(nu),
            };
            Ok(entry("sym_gradient", &[("n", n)], spec, expected, None))
        }
        "deviatoric" => {
            let spec = deviatoric(nu)?;
            let expected = if nu == 2 {
                ExpectedFlags {
                    maximal_rank: Some(true),
                    elliptic: Some(true),
                    elliptic_system: Some(true),
                    canceling: Some(false),
                    constant_rank: Some(true),
                    rank: Some(2),
                }
            } else {
                ExpectedFlags {
                    maximal_rank: Some(false),
                    elliptic: Some(true),
                    elliptic_system: Some(false),
                    canceling: Some(true),
                    constant_rank: Some(true),
                    rank: Some(nu),
                }
            };
            Ok(entry("deviatoric", &[("n", n)], spec, expected, None))
        }
        "ext_derivative" => {
            let l = geti("l", 0);
            if l < 0 {
                return Err(Error::InvalidParams("l must be >= 0".into()));
            }
            let l = l as usize;
            let spec = ext_derivative(nu, l)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(l == nu - 1),
                elliptic: Some(l == 0),
                elliptic_system: Some(l == 0 && nu == 1),
                canceling: Some(l + 2 <= nu),
                constant_rank: Some(true),
                rank: Some(binom(nu - 1, l)),
            };
            let partner = if l + 2 <= nu { Some("d_d") } else { None };
            Ok(entry("ext_derivative", &[("n", n), ("l", l as i64)], spec, expected, partner))
        }
        "codifferential" => {
            let l = geti("l", 1);
            if l < 1 {
                return Err(Error::InvalidParams("l must be >= 1".into()));
            }
            let l = l as usize;
            let spec = codifferential(nu, l)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(l == 1),
                elliptic: Some(l == nu),
                canceling: Some(l >= 2),
                constant_rank: Some(true),
                rank: Some(binom(nu - 1, l - 1)),
                ..Default::default()
            };
            Ok(entry("codifferential", &[("n", n), ("l", l as i64)], spec, expected, None))
        }
        "laplace_beltrami" => {
            let l = geti("l", 1);
            if l < 1 {
                return Err(Error::InvalidParams("l must be >= 1".into()));
            }
            let l = l as usize;
            let spec = laplace_beltrami(nu, l)?;
            let expected = ExpectedFlags {
                maximal_rank: Some(true),
                elliptic: Some(true),
                elliptic_system: Some(true),
                canceling: Some(false),
                constant_rank: Some(true),
                rank: Some(binom(nu, l)),
            };
            Ok(entry("laplace_beltrami", &[("n", n), ("l", l as i64)], spec, expected, None))
        }
        other => Err(Error::UnknownCatalogName(other.to_string())),
    }
}

/// Verified annihilator pairs: `grad_curl` (n = 2, 3) and `d_d` (d on
/// `l`-forms annihilated by d on `(l+1)`-forms).
pub fn catalog_annihilator(name: &str, ps: &BTreeMap<String, i64>) -> Result<AnnihilatorPair> {
    let n = ps.get("n").copied().unwrap_or(2) as usize;
    let cfg = SampleConfig::default();
    let pair = match name {
        "grad_curl" => match n {
            2 => AnnihilatorPair::new(gradient(2)?, curl2())?,
            3 => AnnihilatorPair::new(gradient(3)?, curl3())?,
            _ => {
                return Err(Error::InvalidParams(
                    "grad_curl is catalogued for n in {2, 3}".into(),
                ))
            }
        },
        "d_d" => {
            let l = ps.get("l").copied().unwrap_or(0) as usize;
            if l + 2 > n {
                return Err(Error::InvalidParams(format!(
                    "d_d requires l + 2 <= n, got n={n}, l={l}"
                )));
            }
            AnnihilatorPair::new(ext_derivative(n, l)?, ext_derivative(n, l + 1)?)?
        }
        other => return Err(Error::UnknownCatalogName(other.to_string())),
    };
    classify::verify_annihilator(pair, &cfg)
}

/// The golden classification table: every entry the classification criteria
/// quantify over (orders <= 3, dimensions <= 4 for the form calculus).
pub fn golden_catalog() -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    let mk = |name: &str, ps: &[(&str, i64)]| make_catalog_operator(name, &params(ps)).unwrap();
    for n in [2i64, 3] {
        for rows in [1i64, 2] {
            out.push(mk("divergence", &[("n", n), ("rows", rows)]));
        }
        for k in [1i64, 2, 3] {
            out.push(mk("div_k", &[("n", n), ("k", k)]));
        }
        out.push(mk("gradient", &[("n", n)]));
        for k in [2i64, 3] {
            out.push(mk("grad_k", &[("n", n), ("k", k)]));
        }
        out.push(mk("laplacian", &[("n", n)]));
        out.push(mk("bilaplacian", &[("n", n)]));
        out.push(mk("sym_gradient", &[("n", n)]));
        out.push(mk("deviatoric", &[("n", n)]));
    }
    out.push(mk("cauchy_riemann", &[]));
    for n in [2i64, 3, 4] {
        for l in 0..n {
            out.push(mk("ext_derivative", &[("n", n), ("l", l)]));
        }
        for l in 1..=n {
            out.push(mk("codifferential", &[("n", n), ("l", l)]));
        }
        for l in 1..n {
            out.push(mk("laplace_beltrami", &[("n", n), ("l", l)]));
        }
    }
    // adjoints of the elliptic entries
    for (name, ps) in [
        ("adjoint_of:gradient", vec![("n", 2i64)]),
        ("adjoint_of:gradient", vec![("n", 3)]),
        ("adjoint_of:grad_k", vec![("n", 2), ("k", 2)]),
        ("adjoint_of:sym_gradient", vec![("n", 2)]),
        ("adjoint_of:sym_gradient", vec![("n", 3)]),
        ("adjoint_of:deviatoric", vec![("n", 3)]),
        ("adjoint_of:cauchy_riemann", vec![]),
    ] {
        out.push(mk(name, &ps));
    }
    out
}

/// The maximal-rank entries exercised by the solver and bench suites:
/// the two-dimensional family plus one three-dimensional entry.
pub fn maximal_rank_bench_entries() -> Vec<CatalogEntry> {
    let mk = |name: &str, ps: &[(&str, i64)]| make_catalog_operator(name, &params(ps)).unwrap();
    vec![
        mk("divergence", &[("n", 2), ("rows", 1)]),
        mk("div_k", &[("n", 2), ("k", 2)]),
        mk("laplacian", &[("n", 2)]),
        mk("bilaplacian", &[("n", 2)]),
        mk("cauchy_riemann", &[]),
        mk("deviatoric", &[("n", 2)]),
        mk("laplace_beltrami", &[("n", 2), ("l", 1)]),
        mk("ext_derivative", &[("n", 2), ("l", 1)]),
        mk("codifferential", &[("n", 2), ("l", 1)]),
        mk("adjoint_of:gradient", &[("n", 2)]),
        mk("adjoint_of:sym_gradient", &[("n", 2)]),
        mk("divergence", &[("n", 3), ("rows", 1)]),
    ]
}

/// An analytic A-free field for the elliptic-system catalog entries, sampled
/// on the grid: harmonic exponentials for the Laplacian, `x exp` fields for
/// the bi-Laplacian, holomorphic exponentials for the Cauchy-Riemann and
/// two-dimensional deviatoric systems, and gradients of harmonics for the
/// Laplace-Beltrami operator on 1-forms. Returns `None` when no family is
/// catalogued for the entry.
pub fn analytic_kernel_field(
    name: &str,
    ps: &BTreeMap<String, i64>,
    grid: &crate::grid::BoxGrid,
) -> Option<crate::grid::GridField> {
    use crate::grid::GridField;
    let l = grid.length();
    // moderate frequency: large enough for a clean stencil-error signal,
    // small enough to stay in the asymptotic range at 64^2
    let beta = 2.0 * std::f64::consts::PI * 3.0 / l;
    let beta4 = 2.0 * std::f64::consts::PI * 1.5 / l;
    let c = 0.5 * l;
    let n = ps.get("n").copied().unwrap_or(2) as usize;
    match name {
        "laplacian" => Some(GridField::from_real_fn(grid, 1, move |x, _| {
            (beta * (x[0] - c)).exp() * (beta * (x[1] - c)).cos()
        })),
        "bilaplacian" => Some(GridField::from_real_fn(grid, 1, move |x, _| {
            (x[0] - c) * (beta4 * (x[0] - c)).exp() * (beta4 * (x[1] - c)).cos()
        })),
        "cauchy_riemann" | "deviatoric" if name == "cauchy_riemann" || n == 2 => {
            // (Re, Im) of exp(beta z): annihilated by the CR system and by
            // the two-dimensional deviatoric operator
            Some(GridField::from_real_fn(grid, 2, move |x, comp| {
                let e = (beta * (x[0] - c)).exp();
                if comp == 0 {
                    e * (beta * (x[1] - c)).cos()
                } else {
                    e * (beta * (x[1] - c)).sin()
                }
            }))
        }
        "laplace_beltrami" => {
            let lform = ps.get("l").copied().unwrap_or(1);
            if n == 2 && lform == 1 {
                // dh for harmonic h: a harmonic 1-form
                Some(GridField::from_real_fn(grid, 2, move |x, comp| {
                    let e = (beta * (x[0] - c)).exp();
                    if comp == 0 {
                        beta * e * (beta * (x[1] - c)).cos()
                    } else {
                        -beta * e * (beta * (x[1] - c)).sin()
                    }
                }))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Names and parameter hints for `catalog list`.
pub fn catalog_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("divergence", "n, rows (row-wise divergence, R^{rows x n} -> R^rows)"),
        ("div_k", "n, k (k-th order divergence, maximal rank)"),
        ("gradient", "n (elliptic, canceling for n >= 2)"),
        ("grad_k", "n, k (k-th order gradient)"),
        ("laplacian", "n (elliptic system)"),
        ("bilaplacian", "n (elliptic system)"),
        ("cauchy_riemann", "(real 2x2 first-order elliptic system)"),
        ("sym_gradient", "n (elliptic, not maximal rank)"),
        ("deviatoric", "n (elliptic system for n = 2, FDN for n >= 3)"),
        ("ext_derivative", "n, l (d on l-forms, 0 <= l <= n-1)"),
        ("codifferential", "n, l (delta on l-forms, 1 <= l <= n)"),
        ("laplace_beltrami", "n, l (Hodge Laplacian on l-forms)"),
        ("adjoint_of:<name>", "same parameters as <name>"),
        ("grad_curl", "n in {2,3} (annihilator pair)"),
        ("d_d", "n, l (annihilator pair d_l, d_{l+1})"),
    ]
}
