//! Exact algebra of principal symbols.
//!
//! A constant-coefficient homogeneous operator of order `k` acting between
//! finite-dimensional spaces `V ~ R^M` and `W ~ R^N` is stored as a finite map
//! from multi-indices of order `k` to `N x M` coefficient matrices. Its
//! principal symbol is the matrix polynomial `A(xi) = sum_alpha A_alpha xi^alpha`.
//!
//! All coefficients are plain polynomial ("symbol convention") data: no
//! factors of `i` or `(2 pi / L)` live here. The spectral layer applies the
//! Fourier factor `(2 pi i / L)^k` when an operator acts on grid data.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Multi-index of non-negative integers; the order is the sum of the entries.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSpec("multi-index must have length >= 1".into()));
        }
        Ok(MultiIndex(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Component-wise sum (used when composing operators).
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// `alpha! = prod_j alpha_j!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a as u64).product::<u64>() as f64)
            .product()
    }

    /// `xi^alpha = prod_j xi_j^{alpha_j}`
    pub fn xi_pow(&self, xi: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(xi.iter())
            .map(|(&a, &x)| x.powi(a as i32))
            .product()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// All multi-indices in `n` variables of exact order `k`, in lexicographic order.
pub fn multi_indices_of_order(n: usize, k: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if n == 1 {
            prefix.push(k);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        // lexicographically decreasing first coordinate gives increasing lex
        // order of the reversed tuple; keep plain ascending on entries instead
        for first in (0..=k).rev() {
            prefix.push(first);
            rec(n - 1, k - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, k, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All multi-indices in `n` variables of order `<= k`.
pub fn multi_indices_up_to(n: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for j in 0..=k {
        out.extend(multi_indices_of_order(n, j));
    }
    out
}

/// A homogeneous constant-coefficient operator of order `k` from `V = R^M`
/// to `W = R^N`, stored through its coefficient matrices.
#[derive(Clone, PartialEq)]
pub struct OperatorSpec {
    n: usize,
    dim_v: usize,
    dim_w: usize,
    order: u32,
    coeffs: BTreeMap<MultiIndex, DMatrix<f64>>,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "OperatorSpec(n={}, V=R^{}, W=R^{}, order={}, {} coeffs)",
            self.n,
            self.dim_v,
            self.dim_w,
            self.order,
            self.coeffs.len()
        )
    }
}

impl OperatorSpec {
    /// Builds a spec, validating homogeneity and matrix shapes.
    pub fn new(
        n: usize,
        dim_v: usize,
        dim_w: usize,
        order: u32,
        coeffs: BTreeMap<MultiIndex, DMatrix<f64>>,
    ) -> Result<Self> {
        if n == 0 || dim_v == 0 || dim_w == 0 {
            return Err(Error::InvalidSpec("n, dim_v, dim_w must be >= 1".into()));
        }
        if order == 0 {
            return Err(Error::InvalidSpec("order must be >= 1".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::InvalidSpec("coefficient map is empty".into()));
        }
        for (alpha, mat) in &coeffs {
            if alpha.dim() != n {
                return Err(Error::InvalidSpec(format!(
                    "multi-index {alpha:?} has length {} but n = {n}",
                    alpha.dim()
                )));
            }
            if alpha.order() != order {
                return Err(Error::InvalidSpec(format!(
                    "multi-index {alpha:?} has order {} but the operator order is {order}",
                    alpha.order()
                )));
            }
            if mat.shape() != (dim_w, dim_v) {
                return Err(Error::InvalidSpec(format!(
                    "coefficient at {alpha:?} has shape {:?}, expected ({dim_w}, {dim_v})",
                    mat.shape()
                )));
            }
        }
        Ok(OperatorSpec {
            n,
            dim_v,
            dim_w,
            order,
            coeffs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dim_v(&self) -> usize {
        self.dim_v
    }
    pub fn dim_w(&self) -> usize {
        self.dim_w
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, DMatrix<f64>> {
        &self.coeffs
    }

    /// True when some coefficient entry is nonzero.
    pub fn is_nonzero(&self) -> bool {
        self.coeffs.values().any(|m| m.iter().any(|&v| v != 0.0))
    }

    /// Evaluates the principal symbol `A(xi) = sum_alpha A_alpha xi^alpha`.
    pub fn eval_symbol(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        if xi.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "xi has length {}, expected {}",
                xi.len(),
                self.n
            )));
        }
        let mut out = DMatrix::zeros(self.dim_w, self.dim_v);
        for (alpha, mat) in &self.coeffs {
            let w = alpha.xi_pow(xi);
            if w != 0.0 {
                out += mat * w;
            }
        }
        Ok(out)
    }

    /// Formal L2-adjoint: coefficients `(-1)^k A_alpha^T`, mapping W to V.
    pub fn adjoint(&self) -> OperatorSpec {
        let sign = if self.order % 2 == 0 { 1.0 } else { -1.0 };
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, m)| (a.clone(), m.transpose() * sign))
            .collect();
        OperatorSpec {
            n: self.n,
            dim_v: self.dim_w,
            dim_w: self.dim_v,
            order: self.order,
            coeffs,
        }
    }

    /// Plain coefficient transpose (no sign). The symbol of the result is
    /// `A(xi)^T`; used to build Gram-type compositions with PSD symbols.
    pub fn transposed_symbol(&self) -> OperatorSpec {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, m)| (a.clone(), m.transpose()))
            .collect();
        OperatorSpec {
            n: self.n,
            dim_v: self.dim_w,
            dim_w: self.dim_v,
            order: self.order,
            coeffs,
        }
    }

    /// Operator composition `outer . inner`; the symbol of the result is the
    /// matrix product `outer(xi) * inner(xi)` collected by multi-index.
    ///
    /// The result may be the zero operator (e.g. curl . gradient).
    pub fn compose(outer: &OperatorSpec, inner: &OperatorSpec) -> Result<OperatorSpec> {
        if outer.n != inner.n {
            return Err(Error::DimensionMismatch(format!(
                "outer has n = {}, inner has n = {}",
                outer.n, inner.n
            )));
        }
        if outer.dim_v != inner.dim_w {
            return Err(Error::DimensionMismatch(format!(
                "outer acts on R^{}, inner maps into R^{}",
                outer.dim_v, inner.dim_w
            )));
        }
        let order = outer.order + inner.order;
        let mut coeffs: BTreeMap<MultiIndex, DMatrix<f64>> = BTreeMap::new();
        for (a, ma) in &outer.coeffs {
            for (b, mb) in &inner.coeffs {
                let gamma = a.add(b);
                let prod = ma * mb;
                coeffs
                    .entry(gamma)
                    .and_modify(|acc| *acc += &prod)
                    .or_insert(prod);
            }
        }
        OperatorSpec::new(outer.n, inner.dim_v, outer.dim_w, order, coeffs)
    }

    /// Coefficient-wise sum of two specs with identical signature.
    pub fn add(&self, other: &OperatorSpec) -> Result<OperatorSpec> {
        if self.n != other.n
            || self.dim_v != other.dim_v
            || self.dim_w != other.dim_w
            || self.order != other.order
        {
            return Err(Error::DimensionMismatch(
                "operator signatures differ in add".into(),
            ));
        }
        let mut coeffs = self.coeffs.clone();
        for (a, m) in &other.coeffs {
            coeffs
                .entry(a.clone())
                .and_modify(|acc| *acc += m)
                .or_insert_with(|| m.clone());
        }
        OperatorSpec::new(self.n, self.dim_v, self.dim_w, self.order, coeffs)
    }

    /// Generalized Laplacian on V with symbol `A(xi)^T A(xi)` (positive
    /// semidefinite; positive definite off zero when A is elliptic).
    ///
    /// The discrete multiplier of the order-2k composition `A* . A` equals
    /// `+(2 pi |m| / L)^{...}`-scaled `A^T A` because the adjoint sign
    /// `(-1)^k` cancels against the Fourier factor `i^{2k}`; this constructor
    /// stores that effective PSD symbol directly.
    pub fn generalized_laplacian(&self) -> OperatorSpec {
        OperatorSpec::compose(&self.transposed_symbol(), self)
            .expect("gram composition is always shape-compatible")
    }

    /// Gram operator on W with symbol `A(xi) A(xi)^T`.
    pub fn gram_on_w(&self) -> OperatorSpec {
        OperatorSpec::compose(self, &self.transposed_symbol())
            .expect("gram composition is always shape-compatible")
    }

    /// `self` composed with itself `p` times (symbol power); `p >= 1`.
    pub fn symbol_power(&self, p: u32) -> Result<OperatorSpec> {
        if self.dim_v != self.dim_w {
            return Err(Error::DimensionMismatch(
                "symbol_power requires a square operator".into(),
            ));
        }
        if p == 0 {
            return Err(Error::InvalidSpec("symbol_power requires p >= 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..p {
            acc = OperatorSpec::compose(&acc, self)?;
        }
        Ok(acc)
    }
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    alpha: Vec<u32>,
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    n: usize,
    dim_v: usize,
    dim_w: usize,
    order: u32,
    coeffs: Vec<CoeffEntry>,
}

impl Serialize for OperatorSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, m)| CoeffEntry {
                alpha: a.entries().to_vec(),
                matrix: (0..m.nrows())
                    .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
                    .collect(),
            })
            .collect();
        SpecFile {
            n: self.n,
            dim_v: self.dim_v,
            dim_w: self.dim_w,
            order: self.order,
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = SpecFile::deserialize(d)?;
        let mut coeffs = BTreeMap::new();
        for entry in file.coeffs {
            let alpha = MultiIndex::new(entry.alpha).map_err(serde::de::Error::custom)?;
            let rows = entry.matrix.len();
            if rows == 0 {
                return Err(serde::de::Error::custom("empty coefficient matrix"));
            }
            let cols = entry.matrix[0].len();
            if entry.matrix.iter().any(|r| r.len() != cols) {
                return Err(serde::de::Error::custom("ragged coefficient matrix"));
            }
            let mat = DMatrix::from_fn(rows, cols, |r, c| entry.matrix[r][c]);
            if coeffs.insert(alpha, mat).is_some() {
                return Err(serde::de::Error::custom("duplicate multi-index"));
            }
        }
        let spec = OperatorSpec::new(file.n, file.dim_v, file.dim_w, file.order, coeffs)
            .map_err(serde::de::Error::custom)?;
        if !spec.is_nonzero() {
            return Err(serde::de::Error::custom(
                "operator has all-zero coefficients",
            ));
        }
        Ok(spec)
    }
}
