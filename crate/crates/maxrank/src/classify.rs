//! Sampled rank classification of principal symbols.
//!
//! The conditions (ellipticity, constant rank, maximal rank, cancellation)
//! quantify over all nonzero frequencies; here they are decided on a fixed
//! quasi-uniform plus seeded pseudo-random sample of the unit sphere. The
//! verdict is sampled, not proved, and the report carries the seed and
//! tolerance used.

use crate::error::{Error, Result};
use crate::linalg;
use crate::symbol::OperatorSpec;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sampling configuration for [`classify`] and [`verify_annihilator`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Low-discrepancy samples on the unit sphere.
    pub quasi_samples: usize,
    /// Seeded pseudo-random samples on the unit sphere.
    pub random_samples: usize,
    /// Seed for the pseudo-random half.
    pub seed: u64,
    /// Relative singular-value cutoff: sigma_i counts toward the rank iff
    /// sigma_i > rank_rel_tol * sigma_1.
    pub rank_rel_tol: f64,
    /// Stop the intersection iteration once the dimension is stable for this
    /// many consecutive samples.
    pub stable_window: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            quasi_samples: 512,
            random_samples: 512,
            seed: 0x6d61_7872,
            rank_rel_tol: 1e-9,
            stable_window: 32,
        }
    }
}

/// Decision record produced by [`classify`]. A sampled verdict.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Classification {
    pub rank_min: usize,
    pub rank_max: usize,
    pub is_constant_rank: bool,
    pub is_elliptic: bool,
    pub is_elliptic_system: bool,
    pub is_maximal_rank: bool,
    pub is_canceling: bool,
    pub essential_range_dim: usize,
    pub cancellation_dim: usize,
    pub min_singular_on_sphere: f64,
    pub samples_used: usize,
}

/// Classification plus the provenance required by the report format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(flatten)]
    pub classification: Classification,
    pub tolerance: f64,
    pub seed: u64,
}

/// Low-discrepancy Halton sequence value (base `b`, index `i >= 1`).
fn halton(mut i: usize, b: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const HALTON_BASES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Quasi-uniform points on the unit sphere S^{n-1}: Halton points mapped
/// through Box-Muller to quasi-Gaussians, then normalized.
fn quasi_sphere(n: usize, count: usize) -> Vec<DVector<f64>> {
    let pairs = n.div_ceil(2);
    let mut out = Vec::with_capacity(count);
    let mut idx = 1usize;
    while out.len() < count {
        let mut v = Vec::with_capacity(2 * pairs);
        for p in 0..pairs {
            let u1 = halton(idx, HALTON_BASES[(2 * p) % HALTON_BASES.len()]).max(1e-12);
            let u2 = halton(idx, HALTON_BASES[(2 * p + 1) % HALTON_BASES.len()]);
            let r = (-2.0 * u1.ln()).sqrt();
            v.push(r * (2.0 * std::f64::consts::PI * u2).cos());
            v.push(r * (2.0 * std::f64::consts::PI * u2).sin());
        }
        idx += 1;
        v.truncate(n);
        let vec = DVector::from_vec(v);
        let nrm = vec.norm();
        if nrm > 1e-8 {
            out.push(vec / nrm);
        }
    }
    out
}

/// The full deterministic sample set: quasi-uniform then seeded Gaussian.
pub fn unit_sphere_samples(n: usize, cfg: &SampleConfig) -> Vec<DVector<f64>> {
    let mut samples = quasi_sphere(n, cfg.quasi_samples);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while samples.len() < cfg.quasi_samples + cfg.random_samples {
        let v = DVector::from_fn(n, |_, _| {
            // Box-Muller on uniform draws keeps the dependency surface small
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        });
        let nrm = v.norm();
        if nrm > 1e-8 {
            samples.push(v / nrm);
        }
    }
    samples
}

/// Classifies `spec` by sampling its symbol on the unit sphere.
pub fn classify(spec: &OperatorSpec, cfg: &SampleConfig) -> Result<Classification> {
    if !spec.is_nonzero() {
        return Err(Error::DegenerateOperator);
    }
    let samples = unit_sphere_samples(spec.n(), cfg);
    let tol = cfg.rank_rel_tol;

    let mut rank_min = usize::MAX;
    let mut rank_max = 0usize;
    let mut min_singular = f64::INFINITY;
    let mut max_singular = 0.0f64;

    // span of all images (columns accumulated with Gram-Schmidt)
    let mut span_basis: Vec<DVector<f64>> = Vec::new();
    // running intersection of images
    let mut inter: Option<DMatrix<f64>> = None;
    let mut inter_stable = 0usize;
    // projector stability for the maximal-rank test
    let mut first_projector: Option<DMatrix<f64>> = None;
    let mut projector_dev = 0.0f64;

    for xi in &samples {
        let a = spec.eval_symbol(xi.as_slice())?;
        let sv = linalg::singular_values(&a);
        let smax = sv.first().copied().unwrap_or(0.0);
        let r = sv.iter().filter(|&&s| s > tol * smax).count();
        rank_min = rank_min.min(r);
        rank_max = rank_max.max(r);
        let smin = sv.last().copied().unwrap_or(0.0);
        min_singular = min_singular.min(smin);
        max_singular = max_singular.max(smax);

        let basis = linalg::range_basis(&a, tol);
        linalg::grow_span(&mut span_basis, &basis, 1e-8);

        let proj = linalg::projector(&basis);
        match &first_projector {
            None => first_projector = Some(proj),
            Some(p0) => projector_dev = projector_dev.max((proj - p0).norm()),
        }

        if inter_stable < cfg.stable_window {
            let next = match inter.take() {
                None => basis,
                Some(cur) => {
                    let before = cur.ncols();
                    let next = linalg::intersect_spans(&cur, &basis, 1e-8);
                    if next.ncols() == before {
                        inter_stable += 1;
                    } else {
                        inter_stable = 0;
                    }
                    next
                }
            };
            if next.ncols() == 0 {
                inter_stable = cfg.stable_window;
            }
            inter = Some(next);
        }
    }

    let essential_range_dim = span_basis.len();
    let cancellation_dim = inter.map(|m| m.ncols()).unwrap_or(0);
    let is_constant_rank = rank_min == rank_max;
    let is_elliptic = rank_min == spec.dim_v() && min_singular > tol * max_singular;
    let is_elliptic_system = is_elliptic && spec.dim_v() == spec.dim_w();
    let is_maximal_rank =
        is_constant_rank && essential_range_dim == rank_min && projector_dev <= 1e-8;
    let is_canceling = cancellation_dim == 0;

    Ok(Classification {
        rank_min,
        rank_max,
        is_constant_rank,
        is_elliptic,
        is_elliptic_system,
        is_maximal_rank,
        is_canceling,
        essential_range_dim,
        cancellation_dim,
        min_singular_on_sphere: min_singular,
        samples_used: samples.len(),
    })
}

/// An operator together with its annihilator: `im A(xi) = ker Q(xi)` for all
/// sampled nonzero frequencies once verified.
#[derive(Clone, Debug)]
pub struct AnnihilatorPair {
    a: OperatorSpec,
    q: OperatorSpec,
    verified_exact: bool,
}

impl AnnihilatorPair {
    /// Builds an unverified pair, checking shape compatibility only.
    pub fn new(a: OperatorSpec, q: OperatorSpec) -> Result<Self> {
        if a.n() != q.n() {
            return Err(Error::DimensionMismatch(
                "operator and annihilator live in different dimensions".into(),
            ));
        }
        if a.dim_w() != q.dim_v() {
            return Err(Error::DimensionMismatch(format!(
                "annihilator acts on R^{}, operator maps into R^{}",
                q.dim_v(),
                a.dim_w()
            )));
        }
        Ok(AnnihilatorPair {
            a,
            q,
            verified_exact: false,
        })
    }

    pub fn operator(&self) -> &OperatorSpec {
        &self.a
    }
    pub fn annihilator(&self) -> &OperatorSpec {
        &self.q
    }
    pub fn verified_exact(&self) -> bool {
        self.verified_exact
    }
    pub fn order_k(&self) -> u32 {
        self.a.order()
    }
    pub fn order_kq(&self) -> u32 {
        self.q.order()
    }
}

/// Checks exactness of the symbol complex at every sampled frequency:
/// `Q(xi) A(xi) = 0` and `rank A(xi) + rank Q(xi) = dim W`.
pub fn verify_annihilator(pair: AnnihilatorPair, cfg: &SampleConfig) -> Result<AnnihilatorPair> {
    let samples = unit_sphere_samples(pair.a.n(), cfg);
    let dim_w = pair.a.dim_w();
    for (i, xi) in samples.iter().enumerate() {
        let a = pair.a.eval_symbol(xi.as_slice())?;
        let q = pair.q.eval_symbol(xi.as_slice())?;
        let prod = &q * &a;
        let scale = (linalg::spectral_norm(&a) * linalg::spectral_norm(&q)).max(1e-300);
        if prod.norm() / scale > 1e-10 {
            return Err(Error::ExactnessViolation {
                sample: i,
                xi: xi.as_slice().to_vec(),
                detail: format!("|Q(xi) A(xi)| = {:.3e} relative", prod.norm() / scale),
            });
        }
        let ra = linalg::rank(&a, cfg.rank_rel_tol);
        let rq = linalg::rank(&q, cfg.rank_rel_tol);
        if ra + rq != dim_w {
            return Err(Error::ExactnessViolation {
                sample: i,
                xi: xi.as_slice().to_vec(),
                detail: format!("rank A = {ra}, rank Q = {rq}, dim W = {dim_w}"),
            });
        }
    }
    Ok(AnnihilatorPair {
        verified_exact: true,
        ..pair
    })
}

/// Generalized Laplace-Beltrami operator on W with symbol
/// `(A A^T)^{k_Q} + (Q^T Q)^k`; an elliptic system, hence maximal rank.
///
/// The stored symbol is the positive semidefinite one; its discrete operator
/// multiplier is `(2 pi / L)^{2 k k_Q}` times the symbol at the lattice
/// frequency (the adjoint signs cancel against the Fourier factors).
pub fn delta_w(pair: &AnnihilatorPair) -> Result<OperatorSpec> {
    if !pair.verified_exact {
        return Err(Error::UnverifiedPair);
    }
    let k = pair.a.order();
    let kq = pair.q.order();
    let gram_a = pair.a.gram_on_w().symbol_power(kq)?;
    let gram_q = pair
        .q
        .transposed_symbol()
        .gram_on_w()
        .symbol_power(k)?;
    gram_a.add(&gram_q)
}
