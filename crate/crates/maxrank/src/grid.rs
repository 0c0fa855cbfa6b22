//! Periodic box grids, vector-valued grid fields, and the FFT plumbing that
//! moves them between physical and frequency space.
//!
//! A [`BoxGrid`] covers the box `[0, L)^n` with an isotropic power-of-two
//! grid; the central `1/padding` fraction per axis is the unpadded region
//! where domain masks may live. Sample points sit at `x_j = i_j * h`, and
//! frequency indices follow FFT order `m in {-s/2, .., s/2 - 1}`.
//!
//! [`GridField`] stores one complex `d`-vector per grid point in
//! component-major layout. [`Spectrum`] holds the Fourier coefficients in the
//! amplitude convention `u(x) = sum_m u_hat(m) e^{2 pi i m.x / L}`, so
//! Parseval reads `mean |u|^2 = sum_m |u_hat(m)|^2`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

/// Isotropic periodic grid on `[0, L)^n` with a padded border.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxGrid {
    n: usize,
    size: usize,
    length: f64,
    padding: usize,
}

impl BoxGrid {
    pub fn new(n: usize, size: usize, length: f64, padding: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("dimension must be >= 1".into()));
        }
        if !size.is_power_of_two() || size < 4 {
            return Err(Error::InvalidGrid(format!(
                "grid size must be a power of two >= 4, got {size}"
            )));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidGrid("box length must be positive".into()));
        }
        if padding < 2 {
            return Err(Error::InvalidGrid("padding factor must be >= 2".into()));
        }
        if size % (2 * padding) != 0 {
            return Err(Error::InvalidGrid(format!(
                "grid size {size} is not divisible by 2 * padding = {}",
                2 * padding
            )));
        }
        Ok(BoxGrid {
            n,
            size,
            length,
            padding,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn size(&self) -> usize {
        self.size
    }
    pub fn sizes(&self) -> Vec<usize> {
        vec![self.size; self.n]
    }
    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn padding(&self) -> usize {
        self.padding
    }
    pub fn h(&self) -> f64 {
        self.length / self.size as f64
    }
    pub fn points(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    /// Index range `[lo, hi)` of the unpadded central region, per axis.
    pub fn unpadded_range(&self) -> (usize, usize) {
        let w = self.size / (2 * self.padding);
        (self.size / 2 - w, self.size / 2 + w)
    }

    /// Physical edge length of the unpadded region.
    pub fn unpadded_length(&self) -> f64 {
        self.length / self.padding as f64
    }

    /// Decomposes a flat point index into per-axis indices (row-major,
    /// axis 0 slowest).
    pub fn decompose(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.n];
        for a in (0..self.n).rev() {
            out[a] = idx % self.size;
            idx /= self.size;
        }
        out
    }

    pub fn flatten(&self, ix: &[usize]) -> usize {
        let mut idx = 0usize;
        for &i in ix {
            idx = idx * self.size + i;
        }
        idx
    }

    /// Physical coordinates of a point index.
    pub fn coord(&self, idx: usize) -> Vec<f64> {
        self.decompose(idx).iter().map(|&i| i as f64 * self.h()).collect()
    }

    /// Signed lattice frequency of a per-axis index.
    pub fn freq_1d(&self, i: usize) -> i64 {
        if i <= self.size / 2 - 1 {
            i as i64
        } else {
            i as i64 - self.size as i64
        }
    }

    /// Signed lattice frequency vector of a flat index.
    pub fn freq(&self, idx: usize) -> Vec<i64> {
        self.decompose(idx).iter().map(|&i| self.freq_1d(i)).collect()
    }

    pub fn is_unpadded(&self, idx: usize) -> bool {
        let (lo, hi) = self.unpadded_range();
        self.decompose(idx).iter().all(|&i| i >= lo && i < hi)
    }
}

/// A sampled vector-valued function on a box grid. Component-major storage:
/// `data[c * points + p]` is component `c` at point `p`.
#[derive(Clone, Debug)]
pub struct GridField {
    grid: BoxGrid,
    dim: usize,
    data: Vec<Complex64>,
    real: bool,
}

/// Fourier coefficients of a [`GridField`], same layout.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub grid: BoxGrid,
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(grid: &BoxGrid, dim: usize) -> Self {
        GridField {
            grid: grid.clone(),
            dim,
            data: vec![Complex64::new(0.0, 0.0); grid.points() * dim],
            real: true,
        }
    }

    /// Samples a real-valued function of (coordinates, component).
    pub fn from_real_fn(grid: &BoxGrid, dim: usize, f: impl Fn(&[f64], usize) -> f64) -> Self {
        let points = grid.points();
        let mut data = vec![Complex64::new(0.0, 0.0); points * dim];
        for p in 0..points {
            let x = grid.coord(p);
            for c in 0..dim {
                data[c * points + p] = Complex64::new(f(&x, c), 0.0);
            }
        }
        GridField {
            grid: grid.clone(),
            dim,
            data,
            real: true,
        }
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn is_real(&self) -> bool {
        self.real
    }
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn at(&self, point: usize, comp: usize) -> Complex64 {
        self.data[comp * self.grid.points() + point]
    }

    pub fn set(&mut self, point: usize, comp: usize, v: Complex64) {
        self.data[comp * self.grid.points() + point] = v;
        if v.im != 0.0 {
            self.real = false;
        }
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let np = self.grid.points();
        &self.data[c * np..(c + 1) * np]
    }

    /// Euclidean norm of the value vector at a point.
    pub fn value_norm(&self, point: usize) -> f64 {
        (0..self.dim)
            .map(|c| self.at(point, c).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Max |.| over all entries (debug/validation scale).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Re-detects the realness flag: imaginary parts below
    /// `1e-12 * max_abs` are zeroed and the field is marked real.
    pub fn normalize_realness(&mut self) {
        let scale = self.max_abs();
        let tol = 1e-12 * scale.max(1e-300);
        if self.data.iter().all(|z| z.im.abs() <= tol) {
            for z in self.data.iter_mut() {
                z.im = 0.0;
            }
            self.real = true;
        } else {
            self.real = false;
        }
    }

    /// Pointwise linear combination `self + other * scale`.
    pub fn axpy(&mut self, other: &GridField, scale: f64) -> Result<()> {
        if self.grid != other.grid || self.dim != other.dim {
            return Err(Error::DimensionMismatch("field shapes differ in axpy".into()));
        }
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b * scale;
        }
        self.real = self.real && other.real;
        Ok(())
    }

    /// Forward transform into amplitude-convention coefficients.
    pub fn fft(&self) -> Spectrum {
        let mut data = self.data.clone();
        let points = self.grid.points();
        for c in 0..self.dim {
            fft_nd(
                &mut data[c * points..(c + 1) * points],
                self.grid.n,
                self.grid.size,
                true,
            );
        }
        let scale = 1.0 / points as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
        Spectrum {
            grid: self.grid.clone(),
            dim: self.dim,
            data,
        }
    }
}

impl Spectrum {
    pub fn zeros(grid: &BoxGrid, dim: usize) -> Self {
        Spectrum {
            grid: grid.clone(),
            dim,
            data: vec![Complex64::new(0.0, 0.0); grid.points() * dim],
        }
    }

    pub fn at(&self, point: usize, comp: usize) -> Complex64 {
        self.data[comp * self.grid.points() + point]
    }

    pub fn set(&mut self, point: usize, comp: usize, v: Complex64) {
        self.data[comp * self.grid.points() + point] = v;
    }

    /// Inverse transform back to a grid field, zeroing negligible imaginary
    /// parts so realness is tracked automatically.
    pub fn ifft(&self) -> GridField {
        let mut data = self.data.clone();
        let points = self.grid.points();
        for c in 0..self.dim {
            fft_nd(
                &mut data[c * points..(c + 1) * points],
                self.grid.n,
                self.grid.size,
                false,
            );
        }
        let mut field = GridField {
            grid: self.grid.clone(),
            dim: self.dim,
            data,
            real: false,
        };
        field.normalize_realness();
        field
    }

    /// Sum of squared coefficient magnitudes over `m != 0` (all components).
    pub fn energy_off_dc(&self) -> f64 {
        let points = self.grid.points();
        let mut e = 0.0;
        for c in 0..self.dim {
            for p in 1..points {
                e += self.data[c * points + p].norm_sqr();
            }
        }
        e
    }
}

thread_local! {
    static PLANNER: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|cell| {
        let (planner, cache) = &mut *cell.borrow_mut();
        cache
            .entry((len, forward))
            .or_insert_with(|| {
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

/// In-place n-dimensional FFT over a row-major hypercube (axis 0 slowest).
/// Unnormalized in both directions; callers apply `1/size^n` on the forward
/// transform for the amplitude convention.
pub fn fft_nd(data: &mut [Complex64], n: usize, size: usize, forward: bool) {
    debug_assert_eq!(data.len(), size.pow(n as u32));
    let fft = plan(size, forward);
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); size];
    for axis in 0..n {
        // stride between consecutive entries along `axis`
        let stride = size.pow((n - 1 - axis) as u32);
        let lines = total / size;
        for l in 0..lines {
            // base index of this line: split l into (outer, inner) parts
            let outer = l / stride;
            let inner = l % stride;
            let base = outer * stride * size + inner;
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = data[base + j * stride];
            }
            fft.process(&mut line);
            for (j, slot) in line.iter().enumerate() {
                data[base + j * stride] = *slot;
            }
        }
    }
}

/// Seeded random real band-limited field: independent complex Gaussian
/// coefficients on `0 < |m|_inf <= band`, Hermitian-symmetrized; DC is zero.
///
/// Frequencies are enumerated in a canonical order independent of the grid
/// size, so the same `(band, seed)` produces the same continuum field on
/// every grid that resolves the band. Refinement comparisons then see
/// identical data.
pub fn random_band_limited(grid: &BoxGrid, dim: usize, band: usize, seed: u64) -> GridField {
    let band = band.min(grid.size / 2 - 1) as i64;
    let mut spec = Spectrum::zeros(grid, dim);
    let size = grid.size as i64;
    let n = grid.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in 0..dim {
        // lexicographic odometer over the band box {-band..band}^n
        let mut m = vec![-band; n];
        'freqs: loop {
            // representative of each (m, -m) pair: first nonzero positive
            let first = m.iter().find(|&&x| x != 0).copied().unwrap_or(0);
            if first > 0 {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                let z = Complex64::new(re, im);
                let pi: Vec<usize> = m.iter().map(|&x| (x.rem_euclid(size)) as usize).collect();
                let ni: Vec<usize> = m.iter().map(|&x| ((-x).rem_euclid(size)) as usize).collect();
                spec.set(grid.flatten(&pi), c, z);
                spec.set(grid.flatten(&ni), c, z.conj());
            }
            // advance; exhausting the box ends the enumeration
            let mut axis = n as i64 - 1;
            loop {
                if axis < 0 {
                    break 'freqs;
                }
                let a = axis as usize;
                if m[a] < band {
                    m[a] += 1;
                    for x in m.iter_mut().skip(a + 1) {
                        *x = -band;
                    }
                    break;
                }
                axis -= 1;
            }
        }
    }
    spec.ifft()
}
