//! Periodic fields, Fourier multipliers, and two-scale realization.
//!
//! Everything lives on a periodic box [0, L)^d with d ∈ {1, 2} and an even
//! number of points per axis. The forward transform carries the 1/N^d factor,
//! so spectrum entries are mode amplitudes:
//!
//!   f(X) = Σ_m f̂_m e^{i ξ_m · X},   ξ_m = 2π m / L,
//!
//! and Parseval reads ∫ f² dX = L^d Σ_m |f̂_m|².
//!
//! Fast-scale (unit torus, period 2π per axis) functions are held directly as
//! truncated coefficient tables ([`TorusSpectrum`]); a [`MultiscaleField`]
//! attaches one such table to every slow grid point and can be realized onto
//! the slow grid by evaluating at Y = X/γ.

use crate::error::{Error, Result};
use crate::par;
use num_complex::Complex64;
use std::sync::OnceLock;

/// Relative floor below which a torus coefficient is treated as absent
/// (alias guards, trimming).
const COEFF_FLOOR: f64 = 1e-10;

// ---------------------------------------------------------------------------
// FFT plumbing
// ---------------------------------------------------------------------------

mod fft_impl {
    use num_complex::Complex64;
    use rustfft::FftPlanner;
    use std::cell::RefCell;

    thread_local! {
        static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    }

    fn run_rows(buf: &mut [Complex64], n: usize, inverse: bool) {
        PLANNER.with(|p| {
            let fft = if inverse {
                p.borrow_mut().plan_fft_inverse(n)
            } else {
                p.borrow_mut().plan_fft_forward(n)
            };
            for chunk in buf.chunks_exact_mut(n) {
                fft.process(chunk);
            }
        });
    }

    fn transpose(buf: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); buf.len()];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = buf[i * n + j];
            }
        }
        out
    }

    fn run_nd(buf: &mut Vec<Complex64>, dim: usize, n: usize, inverse: bool) {
        run_rows(buf, n, inverse);
        if dim == 2 {
            let mut t = transpose(buf, n);
            run_rows(&mut t, n, inverse);
            *buf = transpose(&t, n);
        }
    }

    /// Forward transform with the 1/N^d normalization.
    pub fn forward(dim: usize, n: usize, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> =
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        run_nd(&mut buf, dim, n, false);
        let scale = 1.0 / (n as f64).powi(dim as i32);
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Unnormalized inverse transform (exact round-trip with [`forward`]).
    pub fn inverse(dim: usize, n: usize, spec: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spec.to_vec();
        run_nd(&mut buf, dim, n, true);
        buf
    }
}

// ---------------------------------------------------------------------------
// Slow grid
// ---------------------------------------------------------------------------

/// Uniform periodic grid on [0, L)^d, d ∈ {1, 2}, even n ≥ 8 points per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SlowGrid {
    dim: usize,
    box_length: f64,
    n_points: usize,
}

impl SlowGrid {
    pub fn new(dim: usize, box_length: f64, n_points: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Unsupported("dimension", format!("d = {dim}, need 1 or 2")));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::GridMismatch(format!("box length {box_length} must be positive")));
        }
        if n_points < 8 || n_points % 2 != 0 {
            return Err(Error::GridMismatch(format!(
                "n = {n_points} points per axis; need an even n >= 8"
            )));
        }
        Ok(Self { dim, box_length, n_points })
    }

    pub fn new_1d(box_length: f64, n_points: usize) -> Result<Self> {
        Self::new(1, box_length, n_points)
    }

    pub fn new_2d(box_length: f64, n_points: usize) -> Result<Self> {
        Self::new(2, box_length, n_points)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Points per axis.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Total number of grid points (n^d).
    pub fn total_points(&self) -> usize {
        self.n_points.pow(self.dim as u32)
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.n_points as f64
    }

    /// Cell volume dx^d.
    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Box volume L^d.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    /// Coordinates of the flattened point `idx`; the second entry is 0 in 1D.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let dx = self.dx();
        match self.dim {
            1 => [idx as f64 * dx, 0.0],
            _ => {
                let n = self.n_points;
                [(idx / n) as f64 * dx, (idx % n) as f64 * dx]
            }
        }
    }

    /// Signed integer frequency of FFT output slot `m` on one axis.
    pub fn freq(&self, m: usize) -> i64 {
        let n = self.n_points;
        if m <= n / 2 {
            m as i64
        } else {
            m as i64 - n as i64
        }
    }

    /// Angular wavenumber 2π·freq/L of slot `m`.
    pub fn xi(&self, m: usize) -> f64 {
         2.0 * std::f64::consts::PI * self.freq(m) as f64 / self.box_length
    }

    /// Like [`Self::xi`], with the Nyquist slot mapped to zero. Odd symbols
    /// (derivatives) use this so real fields stay real.
    pub fn xi_deriv(&self, m: usize) -> f64 {
        if m == self.n_points / 2 {
            0.0
        } else {
            self.xi(m)
        }
    }

    /// Per-axis FFT slots of the flattened spectral index.
    fn slots(&self, s: usize) -> [usize; 2] {
        match self.dim {
            1 => [s, 0],
            _ => [s / self.n_points, s % self.n_points],
        }
    }

    /// Signed integer frequency vector of flattened spectral index `s`.
    pub fn freq_vec(&self, s: usize) -> [i64; 2] {
        let sl = self.slots(s);
        match self.dim {
            1 => [self.freq(sl[0]), 0],
            _ => [self.freq(sl[0]), self.freq(sl[1])],
        }
    }

    /// Wavenumber vector (ξ_1, ξ_2) of flattened spectral index `s`.
    pub fn wavenumber(&self, s: usize) -> [f64; 2] {
        let sl = self.slots(s);
        match self.dim {
            1 => [self.xi(sl[0]), 0.0],
            _ => [self.xi(sl[0]), self.xi(sl[1])],
        }
    }

    pub(crate) fn check_same(&self, other: &SlowGrid, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "{what}: {:?} vs {:?}",
                self, other
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Slow field
// ---------------------------------------------------------------------------

/// Real scalar field on a [`SlowGrid`], with a lazily computed spectrum.
#[derive(Debug)]
pub struct SlowField {
    grid: SlowGrid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl Clone for SlowField {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Self { grid: self.grid.clone(), values: self.values.clone(), spectrum }
    }
}

impl SlowField {
    pub fn new(grid: SlowGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(Error::GridMismatch(format!(
                "value buffer has {} entries, grid has {}",
                values.len(),
                grid.total_points()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::State(format!("non-finite field value {v}")));
        }
        Ok(Self { grid, values, spectrum: OnceLock::new() })
    }

    pub fn zeros(grid: &SlowGrid) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.total_points()], spectrum: OnceLock::new() }
    }

    pub fn constant(grid: &SlowGrid, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.total_points()], spectrum: OnceLock::new() }
    }

    /// Samples `f` at every grid point. The argument is the coordinate pair;
    /// the second entry is 0 in 1D.
    pub fn from_fn(grid: &SlowGrid, f: impl Fn(&[f64; 2]) -> f64 + Sync + Send) -> Result<Self> {
        let vals = par::map_indexed(grid.total_points(), |i| f(&grid.point(i)));
        Self::new(grid.clone(), vals)
    }

    /// Builds a field from mode amplitudes (inverse transform, real part).
    ///
    /// The spectrum is cached as given; for a real-valued result it must be
    /// Hermitian-symmetric, which every operator here preserves.
    pub fn from_spectrum(grid: SlowGrid, spec: Vec<Complex64>) -> Result<Self> {
        if spec.len() != grid.total_points() {
            return Err(Error::GridMismatch(format!(
                "spectrum has {} entries, grid has {}",
                spec.len(),
                grid.total_points()
            )));
        }
        let values: Vec<f64> = fft_impl::inverse(grid.dim, grid.n_points, &spec)
            .into_iter()
            .map(|c| c.re)
            .collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::State(format!("non-finite field value {v}")));
        }
        let cell = OnceLock::new();
        let _ = cell.set(spec);
        Ok(Self { grid, values, spectrum: cell })
    }

    pub fn grid(&self) -> &SlowGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Mode amplitudes, computed on first use and cached.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| fft_impl::forward(self.grid.dim, self.grid.n_points, &self.values))
    }

    /// Applies a Fourier multiplier: `symbol` receives the wavenumber vector
    /// ξ (length-2 array, second entry 0 in 1D) and scales that mode.
    pub fn apply_multiplier(
        &self,
        symbol: impl Fn(&[f64; 2]) -> Complex64 + Sync + Send,
    ) -> Result<SlowField> {
        let spec = self.spectrum();
        let out = par::try_map_indexed(spec.len(), |s| {
            let xi = self.grid.wavenumber(s);
            let m = symbol(&xi);
            if !(m.re.is_finite() && m.im.is_finite()) {
                let k = self.grid.freq_vec(s);
                return Err(Error::NonFiniteSymbol { k: k[..self.grid.dim].to_vec() });
            }
            Ok(spec[s] * m)
        })?;
        SlowField::from_spectrum(self.grid.clone(), out)
    }

    /// Spectral derivative along `axis` (0 or 1); the Nyquist mode is zeroed
    /// so real fields stay real.
    pub fn deriv(&self, axis: usize) -> SlowField {
        assert!(axis < self.grid.dim, "axis {axis} out of range for d = {}", self.grid.dim);
        let spec = self.spectrum();
        let out = par::map_indexed(spec.len(), |s| {
            let sl = self.grid.slots(s);
            let xi = self.grid.xi_deriv(sl[axis]);
            spec[s] * Complex64::new(0.0, xi)
        });
        SlowField::from_spectrum(self.grid.clone(), out).expect("derivative of finite field")
    }

    /// Gradient: one field per axis.
    pub fn grad(&self) -> Vec<SlowField> {
        (0..self.grid.dim).map(|a| self.deriv(a)).collect()
    }

    pub fn laplacian(&self) -> SlowField {
        self.apply_multiplier(|xi| Complex64::new(-(xi[0] * xi[0] + xi[1] * xi[1]), 0.0))
            .expect("finite symbol")
    }

    /// Divergence of a vector field (one component per axis).
    pub fn divergence(parts: &[SlowField]) -> Result<SlowField> {
        let d = parts.len();
        if d == 0 {
            return Err(Error::GridMismatch("divergence of empty vector".into()));
        }
        if parts[0].grid.dim != d {
            return Err(Error::GridMismatch(format!(
                "{d} components for a d = {} grid",
                parts[0].grid.dim
            )));
        }
        let mut acc = parts[0].deriv(0);
        for (a, p) in parts.iter().enumerate().skip(1) {
            parts[0].grid.check_same(&p.grid, "divergence components")?;
            acc = &acc + &p.deriv(a);
        }
        Ok(acc)
    }

    /// Dealiased pointwise product via zero-padding to 3/2 the resolution:
    /// both factors are padded, multiplied on the fine grid, transformed
    /// back, and truncated below the coarse Nyquist.
    pub fn mul_dealiased(&self, rhs: &SlowField) -> Result<SlowField> {
        self.grid.check_same(&rhs.grid, "dealiased product")?;
        let n = self.grid.n_points;
        let m = (3 * n / 2 + 1) & !1usize;
        let dim = self.grid.dim;

        let pad = |f: &SlowField| -> Vec<Complex64> {
            let spec = f.spectrum();
            let mut out = vec![Complex64::default(); m.pow(dim as u32)];
            for s in 0..spec.len() {
                let fv = self.grid.freq_vec(s);
                // Drop the coarse Nyquist slot; fields here are band-limited
                // well below it and the slot has no Hermitian partner.
                if fv[..dim].iter().any(|&k| k.unsigned_abs() as usize >= n / 2) {
                    continue;
                }
                let slot = |k: i64| -> usize {
                    if k >= 0 {
                        k as usize
                    } else {
                        (m as i64 + k) as usize
                    }
                };
                let idx = match dim {
                    1 => slot(fv[0]),
                    _ => slot(fv[0]) * m + slot(fv[1]),
                };
                out[idx] = spec[s];
            }
            out
        };

        let fa = fft_impl::inverse(dim, m, &pad(self));
        let fb = fft_impl::inverse(dim, m, &pad(rhs));
        let prod: Vec<f64> = fa.iter().zip(&fb).map(|(a, b)| (a * b).re).collect();
        let fine_spec = fft_impl::forward(dim, m, &prod);

        let mut out = vec![Complex64::default(); self.grid.total_points()];
        for s in 0..out.len() {
            let fv = self.grid.freq_vec(s);
            if fv[..dim].iter().any(|&k| k.unsigned_abs() as usize >= n / 2) {
                continue;
            }
            let slot = |k: i64| -> usize {
                if k >= 0 {
                    k as usize
                } else {
                    (m as i64 + k) as usize
                }
            };
            let idx = match dim {
                1 => slot(fv[0]),
                _ => slot(fv[0]) * m + slot(fv[1]),
            };
            out[s] = fine_spec[idx];
        }
        SlowField::from_spectrum(self.grid.clone(), out)
    }

    /// Plain pointwise product (no dealiasing); for diagnostics and
    /// denominators, not for fields fed back into spectral derivatives.
    pub fn mul_pointwise(&self, rhs: &SlowField) -> Result<SlowField> {
        self.grid.check_same(&rhs.grid, "pointwise product")?;
        let vals = self.values.iter().zip(&rhs.values).map(|(a, b)| a * b).collect();
        SlowField::new(self.grid.clone(), vals)
    }

    /// Pointwise quotient; the caller guarantees the denominator is bounded
    /// away from zero.
    pub fn div_pointwise(&self, rhs: &SlowField) -> Result<SlowField> {
        self.grid.check_same(&rhs.grid, "pointwise quotient")?;
        let vals = self.values.iter().zip(&rhs.values).map(|(a, b)| a / b).collect();
        SlowField::new(self.grid.clone(), vals)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64 + Sync) -> SlowField {
        let vals = self.values.iter().map(|&v| f(v)).collect();
        SlowField::new(self.grid.clone(), vals).expect("mapped values finite")
    }

    pub fn scale(&self, c: f64) -> SlowField {
        self.map_values(|v| c * v)
    }

    /// self + c · other.
    pub fn add_scaled(&self, other: &SlowField, c: f64) -> SlowField {
        self.grid.check_same(&other.grid, "add_scaled").expect("matching grids");
        let vals = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        SlowField::new(self.grid.clone(), vals).expect("finite sum")
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Index and value of the minimum.
    pub fn argmin(&self) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (i, &v) in self.values.iter().enumerate() {
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    /// Sobolev norm: sqrt( L^d Σ (1 + |ξ|²)^s |f̂|² ). Requires s ≥ −1.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        assert!(s >= -1.0, "sobolev_norm needs s >= -1, got {s}");
        let spec = self.spectrum();
        let mut acc = 0.0f64;
        for (i, c) in spec.iter().enumerate() {
            let xi = self.grid.wavenumber(i);
            let w = (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).powf(s);
            acc += w * c.norm_sqr();
        }
        (self.grid.volume() * acc).sqrt()
    }

    /// L² norm via Parseval (equals the quadrature norm to roundoff).
    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// Resamples onto an `n_new`-point grid of the same box by spectral
    /// padding/truncation (exact for band-limited content).
    pub fn resample(&self, n_new: usize) -> Result<SlowField> {
        let g2 = SlowGrid::new(self.grid.dim, self.grid.box_length, n_new)?;
        if n_new == self.grid.n_points {
            return Ok(self.clone());
        }
        let spec = self.spectrum();
        let keep = self.grid.n_points.min(n_new) / 2;
        let mut out = vec![Complex64::default(); g2.total_points()];
        for s2 in 0..out.len() {
            let fv = g2.freq_vec(s2);
            if fv[..g2.dim].iter().any(|&k| k.unsigned_abs() as usize >= keep) {
                continue;
            }
            let slot = |k: i64, n: usize| -> usize {
                if k >= 0 {
                    k as usize
                } else {
                    (n as i64 + k) as usize
                }
            };
            let n1 = self.grid.n_points;
            let s1 = match self.grid.dim {
                1 => slot(fv[0], n1),
                _ => slot(fv[0], n1) * n1 + slot(fv[1], n1),
            };
            out[s2] = spec[s1];
        }
        SlowField::from_spectrum(g2, out)
    }

    /// Samples the band-limited interpolant at points offset by `offset`
    /// along each axis (used for staggered/cell-center evaluation).
    pub fn sampled_at_offset(&self, offset: &[f64]) -> Vec<f64> {
        assert_eq!(offset.len(), self.grid.dim);
        let spec = self.spectrum();
        let shifted: Vec<Complex64> = (0..spec.len())
            .map(|s| {
                let xi = self.grid.wavenumber(s);
                let phase: f64 =
                    (0..self.grid.dim).map(|a| xi[a] * offset[a]).sum();
                spec[s] * Complex64::from_polar(1.0, phase)
            })
            .collect();
        fft_impl::inverse(self.grid.dim, self.grid.n_points, &shifted)
            .into_iter()
            .map(|c| c.re)
            .collect()
    }
}

impl std::ops::Add for &SlowField {
    type Output = SlowField;
    fn add(self, rhs: &SlowField) -> SlowField {
        self.add_scaled(rhs, 1.0)
    }
}

impl std::ops::Sub for &SlowField {
    type Output = SlowField;
    fn sub(self, rhs: &SlowField) -> SlowField {
        self.add_scaled(rhs, -1.0)
    }
}

// ---------------------------------------------------------------------------
// Fast-torus spectra
// ---------------------------------------------------------------------------

/// Truncated Fourier coefficients of a function on the fast torus
/// (2π-periodic per axis): all integer modes with |k_a| ≤ cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSpectrum {
    dim: usize,
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl TorusSpectrum {
    pub fn zero(dim: usize, cutoff: usize) -> Self {
        assert!(dim == 1 || dim == 2, "torus dimension must be 1 or 2");
        let side = 2 * cutoff + 1;
        Self { dim, cutoff, coeffs: vec![Complex64::default(); side.pow(dim as u32)] }
    }

    /// Builds from explicit (k, coefficient) entries; unlisted modes are 0.
    pub fn from_entries(dim: usize, cutoff: usize, entries: &[([i64; 2], Complex64)]) -> Result<Self> {
        let mut s = Self::zero(dim, cutoff);
        for (k, c) in entries {
            let idx = s.index(k).ok_or_else(|| Error::GridMismatch(format!(
                "mode {:?} outside cutoff {}",
                &k[..dim],
                cutoff
            )))?;
            s.coeffs[idx] = *c;
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mode_count(&self) -> usize {
        self.coeffs.len()
    }

    /// Flat index of mode `k`, if within the cutoff. The second entry of `k`
    /// is ignored in 1D.
    pub fn index(&self, k: &[i64; 2]) -> Option<usize> {
        let kk = self.cutoff as i64;
        let off = |v: i64| -> Option<usize> {
            if v.abs() <= kk {
                Some((v + kk) as usize)
            } else {
                None
            }
        };
        match self.dim {
            1 => off(k[0]),
            _ => {
                let side = 2 * self.cutoff + 1;
                Some(off(k[0])? * side + off(k[1])?)
            }
        }
    }

    /// Mode vector of flat index `idx` (second entry 0 in 1D).
    pub fn k_at(&self, idx: usize) -> [i64; 2] {
        let kk = self.cutoff as i64;
        match self.dim {
            1 => [idx as i64 - kk, 0],
            _ => {
                let side = 2 * self.cutoff + 1;
                [(idx / side) as i64 - kk, (idx % side) as i64 - kk]
            }
        }
    }

    pub fn coeff(&self, k: &[i64; 2]) -> Complex64 {
        self.index(k).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    pub fn set(&mut self, k: &[i64; 2], c: Complex64) {
        let i = self.index(k).expect("mode within cutoff");
        self.coeffs[i] = c;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Mean over the torus (the k = 0 coefficient).
    pub fn mean(&self) -> Complex64 {
        self.coeff(&[0, 0])
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm()))
    }

    /// Errors unless |mean| ≤ tol · max(1, max |coeff|).
    pub fn require_zero_mean(&self, tol: f64) -> Result<()> {
        let scale = self.max_coeff_abs().max(1.0);
        let mean = self.mean().norm();
        if mean > tol * scale {
            return Err(Error::NonZeroMean { mean });
        }
        Ok(())
    }

    /// Largest |c_k − conj(c_{−k})| with the offending mode, if nonzero.
    pub fn hermitian_defect(&self) -> ([i64; 2], f64) {
        let mut worst = ([0i64, 0i64], 0.0f64);
        for i in 0..self.coeffs.len() {
            let k = self.k_at(i);
            let neg = [-k[0], -k[1]];
            let d = (self.coeffs[i] - self.coeff(&neg).conj()).norm();
            if d > worst.1 {
                worst = (k, d);
            }
        }
        worst
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        let scale = self.max_coeff_abs().max(1.0);
        let (k, d) = self.hermitian_defect();
        if d > tol * scale {
            return Err(Error::NonHermitian { k: k[..self.dim].to_vec() });
        }
        Ok(())
    }

    /// Applies a multiplier over modes: `symbol(k)` scales coefficient k.
    pub fn apply_multiplier(
        &self,
        symbol: impl Fn(&[i64; 2]) -> Complex64,
    ) -> Result<TorusSpectrum> {
        let mut out = self.clone();
        for i in 0..out.coeffs.len() {
            let k = out.k_at(i);
            let m = symbol(&k);
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(Error::NonFiniteSymbol { k: k[..self.dim].to_vec() });
            }
            out.coeffs[i] *= m;
        }
        Ok(out)
    }

    /// Derivative along torus axis `axis` (multiplier i k_a).
    pub fn deriv(&self, axis: usize) -> TorusSpectrum {
        assert!(axis < self.dim);
        self.apply_multiplier(|k| Complex64::new(0.0, k[axis] as f64))
            .expect("finite symbol")
    }

    pub fn scale(&self, c: f64) -> TorusSpectrum {
        let mut out = self.clone();
        for v in &mut out.coeffs {
            *v *= c;
        }
        out
    }

    pub fn add(&self, rhs: &TorusSpectrum) -> TorusSpectrum {
        assert_eq!(self.dim, rhs.dim);
        assert_eq!(self.cutoff, rhs.cutoff, "cutoff mismatch; lift first");
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, rhs: &TorusSpectrum) -> TorusSpectrum {
        self.add(&rhs.scale(-1.0))
    }

    /// Re-embeds into a different cutoff. Growing pads with zeros; shrinking
    /// errors if it would discard a coefficient above the noise floor.
    pub fn lift(&self, new_cutoff: usize) -> Result<TorusSpectrum> {
        if new_cutoff == self.cutoff {
            return Ok(self.clone());
        }
        let mut out = TorusSpectrum::zero(self.dim, new_cutoff);
        let floor = COEFF_FLOOR * self.max_coeff_abs();
        for i in 0..self.coeffs.len() {
            let k = self.k_at(i);
            match out.index(&k) {
                Some(j) => out.coeffs[j] = self.coeffs[i],
                None => {
                    if self.coeffs[i].norm() > floor {
                        return Err(Error::GridMismatch(format!(
                            "lowering cutoff {} -> {} would discard mode {:?}",
                            self.cutoff,
                            new_cutoff,
                            &k[..self.dim]
                        )));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Evaluates the truncated series at torus point `y` (radians).
    pub fn eval_complex(&self, y: &[f64; 2]) -> Complex64 {
        let kk = self.cutoff as i64;
        let zx = Complex64::from_polar(1.0, y[0]);
        match self.dim {
            1 => {
                let mut w = Complex64::from_polar(1.0, -(kk as f64) * y[0]);
                let mut acc = Complex64::default();
                for c in &self.coeffs {
                    acc += c * w;
                    w *= zx;
                }
                acc
            }
            _ => {
                let side = 2 * self.cutoff + 1;
                let zy = Complex64::from_polar(1.0, y[1]);
                let mut acc = Complex64::default();
                let mut wx = Complex64::from_polar(1.0, -(kk as f64) * y[0]);
                for ix in 0..side {
                    let mut wy = Complex64::from_polar(1.0, -(kk as f64) * y[1]);
                    let row = &self.coeffs[ix * side..(ix + 1) * side];
                    let mut racc = Complex64::default();
                    for c in row {
                        racc += c * wy;
                        wy *= zy;
                    }
                    acc += racc * wx;
                    wx *= zx;
                }
                acc
            }
        }
    }

    /// Real part of the series at `y`; the value of a Hermitian spectrum.
    pub fn eval(&self, y: &[f64; 2]) -> f64 {
        self.eval_complex(y).re
    }

    /// Samples onto a uniform n (or n×n) torus grid.
    pub fn eval_grid(&self, n: usize) -> Vec<f64> {
        let dy = 2.0 * std::f64::consts::PI / n as f64;
        match self.dim {
            1 => (0..n).map(|i| self.eval(&[i as f64 * dy, 0.0])).collect(),
            _ => {
                let mut out = Vec::with_capacity(n * n);
                for ix in 0..n {
                    for iy in 0..n {
                        out.push(self.eval(&[ix as f64 * dy, iy as f64 * dy]));
                    }
                }
                out
            }
        }
    }

    /// L² norm over the torus: sqrt( (2π)^d Σ |c_k|² ).
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        ((2.0 * std::f64::consts::PI).powi(self.dim as i32) * s).sqrt()
    }
}

/// Flat Dirichlet-Neumann symbol at depth `h0` applied mode-wise:
/// coefficient k is scaled by |k| tanh(h0 |k|).
pub fn op_dn_tanh(h0: f64, f: &TorusSpectrum) -> Result<TorusSpectrum> {
    assert!(h0 > 0.0, "depth must be positive");
    f.apply_multiplier(|k| {
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        Complex64::new(kn * (h0 * kn).tanh(), 0.0)
    })
}

/// Mode-wise sech(h0 |k|) smoothing (the bottom-to-surface transfer factor).
pub fn op_sech(h0: f64, f: &TorusSpectrum) -> Result<TorusSpectrum> {
    assert!(h0 > 0.0, "depth must be positive");
    f.apply_multiplier(|k| {
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        Complex64::new(sech(h0 * kn), 0.0)
    })
}

/// Overflow-safe sech.
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// ∇ Δ⁻¹ applied to a zero-mean torus function: component a of mode k is
/// −i k_a / |k|² times the coefficient. The divergence of the result
/// recovers the input.
pub fn riesz_gradient(f: &TorusSpectrum) -> Result<Vec<TorusSpectrum>> {
    f.require_zero_mean(1e-12)?;
    (0..f.dim())
        .map(|a| {
            f.apply_multiplier(|k| {
                let n2 = (k[0] * k[0] + k[1] * k[1]) as f64;
                if n2 == 0.0 {
                    Complex64::default()
                } else {
                    Complex64::new(0.0, -(k[a] as f64) / n2)
                }
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Multiscale fields
// ---------------------------------------------------------------------------

/// A fast-torus spectrum attached to every slow grid point: the two-scale
/// object g(X, Y) with Y the fast variable.
#[derive(Clone, Debug)]
pub struct MultiscaleField {
    grid: SlowGrid,
    cutoff: usize,
    spectra: Vec<TorusSpectrum>,
}

impl MultiscaleField {
    /// One spectrum per slow point, built in parallel.
    pub fn from_fn(
        grid: &SlowGrid,
        f: impl Fn(usize) -> TorusSpectrum + Sync + Send,
    ) -> Result<Self> {
        let spectra = par::map_indexed(grid.total_points(), f);
        Self::from_spectra(grid.clone(), spectra)
    }

    pub fn try_from_fn(
        grid: &SlowGrid,
        f: impl Fn(usize) -> Result<TorusSpectrum> + Sync + Send,
    ) -> Result<Self> {
        let spectra = par::try_map_indexed(grid.total_points(), f)?;
        Self::from_spectra(grid.clone(), spectra)
    }

    pub fn from_spectra(grid: SlowGrid, spectra: Vec<TorusSpectrum>) -> Result<Self> {
        if spectra.len() != grid.total_points() {
            return Err(Error::GridMismatch(format!(
                "{} spectra for {} slow points",
                spectra.len(),
                grid.total_points()
            )));
        }
        let first = &spectra[0];
        if first.dim() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "torus dimension {} vs grid dimension {}",
                first.dim(),
                grid.dim()
            )));
        }
        let cutoff = first.cutoff();
        if spectra.iter().any(|s| s.cutoff() != cutoff || s.dim() != first.dim()) {
            return Err(Error::GridMismatch("inconsistent per-point spectra".into()));
        }
        Ok(Self { grid, cutoff, spectra })
    }

    /// The same spectrum at every slow point.
    pub fn uniform(grid: &SlowGrid, s: &TorusSpectrum) -> Result<Self> {
        Self::from_fn(grid, |_| s.clone())
    }

    pub fn constant_zero(grid: &SlowGrid, cutoff: usize) -> Self {
        let z = TorusSpectrum::zero(grid.dim(), cutoff);
        Self { grid: grid.clone(), cutoff, spectra: vec![z; grid.total_points()] }
    }

    pub fn grid(&self) -> &SlowGrid {
        &self.grid
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn at(&self, idx: usize) -> &TorusSpectrum {
        &self.spectra[idx]
    }

    pub fn spectra(&self) -> &[TorusSpectrum] {
        &self.spectra
    }

    /// Maps every per-point spectrum (slow index available to the closure).
    pub fn map(
        &self,
        f: impl Fn(usize, &TorusSpectrum) -> TorusSpectrum + Sync + Send,
    ) -> Result<Self> {
        let spectra = par::map_indexed(self.spectra.len(), |i| f(i, &self.spectra[i]));
        Self::from_spectra(self.grid.clone(), spectra)
    }

    pub fn try_map(
        &self,
        f: impl Fn(usize, &TorusSpectrum) -> Result<TorusSpectrum> + Sync + Send,
    ) -> Result<Self> {
        let spectra = par::try_map_indexed(self.spectra.len(), |i| f(i, &self.spectra[i]))?;
        Self::from_spectra(self.grid.clone(), spectra)
    }

    /// Largest coefficient magnitude over all slow points.
    pub fn max_coeff_abs(&self) -> f64 {
        self.spectra.iter().fold(0.0f64, |m, s| m.max(s.max_coeff_abs()))
    }

    /// Evaluates g(X, X/γ) on the slow grid.
    ///
    /// When 2πγ divides the box length (fast scale commensurate with the
    /// box), realized mode k oscillates at slow frequency k·m with
    /// m = L/(2πγ); any significant coefficient whose realized frequency
    /// exceeds the grid Nyquist is rejected as aliased. For incommensurate γ
    /// the realization is still the exact pointwise evaluation, but no alias
    /// guard is possible.
    pub fn realize(&self, gamma: f64) -> Result<SlowField> {
        assert!(gamma > 0.0 && gamma.is_finite(), "gamma must be positive");
        let two_pi = 2.0 * std::f64::consts::PI;
        let m_exact = self.grid.box_length / (two_pi * gamma);
        let m_round = m_exact.round();
        if (m_exact - m_round).abs() <= 1e-9 * m_exact.max(1.0) && m_round >= 1.0 {
            let m = m_round as i64;
            let nyq = (self.grid.n_points / 2) as i64;
            let floor = COEFF_FLOOR * self.max_coeff_abs();
            for s in &self.spectra {
                for i in 0..s.mode_count() {
                    if s.coeffs()[i].norm() <= floor {
                        continue;
                    }
                    let k = s.k_at(i);
                    for a in 0..self.grid.dim {
                        let slow = k[a].abs() * m;
                        if slow > nyq {
                            return Err(Error::RealizeAliased {
                                k: k[..self.grid.dim].to_vec(),
                                slow_index: k[a] * m,
                                nyquist: nyq,
                            });
                        }
                    }
                }
            }
        }

        let vals = par::map_indexed(self.grid.total_points(), |idx| {
            let x = self.grid.point(idx);
            let y = [
                (x[0] / gamma).rem_euclid(two_pi),
                (x[1] / gamma).rem_euclid(two_pi),
            ];
            self.spectra[idx].eval(&y)
        });
        SlowField::new(self.grid.clone(), vals)
    }
}

/// Quadrature gap between the two-scale average and the factored average:
///
///   | ∫ g(X/γ) f(X) dX  −  ḡ ∫ f(X) dX |
///
/// evaluated on a fine grid that resolves the oscillation. For fixed smooth
/// f and g this decays rapidly as γ → 0, which is the scale-separation
/// mechanism the two-scale expansion relies on.
pub fn oscillatory_average_gap(g: &TorusSpectrum, f: &SlowField, gamma: f64) -> f64 {
    assert_eq!(g.dim(), f.grid().dim(), "dimension mismatch");
    assert!(gamma > 0.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let grid = f.grid();
    let m_f = grid.box_length() / (two_pi * gamma);
    let per_axis_cap: usize = if grid.dim() == 1 { 1 << 18 } else { 1 << 10 };
    let n_fine = {
        let want = (8.0 * g.cutoff().max(1) as f64 * m_f.ceil()).max(4.0 * grid.n_points() as f64);
        let n = (want.ceil() as usize).max(grid.n_points());
        (((n + 1) & !1usize).max(8)).min(per_axis_cap)
    };
    let f_fine = f.resample(n_fine).expect("resample to fine grid");
    let fine = f_fine.grid();
    let dv = fine.cell_volume();

    let total = fine.total_points();
    let parts = par::map_indexed(total, |idx| {
        let x = fine.point(idx);
        let y = [
            (x[0] / gamma).rem_euclid(two_pi),
            (x[1] / gamma).rem_euclid(two_pi),
        ];
        g.eval(&y) * f_fine.values()[idx]
    });
    let quad: f64 = parts.iter().sum::<f64>() * dv;
    let factored = g.mean().re * f.mean() * grid.volume();
    (quad - factored).abs()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid64() -> SlowGrid {
        SlowGrid::new_1d(2.0 * PI, 64).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn grid_validation() {
        assert!(SlowGrid::new_1d(2.0 * PI, 64).is_ok());
        assert!(SlowGrid::new_1d(2.0 * PI, 63).is_err());
        assert!(SlowGrid::new_1d(2.0 * PI, 4).is_err());
        assert!(SlowGrid::new_1d(-1.0, 64).is_err());
        assert!(SlowGrid::new(3, 1.0, 64).is_err());
    }

    #[test]
    fn fft_round_trip() {
        let g = grid64();
        let f = SlowField::from_fn(&g, |x| (3.0 * x[0]).cos() + 0.5 * (5.0 * x[0]).sin()).unwrap();
        let back = SlowField::from_spectrum(g.clone(), f.spectrum().to_vec()).unwrap();
        assert!(max_abs_diff(f.values(), back.values()) < 1e-12);
    }

    #[test]
    fn fft_round_trip_2d() {
        let g = SlowGrid::new_2d(2.0 * PI, 16).unwrap();
        let f = SlowField::from_fn(&g, |x| (2.0 * x[0]).cos() * (3.0 * x[1]).sin() + 0.25).unwrap();
        let back = SlowField::from_spectrum(g.clone(), f.spectrum().to_vec()).unwrap();
        assert!(max_abs_diff(f.values(), back.values()) < 1e-12);
        // mode (2, -3) of cos(2x)sin(3y) = ... has coefficient i/4 at (2,-3).
        let spec = f.spectrum();
        let mut found = Complex64::default();
        for s in 0..spec.len() {
            let fv = g.freq_vec(s);
            if fv == [2, -3] {
                found = spec[s];
            }
        }
        assert!((found - Complex64::new(0.0, 0.25)).norm() < 1e-12);
    }

    #[test]
    fn derivative_multiplier_example() {
        // d/dX cos(3X) = -3 sin(3X) on L = 2π, N = 64.
        let g = grid64();
        let f = SlowField::from_fn(&g, |x| (3.0 * x[0]).cos()).unwrap();
        let df = f.deriv(0);
        let expect = SlowField::from_fn(&g, |x| -3.0 * (3.0 * x[0]).sin()).unwrap();
        assert!(max_abs_diff(df.values(), expect.values()) < 1e-12);
    }

    #[test]
    fn gradient_and_divergence_2d() {
        let g = SlowGrid::new_2d(2.0 * PI, 16).unwrap();
        let f = SlowField::from_fn(&g, |x| (2.0 * x[0]).sin() + (x[1]).cos()).unwrap();
        let grad = f.grad();
        let div = SlowField::divergence(&grad).unwrap();
        let lap = f.laplacian();
        assert!(max_abs_diff(div.values(), lap.values()) < 1e-11);
    }

    #[test]
    fn non_finite_symbol_reports_mode() {
        let g = grid64();
        let f = SlowField::from_fn(&g, |x| (x[0]).cos()).unwrap();
        let r = f.apply_multiplier(|xi| Complex64::new(1.0 / (xi[0] - 1.0), 0.0));
        match r {
            Err(Error::NonFiniteSymbol { k }) => assert_eq!(k, vec![1]),
            other => panic!("expected NonFiniteSymbol, got {other:?}"),
        }
    }

    #[test]
    fn sobolev_norm_matches_quadrature_and_analytic() {
        let g = grid64();
        let f = SlowField::from_fn(&g, |x| (x[0]).cos()).unwrap();
        // quadrature L2: sqrt(Σ f² dx)
        let quad = (f.values().iter().map(|v| v * v).sum::<f64>() * g.dx()).sqrt();
        assert!((f.l2_norm() - quad).abs() < 1e-12);
        assert!((f.l2_norm() - PI.sqrt()).abs() < 1e-12);
        // H¹ of cos X on [0,2π): sqrt(L · 2 · (1+1) · 1/4) = sqrt(2π)
        assert!((f.sobolev_norm(1.0) - (2.0 * PI).sqrt()).abs() < 1e-12);
        // negative order allowed down to -1
        assert!((f.sobolev_norm(-1.0) - PI.sqrt() / 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dealiased_product_exact_low_modes() {
        // cos(3X)·cos(5X) = (cos 2X + cos 8X)/2, all modes resolved at N = 64.
        let g = grid64();
        let a = SlowField::from_fn(&g, |x| (3.0 * x[0]).cos()).unwrap();
        let b = SlowField::from_fn(&g, |x| (5.0 * x[0]).cos()).unwrap();
        let p = a.mul_dealiased(&b).unwrap();
        let expect =
            SlowField::from_fn(&g, |x| 0.5 * ((2.0 * x[0]).cos() + (8.0 * x[0]).cos())).unwrap();
        assert!(max_abs_diff(p.values(), expect.values()) < 1e-12);
    }

    #[test]
    fn dealiased_product_drops_alias() {
        // On N = 16 (Nyquist 8): cos(7X)·cos(6X) = (cos X + cos 13X)/2.
        // Mode 13 aliases to -3 under plain pointwise multiplication; the
        // dealiased product must keep cos(X)/2 and put nothing at |k| = 3.
        let g = SlowGrid::new_1d(2.0 * PI, 16).unwrap();
        let a = SlowField::from_fn(&g, |x| (7.0 * x[0]).cos()).unwrap();
        let b = SlowField::from_fn(&g, |x| (6.0 * x[0]).cos()).unwrap();
        let p = a.mul_dealiased(&b).unwrap();
        let spec = p.spectrum();
        let c = |k: i64| {
            (0..spec.len())
                .find(|&s| g.freq_vec(s)[0] == k)
                .map(|s| spec[s])
                .unwrap()
        };
        assert!((c(1) - Complex64::new(0.25, 0.0)).norm() < 1e-12);
        assert!(c(3).norm() < 1e-12);
        assert!(c(-3).norm() < 1e-12);

        // Plain pointwise product exhibits exactly that alias.
        let naive = a.mul_pointwise(&b).unwrap();
        let nspec = naive.spectrum();
        let nc = (0..nspec.len())
            .find(|&s| g.freq_vec(s)[0] == 3)
            .map(|s| nspec[s])
            .unwrap();
        assert!(nc.norm() > 0.2);
    }

    #[test]
    fn resample_band_limited_exact() {
        let g = grid64();
        let f = SlowField::from_fn(&g, |x| (3.0 * x[0]).cos() - 2.0 * (x[0]).sin()).unwrap();
        let up = f.resample(96).unwrap();
        let expect_up = SlowField::from_fn(up.grid(), |x| (3.0 * x[0]).cos() - 2.0 * (x[0]).sin())
            .unwrap();
        assert!(max_abs_diff(up.values(), expect_up.values()) < 1e-12);
        let down = up.resample(64).unwrap();
        assert!(max_abs_diff(down.values(), f.values()) < 1e-12);
    }

    #[test]
    fn offset_sampling_matches_shifted_function() {
        let g = grid64();
        let f = SlowField::from_fn(&g, |x| (2.0 * x[0]).sin() + 0.3 * (5.0 * x[0]).cos()).unwrap();
        let half = g.dx() / 2.0;
        let shifted = f.sampled_at_offset(&[half]);
        let expect: Vec<f64> = (0..64)
            .map(|i| {
                let x = i as f64 * g.dx() + half;
                (2.0 * x).sin() + 0.3 * (5.0 * x).cos()
            })
            .collect();
        assert!(max_abs_diff(&shifted, &expect) < 1e-12);
    }

    #[test]
    fn torus_spectrum_indexing_round_trip() {
        let s = TorusSpectrum::zero(2, 3);
        for i in 0..s.mode_count() {
            let k = s.k_at(i);
            assert_eq!(s.index(&k), Some(i));
        }
        assert_eq!(s.index(&[4, 0]), None);
    }

    #[test]
    fn torus_eval_matches_cosine() {
        // cos Y as coefficients {±1: 1/2}
        let s = TorusSpectrum::from_entries(
            1,
            1,
            &[([1, 0], Complex64::new(0.5, 0.0)), ([-1, 0], Complex64::new(0.5, 0.0))],
        )
        .unwrap();
        for j in 0..17 {
            let y = j as f64 * 0.37;
            assert!((s.eval(&[y, 0.0]) - y.cos()).abs() < 1e-12);
        }
        // L² over one period: |cos|² integrates to π, norm = sqrt(2π · 1/2)
        assert!((s.l2_norm() - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn torus_eval_2d() {
        // cos(Y1)·sin(2 Y2): coefficients at (±1, ±2)
        let i = Complex64::i();
        let c = Complex64::new(0.25, 0.0);
        let s = TorusSpectrum::from_entries(
            2,
            2,
            &[
                ([1, 2], -i * c),
                ([1, -2], i * c),
                ([-1, 2], -i * c),
                ([-1, -2], i * c),
            ],
        )
        .unwrap();
        for &(y1, y2) in &[(0.3, 1.1), (2.0, 4.5), (5.9, 0.2)] {
            assert!((s.eval(&[y1, y2]) - y1.cos() * (2.0 * y2).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn dn_tanh_and_sech_symbols() {
        let s = TorusSpectrum::from_entries(
            1,
            1,
            &[([1, 0], Complex64::new(0.5, 0.0)), ([-1, 0], Complex64::new(0.5, 0.0))],
        )
        .unwrap();
        let t = op_dn_tanh(1.0, &s).unwrap();
        assert!((t.coeff(&[1, 0]).re - 0.5 * 1.0f64.tanh()).abs() < 1e-14);
        let c = op_sech(2.0, &s).unwrap();
        assert!((c.coeff(&[1, 0]).re - 0.5 * sech(2.0)).abs() < 1e-14);
        // sech is overflow-safe far out and even
        assert!(sech(1e4).is_finite() && sech(1e4) < 1e-300);
        assert_eq!(sech(0.0), 1.0);
        assert_eq!(sech(-3.0), sech(3.0));
    }

    #[test]
    fn riesz_gradient_div_identity() {
        let s = TorusSpectrum::from_entries(
            2,
            3,
            &[
                ([1, 2], Complex64::new(0.3, 0.1)),
                ([-1, -2], Complex64::new(0.3, -0.1)),
                ([3, 0], Complex64::new(-0.2, 0.05)),
                ([-3, 0], Complex64::new(-0.2, -0.05)),
            ],
        )
        .unwrap();
        let grad = riesz_gradient(&s).unwrap();
        // divergence: Σ_a i k_a ĝ_a
        let mut div = TorusSpectrum::zero(2, 3);
        for a in 0..2 {
            div = div.add(&grad[a].deriv(a));
        }
        let diff = div.sub(&s);
        assert!(diff.max_coeff_abs() < 1e-14);

        // nonzero mean is rejected
        let bad = TorusSpectrum::from_entries(1, 1, &[([0, 0], Complex64::new(1.0, 0.0))]).unwrap();
        assert!(matches!(riesz_gradient(&bad), Err(Error::NonZeroMean { .. })));
    }

    #[test]
    fn realize_commensurate_cosine() {
        // cos(Y) at γ = 1/8 on [0, 2π), N = 64 → cos(8X)
        let g = grid64();
        let s = TorusSpectrum::from_entries(
            1,
            1,
            &[([1, 0], Complex64::new(0.5, 0.0)), ([-1, 0], Complex64::new(0.5, 0.0))],
        )
        .unwrap();
        let ms = MultiscaleField::uniform(&g, &s).unwrap();
        let r = ms.realize(1.0 / 8.0).unwrap();
        let expect = SlowField::from_fn(&g, |x| (8.0 * x[0]).cos()).unwrap();
        assert!(max_abs_diff(r.values(), expect.values()) < 1e-12);
    }

    #[test]
    fn realize_alias_guard_triggers() {
        // γ = 1/40 on N = 64 (Nyquist 32): mode 1 realizes at frequency 40.
        let g = grid64();
        let s = TorusSpectrum::from_entries(
            1,
            1,
            &[([1, 0], Complex64::new(0.5, 0.0)), ([-1, 0], Complex64::new(0.5, 0.0))],
        )
        .unwrap();
        let ms = MultiscaleField::uniform(&g, &s).unwrap();
        match ms.realize(1.0 / 40.0) {
            Err(Error::RealizeAliased { k, slow_index, nyquist }) => {
                assert_eq!(k[0].abs(), 1);
                assert_eq!(slow_index.abs(), 40);
                assert_eq!(nyquist, 32);
            }
            other => panic!("expected alias error, got {other:?}"),
        }
    }

    #[test]
    fn realize_varies_with_slow_point() {
        // amplitude-modulated fast cosine: A(X) cos(X/γ)
        let g = grid64();
        let ms = MultiscaleField::from_fn(&g, |idx| {
            let x = g.point(idx)[0];
            let amp = 1.0 + 0.5 * x.sin();
            TorusSpectrum::from_entries(
                1,
                1,
                &[
                    ([1, 0], Complex64::new(amp / 2.0, 0.0)),
                    ([-1, 0], Complex64::new(amp / 2.0, 0.0)),
                ],
            )
            .unwrap()
        })
        .unwrap();
        let r = ms.realize(0.125).unwrap();
        let expect =
            SlowField::from_fn(&g, |x| (1.0 + 0.5 * x[0].sin()) * (8.0 * x[0]).cos()).unwrap();
        assert!(max_abs_diff(r.values(), expect.values()) < 1e-12);
    }

    #[test]
    fn oscillatory_gap_vanishes_for_mean_zero_and_decays() {
        let g = grid64();
        // smooth slow profile with geometrically decaying coefficients
        let f = SlowField::from_fn(&g, |x| 1.0 / (1.25 - x[0].cos())).unwrap();
        let cos_y = TorusSpectrum::from_entries(
            1,
            1,
            &[([1, 0], Complex64::new(0.5, 0.0)), ([-1, 0], Complex64::new(0.5, 0.0))],
        )
        .unwrap();
        let gap8 = oscillatory_average_gap(&cos_y, &f, 1.0 / 8.0);
        let gap16 = oscillatory_average_gap(&cos_y, &f, 1.0 / 16.0);
        // f̂_m ∝ 0.5^|m|: halving γ doubles the probed frequency, so the gap
        // shrinks by ~2^8; require at least the cubed decay.
        assert!(gap8 > 1e-13, "gap8 = {gap8:e} should be measurable");
        assert!(gap16 < gap8 / 8.0, "gap8 = {gap8:e}, gap16 = {gap16:e}");

        // constant torus part: gap should be pure mean cancellation ~ 0
        let one = TorusSpectrum::from_entries(1, 1, &[([0, 0], Complex64::new(1.0, 0.0))]).unwrap();
        assert!(oscillatory_average_gap(&one, &f, 0.125) < 1e-10);
    }

    #[test]
    fn lift_and_trim() {
        let s = TorusSpectrum::from_entries(
            1,
            2,
            &[([2, 0], Complex64::new(0.5, 0.0)), ([-2, 0], Complex64::new(0.5, 0.0))],
        )
        .unwrap();
        let up = s.lift(5).unwrap();
        assert_eq!(up.cutoff(), 5);
        assert_eq!(up.coeff(&[2, 0]), Complex64::new(0.5, 0.0));
        let back = up.lift(2).unwrap();
        assert_eq!(back, s);
        assert!(s.lift(1).is_err());
    }

    #[test]
    fn hermitian_check() {
        let good = TorusSpectrum::from_entries(
            1,
            1,
            &[([1, 0], Complex64::new(0.3, 0.2)), ([-1, 0], Complex64::new(0.3, -0.2))],
        )
        .unwrap();
        assert!(good.require_hermitian(1e-12).is_ok());
        let bad = TorusSpectrum::from_entries(1, 1, &[([1, 0], Complex64::new(0.3, 0.2))]).unwrap();
        assert!(matches!(bad.require_hermitian(1e-12), Err(Error::NonHermitian { .. })));
    }
}
