//! Periodic bottom profiles on the fast torus.
//!
//! The bed is z = −1 + β b(X/γ) with b a zero-mean, real-valued periodic
//! profile held as a truncated coefficient table. Presets cover the single
//! cosine, a two-mode profile, and a seeded random-phase spectrum with
//! exponentially decaying amplitudes.

use crate::error::{Error, Result};
use crate::spectral::{MultiscaleField, SlowField, SlowGrid, TorusSpectrum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Zero-mean periodic bottom profile.
#[derive(Clone, Debug)]
pub struct BottomProfile {
    spectrum: TorusSpectrum,
}

impl BottomProfile {
    /// Flat bed (identically zero profile).
    pub fn flat(dim: usize) -> Self {
        Self { spectrum: TorusSpectrum::zero(dim, 1) }
    }

    /// Builds from explicit mode entries. Requires a zero mean and Hermitian
    /// symmetry (the profile is real); the cutoff is the largest listed
    /// |k|_∞, at least 1.
    pub fn from_modes(dim: usize, entries: &[([i64; 2], Complex64)]) -> Result<Self> {
        let mut cutoff = 1usize;
        for (k, _) in entries {
            for a in 0..dim {
                cutoff = cutoff.max(k[a].unsigned_abs() as usize);
            }
        }
        let spectrum = TorusSpectrum::from_entries(dim, cutoff, entries)?;
        let mean = spectrum.mean().norm();
        if mean > 1e-14 * spectrum.max_coeff_abs().max(1.0) {
            return Err(Error::NonZeroMean { mean });
        }
        spectrum.require_hermitian(1e-12)?;
        Ok(Self { spectrum })
    }

    /// cos(Y): coefficients 1/2 at k = ±1.
    pub fn single_cosine() -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self::from_modes(1, &[([1, 0], h), ([-1, 0], h)]).expect("valid preset")
    }

    /// cos(Y) + 1/2 cos(2Y).
    pub fn two_mode() -> Self {
        let h = Complex64::new(0.5, 0.0);
        let q = Complex64::new(0.25, 0.0);
        Self::from_modes(1, &[([1, 0], h), ([-1, 0], h), ([2, 0], q), ([-2, 0], q)])
            .expect("valid preset")
    }

    /// Random-phase profile: |b̂_k| = e^{−a|k|} for 1 ≤ k ≤ kmax with
    /// independent uniform phases from a seeded generator (1D).
    pub fn random_phase(kmax: usize, a: f64, seed: u64) -> Result<Self> {
        if kmax == 0 {
            return Err(Error::State("random-phase profile needs kmax >= 1".into()));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::State(format!("decay rate a = {a} must be nonnegative")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entries = Vec::with_capacity(2 * kmax);
        for k in 1..=kmax as i64 {
            let amp = (-a * k as f64).exp();
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let c = Complex64::from_polar(amp, phase);
            entries.push(([k, 0], c));
            entries.push(([-k, 0], c.conj()));
        }
        Self::from_modes(1, &entries)
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn cutoff(&self) -> usize {
        self.spectrum.cutoff()
    }

    pub fn spectrum(&self) -> &TorusSpectrum {
        &self.spectrum
    }

    pub fn is_flat(&self) -> bool {
        self.spectrum.max_coeff_abs() == 0.0
    }

    /// Number of modes k (counting each ±k pair once) carrying a
    /// non-negligible coefficient; drives the default corrector cutoff.
    pub fn positive_mode_count(&self) -> usize {
        let floor = 1e-14 * self.spectrum.max_coeff_abs().max(1.0);
        let mut n = 0;
        for i in 0..self.spectrum.mode_count() {
            let k = self.spectrum.k_at(i);
            let leading = k[0] > 0 || (k[0] == 0 && k[1] > 0);
            if leading && self.spectrum.coeffs()[i].norm() > floor {
                n += 1;
            }
        }
        n
    }

    /// L² norm over the torus cell.
    pub fn amplitude_norm(&self) -> f64 {
        self.spectrum.l2_norm()
    }

    /// Profile value at torus point `y` (radians).
    pub fn eval(&self, y: &[f64; 2]) -> f64 {
        self.spectrum.eval(y)
    }

    /// Derivative ∂b/∂Y_axis at torus point `y`.
    pub fn eval_deriv(&self, y: &[f64; 2], axis: usize) -> f64 {
        self.spectrum.deriv(axis).eval(y)
    }

    /// Samples b(X/γ) on a slow grid (the realized fast bed seen by the
    /// slow variables).
    pub fn realize_bottom(&self, grid: &SlowGrid, gamma: f64) -> Result<SlowField> {
        if grid.dim() != self.dim() {
            return Err(Error::GridMismatch(format!(
                "bottom is {}-dimensional, grid is {}-dimensional",
                self.dim(),
                grid.dim()
            )));
        }
        MultiscaleField::uniform(grid, &self.spectrum)?.realize(gamma)
    }
}
