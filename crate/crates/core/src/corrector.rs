//! Fast-scale surface corrector driven by the periodic bed.
//!
//! At each slow point the corrector modes (ζ̂₁ₖ, ψ̂₁ₖ) obey a linear system
//! with frozen coefficients h0 = 1 + ζ0 and V0:
//!
//!   ∂τ ζ̂ + i (k·V0) ζ̂ − ω² ψ̂ = f̂,   ∂τ ψ̂ + i (k·V0) ψ̂ + ζ̂ = 0,
//!
//! with dispersion ω² = |k| tanh(h0|k|) and bed forcing
//! f̂ₖ = i (k·V0) sech(h0|k|) b̂ₖ. In the characteristic variables
//! Z = ω^{−1/2} ζ̂ + i ω^{1/2} ψ̂ and W = ω^{−1/2} ζ̂ − i ω^{1/2} ψ̂ the system
//! diagonalizes with frequencies θ_Z = ω + k·V0 and θ_W = k·V0 − ω, so the
//! flow map is evaluated in closed form: free rotation plus a Duhamel term
//! Φ(τ, θ) = (1 − e^{−iτθ})/(iθ). At a resonance (θ = 0) Φ degenerates to τ
//! and the driven amplitude grows linearly; the propagator stays exact there
//! via a series branch, so near-resonant runs are a diagnostic, not a crash.

use crate::bathymetry::BottomProfile;
use crate::error::{Error, Result};
use crate::par;
use crate::resonance::{self, NonresonanceGuard};
use crate::shallow_water::SurfaceState;
use crate::spectral::{sech, MultiscaleField, SlowField, TorusSpectrum};
use num_complex::Complex64;

/// Duhamel factor Φ(τ, θ) = ∫₀^τ e^{−i(τ−s)θ} ds = (1 − e^{−iτθ})/(iθ).
///
/// For |τθ| < 1e-6 the quotient is replaced by its Taylor expansion
/// τ (1 − iτθ/2 − (τθ)²/6 + i(τθ)³/24); the truncation error is below
/// 1e-25·τ there, and the θ → 0 limit Φ = τ (secular growth) is exact.
fn phi(tau: f64, theta: f64) -> Complex64 {
    let x = tau * theta;
    if x.abs() < 1e-6 {
        Complex64::new(1.0 - x * x / 6.0, x * (x * x / 24.0 - 0.5)) * tau
    } else {
        // 1 − e^{−ix} = 2i sin(x/2) e^{−ix/2}, free of cancellation
        2.0 * (x / 2.0).sin() / theta * Complex64::from_polar(1.0, -x / 2.0)
    }
}

/// One corrector mode at one slow point, in characteristic variables.
#[derive(Clone, Copy, Debug)]
pub struct ModeState {
    k: [i64; 2],
    omega: f64,
    adv: f64,
    z: Complex64,
    w: Complex64,
}

impl ModeState {
    /// Builds the characteristic pair from surface-variable coefficients.
    /// The zero mode carries no oscillation and is rejected.
    pub fn from_hat(
        k: [i64; 2],
        h0: f64,
        v0: &[f64],
        zeta_hat: Complex64,
        psi_hat: Complex64,
    ) -> Result<Self> {
        if k == [0, 0] {
            return Err(Error::State("corrector modes exclude k = 0".into()));
        }
        if !(h0 > 0.0) {
            return Err(Error::Depth { depth: h0, index: 0, time: 0.0 });
        }
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let omega = (kn * (h0 * kn).tanh()).sqrt();
        let mut adv = 0.0;
        for (a, &v) in v0.iter().enumerate() {
            adv += k[a] as f64 * v;
        }
        let sq = omega.sqrt();
        let u = zeta_hat / sq;
        let v = psi_hat * sq;
        Ok(Self { k, omega, adv, z: u + Complex64::i() * v, w: u - Complex64::i() * v })
    }

    pub fn k(&self) -> [i64; 2] {
        self.k
    }

    /// Free oscillation frequency ω = (|k| tanh(h0|k|))^{1/2}.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Advective frequency k·V0.
    pub fn advection(&self) -> f64 {
        self.adv
    }

    /// Characteristic frequencies (θ_Z, θ_W) = (k·V0 ± ω).
    pub fn frequencies(&self) -> (f64, f64) {
        (self.omega + self.adv, self.adv - self.omega)
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn zeta_hat(&self) -> Complex64 {
        self.omega.sqrt() * (self.z + self.w) / 2.0
    }

    pub fn psi_hat(&self) -> Complex64 {
        (self.z - self.w) / (2.0 * Complex64::i() * self.omega.sqrt())
    }

    /// Per-mode wave energy ω(|Z|² + |W|²)/2 = |ζ̂|² + ω²|ψ̂|².
    pub fn energy(&self) -> f64 {
        self.omega * (self.z.norm_sqr() + self.w.norm_sqr()) / 2.0
    }

    /// Exact flow map over time τ under constant forcing f̂ on the ζ
    /// equation. Valid for any τθ, including exact resonance.
    pub fn propagate(&self, tau: f64, f_hat: Complex64) -> Self {
        self.propagate_forced(tau, f_hat, Complex64::new(0.0, 0.0))
    }

    /// Flow map with forcing on both equations: f̂ drives ζ̂, ĝ drives ψ̂.
    /// The characteristic forcings are ω^{−1/2} f̂ ± i ω^{1/2} ĝ.
    pub fn propagate_forced(&self, tau: f64, f_hat: Complex64, g_hat: Complex64) -> Self {
        let (tz, tw) = self.frequencies();
        let sq = self.omega.sqrt();
        let fc = f_hat / sq;
        let gc = Complex64::i() * g_hat * sq;
        let z = Complex64::from_polar(1.0, -tau * tz) * self.z + (fc + gc) * phi(tau, tz);
        let w = Complex64::from_polar(1.0, -tau * tw) * self.w + (fc - gc) * phi(tau, tw);
        Self { z, w, ..*self }
    }
}

/// Bed forcing spectrum f̂ₖ = i (k·V0) sech(h0|k|) b̂ₖ at the given cutoff.
/// Bed modes beyond the cutoff are dropped (the system is diagonal in k, so
/// they never couple into resolved modes).
pub fn forcing_spectrum(
    h0: f64,
    v0: &[f64],
    b: &BottomProfile,
    cutoff: usize,
) -> Result<TorusSpectrum> {
    if !(h0 > 0.0) {
        return Err(Error::Depth { depth: h0, index: 0, time: 0.0 });
    }
    let mut out = TorusSpectrum::zero(b.dim(), cutoff);
    let bs = b.spectrum();
    for i in 0..out.mode_count() {
        let k = out.k_at(i);
        if k == [0, 0] {
            continue;
        }
        let bk = bs.coeff(&k);
        if bk.norm() == 0.0 {
            continue;
        }
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let mut adv = 0.0;
        for (a, &v) in v0.iter().enumerate() {
            adv += k[a] as f64 * v;
        }
        out.set(&k, Complex64::new(0.0, adv * sech(h0 * kn)) * bk);
    }
    Ok(out)
}

/// First-order surface corrector pair (ζ₁, ψ₁) as fast-periodic profiles
/// over the slow grid. Both components have zero fast mean and Hermitian
/// spectra (they realize to real fields).
#[derive(Clone, Debug)]
pub struct CorrectorState {
    zeta1: MultiscaleField,
    psi1: MultiscaleField,
}

impl CorrectorState {
    pub fn new(zeta1: MultiscaleField, psi1: MultiscaleField) -> Result<Self> {
        zeta1.grid().check_same(psi1.grid(), "corrector components")?;
        if zeta1.cutoff() != psi1.cutoff() {
            return Err(Error::GridMismatch(format!(
                "corrector cutoffs differ: {} vs {}",
                zeta1.cutoff(),
                psi1.cutoff()
            )));
        }
        for field in [&zeta1, &psi1] {
            for s in field.spectra() {
                s.require_zero_mean(1e-10)?;
                s.require_hermitian(1e-10)?;
            }
        }
        Ok(Self { zeta1, psi1 })
    }

    pub fn zero(surface: &SurfaceState, cutoff: usize) -> Self {
        Self {
            zeta1: MultiscaleField::constant_zero(surface.grid(), cutoff),
            psi1: MultiscaleField::constant_zero(surface.grid(), cutoff),
        }
    }

    pub fn grid(&self) -> &crate::spectral::SlowGrid {
        self.zeta1.grid()
    }

    pub fn cutoff(&self) -> usize {
        self.zeta1.cutoff()
    }

    pub fn zeta1(&self) -> &MultiscaleField {
        &self.zeta1
    }

    pub fn psi1(&self) -> &MultiscaleField {
        &self.psi1
    }

    /// Evaluates both components at fast phase X/γ on the slow grid.
    pub fn realize(&self, gamma: f64) -> Result<(SlowField, SlowField)> {
        Ok((self.zeta1.realize(gamma)?, self.psi1.realize(gamma)?))
    }
}

/// Weighted spectral energy of a corrector pair at one slow point:
///
///   E_r(ζ̂, ψ̂)² = Σ_{k≠0} (1 + |k|²)^r (|ζ̂ₖ|² + |k| tanh(h0|k|) |ψ̂ₖ|²).
///
/// The homogeneous propagator is an isometry of E_r for every r.
pub fn energy_norm(zeta1: &TorusSpectrum, psi1: &TorusSpectrum, r: f64, h0: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..zeta1.mode_count() {
        let k = zeta1.k_at(i);
        if k == [0, 0] {
            continue;
        }
        let kn2 = (k[0] * k[0] + k[1] * k[1]) as f64;
        let kn = kn2.sqrt();
        let om2 = kn * (h0 * kn).tanh();
        let zc = zeta1.coeffs()[i].norm_sqr();
        let pc = psi1.coeff(&k).norm_sqr();
        acc += (1.0 + kn2).powf(r) * (zc + om2 * pc);
    }
    acc.sqrt()
}

/// Largest per-point energy norm of a corrector state over the slow grid,
/// with the depth taken from the surface state.
pub fn max_energy_norm(state: &CorrectorState, surface: &SurfaceState, r: f64) -> Result<f64> {
    state.grid().check_same(surface.grid(), "corrector vs surface")?;
    let n = state.grid().total_points();
    let vals = par::map_indexed(n, |i| {
        let h0 = 1.0 + surface.zeta0.values()[i];
        energy_norm(state.zeta1.at(i), state.psi1.at(i), r, h0)
    });
    Ok(vals.into_iter().fold(0.0f64, f64::max))
}

/// Largest per-point energy norm of the difference of two corrector states.
pub fn energy_distance(
    a: &CorrectorState,
    b: &CorrectorState,
    surface: &SurfaceState,
    r: f64,
) -> Result<f64> {
    a.grid().check_same(b.grid(), "corrector states")?;
    a.grid().check_same(surface.grid(), "corrector vs surface")?;
    if a.cutoff() != b.cutoff() {
        return Err(Error::GridMismatch(format!(
            "corrector cutoffs differ: {} vs {}",
            a.cutoff(),
            b.cutoff()
        )));
    }
    let n = a.grid().total_points();
    let vals = par::map_indexed(n, |i| {
        let h0 = 1.0 + surface.zeta0.values()[i];
        let dz = a.zeta1.at(i).sub(b.zeta1.at(i));
        let dp = a.psi1.at(i).sub(b.psi1.at(i));
        energy_norm(&dz, &dp, r, h0)
    });
    Ok(vals.into_iter().fold(0.0f64, f64::max))
}

/// Advances the corrector by fast time τ with the slow state frozen,
/// applying the exact per-mode flow map in `n_steps` equal substeps
/// (the map composes exactly, so the step count only exercises bookkeeping).
pub fn evolve(
    state: &CorrectorState,
    surface: &SurfaceState,
    b: &BottomProfile,
    tau: f64,
    n_steps: usize,
) -> Result<CorrectorState> {
    state.grid().check_same(surface.grid(), "corrector vs surface")?;
    if b.dim() != state.grid().dim() {
        return Err(Error::GridMismatch(format!(
            "bed dimension {} vs grid dimension {}",
            b.dim(),
            state.grid().dim()
        )));
    }
    if n_steps == 0 {
        return Err(Error::State("evolve needs at least one step".into()));
    }
    if !tau.is_finite() {
        return Err(Error::State(format!("fast time span {tau} must be finite")));
    }
    let cutoff = state.cutoff();
    let n = state.grid().total_points();
    let dt = tau / n_steps as f64;

    let pairs: Vec<(TorusSpectrum, TorusSpectrum)> = par::try_map_indexed(n, |i| {
        let h0 = 1.0 + surface.zeta0.values()[i];
        if h0 <= 0.0 {
            return Err(Error::Depth { depth: h0, index: i, time: 0.0 });
        }
        let v0: Vec<f64> = surface.v0.iter().map(|v| v.values()[i]).collect();
        let force = forcing_spectrum(h0, &v0, b, cutoff)?;
        let zs = state.zeta1.at(i);
        let ps = state.psi1.at(i);
        let mut zeta = TorusSpectrum::zero(zs.dim(), cutoff);
        let mut psi = TorusSpectrum::zero(zs.dim(), cutoff);
        for m in 0..zs.mode_count() {
            let k = zs.k_at(m);
            if k == [0, 0] {
                continue;
            }
            let mut mode = ModeState::from_hat(k, h0, &v0, zs.coeffs()[m], ps.coeffs()[m])?;
            let f = force.coeffs()[m];
            for _ in 0..n_steps {
                mode = mode.propagate(dt, f);
            }
            zeta.set(&k, mode.zeta_hat());
            psi.set(&k, mode.psi_hat());
        }
        Ok((zeta, psi))
    })?;

    let (zetas, psis): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    CorrectorState::new(
        MultiscaleField::from_spectra(state.grid().clone(), zetas)?,
        MultiscaleField::from_spectra(state.grid().clone(), psis)?,
    )
}

/// Stationary corrector at a single (depth, velocity) pair:
///
///   ζ̂ₖ = −(k·V0)² sech(h0|k|) b̂ₖ / Dₖ,   ψ̂ₖ = −i (k·V0) sech(h0|k|) b̂ₖ / Dₖ,
///
/// with Dₖ = |k| tanh(h0|k|) − (k·V0)², the resonance margin. Every bed mode
/// must clear the guard threshold on |Dₖ|.
pub fn stationary(
    h0: f64,
    v0: &[f64],
    b: &BottomProfile,
    guard: &NonresonanceGuard,
) -> Result<(TorusSpectrum, TorusSpectrum)> {
    stationary_at(h0, v0, b, guard, 0)
}

fn stationary_at(
    h0: f64,
    v0: &[f64],
    b: &BottomProfile,
    guard: &NonresonanceGuard,
    slow_index: usize,
) -> Result<(TorusSpectrum, TorusSpectrum)> {
    if !(h0 > 0.0) {
        return Err(Error::Depth { depth: h0, index: slow_index, time: 0.0 });
    }
    let bs = b.spectrum();
    let mut zeta = TorusSpectrum::zero(b.dim(), b.cutoff());
    let mut psi = TorusSpectrum::zero(b.dim(), b.cutoff());
    for i in 0..bs.mode_count() {
        let k = bs.k_at(i);
        let bk = bs.coeffs()[i];
        if k == [0, 0] || bk.norm() <= 1e-14 {
            continue;
        }
        let d = resonance::margin(h0, v0, &k);
        let thr = guard.threshold(&k);
        if d.abs() <= thr {
            return Err(Error::Resonance {
                violations: 1,
                index: slow_index,
                k: k.to_vec(),
                margin: d,
                threshold: thr,
            });
        }
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        let mut adv = 0.0;
        for (a, &v) in v0.iter().enumerate() {
            adv += k[a] as f64 * v;
        }
        let transfer = sech(h0 * kn) / d;
        zeta.set(&k, Complex64::new(-adv * adv * transfer, 0.0) * bk);
        psi.set(&k, Complex64::new(0.0, -adv * transfer) * bk);
    }
    Ok((zeta, psi))
}

/// Stationary corrector over the whole slow grid, lifted to `cutoff`.
/// Certification runs first so a near-resonant state is reported with its
/// worst offending (slow point, mode) pair before any work is done.
pub fn stationary_field(
    surface: &SurfaceState,
    b: &BottomProfile,
    guard: &NonresonanceGuard,
    cutoff: usize,
) -> Result<CorrectorState> {
    let report = resonance::certify(surface, b, guard)?;
    resonance::require_certified(&report)?;
    let n = surface.grid().total_points();
    let pairs: Vec<(TorusSpectrum, TorusSpectrum)> = par::try_map_indexed(n, |i| {
        let h0 = 1.0 + surface.zeta0.values()[i];
        let v0: Vec<f64> = surface.v0.iter().map(|v| v.values()[i]).collect();
        let (z, p) = stationary_at(h0, &v0, b, guard, i)?;
        Ok((z.lift(cutoff)?, p.lift(cutoff)?))
    })?;
    let (zetas, psis): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    CorrectorState::new(
        MultiscaleField::from_spectra(surface.grid().clone(), zetas)?,
        MultiscaleField::from_spectra(surface.grid().clone(), psis)?,
    )
}
