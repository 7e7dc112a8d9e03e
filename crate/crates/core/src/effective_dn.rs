//! Effective free-surface flux over a rapidly varying bed, and the
//! two-scale ansatz it feeds.
//!
//! The leading surface flux is the shallow-water divergence −∇·(h0 V0). Over
//! a bed oscillating at scale γ the corrector pair (ζ₁, ψ₁) and the bed
//! itself contribute fast-scale corrections evaluated per slow point with
//! local depth h0(X):
//!
//!   g_eff = −∇·(h0 V0) − V0 · realize(∇_Y ζ₁)
//!           + realize(|k| tanh(h0|k|) ψ̂₁ₖ) + V0 · realize(i k sech(h0|k|) b̂ₖ).
//!
//! The third term is the fast dispersive flux of the corrector potential;
//! the fourth carries the bed slope through the water column, damped by
//! sech(h0|k|). All fast factors realize at phase X/γ and multiply slow
//! fields with dealiasing.

use crate::bathymetry::BottomProfile;
use crate::corrector::CorrectorState;
use crate::error::{Error, Result};
use crate::shallow_water::SurfaceState;
use crate::spectral::{sech, MultiscaleField, SlowField};
use num_complex::Complex64;

fn knorm(k: &[i64; 2]) -> f64 {
    ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt()
}

/// Effective surface flux at fast scale `gamma`. Needs the surface state,
/// the corrector pair, and the bed that produced it.
pub fn g_eff(
    surface: &SurfaceState,
    corrector: &CorrectorState,
    b: &BottomProfile,
    gamma: f64,
) -> Result<SlowField> {
    let grid = surface.grid();
    grid.check_same(corrector.grid(), "surface vs corrector")?;
    if b.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "bed dimension {} vs grid dimension {}",
            b.dim(),
            grid.dim()
        )));
    }
    let dim = grid.dim();
    let h0 = surface.depth();
    let zeta0 = &surface.zeta0;

    // slow flux −∇·(h0 V0)
    let fluxes: Vec<SlowField> = surface
        .v0
        .iter()
        .map(|v| h0.mul_dealiased(v))
        .collect::<Result<_>>()?;
    let mut out = SlowField::divergence(&fluxes)?.scale(-1.0);

    // advection of the fast surface ripple: −V0 · realize(∇_Y ζ₁)
    for axis in 0..dim {
        let dzeta = corrector
            .zeta1()
            .map(|_, s| s.deriv(axis))?
            .realize(gamma)?;
        out = &out - &surface.v0[axis].mul_dealiased(&dzeta)?;
    }

    // fast dispersive flux: realize(|k| tanh(h0(X)|k|) ψ̂₁ₖ)
    let dn_psi1 = corrector
        .psi1()
        .try_map(|i, s| {
            let h = 1.0 + zeta0.values()[i];
            s.apply_multiplier(|k| {
                let kn = knorm(k);
                Complex64::new(kn * (h * kn).tanh(), 0.0)
            })
        })?
        .realize(gamma)?;
    out = &out + &dn_psi1;

    // bed-slope transfer: +V0 · realize(i k sech(h0(X)|k|) b̂ₖ)
    let bed = MultiscaleField::uniform(grid, b.spectrum())?;
    for axis in 0..dim {
        let slope = bed
            .try_map(|i, s| {
                let h = 1.0 + zeta0.values()[i];
                s.apply_multiplier(|k| Complex64::new(0.0, k[axis] as f64 * sech(h * knorm(k))))
            })?
            .realize(gamma)?;
        out = &out + &surface.v0[axis].mul_dealiased(&slope)?;
    }

    Ok(out)
}

/// Single-scale realization of the two-scale ansatz at homogenization
/// parameter μ = γ²:
///
///   ζ_a(X) = ζ0(X) + γ ζ₁(X, X/γ),   ψ_a(X) = ψ0(X) + γ² ψ₁(X, X/γ).
#[derive(Clone, Debug)]
pub struct AnsatzRealization {
    pub mu: f64,
    pub gamma: f64,
    pub zeta_a: SlowField,
    pub psi_a: SlowField,
}

/// Number of fast periods 2πγ in the box; a realized ansatz is only
/// well-defined on the periodic box when this is an integer.
pub fn fast_period_count(box_length: f64, gamma: f64) -> f64 {
    box_length / (2.0 * std::f64::consts::PI * gamma)
}

/// Builds the realized ansatz. The surface state must carry ψ0, and the
/// fast scale γ = √μ must fit the box: L/(2πγ) integer to 1e-9. On a
/// mismatch the error suggests the nearest commensurate γ.
pub fn build_ansatz(
    surface: &SurfaceState,
    corrector: &CorrectorState,
    mu: f64,
) -> Result<AnsatzRealization> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::State(format!("homogenization parameter mu = {mu} must be positive")));
    }
    surface.grid().check_same(corrector.grid(), "surface vs corrector")?;
    let psi0 = surface
        .psi0
        .as_ref()
        .ok_or_else(|| Error::State("ansatz needs the surface potential psi0".into()))?;
    let gamma = mu.sqrt();
    let l = surface.grid().box_length();
    let m = fast_period_count(l, gamma);
    if (m - m.round()).abs() > 1e-9 || m.round() < 1.0 {
        let suggested = l / (2.0 * std::f64::consts::PI * m.round().max(1.0));
        return Err(Error::Commensurability {
            fast_period: 2.0 * std::f64::consts::PI * gamma,
            box_length: l,
            suggested,
        });
    }
    let (z1, p1) = corrector.realize(gamma)?;
    let zeta_a = surface.zeta0.add_scaled(&z1, gamma);
    let psi_a = psi0.add_scaled(&p1, gamma * gamma);
    Ok(AnsatzRealization { mu, gamma, zeta_a, psi_a })
}
