//! Bragg-resonance margins, certification, and Froude diagnostics.
//!
//! A fast bottom mode k resonates with the surface when the advective
//! frequency matches the free oscillation: (k·V0)² = |k| tanh(h0|k|). The
//! margin is the signed distance between the two sides; certification flags
//! every (slow point, mode) pair whose margin is within a k-dependent
//! threshold δ e^{−h̄|k|}. Supercritical flow (Fr² = |V0|²/h0 ≥ 1) is always
//! outside the resonant band, since tanh(x)/x < 1.

use crate::bathymetry::BottomProfile;
use crate::error::{Error, Result};
use crate::shallow_water::SurfaceState;
use crate::spectral::SlowField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Coefficients |b̂_k| below this are not considered present in the bed.
const MODE_FLOOR: f64 = 1e-14;

/// Threshold profile for resonance certification: a mode k is flagged when
/// |margin| ≤ δ e^{−h̄ |k|}. The decay rate h̄ is tied to the minimum depth
/// (default half of it), matching the exponential smallness of the
/// bottom-to-surface transfer at depth.
#[derive(Clone, Copy, Debug)]
pub struct NonresonanceGuard {
    delta: f64,
    hbar: f64,
}

impl NonresonanceGuard {
    pub const DEFAULT_DELTA: f64 = 1e-3;

    pub fn new(delta: f64, hbar: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::State(format!("guard delta = {delta} must be positive")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::State(format!("guard depth rate = {hbar} must be positive")));
        }
        Ok(Self { delta, hbar })
    }

    /// Guard with h̄ = (minimum depth)/2 for the given surface.
    pub fn for_surface(delta: f64, surface: &SurfaceState) -> Result<Self> {
        let (idx, depth) = surface.min_depth();
        if depth <= 0.0 {
            return Err(Error::Depth { depth, index: idx, time: 0.0 });
        }
        Self::new(delta, depth / 2.0)
    }

    /// Default guard: δ = 1e-3, h̄ = (minimum depth)/2.
    pub fn default_for(surface: &SurfaceState) -> Result<Self> {
        Self::for_surface(Self::DEFAULT_DELTA, surface)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn threshold(&self, k: &[i64; 2]) -> f64 {
        let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
        self.delta * (-self.hbar * kn).exp()
    }
}

/// Resonance margin |k| tanh(h0|k|) − (k·V0)² at one (depth, velocity, mode).
pub fn margin(h0: f64, v0: &[f64], k: &[i64; 2]) -> f64 {
    let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
    let mut kv = 0.0;
    for (a, &v) in v0.iter().enumerate() {
        kv += k[a] as f64 * v;
    }
    kn * (h0 * kn).tanh() - kv * kv
}

/// One flagged (slow point, mode) pair.
#[derive(Clone, Debug)]
pub struct ResonanceFlag {
    pub slow_index: usize,
    pub k: [i64; 2],
    pub margin: f64,
    pub threshold: f64,
}

/// Certification output: flags in deterministic (slow index, mode) order,
/// the squared-Froude field, and the resonant Froude window envelope.
#[derive(Debug)]
pub struct ResonanceReport {
    pub flags: Vec<ResonanceFlag>,
    /// Bottom modes checked at every slow point.
    pub checked_modes: usize,
    /// Fr² = |V0|² / h0 on the slow grid.
    pub froude_sq: SlowField,
    /// Envelope of resonant Fr² values over the grid's depth range, from the
    /// bed's extreme mode numbers; `None` for a flat bed.
    pub window: Option<(f64, f64)>,
}

impl ResonanceReport {
    pub fn certified(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Squared Froude number field; errors if the depth is not positive.
pub fn froude_squared(surface: &SurfaceState) -> Result<SlowField> {
    let (idx, depth) = surface.min_depth();
    if depth <= 0.0 {
        return Err(Error::Depth { depth, index: idx, time: 0.0 });
    }
    let grid = surface.grid().clone();
    let n = grid.total_points();
    let vals = (0..n)
        .map(|i| {
            let h = 1.0 + surface.zeta0.values()[i];
            let v2: f64 = surface.v0.iter().map(|v| v.values()[i] * v.values()[i]).sum();
            v2 / h
        })
        .collect();
    SlowField::new(grid, vals)
}

/// Resonant squared-Froude window at depth `h0` for bed modes with norms in
/// [k_min, k_max]: (tanh(h0 k_max)/(h0 k_max), tanh(h0 k_min)/(h0 k_min)).
/// x ↦ tanh(x)/x is strictly decreasing, so the lower endpoint comes from
/// the largest mode.
pub fn froude_window(h0: f64, k_min: f64, k_max: f64) -> (f64, f64) {
    assert!(h0 > 0.0 && k_min > 0.0 && k_max >= k_min);
    let f = |x: f64| x.tanh() / x;
    (f(h0 * k_max), f(h0 * k_min))
}

/// The bed modes the certifier checks: one representative per ±k pair,
/// skipping coefficients at or below the floor. Exposed so scan reports can
/// enumerate exactly the checked set.
pub fn checked_modes(b: &BottomProfile) -> Vec<[i64; 2]> {
    bed_mode_norms(b).into_iter().map(|(k, _)| k).collect()
}

/// Mode norms present in the bed (each ±k pair counted once).
fn bed_mode_norms(b: &BottomProfile) -> Vec<([i64; 2], f64)> {
    let spec = b.spectrum();
    let mut out = Vec::new();
    for i in 0..spec.mode_count() {
        let k = spec.k_at(i);
        let leading = k[0] > 0 || (k[0] == 0 && k[1] > 0);
        if leading && spec.coeffs()[i].norm() > MODE_FLOOR {
            let kn = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
            out.push((k, kn));
        }
    }
    out
}

/// Checks every slow point against every bed mode. Report-valued: flags are
/// data, not errors (callers that require certification turn a nonempty
/// flag list into [`Error::Resonance`] themselves).
pub fn certify(
    surface: &SurfaceState,
    b: &BottomProfile,
    guard: &NonresonanceGuard,
) -> Result<ResonanceReport> {
    let froude_sq = froude_squared(surface)?;
    let modes = bed_mode_norms(b);
    let n = surface.grid().total_points();

    let per_point: Vec<Vec<ResonanceFlag>> = crate::par::map_indexed(n, |i| {
        let h0 = 1.0 + surface.zeta0.values()[i];
        let v0: Vec<f64> = surface.v0.iter().map(|v| v.values()[i]).collect();
        let mut flags = Vec::new();
        for (k, _) in &modes {
            let m = margin(h0, &v0, k);
            let thr = guard.threshold(k);
            if m.abs() <= thr {
                flags.push(ResonanceFlag { slow_index: i, k: *k, margin: m, threshold: thr });
            }
        }
        flags
    });
    let flags: Vec<ResonanceFlag> = per_point.into_iter().flatten().collect();

    let window = if modes.is_empty() {
        None
    } else {
        let kn_min = modes.iter().map(|(_, n)| *n).fold(f64::INFINITY, f64::min);
        let kn_max = modes.iter().map(|(_, n)| *n).fold(0.0f64, f64::max);
        let h_min = 1.0 + surface.zeta0.min_value();
        let h_max = 1.0 + surface.zeta0.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lo = froude_window(h_max, kn_min, kn_max).0;
        let hi = froude_window(h_min, kn_min, kn_max).1;
        Some((lo, hi))
    };

    Ok(ResonanceReport { flags, checked_modes: modes.len(), froude_sq, window })
}

/// Turns a failed certification into the canonical error (first flag in
/// deterministic order describes the worst offender location).
pub fn require_certified(report: &ResonanceReport) -> Result<()> {
    if let Some(first) = report.flags.first() {
        // report the flag with the smallest |margin| / threshold ratio
        let worst = report
            .flags
            .iter()
            .min_by(|a, b| {
                (a.margin.abs() / a.threshold)
                    .partial_cmp(&(b.margin.abs() / b.threshold))
                    .unwrap()
            })
            .unwrap_or(first);
        return Err(Error::Resonance {
            violations: report.flags.len(),
            index: worst.slow_index,
            k: worst.k.to_vec(),
            margin: worst.margin,
            threshold: worst.threshold,
        });
    }
    Ok(())
}

/// Monte Carlo estimate of the flagged fraction over uniform random constant
/// states: h0 ~ U[h0_range], |V0| ~ U[v0_range] (random direction in 2D).
pub fn monte_carlo_flagged_fraction(
    h0_range: (f64, f64),
    v0_range: (f64, f64),
    b: &BottomProfile,
    guard: &NonresonanceGuard,
    samples: usize,
    seed: u64,
) -> f64 {
    assert!(h0_range.0 > 0.0 && h0_range.1 >= h0_range.0);
    assert!(v0_range.1 >= v0_range.0);
    if samples == 0 {
        return 0.0;
    }
    let modes = bed_mode_norms(b);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flagged = 0usize;
    for _ in 0..samples {
        let h0 = rng.gen_range(h0_range.0..=h0_range.1);
        let speed = rng.gen_range(v0_range.0..=v0_range.1);
        let v0: Vec<f64> = if b.dim() == 1 {
            vec![speed]
        } else {
            let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            vec![speed * ang.cos(), speed * ang.sin()]
        };
        let hit = modes
            .iter()
            .any(|(k, _)| margin(h0, &v0, k).abs() <= guard.threshold(k));
        if hit {
            flagged += 1;
        }
    }
    flagged as f64 / samples as f64
}
