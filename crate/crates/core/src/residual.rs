//! Consistency residuals of the two-scale ansatz against the full
//! water-wave equations, and their decay rates as μ → 0.
//!
//! The realized ansatz (ζ_a, ψ_a) is plugged into the exact free-surface
//! system, with the surface flux evaluated by the strip solver:
//!
//!   E1 = ∂t ζ_a − (1/μ) G ψ_a,
//!   E2 = ∂t ψ_a + ζ_a + |∇ψ_a|²/2
//!        − μ ((1/μ) G ψ_a + ∇ζ_a·∇ψ_a)² / (2 (1 + μ |∇ζ_a|²)).
//!
//! Time derivatives come from centered differences of three snapshots of
//! the slow evolution; each snapshot gets its own stationary corrector.
//! The headline quantity is the weighted defect
//! H* = ‖E1‖_{L²} + γ^{−3/8} ‖E2‖_{H^{1/2}}, and a least-squares fit of
//! log ‖E‖ against log μ over a sweep gives the observed decay rates.
//! A flat-bed control run through the identical pipeline isolates the
//! bed-induced part (its residual scales like μ¹).

use crate::bathymetry::BottomProfile;
use crate::corrector;
use crate::effective_dn::{build_ansatz, AnsatzRealization};
use crate::elliptic_oracle::StripProblem;
use crate::error::{Error, Result};
use crate::resonance::NonresonanceGuard;
use crate::shallow_water::{simulate_to_times, SimOptions, SurfaceState};
use crate::spectral::SlowField;

/// Snaps a requested μ to the nearest value whose fast period divides the
/// box: m = round(L/(2π√μ)) whole bed cells, μ_eff = (L/(2πm))².
pub fn snap_mu(box_length: f64, mu_requested: f64) -> (f64, usize) {
    assert!(mu_requested > 0.0 && box_length > 0.0);
    let m_exact = box_length / (2.0 * std::f64::consts::PI * mu_requested.sqrt());
    let m = m_exact.round().max(1.0) as usize;
    let gamma = box_length / (2.0 * std::f64::consts::PI * m as f64);
    (gamma * gamma, m)
}

/// Least-squares slope of log y against log x.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    num / den
}

/// Everything the residual pipeline needs besides μ.
#[derive(Clone)]
pub struct ConsistencySetup {
    /// Initial slow state; must carry the surface potential.
    pub surface0: SurfaceState,
    pub bottom: BottomProfile,
    pub guard: NonresonanceGuard,
    /// Fast cutoff for the corrector spectra.
    pub cutoff: usize,
    /// Evaluation time t* for the residuals.
    pub eval_time: f64,
    /// Half-width of the centered time difference.
    pub dt_fd: f64,
    /// Horizontal oracle resolution per bed cell (the oracle grid has
    /// max(this × m, slow points) columns).
    pub oracle_cells_per_cell: usize,
    /// Vertical oracle cells.
    pub oracle_nz: usize,
    /// Maximum step for the slow integration (the CFL bound still applies).
    pub sim_dt: f64,
    pub sim: SimOptions,
}

impl ConsistencySetup {
    pub fn new(
        surface0: SurfaceState,
        bottom: BottomProfile,
        guard: NonresonanceGuard,
        cutoff: usize,
    ) -> Self {
        Self {
            surface0,
            bottom,
            guard,
            cutoff,
            eval_time: 0.1,
            dt_fd: 1e-3,
            oracle_cells_per_cell: 16,
            oracle_nz: 48,
            sim_dt: 5e-3,
            sim: SimOptions::default(),
        }
    }

    /// Same pipeline over a flat bed: the corrector vanishes and the
    /// residual isolates the shallow-water truncation itself.
    pub fn flat_control(&self) -> Self {
        let mut out = self.clone();
        out.bottom = BottomProfile::flat(self.bottom.dim());
        out
    }
}

/// Residual fields and norms at one effective μ.
#[derive(Clone, Debug)]
pub struct ConsistencyRecord {
    pub mu_requested: f64,
    pub mu: f64,
    pub gamma: f64,
    /// Bed cells per box.
    pub m: usize,
    /// ‖E1‖_{L²}.
    pub e1: f64,
    /// ‖E2‖_{H^{1/2}}.
    pub e2: f64,
    /// ‖E1‖ + γ^{−3/8} ‖E2‖.
    pub h_star: f64,
}

/// The two residual fields on the oracle grid, kept for inspection.
pub struct ResidualFields {
    pub e1: SlowField,
    pub e2: SlowField,
    pub record: ConsistencyRecord,
}

fn ansatz_at(
    setup: &ConsistencySetup,
    state: &SurfaceState,
    mu: f64,
) -> Result<AnsatzRealization> {
    let corr = corrector::stationary_field(state, &setup.bottom, &setup.guard, setup.cutoff)?;
    build_ansatz(state, &corr, mu)
}

/// Runs the full pipeline at one requested μ: snap, evolve the slow state
/// to {t* − δ, t*, t* + δ}, build the realized ansatz at each, difference
/// in time, and measure the defect against the strip solver.
pub fn consistency_at(setup: &ConsistencySetup, mu_requested: f64) -> Result<ResidualFields> {
    let grid = setup.surface0.grid();
    if grid.dim() != 1 {
        return Err(Error::Unsupported(
            "consistency pipeline",
            "one horizontal dimension only".into(),
        ));
    }
    if setup.surface0.psi0.is_none() {
        return Err(Error::State("consistency run needs the surface potential".into()));
    }
    let (mu, m) = snap_mu(grid.box_length(), mu_requested);
    let gamma = mu.sqrt();
    let t = setup.eval_time;
    let dt = setup.dt_fd;
    if !(t > dt && dt > 0.0) {
        return Err(Error::State(format!(
            "evaluation time {t} must exceed the difference width {dt}"
        )));
    }

    let times = [t - dt, t, t + dt];
    let states = simulate_to_times(&setup.surface0, &times, setup.sim_dt, &setup.sim)?;
    let mut ansatz = Vec::with_capacity(3);
    for s in &states {
        ansatz.push(ansatz_at(setup, s, mu)?);
    }

    // centered time derivatives on the slow grid
    let dzeta_dt = (&ansatz[2].zeta_a - &ansatz[0].zeta_a).scale(0.5 / dt);
    let dpsi_dt = (&ansatz[2].psi_a - &ansatz[0].psi_a).scale(0.5 / dt);

    // oracle grid: resolve the bed with a fixed cell budget, never coarser
    // than the slow grid
    let nx = (setup.oracle_cells_per_cell * m).max(grid.n_points());
    let nx = nx + nx % 2;
    let zeta_a = ansatz[1].zeta_a.resample(nx)?;
    let psi_a = ansatz[1].psi_a.resample(nx)?;
    let dzeta_dt = dzeta_dt.resample(nx)?;
    let dpsi_dt = dpsi_dt.resample(nx)?;

    let strip = StripProblem::build(&zeta_a, &setup.bottom, mu, setup.oracle_nz)?;
    let gpsi = strip.dn_apply(&psi_a)?.scale(1.0 / mu);

    let e1 = &dzeta_dt - &gpsi;

    let grad_psi = psi_a.deriv(0);
    let grad_zeta = zeta_a.deriv(0);
    let speed2 = grad_psi.mul_dealiased(&grad_psi)?;
    let w = &gpsi + &grad_zeta.mul_dealiased(&grad_psi)?;
    let w2 = w.mul_dealiased(&w)?;
    let denom = grad_zeta
        .mul_dealiased(&grad_zeta)?
        .scale(mu)
        .map_values(|v| 2.0 * (1.0 + v));
    let e2 = &(&(&dpsi_dt + &zeta_a) + &speed2.scale(0.5)) - &w2.scale(mu).div_pointwise(&denom)?;

    let e1_norm = e1.l2_norm();
    let e2_norm = e2.sobolev_norm(0.5);
    let record = ConsistencyRecord {
        mu_requested,
        mu,
        gamma,
        m,
        e1: e1_norm,
        e2: e2_norm,
        h_star: e1_norm + gamma.powf(-0.375) * e2_norm,
    };
    Ok(ResidualFields { e1, e2, record })
}

/// Residual sweep over a μ list with fitted decay rates.
#[derive(Clone, Debug)]
pub struct RateStudy {
    pub records: Vec<ConsistencyRecord>,
    /// Fitted decay rate of ‖E1‖ (positive = decays as μ → 0).
    pub slope_e1: f64,
    pub slope_e2: f64,
}

pub fn rate_study(setup: &ConsistencySetup, mu_list: &[f64]) -> Result<RateStudy> {
    if mu_list.len() < 2 {
        return Err(Error::State("rate study needs at least two μ values".into()));
    }
    let mut records = Vec::with_capacity(mu_list.len());
    for &mu in mu_list {
        records.push(consistency_at(setup, mu)?.record);
    }
    let mus: Vec<f64> = records.iter().map(|r| r.mu).collect();
    let e1: Vec<f64> = records.iter().map(|r| r.e1).collect();
    let e2: Vec<f64> = records.iter().map(|r| r.e2).collect();
    Ok(RateStudy {
        slope_e1: fit_loglog_slope(&mus, &e1),
        slope_e2: fit_loglog_slope(&mus, &e2),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SlowGrid;
    use std::f64::consts::PI;

    #[test]
    fn snapping_hits_frozen_values() {
        let l = 4.0 * PI;
        let cases = [
            (0.04, 10, 0.04),
            (0.02, 14, (1.0 / 7.0f64) * (1.0 / 7.0)),
            (0.01, 20, 0.01),
            (0.005, 28, (1.0 / 14.0f64) * (1.0 / 14.0)),
        ];
        for (req, m_expect, mu_expect) in cases {
            let (mu, m) = snap_mu(l, req);
            assert_eq!(m, m_expect, "requested {req}");
            assert!((mu - mu_expect).abs() < 1e-15, "requested {req}: {mu} vs {mu_expect}");
        }
    }

    #[test]
    fn loglog_fit_recovers_exact_power() {
        let xs = [0.04, 0.02, 0.01, 0.005];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.7 * x.powf(0.85)).collect();
        let s = fit_loglog_slope(&xs, &ys);
        assert!((s - 0.85).abs() < 1e-12);
    }

    fn small_setup(bed: BottomProfile) -> ConsistencySetup {
        let grid = SlowGrid::new_1d(4.0 * PI, 64).unwrap();
        let l = grid.box_length();
        let psi0 = SlowField::from_fn(&grid, |x| {
            0.3 * (-((x[0] - l / 2.0) / 1.2f64).powi(2)).exp()
        })
        .unwrap();
        let zeta0 = psi0.scale(0.2);
        let v0 = psi0.deriv(0);
        let surface = SurfaceState::new(zeta0, vec![v0], Some(psi0)).unwrap();
        let guard = NonresonanceGuard::default_for(&surface).unwrap();
        let cutoff = bed.positive_mode_count() + 4;
        let mut setup = ConsistencySetup::new(surface, bed, guard, cutoff);
        setup.oracle_nz = 24;
        setup.oracle_cells_per_cell = 12;
        setup
    }

    #[test]
    fn potential_gauge_shift_leaves_residuals() {
        let setup = small_setup(BottomProfile::single_cosine());
        let base = consistency_at(&setup, 0.04).unwrap();

        let mut shifted = setup.clone();
        let psi_shift = shifted.surface0.psi0.as_ref().unwrap().map_values(|v| v + 5.0);
        shifted.surface0 =
            SurfaceState::new(shifted.surface0.zeta0.clone(), shifted.surface0.v0.clone(), Some(psi_shift))
                .unwrap();
        let moved = consistency_at(&shifted, 0.04).unwrap();

        let r1 = (base.record.e1 - moved.record.e1).abs() / base.record.e1;
        let r2 = (base.record.e2 - moved.record.e2).abs() / base.record.e2;
        assert!(r1 < 1e-6, "E1 moved by {r1} under a gauge shift");
        assert!(r2 < 1e-6, "E2 moved by {r2} under a gauge shift");
    }

    #[test]
    fn time_difference_width_is_converged() {
        let setup = small_setup(BottomProfile::single_cosine());
        let base = consistency_at(&setup, 0.04).unwrap();
        let mut half = setup.clone();
        half.dt_fd = setup.dt_fd / 2.0;
        let fine = consistency_at(&half, 0.04).unwrap();
        let r = (base.record.e1 - fine.record.e1).abs() / base.record.e1;
        assert!(r < 0.05, "E1 moved by {r} when halving the difference width");
    }

    #[test]
    fn oracle_resolution_is_converged() {
        let setup = small_setup(BottomProfile::single_cosine());
        let base = consistency_at(&setup, 0.04).unwrap();
        let mut fine = setup.clone();
        fine.oracle_nz = setup.oracle_nz * 2;
        fine.oracle_cells_per_cell = setup.oracle_cells_per_cell * 2;
        let refined = consistency_at(&fine, 0.04).unwrap();
        let r = (base.record.e1 - refined.record.e1).abs() / base.record.e1;
        assert!(r < 0.10, "E1 moved by {r} when doubling the oracle resolution");
    }

    #[test]
    fn flat_control_residual_scales_linearly() {
        let setup = small_setup(BottomProfile::single_cosine()).flat_control();
        let study = rate_study(&setup, &[0.04, 0.02, 0.01]).unwrap();
        assert!(
            (study.slope_e1 - 1.0).abs() < 0.15,
            "flat-bed E1 rate {} should be ≈ 1",
            study.slope_e1
        );
    }
}
