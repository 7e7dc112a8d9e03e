//! Effective nonlinear shallow-water evolution for the leading-order surface.
//!
//! State: elevation ζ0 and velocity V0 (with the optional potential ψ0 whose
//! gradient V0 is), depth h0 = 1 + ζ0, evolving by
//!
//!   ∂t ζ0 = −∇·(h0 V0),
//!   ∂t V0 = −∇ζ0 − (V0·∇)V0,
//!   ∂t ψ0 = −ζ0 − |∇ψ0|²/2.
//!
//! Spatial derivatives are spectral, quadratic terms are dealiased by the
//! 3/2 rule, and time stepping is the three-stage strong-stability-preserving
//! Runge-Kutta scheme with an advective CFL bound.

use crate::error::{Error, Result};
use crate::spectral::{SlowField, SlowGrid};

/// Surface state at one instant. `v0` has one component per axis; `psi0`
/// carries the potential when the caller tracks it.
#[derive(Clone, Debug)]
pub struct SurfaceState {
    pub zeta0: SlowField,
    pub v0: Vec<SlowField>,
    pub psi0: Option<SlowField>,
}

impl SurfaceState {
    pub fn new(zeta0: SlowField, v0: Vec<SlowField>, psi0: Option<SlowField>) -> Result<Self> {
        let grid = zeta0.grid().clone();
        if v0.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "{} velocity components for d = {}",
                v0.len(),
                grid.dim()
            )));
        }
        for f in v0.iter().chain(psi0.iter()) {
            if f.grid() != &grid {
                return Err(Error::GridMismatch("state components on different grids".into()));
            }
        }
        Ok(Self { zeta0, v0, psi0 })
    }

    /// Quiescent state (ζ0 = 0, V0 = 0, ψ0 = 0).
    pub fn rest(grid: &SlowGrid) -> Self {
        Self {
            zeta0: SlowField::zeros(grid),
            v0: (0..grid.dim()).map(|_| SlowField::zeros(grid)).collect(),
            psi0: Some(SlowField::zeros(grid)),
        }
    }

    pub fn grid(&self) -> &SlowGrid {
        self.zeta0.grid()
    }

    /// Depth field h0 = 1 + ζ0.
    pub fn depth(&self) -> SlowField {
        self.zeta0.map_values(|z| 1.0 + z)
    }

    pub fn min_depth(&self) -> (usize, f64) {
        let (i, z) = self.zeta0.argmin();
        (i, 1.0 + z)
    }

    /// max over points and component pairs of |∂a v_b|.
    pub fn max_velocity_gradient(&self) -> f64 {
        let mut m = 0.0f64;
        for v in &self.v0 {
            for a in 0..self.grid().dim() {
                m = m.max(v.deriv(a).max_abs());
            }
        }
        m
    }

    /// Time-reversal image (ζ0, −V0, −ψ0); evolving it for time T undoes an
    /// evolution of length T.
    pub fn time_reversed(&self) -> Self {
        Self {
            zeta0: self.zeta0.clone(),
            v0: self.v0.iter().map(|v| v.scale(-1.0)).collect(),
            psi0: self.psi0.as_ref().map(|p| p.scale(-1.0)),
        }
    }

    fn lincomb(a: &Self, ca: f64, b: &Self, cb: f64) -> Self {
        let zeta0 = a.zeta0.scale(ca).add_scaled(&b.zeta0, cb);
        let v0 = a
            .v0
            .iter()
            .zip(&b.v0)
            .map(|(x, y)| x.scale(ca).add_scaled(y, cb))
            .collect();
        let psi0 = match (&a.psi0, &b.psi0) {
            (Some(x), Some(y)) => Some(x.scale(ca).add_scaled(y, cb)),
            _ => None,
        };
        Self { zeta0, v0, psi0 }
    }
}

/// Time derivative of a [`SurfaceState`].
#[derive(Clone, Debug)]
pub struct Tendency {
    pub zeta0: SlowField,
    pub v0: Vec<SlowField>,
    pub psi0: Option<SlowField>,
}

/// Integration controls.
#[derive(Clone, Debug)]
pub struct SimOptions {
    /// Advective CFL number (fraction of dx / max signal speed).
    pub cfl: f64,
    /// Hard lower bound on the depth; crossing it aborts with an error.
    pub depth_floor: f64,
    /// Blow-up declared when max|∂V| exceeds this factor divided by L.
    pub blowup_factor: f64,
    /// Optional spectral hyperviscosity coefficient (ν (−Δ)² drag); 0 = off.
    pub viscosity: f64,
    /// Times at which full states must be captured exactly.
    pub snapshot_times: Vec<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            depth_floor: 1e-6,
            blowup_factor: 1e3,
            viscosity: 0.0,
            snapshot_times: Vec::new(),
        }
    }
}

/// Scalar diagnostics recorded along a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct Diagnostics {
    pub time: f64,
    /// ∫ ζ0 dX.
    pub mass: f64,
    /// (1/2) ∫ (h0 |V0|² + ζ0²) dX.
    pub energy: f64,
    pub min_depth: f64,
    pub max_grad_v: f64,
}

/// Reason a run stopped before its requested end time.
#[derive(Clone, Copy, Debug)]
pub struct Termination {
    pub time: f64,
    pub max_grad_v: f64,
}

/// Result of [`simulate`]: per-step diagnostics plus states at the initial
/// time, every requested snapshot time, and the final time.
#[derive(Debug)]
pub struct Trajectory {
    pub states: Vec<(f64, SurfaceState)>,
    pub diagnostics: Vec<Diagnostics>,
    pub terminated: Option<Termination>,
}

impl Trajectory {
    /// Stored state nearest to `t` within 1e-9, if any.
    pub fn state_at(&self, t: f64) -> Option<&SurfaceState> {
        self.states
            .iter()
            .find(|(ts, _)| (ts - t).abs() <= 1e-9)
            .map(|(_, s)| s)
    }

    pub fn final_state(&self) -> &SurfaceState {
        &self.states.last().expect("trajectory never empty").1
    }

    pub fn final_time(&self) -> f64 {
        self.states.last().expect("trajectory never empty").0
    }
}

pub fn diagnostics(state: &SurfaceState, time: f64) -> Diagnostics {
    let grid = state.grid();
    let dv = grid.cell_volume();
    let zeta = state.zeta0.values();
    let mut mass = 0.0;
    let mut energy = 0.0;
    for i in 0..zeta.len() {
        let z = zeta[i];
        let h = 1.0 + z;
        let v2: f64 = state.v0.iter().map(|v| v.values()[i] * v.values()[i]).sum();
        mass += z;
        energy += 0.5 * (h * v2 + z * z);
    }
    let (_, min_depth) = state.min_depth();
    Diagnostics {
        time,
        mass: mass * dv,
        energy: energy * dv,
        min_depth,
        max_grad_v: state.max_velocity_gradient(),
    }
}

/// Right-hand side of the evolution; errors if the depth has crossed the
/// floor (the hyperbolic system is ill-posed there).
pub fn sw_rhs(state: &SurfaceState, opts: &SimOptions, time: f64) -> Result<Tendency> {
    let grid = state.grid().clone();
    let (idx, depth) = state.min_depth();
    if depth <= opts.depth_floor {
        return Err(Error::Depth { depth, index: idx, time });
    }
    let h0 = state.depth();
    let d = grid.dim();

    // mass: −∇·(h0 V0), fluxes dealiased
    let fluxes: Vec<SlowField> = state
        .v0
        .iter()
        .map(|v| h0.mul_dealiased(v))
        .collect::<Result<_>>()?;
    let mut t_zeta = SlowField::divergence(&fluxes)?.scale(-1.0);

    // momentum: −∇ζ0 − (V0·∇)V0
    let mut t_v = Vec::with_capacity(d);
    for b in 0..d {
        let mut t = state.zeta0.deriv(b).scale(-1.0);
        for a in 0..d {
            let adv = state.v0[a].mul_dealiased(&state.v0[b].deriv(a))?;
            t = &t - &adv;
        }
        t_v.push(t);
    }

    // potential: −ζ0 − |∇ψ0|²/2 (using V0 = ∇ψ0)
    let t_psi = match &state.psi0 {
        Some(_) => {
            let mut speed2 = SlowField::zeros(&grid);
            for v in &state.v0 {
                speed2 = &speed2 + &v.mul_dealiased(v)?;
            }
            Some(state.zeta0.scale(-1.0).add_scaled(&speed2, -0.5))
        }
        None => None,
    };

    // optional hyperviscous drag −ν Δ² on ζ0 and V0
    if opts.viscosity > 0.0 {
        let nu = opts.viscosity;
        let damp = |f: &SlowField| {
            f.apply_multiplier(|xi| {
                let x2 = xi[0] * xi[0] + xi[1] * xi[1];
                num_complex::Complex64::new(-nu * x2 * x2, 0.0)
            })
            .expect("finite symbol")
        };
        t_zeta = &t_zeta + &damp(&state.zeta0);
        for (t, v) in t_v.iter_mut().zip(&state.v0) {
            *t = &*t + &damp(v);
        }
    }

    Ok(Tendency { zeta0: t_zeta, v0: t_v, psi0: t_psi })
}

/// Largest stable step: cfl · dx / max(|V0| + sqrt(h0)).
pub fn cfl_limit(state: &SurfaceState, opts: &SimOptions) -> f64 {
    let grid = state.grid();
    let zeta = state.zeta0.values();
    let mut speed = 0.0f64;
    for i in 0..zeta.len() {
        let h = (1.0 + zeta[i]).max(0.0);
        let v2: f64 = state.v0.iter().map(|v| v.values()[i] * v.values()[i]).sum();
        speed = speed.max(v2.sqrt() + h.sqrt());
    }
    if speed == 0.0 {
        f64::INFINITY
    } else {
        opts.cfl * grid.dx() / speed
    }
}

fn apply_tendency(state: &SurfaceState, t: &Tendency, dt: f64) -> SurfaceState {
    SurfaceState {
        zeta0: state.zeta0.add_scaled(&t.zeta0, dt),
        v0: state
            .v0
            .iter()
            .zip(&t.v0)
            .map(|(v, tv)| v.add_scaled(tv, dt))
            .collect(),
        psi0: match (&state.psi0, &t.psi0) {
            (Some(p), Some(tp)) => Some(p.add_scaled(tp, dt)),
            _ => None,
        },
    }
}

/// One SSP-RK3 step of size `dt`. Errors if `dt` exceeds the CFL limit or a
/// stage violates depth positivity.
pub fn step(state: &SurfaceState, dt: f64, opts: &SimOptions, time: f64) -> Result<SurfaceState> {
    let limit = cfl_limit(state, opts);
    if dt > limit {
        return Err(Error::Cfl { dt, limit });
    }
    let u = state;
    let u1 = apply_tendency(u, &sw_rhs(u, opts, time)?, dt);
    let u2 = {
        let t1 = sw_rhs(&u1, opts, time)?;
        let mix = SurfaceState::lincomb(u, 0.75, &u1, 0.25);
        apply_tendency(&mix, &t1, 0.25 * dt)
    };
    let out = {
        let t2 = sw_rhs(&u2, opts, time)?;
        let mix = SurfaceState::lincomb(u, 1.0 / 3.0, &u2, 2.0 / 3.0);
        apply_tendency(&mix, &t2, 2.0 / 3.0 * dt)
    };
    let (idx, depth) = out.min_depth();
    if depth <= opts.depth_floor {
        return Err(Error::Depth { depth, index: idx, time: time + dt });
    }
    Ok(out)
}

/// Integrates from `state0` to `t_end` with step cap `dt`.
///
/// The actual step shrinks to honor the CFL bound (with a 5% margin) and to
/// land exactly on snapshot times and the end time. Blow-up (velocity
/// gradient beyond the configured factor over 1/L) truncates the run and
/// records the last valid time; depth violations abort with an error.
pub fn simulate(
    state0: &SurfaceState,
    t_end: f64,
    dt: f64,
    opts: &SimOptions,
) -> Result<Trajectory> {
    assert!(dt > 0.0 && t_end >= 0.0, "need dt > 0 and t_end >= 0");
    let grad_cap = opts.blowup_factor / state0.grid().box_length();

    let mut stops: Vec<f64> = opts
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > 1e-14 && t < t_end - 1e-14)
        .collect();
    stops.push(t_end);
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut states = vec![(0.0, state0.clone())];
    let mut diags = vec![diagnostics(state0, 0.0)];
    let mut terminated = None;

    let mut current = state0.clone();
    let mut t = 0.0;
    'outer: for &stop in &stops {
        while t < stop - 1e-13 {
            let limit = cfl_limit(&current, opts);
            let dt_step = dt.min(0.95 * limit).min(stop - t);
            current = step(&current, dt_step, opts, t)?;
            t += dt_step;
            let d = diagnostics(&current, t);
            diags.push(d);
            if d.max_grad_v > grad_cap {
                terminated = Some(Termination { time: t, max_grad_v: d.max_grad_v });
                states.push((t, current.clone()));
                break 'outer;
            }
        }
        if terminated.is_none() {
            states.push((stop, current.clone()));
            t = stop;
        }
    }

    Ok(Trajectory { states, diagnostics: diags, terminated })
}

/// Convenience: integrate once and return the states at exactly the
/// requested times (which must be distinct and nonnegative).
pub fn simulate_to_times(
    state0: &SurfaceState,
    times: &[f64],
    dt: f64,
    opts: &SimOptions,
) -> Result<Vec<SurfaceState>> {
    let t_end = times.iter().copied().fold(0.0f64, f64::max);
    let mut o = opts.clone();
    o.snapshot_times = times.to_vec();
    let traj = simulate(state0, t_end, dt, &o)?;
    if let Some(term) = traj.terminated {
        return Err(Error::State(format!(
            "run blew up at t = {:.6} (max|grad V| = {:.3e}) before reaching all sample times",
            term.time, term.max_grad_v
        )));
    }
    times
        .iter()
        .map(|&t| {
            traj.state_at(t).cloned().ok_or_else(|| {
                Error::State(format!("no stored state at requested time {t}"))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian_state(grid: &SlowGrid, zeta_amp: f64, psi_amp: f64, width: f64) -> SurfaceState {
        let l = grid.box_length();
        let bump = move |x: f64| (-((x - l / 2.0) / width).powi(2)).exp();
        let zeta0 = SlowField::from_fn(grid, |x| zeta_amp * bump(x[0])).unwrap();
        let psi0 = SlowField::from_fn(grid, |x| psi_amp * bump(x[0])).unwrap();
        let v0 = vec![psi0.deriv(0)];
        SurfaceState::new(zeta0, v0, Some(psi0)).unwrap()
    }

    #[test]
    fn rest_state_is_fixed_point() {
        let grid = SlowGrid::new_1d(4.0 * PI, 64).unwrap();
        let zeta0 = SlowField::constant(&grid, 0.3);
        let state =
            SurfaceState::new(zeta0, vec![SlowField::zeros(&grid)], Some(SlowField::zeros(&grid)))
                .unwrap();
        let traj = simulate(&state, 1.0, 1e-2, &SimOptions::default()).unwrap();
        let fin = traj.final_state();
        let dz = fin
            .zeta0
            .values()
            .iter()
            .map(|v| (v - 0.3).abs())
            .fold(0.0f64, f64::max);
        assert!(dz < 1e-14, "rest state drifted by {dz:e}");
        assert!(fin.v0[0].max_abs() < 1e-14);
    }

    #[test]
    fn mass_is_conserved() {
        let grid = SlowGrid::new_1d(4.0 * PI, 128).unwrap();
        let state = gaussian_state(&grid, 0.1, 0.3, 1.2);
        let traj = simulate(&state, 1.0, 2e-3, &SimOptions::default()).unwrap();
        let m0 = traj.diagnostics.first().unwrap().mass;
        let drift = traj
            .diagnostics
            .iter()
            .map(|d| (d.mass - m0).abs())
            .fold(0.0f64, f64::max);
        assert!(drift < 1e-10, "mass drift {drift:e}");
    }

    #[test]
    fn energy_drift_third_order_small() {
        let grid = SlowGrid::new_1d(4.0 * PI, 128).unwrap();
        let state = gaussian_state(&grid, 0.05, 0.15, 1.5);
        let traj = simulate(&state, 1.0, 5e-4, &SimOptions::default()).unwrap();
        let e0 = traj.diagnostics.first().unwrap().energy;
        let e1 = traj.diagnostics.last().unwrap().energy;
        assert!(((e1 - e0) / e0).abs() < 1e-8, "energy drift {:e}", (e1 - e0) / e0);
    }

    #[test]
    fn reversibility() {
        let grid = SlowGrid::new_1d(4.0 * PI, 128).unwrap();
        let state = gaussian_state(&grid, 0.02, 0.05, 1.5);
        let opts = SimOptions::default();
        let fwd = simulate(&state, 0.5, 5e-4, &opts).unwrap();
        let back0 = fwd.final_state().time_reversed();
        let bwd = simulate(&back0, 0.5, 5e-4, &opts).unwrap();
        let recovered = bwd.final_state().time_reversed();
        let dz = recovered
            .zeta0
            .values()
            .iter()
            .zip(state.zeta0.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let dv = recovered.v0[0]
            .values()
            .iter()
            .zip(state.v0[0].values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(dz < 1e-8 && dv < 1e-8, "reversal errors dz = {dz:e}, dv = {dv:e}");
    }

    #[test]
    fn linear_wave_speed_within_one_percent() {
        // amplitude 1e-6 right-travelling wave on unit depth: phase speed 1
        let grid = SlowGrid::new_1d(2.0 * PI, 64).unwrap();
        let amp = 1e-6;
        let zeta0 = SlowField::from_fn(&grid, |x| amp * (x[0]).cos()).unwrap();
        let v0 = SlowField::from_fn(&grid, |x| amp * (x[0]).cos()).unwrap();
        let state = SurfaceState::new(zeta0, vec![v0], None).unwrap();
        let t_end = 1.0;
        let traj = simulate(&state, t_end, 1e-3, &SimOptions::default()).unwrap();
        let fin = traj.final_state();
        // phase of mode 1 rotates by -k c t
        let spec = fin.zeta0.spectrum();
        let g = fin.zeta0.grid().clone();
        let c1 = (0..spec.len())
            .find(|&s| g.freq_vec(s)[0] == 1)
            .map(|s| spec[s])
            .unwrap();
        let phase = -(c1.arg());
        let speed = phase / t_end;
        assert!(
            (speed - 1.0).abs() < 0.01,
            "measured speed {speed}, expected 1 within 1%"
        );
    }

    #[test]
    fn riemann_invariant_preserved_on_simple_wave() {
        // R− = v − 2(√h − 1) ≡ 0 initially stays ~0 for smooth simple waves.
        let grid = SlowGrid::new_1d(4.0 * PI, 256).unwrap();
        let l = grid.box_length();
        let zeta0 = SlowField::from_fn(&grid, |x| {
            0.05 * (-((x[0] - l / 2.0) / 1.5).powi(2)).exp()
        })
        .unwrap();
        let v0 = zeta0.map_values(|z| 2.0 * ((1.0 + z).sqrt() - 1.0));
        let state = SurfaceState::new(zeta0, vec![v0], None).unwrap();
        let traj = simulate(&state, 0.5, 2e-4, &SimOptions::default()).unwrap();
        let fin = traj.final_state();
        let rminus = fin.v0[0]
            .values()
            .iter()
            .zip(fin.zeta0.values())
            .map(|(v, z)| (v - 2.0 * ((1.0 + z).sqrt() - 1.0)).abs())
            .fold(0.0f64, f64::max);
        assert!(rminus < 1e-6, "Riemann invariant drift {rminus:e}");
    }

    #[test]
    fn refinement_improves_solution() {
        // halving dt at fixed resolution cuts the self-difference by ≥ 2³
        let grid = SlowGrid::new_1d(4.0 * PI, 128).unwrap();
        let state = gaussian_state(&grid, 0.1, 0.3, 1.2);
        let run = |dt: f64| {
            simulate(&state, 0.5, dt, &SimOptions::default())
                .unwrap()
                .final_state()
                .zeta0
                .clone()
        };
        let coarse = run(4e-3);
        let mid = run(2e-3);
        let fine = run(1e-3);
        let e_coarse = (&coarse - &fine).l2_norm();
        let e_mid = (&mid - &fine).l2_norm();
        // third-order stepping: errors vs the fine run behave like dt³, so
        // the ratio should be ≈ (4³−...)/..., conservatively ≥ 2³ = 8 · (1/2)
        assert!(
            e_coarse > 7.0 * e_mid,
            "dt-refinement ratio {:.2} below third-order expectation",
            e_coarse / e_mid
        );
    }

    #[test]
    fn depth_violation_errors() {
        let grid = SlowGrid::new_1d(4.0 * PI, 64).unwrap();
        let l = grid.box_length();
        let zeta0 = SlowField::from_fn(&grid, |x| {
            -1.2 * (-((x[0] - l / 2.0) / 1.2).powi(2)).exp()
        })
        .unwrap();
        let state = SurfaceState::new(zeta0, vec![SlowField::zeros(&grid)], None).unwrap();
        let r = simulate(&state, 0.5, 1e-3, &SimOptions::default());
        assert!(matches!(r, Err(Error::Depth { .. })));
    }

    #[test]
    fn cfl_guard_errors_on_oversized_step() {
        let grid = SlowGrid::new_1d(4.0 * PI, 64).unwrap();
        let state = gaussian_state(&grid, 0.1, 0.3, 1.2);
        let opts = SimOptions::default();
        let limit = cfl_limit(&state, &opts);
        assert!(matches!(step(&state, 2.0 * limit, &opts, 0.0), Err(Error::Cfl { .. })));
    }

    #[test]
    fn snapshots_land_exactly() {
        let grid = SlowGrid::new_1d(4.0 * PI, 64).unwrap();
        let state = gaussian_state(&grid, 0.05, 0.1, 1.5);
        let times = [0.099, 0.1, 0.101];
        let states = simulate_to_times(&state, &times, 1e-3, &SimOptions::default()).unwrap();
        assert_eq!(states.len(), 3);
        // the three snapshots straddle t = 0.1 and genuinely differ
        let d01 = (&states[0].zeta0 - &states[1].zeta0).max_abs();
        assert!(d01 > 0.0 && d01 < 1e-3);
    }
}
