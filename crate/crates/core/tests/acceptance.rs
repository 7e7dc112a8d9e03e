//! Acceptance suite: one test per shipped guarantee, each printing a single
//! PASS/FAIL line with its measured figures and enforcing a wall-time cap.
//! Run `cargo test --test acceptance -- --nocapture` for the full report.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shom_core::bathymetry::BottomProfile;
use shom_core::cell_problem::{closed_form_on_grid, oracle_cell_solve};
use shom_core::corrector::{self, ModeState};
use shom_core::effective_dn::{build_ansatz, g_eff};
use shom_core::elliptic_oracle::StripProblem;
use shom_core::residual::{fit_loglog_slope, snap_mu, ConsistencySetup};
use shom_core::resonance::{self, NonresonanceGuard};
use shom_core::shallow_water::{simulate, SimOptions, SurfaceState};
use shom_core::spectral::{oscillatory_average_gap, SlowField, SlowGrid, TorusSpectrum};

const BOX: f64 = 4.0 * PI;

fn report(label: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {label}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{label}: {detail}");
}

fn gauss(x: f64, center: f64, width: f64) -> f64 {
    (-((x - center) / width).powi(2)).exp()
}

/// Localized-bump initial state used by the rate and remainder studies:
/// elevation 0.1 g(X), potential 0.56 g(X), velocity its gradient.
fn bump_surface(n: usize) -> SurfaceState {
    let grid = SlowGrid::new_1d(BOX, n).unwrap();
    let zeta = SlowField::from_fn(&grid, |x| 0.1 * gauss(x[0], BOX / 2.0, 1.2)).unwrap();
    let psi = SlowField::from_fn(&grid, |x| 0.56 * gauss(x[0], BOX / 2.0, 1.2)).unwrap();
    let v = psi.grad();
    SurfaceState::new(zeta, v, Some(psi)).unwrap()
}

#[test]
fn criterion_01_cell_oracle_matches_closed_form() {
    let clock = Instant::now();
    let b = BottomProfile::single_cosine();
    let c1 = Complex64::new(0.2, -0.1);
    let c2 = Complex64::new(0.0, 0.05);
    let psi1 = TorusSpectrum::from_entries(
        1,
        2,
        &[([1, 0], c1), ([-1, 0], c1.conj()), ([2, 0], c2), ([-2, 0], c2.conj())],
    )
    .unwrap();
    let grad = [0.7];

    let mut errs = Vec::new();
    for n in [64usize, 128] {
        let oracle = oracle_cell_solve(1.0, &psi1, &b, &grad, n, n).unwrap();
        let exact = closed_form_on_grid(1.0, &psi1, &b, &grad, n, n).unwrap();
        errs.push(oracle.relative_l2_diff(&exact));
    }
    let ratio = errs[0] / errs[1];
    let secs = clock.elapsed().as_secs_f64();
    let pass = errs[0] <= 1e-3 && (3.5..=4.5).contains(&ratio) && secs < 10.0;
    report(
        "01 cell oracle vs closed form",
        pass,
        &format!(
            "rel64 = {:.3e}, rel128 = {:.3e}, ratio = {:.3}, {:.1}s",
            errs[0], errs[1], ratio, secs
        ),
    );
}

fn rk4_pair(
    adv: f64,
    om2: f64,
    mut zeta: Complex64,
    mut psi: Complex64,
    tau: f64,
    steps: usize,
    f: Complex64,
    g: Complex64,
) -> (Complex64, Complex64) {
    let dt = tau / steps as f64;
    let rhs = |z: Complex64, p: Complex64| {
        (
            -Complex64::i() * adv * z + om2 * p + f,
            -Complex64::i() * adv * p - z + g,
        )
    };
    for _ in 0..steps {
        let (k1z, k1p) = rhs(zeta, psi);
        let (k2z, k2p) = rhs(zeta + 0.5 * dt * k1z, psi + 0.5 * dt * k1p);
        let (k3z, k3p) = rhs(zeta + 0.5 * dt * k2z, psi + 0.5 * dt * k2p);
        let (k4z, k4p) = rhs(zeta + dt * k3z, psi + dt * k3p);
        zeta += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        psi += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    (zeta, psi)
}

#[test]
fn criterion_02_mode_propagator_matches_rk4() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;

    let mut done = 0;
    while done < 100 {
        let k0 = loop {
            let c = rng.gen_range(-3i64..=3);
            if c != 0 {
                break c;
            }
        };
        let h0 = rng.gen_range(0.6..1.4);
        let v = rng.gen_range(-0.8..0.8);
        if resonance::margin(h0, &[v], &[k0, 0]).abs() < 0.05 {
            continue;
        }
        let z0 = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let p0 = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let f = Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        let g = Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
        let mode = ModeState::from_hat([k0, 0], h0, &[v], z0, p0).unwrap();
        let (adv, om2) = (mode.advection(), mode.omega() * mode.omega());

        // march the reference continuously, compare one-shot maps every τ = 5
        let (mut zr, mut pr) = (z0, p0);
        for ck in 1..=10 {
            let (z2, p2) = rk4_pair(adv, om2, zr, pr, 5.0, 20_000, f, g);
            zr = z2;
            pr = p2;
            let exact = mode.propagate_forced(5.0 * ck as f64, f, g);
            worst = worst
                .max((exact.zeta_hat() - zr).norm())
                .max((exact.psi_hat() - pr).norm());
        }
        done += 1;
    }

    // homogeneous flow must preserve |Z| and |W| exactly
    let m0 = ModeState::from_hat(
        [3, 0],
        1.1,
        &[0.52],
        Complex64::new(0.3, -0.2),
        Complex64::new(0.1, 0.4),
    )
    .unwrap();
    let (rz, rw) = (m0.z().norm(), m0.w().norm());
    let mut m = m0;
    let mut drift = 0.0f64;
    for _ in 0..1000 {
        m = m.propagate(1.0, Complex64::new(0.0, 0.0));
        drift = drift.max((m.z().norm() - rz).abs()).max((m.w().norm() - rw).abs());
    }

    let secs = clock.elapsed().as_secs_f64();
    let pass = worst <= 1e-8 && drift <= 1e-13 && secs < 5.0;
    report(
        "02 mode propagator vs RK4",
        pass,
        &format!("max err = {worst:.3e}, modulus drift = {drift:.3e}, {secs:.1}s"),
    );
}

#[test]
fn criterion_03_stationary_corrector_is_fixed_point() {
    let clock = Instant::now();
    let surface = bump_surface(64);
    let b = BottomProfile::single_cosine();
    let guard = NonresonanceGuard::default_for(&surface).unwrap();
    let stat = corrector::stationary_field(&surface, &b, &guard, 5).unwrap();
    let evolved = corrector::evolve(&stat, &surface, &b, 100.0, 100).unwrap();
    let dist = corrector::energy_distance(&evolved, &stat, &surface, 0.0).unwrap();
    let secs = clock.elapsed().as_secs_f64();
    let pass = dist <= 1e-10 && secs < 5.0;
    report(
        "03 stationary state fixed under evolution",
        pass,
        &format!("energy distance after tau = 100: {dist:.3e}, {secs:.1}s"),
    );
}

#[test]
fn criterion_04_secular_growth_rate_at_resonance() {
    let clock = Instant::now();
    // k·V0 = −ω makes the Z characteristic exactly resonant
    let h0 = 1.0;
    let omega = 1.0f64.tanh().sqrt();
    let v = [-omega];
    let b = BottomProfile::single_cosine();
    let force = corrector::forcing_spectrum(h0, &v, &b, 1).unwrap();
    let f = force.coeff(&[1, 0]);
    assert!(f.norm() > 0.0);

    let mut m = ModeState::from_hat(
        [1, 0],
        h0,
        &v,
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
    .unwrap();
    let mut taus = vec![0.0];
    let mut amps = vec![0.0];
    for j in 1..=100 {
        m = m.propagate(1.0, f);
        taus.push(j as f64);
        amps.push(m.z().norm());
    }
    let tm = taus.iter().sum::<f64>() / taus.len() as f64;
    let am = amps.iter().sum::<f64>() / amps.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, a) in taus.iter().zip(&amps) {
        num += (t - tm) * (a - am);
        den += (t - tm) * (t - tm);
    }
    let slope = num / den;
    let expected = f.norm() / omega.sqrt();
    let rel = (slope - expected).abs() / expected;
    let secs = clock.elapsed().as_secs_f64();
    let pass = rel <= 0.01 && secs < 5.0;
    report(
        "04 secular growth rate",
        pass,
        &format!("slope = {slope:.6e}, predicted = {expected:.6e}, rel = {rel:.1e}, {secs:.1}s"),
    );
}

#[test]
fn criterion_05_forced_energy_inequality() {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h0 = 1.05;
    let v = [0.33];

    let mut modes = Vec::new();
    for k0 in (-6i64..=6).filter(|&k| k != 0) {
        let z0 = Complex64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        let p0 = Complex64::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        let f = Complex64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
        let g = Complex64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
        modes.push((ModeState::from_hat([k0, 0], h0, &v, z0, p0).unwrap(), f, g));
    }

    let e0: f64 = modes.iter().map(|(m, _, _)| m.energy()).sum::<f64>().sqrt();
    let fnorm: f64 = modes
        .iter()
        .map(|(m, f, g)| f.norm_sqr() + m.omega() * m.omega() * g.norm_sqr())
        .sum::<f64>()
        .sqrt();

    let mut min_slack = f64::INFINITY;
    let mut tau_max = 0.0f64;
    for i in 1..=100 {
        let tau = 0.3 * i as f64;
        tau_max = tau;
        let e: f64 = modes
            .iter()
            .map(|(m, f, g)| m.propagate_forced(tau, *f, *g).energy())
            .sum::<f64>()
            .sqrt();
        min_slack = min_slack.min(e0 + tau * fnorm - e);
    }
    let scale = e0 + tau_max * fnorm;
    let secs = clock.elapsed().as_secs_f64();
    let pass = min_slack >= -1e-12 * scale && secs < 5.0;
    report(
        "05 forced energy inequality",
        pass,
        &format!("min slack = {min_slack:.3e} over 100 times, scale = {scale:.2}, {secs:.1}s"),
    );
}

#[test]
fn criterion_06_shallow_water_solver() {
    let clock = Instant::now();
    let opts = SimOptions::default();

    // rest state stays at rest
    let grid = SlowGrid::new_1d(BOX, 64).unwrap();
    let rest = simulate(&SurfaceState::rest(&grid), 0.5, 1e-3, &opts).unwrap();
    let fin = rest.final_state();
    let rest_err = fin.zeta0.max_abs().max(fin.v0[0].max_abs());

    // mass is conserved on a localized bump
    let traj = simulate(&bump_surface(256), 1.0, 1e-3, &opts).unwrap();
    let mass_drift =
        (traj.diagnostics.last().unwrap().mass - traj.diagnostics[0].mass).abs();

    // small standing wave oscillates at speed √depth
    let mut speed_rel = 0.0f64;
    for depth in [1.0f64, 1.21] {
        let grid = SlowGrid::new_1d(BOX, 128).unwrap();
        let amp = 1e-8;
        let zeta =
            SlowField::from_fn(&grid, |x| (depth - 1.0) + amp * (x[0] / 2.0).cos()).unwrap();
        let state = SurfaceState::new(zeta, vec![SlowField::zeros(&grid)], None).unwrap();
        let z0 = state.zeta0.spectrum()[1];
        let run = simulate(&state, 1.0, 1e-3, &opts).unwrap();
        let z1 = run.final_state().zeta0.spectrum()[1];
        let ratio = (z1 / z0).re.clamp(-1.0, 1.0);
        let c_est = ratio.acos() / 0.5;
        speed_rel = speed_rel.max((c_est - depth.sqrt()).abs() / depth.sqrt());
    }

    // forward-backward round trip returns the initial data
    let s0 = bump_surface(256);
    let fwd = simulate(&s0, 1.0, 5e-4, &opts).unwrap();
    let back = simulate(&fwd.final_state().time_reversed(), 1.0, 5e-4, &opts).unwrap();
    let rt = back.final_state().time_reversed();
    let rev_err = rt
        .zeta0
        .add_scaled(&s0.zeta0, -1.0)
        .max_abs()
        .max(rt.v0[0].add_scaled(&s0.v0[0], -1.0).max_abs());

    let secs = clock.elapsed().as_secs_f64();
    let pass = rest_err <= 1e-14
        && mass_drift <= 1e-10
        && speed_rel <= 0.01
        && rev_err <= 1e-8
        && secs < 30.0;
    report(
        "06 shallow-water solver",
        pass,
        &format!(
            "rest = {rest_err:.1e}, mass drift = {mass_drift:.1e}, speed rel = {speed_rel:.1e}, round trip = {rev_err:.1e}, {secs:.1}s"
        ),
    );
}

#[test]
fn criterion_07_dn_oracle_soundness() {
    let clock = Instant::now();
    let b = BottomProfile::single_cosine();
    let mu = snap_mu(BOX, 0.04).0;

    // symmetry, positivity, and vanishing total flux of the discrete form
    let grid = SlowGrid::new_1d(BOX, 256).unwrap();
    let zeta = SlowField::from_fn(&grid, |x| 0.05 * gauss(x[0], BOX / 2.0, 1.2)).unwrap();
    let strip = StripProblem::build(&zeta, &b, mu, 32).unwrap();
    let pa = SlowField::from_fn(&grid, |x| 0.3 * (x[0] / 2.0).cos() - 0.1 * x[0].sin()).unwrap();
    let pb = SlowField::from_fn(&grid, |x| 0.2 * x[0].cos() + 0.15 * (1.5 * x[0]).sin()).unwrap();
    let ones = SlowField::constant(&grid, 1.0);
    let qaa = strip.dn_form(&pa, &pa).unwrap();
    let qbb = strip.dn_form(&pb, &pb).unwrap();
    let scale = qaa.abs().max(qbb.abs());
    let sym = strip.green_defect(&pa, &pb).unwrap();
    let total_flux = strip
        .dn_form(&pa, &ones)
        .unwrap()
        .abs()
        .max(strip.dn_form(&pb, &ones).unwrap().abs());
    let positivity = qaa.min(qbb);

    // flat strip reproduces the dispersion symbol on a single mode
    let fgrid = SlowGrid::new_1d(BOX, 256).unwrap();
    let flat = StripProblem::build(
        &SlowField::zeros(&fgrid),
        &BottomProfile::flat(1),
        mu,
        32,
    )
    .unwrap();
    let xi = 0.5;
    let psi = SlowField::from_fn(&fgrid, |x| (xi * x[0]).cos()).unwrap();
    let gpsi = flat.dn_apply(&psi).unwrap();
    let num: f64 = gpsi.values().iter().zip(psi.values()).map(|(a, c)| a * c).sum();
    let den: f64 = psi.values().iter().map(|v| v * v).sum();
    let sm = mu.sqrt() * xi;
    let symbol_rel = (num / den - sm * sm.tanh()).abs() / (sm * sm.tanh());

    // self-convergence on smooth periodic data over the corrugated bed
    let sizes = [(128usize, 16usize), (256, 32), (512, 64), (1024, 128)];
    let mut solutions = Vec::new();
    for (nx, nz) in sizes {
        let g = SlowGrid::new_1d(BOX, nx).unwrap();
        let z = SlowField::from_fn(&g, |x| 0.05 * gauss(x[0], BOX / 2.0, 1.2)).unwrap();
        let p = SlowField::from_fn(&g, |x| {
            0.3 * gauss(x[0], BOX / 2.0, 1.2) + 0.2 * (x[0] / 2.0).cos() - 0.1 * x[0].sin()
        })
        .unwrap();
        let sp = StripProblem::build(&z, &b, mu, nz).unwrap();
        solutions.push(sp.dn_apply(&p).unwrap());
    }
    let mut hs = Vec::new();
    let mut es = Vec::new();
    for w in 0..solutions.len() - 1 {
        let coarse = &solutions[w];
        let fine = &solutions[w + 1];
        let stride = fine.grid().n_points() / coarse.grid().n_points();
        let mut l2 = 0.0f64;
        for i in 0..coarse.grid().n_points() {
            let d = coarse.values()[i] - fine.values()[i * stride];
            l2 += d * d;
        }
        hs.push(1.0 / sizes[w].0 as f64);
        es.push((l2 * coarse.grid().dx()).sqrt());
    }
    let order = fit_loglog_slope(&hs, &es);

    let secs = clock.elapsed().as_secs_f64();
    let pass = sym <= 1e-8 * scale
        && total_flux <= 1e-8 * scale
        && positivity >= -1e-8 * scale
        && symbol_rel <= 1e-3
        && (1.8..=2.2).contains(&order)
        && secs < 60.0;
    report(
        "07 surface flux oracle soundness",
        pass,
        &format!(
            "symmetry = {sym:.1e}, total flux = {total_flux:.1e}, quad form min = {positivity:.3e}, symbol rel = {symbol_rel:.1e}, order = {order:.3}, {secs:.1}s"
        ),
    );
}

#[test]
fn criterion_08_effective_flux_remainder_scaling() {
    let clock = Instant::now();
    let surface = bump_surface(256);
    let b = BottomProfile::single_cosine();
    let guard = NonresonanceGuard::default_for(&surface).unwrap();
    let corr = corrector::stationary_field(&surface, &b, &guard, 9).unwrap();

    let mut mus = Vec::new();
    let mut errs = Vec::new();
    for mu_req in [0.04, 0.02, 0.01, 0.005] {
        let (mu, m) = snap_mu(BOX, mu_req);
        let ansatz = build_ansatz(&surface, &corr, mu).unwrap();
        let eff = g_eff(&surface, &corr, &b, mu.sqrt()).unwrap();

        let nx = (16 * m).max(surface.grid().n_points());
        let nx = nx + nx % 2;
        let zeta_fine = ansatz.zeta_a.resample(nx).unwrap();
        let psi_fine = ansatz.psi_a.resample(nx).unwrap();
        let eff_fine = eff.resample(nx).unwrap();
        let strip = StripProblem::build(&zeta_fine, &b, mu, 48).unwrap();
        let oracle = strip.dn_apply(&psi_fine).unwrap().scale(1.0 / mu);
        errs.push((&oracle - &eff_fine).l2_norm());
        mus.push(mu);
    }
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let slope = fit_loglog_slope(&mus, &errs);
    let secs = clock.elapsed().as_secs_f64();
    let pass = monotone && slope >= 0.30 && secs < 600.0;
    report(
        "08 effective flux remainder scaling",
        pass,
        &format!(
            "gaps = [{:.3e}, {:.3e}, {:.3e}, {:.3e}], slope = {slope:.3}, monotone = {monotone}, {secs:.1}s",
            errs[0], errs[1], errs[2], errs[3]
        ),
    );
}

#[test]
fn criterion_09_consistency_rates() {
    let clock = Instant::now();
    let surface = bump_surface(256);
    let b = BottomProfile::single_cosine();
    let guard = NonresonanceGuard::default_for(&surface).unwrap();
    let setup = ConsistencySetup::new(surface, b, guard, 9);
    let mu_list = [0.04, 0.02, 0.01, 0.005];

    let wavy = shom_core::residual::rate_study(&setup, &mu_list).unwrap();
    let flat = shom_core::residual::rate_study(&setup.flat_control(), &mu_list).unwrap();

    let secs = clock.elapsed().as_secs_f64();
    let flat_ok =
        (0.85..=1.15).contains(&flat.slope_e1) && (0.85..=1.15).contains(&flat.slope_e2);
    let pass = wavy.slope_e1 >= 0.30 && wavy.slope_e2 >= 0.60 && flat_ok && secs < 900.0;
    report(
        "09 consistency residual rates",
        pass,
        &format!(
            "e1 slope = {:.3}, e2 slope = {:.3}, flat control = ({:.3}, {:.3}), {secs:.1}s",
            wavy.slope_e1, wavy.slope_e2, flat.slope_e1, flat.slope_e2
        ),
    );
}

#[test]
fn criterion_10_resonance_scanner() {
    let clock = Instant::now();
    let b = BottomProfile::single_cosine();

    // supercritical uniform stream is certified clean
    let sgrid = SlowGrid::new_1d(BOX, 128).unwrap();
    let stream = SurfaceState::new(
        SlowField::zeros(&sgrid),
        vec![SlowField::constant(&sgrid, 1.2)],
        None,
    )
    .unwrap();
    let sguard = NonresonanceGuard::default_for(&stream).unwrap();
    let super_ok = resonance::certify(&stream, &b, &sguard).unwrap().certified();

    // localized subcritical jet is flagged exactly where |V0| crosses the
    // resonant speed √tanh(h0)
    let n = 256;
    let grid = SlowGrid::new_1d(BOX, n).unwrap();
    let dx = grid.dx();
    let vprof = |x: f64| gauss(x, BOX / 2.0, BOX / 6.0);
    let jet = SurfaceState::new(
        SlowField::zeros(&grid),
        vec![SlowField::from_fn(&grid, |x| vprof(x[0])).unwrap()],
        None,
    )
    .unwrap();
    let guard = NonresonanceGuard::new(0.03, 0.5).unwrap();
    let report_jet = resonance::certify(&jet, &b, &guard).unwrap();

    let target = |x: f64| 1.0f64.tanh() - vprof(x) * vprof(x);
    let bisect = |mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if target(lo) * target(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let roots = [bisect(0.0, BOX / 2.0), bisect(BOX / 2.0, BOX)];

    let mut all_near_root = !report_jet.flags.is_empty();
    let mut all_first_mode = true;
    for f in &report_jet.flags {
        let x = grid.point(f.slow_index)[0];
        let d = roots.iter().map(|r| (x - r).abs()).fold(f64::INFINITY, f64::min);
        all_near_root &= d <= dx * (1.0 + 1e-9);
        all_first_mode &= f.k[0].abs() == 1 && f.k[1] == 0;
    }
    let covered = roots.iter().all(|r| {
        report_jet
            .flags
            .iter()
            .any(|f| (grid.point(f.slow_index)[0] - r).abs() <= dx * (1.0 + 1e-9))
    });

    let secs = clock.elapsed().as_secs_f64();
    let pass = super_ok && all_near_root && all_first_mode && covered && secs < 5.0;
    report(
        "10 resonance scanner",
        pass,
        &format!(
            "supercritical clean = {super_ok}, flags = {}, within one cell = {all_near_root}, roots covered = {covered}, {secs:.1}s",
            report_jet.flags.len()
        ),
    );
}

#[test]
fn criterion_11_scale_separation_gap() {
    let clock = Instant::now();
    let c1 = Complex64::new(0.3, -0.2);
    let c2 = Complex64::new(0.0, 0.15);
    let g = TorusSpectrum::from_entries(
        1,
        2,
        &[([1, 0], c1), ([-1, 0], c1.conj()), ([2, 0], c2), ([-2, 0], c2.conj())],
    )
    .unwrap();
    let grid = SlowGrid::new_1d(BOX, 256).unwrap();
    let f = SlowField::from_fn(&grid, |x| 0.5 * gauss(x[0], BOX / 2.0, 1.2)).unwrap();

    let mut gammas = Vec::new();
    let mut gaps = Vec::new();
    for m in [2usize, 4, 8] {
        let gamma = BOX / (2.0 * PI * m as f64);
        gammas.push(gamma);
        gaps.push(oscillatory_average_gap(&g, &f, gamma));
    }
    let slope = fit_loglog_slope(&gammas, &gaps);
    let secs = clock.elapsed().as_secs_f64();
    let pass = slope >= 3.0 && secs < 5.0;
    report(
        "11 scale separation gap",
        pass,
        &format!(
            "gaps = [{:.3e}, {:.3e}, {:.3e}], halving slope = {slope:.2}, {secs:.1}s",
            gaps[0], gaps[1], gaps[2]
        ),
    );
}
