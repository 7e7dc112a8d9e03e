//! Command-line driver: loads a run configuration, dispatches to the
//! library, and writes deterministic CSV / binary artifacts plus a
//! `key = value` summary into the output directory.
//!
//! Exit codes: 0 success, 1 generic failure, 2 bad configuration,
//! 3 resonance guard violation, 4 depth positivity loss, 5 solver failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use shom_core::bathymetry::BottomProfile;
use shom_core::cell_problem;
use shom_core::config::{parse_config, RunConfig};
use shom_core::corrector::{self, CorrectorState};
use shom_core::effective_dn;
use shom_core::elliptic_oracle::StripProblem;
use shom_core::io;
use shom_core::par;
use shom_core::resonance;
use shom_core::residual::{self, ConsistencySetup};
use shom_core::shallow_water::{self, SurfaceState};
use shom_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "shom",
    version,
    about = "Long waves over a rapidly varying periodic bed: simulation and verification"
)]
struct Cli {
    /// Configuration file (key = value lines); defaults apply when omitted.
    #[arg(long, value_name = "PATH", global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads; overrides SHOM_THREADS and the config key.
    #[arg(long, value_name = "N", global = true)]
    threads: Option<usize>,

    /// Replaces both `mu` and the sweep list with one value.
    #[arg(long = "mu-override", value_name = "MU", global = true)]
    mu_override: Option<f64>,

    /// Replaces the config seed.
    #[arg(long, value_name = "SEED", global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Integrate the effective shallow-water system and dump snapshots.
    Simulate,
    /// Evolve the fast corrector from rest, recording mode amplitudes in τ.
    Corrector,
    /// Compute the stationary corrector and the realized two-scale fields.
    Stationary,
    /// Certify nonresonance; report margins per slow point and bed mode.
    ResonanceScan,
    /// Compare the closed-form cell solution against the grid oracle.
    CellVerify,
    /// Run the residual sweep over mu_list and fit the decay rates.
    Consistency,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Simulate => "simulate",
            Cmd::Corrector => "corrector",
            Cmd::Stationary => "stationary",
            Cmd::ResonanceScan => "resonance-scan",
            Cmd::CellVerify => "cell-verify",
            Cmd::Consistency => "consistency",
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        Error::Resonance { .. } => 3,
        Error::Depth { .. } => 4,
        Error::Solver(_) | Error::Cfl { .. } => 5,
        _ => 1,
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

type Pairs = Vec<(&'static str, String)>;

fn run(cli: &Cli) -> Result<()> {
    let text = match &cli.config {
        Some(p) => fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(mu) = cli.mu_override {
        cfg.mu = mu;
        cfg.mu_list = vec![mu];
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.mu_override.is_some() || cli.seed.is_some() {
        cfg.validate()?;
    }

    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var("SHOM_THREADS") {
            Ok(s) => Some(s.trim().parse().map_err(|_| {
                Error::State(format!("SHOM_THREADS must be a positive integer, got `{s}`"))
            })?),
            Err(_) => cfg.threads,
        },
    };
    let active = par::configure_threads(threads);

    fs::create_dir_all(&cli.out)?;
    io::write_text(&cli.out.join("config.txt"), &cfg.echo())?;

    let (pairs, gate) = match cli.cmd {
        Cmd::Simulate => cmd_simulate(&cfg, &cli.out)?,
        Cmd::Corrector => cmd_corrector(&cfg, &cli.out)?,
        Cmd::Stationary => cmd_stationary(&cfg, &cli.out)?,
        Cmd::ResonanceScan => cmd_resonance_scan(&cfg, &cli.out)?,
        Cmd::CellVerify => cmd_cell_verify(&cfg, &cli.out)?,
        Cmd::Consistency => cmd_consistency(&cfg, &cli.out)?,
    };

    let mut summary: Pairs = vec![
        ("command", cli.cmd.name().to_string()),
        ("threads", active.to_string()),
        ("seed", cfg.seed.to_string()),
    ];
    summary.extend(pairs);
    io::write_summary(&cli.out.join("summary.txt"), &summary)?;
    match gate {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Slow point with the fastest current, the natural probe location.
fn rep_point(surface: &SurfaceState) -> usize {
    let n = surface.grid().total_points();
    let mut best = (0, -1.0);
    for i in 0..n {
        let speed2: f64 = surface.v0.iter().map(|v| v.values()[i] * v.values()[i]).sum();
        if speed2 > best.1 {
            best = (i, speed2);
        }
    }
    best.0
}

fn velocity_at(surface: &SurfaceState, idx: usize) -> Vec<f64> {
    surface.v0.iter().map(|v| v.values()[idx]).collect()
}

fn k_label(k: &[i64; 2], dim: usize) -> String {
    if dim == 1 {
        format!("{}", k[0])
    } else {
        format!("{}_{}", k[0], k[1])
    }
}

/// Bed modes worth a CSV column: the certifier's checked set, capped.
fn report_modes(bottom: &BottomProfile) -> Vec<[i64; 2]> {
    let mut ks = resonance::checked_modes(bottom);
    ks.truncate(8);
    ks
}

fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<(Pairs, Option<Error>)> {
    let grid = cfg.grid()?;
    let state0 = cfg.build_initial(&grid)?;
    let mut opts = cfg.sim_options();
    opts.snapshot_times = (1..cfg.snapshots.max(1))
        .map(|i| cfg.t_end * i as f64 / cfg.snapshots as f64)
        .collect();
    let dt = cfg.dt.unwrap_or_else(|| shallow_water::cfl_limit(&state0, &opts));

    let traj = shallow_water::simulate(&state0, cfg.t_end, dt, &opts)?;

    let rows: Vec<Vec<f64>> = traj
        .diagnostics
        .iter()
        .map(|d| vec![d.time, d.mass, d.energy, d.min_depth, d.max_grad_v])
        .collect();
    io::write_csv(
        &out.join("diagnostics.csv"),
        &["t", "mass", "energy", "min_depth", "max_grad_v"],
        &rows,
    )?;

    let mut snap_rows = Vec::new();
    for (i, (t, s)) in traj.states.iter().enumerate() {
        snap_rows.push(vec![i as f64, *t]);
        io::write_field_binary(&out.join(format!("snap{i:03}_zeta.bin")), &s.zeta0)?;
        for (a, v) in s.v0.iter().enumerate() {
            io::write_field_binary(&out.join(format!("snap{i:03}_v{a}.bin")), v)?;
        }
        if let Some(p) = &s.psi0 {
            io::write_field_binary(&out.join(format!("snap{i:03}_psi.bin")), p)?;
        }
    }
    io::write_csv(&out.join("snapshots.csv"), &["index", "t"], &snap_rows)?;

    let first = traj.diagnostics.first().expect("diagnostics never empty");
    let last = traj.diagnostics.last().expect("diagnostics never empty");
    let min_depth = traj.diagnostics.iter().map(|d| d.min_depth).fold(f64::INFINITY, f64::min);
    let mut pairs: Pairs = vec![
        ("final_time", traj.final_time().to_string()),
        ("steps", (traj.diagnostics.len() - 1).to_string()),
        ("snapshots", traj.states.len().to_string()),
        ("mass_drift", (last.mass - first.mass).abs().to_string()),
        ("energy_drift", (last.energy - first.energy).abs().to_string()),
        ("min_depth", min_depth.to_string()),
    ];
    if let Some(term) = &traj.terminated {
        pairs.push(("terminated_at", term.time.to_string()));
        pairs.push(("terminated_max_grad_v", term.max_grad_v.to_string()));
    }
    Ok((pairs, None))
}

fn cmd_corrector(cfg: &RunConfig, out: &Path) -> Result<(Pairs, Option<Error>)> {
    let grid = cfg.grid()?;
    let surface = cfg.build_initial(&grid)?;
    let bottom = cfg.build_bottom()?;
    let cutoff = cfg.effective_cutoff(&bottom);
    let rep = rep_point(&surface);
    let v_rep = velocity_at(&surface, rep);
    let h_rep = 1.0 + surface.zeta0.values()[rep];

    // columns: modes the bed actually forces at the probe point; fall back
    // to the full checked set when the current vanishes
    let forcing = corrector::forcing_spectrum(h_rep, &v_rep, &bottom, cutoff)?;
    let mut ks: Vec<[i64; 2]> = report_modes(&bottom)
        .into_iter()
        .filter(|k| forcing.coeff(k).norm() > 1e-13)
        .collect();
    if ks.is_empty() {
        ks = report_modes(&bottom);
    }

    let labels: Vec<String> = ks
        .iter()
        .flat_map(|k| {
            let l = k_label(k, grid.dim());
            [format!("zeta_k{l}"), format!("psi_k{l}")]
        })
        .collect();
    let mut header: Vec<&str> = vec!["tau"];
    header.extend(labels.iter().map(String::as_str));

    let mut state = CorrectorState::zero(&surface, cutoff);
    let dtau = cfg.corrector_tau / cfg.corrector_steps as f64;
    let mut rows = Vec::with_capacity(cfg.corrector_steps + 1);
    let record = |state: &CorrectorState, tau: f64, rows: &mut Vec<Vec<f64>>| {
        let mut row = vec![tau];
        for k in &ks {
            row.push(state.zeta1().at(rep).coeff(k).norm());
            row.push(state.psi1().at(rep).coeff(k).norm());
        }
        rows.push(row);
    };
    record(&state, 0.0, &mut rows);
    for s in 1..=cfg.corrector_steps {
        state = corrector::evolve(&state, &surface, &bottom, dtau, 1)?;
        record(&state, s as f64 * dtau, &mut rows);
    }
    io::write_csv(&out.join("modes.csv"), &header, &rows)?;

    let (z1, p1) = state.realize(cfg.gamma())?;
    io::write_field_binary(&out.join("zeta1.bin"), &z1)?;
    io::write_field_binary(&out.join("psi1.bin"), &p1)?;

    let energy = corrector::max_energy_norm(&state, &surface, 0.0)?;
    let x = grid.point(rep);
    let pairs: Pairs = vec![
        ("tau_end", cfg.corrector_tau.to_string()),
        ("probe_index", rep.to_string()),
        ("probe_x", x[0].to_string()),
        ("modes", ks.iter().map(|k| k_label(k, grid.dim())).collect::<Vec<_>>().join(" ")),
        ("max_energy_norm", energy.to_string()),
    ];
    Ok((pairs, None))
}

fn cmd_stationary(cfg: &RunConfig, out: &Path) -> Result<(Pairs, Option<Error>)> {
    let grid = cfg.grid()?;
    let surface = cfg.build_initial(&grid)?;
    let bottom = cfg.build_bottom()?;
    let cutoff = cfg.effective_cutoff(&bottom);
    let guard = cfg.build_guard(&surface)?;

    let corr = corrector::stationary_field(&surface, &bottom, &guard, cutoff)?;
    let (z1, p1) = corr.realize(cfg.gamma())?;
    io::write_field_binary(&out.join("zeta1.bin"), &z1)?;
    io::write_field_binary(&out.join("psi1.bin"), &p1)?;

    let ks = report_modes(&bottom);
    let dim = grid.dim();
    let labels: Vec<String> = ks
        .iter()
        .flat_map(|k| {
            let l = k_label(k, dim);
            [format!("zeta_k{l}"), format!("psi_k{l}")]
        })
        .collect();
    let mut header: Vec<&str> = ["x0", "x1"][..dim].to_vec();
    header.extend(labels.iter().map(String::as_str));
    let mut rows = Vec::with_capacity(grid.total_points());
    for i in 0..grid.total_points() {
        let x = grid.point(i);
        let mut row: Vec<f64> = x[..dim].to_vec();
        for k in &ks {
            row.push(corr.zeta1().at(i).coeff(k).norm());
            row.push(corr.psi1().at(i).coeff(k).norm());
        }
        rows.push(row);
    }
    io::write_csv(&out.join("modes.csv"), &header, &rows)?;

    let mut pairs: Pairs = vec![
        ("certified", "true".to_string()),
        ("max_energy_norm", corrector::max_energy_norm(&corr, &surface, 0.0)?.to_string()),
    ];
    if surface.psi0.is_some() {
        let ansatz = effective_dn::build_ansatz(&surface, &corr, cfg.mu)?;
        io::write_field_binary(&out.join("zeta_a.bin"), &ansatz.zeta_a)?;
        io::write_field_binary(&out.join("psi_a.bin"), &ansatz.psi_a)?;
        let geff = effective_dn::g_eff(&surface, &corr, &bottom, cfg.gamma())?;
        io::write_field_binary(&out.join("g_eff.bin"), &geff)?;
        pairs.push(("ansatz_fields", "zeta_a.bin psi_a.bin g_eff.bin".to_string()));
    }
    Ok((pairs, None))
}

fn cmd_resonance_scan(cfg: &RunConfig, out: &Path) -> Result<(Pairs, Option<Error>)> {
    let grid = cfg.grid()?;
    let surface = cfg.build_initial(&grid)?;
    let bottom = cfg.build_bottom()?;
    let guard = cfg.build_guard(&surface)?;

    let report = resonance::certify(&surface, &bottom, &guard)?;
    let ks = resonance::checked_modes(&bottom);
    let dim = grid.dim();

    let mut header: Vec<&str> = ["x0", "x1"][..dim].to_vec();
    header.extend(["k0", "k1"][..dim].iter());
    header.push("margin");
    header.push("threshold");
    let mut rows = Vec::with_capacity(grid.total_points() * ks.len());
    for i in 0..grid.total_points() {
        let x = grid.point(i);
        let h0 = 1.0 + surface.zeta0.values()[i];
        let v = velocity_at(&surface, i);
        for k in &ks {
            let mut row: Vec<f64> = x[..dim].to_vec();
            row.extend(k[..dim].iter().map(|&c| c as f64));
            row.push(resonance::margin(h0, &v, k));
            row.push(guard.threshold(k));
            rows.push(row);
        }
    }
    io::write_csv(&out.join("scan.csv"), &header, &rows)?;

    let mut flag_rows = Vec::with_capacity(report.flags.len());
    for f in &report.flags {
        let x = grid.point(f.slow_index);
        let mut row: Vec<f64> = x[..dim].to_vec();
        row.extend(f.k[..dim].iter().map(|&c| c as f64));
        row.push(f.margin);
        row.push(f.threshold);
        flag_rows.push(row);
    }
    io::write_csv(&out.join("flags.csv"), &header, &flag_rows)?;

    io::write_field_binary(&out.join("froude.bin"), &report.froude_sq)?;
    io::write_field_csv(&out.join("froude.csv"), &[("froude_sq", &report.froude_sq)])?;

    let mut pairs: Pairs = vec![
        ("certified", report.certified().to_string()),
        ("flags", report.flags.len().to_string()),
        ("checked_modes", report.checked_modes.to_string()),
    ];
    if let Some((lo, hi)) = report.window {
        pairs.push(("resonant_froude_sq_window", format!("{lo} {hi}")));
    }
    Ok((pairs, None))
}

fn cmd_cell_verify(cfg: &RunConfig, out: &Path) -> Result<(Pairs, Option<Error>)> {
    let grid = cfg.grid()?;
    let surface = cfg.build_initial(&grid)?;
    let bottom = cfg.build_bottom()?;
    if bottom.is_flat() {
        return Err(Error::State(
            "cell verification needs a varying bed; pick a nonflat `bottom`".into(),
        ));
    }
    let guard = cfg.build_guard(&surface)?;
    let rep = rep_point(&surface);
    let v_rep = velocity_at(&surface, rep);
    if v_rep.iter().all(|&v| v == 0.0) {
        return Err(Error::State(
            "cell verification needs a moving preset; `rest` forces nothing".into(),
        ));
    }
    let h_rep = 1.0 + surface.zeta0.values()[rep];
    let (_, psi1) = corrector::stationary(h_rep, &v_rep, &bottom, &guard)?;

    let mut rows = Vec::with_capacity(cfg.cell_sizes.len());
    for &n in &cfg.cell_sizes {
        let oracle = cell_problem::oracle_cell_solve(h_rep, &psi1, &bottom, &v_rep, n, n)?;
        let reference = cell_problem::closed_form_on_grid(h_rep, &psi1, &bottom, &v_rep, n, n)?;
        rows.push(vec![n as f64, n as f64, oracle.relative_l2_diff(&reference)]);
    }
    io::write_csv(&out.join("cell.csv"), &["Ny", "Nz", "relative_error"], &rows)?;

    let orders: Vec<String> = rows
        .windows(2)
        .map(|w| {
            let rate = (w[0][2] / w[1][2]).ln() / (w[1][0] / w[0][0]).ln();
            format!("{rate:.3}")
        })
        .collect();
    let pairs: Pairs = vec![
        ("probe_index", rep.to_string()),
        ("depth", h_rep.to_string()),
        ("final_error", rows.last().expect("nonempty by validation")[2].to_string()),
        ("observed_orders", orders.join(" ")),
    ];
    Ok((pairs, None))
}

fn cmd_consistency(cfg: &RunConfig, out: &Path) -> Result<(Pairs, Option<Error>)> {
    let grid = cfg.grid()?;
    let surface = cfg.build_initial(&grid)?;
    let bottom = cfg.build_bottom()?;
    let cutoff = cfg.effective_cutoff(&bottom);
    let guard = cfg.build_guard(&surface)?;

    let mut setup = ConsistencySetup::new(surface, bottom, guard, cutoff);
    setup.eval_time = cfg.eval_time;
    setup.dt_fd = cfg.dt_fd;
    setup.oracle_cells_per_cell = cfg.oracle_cells;
    setup.oracle_nz = cfg.oracle_nz;
    setup.sim_dt = cfg.dt.unwrap_or(setup.sim_dt);
    setup.sim = cfg.sim_options();

    let study = residual::rate_study(&setup, &cfg.mu_list)?;
    let rows: Vec<Vec<f64>> =
        study.records.iter().map(|r| vec![r.mu, r.e1, r.e2, r.h_star]).collect();
    io::write_csv(&out.join("consistency.csv"), &["mu", "e1_l2", "e2_h12", "hstar"], &rows)?;

    if cfg.dump_strip {
        let (mu_eff, m) = residual::snap_mu(cfg.box_length, cfg.mu);
        let corr =
            corrector::stationary_field(&setup.surface0, &setup.bottom, &setup.guard, cutoff)?;
        let ansatz = effective_dn::build_ansatz(&setup.surface0, &corr, mu_eff)?;
        let mut nx = (cfg.oracle_cells * m).max(grid.n_points());
        nx += nx % 2;
        let zeta = ansatz.zeta_a.resample(nx)?;
        let psi = ansatz.psi_a.resample(nx)?;
        let strip = StripProblem::build(&zeta, &setup.bottom, mu_eff, cfg.oracle_nz)?;
        let phi = strip.solve_potential(&psi)?;
        io::write_binary(&out.join("strip_phi.bin"), &[nx, cfg.oracle_nz + 1], &phi.values)?;
    }

    let cells: Vec<String> = study.records.iter().map(|r| r.m.to_string()).collect();
    let pass = study.slope_e1 >= cfg.slope_e1_min && study.slope_e2 >= cfg.slope_e2_min;
    let pairs: Pairs = vec![
        ("slope_e1", study.slope_e1.to_string()),
        ("slope_e2", study.slope_e2.to_string()),
        ("slope_e1_min", cfg.slope_e1_min.to_string()),
        ("slope_e2_min", cfg.slope_e2_min.to_string()),
        ("bed_cells", cells.join(" ")),
        ("pass", pass.to_string()),
    ];
    let gate = if pass {
        None
    } else {
        Some(Error::State(format!(
            "consistency rates below thresholds: e1 slope {:.4} (needs {}), e2 slope {:.4} (needs {})",
            study.slope_e1, cfg.slope_e1_min, study.slope_e2, cfg.slope_e2_min
        )))
    };
    Ok((pairs, gate))
}
