//! Run configuration: a line-oriented `key = value` schema with defaults,
//! load-time validation, and a canonical echo for reproducible runs.
//!
//! The format is plain UTF-8 text, one assignment per line; `#` starts a
//! comment and blank lines are skipped. Unknown or duplicate keys and
//! malformed values are rejected with the offending line number. An empty
//! document is valid and yields the defaults.
//!
//! Keys (with defaults):
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `dim` | 1 | horizontal dimension (1 or 2) |
//! | `box_length` | 4π | slow box side L |
//! | `slow_points` | 256 | slow grid points per axis (even) |
//! | `mu` | 0.01 | depth ratio μ = γ² for single-μ runs |
//! | `mu_list` | 0.04, 0.02, 0.01, 0.005 | sweep values (snapped per run) |
//! | `cutoff` | auto | fast cutoff; auto = bed modes + 8 |
//! | `bottom` | cos | flat, cos, two_mode, random_phase, or (k, re, im); ... |
//! | `bottom_kmax` | 4 | random_phase: largest mode |
//! | `bottom_amp` | 0.3 | random_phase: amplitude norm |
//! | `initial` | gaussian_bump | gaussian_bump, rest, or stream |
//! | `zeta_amp` | 0.1 | preset surface amplitude |
//! | `psi_amp` | 0.56 | preset potential amplitude |
//! | `bump_width` | 1.2 | preset bump width |
//! | `stream_velocity` | 1.2 | stream preset speed along x |
//! | `guard_delta` | 0.001 | resonance guard strength δ |
//! | `guard_hbar` | auto | guard decay depth h̄; auto = min depth / 2 |
//! | `dt` | auto | time step; auto = advective CFL limit |
//! | `cfl` | 0.4 | CFL number for the auto step |
//! | `t_end` | 1.0 | simulation end time |
//! | `snapshots` | 4 | interior snapshot count for `simulate` |
//! | `viscosity` | 0 | spectral hyperviscosity ν |
//! | `eval_time` | 0.1 | residual evaluation time t* |
//! | `dt_fd` | 0.001 | centered-difference half width for ∂t |
//! | `oracle_cells` | 16 | strip columns per bed cell |
//! | `oracle_nz` | 48 | strip rows |
//! | `slope_e1_min` | 0.3 | consistency gate on the E1 rate |
//! | `slope_e2_min` | 0.6 | consistency gate on the E2 rate |
//! | `corrector_tau` | 10 | fast-time horizon for `corrector` |
//! | `corrector_steps` | 200 | recorded steps over that horizon |
//! | `cell_sizes` | 16, 32, 64, 128 | cell-verify resolutions |
//! | `dump_strip` | false | dump the strip potential in `consistency` |
//! | `seed` | 0 | seed for randomized presets |
//! | `threads` | auto | worker threads; auto = all cores |

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::bathymetry::BottomProfile;
use crate::error::{Error, Result};
use crate::resonance::NonresonanceGuard;
use crate::shallow_water::{SimOptions, SurfaceState};
use crate::spectral::{SlowField, SlowGrid};

/// Bottom specification: a named preset or explicit spectral modes.
#[derive(Clone, Debug, PartialEq)]
pub enum BottomSpec {
    Flat,
    /// The unit-amplitude single cosine preset (`cos` in config files).
    SingleCosine,
    TwoMode,
    /// Random phases up to `bottom_kmax`, scaled to `bottom_amp`, seeded.
    RandomPhase,
    /// Explicit one-dimensional modes as (k, Re b̂ₖ, Im b̂ₖ); conjugates are
    /// implied.
    Modes(Vec<(i64, f64, f64)>),
}

/// Named initial slow states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialPreset {
    /// Centered Gaussian in ζ0 and ψ0, V0 = ∇ψ0.
    GaussianBump,
    /// ζ0 = 0, V0 = 0.
    Rest,
    /// Flat surface with a uniform current along the first axis (no ψ0).
    Stream,
}

/// A fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub box_length: f64,
    pub slow_points: usize,
    pub mu: f64,
    pub mu_list: Vec<f64>,
    pub cutoff: Option<usize>,
    pub bottom: BottomSpec,
    pub bottom_kmax: usize,
    pub bottom_amp: f64,
    pub initial: InitialPreset,
    pub zeta_amp: f64,
    pub psi_amp: f64,
    pub bump_width: f64,
    pub stream_velocity: f64,
    pub guard_delta: f64,
    pub guard_hbar: Option<f64>,
    pub dt: Option<f64>,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub viscosity: f64,
    pub eval_time: f64,
    pub dt_fd: f64,
    pub oracle_cells: usize,
    pub oracle_nz: usize,
    pub slope_e1_min: f64,
    pub slope_e2_min: f64,
    pub corrector_tau: f64,
    pub corrector_steps: usize,
    pub cell_sizes: Vec<usize>,
    pub dump_strip: bool,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            box_length: 4.0 * PI,
            slow_points: 256,
            mu: 0.01,
            mu_list: vec![0.04, 0.02, 0.01, 0.005],
            cutoff: None,
            bottom: BottomSpec::SingleCosine,
            bottom_kmax: 4,
            bottom_amp: 0.3,
            initial: InitialPreset::GaussianBump,
            zeta_amp: 0.1,
            psi_amp: 0.56,
            bump_width: 1.2,
            stream_velocity: 1.2,
            guard_delta: 1e-3,
            guard_hbar: None,
            dt: None,
            cfl: 0.4,
            t_end: 1.0,
            snapshots: 4,
            viscosity: 0.0,
            eval_time: 0.1,
            dt_fd: 1e-3,
            oracle_cells: 16,
            oracle_nz: 48,
            slope_e1_min: 0.30,
            slope_e2_min: 0.60,
            corrector_tau: 10.0,
            corrector_steps: 200,
            cell_sizes: vec![16, 32, 64, 128],
            dump_strip: false,
            seed: 0,
            threads: None,
        }
    }
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| bad(line, format!("key `{key}`: cannot parse `{value}` as a number")))
}

fn num_list<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<Vec<T>> {
    value.split(',').map(|part| num(part.trim(), line, key)).collect()
}

/// `auto` or a number.
fn auto_or<T: std::str::FromStr>(value: &str, line: usize, key: &str) -> Result<Option<T>> {
    if value == "auto" {
        Ok(None)
    } else {
        num(value, line, key).map(Some)
    }
}

fn parse_bool(value: &str, line: usize, key: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(bad(line, format!("key `{key}`: expected true or false, got `{value}`"))),
    }
}

fn parse_bottom(value: &str, line: usize) -> Result<BottomSpec> {
    match value {
        "flat" => return Ok(BottomSpec::Flat),
        "cos" | "single_cosine" => return Ok(BottomSpec::SingleCosine),
        "two_mode" => return Ok(BottomSpec::TwoMode),
        "random_phase" => return Ok(BottomSpec::RandomPhase),
        _ => {}
    }
    let mut modes = Vec::new();
    for part in value.split(';') {
        let part = part.trim();
        let inner = part
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(|| {
                bad(
                    line,
                    format!(
                        "key `bottom`: `{part}` is neither a preset \
                         (flat, cos, two_mode, random_phase) nor a (k, re, im) triple"
                    ),
                )
            })?;
        let fields: Vec<&str> = inner.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(bad(
                line,
                format!("key `bottom`: triple `{part}` needs exactly (k, re, im)"),
            ));
        }
        let k: i64 = num(fields[0], line, "bottom")?;
        if k == 0 {
            return Err(bad(line, "key `bottom`: the mean mode k = 0 is not a bed mode"));
        }
        let re: f64 = num(fields[1], line, "bottom")?;
        let im: f64 = num(fields[2], line, "bottom")?;
        modes.push((k, re, im));
    }
    Ok(BottomSpec::Modes(modes))
}

fn parse_initial(value: &str, line: usize) -> Result<InitialPreset> {
    match value {
        "gaussian_bump" => Ok(InitialPreset::GaussianBump),
        "rest" => Ok(InitialPreset::Rest),
        "stream" => Ok(InitialPreset::Stream),
        _ => Err(bad(
            line,
            format!("key `initial`: unknown preset `{value}` (gaussian_bump, rest, stream)"),
        )),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut lines: BTreeMap<&'static str, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = raw.split('#').next().unwrap().trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped
            .split_once('=')
            .ok_or_else(|| bad(line, format!("expected `key = value`, got `{stripped}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let canonical: &'static str = match key {
            "dim" => {
                cfg.dim = num(value, line, key)?;
                "dim"
            }
            "box_length" => {
                cfg.box_length = num(value, line, key)?;
                "box_length"
            }
            "slow_points" => {
                cfg.slow_points = num(value, line, key)?;
                "slow_points"
            }
            "mu" => {
                cfg.mu = num(value, line, key)?;
                "mu"
            }
            "mu_list" => {
                cfg.mu_list = num_list(value, line, key)?;
                "mu_list"
            }
            "cutoff" => {
                cfg.cutoff = auto_or(value, line, key)?;
                "cutoff"
            }
            "bottom" => {
                cfg.bottom = parse_bottom(value, line)?;
                "bottom"
            }
            "bottom_kmax" => {
                cfg.bottom_kmax = num(value, line, key)?;
                "bottom_kmax"
            }
            "bottom_amp" => {
                cfg.bottom_amp = num(value, line, key)?;
                "bottom_amp"
            }
            "initial" => {
                cfg.initial = parse_initial(value, line)?;
                "initial"
            }
            "zeta_amp" => {
                cfg.zeta_amp = num(value, line, key)?;
                "zeta_amp"
            }
            "psi_amp" => {
                cfg.psi_amp = num(value, line, key)?;
                "psi_amp"
            }
            "bump_width" => {
                cfg.bump_width = num(value, line, key)?;
                "bump_width"
            }
            "stream_velocity" => {
                cfg.stream_velocity = num(value, line, key)?;
                "stream_velocity"
            }
            "guard_delta" => {
                cfg.guard_delta = num(value, line, key)?;
                "guard_delta"
            }
            "guard_hbar" => {
                cfg.guard_hbar = auto_or(value, line, key)?;
                "guard_hbar"
            }
            "dt" => {
                cfg.dt = auto_or(value, line, key)?;
                "dt"
            }
            "cfl" => {
                cfg.cfl = num(value, line, key)?;
                "cfl"
            }
            "t_end" => {
                cfg.t_end = num(value, line, key)?;
                "t_end"
            }
            "snapshots" => {
                cfg.snapshots = num(value, line, key)?;
                "snapshots"
            }
            "viscosity" => {
                cfg.viscosity = num(value, line, key)?;
                "viscosity"
            }
            "eval_time" => {
                cfg.eval_time = num(value, line, key)?;
                "eval_time"
            }
            "dt_fd" => {
                cfg.dt_fd = num(value, line, key)?;
                "dt_fd"
            }
            "oracle_cells" => {
                cfg.oracle_cells = num(value, line, key)?;
                "oracle_cells"
            }
            "oracle_nz" => {
                cfg.oracle_nz = num(value, line, key)?;
                "oracle_nz"
            }
            "slope_e1_min" => {
                cfg.slope_e1_min = num(value, line, key)?;
                "slope_e1_min"
            }
            "slope_e2_min" => {
                cfg.slope_e2_min = num(value, line, key)?;
                "slope_e2_min"
            }
            "corrector_tau" => {
                cfg.corrector_tau = num(value, line, key)?;
                "corrector_tau"
            }
            "corrector_steps" => {
                cfg.corrector_steps = num(value, line, key)?;
                "corrector_steps"
            }
            "cell_sizes" => {
                cfg.cell_sizes = num_list(value, line, key)?;
                "cell_sizes"
            }
            "dump_strip" => {
                cfg.dump_strip = parse_bool(value, line, key)?;
                "dump_strip"
            }
            "seed" => {
                cfg.seed = num(value, line, key)?;
                "seed"
            }
            "threads" => {
                cfg.threads = auto_or(value, line, key)?;
                "threads"
            }
            _ => return Err(bad(line, format!("unknown key `{key}`"))),
        };
        if let Some(first) = lines.insert(canonical, line) {
            return Err(bad(line, format!("duplicate key `{key}` (first set at line {first})")));
        }
    }
    cfg.validate_at(&lines)?;
    Ok(cfg)
}

impl RunConfig {
    /// Re-checks every load-time constraint (positivity, ranges,
    /// commensurability, depth at t = 0). Call after mutating a parsed
    /// config, e.g. for a μ override.
    pub fn validate(&self) -> Result<()> {
        self.validate_at(&BTreeMap::new())
    }

    fn validate_at(&self, lines: &BTreeMap<&'static str, usize>) -> Result<()> {
        let at = |key: &str| lines.get(key).copied().unwrap_or(0);
        let positive = |v: f64, key: &'static str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(bad(at(key), format!("`{key}` must be positive and finite, got {v}")))
            }
        };

        if self.dim != 1 && self.dim != 2 {
            return Err(bad(at("dim"), format!("`dim` must be 1 or 2, got {}", self.dim)));
        }
        positive(self.box_length, "box_length")?;
        if self.slow_points < 8 || self.slow_points % 2 != 0 {
            return Err(bad(
                at("slow_points"),
                format!("`slow_points` must be even and at least 8, got {}", self.slow_points),
            ));
        }
        positive(self.mu, "mu")?;
        if self.mu_list.is_empty() {
            return Err(bad(at("mu_list"), "`mu_list` must not be empty"));
        }
        for &m in &self.mu_list {
            positive(m, "mu_list")?;
        }

        // Exact two-scale realization needs the fast period commensurate
        // with the box; sweep values are snapped instead (see the residual
        // pipeline), so only `mu` is held to it.
        let gamma = self.mu.sqrt();
        let count = self.box_length / (2.0 * PI * gamma);
        let rounded = count.round().max(1.0);
        if (count - rounded).abs() > 1e-9 * rounded {
            let suggested = (self.box_length / (2.0 * PI * rounded)).powi(2);
            return Err(bad(
                at("mu"),
                format!(
                    "commensurability: the box must hold a whole number of fast periods, \
                     but L / (2π√mu) = {count:.9}; nearest valid mu = {suggested:.12}"
                ),
            ));
        }

        if let Some(c) = self.cutoff {
            if c == 0 {
                return Err(bad(at("cutoff"), "`cutoff` must be at least 1"));
            }
        }
        if let BottomSpec::Modes(modes) = &self.bottom {
            if self.dim != 1 {
                return Err(bad(
                    at("bottom"),
                    "explicit (k, re, im) bed modes are one-dimensional; set dim = 1",
                ));
            }
            if modes.is_empty() {
                return Err(bad(at("bottom"), "`bottom` mode list must not be empty"));
            }
        }
        if matches!(
            self.bottom,
            BottomSpec::SingleCosine | BottomSpec::TwoMode | BottomSpec::RandomPhase
        ) && self.dim != 1
        {
            return Err(bad(
                at("bottom"),
                "bed presets cos, two_mode, and random_phase are one-dimensional; set dim = 1",
            ));
        }
        if self.bottom_kmax == 0 {
            return Err(bad(at("bottom_kmax"), "`bottom_kmax` must be at least 1"));
        }
        if !(self.bottom_amp >= 0.0 && self.bottom_amp.is_finite()) {
            return Err(bad(at("bottom_amp"), "`bottom_amp` must be a finite nonnegative number"));
        }

        positive(self.guard_delta, "guard_delta")?;
        if let Some(h) = self.guard_hbar {
            positive(h, "guard_hbar")?;
        }
        if let Some(dt) = self.dt {
            positive(dt, "dt")?;
        }
        positive(self.cfl, "cfl")?;
        if self.cfl > 1.0 {
            return Err(bad(at("cfl"), format!("`cfl` must be at most 1, got {}", self.cfl)));
        }
        positive(self.t_end, "t_end")?;
        if !(self.viscosity >= 0.0 && self.viscosity.is_finite()) {
            return Err(bad(at("viscosity"), "`viscosity` must be a finite nonnegative number"));
        }
        positive(self.eval_time, "eval_time")?;
        positive(self.dt_fd, "dt_fd")?;
        if self.dt_fd >= self.eval_time {
            return Err(bad(
                at("dt_fd"),
                format!(
                    "`dt_fd` = {} must be smaller than `eval_time` = {} for the centered \
                     difference to stay causal",
                    self.dt_fd, self.eval_time
                ),
            ));
        }
        if self.oracle_cells < 2 {
            return Err(bad(at("oracle_cells"), "`oracle_cells` must be at least 2"));
        }
        if self.oracle_nz < 8 {
            return Err(bad(at("oracle_nz"), "`oracle_nz` must be at least 8"));
        }
        positive(self.corrector_tau, "corrector_tau")?;
        if self.corrector_steps == 0 {
            return Err(bad(at("corrector_steps"), "`corrector_steps` must be at least 1"));
        }
        if self.cell_sizes.is_empty() {
            return Err(bad(at("cell_sizes"), "`cell_sizes` must not be empty"));
        }
        for &n in &self.cell_sizes {
            if n < 8 {
                return Err(bad(
                    at("cell_sizes"),
                    format!("`cell_sizes` entries must be at least 8, got {n}"),
                ));
            }
        }
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(bad(at("threads"), "`threads` must be at least 1 (or auto)"));
            }
        }

        // Depth positivity of the realized initial state, the remaining
        // load-time guarantee. Building the fields is cheap at load scale.
        let grid = self
            .grid()
            .map_err(|e| bad(at("slow_points"), format!("cannot build the slow grid: {e}")))?;
        let bottom = self
            .build_bottom()
            .map_err(|e| bad(at("bottom"), format!("cannot build the bed: {e}")))?;
        let surface = self
            .build_initial(&grid)
            .map_err(|e| bad(at("initial"), format!("cannot build the initial state: {e}")))?;
        let bed = bottom
            .realize_bottom(&grid, gamma)
            .map_err(|e| bad(at("bottom"), format!("cannot realize the bed: {e}")))?;
        let depth = surface.depth().add_scaled(&bed, -gamma);
        let (index, min) = (depth.argmin().0, depth.min_value());
        if min <= 0.0 {
            return Err(bad(
                at("zeta_amp"),
                format!(
                    "depth positivity: 1 + ζ0 − γ b reaches {min:.6} at grid index {index}; \
                     lower the amplitudes or the bed"
                ),
            ));
        }
        Ok(())
    }

    /// γ = √μ.
    pub fn gamma(&self) -> f64 {
        self.mu.sqrt()
    }

    pub fn grid(&self) -> Result<SlowGrid> {
        SlowGrid::new(self.dim, self.box_length, self.slow_points)
    }

    pub fn build_bottom(&self) -> Result<BottomProfile> {
        match &self.bottom {
            BottomSpec::Flat => Ok(BottomProfile::flat(self.dim)),
            BottomSpec::SingleCosine => Ok(BottomProfile::single_cosine()),
            BottomSpec::TwoMode => Ok(BottomProfile::two_mode()),
            BottomSpec::RandomPhase => {
                BottomProfile::random_phase(self.bottom_kmax, self.bottom_amp, self.seed)
            }
            BottomSpec::Modes(modes) => {
                let mut entries = Vec::with_capacity(2 * modes.len());
                for &(k, re, im) in modes {
                    let c = Complex64::new(re, im);
                    entries.push(([k, 0], c));
                    entries.push(([-k, 0], c.conj()));
                }
                BottomProfile::from_modes(1, &entries)
            }
        }
    }

    pub fn build_initial(&self, grid: &SlowGrid) -> Result<SurfaceState> {
        match self.initial {
            InitialPreset::Rest => Ok(SurfaceState::rest(grid)),
            InitialPreset::GaussianBump => {
                let l = grid.box_length();
                let dim = grid.dim();
                let w2 = self.bump_width * self.bump_width;
                let bump = move |x: &[f64; 2]| {
                    let mut r2 = 0.0;
                    for a in 0..dim {
                        r2 += (x[a] - 0.5 * l) * (x[a] - 0.5 * l);
                    }
                    (-r2 / w2).exp()
                };
                let zeta0 = SlowField::from_fn(grid, |x| self.zeta_amp * bump(x))?;
                let psi0 = SlowField::from_fn(grid, |x| self.psi_amp * bump(x))?;
                let v0 = psi0.grad();
                SurfaceState::new(zeta0, v0, Some(psi0))
            }
            InitialPreset::Stream => {
                let mut v0 = vec![SlowField::constant(grid, self.stream_velocity)];
                for _ in 1..grid.dim() {
                    v0.push(SlowField::zeros(grid));
                }
                SurfaceState::new(SlowField::zeros(grid), v0, None)
            }
        }
    }

    pub fn build_guard(&self, surface: &SurfaceState) -> Result<NonresonanceGuard> {
        match self.guard_hbar {
            Some(h) => NonresonanceGuard::new(self.guard_delta, h),
            None => NonresonanceGuard::for_surface(self.guard_delta, surface),
        }
    }

    /// Fast cutoff: the configured value, or enough room past the bed modes.
    pub fn effective_cutoff(&self, bottom: &BottomProfile) -> usize {
        self.cutoff.unwrap_or(bottom.positive_mode_count().max(1) + 8)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions { cfl: self.cfl, viscosity: self.viscosity, ..SimOptions::default() }
    }

    /// Canonical text form with every effective value; parses back to `self`.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let opt_f = |v: Option<f64>| v.map_or("auto".into(), |x| x.to_string());
        let opt_u = |v: Option<usize>| v.map_or("auto".into(), |x| x.to_string());
        let list_f =
            |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let list_u =
            |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
        let bottom = match &self.bottom {
            BottomSpec::Flat => "flat".into(),
            BottomSpec::SingleCosine => "cos".into(),
            BottomSpec::TwoMode => "two_mode".into(),
            BottomSpec::RandomPhase => "random_phase".into(),
            BottomSpec::Modes(modes) => modes
                .iter()
                .map(|(k, re, im)| format!("({k}, {re}, {im})"))
                .collect::<Vec<_>>()
                .join("; "),
        };
        let initial = match self.initial {
            InitialPreset::GaussianBump => "gaussian_bump",
            InitialPreset::Rest => "rest",
            InitialPreset::Stream => "stream",
        };
        let pairs: Vec<(&str, String)> = vec![
            ("dim", self.dim.to_string()),
            ("box_length", self.box_length.to_string()),
            ("slow_points", self.slow_points.to_string()),
            ("mu", self.mu.to_string()),
            ("mu_list", list_f(&self.mu_list)),
            ("cutoff", opt_u(self.cutoff)),
            ("bottom", bottom),
            ("bottom_kmax", self.bottom_kmax.to_string()),
            ("bottom_amp", self.bottom_amp.to_string()),
            ("initial", initial.into()),
            ("zeta_amp", self.zeta_amp.to_string()),
            ("psi_amp", self.psi_amp.to_string()),
            ("bump_width", self.bump_width.to_string()),
            ("stream_velocity", self.stream_velocity.to_string()),
            ("guard_delta", self.guard_delta.to_string()),
            ("guard_hbar", opt_f(self.guard_hbar)),
            ("dt", opt_f(self.dt)),
            ("cfl", self.cfl.to_string()),
            ("t_end", self.t_end.to_string()),
            ("snapshots", self.snapshots.to_string()),
            ("viscosity", self.viscosity.to_string()),
            ("eval_time", self.eval_time.to_string()),
            ("dt_fd", self.dt_fd.to_string()),
            ("oracle_cells", self.oracle_cells.to_string()),
            ("oracle_nz", self.oracle_nz.to_string()),
            ("slope_e1_min", self.slope_e1_min.to_string()),
            ("slope_e2_min", self.slope_e2_min.to_string()),
            ("corrector_tau", self.corrector_tau.to_string()),
            ("corrector_steps", self.corrector_steps.to_string()),
            ("cell_sizes", list_u(&self.cell_sizes)),
            ("dump_strip", self.dump_strip.to_string()),
            ("seed", self.seed.to_string()),
            ("threads", opt_u(self.threads)),
        ];
        for (k, v) in pairs {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }
}
