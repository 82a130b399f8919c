//! Command-line surface: `ground-state`, `classify`, `evolve`, `sweep` and
//! `self-test`. Settings come from flags, then a flat TOML file given by
//! `--config`, then defaults.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Deserialize;

use crate::classify::{self, ClassifierVerdict};
use crate::corpus;
use crate::error::{LabError, Result};
use crate::evolve::{self, EvolveConfig, Monitors, TrajectoryRecord, DEFAULT_VIRIAL_RADII};
use crate::functionals::scale_h1inv;
use crate::grid::{RadialField, RadialGrid};
use crate::groundstate::{self, build_bundle, ground_shape, GroundStateBundle, DEFAULT_N, DEFAULT_RMAX};
use crate::io::{fmt_f64, schema_line, write_field};
use crate::params::PhysParams;
use crate::profile::Profile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
/// Usage errors and inadmissible `(d, a)`.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_CONSERVATION: i32 = 4;

pub const SWEEP_HEADER: &str = "family,d,a,c,s,region,energy_margin,kinetic_margin,e_a,kinetic_sq,termination,t_final,t_star,steps,rejected_steps,mass_drift,e_a_drift,kinetic_max,local_crit_max,error";

#[derive(Debug, Parser)]
#[command(name = "cnls", version, about = "Radial combined NLS with inverse-square potential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground state W_a, its norms and the Pohozaev check
    GroundState(Opts),
    /// Energy-region verdict for one datum
    Classify(Opts),
    /// Time evolution of one datum
    Evolve(Opts),
    /// Classification and evolution over a grid of (a, c, s)
    Sweep(Opts),
    /// Quick numerical checks of the core identities
    SelfTest(Opts),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// flat TOML file of settings; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<u32>,
    /// potential strength; a comma list for `sweep`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a: Vec<f64>,
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tend: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// scaled_ground, gaussian or bump
    #[arg(long)]
    pub family: Option<String>,
    /// amplitude; a comma list for `sweep`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub c: Vec<f64>,
    /// concentration `s` in `s^{(d-2)/2} f(s r)`; a comma list for `sweep`
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<f64>,
    /// smooth cutoff radii `r_in,r_out`
    #[arg(long, value_delimiter = ',')]
    pub window: Vec<f64>,
    /// none, all, or a comma list of virial and modulation
    #[arg(long)]
    pub monitors: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    #[arg(long)]
    pub sponge: bool,
    #[arg(long)]
    pub kinetic_factor: Option<f64>,
    #[arg(long)]
    pub core_fraction: Option<f64>,
    #[arg(long)]
    pub conservation_tol: Option<f64>,
    /// output directory; without it the main CSV goes to stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Keys of the `--config` file, one per flag.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    d: Option<u32>,
    a: Option<OneOrMany>,
    rmax: Option<f64>,
    n: Option<usize>,
    dt: Option<f64>,
    tend: Option<f64>,
    stride: Option<usize>,
    family: Option<String>,
    c: Option<OneOrMany>,
    s: Option<OneOrMany>,
    window: Option<Vec<f64>>,
    monitors: Option<String>,
    radii: Option<Vec<f64>>,
    sponge: Option<bool>,
    kinetic_factor: Option<f64>,
    core_fraction: Option<f64>,
    conservation_tol: Option<f64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    ScaledGround,
    Gaussian,
    Bump,
}

impl std::str::FromStr for Family {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scaled_ground" => Ok(Family::ScaledGround),
            "gaussian" => Ok(Family::Gaussian),
            "bump" => Ok(Family::Bump),
            _ => Err(LabError::Config(format!("unknown family `{s}` (scaled_ground, gaussian, bump)"))),
        }
    }
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::ScaledGround => "scaled_ground",
            Family::Gaussian => "gaussian",
            Family::Bump => "bump",
        }
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub d: u32,
    pub a: Vec<f64>,
    pub r_max: f64,
    pub n: usize,
    pub family: Family,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub window: Option<(f64, f64)>,
    pub evolve: EvolveConfig,
    pub monitors: Monitors,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub seed: u64,
}

fn nonempty(v: &[f64]) -> Option<Vec<f64>> {
    (!v.is_empty()).then(|| v.to_vec())
}

fn parse_monitors(spec: &str, radii: Vec<f64>) -> Result<Monitors> {
    let mut m = Monitors::none();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "none" => {}
            "all" => {
                m.virial_radii = radii.clone();
                m.modulation = true;
            }
            "virial" => m.virial_radii = radii.clone(),
            "modulation" => m.modulation = true,
            _ => return Err(LabError::Config(format!("unknown monitor `{item}` (none, all, virial, modulation)"))),
        }
    }
    Ok(m)
}

impl Settings {
    pub fn resolve(o: &Opts) -> Result<Self> {
        let file = match &o.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let list = |flag: &[f64], key: Option<OneOrMany>, default: f64| {
            nonempty(flag).or(key.map(OneOrMany::into_vec)).unwrap_or_else(|| vec![default])
        };
        let family = o.family.clone().or(file.family).unwrap_or_else(|| "scaled_ground".into()).parse()?;
        let window = match nonempty(&o.window).or(file.window) {
            None => None,
            Some(w) if w.len() == 2 && w[0] >= 0.0 && w[1] > w[0] => Some((w[0], w[1])),
            Some(w) => return Err(LabError::Config(format!("window needs 0 <= r_in < r_out, got {w:?}"))),
        };
        let defaults = EvolveConfig::default();
        let evolve = EvolveConfig {
            dt: o.dt.or(file.dt).unwrap_or(defaults.dt),
            t_end: o.tend.or(file.tend).unwrap_or(defaults.t_end),
            snapshot_stride: o.stride.or(file.stride).unwrap_or(defaults.snapshot_stride),
            blowup_kinetic_factor: o.kinetic_factor.or(file.kinetic_factor).unwrap_or(defaults.blowup_kinetic_factor),
            blowup_core_fraction: o.core_fraction.or(file.core_fraction).unwrap_or(defaults.blowup_core_fraction),
            conservation_tol: o.conservation_tol.or(file.conservation_tol).unwrap_or(defaults.conservation_tol),
            sponge: o.sponge || file.sponge.unwrap_or(false),
        };
        let radii = nonempty(&o.radii).or(file.radii).unwrap_or_else(|| DEFAULT_VIRIAL_RADII.to_vec());
        let monitors = parse_monitors(o.monitors.as_deref().or(file.monitors.as_deref()).unwrap_or("none"), radii)?;
        let workers = o
            .workers
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        if workers == 0 {
            return Err(LabError::Config("workers must be at least 1".into()));
        }
        Ok(Self {
            d: o.d.or(file.d).unwrap_or(3),
            a: list(&o.a, file.a, 0.0),
            r_max: o.rmax.or(file.rmax).unwrap_or(DEFAULT_RMAX),
            n: o.n.or(file.n).unwrap_or(DEFAULT_N),
            family,
            c: list(&o.c, file.c, 1.0),
            s: list(&o.s, file.s, 1.0),
            window,
            evolve,
            monitors,
            out: o.out.clone().or(file.out),
            workers,
            seed: o.seed.or(file.seed).unwrap_or(0),
        })
    }

    fn single(&self, name: &str, v: &[f64]) -> Result<f64> {
        match v {
            [x] => Ok(*x),
            _ => Err(LabError::Config(format!("--{name} takes one value here, got {}", v.len()))),
        }
    }

    fn params(&self) -> Result<PhysParams> {
        PhysParams::new(self.d, self.single("a", &self.a)?)
    }

    fn grid(&self) -> Result<Arc<RadialGrid>> {
        RadialGrid::new(self.d, self.r_max, self.n)
    }

    /// Cutoff used for runs: the explicit one, else `[0.5, 0.8] r_max`.
    fn run_window(&self) -> (f64, f64) {
        self.window.unwrap_or((0.5 * self.r_max, 0.8 * self.r_max))
    }
}

/// `s^{(d-2)/2} c f(s r)` for the family's unit profile `f`, cut off by
/// `window` if given.
pub fn datum(
    p: &PhysParams,
    grid: &Arc<RadialGrid>,
    family: Family,
    c: f64,
    s: f64,
    window: Option<(f64, f64)>,
) -> Result<RadialField> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(LabError::Config(format!("s must be positive, got {s}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let base = match family {
        Family::ScaledGround => Profile::new(ground_shape(p)),
        Family::Gaussian => corpus::gaussian(1.0, one),
        Family::Bump => corpus::bump(1.0, one),
    };
    let u = scale_h1inv(&RadialField::from_profile(grid, base.times(one * c)), s);
    Ok(match window {
        Some((r_in, r_out)) => evolve::windowed_at(&u, r_in, r_out),
        None => u,
    })
}

fn exit_for(e: &LabError) -> i32 {
    match e {
        LabError::InvalidDimension(_) | LabError::BelowHardy { .. } | LabError::Config(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Writes a CSV with its schema line to `dir/file`, or to `stdout` when no
/// directory is set.
fn write_csv(dir: Option<&Path>, stdout: &mut dyn Write, file: &str, kind: &str, header: &str, rows: &[String]) -> Result<()> {
    let mut body = format!("{}\n{header}\n", schema_line(kind));
    for r in rows {
        body.push_str(r);
        body.push('\n');
    }
    match dir {
        Some(d) => fs::write(d.join(file), body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn out_dir(s: &Settings) -> Result<Option<&Path>> {
    if let Some(d) = &s.out {
        fs::create_dir_all(d)?;
    }
    Ok(s.out.as_deref())
}

fn bundle_for(p: &PhysParams, grid: &Arc<RadialGrid>) -> Result<GroundStateBundle> {
    build_bundle(p, grid)
}

pub fn cmd_ground_state(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let p = s.params()?;
    let grid = s.grid()?;
    let b = bundle_for(&p, &grid)?;
    let dir = out_dir(s)?;
    write_csv(dir, stdout, "ground_state.csv", "ground-state", GroundStateBundle::CSV_HEADER, &[b.csv_row()])?;
    if let Some(d) = dir {
        write_field(BufWriter::new(File::create(d.join("w_a.csv"))?), &b.w)?;
    }
    Ok(EXIT_OK)
}

fn verdict_prefix(family: Family, d: u32, a: f64, c: f64, s: f64) -> String {
    format!("{},{d},{},{},{}", family.name(), fmt_f64(a), fmt_f64(c), fmt_f64(s))
}

pub fn cmd_classify(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let p = s.params()?;
    let grid = s.grid()?;
    let b = bundle_for(&p, &grid)?;
    let (c, sc) = (s.single("c", &s.c)?, s.single("s", &s.s)?);
    let u = datum(&p, &grid, s.family, c, sc, s.window)?;
    let v = classify::classify(&u, &p, &b, classify::default_tol(&b))?;
    let header = format!("family,d,a,c,s,{}", ClassifierVerdict::CSV_HEADER);
    let row = format!("{},{}", verdict_prefix(s.family, s.d, p.a(), c, sc), v.csv_row());
    write_csv(out_dir(s)?, stdout, "classify.csv", "classify", &header, &[row])?;
    Ok(EXIT_OK)
}

pub fn cmd_evolve(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let p = s.params()?;
    let grid = s.grid()?;
    let b = bundle_for(&p, &grid)?;
    let (c, sc) = (s.single("c", &s.c)?, s.single("s", &s.s)?);
    let u0 = datum(&p, &grid, s.family, c, sc, Some(s.run_window()))?;
    let dir = out_dir(s)?;
    let rec = match dir {
        Some(d) => {
            let mut w = BufWriter::new(File::create(d.join("trajectory.jsonl"))?);
            let rec = evolve::run_streaming(&u0, &p, &b, &s.evolve, &s.monitors, Some(&mut w))?;
            w.flush()?;
            rec
        }
        None => evolve::run(&u0, &p, &b, &s.evolve, &s.monitors)?,
    };
    write_csv(dir, stdout, "summary.csv", "trajectory-summary", TrajectoryRecord::CSV_HEADER, &[rec.summary_row()])?;
    if let (Some(d), Some(u)) = (dir, &rec.final_state) {
        write_field(BufWriter::new(File::create(d.join("final_state.csv"))?), u)?;
    }
    log::info!("{} after {} steps", rec.termination.label(), rec.steps);
    Ok(rec.termination.exit_code())
}

/// One sweep row: verdict on the run datum, then the run summary.
fn sweep_row(s: &Settings, p: &PhysParams, grid: &Arc<RadialGrid>, b: &GroundStateBundle, c: f64, sc: f64) -> String {
    let prefix = verdict_prefix(s.family, s.d, p.a(), c, sc);
    let body = || -> Result<String> {
        let u0 = datum(p, grid, s.family, c, sc, Some(s.run_window()))?;
        let v = classify::classify(&u0, p, b, classify::default_tol(b))?;
        let rec = evolve::run(&u0, p, b, &s.evolve, &Monitors::none())?;
        let last = rec.snapshots.last().map(|x| x.t).unwrap_or(0.0);
        let kmax = rec.snapshots.iter().map(|x| x.kinetic_sq).fold(0.0, f64::max);
        let lmax = rec.snapshots.iter().map(|x| x.local_crit).fold(0.0, f64::max);
        Ok([
            v.region.name().to_string(),
            fmt_f64(v.energy_margin),
            fmt_f64(v.kinetic_margin),
            fmt_f64(v.report.e_a),
            fmt_f64(v.report.kinetic_sq),
            rec.termination.label().to_string(),
            fmt_f64(last),
            rec.termination.t_star().map(fmt_f64).unwrap_or_default(),
            rec.steps.to_string(),
            rec.rejected_steps.to_string(),
            fmt_f64(rec.mass_drift()),
            fmt_f64(rec.energy_drift()),
            fmt_f64(kmax),
            fmt_f64(lmax),
            String::new(),
        ]
        .join(","))
    };
    match body() {
        Ok(r) => format!("{prefix},{r}"),
        Err(e) => {
            log::warn!("sweep point {prefix} failed: {e}");
            format!("{prefix}{}{}", ",".repeat(15), e.to_string().replace(',', ";"))
        }
    }
}

pub fn cmd_sweep(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    for (name, v) in [("a", &s.a), ("c", &s.c), ("s", &s.s)] {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Config(format!("sweep grid `{name}` must be a non-empty list of numbers")));
        }
    }
    s.evolve.validate()?;
    let grid = s.grid()?;
    let mut bundles = Vec::with_capacity(s.a.len());
    for &a in &s.a {
        let p = PhysParams::new(s.d, a)?;
        bundles.push((p, bundle_for(&p, &grid)?));
    }
    let mut points = Vec::new();
    for (k, _) in s.a.iter().enumerate() {
        for &c in &s.c {
            for &sc in &s.s {
                points.push((k, c, sc));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers)
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;
    let rows: Vec<String> = pool.install(|| {
        points
            .par_iter()
            .map(|&(k, c, sc)| sweep_row(s, &bundles[k].0, &grid, &bundles[k].1, c, sc))
            .collect()
    });
    write_csv(out_dir(s)?, stdout, "sweep.csv", "sweep", SWEEP_HEADER, &rows)?;
    Ok(EXIT_OK)
}

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn self_checks(s: &Settings) -> Result<Vec<Check>> {
    use crate::grid::{h1a_norm_sq, lebesgue_norm};
    use std::f64::consts::PI;
    let mut out = Vec::new();
    for (d, a) in [(3, 0.0), (3, -3.0 / 16.0), (4, 0.0), (4, -0.1), (5, 0.0)] {
        let p = PhysParams::new(d, a)?;
        let g = RadialGrid::new(d, DEFAULT_RMAX, s.n)?;
        let r = build_bundle(&p, &g).map(|b| b.pohozaev_residual);
        out.push(Check {
            name: "pohozaev",
            ok: r.is_ok(),
            detail: format!("d={d} a={a}: {r:?}"),
        });
    }
    let p = PhysParams::new(3, 0.0)?;
    let g = RadialGrid::new(3, DEFAULT_RMAX, s.n)?;
    let b = build_bundle(&p, &g)?;
    let exact = 3.0 * 3f64.sqrt() * PI * PI / 4.0;
    let rel = (b.kinetic_sq - exact).abs() / exact;
    out.push(Check {
        name: "kinetic_w0",
        ok: rel < 1e-4,
        detail: format!("relative error {rel:.2e}"),
    });

    let p = PhysParams::new(3, -3.0 / 16.0)?;
    let b = build_bundle(&p, &g)?;
    let mut worst = 0.0f64;
    for m in corpus::corpus(&p, &g, s.seed, 20) {
        let lhs = lebesgue_norm(&m.field, p.q_crit())?;
        let rhs = b.cgn * h1a_norm_sq(&m.field, &p)?.sqrt();
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    out.push(Check {
        name: "sharp_sobolev",
        ok: worst <= 1.0 + 1e-6,
        detail: format!("max ratio {worst:.8} over 26 fields (seed {})", s.seed),
    });

    let w = groundstate::eval_wa(&p, &g);
    let u = scale_h1inv(&w, 2.0).scaled(Complex64::from_polar(1.0, PI / 3.0));
    let fit = crate::modulation::fit(&u, &p, &b, crate::modulation::DELTA0_REL * b.kinetic_sq)?;
    let (ok, detail) = match fit.fit() {
        Some(f) => (
            (f.theta - PI / 3.0).abs() < 1e-6 && (f.mu - 2.0).abs() < 1e-6,
            format!("theta {:.9} mu {:.9}", f.theta, f.mu),
        ),
        None => (false, "not in window".into()),
    };
    out.push(Check { name: "exact_orbit_fit", ok, detail });

    let g = RadialGrid::new(3, 30.0, 2048)?;
    let b = build_bundle(&p, &g)?;
    let u0 = evolve::windowed(&groundstate::eval_wa(&p, &g).scaled_re(0.5));
    let cfg = EvolveConfig {
        t_end: 0.1,
        ..Default::default()
    };
    let rec = evolve::run(&u0, &p, &b, &cfg, &Monitors::none())?;
    out.push(Check {
        name: "conservation",
        ok: rec.mass_drift() < 1e-10 && rec.energy_drift() < 1e-4,
        detail: format!("{} mass {:.2e} energy {:.2e}", rec.termination.label(), rec.mass_drift(), rec.energy_drift()),
    });
    Ok(out)
}

pub fn cmd_self_test(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let checks = self_checks(s)?;
    for c in &checks {
        writeln!(stdout, "{} {}: {}", if c.ok { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    Ok(if checks.iter().all(|c| c.ok) { EXIT_OK } else { EXIT_FAILURE })
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_from<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (opts, f): (&Opts, fn(&Settings, &mut dyn Write) -> Result<i32>) = match &cli.command {
        Command::GroundState(o) => (o, cmd_ground_state),
        Command::Classify(o) => (o, cmd_classify),
        Command::Evolve(o) => (o, cmd_evolve),
        Command::Sweep(o) => (o, cmd_sweep),
        Command::SelfTest(o) => (o, cmd_self_test),
    };
    match Settings::resolve(opts).and_then(|s| f(&s, stdout)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_for(&e)
        }
    }
}
