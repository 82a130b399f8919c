//! Time integration: Strang splitting with the exact nonlinear phase around a
//! Crank-Nicolson step for `L_a`, plus the run loop with its detectors and
//! monitors.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{RadialField, RadialGrid, Stencil};
use crate::groundstate::GroundStateBundle;
use crate::io::fmt_f64;
use crate::modulation::{self, FitSummary, DELTA0_REL};
use crate::params::PhysParams;
use crate::virial::{build_weight, VirialProbe, VirialSample};

/// Innermost faces watched by the core-concentration detector.
pub const CORE_FACES: usize = 16;
/// Radius of the local critical-norm proxy.
pub const LOCAL_RADIUS: f64 = 5.0;
pub const DEFAULT_VIRIAL_RADII: [f64; 3] = [5.0, 10.0, 20.0];
/// Largest single-step relative kinetic increase accepted.
pub const MAX_KINETIC_JUMP: f64 = 0.05;
/// A step is also retried at half size when it moves `E_a` by more than
/// this fraction of the conservation tolerance.
pub const ENERGY_STEP_FRACTION: f64 = 1e-3;
/// `dt` may be halved this many times.
pub const MAX_HALVINGS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub blowup_kinetic_factor: f64,
    pub blowup_core_fraction: f64,
    pub conservation_tol: f64,
    /// absorbing layer on the outer 10% of the grid
    pub sponge: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            snapshot_stride: 10,
            blowup_kinetic_factor: 10.0,
            blowup_core_fraction: 0.5,
            conservation_tol: 1e-4,
            sponge: false,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.snapshot_stride < 1 {
            return bad("snapshot_stride must be at least 1".into());
        }
        if !(self.blowup_kinetic_factor > 1.0) {
            return bad(format!("blowup_kinetic_factor must exceed 1, got {}", self.blowup_kinetic_factor));
        }
        if !(self.blowup_core_fraction > 0.0 && self.blowup_core_fraction <= 1.0) {
            return bad(format!("blowup_core_fraction must lie in (0, 1], got {}", self.blowup_core_fraction));
        }
        if !(self.conservation_tol > 0.0) {
            return bad(format!("conservation_tol must be positive, got {}", self.conservation_tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    /// radii of the virial probes; those with `2R > r_max` are dropped
    pub virial_radii: Vec<f64>,
    pub modulation: bool,
    /// window for the fit; `None` means `0.05 ‖W_a‖²`
    pub delta0: Option<f64>,
}

impl Default for Monitors {
    fn default() -> Self {
        Self {
            virial_radii: DEFAULT_VIRIAL_RADII.to_vec(),
            modulation: true,
            delta0: None,
        }
    }
}

impl Monitors {
    pub fn none() -> Self {
        Self {
            virial_radii: Vec::new(),
            modulation: false,
            delta0: None,
        }
    }
}

/// Discrete conserved quantities in the cell weights of the stencil.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Observables {
    pub mass: f64,
    pub kinetic_sq: f64,
    pub l_crit: f64,
    pub l_pert: f64,
    pub e_a: f64,
    pub k_a: f64,
}

/// Precomputed Crank-Nicolson tridiagonal and nonlinear exponents.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: PhysParams,
    st: Stencil,
    diag: Vec<f64>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    sponge: Option<Vec<f64>>,
}

/// `|z|^p` with fast paths for the exponents that occur.
#[inline]
fn pow_abs(m2: f64, p: f64) -> f64 {
    // m2 = |z|²
    if p == 4.0 {
        m2 * m2
    } else if p == 2.0 {
        m2
    } else if p == 1.0 {
        m2.sqrt()
    } else {
        m2.powf(0.5 * p)
    }
}

impl Stepper {
    pub fn new(p: &PhysParams, grid: &Arc<RadialGrid>, sponge: bool) -> Result<Self> {
        let st = Stencil::new(grid, p)?;
        let n = grid.n();
        let (c, mu, rs) = (st.coef(), st.cell_weights(), st.r_sigma());
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut lower = vec![0.0; n];
        for i in 0..n {
            let lo = if i > 0 { c[i - 1] } else { 0.0 };
            diag[i] = rs[i] * rs[i] * (c[i] + lo) / mu[i];
            if i + 1 < n {
                upper[i] = -rs[i] * rs[i + 1] * c[i] / mu[i];
            }
            if i > 0 {
                lower[i] = -rs[i] * rs[i - 1] * c[i - 1] / mu[i];
            }
        }
        let sponge = sponge.then(|| {
            let r0 = 0.9 * grid.r_max();
            grid.nodes()
                .iter()
                .map(|&r| {
                    if r <= r0 {
                        1.0
                    } else {
                        let x = (r - r0) / (grid.r_max() - r0);
                        1.0 - 0.05 * x * x
                    }
                })
                .collect()
        });
        Ok(Self {
            params: *p,
            st,
            diag,
            upper,
            lower,
            sponge,
        })
    }

    pub fn stencil(&self) -> &Stencil {
        &self.st
    }
    pub fn has_sponge(&self) -> bool {
        self.sponge.is_some()
    }

    fn phase(&self, u: &mut [Complex64], tau: f64) {
        let (pc, pp) = (self.params.p_crit(), self.params.p_pert());
        for z in u.iter_mut() {
            let m2 = z.norm_sqr();
            let th = tau * (pow_abs(m2, pc) - pow_abs(m2, pp));
            *z *= Complex64::from_polar(1.0, th);
        }
    }

    /// `(1 + iτA) u⁺ = (1 - iτA) u` with `τ = dt/2`, Thomas algorithm.
    fn linear(&self, u: &mut [Complex64], dt: f64, scratch: &mut Vec<Complex64>) {
        let n = u.len();
        let it = Complex64::new(0.0, 0.5 * dt);
        let mut rhs: Vec<Complex64> = (0..n)
            .map(|i| {
                let mut a = u[i] * self.diag[i];
                if i + 1 < n {
                    a += u[i + 1] * self.upper[i];
                }
                if i > 0 {
                    a += u[i - 1] * self.lower[i];
                }
                u[i] - it * a
            })
            .collect();
        scratch.clear();
        scratch.resize(n, Complex64::default());
        let cp = scratch;
        let b0 = Complex64::new(1.0, 0.0) + it * self.diag[0];
        cp[0] = it * self.upper[0] / b0;
        rhs[0] /= b0;
        for i in 1..n {
            let a = it * self.lower[i];
            let m = Complex64::new(1.0, 0.0) + it * self.diag[i] - a * cp[i - 1];
            cp[i] = it * self.upper[i] / m;
            rhs[i] = (rhs[i] - a * rhs[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - cp[i] * rhs[i + 1];
        }
        u.copy_from_slice(&rhs);
    }

    /// One Strang step in place.
    pub fn step_in_place(&self, u: &mut [Complex64], dt: f64, scratch: &mut Vec<Complex64>) -> Result<()> {
        self.phase(u, 0.5 * dt);
        self.linear(u, dt, scratch);
        self.phase(u, 0.5 * dt);
        if let Some(s) = &self.sponge {
            u.iter_mut().zip(s).for_each(|(z, m)| *z *= m);
        }
        if let Some(index) = u.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::NonFinite { what: "state after step", index });
        }
        Ok(())
    }

    pub fn kinetic(&self, u: &[Complex64]) -> f64 {
        self.st.form(u, true)
    }

    pub fn observables(&self, u: &[Complex64]) -> Observables {
        let p = &self.params;
        let d = p.dim();
        let (qc, qp) = (p.q_crit(), p.q_pert());
        let (mut mass, mut lc, mut lp) = (0.0, 0.0, 0.0);
        for (z, m) in u.iter().zip(self.st.cell_weights()) {
            let m2 = z.norm_sqr();
            mass += m * m2;
            lc += m * pow_abs(m2, qc);
            lp += m * pow_abs(m2, qp);
        }
        let kin = self.kinetic(u);
        Observables {
            mass,
            kinetic_sq: kin,
            l_crit: lc,
            l_pert: lp,
            e_a: 0.5 * kin + (d - 1.0) / (2.0 * d + 2.0) * lp - (d - 2.0) / (2.0 * d) * lc,
            k_a: 2.0 * kin - 2.0 * lc + 2.0 * d / (d + 1.0) * lp,
        }
    }

    /// Share of the interior-face kinetic density in the innermost faces.
    pub fn core_fraction(&self, u: &[Complex64]) -> f64 {
        let dens = self.st.face_density(u);
        let total: f64 = dens.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        dens.iter().take(CORE_FACES).sum::<f64>() / total
    }
}

/// One Strang step of the flow, with Dirichlet data at `r_max`.
pub fn step(u: &RadialField, p: &PhysParams, dt: f64) -> Result<RadialField> {
    if !(dt > 0.0) {
        return Err(LabError::Config(format!("dt must be positive, got {dt}")));
    }
    u.check_finite()?;
    let s = Stepper::new(p, u.grid(), false)?;
    let mut v = u.values().to_vec();
    s.step_in_place(&mut v, dt, &mut Vec::new())?;
    RadialField::from_values(u.grid(), v)
}

/// Smooth cutoff equal to 1 below `r_in` and 0 above `r_out`.
pub fn cutoff(r: f64, r_in: f64, r_out: f64) -> f64 {
    if r <= r_in {
        return 1.0;
    }
    if r >= r_out {
        return 0.0;
    }
    let t = (r - r_in) / (r_out - r_in);
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    b / (a + b)
}

/// Initial data for a run: `u` times the cutoff between `0.5 r_max` and
/// `0.8 r_max`, without its closed form. Slowly decaying data such as `W_a`
/// have infinite mass, and sometimes infinite energy, without it.
pub fn windowed(u: &RadialField) -> RadialField {
    let rm = u.grid().r_max();
    windowed_at(u, 0.5 * rm, 0.8 * rm)
}

pub fn windowed_at(u: &RadialField, r_in: f64, r_out: f64) -> RadialField {
    u.map(|r, z| z * cutoff(r, r_in, r_out)).without_profile()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Termination {
    Completed,
    BlowupDetected { t_star: f64, reason: String },
    ConservationFailure { t: f64, quantity: String, drift: f64 },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "Completed",
            Termination::BlowupDetected { .. } => "BlowupDetected",
            Termination::ConservationFailure { .. } => "ConservationFailure",
        }
    }
    pub fn exit_code(&self) -> i32 {
        match self {
            Termination::Completed => 0,
            Termination::BlowupDetected { .. } => 3,
            Termination::ConservationFailure { .. } => 4,
        }
    }
    pub fn t_star(&self) -> Option<f64> {
        match self {
            Termination::BlowupDetected { t_star, .. } => Some(*t_star),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VirialRecord {
    pub radius: f64,
    #[serde(flatten)]
    pub sample: VirialSample,
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub dt: f64,
    pub mass: f64,
    pub e_a: f64,
    pub kinetic_sq: f64,
    pub l_crit: f64,
    pub l_pert: f64,
    pub k_a: f64,
    pub delta: f64,
    /// `∫_{r ≤ 5} |u|^{2d/(d-2)}`
    pub local_crit: f64,
    pub core_fraction: f64,
    /// reciprocal of the half-kinetic-density radius, a scale proxy used
    /// outside the modulation window
    pub scale_proxy: f64,
    pub virial: Vec<VirialRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub d: u32,
    pub a: f64,
    pub r_max: f64,
    pub n: usize,
    pub config: EvolveConfig,
    pub sponge: bool,
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
    pub steps: usize,
    pub rejected_steps: usize,
    #[serde(skip)]
    pub final_state: Option<RadialField>,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn mass_drift(&self) -> f64 {
        let m0 = self.snapshots[0].mass;
        self.snapshots.iter().map(|s| (s.mass - m0).abs()).fold(0.0, f64::max) / m0.abs().max(f64::MIN_POSITIVE)
    }

    pub fn energy_drift(&self) -> f64 {
        let s0 = &self.snapshots[0];
        let scale = energy_scale(s0.e_a, s0.kinetic_sq);
        self.snapshots.iter().map(|s| (s.e_a - s0.e_a).abs()).fold(0.0, f64::max) / scale
    }

    pub const CSV_HEADER: &'static str = "d,a,r_max,n,dt,t_end,sponge,termination,t_final,t_star,steps,rejected_steps,mass0,mass_drift,e_a0,e_a_drift,kinetic_max,kinetic_final,local_crit_max,local_crit_final";

    pub fn summary_row(&self) -> String {
        let first = &self.snapshots[0];
        let last = self.snapshots.last().unwrap();
        let kmax = self.snapshots.iter().map(|s| s.kinetic_sq).fold(0.0, f64::max);
        let lmax = self.snapshots.iter().map(|s| s.local_crit).fold(0.0, f64::max);
        let t_star = self.termination.t_star().map(fmt_f64).unwrap_or_default();
        [
            self.d.to_string(),
            fmt_f64(self.a),
            fmt_f64(self.r_max),
            self.n.to_string(),
            fmt_f64(self.config.dt),
            fmt_f64(self.config.t_end),
            self.sponge.to_string(),
            self.termination.label().to_string(),
            fmt_f64(last.t),
            t_star,
            self.steps.to_string(),
            self.rejected_steps.to_string(),
            fmt_f64(first.mass),
            fmt_f64(self.mass_drift()),
            fmt_f64(first.e_a),
            fmt_f64(self.energy_drift()),
            fmt_f64(kmax),
            fmt_f64(last.kinetic_sq),
            fmt_f64(lmax),
            fmt_f64(last.local_crit),
        ]
        .join(",")
    }
}

/// Denominator for relative energy drift: `|E|`, or `Q` when `E` vanishes.
fn energy_scale(e: f64, q: f64) -> f64 {
    if e.abs() > 1e-8 * q {
        e.abs()
    } else {
        q.max(f64::MIN_POSITIVE)
    }
}

struct Probes {
    virial: Vec<VirialProbe>,
    local_w: Vec<f64>,
    w_half: f64,
}

/// Integrates `u0` (its closed form, if any, is dropped) until `t_end` or a
/// detector fires.
pub fn run(
    u0: &RadialField,
    p: &PhysParams,
    bundle: &GroundStateBundle,
    cfg: &EvolveConfig,
    monitors: &Monitors,
) -> Result<TrajectoryRecord> {
    run_streaming(u0, p, bundle, cfg, monitors, None)
}

/// As [`run`], writing each snapshot to `sink` as one JSON line.
pub fn run_streaming(
    u0: &RadialField,
    p: &PhysParams,
    bundle: &GroundStateBundle,
    cfg: &EvolveConfig,
    monitors: &Monitors,
    mut sink: Option<&mut dyn Write>,
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    u0.check_finite()?;
    let grid = u0.grid().clone();
    let stepper = Stepper::new(p, &grid, cfg.sponge)?;
    let probes = {
        let mut virial = Vec::new();
        for &r in &monitors.virial_radii {
            if 2.0 * r <= grid.r_max() {
                virial.push(VirialProbe::new(p, build_weight(r, &grid)?)?);
            }
        }
        let local_w = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(&r, &w)| if r <= LOCAL_RADIUS { w } else { 0.0 })
            .collect();
        Probes {
            virial,
            local_w,
            w_half: modulation::unit_half_radius(stepper.stencil(), p),
        }
    };
    let delta0 = monitors.delta0.unwrap_or(DELTA0_REL * bundle.kinetic_sq);
    let kg = bundle.kinetic_sq;

    let mut u = u0.values().to_vec();
    let mut scratch = Vec::new();
    let mut rec = TrajectoryRecord {
        d: p.d(),
        a: p.a(),
        r_max: grid.r_max(),
        n: grid.n(),
        config: cfg.clone(),
        sponge: stepper.has_sponge(),
        snapshots: Vec::new(),
        termination: Termination::Completed,
        steps: 0,
        rejected_steps: 0,
        final_state: None,
    };
    let mut t = 0.0;
    let mut dt = cfg.dt;
    let dt_min = cfg.dt / 2f64.powi(MAX_HALVINGS as i32);
    let snap = |u: &[Complex64], t: f64, step: usize, dt: f64| -> Result<Snapshot> {
        snapshot(&stepper, &probes, p, bundle, delta0, monitors.modulation, &grid, u, t, step, dt)
    };
    let first = snap(&u, 0.0, 0, dt)?;
    emit(&mut sink, &first)?;
    let (m0, e0) = (first.mass, first.e_a);
    let e_scale = energy_scale(e0, first.kinetic_sq);
    rec.snapshots.push(first);

    let mut obs = stepper.observables(&u);
    let mut trial = u.clone();
    let eps = 1e-12 * cfg.t_end.max(cfg.dt);
    let e_step_tol = ENERGY_STEP_FRACTION * cfg.conservation_tol * e_scale;
    while t < cfg.t_end - eps {
        let h = dt.min(cfg.t_end - t);
        trial.copy_from_slice(&u);
        stepper.step_in_place(&mut trial, h, &mut scratch)?;
        let next = stepper.observables(&trial);
        let jump = next.kinetic_sq > (1.0 + MAX_KINETIC_JUMP) * obs.kinetic_sq;
        let drift = !stepper.has_sponge() && (next.e_a - obs.e_a).abs() > e_step_tol;
        if (jump || drift) && dt > dt_min * 1.5 {
            dt *= 0.5;
            rec.rejected_steps += 1;
            continue;
        }
        std::mem::swap(&mut u, &mut trial);
        t += h;
        obs = next;
        rec.steps += 1;
        if jump {
            rec.termination = Termination::BlowupDetected {
                t_star: t,
                reason: format!("kinetic jump above {MAX_KINETIC_JUMP} at the minimal step"),
            };
            break;
        }
        let kin = obs.kinetic_sq;

        let factor2 = cfg.blowup_kinetic_factor * cfg.blowup_kinetic_factor;
        if kin > factor2 * kg {
            rec.termination = Termination::BlowupDetected {
                t_star: t,
                reason: format!("kinetic above {}² ‖W_a‖²", cfg.blowup_kinetic_factor),
            };
            break;
        }
        let core = stepper.core_fraction(&u);
        if core >= cfg.blowup_core_fraction {
            rec.termination = Termination::BlowupDetected {
                t_star: t,
                reason: format!("{core:.3} of the kinetic density in the innermost {CORE_FACES} faces"),
            };
            break;
        }
        if rec.steps % cfg.snapshot_stride == 0 || t >= cfg.t_end - eps {
            let s = snap(&u, t, rec.steps, dt)?;
            emit(&mut sink, &s)?;
            let dm = (s.mass - m0).abs() / m0.abs().max(f64::MIN_POSITIVE);
            let de = (s.e_a - e0).abs() / e_scale;
            rec.snapshots.push(s);
            // the sponge removes mass and energy by design
            if !stepper.has_sponge() {
                if dm > cfg.conservation_tol {
                    rec.termination = Termination::ConservationFailure {
                        t,
                        quantity: "mass".into(),
                        drift: dm,
                    };
                    break;
                }
                if de > cfg.conservation_tol {
                    rec.termination = Termination::ConservationFailure {
                        t,
                        quantity: "e_a".into(),
                        drift: de,
                    };
                    break;
                }
            }
        }
    }
    if rec.snapshots.last().map(|s| s.step) != Some(rec.steps) {
        let s = snap(&u, t, rec.steps, dt)?;
        emit(&mut sink, &s)?;
        rec.snapshots.push(s);
    }
    rec.final_state = Some(RadialField::from_values(&grid, u)?);
    Ok(rec)
}

fn emit(sink: &mut Option<&mut dyn Write>, s: &Snapshot) -> Result<()> {
    if let Some(w) = sink {
        let line = serde_json::to_string(s).map_err(|e| LabError::Io(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn snapshot(
    stepper: &Stepper,
    probes: &Probes,
    p: &PhysParams,
    bundle: &GroundStateBundle,
    delta0: f64,
    modulation: bool,
    grid: &Arc<RadialGrid>,
    u: &[Complex64],
    t: f64,
    step: usize,
    dt: f64,
) -> Result<Snapshot> {
    let obs = stepper.observables(u);
    let kg = bundle.kinetic_sq;
    let qc = p.q_crit();
    let local_crit = u
        .iter()
        .zip(&probes.local_w)
        .map(|(z, w)| w * pow_abs(z.norm_sqr(), qc))
        .sum();
    let field = RadialField::from_values(grid, u.to_vec())?;
    let r_half = modulation::half_kinetic_radius(stepper.stencil(), &field);
    let mut fit = None;
    if modulation {
        // outside the admissible scale range the fit is simply absent
        if let Ok(outcome) = modulation::fit_with(stepper.stencil(), &field, p, bundle, delta0) {
            fit = Some(match outcome.fit() {
                Some(f) => FitSummary::from(f),
                None => FitSummary {
                    theta: f64::NAN,
                    mu: probes.w_half / r_half,
                    delta: (kg - obs.kinetic_sq).abs(),
                    g_norm: f64::NAN,
                    in_window: false,
                },
            });
        }
    }
    let mut virial = Vec::with_capacity(probes.virial.len());
    for probe in &probes.virial {
        let mut s = probe.sample(&field, t)?;
        if let Some(f) = fit.filter(|f| f.in_window) {
            s.chi = 1.0;
            s.f_mod = probe.modulated_derivative(&field, Some((f.theta, f.mu)))?;
        }
        virial.push(VirialRecord {
            radius: probe.weight().radius(),
            sample: s,
        });
    }
    Ok(Snapshot {
        t,
        step,
        dt,
        mass: obs.mass,
        e_a: obs.e_a,
        kinetic_sq: obs.kinetic_sq,
        l_crit: obs.l_crit,
        l_pert: obs.l_pert,
        k_a: obs.k_a,
        delta: (kg - obs.kinetic_sq).abs(),
        local_crit,
        core_fraction: stepper.core_fraction(u),
        scale_proxy: 1.0 / r_half,
        virial,
        fit,
    })
}

/// Writes every snapshot as one JSON line.
pub fn write_jsonl<W: Write>(mut out: W, rec: &TrajectoryRecord) -> Result<()> {
    for s in &rec.snapshots {
        let line = serde_json::to_string(s).map_err(|e| LabError::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Residuals `|ΔV/Δt - I|` and `|ΔI/Δt - F|` of the virial identities at the
/// state `u`, with centered differences over `k` steps of size `dt` each way
/// (`Δt = 2k dt`). `F` is the exact derivative of the discrete `I` along the
/// semi-discrete flow, so both residuals only see the time discretization.
pub fn virial_residuals(stepper: &Stepper, probe: &VirialProbe, u: &RadialField, dt: f64, k: usize) -> Result<(f64, f64)> {
    let grid = u.grid();
    let mut fwd = u.values().to_vec();
    let mut bwd = fwd.clone();
    let mut scratch = Vec::new();
    for _ in 0..k.max(1) {
        stepper.step_in_place(&mut fwd, dt, &mut scratch)?;
        stepper.step_in_place(&mut bwd, -dt, &mut scratch)?;
    }
    let fwd = RadialField::from_values(grid, fwd)?;
    let bwd = RadialField::from_values(grid, bwd)?;
    let s = probe.sample(u, 0.0)?;
    let span = 2.0 * dt * k.max(1) as f64;
    let dv = (probe.v_r(&fwd) - probe.v_r(&bwd)) / span;
    let di = (probe.i_r(&fwd) - probe.i_r(&bwd)) / span;
    Ok(((dv - s.i_r).abs(), (di - s.f_r_disc).abs()))
}
