//! Decomposition near the ground-state orbit,
//! `u = e^{iθ} (g + μ^{(d-2)/2} W_a(μ ·))`, with `g` orthogonal in `Ḣ¹_a` to
//! the phase and scaling directions, plus the quadratic form around `W_a`.
//!
//! Inner products against `W_μ` and its generator are taken after moving
//! `L_a` onto them: `⟨h, W_μ⟩ = ∫ h W_μ^{p+1}` and
//! `⟨h, W1_μ⟩ = (p+1) ∫ h W_μ^p W1_μ` with `p = 4/(d-2)`, so only `h` is
//! sampled and no derivative of it is needed.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::{self, RadialField, RadialGrid, Stencil};
use crate::groundstate::{generator_shape, ground_shape, GroundStateBundle};
use crate::params::PhysParams;
use crate::profile::{Profile, Shape};
use crate::quadrature::half_line;

/// Default window as a fraction of `‖W_a‖²`.
pub const DELTA0_REL: f64 = 0.05;
pub const MAX_NEWTON: usize = 50;

#[derive(Debug, Clone, Serialize)]
pub struct ModulationFit {
    pub theta: f64,
    pub mu: f64,
    #[serde(skip)]
    pub g: RadialField,
    pub delta: f64,
    pub g_norm: f64,
    pub in_window: bool,
    pub ortho_residuals: [f64; 2],
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub enum FitOutcome {
    Fit(ModulationFit),
    NotInWindow { delta: f64 },
}

impl FitOutcome {
    pub fn fit(&self) -> Option<&ModulationFit> {
        match self {
            FitOutcome::Fit(f) => Some(f),
            FitOutcome::NotInWindow { .. } => None,
        }
    }
}

/// `(θ, μ, δ, ‖g‖, in_window)` as recorded along trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSummary {
    pub theta: f64,
    pub mu: f64,
    pub delta: f64,
    pub g_norm: f64,
    pub in_window: bool,
}

impl From<&ModulationFit> for FitSummary {
    fn from(f: &ModulationFit) -> Self {
        Self {
            theta: f.theta,
            mu: f.mu,
            delta: f.delta,
            g_norm: f.g_norm,
            in_window: f.in_window,
        }
    }
}

/// `∫ f(r, u_1(r), ..) ω r^{d-1} dr`, from the closed forms over the whole
/// half-line when every field carries one, otherwise by the midpoint rule.
fn quad(grid: &Arc<RadialGrid>, fields: &[&RadialField], f: impl Fn(f64, &[Complex64]) -> f64) -> f64 {
    let (omega, dm1) = (grid.omega(), grid.d() as i32 - 1);
    let zero = Profile { terms: Vec::new() };
    fn closed<'a>(u: &'a RadialField, zero: &'a Profile) -> Option<&'a Profile> {
        match u.profile() {
            Some(p) => Some(p),
            None if u.max_abs() == 0.0 => Some(zero),
            None => None,
        }
    }
    if fields.iter().all(|u| closed(u, &zero).is_some()) {
        let profs: Vec<&Profile> = fields.iter().map(|u| closed(u, &zero).unwrap()).collect();
        let dens = |r: f64| {
            let vals: Vec<Complex64> = profs.iter().map(|p| p.value(r)).collect();
            omega * r.powi(dm1) * f(r, &vals)
        };
        let mut breaks: Vec<f64> = profs.iter().flat_map(|p| p.breakpoints()).collect();
        breaks.push(grid.r_max());
        return half_line(&breaks, &dens);
    }
    let mut vals = vec![Complex64::default(); fields.len()];
    let mut s = 0.0;
    for (i, (&r, &w)) in grid.nodes().iter().zip(grid.weights()).enumerate() {
        for (v, u) in vals.iter_mut().zip(fields) {
            *v = u.values()[i];
        }
        s += f(r, &vals) * w;
    }
    s
}

/// The ground state and its generator at scale `μ`, with the kernels that
/// realize the `Ḣ¹_a` pairings against them.
#[derive(Debug, Clone)]
pub struct OrbitPoint {
    pub mu: f64,
    pub w: RadialField,
    pub w1: RadialField,
}

impl OrbitPoint {
    pub fn new(p: &PhysParams, grid: &Arc<RadialGrid>, mu: f64) -> Self {
        let k = (p.dim() - 2.0) / 2.0;
        Self {
            mu,
            w: RadialField::from_profile(grid, Profile::new(ground_shape(p)).rescaled(mu, k)),
            w1: RadialField::from_profile(grid, Profile::new(generator_shape(p)).rescaled(mu, k)),
        }
    }
}

/// `⟨h, W_μ⟩_{Ḣ¹_a}` and `⟨h, W1_μ⟩_{Ḣ¹_a}` for complex `h`, linear in `h`.
fn pair_orbit(p: &PhysParams, h: &RadialField, o: &OrbitPoint) -> (Complex64, Complex64) {
    let pc = p.p_crit();
    let g = h.grid();
    let re1 = quad(g, &[h, &o.w], |_, v| v[0].re * v[1].re.powf(pc + 1.0));
    let im1 = quad(g, &[h, &o.w], |_, v| v[0].im * v[1].re.powf(pc + 1.0));
    let re2 = quad(g, &[h, &o.w, &o.w1], |_, v| (pc + 1.0) * v[0].re * v[1].re.powf(pc) * v[2].re);
    let im2 = quad(g, &[h, &o.w, &o.w1], |_, v| (pc + 1.0) * v[0].im * v[1].re.powf(pc) * v[2].re);
    (Complex64::new(re1, im1), Complex64::new(re2, im2))
}

/// Radius holding half of the interior-face kinetic density.
pub fn half_kinetic_radius(st: &Stencil, u: &RadialField) -> f64 {
    let dens = st.face_density(u.values());
    let total: f64 = dens.iter().sum();
    let mut acc = 0.0;
    for (i, x) in dens.iter().enumerate() {
        acc += x;
        if acc >= 0.5 * total {
            return st.face_radii()[i];
        }
    }
    u.grid().r_max()
}

/// Half-kinetic radius of `W_a` at unit scale, measured on an orbit point
/// the grid resolves and scaled back.
pub fn unit_half_radius(st: &Stencil, p: &PhysParams) -> f64 {
    let grid = st.grid();
    let mu_ref = (4.0 / grid.r_max() * 0.25 / grid.dr()).sqrt();
    mu_ref * half_kinetic_radius(st, &OrbitPoint::new(p, grid, mu_ref).w)
}

/// Fits `(θ, μ)` and returns the decomposition, or `NotInWindow` when
/// `δ(u) ≥ delta0`.
pub fn fit(u: &RadialField, p: &PhysParams, bundle: &GroundStateBundle, delta0: f64) -> Result<FitOutcome> {
    let st = Stencil::new(u.grid(), p)?;
    fit_with(&st, u, p, bundle, delta0)
}

pub fn fit_with(st: &Stencil, u: &RadialField, p: &PhysParams, bundle: &GroundStateBundle, delta0: f64) -> Result<FitOutcome> {
    if !(delta0 > 0.0) {
        return Err(LabError::Precondition(format!("delta0 must be positive, got {delta0}")));
    }
    u.check_finite()?;
    let grid = u.grid();
    let kg = bundle.kinetic_sq;
    let delta = (kg - grid::h1a_with(st, u)?).abs();
    if delta >= delta0 {
        return Ok(FitOutcome::NotInWindow { delta });
    }
    let (mu_lo, mu_hi) = (4.0 / grid.r_max(), 0.25 / grid.dr());
    let check_mu = |mu: f64| {
        if mu.is_finite() && mu >= mu_lo && mu <= mu_hi {
            Ok(())
        } else {
            Err(LabError::ScaleOutOfRange { mu })
        }
    };
    // θ solves the phase condition in closed form for each μ, leaving one
    // equation in log μ
    let eval = |mu: f64| -> (f64, f64, OrbitPoint) {
        let o = OrbitPoint::new(p, grid, mu);
        let (a1, a2) = pair_orbit(p, u, &o);
        let theta = a1.arg();
        let (_, c) = pair_orbit(p, &o.w, &o);
        let f2 = (Complex64::from_polar(1.0, -theta) * a2).re - c.re;
        (theta, f2, o)
    };
    let mu0 = unit_half_radius(st, p) / half_kinetic_radius(st, u);
    check_mu(mu0)?;
    let scale = kg;
    let mut l = mu0.ln();
    let (mut theta, mut f2, mut orbit) = eval(mu0);
    let mut iterations = 0;
    let tol = 1e-10 * scale;
    while f2.abs() > tol {
        if iterations >= MAX_NEWTON {
            return Err(LabError::FitNonConvergence {
                iterations,
                residuals: [0.0, f2],
            });
        }
        iterations += 1;
        let h = 1e-6;
        let fp = eval((l + h).exp()).1;
        let fm = eval((l - h).exp()).1;
        let slope = (fp - fm) / (2.0 * h);
        if slope == 0.0 || !slope.is_finite() {
            return Err(LabError::FitNonConvergence {
                iterations,
                residuals: [0.0, f2],
            });
        }
        // damped step, capped at a factor e^{1/2} in μ
        let mut step = (-f2 / slope).clamp(-0.5, 0.5);
        loop {
            let cand = l + step;
            check_mu(cand.exp())?;
            let (t, f, o) = eval(cand.exp());
            if f.abs() < f2.abs() || step.abs() < 1e-12 {
                l = cand;
                theta = t;
                f2 = f;
                orbit = o;
                break;
            }
            step *= 0.5;
        }
    }
    let mu = l.exp();
    check_mu(mu)?;
    let rot = Complex64::from_polar(1.0, -theta);
    let g = u.scaled(rot).sub(&orbit.w)?;
    let (b1, b2) = pair_orbit(p, &g, &orbit);
    let g_norm = grid::h1a_with(st, &g)?.sqrt();
    Ok(FitOutcome::Fit(ModulationFit {
        theta: theta.rem_euclid(std::f64::consts::TAU),
        mu,
        g,
        delta,
        g_norm,
        in_window: true,
        ortho_residuals: [b1.im, b2.re],
        iterations,
    }))
}

/// `½ Q(h₁) + ½ Q(h₂) - ½ ∫ W^p ((p+1) h₁² + h₂²)` for real `h₁`, `h₂`.
pub fn quadratic_form(h1: &RadialField, h2: &RadialField, p: &PhysParams, st: &Stencil) -> Result<f64> {
    let grid = h1.grid();
    let w = RadialField::from_profile(grid, Profile::new(ground_shape(p)));
    let pc = p.p_crit();
    let pot = quad(grid, &[h1, h2, &w], |_, v| {
        v[2].re.powf(pc) * ((pc + 1.0) * v[0].re * v[0].re + v[1].re * v[1].re)
    });
    Ok(0.5 * grid::h1a_with(st, h1)? + 0.5 * grid::h1a_with(st, h2)? - 0.5 * pot)
}

/// Removes the `Ḣ¹_a` components of `h₁` along `W_a` and `W_1^a`, and of
/// `h₂` along `W_a`.
pub fn project_hperp(h1: &RadialField, h2: &RadialField, p: &PhysParams) -> Result<(RadialField, RadialField)> {
    let o = OrbitPoint::new(p, h1.grid(), 1.0);
    let ww = pair_orbit(p, &o.w, &o).0.re;
    let strip_w = |h: &RadialField| h.axpy(Complex64::new(-pair_orbit(p, h, &o).0.re / ww, 0.0), &o.w);
    // W1 with its W component removed; ⟨W, W1⟩ only vanishes in the continuum
    let e2 = strip_w(&o.w1)?;
    let e2w1 = pair_orbit(p, &e2, &o).1.re;
    let q1 = strip_w(h1)?;
    let q1 = q1.axpy(Complex64::new(-pair_orbit(p, &q1, &o).1.re / e2w1, 0.0), &e2)?;
    Ok((q1, strip_w(h2)?))
}

/// `(⟨h₁, W⟩, ⟨h₁, W_1⟩, ⟨h₂, W⟩)` in `Ḣ¹_a`.
pub fn hperp_residuals(h1: &RadialField, h2: &RadialField, p: &PhysParams) -> [f64; 3] {
    let o = OrbitPoint::new(p, h1.grid(), 1.0);
    let (a, b) = pair_orbit(p, h1, &o);
    let (c, _) = pair_orbit(p, h2, &o);
    [a.re, b.re, c.re]
}

/// Seeded radial test pair built from bumps and Gaussians.
pub fn random_pair(grid: &Arc<RadialGrid>, rng: &mut ChaCha8Rng) -> (RadialField, RadialField) {
    let mut one = || {
        let mut prof = Profile { terms: Vec::new() };
        for _ in 0..rng.gen_range(1..4) {
            let shape = if rng.gen_bool(0.5) { Shape::Gaussian } else { Shape::Bump };
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            let scale = rng.gen_range(0.2..3.0);
            prof = prof.plus(Complex64::new(1.0, 0.0), &Profile::term(shape, amp, scale));
        }
        RadialField::from_profile(grid, prof)
    };
    let a = one();
    let b = one();
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coercivity {
    pub samples: usize,
    /// `min F(h) / ‖h‖²` over projected samples
    pub min_ratio: f64,
}

pub fn coercivity_sampling(p: &PhysParams, grid: &Arc<RadialGrid>, samples: usize, seed: u64) -> Result<Coercivity> {
    let st = Stencil::new(grid, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    for _ in 0..samples {
        let (h1, h2) = random_pair(grid, &mut rng);
        let (h1, h2) = project_hperp(&h1, &h2, p)?;
        let norm = grid::h1a_with(&st, &h1)? + grid::h1a_with(&st, &h2)?;
        if norm == 0.0 {
            continue;
        }
        min_ratio = min_ratio.min(quadratic_form(&h1, &h2, p, &st)? / norm);
    }
    Ok(Coercivity { samples, min_ratio })
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimatesReport {
    pub in_window: usize,
    pub skipped_degenerate: usize,
    /// `max l_pert / δ²`
    pub pert_ratio: f64,
    /// `max μ^{-β(d-2)(d+1)/(d-1)} / δ²`
    pub scale_ratio: f64,
    /// `max |μ'/μ| / (μ² δ)`
    pub drift_ratio: f64,
    pub note: String,
}

/// One in-window snapshot: time, `l_pert(u)` and the fit summary.
#[derive(Debug, Clone, Copy)]
pub struct FitPoint {
    pub t: f64,
    pub l_pert: f64,
    pub fit: FitSummary,
}

/// Ratios of the modulation estimates over the longest run of consecutive
/// in-window fits. Snapshots with `δ` below `1e-10 ‖W_a‖²` are skipped.
pub fn modulation_estimates_check(points: &[FitPoint], p: &PhysParams, bundle: &GroundStateBundle) -> Result<EstimatesReport> {
    let mut best = (0, 0);
    let mut start = 0;
    for i in 0..=points.len() {
        if i == points.len() || !points[i].fit.in_window {
            if i - start > best.1 - best.0 {
                best = (start, i);
            }
            start = i + 1;
        }
    }
    let run = &points[best.0..best.1];
    if run.len() < 10 {
        return Err(LabError::InsufficientSamples(format!(
            "{} consecutive in-window fits, need 10",
            run.len()
        )));
    }
    let d = p.dim();
    let expo = -p.beta() * (d - 2.0) * (d + 1.0) / (d - 1.0);
    let floor = 1e-10 * bundle.kinetic_sq;
    let mut rep = EstimatesReport {
        in_window: run.len(),
        skipped_degenerate: 0,
        pert_ratio: 0.0,
        scale_ratio: 0.0,
        drift_ratio: 0.0,
        note: String::new(),
    };
    for i in 0..run.len() {
        let f = &run[i].fit;
        if f.delta < floor {
            rep.skipped_degenerate += 1;
            continue;
        }
        let d2 = f.delta * f.delta;
        rep.pert_ratio = rep.pert_ratio.max(run[i].l_pert / d2);
        rep.scale_ratio = rep.scale_ratio.max(f.mu.powf(expo) / d2);
        if i > 0 && i + 1 < run.len() {
            let dl = (run[i + 1].fit.mu.ln() - run[i - 1].fit.mu.ln()) / (run[i + 1].t - run[i - 1].t);
            rep.drift_ratio = rep.drift_ratio.max(dl.abs() / (f.mu * f.mu * f.delta));
        }
    }
    if rep.skipped_degenerate == run.len() {
        rep.note = "δ vanishes on every in-window snapshot; ratios skipped".into();
    }
    Ok(rep)
}
