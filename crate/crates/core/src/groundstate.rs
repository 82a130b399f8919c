//! The ground state `W_a`, its scaling generator and the sharp constants built
//! from it.

use std::sync::Arc;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{LabError, Result};
use crate::grid::{self, RadialField, RadialGrid};
use crate::params::PhysParams;
use crate::profile::{Profile, Shape};

/// Relative Pohozaev tolerance `|Q(W) - ∫W^{2d/(d-2)}| / ∫W^{2d/(d-2)}`.
pub const POHOZAEV_TOL: f64 = 1e-4;

/// Default resolution for static functionals.
pub const DEFAULT_RMAX: f64 = 60.0;
pub const DEFAULT_N: usize = 16384;

pub fn ground_shape(p: &PhysParams) -> Shape {
    Shape::Ground {
        d: p.d(),
        beta: p.beta(),
    }
}

pub fn generator_shape(p: &PhysParams) -> Shape {
    Shape::Generator {
        d: p.d(),
        beta: p.beta(),
    }
}

/// Samples of `W_a` carrying its closed form.
pub fn eval_wa(p: &PhysParams, grid: &Arc<RadialGrid>) -> RadialField {
    RadialField::from_profile(grid, Profile::new(ground_shape(p)))
}

/// `W_1^a = (d-2)/2 W_a + r W_a'` from the analytic derivative.
pub fn eval_w1a(p: &PhysParams, grid: &Arc<RadialGrid>) -> RadialField {
    RadialField::from_profile(grid, Profile::new(generator_shape(p)))
}

/// `(πd(d-2)/4) [2√π β^{d-1} / Γ((d+1)/2)]^{2/d}`, kept for reporting only.
pub fn printed_closed_form(p: &PhysParams) -> f64 {
    let d = p.dim();
    let pi = std::f64::consts::PI;
    pi * d * (d - 2.0) / 4.0 * (2.0 * pi.sqrt() * p.beta().powf(d - 1.0) / gamma((d + 1.0) / 2.0)).powf(2.0 / d)
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateBundle {
    pub params: PhysParams,
    #[serde(skip)]
    pub w: RadialField,
    pub kinetic_sq: f64,
    pub crit_mass: f64,
    pub closed_form: f64,
    pub cgn: f64,
    pub m_a: f64,
    pub pohozaev_residual: f64,
}

impl GroundStateBundle {
    /// `crit_mass - closed_form`, nonzero in general; see [`printed_closed_form`].
    pub fn closed_form_gap(&self) -> f64 {
        self.crit_mass - self.closed_form
    }

    pub const CSV_HEADER: &'static str =
        "d,a,beta,sigma,kinetic_sq,crit_mass,closed_form,cgn,m_a,pohozaev_residual";

    pub fn csv_row(&self) -> String {
        use crate::io::fmt_f64 as f;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.params.d(),
            f(self.params.a()),
            f(self.params.beta()),
            f(self.params.sigma()),
            f(self.kinetic_sq),
            f(self.crit_mass),
            f(self.closed_form),
            f(self.cgn),
            f(self.m_a),
            f(self.pohozaev_residual)
        )
    }
}

pub fn build_bundle(p: &PhysParams, grid: &Arc<RadialGrid>) -> Result<GroundStateBundle> {
    if grid.d() != p.d() {
        return Err(LabError::GridMismatch(format!("grid d = {} but params d = {}", grid.d(), p.d())));
    }
    let w = eval_wa(p, grid);
    let kinetic_sq = grid::h1a_norm_sq(&w, p)?;
    let crit_mass = grid::power_integral(&w, p.q_crit())?;
    let residual = (kinetic_sq - crit_mass).abs() / crit_mass;
    if !(residual < POHOZAEV_TOL) {
        return Err(LabError::Pohozaev {
            residual,
            tolerance: POHOZAEV_TOL,
        });
    }
    Ok(GroundStateBundle {
        params: *p,
        w,
        kinetic_sq,
        crit_mass,
        closed_form: printed_closed_form(p),
        cgn: crit_mass.powf(1.0 / p.q_crit()) / kinetic_sq.sqrt(),
        m_a: kinetic_sq / p.dim(),
        pohozaev_residual: residual,
    })
}

/// `‖L_a W - W^{(d+2)/(d-2)}‖_{L²(r > 10 dr)} / ‖W^{(d+2)/(d-2)}‖_{L²}`.
pub fn elliptic_residual(p: &PhysParams, grid: &Arc<RadialGrid>) -> Result<f64> {
    let w = eval_wa(p, grid);
    let lw = grid::apply_la(&w, p)?;
    let e = (p.dim() + 2.0) / (p.dim() - 2.0);
    let cut = 10.0 * grid.dr();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid.n() {
        let r = grid.nodes()[i];
        let rhs = w.values()[i].re.powf(e);
        let wt = grid.weights()[i];
        den += rhs * rhs * wt;
        if r > cut {
            num += (lw.values()[i].re - rhs).powi(2) * wt;
        }
    }
    Ok((num / den).sqrt())
}
