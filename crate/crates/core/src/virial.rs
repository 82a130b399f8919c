//! Localized virial weights and the functionals `V_R`, `I_R`, `F_R`, `F_R^c`.
//!
//! The weight is `w_R(r) = R² φ(r/R)` with `φ(x) = x²` on `[0, 1]`, a degree
//! eight bridge on `[1, 2]` and the constant `31/14` beyond. The bridge keeps
//! `φ'' ≤ 2`, so `4 w_R'' ≤ 8` holds everywhere.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::functionals::Evaluator;
use crate::grid::{RadialField, RadialGrid, Stencil};
use crate::groundstate::ground_shape;
use crate::params::PhysParams;
use crate::profile::Profile;
use crate::quadrature::{gauss_legendre, near_origin};

/// Plateau value `φ(x)` for `x ≥ 2`.
pub const PLATEAU: f64 = 31.0 / 14.0;

/// `(φ, φ', φ'', φ''', φ'''')` at `x ≥ 0`.
pub fn phi(x: f64) -> [f64; 5] {
    if x <= 1.0 {
        [x * x, 2.0 * x, 2.0, 0.0, 0.0]
    } else if x < 2.0 {
        let s = x - 1.0;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let s6 = s5 * s;
        [
            1.0 + 2.0 * s + s2 - 22.0 * s5 + 43.0 * s6 - 212.0 / 7.0 * s6 * s + 7.5 * s4 * s4,
            2.0 * (1.0 - s).powi(4) * (30.0 * s3 + 14.0 * s2 + 5.0 * s + 1.0),
            2.0 - 440.0 * s3 + 1290.0 * s4 - 1272.0 * s5 + 420.0 * s6,
            -1320.0 * s2 + 5160.0 * s3 - 6360.0 * s4 + 2520.0 * s5,
            -2640.0 * s + 15480.0 * s2 - 25440.0 * s3 + 12600.0 * s4,
        ]
    } else {
        [PLATEAU, 0.0, 0.0, 0.0, 0.0]
    }
}

/// Closed-form derivatives of `w_R` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightPoint {
    pub w: f64,
    pub w1: f64,
    pub w2: f64,
    /// `w' / r`
    pub g: f64,
    /// `(w'/r)' = (w'' - w'/r) / r`
    pub g1: f64,
    pub lap: f64,
    pub bilap: f64,
}

#[derive(Debug, Clone)]
pub struct VirialWeight {
    radius: f64,
    d: u32,
    grid: Arc<RadialGrid>,
    /// `max r² |Δ²w_R|` over `[R, 2R]`
    bilap_const: f64,
    max_curvature: f64,
}

impl VirialWeight {
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn bilap_const(&self) -> f64 {
        self.bilap_const
    }
    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    pub fn at(&self, r: f64) -> WeightPoint {
        let rr = self.radius;
        let x = r / rr;
        let [f, f1, f2, f3, f4] = phi(x);
        let w = rr * rr * f;
        let w1 = rr * f1;
        let w2 = f2;
        let dm1 = self.d as f64 - 1.0;
        if x <= 1.0 {
            let d = self.d as f64;
            return WeightPoint {
                w,
                w1,
                w2,
                g: 2.0,
                g1: 0.0,
                lap: 2.0 * d,
                bilap: 0.0,
            };
        }
        let w3 = f3 / rr;
        let w4 = f4 / (rr * rr);
        WeightPoint {
            w,
            w1,
            w2,
            g: w1 / r,
            g1: (w2 - w1 / r) / r,
            lap: w2 + dm1 * w1 / r,
            bilap: w4 + 2.0 * dm1 * w3 / r + dm1 * (dm1 - 2.0) * (w2 / (r * r) - w1 / (r * r * r)),
        }
    }

    pub fn samples(&self) -> Vec<WeightPoint> {
        self.grid.nodes().iter().map(|&r| self.at(r)).collect()
    }
}

pub fn build_weight(radius: f64, grid: &Arc<RadialGrid>) -> Result<VirialWeight> {
    if !(radius >= 1.0) || 2.0 * radius > grid.r_max() {
        return Err(LabError::InvalidRadius(format!(
            "R = {radius} needs 1 ≤ R and 2R ≤ r_max = {}",
            grid.r_max()
        )));
    }
    let mut wt = VirialWeight {
        radius,
        d: grid.d(),
        grid: grid.clone(),
        bilap_const: 0.0,
        max_curvature: 0.0,
    };
    let m = 4096;
    let mut cap: f64 = 2.0;
    let mut c: f64 = 0.0;
    for k in 0..=m {
        let x = 1.0 + k as f64 / m as f64;
        cap = cap.max(phi(x)[2]);
        let r = x * radius;
        c = c.max(r * r * wt.at(r).bilap.abs());
    }
    if cap > 2.0 + 1e-9 {
        return Err(LabError::CurvatureCap { max_curvature: cap });
    }
    wt.max_curvature = cap;
    wt.bilap_const = c;
    Ok(wt)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct VirialSample {
    pub t: f64,
    pub v_r: f64,
    pub i_r: f64,
    pub f_r: f64,
    pub f_r_c: f64,
    pub f_inf_c: f64,
    /// Exact time derivative of the discrete `I_R` along the semi-discrete
    /// flow; tends to `f_r` as the grid refines.
    pub f_r_disc: f64,
    /// 1 when an in-window modulation fit was used for `f_mod`
    pub chi: f64,
    /// modulated derivative; equals `f_r` when `chi = 0`
    pub f_mod: f64,
}

/// A weight together with the operators needed to sample it.
#[derive(Debug, Clone)]
pub struct VirialProbe {
    weight: VirialWeight,
    params: PhysParams,
    eval: Evaluator,
    /// weight samples at nodes
    nodes: Vec<WeightPoint>,
    /// `w'/r` at the stencil faces
    face_g: Vec<f64>,
    /// `w'' - w'/r` at the plain midpoints `(i + 1) dr`
    mid_h: Vec<f64>,
}

impl VirialProbe {
    pub fn new(p: &PhysParams, weight: VirialWeight) -> Result<Self> {
        let eval = Evaluator::new(p, weight.grid())?;
        let st = eval.stencil();
        let g = weight.grid().clone();
        let nodes = weight.samples();
        let face_g = st.face_radii().iter().map(|&r| weight.at(r).g).collect();
        let mid_h = (0..g.n() - 1)
            .map(|i| {
                let r = g.face(i);
                let pt = weight.at(r);
                pt.w2 - pt.g
            })
            .collect();
        Ok(Self {
            weight,
            params: *p,
            eval,
            nodes,
            face_g,
            mid_h,
        })
    }

    pub fn weight(&self) -> &VirialWeight {
        &self.weight
    }

    fn stencil(&self) -> &Stencil {
        self.eval.stencil()
    }

    /// `Σ μ_i w(r_i) |u_i|²` in the cell weights of the stencil, which the
    /// time stepper conserves.
    pub fn v_r(&self, u: &RadialField) -> f64 {
        let mu = self.stencil().cell_weights();
        u.values()
            .iter()
            .zip(mu)
            .zip(&self.nodes)
            .map(|((z, m), pt)| z.norm_sqr() * m * pt.w)
            .sum()
    }

    /// `2 Im ∫ w' ∂_r u conj(u)` in the face form whose time derivative under
    /// the discrete flow matches `Σ μ w |u|²` exactly.
    pub fn i_r(&self, u: &RadialField) -> f64 {
        let st = self.stencil();
        let v = st.to_v(u.values());
        let c = st.coef();
        (0..v.len() - 1)
            .map(|i| c[i] * (self.nodes[i + 1].w - self.nodes[i].w) * (v[i + 1] * v[i].conj()).im)
            .sum::<f64>()
            * 2.0
    }

    /// `∫ k(r) |u|^q` for a node-sampled weight `k` that vanishes beyond
    /// `2R`; closed-form fields are integrated from their profile.
    fn weighted_power(&self, u: &RadialField, q: f64, k: impl Fn(&WeightPoint) -> f64) -> f64 {
        let g = u.grid();
        match u.profile() {
            Some(p) => {
                let rr = self.weight.radius;
                let (omega, dm1) = (g.omega(), g.d() as i32 - 1);
                let dens = |r: f64| omega * r.powi(dm1) * p.value(r).norm().powf(q);
                let inner = k(&self.weight.at(0.5 * rr));
                let mut s = if inner != 0.0 { inner * near_origin(rr, dens) } else { 0.0 };
                let (x, wq) = gauss_legendre(16);
                let panels = 32;
                let h = rr / panels as f64;
                for j in 0..panels {
                    let a = rr + j as f64 * h;
                    for (t, w) in x.iter().zip(&wq) {
                        let r = a + 0.5 * h * (t + 1.0);
                        s += 0.5 * h * w * k(&self.weight.at(r)) * dens(r);
                    }
                }
                s
            }
            None => u
                .values()
                .iter()
                .zip(g.weights())
                .zip(&self.nodes)
                .map(|((z, wt), pt)| k(pt) * z.norm().powf(q) * wt)
                .sum(),
        }
    }

    /// `4∫ w''|∂_r u|² + 4a∫ w'|u|²/r³`.
    ///
    /// The potential term is `4∫ a x·∇w/|x|⁴ |u|²`, which radially is
    /// `4a ∫ w'(r) |u|² r^{-3}`. Splitting `w'' = w'/r + (w'' - w'/r)` puts the
    /// first part on the kinetic density of `L_a`, whose transformed form is
    /// `r^{d-1-2σ}|∂_r(r^σ u)|² - σ ∂_r(r^{d-2}|u|²)`; the second part lives on
    /// `[R, 2R]` where `u` is smooth.
    fn hessian_terms(&self, u: &RadialField) -> f64 {
        let st = self.stencil();
        let g = u.grid();
        let dens = st.face_density(u.values());
        let t1: f64 = dens.iter().zip(&self.face_g).map(|(k, w)| k * w).sum();
        let sigma = st.sigma();
        let t1b: f64 = u
            .values()
            .iter()
            .zip(g.nodes())
            .zip(g.weights())
            .zip(&self.nodes)
            .map(|(((z, r), wt), pt)| sigma * pt.g1 / r * z.norm_sqr() * wt)
            .sum();
        let (omega, dm1, dr) = (g.omega(), g.d() as i32 - 1, g.dr());
        let vals = u.values();
        let t2: f64 = (0..g.n() - 1)
            .filter(|&i| self.mid_h[i] != 0.0)
            .map(|i| {
                let r = g.face(i);
                self.mid_h[i] * (vals[i + 1] - vals[i]).norm_sqr() / dr * omega * r.powi(dm1)
            })
            .sum();
        4.0 * (t1 + t1b + t2)
    }

    /// Discrete `dI_R/dt` along `i u_t = L_a u + N(|u|) u`.
    fn discrete_f(&self, u: &RadialField) -> f64 {
        let p = &self.params;
        let st = self.stencil();
        let lu = st.apply(u.values(), st.ghost(u));
        let y: Vec<Complex64> = u
            .values()
            .iter()
            .zip(&lu)
            .zip(st.r_sigma())
            .map(|((z, l), rs)| {
                let m = z.norm();
                let nl = -m.powf(p.p_crit()) + m.powf(p.p_pert());
                (l + z * nl) * rs
            })
            .collect();
        let v = st.to_v(u.values());
        let c = st.coef();
        (0..v.len() - 1)
            .map(|i| {
                let a = c[i] * (self.nodes[i + 1].w - self.nodes[i].w);
                a * ((v[i + 1] * y[i].conj()).re - (y[i + 1] * v[i].conj()).re)
            })
            .sum::<f64>()
            * 2.0
    }

    /// `(F_R^c, F_R)` from the closed-form expressions.
    pub fn f_pair(&self, u: &RadialField) -> (f64, f64) {
        let p = &self.params;
        let d = p.dim();
        let hess = self.hessian_terms(u);
        let bilap = self.weighted_power(u, 2.0, |pt| pt.bilap);
        let crit = self.weighted_power(u, p.q_crit(), |pt| pt.lap);
        let pert = self.weighted_power(u, p.q_pert(), |pt| pt.lap);
        let fc = hess - bilap - 4.0 / d * crit;
        (fc, fc + 4.0 / (d + 1.0) * pert)
    }

    pub fn sample(&self, u: &RadialField, t: f64) -> Result<VirialSample> {
        u.same_grid_as(self.weight.grid())?;
        u.check_finite()?;
        let r = self.eval.report(u)?;
        let (f_r_c, f_r) = self.f_pair(u);
        Ok(VirialSample {
            t,
            v_r: self.v_r(u),
            i_r: self.i_r(u),
            f_r,
            f_r_c,
            f_inf_c: 8.0 * (r.kinetic_sq - r.l_crit),
            f_r_disc: self.discrete_f(u),
            chi: 0.0,
            f_mod: f_r,
        })
    }

    /// `e^{iθ} μ^{(d-2)/2} W_a(μ ·)` on the probe grid.
    pub fn orbit_element(&self, theta: f64, mu: f64) -> RadialField {
        let d = self.params.dim();
        let prof = Profile::new(ground_shape(&self.params))
            .rescaled(mu, (d - 2.0) / 2.0)
            .times(Complex64::from_polar(1.0, theta));
        RadialField::from_profile(self.weight.grid(), prof)
    }

    /// `F_∞^c[u] + (F_R[u] - F_∞^c[u]) - χ (F_R^c[Ŵ] - F_∞^c[Ŵ])` with `χ = 1`
    /// exactly when an orbit element `(θ, μ)` is supplied.
    pub fn modulated_derivative(&self, u: &RadialField, orbit: Option<(f64, f64)>) -> Result<f64> {
        let r = self.eval.report(u)?;
        let f_inf = 8.0 * (r.kinetic_sq - r.l_crit);
        let (_, f_r) = self.f_pair(u);
        let corr = match orbit {
            None => 0.0,
            Some((theta, mu)) => {
                let w = self.orbit_element(theta, mu);
                let rw = self.eval.report(&w)?;
                self.f_pair(&w).0 - 8.0 * (rw.kinetic_sq - rw.l_crit)
            }
        };
        Ok(f_inf + (f_r - f_inf) - corr)
    }
}

pub fn virial_sample(u: &RadialField, p: &PhysParams, weight: &VirialWeight, t: f64) -> Result<VirialSample> {
    VirialProbe::new(p, weight.clone())?.sample(u, t)
}
