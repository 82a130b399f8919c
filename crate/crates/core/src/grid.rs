//! Cell-centred radial grid, radial fields and the discrete operator
//! `L_a = -Δ + a/r²`.
//!
//! The operator is discretised in flux form after factoring out the `r^{-σ}`
//! behaviour at the origin (see [`Stencil`]). Its quadratic form is then a sum
//! of squares for every admissible `a`, and the operator is symmetric in a
//! set of cell weights close to the midpoint weights `ω r_i^{d-1} dr`.

use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{LabError, Result};
use crate::params::PhysParams;
use crate::profile::Profile;
use crate::quadrature::{half_line, semi_infinite};

/// Surface measure of the unit sphere in `R^d`.
pub fn unit_sphere_area(d: u32) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    d: u32,
    r_max: f64,
    n: usize,
    dr: f64,
    omega: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(d: u32, r_max: f64, n: usize) -> Result<Arc<Self>> {
        if !(3..=5).contains(&d) {
            return Err(LabError::InvalidDimension(d));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(LabError::InvalidGrid(format!("r_max = {r_max} must be positive")));
        }
        if n < 8 {
            return Err(LabError::InvalidGrid(format!("n = {n} is below the minimum of 8 cells")));
        }
        let dr = r_max / n as f64;
        let omega = unit_sphere_area(d);
        let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * dr).collect();
        let weights = nodes.iter().map(|r| omega * r.powi(d as i32 - 1) * dr).collect();
        Ok(Arc::new(Self {
            d,
            r_max,
            n,
            dr,
            omega,
            nodes,
            weights,
        }))
    }

    pub fn for_params(p: &PhysParams, r_max: f64, n: usize) -> Result<Arc<Self>> {
        Self::new(p.d(), r_max, n)
    }

    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dr(&self) -> f64 {
        self.dr
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    /// Midpoint weights `ω r_i^{d-1} dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    /// Radius of the face between cells `i` and `i + 1`.
    pub fn face(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.dr
    }

    /// Midpoint rule `ω Σ f(r_i) r_i^{d-1} dr`.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.n {
            return Err(LabError::GridMismatch(format!("{} samples on a {}-cell grid", f.len(), self.n)));
        }
        let mut s = 0.0;
        for (i, (v, w)) in f.iter().zip(&self.weights).enumerate() {
            if !v.is_finite() {
                return Err(LabError::NonFinite { what: "integrand", index: i });
            }
            s += v * w;
        }
        Ok(s)
    }
}

/// Complex samples of a radial function, optionally backed by a closed form
/// that is used beyond `r_max` and for exact rescaling.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
    profile: Option<Profile>,
}

impl RadialField {
    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Complex64::new(0.0, 0.0); grid.n],
            profile: None,
        }
    }

    pub fn from_values(grid: &Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(LabError::GridMismatch(format!(
                "{} samples on a {}-cell grid",
                values.len(),
                grid.n
            )));
        }
        let f = Self {
            grid: grid.clone(),
            values,
            profile: None,
        };
        f.check_finite()?;
        Ok(f)
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.nodes.iter().map(|&r| f(r)).collect(),
            profile: None,
        }
    }

    pub fn from_real_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    pub fn from_profile(grid: &Arc<RadialGrid>, profile: Profile) -> Self {
        let mut f = Self::from_fn(grid, |r| profile.value(r));
        f.profile = Some(profile);
        f
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn profile(&self) -> Option<&Profile> {
        self.profile.as_ref()
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    /// Drop the closed form, leaving only the samples.
    pub fn without_profile(mut self) -> Self {
        self.profile = None;
        self
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            Some(index) => Err(LabError::NonFinite { what: "field", index }),
            None => Ok(()),
        }
    }

    pub fn same_grid(&self, other: &RadialField) -> Result<()> {
        self.same_grid_as(&other.grid)
    }

    pub fn same_grid_as(&self, grid: &Arc<RadialGrid>) -> Result<()> {
        if Arc::ptr_eq(&self.grid, grid) || *self.grid == **grid {
            Ok(())
        } else {
            Err(LabError::GridMismatch("fields live on different grids".into()))
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * c).collect(),
            profile: self.profile.clone().map(|p| p.times(c)),
        }
    }

    pub fn scaled_re(&self, c: f64) -> Self {
        self.scaled(Complex64::new(c, 0.0))
    }

    /// `self + c * other`. The closed form survives when both fields carry one.
    pub fn axpy(&self, c: Complex64, other: &RadialField) -> Result<Self> {
        self.same_grid(other)?;
        let profile = match (&self.profile, &other.profile) {
            (Some(p), Some(q)) => Some(p.clone().plus(c, q)),
            _ => None,
        };
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
            profile,
        })
    }

    pub fn add(&self, other: &RadialField) -> Result<Self> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &RadialField) -> Result<Self> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Pointwise map of the samples; the closed form is discarded.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.grid.nodes.iter().zip(&self.values).map(|(&r, &z)| f(r, z)).collect(),
            profile: None,
        }
    }

    /// `u(r)` at an arbitrary radius: closed form when available, otherwise
    /// monotone cubic interpolation of the real and imaginary parts with a
    /// flat extension towards the origin and zero beyond the Dirichlet ghost.
    pub fn value_at(&self, r: f64) -> Complex64 {
        if let Some(p) = &self.profile {
            return p.value(r);
        }
        let g = &self.grid;
        let x = r / g.dr - 0.5;
        if x <= 0.0 {
            return self.values[0];
        }
        if x >= g.n as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = x.floor() as usize;
        let t = x - i as f64;
        let at = |k: isize| -> Complex64 {
            if k < 0 {
                self.values[0]
            } else if (k as usize) < g.n {
                self.values[k as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let k = i as isize;
        let (y0, y1, y2, y3) = (at(k - 1), at(k), at(k + 1), at(k + 2));
        Complex64::new(
            pchip(y0.re, y1.re, y2.re, y3.re, t),
            pchip(y0.im, y1.im, y2.im, y3.im, t),
        )
    }

    /// `r ↦ s^k u(s r)` on the same grid.
    pub fn rescaled(&self, s: f64, k: f64) -> Self {
        match &self.profile {
            Some(p) => Self::from_profile(&self.grid, p.clone().rescaled(s, k)),
            None => {
                let f = s.powf(k);
                Self::from_fn(&self.grid, |r| self.value_at(s * r) * f)
            }
        }
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn abs_sq(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Fritsch-Carlson cubic on the middle interval of four equispaced samples.
fn pchip(y0: f64, y1: f64, y2: f64, y3: f64, t: f64) -> f64 {
    let d0 = y1 - y0;
    let d1 = y2 - y1;
    let d2 = y3 - y2;
    let slope = |a: f64, b: f64| -> f64 {
        if a * b <= 0.0 {
            0.0
        } else {
            2.0 * a * b / (a + b)
        }
    };
    let m1 = slope(d0, d1);
    let m2 = slope(d1, d2);
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y1 + (t3 - 2.0 * t2 + t) * m1 + (-2.0 * t3 + 3.0 * t2) * y2 + (t3 - t2) * m2
}

const KAPPA_START: usize = 3;

/// Precomputed weights of the discrete `L_a` on one grid.
///
/// In the variable `s = r^β` the function `f(s) = r^σ u(r)` sees the ordinary
/// radial Laplacian in dimension `d`,
///
/// ```text
/// L_a u = -β² r^{2β-2} r^{-σ} (f_ss + (d-1)/s f_s),   Q(u) = βω ∫ s^{d-1} |f_s|² ds,
/// ```
///
/// and `W_a` becomes a smooth even function of `s`. The nodes stay uniform in
/// `r`; only the face coefficients and cell weights are taken in `s`.
#[derive(Debug, Clone)]
pub struct Stencil {
    grid: Arc<RadialGrid>,
    sigma: f64,
    beta: f64,
    /// `r_i^σ`
    rs: Vec<f64>,
    /// `s_{i+1} - s_i` with `s = r^β`; the last entry reaches the ghost node
    ds: Vec<f64>,
    /// `βω s_f^{d-1}` at faces `s_f = (s_i + s_{i+1})/2`; the last entry is the
    /// boundary face
    face_m: Vec<f64>,
    /// `face_m / (s_{i+1} - s_i)`
    coef: Vec<f64>,
    /// `ω r_i^{2σ+2-2β} (s_{i+1/2}^d - s_{i-1/2}^d) / (dβ)`, the measure in
    /// which the operator is symmetric
    cell_w: Vec<f64>,
    /// radii of the faces `s_f^{1/β}`
    face_r: Vec<f64>,
}

impl Stencil {
    pub fn new(grid: &Arc<RadialGrid>, p: &PhysParams) -> Result<Self> {
        if grid.d != p.d() {
            return Err(LabError::GridMismatch(format!("grid d = {} but params d = {}", grid.d, p.d())));
        }
        let (sigma, beta) = (p.sigma(), p.beta());
        let d = p.dim();
        let n = grid.n;
        let omega = grid.omega;
        let s: Vec<f64> = (0..=n).map(|i| ((i as f64 + 0.5) * grid.dr).powf(beta)).collect();
        // s_{i+1} - s_i without cancellation: r^β (exp(β ln(1 + dr/r)) - 1)
        let ds: Vec<f64> = (0..n)
            .map(|i| {
                let r = grid.nodes[i];
                s[i] * (beta * (grid.dr / r).ln_1p()).exp_m1()
            })
            .collect();
        // faces sit at the midpoints in s, which makes the scheme exact on
        // 1 and s², the leading terms of a smooth even f
        let sf = |i: usize| s[i] + 0.5 * ds[i];
        let g2 = |i: usize| sf(i).powf(d - 1.0) * (s[i + 1] + s[i]);
        let g4 = |i: usize| g2(i) * (s[i + 1] * s[i + 1] + s[i] * s[i]);
        // With κ ≡ 1 the local error near the origin is O(dr² r^{2β-2}), which
        // spoils second-order convergence in L² once β ≤ 2/3. There the face
        // multipliers are chosen cell by cell so that the scheme is also exact
        // on s⁴, then normalised to 1 in the far field. The first cells keep a
        // constant κ because the s⁴ condition degenerates there.
        let mut kappa = vec![1.0; n];
        if beta <= 2.0 / 3.0 {
            for i in KAPPA_START..n {
                let c = 2.0 * (d + 2.0) * s[i] * s[i] / d;
                kappa[i] = kappa[i - 1] * (g4(i - 1) - c * g2(i - 1)) / (g4(i) - c * g2(i));
            }
            let far = kappa[n - 1];
            kappa.iter_mut().for_each(|k| *k /= far);
        }
        let face_m: Vec<f64> = (0..n).map(|i| beta * omega * kappa[i] * sf(i).powf(d - 1.0)).collect();
        let coef = (0..n).map(|i| face_m[i] / ds[i]).collect();
        let cell_w = (0..n)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { kappa[i - 1] * g2(i - 1) };
                let m = (kappa[i] * g2(i) - lo) / (2.0 * d);
                let r = grid.nodes[i];
                omega * r.powf(2.0 * sigma + 2.0 - 2.0 * beta) * m / beta
            })
            .collect();
        let face_r = (0..n).map(|i| sf(i).powf(1.0 / beta)).collect();
        Ok(Self {
            grid: grid.clone(),
            sigma,
            beta,
            rs: grid.nodes.iter().map(|r| r.powf(sigma)).collect(),
            ds,
            face_m,
            coef,
            cell_w,
            face_r,
        })
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn r_sigma(&self) -> &[f64] {
        &self.rs
    }
    /// Face couplings `βω s_f^{d-1} / Δs`; `Q_h = Σ coef_f |Δf|²`.
    pub fn coef(&self) -> &[f64] {
        &self.coef
    }
    pub fn cell_weights(&self) -> &[f64] {
        &self.cell_w
    }
    /// Face radii; entry `i` lies between nodes `i` and `i + 1`.
    pub fn face_radii(&self) -> &[f64] {
        &self.face_r
    }

    /// Ghost value of `f` beyond the last node: the closed form when the
    /// field has one, zero otherwise.
    pub fn ghost(&self, u: &RadialField) -> Complex64 {
        let g = &self.grid;
        let r_ghost = g.r_max + 0.5 * g.dr;
        u.profile()
            .map(|pr| pr.value(r_ghost) * r_ghost.powf(self.sigma))
            .unwrap_or_default()
    }

    /// `f = r^σ u`.
    pub fn to_v(&self, u: &[Complex64]) -> Vec<Complex64> {
        u.iter().zip(&self.rs).map(|(z, s)| z * s).collect()
    }

    /// Discrete `L_a u`, with ghost value `f_n = ghost` outside the last cell.
    pub fn apply(&self, u: &[Complex64], ghost: Complex64) -> Vec<Complex64> {
        let n = self.grid.n;
        let v = self.to_v(u);
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let mut flux_lo = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let next = if i + 1 < n { v[i + 1] } else { ghost };
            let flux_hi = (next - v[i]) * self.coef[i];
            out[i] = -(flux_hi - flux_lo) * (self.rs[i] / self.cell_w[i]);
            flux_lo = flux_hi;
        }
        out
    }

    /// `Σ_f coef_f |Δf|²` over interior faces, plus the Dirichlet face at
    /// `r_max` when `dirichlet` is set.
    pub fn form(&self, u: &[Complex64], dirichlet: bool) -> f64 {
        let mut s: f64 = self.face_density(u).iter().sum();
        if dirichlet {
            let n = self.grid.n;
            s += self.coef[n - 1] * (u[n - 1] * self.rs[n - 1]).norm_sqr();
        }
        s
    }

    /// `df/ds` on interior faces.
    pub fn face_grad(&self, u: &[Complex64]) -> Vec<Complex64> {
        let v = self.to_v(u);
        (0..self.grid.n - 1).map(|i| (v[i + 1] - v[i]) / self.ds[i]).collect()
    }

    /// `df/ds` of a closed-form profile at the interior faces.
    pub fn face_grad_exact(&self, p: &Profile) -> Vec<Complex64> {
        let (sigma, beta) = (self.sigma, self.beta);
        (0..self.grid.n - 1)
            .map(|i| {
                let r = self.face_r[i];
                let dv = (p.deriv(r) * r + p.value(r) * sigma) * r.powf(sigma - 1.0);
                dv / (beta * r.powf(beta - 1.0))
            })
            .collect()
    }

    /// Face measures `βω s_f^{d-1} Δs_f` pairing two face gradients.
    pub fn face_measure(&self) -> Vec<f64> {
        (0..self.grid.n - 1).map(|i| self.face_m[i] * self.ds[i]).collect()
    }

    /// `Σ_f m_f g_f conj(h_f)` for face gradients `g`, `h`.
    pub fn pair(&self, g: &[Complex64], h: &[Complex64]) -> Complex64 {
        let m = self.face_measure();
        g.iter().zip(h).zip(&m).map(|((a, b), w)| a * b.conj() * w).sum()
    }

    /// Kinetic energy attributed to interior faces, `coef_f |Δf|²`.
    pub fn face_density(&self, u: &[Complex64]) -> Vec<f64> {
        let v = self.to_v(u);
        (0..self.grid.n - 1).map(|i| self.coef[i] * (v[i + 1] - v[i]).norm_sqr()).collect()
    }
}

/// `∫ |u|^q`. For `q > 2`, fields that carry a closed form are integrated
/// from it over the whole half-line; otherwise the midpoint rule on the grid.
/// The mass (`q = 2`) is always the on-grid value.
pub fn power_integral(u: &RadialField, q: f64) -> Result<f64> {
    u.check_finite()?;
    let g = u.grid();
    if q > 2.0 {
        if let Some(p) = u.profile() {
            let (omega, dm1) = (g.omega, g.d as i32 - 1);
            let f = |r: f64| omega * r.powi(dm1) * p.value(r).norm().powf(q);
            let mut breaks = p.breakpoints();
            breaks.push(g.r_max);
            return Ok(half_line(&breaks, f));
        }
    }
    let mut s = 0.0;
    for (z, w) in u.values.iter().zip(&g.weights) {
        s += z.norm().powf(q) * w;
    }
    Ok(s)
}

pub fn mass(u: &RadialField) -> Result<f64> {
    power_integral(u, 2.0)
}

pub fn lebesgue_norm(u: &RadialField, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(LabError::Precondition(format!("Lebesgue exponent q = {q} must be at least 1")));
    }
    Ok(power_integral(u, q)?.powf(1.0 / q))
}

/// `Q(u) = ∫ |∂_r u|² + a|u|²/r²`.
pub fn h1a_norm_sq(u: &RadialField, p: &PhysParams) -> Result<f64> {
    let st = Stencil::new(u.grid(), p)?;
    h1a_with(&st, u)
}

/// Same as [`h1a_norm_sq`] with a prebuilt stencil.
pub fn h1a_with(st: &Stencil, u: &RadialField) -> Result<f64> {
    u.check_finite()?;
    let g = u.grid();
    let mut q = st.form(&u.values, u.profile.is_none());
    match u.profile() {
        Some(pr) => {
            let (omega, dm1, sigma) = (g.omega, g.d as i32 - 1, st.sigma);
            let r0 = g.nodes[g.n - 1];
            q += semi_infinite(r0, |r| {
                omega * r.powi(dm1) * (pr.deriv(r) + pr.value(r) * (sigma / r)).norm_sqr()
            });
        }
        None => {
            let edge = u.values[g.n - 1].norm();
            let peak = u.max_abs();
            if peak > 0.0 && edge > 1e-6 * peak {
                log::warn!("field is {:.3e} of its peak at r_max; the Dirichlet edge is not negligible", edge / peak);
            }
        }
    }
    if q < -1e-10 {
        return Err(LabError::NegativeForm { value: q });
    }
    Ok(q.max(0.0))
}

/// Potential-free `‖∇u‖²`.
pub fn h1_norm_sq(u: &RadialField) -> Result<f64> {
    let p = PhysParams::new(u.grid().d(), 0.0)?;
    h1a_norm_sq(u, &p)
}

/// Discrete `L_a u`. Fields with a closed form use it for the ghost value,
/// others take the homogeneous Dirichlet ghost.
pub fn apply_la(u: &RadialField, p: &PhysParams) -> Result<RadialField> {
    let st = Stencil::new(u.grid(), p)?;
    RadialField::from_values(u.grid(), st.apply(&u.values, st.ghost(u)))
}
