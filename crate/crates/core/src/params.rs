//! Physical parameters: dimension, inverse-square coupling and the exponents
//! derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Validated `(d, a)` pair together with every derived exponent.
///
/// `beta` and `sigma` parametrise the ground state: `a = ((d-2)/2)^2 (beta^2 - 1)`
/// and `sigma = (d-2)/2 (1 - beta)` is the exponent of the `r^{-sigma}`
/// behaviour of finite-energy solutions at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRecord", into = "ParamsRecord")]
pub struct PhysParams {
    d: u32,
    a: f64,
    beta: f64,
    sigma: f64,
    p_crit: f64,
    p_pert: f64,
}

/// Flat key-value form of [`PhysParams`] (keys `d`, `a`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub d: u32,
    pub a: f64,
}

impl TryFrom<ParamsRecord> for PhysParams {
    type Error = LabError;
    fn try_from(r: ParamsRecord) -> Result<Self> {
        PhysParams::new(r.d, r.a)
    }
}

impl From<PhysParams> for ParamsRecord {
    fn from(p: PhysParams) -> Self {
        ParamsRecord { d: p.d, a: p.a }
    }
}

/// Parameter windows of the two dichotomy regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SubThreshold,
    Threshold,
}

/// Result of an admissibility query. `margin` is the distance from `a` to the
/// nearest endpoint of the open interval; it is negative outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    pub margin: f64,
}

impl PhysParams {
    pub fn new(d: u32, a: f64) -> Result<Self> {
        if !(3..=5).contains(&d) {
            return Err(LabError::InvalidDimension(d));
        }
        let half = (d as f64 - 2.0) / 2.0;
        let bound = -half * half;
        if !a.is_finite() || a <= bound {
            return Err(LabError::BelowHardy { a, bound });
        }
        let beta = (1.0 + a / (half * half)).sqrt();
        let sigma = half - (half * half + a).sqrt();
        Ok(Self {
            d,
            a,
            beta,
            sigma,
            p_crit: 4.0 / (d as f64 - 2.0),
            p_pert: 4.0 / (d as f64 - 1.0),
        })
    }

    /// Parameters for the potential-free reference problem in the same dimension.
    pub fn free(&self) -> Self {
        Self::new(self.d, 0.0).expect("a = 0 is always admissible")
    }

    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn dim(&self) -> f64 {
        self.d as f64
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    /// Energy-critical power `4/(d-2)`.
    pub fn p_crit(&self) -> f64 {
        self.p_crit
    }
    /// Perturbation power `4/(d-1)`.
    pub fn p_pert(&self) -> f64 {
        self.p_pert
    }
    /// Critical Lebesgue exponent `2d/(d-2)`.
    pub fn q_crit(&self) -> f64 {
        2.0 * self.dim() / (self.dim() - 2.0)
    }
    /// Perturbation Lebesgue exponent `(2d+2)/(d-1)`.
    pub fn q_pert(&self) -> f64 {
        (2.0 * self.dim() + 2.0) / (self.dim() - 1.0)
    }
    /// Hardy lower bound `-(d-2)^2/4`.
    pub fn hardy_bound(&self) -> f64 {
        -(self.dim() - 2.0).powi(2) / 4.0
    }
    /// Sharp Hardy constant `1 + 4a/(d-2)^2`, the lower equivalence constant
    /// between the two homogeneous Sobolev norms.
    pub fn hardy_ratio(&self) -> f64 {
        1.0 + 4.0 * self.a / (self.dim() - 2.0).powi(2)
    }
    /// Effective dimension `d - 2 sigma` of the operator after removing the
    /// `r^{-sigma}` factor.
    pub fn eff_dim(&self) -> f64 {
        self.dim() - 2.0 * self.sigma
    }

    /// Interval `(lo, 0)` of admissible couplings for the regime.
    pub fn regime_interval(d: u32, regime: Regime) -> (f64, f64) {
        let d = d as f64;
        let k = match regime {
            Regime::SubThreshold => (d - 2.0) / (d + 2.0),
            Regime::Threshold => 2.0 * (d - 2.0) / (d + 2.0),
        };
        (-(d - 2.0).powi(2) / 4.0 + k * k, 0.0)
    }

    pub fn admissibility(&self, regime: Regime) -> Admissibility {
        let (lo, hi) = Self::regime_interval(self.d, regime);
        let margin = (self.a - lo).min(hi - self.a);
        Admissibility {
            admissible: self.a > lo && self.a < hi,
            margin,
        }
    }
}
