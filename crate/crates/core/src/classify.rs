//! Sub-threshold classification against the ground-state energy `m_a`, with
//! the quantitative bounds on `K_a` as checkable predicates.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::functionals::{self, mu_bar, EnergyReport, Evaluator};
use crate::grid::RadialField;
use crate::groundstate::GroundStateBundle;
use crate::params::PhysParams;

/// Default energy tolerance relative to `m_a`.
pub const TOL_E_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    ScatterSub,
    BlowupSub,
    ScatterThreshold,
    BlowupThreshold,
    GroundStateOrbit,
    AboveThreshold,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::ScatterSub => "ScatterSub",
            Region::BlowupSub => "BlowupSub",
            Region::ScatterThreshold => "ScatterThreshold",
            Region::BlowupThreshold => "BlowupThreshold",
            Region::GroundStateOrbit => "GroundStateOrbit",
            Region::AboveThreshold => "AboveThreshold",
        }
    }

    pub fn is_sub(self) -> bool {
        matches!(self, Region::ScatterSub | Region::BlowupSub)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifierVerdict {
    pub report: EnergyReport,
    pub m_a: f64,
    pub kinetic_ground_sq: f64,
    pub region: Region,
    /// `m_a - E_a(u)`
    pub energy_margin: f64,
    /// `‖W_a‖² - ‖u‖²`
    pub kinetic_margin: f64,
    pub note: String,
}

impl ClassifierVerdict {
    pub const CSV_HEADER: &'static str = "region,m_a,kinetic_ground_sq,energy_margin,kinetic_margin,e_a,e_a_crit,kinetic_sq,k_a,note";

    pub fn csv_row(&self) -> String {
        use crate::io::fmt_f64 as f;
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.region.name(),
            f(self.m_a),
            f(self.kinetic_ground_sq),
            f(self.energy_margin),
            f(self.kinetic_margin),
            f(self.report.e_a),
            f(self.report.e_a_crit),
            f(self.report.kinetic_sq),
            f(self.report.k_a),
            self.note.replace(',', ";")
        )
    }
}

pub fn default_tol(bundle: &GroundStateBundle) -> f64 {
    TOL_E_REL * bundle.m_a
}

/// Classification from a precomputed report.
pub fn classify_report(report: EnergyReport, d: u32, bundle: &GroundStateBundle, tol_e: f64) -> ClassifierVerdict {
    let m = bundle.m_a;
    let kg = bundle.kinetic_sq;
    let e = report.e_a;
    let k = report.kinetic_sq;
    let mut note = String::new();
    let region = if (e - m).abs() <= tol_e && (k - kg).abs() <= tol_e * d as f64 {
        Region::GroundStateOrbit
    } else if e < m - tol_e {
        if k < kg {
            Region::ScatterSub
        } else if k > kg {
            Region::BlowupSub
        } else {
            // excluded below threshold; fall back on the sign of K
            note.push_str("kinetic equals ground value; split by sign of K_a");
            if report.k_a >= 0.0 {
                Region::ScatterSub
            } else {
                Region::BlowupSub
            }
        }
    } else if e <= m + tol_e {
        if k < kg {
            Region::ScatterThreshold
        } else {
            Region::BlowupThreshold
        }
    } else {
        Region::AboveThreshold
    };
    if region == Region::AboveThreshold && (report.e_a_crit - m).abs() <= tol_e {
        note.push_str("critical energy sits at m_a; the defocusing term l_pert > 0 lifts E_a above it");
    }
    ClassifierVerdict {
        report,
        m_a: m,
        kinetic_ground_sq: kg,
        region,
        energy_margin: m - e,
        kinetic_margin: kg - k,
        note,
    }
}

pub fn classify(u: &RadialField, p: &PhysParams, bundle: &GroundStateBundle, tol_e: f64) -> Result<ClassifierVerdict> {
    if !(tol_e > 0.0) {
        return Err(LabError::Precondition(format!("tol_E must be positive, got {tol_e}")));
    }
    let report = functionals::report(u, p)?;
    Ok(classify_report(report, p.d(), bundle, tol_e))
}

fn require_sub(r: &EnergyReport, bundle: &GroundStateBundle) -> Result<()> {
    if r.e_a < bundle.m_a {
        Ok(())
    } else {
        Err(LabError::Precondition(format!(
            "E_a = {} is not below m_a = {}",
            r.e_a, bundle.m_a
        )))
    }
}

/// Whether `K_a ≥ 0` agrees with `‖u‖² ≤ ‖W_a‖²` for a sub-threshold datum.
pub fn k_region_equivalence(r: &EnergyReport, bundle: &GroundStateBundle) -> Result<bool> {
    require_sub(r, bundle)?;
    Ok((r.k_a >= 0.0) == (r.kinetic_sq <= bundle.kinetic_sq))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KBounds {
    pub k_a: f64,
    /// `(2d/(d-2)) (m_a - E_a)`
    pub energy_branch: f64,
    /// `(2/(2d-3)) ‖u‖² + (2d/((2d-3)(d+1))) l_pert`
    pub kinetic_branch: f64,
    /// The bound actually tested: `-energy_branch` when `K < 0`, the min of
    /// both branches otherwise.
    pub bound: f64,
    pub ok: bool,
}

pub fn uniform_k_bounds(r: &EnergyReport, d: u32, bundle: &GroundStateBundle) -> Result<KBounds> {
    require_sub(r, bundle)?;
    let dd = d as f64;
    let energy_branch = mu_bar(d) * (bundle.m_a - r.e_a);
    let kinetic_branch =
        2.0 / (2.0 * dd - 3.0) * r.kinetic_sq + 2.0 * dd / ((2.0 * dd - 3.0) * (dd + 1.0)) * r.l_pert;
    let (bound, ok) = if r.k_a < 0.0 {
        (-energy_branch, r.k_a <= -energy_branch)
    } else {
        let b = energy_branch.min(kinetic_branch);
        (b, r.k_a >= b)
    };
    Ok(KBounds {
        k_a: r.k_a,
        energy_branch,
        kinetic_branch,
        bound,
        ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrappingSide {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trapping {
    pub trapped: bool,
    pub side: Option<TrappingSide>,
    pub note: String,
}

/// Whether a recorded kinetic trajectory stays strictly on one side of
/// `‖W_a‖²`. Samples within `1e-12` relative of it count as touching.
pub fn energy_trapping(kinetic: &[f64], bundle: &GroundStateBundle) -> Trapping {
    let kg = bundle.kinetic_sq;
    let touch = |k: f64| (k - kg).abs() <= 1e-12 * kg;
    if kinetic.is_empty() {
        return Trapping {
            trapped: false,
            side: None,
            note: "empty trajectory".into(),
        };
    }
    if let Some(i) = kinetic.iter().position(|&k| touch(k)) {
        return Trapping {
            trapped: false,
            side: None,
            note: format!("sample {i} sits on the ground kinetic value"),
        };
    }
    let side = if kinetic[0] < kg {
        TrappingSide::Below
    } else {
        TrappingSide::Above
    };
    let crossing = kinetic.iter().position(|&k| match side {
        TrappingSide::Below => k >= kg,
        TrappingSide::Above => k <= kg,
    });
    match crossing {
        None => Trapping {
            trapped: true,
            side: Some(side),
            note: String::new(),
        },
        Some(i) => Trapping {
            trapped: false,
            side: Some(side),
            note: format!("crossed the ground kinetic value at sample {i}"),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub s: f64,
    pub k_a: f64,
    pub h_a: f64,
    pub iterations: usize,
}

/// Bisection on the mass-preserving scale for a zero of `K_a`, starting
/// from a datum with `K_a < 0`.
pub fn minimization_witness(u: &RadialField, ev: &Evaluator, tol_k: f64) -> Result<Witness> {
    let at = |s: f64| ev.report(&functionals::scale_l2inv(u, s));
    let r1 = at(1.0)?;
    if !(r1.k_a < 0.0) {
        return Err(LabError::Precondition(format!("K_a = {} is not negative", r1.k_a)));
    }
    // K > 0 for small s since the quadratic part dominates
    let mut lo = 0.5;
    let mut r_lo = at(lo)?;
    let mut tries = 0;
    while r_lo.k_a <= 0.0 {
        lo *= 0.5;
        r_lo = at(lo)?;
        tries += 1;
        if tries > 60 {
            return Err(LabError::FitNonConvergence {
                iterations: tries,
                residuals: [lo, r_lo.k_a],
            });
        }
    }
    let mut hi = 1.0;
    let mut best = (lo, r_lo);
    for it in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = at(mid)?;
        if r.k_a.abs() < best.1.k_a.abs() {
            best = (mid, r);
        }
        if r.k_a.abs() < tol_k {
            return Ok(Witness {
                s: mid,
                k_a: r.k_a,
                h_a: r.h_a,
                iterations: it + 1,
            });
        }
        if r.k_a > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(LabError::FitNonConvergence {
        iterations: 200,
        residuals: [best.0, best.1.k_a],
    })
}
