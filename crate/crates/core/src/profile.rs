//! Closed-form radial profiles. A field that carries one can be evaluated (and
//! integrated) beyond the edge of its grid, which matters for the slowly
//! decaying ground state in low dimension.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Unit shapes. `Ground` is `W` with `W(0)`-normalisation from the closed form,
/// `Generator` is `((d-2)/2) W + r W'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Ground { d: u32, beta: f64 },
    Generator { d: u32, beta: f64 },
    /// `exp(-x^2)`
    Gaussian,
    /// `exp(1 - 1/(1 - x^2))` on `x < 1`, zero outside
    Bump,
}

impl Shape {
    /// Value and first derivative at `x > 0`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            Shape::Ground { d, beta } => {
                let w = ground(d, beta, x);
                (w, w * ground_log_deriv(d, beta, x))
            }
            Shape::Generator { d, beta } => {
                let h = (d as f64 - 2.0) / 2.0;
                let w = ground(d, beta, x);
                let dw = w * ground_log_deriv(d, beta, x);
                let t = x.powf(2.0 * beta);
                let g = (1.0 - t) / (1.0 + t);
                let dg = -4.0 * beta * t / x / ((1.0 + t) * (1.0 + t));
                let c = h * beta;
                (c * w * g, c * (dw * g + w * dg))
            }
            Shape::Gaussian => {
                let e = (-x * x).exp();
                (e, -2.0 * x * e)
            }
            Shape::Bump => {
                if x >= 1.0 {
                    return (0.0, 0.0);
                }
                let q = 1.0 - x * x;
                let e = (1.0 - 1.0 / q).exp();
                (e, -2.0 * x * e / (q * q))
            }
        }
    }
}

/// `W(r) = [d(d-2)β²]^{(d-2)/4} [r^{β-1}/(1+r^{2β})]^{(d-2)/2}`.
pub fn ground(d: u32, beta: f64, r: f64) -> f64 {
    let d = d as f64;
    let h = (d - 2.0) / 2.0;
    let c = (d * (d - 2.0) * beta * beta).powf(h / 2.0);
    // evaluate in log form to keep tiny/huge radii finite
    let lr = r.ln();
    let t = (2.0 * beta * lr).exp();
    c * (h * ((beta - 1.0) * lr - t.ln_1p())).exp()
}

/// `W'/W`.
pub fn ground_log_deriv(d: u32, beta: f64, r: f64) -> f64 {
    let h = (d as f64 - 2.0) / 2.0;
    let t = r.powf(2.0 * beta);
    h * ((beta - 1.0) / r - 2.0 * beta * t / (r * (1.0 + t)))
}

/// One closed-form term `amp * shape(scale * r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub shape: Shape,
    pub amp: Complex64,
    pub scale: f64,
}

/// A finite sum of closed-form terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub terms: Vec<Term>,
}

impl Profile {
    pub fn new(shape: Shape) -> Self {
        Self::term(shape, Complex64::new(1.0, 0.0), 1.0)
    }

    pub fn term(shape: Shape, amp: Complex64, scale: f64) -> Self {
        Self {
            terms: vec![Term { shape, amp, scale }],
        }
    }

    pub fn value(&self, r: f64) -> Complex64 {
        self.terms.iter().map(|t| t.amp * t.shape.eval(t.scale * r).0).sum()
    }

    pub fn deriv(&self, r: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.amp * (t.scale * t.shape.eval(t.scale * r).1))
            .sum()
    }

    pub fn times(mut self, c: Complex64) -> Self {
        self.terms.iter_mut().for_each(|t| t.amp *= c);
        self
    }

    /// `r ↦ s^k u(s r)`.
    pub fn rescaled(mut self, s: f64, k: f64) -> Self {
        let f = s.powf(k);
        self.terms.iter_mut().for_each(|t| {
            t.amp *= f;
            t.scale *= s;
        });
        self
    }

    /// Radii where a term stops being analytic: the support edges of bumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.terms
            .iter()
            .filter(|t| matches!(t.shape, Shape::Bump) && t.amp != Complex64::default())
            .map(|t| 1.0 / t.scale)
            .collect()
    }

    /// `self + c * other`, merging terms of equal shape and scale.
    pub fn plus(mut self, c: Complex64, other: &Profile) -> Self {
        for t in &other.terms {
            match self.terms.iter_mut().find(|s| s.shape == t.shape && s.scale == t.scale) {
                Some(s) => s.amp += c * t.amp,
                None => self.terms.push(Term {
                    amp: c * t.amp,
                    ..*t
                }),
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_matches_direct_formula() {
        for &(d, beta) in &[(3u32, 1.0), (3, 0.5), (4, 0.75), (5, 0.3)] {
            for &r in &[1e-3f64, 0.2, 1.0, 3.7, 80.0] {
                let dd = d as f64;
                let direct = (dd * (dd - 2.0) * beta * beta).powf((dd - 2.0) / 4.0)
                    * (r.powf(beta - 1.0) / (1.0 + r.powf(2.0 * beta))).powf((dd - 2.0) / 2.0);
                let w = ground(d, beta, r);
                assert!(((w - direct) / direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let shapes = [
            Shape::Ground { d: 3, beta: 0.5 },
            Shape::Generator { d: 4, beta: 0.8 },
            Shape::Generator { d: 3, beta: 1.0 },
            Shape::Gaussian,
            Shape::Bump,
        ];
        for s in shapes {
            for &x in &[0.3, 1.0, 2.5] {
                let h = 1e-6;
                let fd = (s.eval(x + h).0 - s.eval(x - h).0) / (2.0 * h);
                assert!((fd - s.eval(x).1).abs() < 1e-7, "{s:?} {x}");
            }
        }
    }

    #[test]
    fn sums_and_rescaling() {
        let one = Complex64::new(1.0, 0.0);
        let g = Profile::new(Shape::Gaussian);
        let w = Profile::new(Shape::Ground { d: 3, beta: 1.0 });
        let s = g.clone().plus(Complex64::new(2.0, 0.0), &w).plus(one, &g);
        assert_eq!(s.terms.len(), 2);
        let r = 0.7;
        let ex = 2.0 * (-r * r as f64).exp() + 2.0 * ground(3, 1.0, r);
        assert!((s.value(r).re - ex).abs() < 1e-15);
        let t = s.rescaled(2.0, 1.5);
        assert!((t.value(r / 2.0).re - 2f64.powf(1.5) * ex).abs() < 1e-13);
    }

    #[test]
    fn generator_is_scaling_derivative() {
        let (d, beta) = (3u32, 0.5);
        let g = Shape::Generator { d, beta };
        let h = 1e-5;
        for &r in &[0.1, 1.0, 4.0] {
            let f = |l: f64| l.powf(0.5) * ground(d, beta, l * r);
            let fd = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
            assert!((fd - g.eval(r).0).abs() < 1e-8);
        }
        assert!(Shape::Generator { d: 3, beta: 1.0 }.eval(1.0).0.abs() < 1e-15);
    }
}
