//! Gauss-Legendre rules and the semi-infinite tail integrator used for fields
//! that carry a closed form beyond the computational domain.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// `∫_{r0}^∞ f(r) dr` for an integrand with algebraic or faster decay.
///
/// Uses `r = r0 e^x`, which turns power-law decay into exponential decay, and
/// composite 16-point Gauss-Legendre panels of width 1/2 in `x`. Slow
/// power tails that outlast the panels are closed with the geometric series
/// of the last two panels; a non-decaying tail returns `+∞`.
pub fn semi_infinite(r0: f64, f: impl Fn(f64) -> f64) -> f64 {
    log_panels(r0, 1.0, f)
}

/// `∫_0^{r0} f(r) dr` for an integrand with an integrable power singularity
/// (or none) at the origin, by the same scheme with `r = r0 e^{-x}`.
pub fn near_origin(r0: f64, f: impl Fn(f64) -> f64) -> f64 {
    log_panels(r0, -1.0, f)
}

/// `∫_a^b f(r) dr`, `0 < a < b`, with panels of width at most 1/2 in
/// `log r`; used between breakpoints where `f` is smooth.
pub fn interval(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gl16();
    let len = (b / a).ln();
    let panels = (len / 0.5).ceil().max(1.0) as usize;
    let h = len / panels as f64;
    let mut total = 0.0;
    for panel in 0..panels {
        let x0 = panel as f64 * h;
        let mut s = 0.0;
        for (t, w) in nodes.iter().zip(weights) {
            let r = a * (x0 + 0.5 * h * (t + 1.0)).exp();
            s += w * f(r) * r;
        }
        total += 0.5 * h * s;
    }
    total
}

/// `∫_0^∞ f(r) dr` split at `breaks`, the radii where `f` or one of its
/// derivatives jumps (support edges of compact terms). Non-positive and
/// non-finite entries are ignored.
pub fn half_line(breaks: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut b: Vec<f64> = breaks.iter().copied().filter(|x| *x > 0.0 && x.is_finite()).collect();
    if b.is_empty() {
        b.push(1.0);
    }
    b.sort_by(f64::total_cmp);
    b.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * *y);
    let mut total = near_origin(b[0], &f);
    for w in b.windows(2) {
        total += interval(w[0], w[1], &f);
    }
    total + semi_infinite(b[b.len() - 1], &f)
}

fn log_panels(r0: f64, dir: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gl16();
    let h = 0.5;
    let mut total = 0.0;
    let mut quiet = 0;
    let (mut prev, mut last) = (0.0, 0.0);
    for panel in 0..160 {
        let x0 = panel as f64 * h;
        let mut s = 0.0;
        for (t, w) in nodes.iter().zip(weights) {
            let x = x0 + 0.5 * h * (t + 1.0);
            let r = r0 * (dir * x).exp();
            s += w * f(r) * r;
        }
        s *= 0.5 * h;
        total += s;
        prev = last;
        last = s;
        if total != 0.0 && s.abs() <= 1e-17 * total.abs() {
            quiet += 1;
            if quiet >= 3 {
                return total;
            }
        } else {
            quiet = 0;
        }
    }
    if total == 0.0 {
        return 0.0;
    }
    let rho = last / prev;
    if rho > 0.0 && rho < 1.0 - 1e-9 {
        total + last * rho / (1.0 - rho)
    } else {
        log::warn!("log-panel integral from r = {r0} does not converge");
        f64::INFINITY
    }
}
