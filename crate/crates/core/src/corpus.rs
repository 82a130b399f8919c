//! Seeded families of test data: ground-state multiples, Gaussians, compact
//! bumps and mixtures of them. Every member carries its closed form.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{RadialField, RadialGrid};
use crate::groundstate::ground_shape;
use crate::params::PhysParams;
use crate::profile::{Profile, Shape};

#[derive(Debug, Clone)]
pub struct Member {
    pub label: String,
    pub field: RadialField,
}

/// Multiples of `W_a` that always lead the corpus.
pub const GROUND_MULTIPLES: [f64; 4] = [0.3, 0.5, 0.9, 1.2];

/// `exp(-r²/(2 w²))` scaled by `amp`.
pub fn gaussian(width: f64, amp: Complex64) -> Profile {
    Profile::term(Shape::Gaussian, amp, 1.0 / (2f64.sqrt() * width))
}

/// Smooth bump supported on `r < radius`.
pub fn bump(radius: f64, amp: Complex64) -> Profile {
    Profile::term(Shape::Bump, amp, 1.0 / radius)
}

fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// `W_a`, `W_0`, `c W_a` for `c` in [`GROUND_MULTIPLES`], then `n_random`
/// seeded Gaussians, bumps and mixtures.
pub fn corpus(p: &PhysParams, grid: &Arc<RadialGrid>, seed: u64, n_random: usize) -> Vec<Member> {
    let one = Complex64::new(1.0, 0.0);
    let w = Profile::new(ground_shape(p));
    let w0 = Profile::new(Shape::Ground { d: p.d(), beta: 1.0 });
    let mut out = vec![
        Member {
            label: "W_a".into(),
            field: RadialField::from_profile(grid, w.clone()),
        },
        Member {
            label: "W_0".into(),
            field: RadialField::from_profile(grid, w0),
        },
    ];
    for c in GROUND_MULTIPLES {
        out.push(Member {
            label: format!("{c}*W_a"),
            field: RadialField::from_profile(grid, w.clone().times(one * c)),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = grid.r_max() / 8.0;
    for k in 0..n_random {
        let (label, prof) = match k % 3 {
            0 => {
                let width = rng.gen_range(0.3..3.0f64.min(reach));
                (format!("gauss#{k}"), gaussian(width, polar(&mut rng, 0.05, 3.0)))
            }
            1 => {
                let radius = rng.gen_range(0.5..6.0f64.min(2.0 * reach));
                (format!("bump#{k}"), bump(radius, polar(&mut rng, 0.05, 3.0)))
            }
            _ => {
                let g = gaussian(rng.gen_range(0.3..2.0f64.min(reach)), polar(&mut rng, 0.05, 1.0));
                let b = bump(rng.gen_range(1.0..5.0f64.min(2.0 * reach)), polar(&mut rng, 0.05, 1.0));
                let c = polar(&mut rng, 0.0, 0.6);
                (format!("mix#{k}"), g.plus(one, &b).plus(c, &w))
            }
        };
        out.push(Member {
            label,
            field: RadialField::from_profile(grid, prof),
        });
    }
    out
}
