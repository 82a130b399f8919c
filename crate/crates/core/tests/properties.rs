use cnls::classify::{classify_report, default_tol, Region};
use cnls::corpus::{bump, gaussian};
use cnls::evolve::{cutoff, Stepper};
use cnls::functionals::{scale_h1inv, scale_l2inv, Evaluator};
use cnls::grid::{h1a_norm_sq, mass, power_integral};
use cnls::groundstate::build_bundle;
use cnls::{PhysParams, RadialField, RadialGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn admissible(d: u32, t: f64) -> PhysParams {
    let half = (d as f64 - 2.0) / 2.0;
    PhysParams::new(d, -half * half * t).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scalings_preserve_their_norms(d in 3u32..=5, w in 0.4f64..2.5, amp in 0.1f64..2.0, s in 0.3f64..3.0) {
        let p = admissible(d, 0.0);
        let g = RadialGrid::new(d, 40.0, 8192).unwrap();
        let u = RadialField::from_profile(&g, gaussian(w, Complex64::new(amp, 0.0)));
        let h = scale_h1inv(&u, s);
        prop_assert!(rel(power_integral(&h, p.q_crit()).unwrap(), power_integral(&u, p.q_crit()).unwrap()) < 1e-8);
        let l = scale_l2inv(&u, s);
        // the mass is the on-grid value, exact only up to the midpoint rule
        prop_assert!(rel(mass(&l).unwrap(), mass(&u).unwrap()) < 1e-4);
        // s^{d/2} u(s·) multiplies ∫|u|^q by s^{dq/2 - d}, which is s^q at the critical power
        let q = p.q_crit();
        let ratio = power_integral(&l, q).unwrap() / power_integral(&u, q).unwrap();
        prop_assert!(rel(ratio, s.powf(q)) < 1e-8);
    }

    #[test]
    fn report_is_gauge_invariant(t in 0.0f64..0.9, theta in 0.0f64..6.3, w in 0.5f64..2.0, amp in 0.1f64..1.5) {
        let p = admissible(3, t);
        let g = RadialGrid::new(3, 20.0, 2048).unwrap();
        let ev = Evaluator::new(&p, &g).unwrap();
        let u = RadialField::from_profile(&g, bump(2.0 * w, Complex64::new(amp, 0.0)));
        let r0 = ev.report(&u).unwrap();
        let r1 = ev.report(&u.scaled(Complex64::from_polar(1.0, theta))).unwrap();
        for (x, y) in [(r0.mass, r1.mass), (r0.kinetic_sq, r1.kinetic_sq), (r0.e_a, r1.e_a), (r0.k_a, r1.k_a)] {
            prop_assert!((x - y).abs() <= 1e-10 * (x.abs() + r0.kinetic_sq));
        }
    }

    #[test]
    fn regions_follow_their_definitions(t in 0.0f64..0.9, w in 0.1f64..3.0, amp in 0.05f64..3.0) {
        let p = admissible(3, t);
        let g = RadialGrid::new(3, 30.0, 4096).unwrap();
        let b = build_bundle(&p, &g).unwrap();
        let tol = default_tol(&b);
        let u = RadialField::from_profile(&g, gaussian(w, Complex64::new(amp, 0.0)));
        let r = Evaluator::new(&p, &g).unwrap().report(&u).unwrap();
        let v = classify_report(r, 3, &b, tol);
        let sub = r.e_a < b.m_a - tol;
        prop_assert_eq!(v.region == Region::ScatterSub, sub && r.kinetic_sq < b.kinetic_sq);
        prop_assert_eq!(v.region == Region::BlowupSub, sub && r.kinetic_sq > b.kinetic_sq);
        if !sub {
            prop_assert!(!v.region.is_sub());
        }
        prop_assert!((v.energy_margin - (b.m_a - r.e_a)).abs() <= 1e-12 * b.m_a.max(r.e_a.abs()));
    }

    #[test]
    fn stepper_conserves_discrete_mass(d in 3u32..=5, t in 0.0f64..0.9, w in 0.5f64..2.0, amp in 0.05f64..0.8, dt in 1e-4f64..1e-2, re in -1.0f64..1.0) {
        let p = admissible(d, t);
        let g = RadialGrid::new(d, 20.0, 512).unwrap();
        let st = Stepper::new(&p, &g, false).unwrap();
        let u = RadialField::from_profile(&g, gaussian(w, Complex64::new(amp, re * amp)));
        let mut v = u.values().to_vec();
        let m0 = st.observables(&v).mass;
        let mut scratch = Vec::new();
        for _ in 0..20 {
            st.step_in_place(&mut v, dt, &mut scratch).unwrap();
        }
        prop_assert!(rel(st.observables(&v).mass, m0) < 1e-12);
    }

    // Strang splitting around Crank-Nicolson is symmetric in time
    #[test]
    fn step_is_reversible(t in 0.0f64..0.9, w in 0.5f64..2.0, amp in 0.05f64..0.8, dt in 1e-4f64..1e-2) {
        let p = admissible(3, t);
        let g = RadialGrid::new(3, 20.0, 512).unwrap();
        let st = Stepper::new(&p, &g, false).unwrap();
        let u = RadialField::from_profile(&g, gaussian(w, Complex64::new(amp, 0.0)));
        let mut v = u.values().to_vec();
        let mut scratch = Vec::new();
        st.step_in_place(&mut v, dt, &mut scratch).unwrap();
        st.step_in_place(&mut v, -dt, &mut scratch).unwrap();
        let err = v.iter().zip(u.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12 * amp.max(1.0));
    }

    #[test]
    fn cutoff_is_a_monotone_step(r_in in 0.0f64..5.0, width in 0.1f64..5.0, x in 0.0f64..12.0, y in 0.0f64..12.0) {
        let r_out = r_in + width;
        let (a, b) = (cutoff(x.min(y), r_in, r_out), cutoff(x.max(y), r_in, r_out));
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(a >= b);
    }

    #[test]
    fn sobolev_bound_on_random_data(d in 3u32..=5, t in 0.0f64..0.9, w in 0.3f64..3.0, amp in 0.1f64..3.0, k in 0.0f64..2.0) {
        let p = admissible(d, t);
        let g = RadialGrid::new(d, 40.0, 8192).unwrap();
        let b = build_bundle(&p, &g).unwrap();
        let u = RadialField::from_profile(&g, gaussian(w, Complex64::new(amp, 0.0)))
            .add(&RadialField::from_profile(&g, bump(2.0 * w, Complex64::new(0.0, k * amp))))
            .unwrap();
        let lhs = power_integral(&u, p.q_crit()).unwrap().powf(1.0 / p.q_crit());
        let rhs = b.cgn * h1a_norm_sq(&u, &p).unwrap().sqrt();
        prop_assert!(lhs <= rhs * (1.0 + 1e-6));
    }
}
