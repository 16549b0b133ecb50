use backward_orbits::catalog::SelfMap;
use backward_orbits::cli::load_map;
use backward_orbits::geometry::{horofunction, kob_dist, Automorphism, BallPoint, BoundaryPoint};
use backward_orbits::orbit::{
    construct_backward_orbit, read_orbit_csv, write_orbit_csv, OrbitParams,
};
use backward_orbits::suite;
use num_complex::Complex64;
use proptest::prelude::*;

/// A point of `B^q` with `|z| ≤ r_max`, from unconstrained coordinates.
fn point(q: usize, r_max: f64) -> impl Strategy<Value = BallPoint> {
    (
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), q),
        0.0..1.0f64,
    )
        .prop_map(move |(v, t)| {
            let n = v
                .iter()
                .map(|(a, b)| a * a + b * b)
                .sum::<f64>()
                .sqrt()
                .max(1e-9);
            let r = r_max * t;
            let c: Vec<Complex64> = v
                .iter()
                .map(|(a, b)| Complex64::new(a / n * r, b / n * r))
                .collect();
            BallPoint::from_c64(&c).unwrap()
        })
}

fn boundary(q: usize) -> impl Strategy<Value = BoundaryPoint> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), q)
        .prop_filter("non-zero", |v| {
            v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
        })
        .prop_map(|v| {
            let n = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            let c: Vec<Complex64> = v
                .iter()
                .map(|(a, b)| Complex64::new(a / n, b / n))
                .collect();
            BoundaryPoint::from_c64(&c).unwrap()
        })
}

fn catalog() -> Vec<SelfMap> {
    vec![
        suite::hyperbolic_map().unwrap(),
        suite::blaschke_map().unwrap(),
        suite::cleared_blaschke().unwrap(),
        load_map("blaschke:zeros=0.2,0.3;-0.4,0.1;0;rotation=0.6,0.8").unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn automorphisms_are_isometries(a in point(2, 0.9), z in point(2, 0.99), w in point(2, 0.99)) {
        let g = Automorphism::mobius_involution(&a);
        let before = kob_dist(&z, &w).unwrap();
        let after = kob_dist(&g.apply(&z).unwrap(), &g.apply(&w).unwrap()).unwrap();
        prop_assert!((before - after).abs() <= 1e-10 * (1.0 + before));
    }

    #[test]
    fn triangle_inequality(x in point(2, 0.999), y in point(2, 0.999), z in point(2, 0.999)) {
        let xz = kob_dist(&x, &z).unwrap();
        let xy = kob_dist(&x, &y).unwrap();
        let yz = kob_dist(&y, &z).unwrap();
        prop_assert!(xz <= xy + yz + 1e-12 * (1.0 + xz));
        prop_assert!((xy - kob_dist(&y, &x).unwrap()).abs() < 1e-12 * (1.0 + xy));
    }

    #[test]
    fn schwarz_pick(which in 0usize..4, z in point(1, 0.995), w in point(1, 0.995)) {
        let f = &catalog()[which];
        let d = kob_dist(&z, &w).unwrap();
        let fd = kob_dist(&f.apply(&z).unwrap(), &f.apply(&w).unwrap()).unwrap();
        prop_assert!(fd <= d + 1e-10 * (1.0 + d), "{}: {fd} > {d}", f.label());
    }

    #[test]
    fn julia_inclusion(which in 0usize..3, z in point(1, 0.999999)) {
        // h(f(z), 1) ≤ h(z, 1) + log 3 for the maps with dilation 3 at 1
        let f = &catalog()[which];
        let zeta = BoundaryPoint::e1(1);
        let h = horofunction(&z, &zeta).unwrap();
        let fh = horofunction(&f.apply(&z).unwrap(), &zeta).unwrap();
        prop_assert!(fh <= h + 3f64.ln() + 1e-9 * (1.0 + h.abs()), "{}: {fh} vs {h}", f.label());
    }

    #[test]
    fn horofunction_is_rotation_equivariant(z in point(2, 0.99), zeta in boundary(2), theta in 0.0..std::f64::consts::TAU) {
        let rot = Complex64::new(theta.cos(), theta.sin());
        let rz = BallPoint::from_c64(&z.to_c64().iter().map(|c| c * rot).collect::<Vec<_>>()).unwrap();
        let rzeta = BoundaryPoint::from_c64(&zeta.to_c64().iter().map(|c| c * rot).collect::<Vec<_>>()).unwrap();
        let a = horofunction(&z, &zeta).unwrap();
        let b = horofunction(&rz, &rzeta).unwrap();
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn constructed_steps_are_monotone(t in 0.0..1.0f64, lambda in 1.5..6.0f64, zeta in boundary(2)) {
        // deep enough to reach 1e-4 of ζ, shallow enough that λ^k stays well inside double-double
        let lo = (2e5f64.ln() / lambda.ln()).ceil();
        let hi = (25.0 * 10f64.ln() / lambda.ln()).floor();
        let k_max = (lo + t * (hi - lo)).round() as u32;
        let g = Automorphism::hyperbolic(&zeta, lambda).unwrap();
        let f = SelfMap::automorphism(g);
        let params = OrbitParams { k_max, ..OrbitParams::default() };
        let r = construct_backward_orbit(&f, &zeta, lambda, &params).unwrap();
        let steps = r.orbit.steps();
        for w in steps.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * (1.0 + w[0]));
        }
        prop_assert!((steps.last().unwrap() - lambda.ln()).abs() < 1e-3);
    }

    #[test]
    fn blaschke_steps_are_monotone(k_max in 10u32..40) {
        let b = suite::cleared_blaschke().unwrap();
        let params = OrbitParams { k_max, ..OrbitParams::default() };
        let r = construct_backward_orbit(&b, &BoundaryPoint::e1(1), 3.0, &params).unwrap();
        let steps = r.orbit.steps();
        for w in steps.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12 * (1.0 + w[0]));
        }
    }

    #[test]
    fn csv_round_trip(k_max in 10u32..30) {
        let b = suite::cleared_blaschke().unwrap();
        let params = OrbitParams { k_max, ..OrbitParams::default() };
        let o = construct_backward_orbit(&b, &BoundaryPoint::e1(1), 3.0, &params).unwrap().orbit;
        let mut buf = Vec::new();
        write_orbit_csv(&o, &mut buf).unwrap();
        let back = read_orbit_csv(buf.as_slice(), o.zeta(), "round trip").unwrap();
        prop_assert_eq!(back.len(), o.len());
        for (p, q) in o.points().iter().zip(back.points()) {
            prop_assert!(p.dist_euclid(q) < 1e-29);
        }
    }
}
