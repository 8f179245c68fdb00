//! Property tests for the invariants every module promises.

mod common;

use num_integer::Integer;
use ortho_core::cusps::{phi_k, ImagQuadInt};
use ortho_core::geom::{
    busemann, convert, dist, dist_between, geodesic_flow, hopf, BoundaryPoint, GeomObject, Horoball, Model,
    ModelPoint, UnitTangent,
};
use ortho_core::hermitian::{Gauss, GaussMat, HermForm};
use ortho_core::qforms::{
    automorph_generator, canonical_rep, count_primitive_reps, equivalent, perp_length, perp_length_geometric,
    random_sl2, reduce, BinaryQF,
};
use ortho_core::quat::{HurwitzInt, QuatMatrix, Quaternion};
use ortho_core::report::{emit, parse_csv, CountReport, Format, Row};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn indefinite_form() -> impl Strategy<Value = BinaryQF> {
    (1i64..6, -6i64..7, -6i64..0)
        .prop_map(|(a, b, c)| BinaryQF::new(a, b, c))
        .prop_filter("primitive with nonsquare discriminant", |q| {
            let d = q.disc();
            let r = (d as f64).sqrt().round() as i128;
            r * r != d && q.a.gcd(&q.b).gcd(&q.c) == 1
        })
}

fn horizontal_dim() -> impl Strategy<Value = usize> {
    prop_oneof![Just(1usize), Just(2), Just(4)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn isometries_preserve_distance(seed in any::<u64>(), m in horizontal_dim()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_isometry(&mut rng, m);
        let (x, y) = (common::random_point(&mut rng, m), common::random_point(&mut rng, m));
        let d = dist(&x, &y).unwrap();
        prop_assert!(close(dist(&g.apply_point(&x).unwrap(), &g.apply_point(&y).unwrap()).unwrap(), d, 1e-9));
        prop_assert!(close(dist(&y, &x).unwrap(), d, 1e-12));
    }

    #[test]
    fn busemann_is_an_equivariant_cocycle(seed in any::<u64>(), m in horizontal_dim()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_isometry(&mut rng, m);
        let xi = common::random_boundary(&mut rng, m);
        let (x, y, z) = (
            common::random_point(&mut rng, m),
            common::random_point(&mut rng, m),
            common::random_point(&mut rng, m),
        );
        let b = |p: &_, q: &_| busemann(&xi, p, q).unwrap();
        prop_assert!(close(b(&x, &y) + b(&y, &z), b(&x, &z), 1e-9));
        prop_assert!(b(&x, &y).abs() <= dist(&x, &y).unwrap() + 1e-9);
        let gxi = g.apply_boundary(&xi, m).unwrap();
        let gb = busemann(&gxi, &g.apply_point(&x).unwrap(), &g.apply_point(&y).unwrap()).unwrap();
        prop_assert!(close(gb, b(&x, &y), 1e-9));
    }

    #[test]
    fn model_round_trips(seed in any::<u64>(), m in horizontal_dim()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::random_point(&mut rng, m);
        let p = ModelPoint::Uhs(x.clone());
        for to in [Model::Ball, Model::Hyperboloid] {
            let back = convert(&convert(&p, to).unwrap(), Model::UpperHalfSpace).unwrap();
            prop_assert!(close(back.dist(&p).unwrap(), 0.0, 1e-9));
        }
    }

    #[test]
    fn flow_translates_hopf_time(seed in any::<u64>(), m in horizontal_dim(), t in -4.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = common::random_point(&mut rng, m);
        let dir: Vec<f64> = (0..=m).map(|i| ((seed >> (8 * i)) & 0xff) as f64 - 127.5).collect();
        let v = UnitTangent::normalized(x, dir).unwrap();
        let (a0, b0, t0) = hopf(&v);
        let (a1, b1, t1) = hopf(&geodesic_flow(&v, t));
        prop_assert!(close(t1, t0 + t, 1e-9));
        for (p, q) in [(a0, a1), (b0, b1)] {
            match (p, q) {
                (BoundaryPoint::Finite(u), BoundaryPoint::Finite(w)) => {
                    prop_assert!(u.iter().zip(&w).all(|(s, r)| close(*s, *r, 1e-9)));
                }
                (p, q) => prop_assert_eq!(p, q),
            }
        }
    }

    #[test]
    fn horoball_distance_is_isometry_invariant(seed in any::<u64>(), m in horizontal_dim()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_isometry(&mut rng, m);
        let c = common::random_boundary(&mut rng, m);
        let h = GeomObject::Horoball(Horoball::new(c, 0.3).unwrap());
        let std = GeomObject::Horoball(Horoball::standard());
        let d = dist_between(&std, &h).unwrap();
        let gd = dist_between(&g.apply_object(&std, m).unwrap(), &g.apply_object(&h, m).unwrap()).unwrap();
        prop_assert!(close(gd, d, 1e-8));
    }

    #[test]
    fn discriminant_and_class_are_invariant(q in indefinite_form(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_sl2(&mut rng, 6);
        let qg = q.act(&g).unwrap();
        prop_assert_eq!(qg.disc(), q.disc());
        prop_assert!(equivalent(&q, &qg).unwrap());
        let (r, w) = reduce(&q).unwrap();
        prop_assert_eq!(q.act(&w).unwrap(), r);
    }

    #[test]
    fn perpendicular_two_routes(q in indefinite_form(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_sl2(&mut rng, 8);
        if let Ok(l) = perp_length(&q, &g) {
            prop_assert!((l - perp_length_geometric(&q, &g).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn canonical_rep_is_orbit_invariant(q in indefinite_form(), x in -40i64..40, y in -40i64..40, k in -3i32..4) {
        prop_assume!(x.gcd(&y) == 1 && q.eval(x, y) != 0);
        let g = automorph_generator(&q).unwrap();
        let step = if k >= 0 { g } else { g.inv() };
        let mut v = (x, y);
        for _ in 0..k.unsigned_abs() {
            match step.apply(v.0, v.1) {
                Ok(w) => v = w,
                Err(_) => return Ok(()),
            }
        }
        let c = canonical_rep(&q, x, y).unwrap();
        prop_assert_eq!(canonical_rep(&q, v.0, v.1).unwrap(), c);
        prop_assert_eq!(canonical_rep(&q, -v.0, -v.1).unwrap(), c);
        prop_assert_eq!(c.value as i128, q.eval(x, y));
    }

    #[test]
    fn phi_k_is_unit_invariant(m in -30i64..30, n in -30i64..30) {
        prop_assume!(m != 0 || n != 0);
        let q = ImagQuadInt::new(m, n, -4).unwrap();
        for u in ImagQuadInt::units(-4).unwrap() {
            prop_assert_eq!(phi_k(&q.mul(&u).unwrap()).unwrap(), phi_k(&q).unwrap());
        }
        prop_assert!(phi_k(&q).unwrap() <= q.norm());
    }

    #[test]
    fn hermitian_action_preserves_discriminant(a in 1i64..5, br in -4i64..5, bi in -4i64..5, c in -5i64..0, word in proptest::collection::vec((0u8..3, -3i64..4, -3i64..4), 1..6)) {
        let f = HermForm::new(a, Gauss::new(br, bi), c);
        let mut g = GaussMat::identity();
        for (kind, re, im) in word {
            let s = match kind {
                0 => GaussMat::translation(Gauss::new(re, im)),
                1 => GaussMat::inversion(),
                _ => GaussMat::rotation(),
            };
            g = g.mul(&s).unwrap();
        }
        let fg = f.act(&g).unwrap();
        prop_assert_eq!(fg.disc(), f.disc());
        let (u, v) = (Gauss::new(2, -1), Gauss::new(1, 3));
        let (gu, gv) = (g.a * u + g.b * v, g.c * u + g.d * v);
        prop_assert_eq!(fg.eval(u, v), f.eval(gu, gv));
    }

    #[test]
    fn dieudonne_is_multiplicative(v in proptest::collection::vec(-3.0f64..3.0, 32)) {
        let q = |i: usize| Quaternion::new(v[i], v[i + 1], v[i + 2], v[i + 3]);
        let a = QuatMatrix::new(q(0), q(4), q(8), q(12));
        let b = QuatMatrix::new(q(16), q(20), q(24), q(28));
        prop_assert!(close(a.mul(&b).dieudonne_det(), a.dieudonne_det() * b.dieudonne_det(), 1e-9));
    }

    #[test]
    fn hurwitz_integers_are_closed(x in proptest::array::uniform4(-50i64..50), y in proptest::array::uniform4(-50i64..50), ox in any::<bool>(), oy in any::<bool>()) {
        let mk = |t: [i64; 4], odd: bool| HurwitzInt::from_doubled(t.map(|v| 2 * v + odd as i64)).unwrap();
        let (u, w) = (mk(x, ox), mk(y, oy));
        let p = u.mul(w).unwrap();
        prop_assert_eq!(p.norm(), u.norm() * w.norm());
        prop_assert!(u.add(w).is_some());
        prop_assert_eq!(u.conj().mul(u).unwrap().norm(), u.norm() * u.norm());
    }

    #[test]
    fn csv_round_trips(counts in proptest::collection::vec((0.1f64..50.0, 0u64..1_000_000, 0.5f64..1e6), 1..10)) {
        let mut r = CountReport::new("roundtrip");
        for (s, n, p) in counts {
            r.push(Row::new(s, n, p).unwrap());
        }
        let rows = parse_csv(std::str::from_utf8(&emit(&r, Format::Csv)).unwrap()).unwrap();
        prop_assert_eq!(rows.len(), r.rows.len());
        for (a, b) in rows.iter().zip(&r.rows) {
            prop_assert_eq!(a.count, b.count);
            prop_assert!(close(a.s, b.s, 1e-15) && close(a.prediction, b.prediction, 1e-15));
        }
    }
}

#[test]
fn counts_do_not_depend_on_worker_count() {
    let q = BinaryQF::new(1, -1, -1);
    let run = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| {
                (
                    count_primitive_reps(&q, 20_000).unwrap(),
                    ortho_core::cusps::bianchi_cusp_count(-4, 7.0).unwrap(),
                    ortho_core::qforms::count_orbit_irrationals(&q, 300.0).unwrap(),
                )
            })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn primitive_counts_match_orbit_closure_for_more_forms() {
    for q in [BinaryQF::new(2, 1, -2), BinaryQF::new(3, 2, -2), BinaryQF::new(1, 0, -7)] {
        let oracle = common::psi_orbit_closure(&q, 300, 120, 1000.0);
        let v = ortho_core::qforms::primitive_rep_values(&q, 300).unwrap();
        for (i, &o) in oracle.iter().enumerate() {
            assert_eq!(v.psi((i + 1) as f64), o, "{q} at t = {}", i + 1);
        }
    }
}
