mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};
use std::time::Instant;

use horofill::coxeter::*;
use horofill::linalg::{angle, complement_basis, fmt12, fmt_vec, orthonormal_basis, project_onto, vector, Vector};
use horofill::Error;
use proptest::prelude::*;

use common::{a, a1a1, a2a1, at_angle, barycenter, generic_regular, hand_a2, hand_in_chamber, rows};

#[test]
fn a_family_orders() {
    for n in 2..=4 {
        let rs = build_root_system(RootSystemSpec::a(n)).unwrap();
        assert_eq!(rs.order(), (1..=n + 1).product::<usize>(), "A{n}");
    }
    let rs = a(2);
    assert_eq!(rs.order(), 6);
    assert_eq!(rs.reflections().len(), 3);
    let p = a1a1();
    assert_eq!(p.order(), 4);
    assert_eq!(p.reflections().len(), 2);
    assert!(p.reflections()[0].dot(&p.reflections()[1]).abs() < 1e-12);
    assert_eq!(a2a1().order(), 12);
}

#[test]
fn unsupported_specs_are_rejected() {
    for spec in [RootSystemSpec::a(1), RootSystemSpec::a(0), RootSystemSpec::product(vec![])] {
        match build_root_system(spec) {
            Err(Error::UnsupportedRootSystem(msg)) => assert!(!msg.is_empty()),
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn a2_simple_roots_match_hand_model() {
    let rs = a(2);
    let s = rs.simple_roots();
    assert!((angle(&s[0], &s[1]) - 2.0 * PI / 3.0).abs() < 1e-12);
    assert!((s[0].norm() - s[1].norm()).abs() < 1e-12);
    // the hand model is written with the first simple root along the x axis
    assert!(s[0][1].abs() < 1e-12 && s[0][0] > 0.0);
}

#[test]
fn a2_group_matches_hand_enumeration() {
    let rs = a(2);
    let ours: Vec<String> = {
        let mut v: Vec<String> = rs.elements().iter().map(|m| m.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(" ")).collect();
        v.sort();
        v
    };
    let hand: Vec<String> = {
        let mut v: Vec<String> = hand_a2().iter().map(|m| m.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(" ")).collect();
        v.sort();
        v
    };
    assert_eq!(ours, hand);
}

#[test]
fn a2_operations_match_hand_enumeration() {
    let rs = a(2);
    let hand = hand_a2();
    for deg in [0.0, 17.0, 30.0, 45.0, 60.0, 90.0, 133.0, 200.0, 271.0, 330.0] {
        let v = at_angle(deg);
        let orbit: Vec<Vector> = hand.iter().map(|m| m * &v).collect();
        let orbit = horofill::linalg::dedup_vectors(orbit, 1e-9);
        assert_eq!(rows(&weyl_orbit(&rs, &v).unwrap()), rows(&orbit), "orbit at {deg}");

        let rep = orbit.iter().find(|u| hand_in_chamber(u)).unwrap();
        assert_eq!(fmt_vec(project_to_chamber(&rs, &v).unwrap().direction()), fmt_vec(rep), "chamber image at {deg}");
    }
    for (t, b) in [(35.0, 80.0), (60.0, 60.0), (31.0, 89.0), (45.0, 50.0)] {
        let theta = Slope::new(&rs, at_angle(t)).unwrap();
        let beta = Slope::new(&rs, at_angle(b)).unwrap();
        let brute = hand
            .iter()
            .map(|m| (FRAC_PI_2 - angle(&at_angle(b), &(m * at_angle(t)))).abs())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(fmt12(ort_distance(&rs, &theta, &beta)), fmt12(brute), "ort distance at ({t}, {b})");
    }
}

#[test]
fn orbit_sizes() {
    let rs = a(2);
    let bary = barycenter(&rs);
    assert_eq!(weyl_orbit(&rs, bary.direction()).unwrap().len(), 6);
    let wall = rs.chamber_generators()[0].clone();
    assert_eq!(weyl_orbit(&rs, &wall).unwrap().len(), 3);
    let rs3 = a(3);
    let th = generic_regular(&rs3);
    assert_eq!(weyl_orbit(&rs3, th.direction()).unwrap().len(), 24);
    assert!(matches!(weyl_orbit(&rs, &vector(&[2.0, 0.0])), Err(Error::NotUnit(_))));
}

#[test]
fn project_to_chamber_examples() {
    let rs = a(2);
    let bary = barycenter(&rs);
    let same = project_to_chamber(&rs, bary.direction()).unwrap();
    assert!((same.direction() - bary.direction()).norm() < 1e-12);
    for w in rs.elements() {
        let img = project_to_chamber(&rs, &(w * bary.direction())).unwrap();
        assert!((img.direction() - bary.direction()).norm() < 1e-9);
    }
    let opp = project_to_chamber(&rs, &(-bary.direction())).unwrap();
    let brute = rs.orbit(&(-bary.direction())).into_iter().find(|u| rs.in_chamber(u)).unwrap();
    assert!((opp.direction() - &brute).norm() < 1e-9);
    assert!((opp.direction() - opposition(&rs, &bary).direction()).norm() < 1e-12);
}

#[test]
fn slope_certificate() {
    let rs = a(3);
    let th = generic_regular(&rs);
    assert!(th.is_regular());
    for (c, r) in th.certificate().iter().zip(rs.simple_roots()) {
        assert!((c - r.dot(th.direction())).abs() < 1e-15);
    }
    let outside = -th.direction().clone();
    match Slope::new(&rs, outside) {
        Err(e @ Error::NotInChamber { .. }) => assert!(e.to_string().contains("chamber certificate")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ort_distance_examples() {
    let rs = a1a1();
    let e1 = Slope::new(&rs, vector(&[1.0, 0.0])).unwrap();
    let e2 = Slope::new(&rs, vector(&[0.0, 1.0])).unwrap();
    assert!(ort_distance(&rs, &e1, &e2).abs() < 1e-12);
    assert!((ort_distance(&rs, &e1, &e1) - FRAC_PI_2).abs() < 1e-12);
    // A2 barycenter: the orbit directions sit at multiples of 60 degrees
    let a2 = a(2);
    let b = barycenter(&a2);
    assert!((ort_distance(&a2, &b, &b) - FRAC_PI_6).abs() < 1e-12);
}

#[test]
fn delta_zero_examples() {
    let rs = a1a1();
    let e1 = Slope::new(&rs, vector(&[1.0, 0.0])).unwrap();
    assert!(matches!(delta_zero(&rs, &e1), Err(Error::DegenerateSlope { .. })));

    let a2 = a(2);
    let dz = delta_zero(&a2, &barycenter(&a2)).unwrap();
    assert!(dz.delta0 > 0.0 && dz.delta0_prime > 0.0);

    let a3 = a(3);
    let t0 = Instant::now();
    let dz = delta_zero(&a3, &generic_regular(&a3)).unwrap();
    assert!(t0.elapsed().as_secs_f64() < 1.0);
    assert!(dz.delta0 > 0.0 && dz.delta0_prime > 0.0);
}

#[test]
fn delta_zero_gap_is_empty_by_enumeration() {
    for rs in [a(2), a(3), a2a1()] {
        let th = generic_regular(&rs);
        let dz = delta_zero(&rs, &th).unwrap();
        for s in coxeter_simplices(&rs) {
            let d = spherical_distance_to_cone(th.direction(), &s);
            let below = d > FRAC_PI_2 - dz.delta0 + 1e-9 && d < FRAC_PI_2 - 1e-9;
            let above = d > FRAC_PI_2 + 1e-9 && d < FRAC_PI_2 + dz.delta0_prime - 1e-9;
            assert!(!below && !above, "distance {d} inside the gap");
        }
    }
}

#[test]
fn good_slope_examples() {
    let a3 = a(3);
    let th = barycenter(&a3);
    let g = find_good_slope(&a3, &th, 0.05).unwrap();
    assert!(ort_distance(&a3, &th, &g.slope) > 0.05);
    assert!(wall_distance(&a3, g.slope.direction()) > 0.05);
    assert!((g.margin - g.ort_distance.min(g.wall_distance)).abs() < 1e-15);

    match find_good_slope(&a3, &th, PI) {
        Err(e @ Error::GoodSlopeNotFound { .. }) => assert!(e.to_string().contains("resolution")),
        other => panic!("{other:?}"),
    }

    let a2 = a(2);
    let g2 = find_good_slope(&a2, &barycenter(&a2), 0.01).unwrap();
    assert!(ort_distance(&a2, &barycenter(&a2), &g2.slope) > 0.01);
    assert!(find_good_slope(&a2, &barycenter(&a2), 0.0).is_err());
}

#[test]
fn factor_split_examples() {
    let rs = a1a1();
    let e1 = Slope::new(&rs, vector(&[1.0, 0.0])).unwrap();
    let split = factor_split(&rs, &e1);
    assert_eq!(split.factors.len(), 2);
    assert_eq!(split.parallel_to_factor, Some(1));

    let a3 = a(3);
    let s3 = factor_split(&a3, &generic_regular(&a3));
    assert_eq!(s3.factors.len(), 1);
    assert!(!s3.is_parallel());

    let p = a2a1();
    let th = generic_regular(&p);
    let sp = factor_split(&p, &th);
    assert_eq!(sp.factors.len(), 2);
    assert!(!sp.is_parallel());
    let norms: f64 = sp.factors.iter().map(|f| f.component.norm_squared()).sum();
    assert!((norms - 1.0).abs() < 1e-12);
    assert!(sp.factors.iter().all(|f| f.component.norm() > 1e-3));
}

fn skew_ok(rs: &RootSystem, n: &Vector, phi: &[Vector]) -> bool {
    let basis = orthonormal_basis(phi, 1e-12);
    let perp = complement_basis(&basis, rs.rank());
    project_onto(n, &basis).norm() > 1e-9 && project_onto(n, &perp).norm() > 1e-9
}

#[test]
fn skew_hyperplane_examples() {
    let a3 = a(3);
    let phi = vec![a3.simple_roots()[0].clone(), a3.simple_roots()[1].clone()];
    let n = skew_hyperplane(&a3, 0, &phi).unwrap();
    assert!(skew_ok(&a3, &n, &phi));
    // the normal is one of the chamber's walls
    assert!(a3.roots().iter().any(|r| (r / r.norm() - &n).norm() < 1e-9 || (r / r.norm() + &n).norm() < 1e-9));

    let p = a1a1();
    assert!(matches!(skew_hyperplane(&p, 0, &[vector(&[1.0, 0.0])]), Err(Error::NoSkewHyperplane)));

    let a2 = a(2);
    let line = vec![a2.chamber_generators()[0].clone()];
    let adjacent = (0..a2.order()).find(|&i| a2.elements()[i].determinant() < 0.0).unwrap();
    let n2 = skew_hyperplane(&a2, adjacent, &line).unwrap();
    assert!(skew_ok(&a2, &n2, &line));
    assert!(skew_hyperplane(&a2, a2.order(), &line).is_err());
}

fn unit_strategy(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-1.0f64..1.0, n)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| {
            let v = Vector::from_vec(v);
            &v / v.norm()
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn orbit_partition(v in unit_strategy(3)) {
        let rs = a(3);
        let base = project_to_chamber(&rs, &v).unwrap();
        for w in rs.elements() {
            let img = project_to_chamber(&rs, &(w * &v)).unwrap();
            prop_assert!((img.direction() - base.direction()).norm() < 1e-9);
        }
        let orbit = weyl_orbit(&rs, &v).unwrap();
        prop_assert_eq!(rs.order() % orbit.len(), 0);
        prop_assert_eq!(orbit.iter().filter(|u| rs.in_chamber(u) && (*u - base.direction()).norm() < 1e-9).count(), 1);
    }

    #[test]
    fn ort_distance_symmetric_and_opposition_invariant(u in unit_strategy(3), v in unit_strategy(3)) {
        for rs in [a(3), a2a1()] {
            let t = project_to_chamber(&rs, &u).unwrap();
            let b = project_to_chamber(&rs, &v).unwrap();
            let d = ort_distance(&rs, &t, &b);
            prop_assert!((d - ort_distance(&rs, &b, &t)).abs() < 1e-9);
            prop_assert!((d - ort_distance(&rs, &opposition(&rs, &t), &b)).abs() < 1e-9);
            prop_assert!((d - ort_distance(&rs, &t, &opposition(&rs, &b))).abs() < 1e-9);
        }
    }

    #[test]
    fn good_slopes_revalidate(u in unit_strategy(3), delta1 in 0.01f64..0.08) {
        let rs = a(3);
        let th = project_to_chamber(&rs, &u).unwrap();
        if let Ok(g) = find_good_slope(&rs, &th, delta1) {
            prop_assert!(ort_distance(&rs, &th, &g.slope) > delta1);
            prop_assert!(wall_distance(&rs, g.slope.direction()) > delta1);
        }
    }
}
