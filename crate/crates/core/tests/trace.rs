mod common;

use std::sync::Arc;

use horofill::coxeter::{delta_zero, find_good_slope, ort_distance, project_to_chamber, RootSystem, Slope};
use horofill::linalg::{dist, solve, rows_matrix, unit, vector, Vector};
use horofill::trace::*;
use horofill::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{a, a1a1, a2a1, barycenter, generic_regular};

/// A1 x A1 with the diagonal slope: the orbit of the opposite slope is `(+-1, +-1)/sqrt 2`.
fn diagonal_slab(offset: f64) -> BusemannTrace {
    let rs = a1a1();
    let th = Slope::from_direction(&rs, &vector(&[1.0, 1.0])).unwrap();
    let g = unit(&vector(&[1.0, 1.0])).unwrap();
    BusemannTrace::new(
        rs,
        th,
        vec![Piece { gradient: g.clone(), offset }, Piece { gradient: -g, offset }],
    )
    .unwrap()
}

/// A2 with a wall slope: three gradients at 120 degrees, offsets zero.
fn a2_triangle() -> BusemannTrace {
    let rs = a(2);
    let th = Slope::new(&rs, rs.chamber_generators()[0].clone()).unwrap();
    BusemannTrace::symmetric(rs, th, 0.0).unwrap()
}

/// A3 with a root slope; the gradient orbit is the set of unit roots.
fn a3_root_trace(pieces: &[(usize, f64)]) -> BusemannTrace {
    let rs = a(3);
    let r = rs.roots()[0].clone();
    let th = project_to_chamber(&rs, &(&r / r.norm())).unwrap();
    BusemannTrace::from_indices(rs, th, pieces).unwrap()
}

fn orthogonal_orbit_pair(tr: &BusemannTrace) -> (usize, usize) {
    let o = tr.gradient_orbit();
    for i in 0..o.len() {
        for j in i + 1..o.len() {
            if o[i].dot(&o[j]).abs() < 1e-12 {
                return (i, j);
            }
        }
    }
    unreachable!("A3 has orthogonal roots")
}

#[test]
fn trace_validation() {
    let rs = a(2);
    let th = barycenter(&rs);
    assert_eq!(BusemannTrace::symmetric(rs.clone(), th.clone(), 0.0).unwrap().pieces().len(), 6);
    let bad = Piece { gradient: vector(&[0.0, 1.0]), offset: 0.0 };
    assert!(matches!(BusemannTrace::new(rs.clone(), th.clone(), vec![bad]), Err(Error::InvalidTrace(_))));
    assert!(BusemannTrace::new(rs.clone(), th.clone(), vec![]).is_err());
    let too_many: Vec<(usize, f64)> = (0..7).map(|i| (i % 6, 0.0)).collect();
    assert!(BusemannTrace::from_indices(rs.clone(), th.clone(), &too_many).is_err());
    let tr = BusemannTrace::from_indices(rs, th, &[(0, 0.5), (3, -1.0)]).unwrap();
    let back = BusemannTrace::from_file(&tr.to_file()).unwrap();
    assert_eq!(back.pieces(), tr.pieces());
}

#[test]
fn horoball_single_piece_is_halfspace() {
    let rs = a(2);
    let tr = BusemannTrace::from_indices(rs, barycenter(&a(2)), &[(0, 0.0)]).unwrap();
    let hb = horoball_polytope(&tr, 0.0).unwrap();
    assert!(!hb.is_empty());
    assert!(!hb.is_bounded());
    assert_eq!(hb.affine_dim(), 2);
    let g = tr.pieces()[0].gradient.clone();
    assert!(hb.contains(&(-&g * 5.0), 1e-9));
    assert!(!hb.contains(&(&g * 0.01), 1e-9));
}

#[test]
fn horoball_slab_has_width_two() {
    let tr = diagonal_slab(0.0);
    let hb = horoball_polytope(&tr, 1.0).unwrap();
    let v = tr.pieces()[0].gradient.clone();
    let w = vector(&[v[1], -v[0]]);
    assert!(hb.contains(&(&v * 1.0 + &w * 40.0), 1e-9));
    assert!(hb.contains(&(&v * -1.0 - &w * 40.0), 1e-9));
    assert!(!hb.contains(&(&v * 1.001), 1e-9));
    assert!(!hb.is_bounded());
}

#[test]
fn horoball_a2_triangle_vertices() {
    let tr = a2_triangle();
    assert_eq!(tr.pieces().len(), 3);
    let hb = horoball_polytope(&tr, 1.0).unwrap();
    assert!(hb.is_bounded());
    let mut expected = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let g = [&tr.pieces()[i].gradient, &tr.pieces()[j].gradient];
            expected.push(solve(&rows_matrix(&g, 2), &vector(&[1.0, 1.0])).unwrap());
        }
    }
    assert_eq!(hb.vertices().len(), 3);
    for e in &expected {
        assert!(hb.vertices().iter().any(|v| dist(v, e) < 1e-9), "missing vertex {e}");
    }
    assert!(horoball_polytope(&tr, -1.0).unwrap().is_empty());
}

#[test]
fn min_set_examples() {
    let rs = a(3);
    let single = BusemannTrace::from_indices(rs.clone(), generic_regular(&rs), &[(0, 0.0)]).unwrap();
    assert!(matches!(min_set(&single), Err(Error::UnboundedBelow)));

    let slab = diagonal_slab(0.0);
    let ms = min_set(&slab).unwrap();
    assert!(ms.value.abs() < 1e-9);
    assert_eq!(ms.polytope.affine_dim(), 1);
    let v = &slab.pieces()[0].gradient;
    for d in ms.polytope.edge_directions() {
        assert!(d.dot(v).abs() < 1e-9);
    }

    let tri = min_set(&a2_triangle()).unwrap();
    assert!(tri.value.abs() < 1e-9);
    assert_eq!(tri.polytope.affine_dim(), 0);
    assert!(tri.polytope.vertices()[0].norm() < 1e-7);

    let sym = BusemannTrace::symmetric(a(2), barycenter(&a(2)), -1.0).unwrap();
    let ms = min_set(&sym).unwrap();
    assert!((ms.value + 1.0).abs() < 1e-9);
    assert!(ms.polytope.vertices()[0].norm() < 1e-7);
}

#[test]
fn level_project_examples() {
    let rs = a(3);
    let single = BusemannTrace::from_indices(rs.clone(), generic_regular(&rs), &[(5, 0.3)]).unwrap();
    let x = vector(&[0.4, -1.2, 2.0]);
    let s = single.value(&x);
    let p = level_project(&single, &x, s - 1.0).unwrap();
    assert!((dist(&x, &p) - 1.0).abs() < 1e-9);

    let slab = diagonal_slab(0.0);
    let x = vector(&[2.0, 1.5]);
    let s = slab.value(&x);
    let p = level_project(&slab, &x, 0.0).unwrap();
    assert!((dist(&x, &p) - s).abs() < 1e-9);
    assert!(slab.value(&p).abs() < 1e-9);

    let tri = a2_triangle();
    let dz = delta_zero(tri.root_system(), tri.theta()).unwrap();
    let hb = horoball_polytope(&tri, 2.0).unwrap();
    let corner = &hb.vertices()[0];
    let s = tri.value(corner);
    for t in [1.5, 0.5, 0.0] {
        let p = level_project(&tri, corner, t).unwrap();
        assert!((tri.value(&p) - t).abs() < 1e-9);
        assert!(dist(corner, &p) <= (s - t) / dz.delta0.sin() + 1e-9);
    }
    assert_eq!(level_project(&tri, &vector(&[0.0, 0.0]), 0.0).unwrap(), vector(&[0.0, 0.0]));
    assert!(matches!(level_project(&tri, &vector(&[0.0, 0.0]), -1.0), Err(Error::EmptyLevel(_))));
    assert!(matches!(level_project(&tri, &hb.vertices()[0], 3.0), Err(Error::BelowLevel { .. })));
}

#[test]
fn sandwich_examples() {
    let slab = diagonal_slab(-1.0);
    let r = sandwich_radii(&slab).unwrap();
    assert!((r.m - 1.0).abs() < 1e-9);
    assert!((r.am - r.a * r.m).abs() < 1e-12);
    let dz = delta_zero(slab.root_system(), slab.theta()).unwrap();
    assert!((r.a - 1.0 / dz.delta0.sin()).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let c = check_sandwich(&slab, &r, 200, &mut rng).unwrap();
    assert_eq!(c.inner_violations + c.outer_violations, 0);

    let sym = BusemannTrace::symmetric(a(2), barycenter(&a(2)), -1.0).unwrap();
    let r1 = sandwich_radii(&sym).unwrap();
    let r3 = sandwich_radii(&sym.scaled(3.0)).unwrap();
    assert!((r3.m - 3.0 * r1.m).abs() < 1e-9);
    assert!((r3.am - 3.0 * r1.am).abs() < 1e-9);

    let c = check_sandwich(&sym, &r1, 1000, &mut rng).unwrap();
    assert_eq!(c.inner_samples, 1000);
    assert!(c.outer_samples > 900);
    assert_eq!(c.inner_violations + c.outer_violations, 0);

    let zero = BusemannTrace::symmetric(a(2), barycenter(&a(2)), 0.0).unwrap();
    assert!(matches!(sandwich_radii(&zero), Err(Error::Hypothesis(_))));
}

#[test]
fn face_pair_path_right_angle() {
    let probe = a3_root_trace(&[(0, 0.0)]);
    let (i, j) = orthogonal_orbit_pair(&probe);
    let tr = a3_root_trace(&[(i, 0.0), (j, 0.0)]);
    let gi = tr.pieces()[0].gradient.clone();
    let gj = tr.pieces()[1].gradient.clone();
    let k = gi.cross(&gj);
    let x = -&gj * 0.7 + &k * 0.3;
    let y = -&gi * 0.4 - &k * 0.5;
    let path = face_pair_path(&tr, 0.0, &x, &y).unwrap();
    assert!((path.constant - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(path.points.len(), 3);
    let z = path.corner.clone().unwrap();
    assert!(gi.dot(&z).abs() < 1e-9 && gj.dot(&z).abs() < 1e-9);
    assert!((path.length - (dist(&x, &path.points[1]) + dist(&path.points[1], &y))).abs() < 1e-12);
    assert!(path.length <= 2f64.sqrt() * dist(&x, &y) + 1e-12);
}

#[test]
fn face_pair_path_a2_adjacent_edges() {
    let tr = a2_triangle();
    let hb = horoball_polytope(&tr, 1.0).unwrap();
    let v = hb.vertices();
    // x on edge v0 v1, y on edge v0 v2; shared vertex v0
    let x = &v[0] * 0.6 + &v[1] * 0.4;
    let y = &v[0] * 0.3 + &v[2] * 0.7;
    let path = face_pair_path(&tr, 1.0, &x, &y).unwrap();
    let planar = dist(&x, &v[0]) + dist(&v[0], &y);
    assert!((path.length - planar).abs() < 1e-9, "{} vs {planar}", path.length);
    assert!((path.constant - 2.0).abs() < 1e-12);
    assert!(path.length <= path.constant * dist(&x, &y));

    let same = face_pair_path(&tr, 1.0, &x, &x).unwrap();
    assert!(same.points.is_empty());
    assert_eq!(same.length, 0.0);
    assert!(matches!(face_pair_path(&tr, 1.0, &x, &vector(&[5.0, 5.0])), Err(Error::OffLevel(_))));
}

#[test]
fn face_pair_path_parallel_rejected() {
    let slab = diagonal_slab(0.0);
    let v = slab.pieces()[0].gradient.clone();
    let w = vector(&[v[1], -v[0]]);
    let x = &v * 1.0 + &w;
    let y = -&v * 1.0 - &w * 2.0;
    assert!(matches!(face_pair_path(&slab, 1.0, &x, &y), Err(Error::ParallelFacets)));
}

#[test]
fn descent_rate_examples() {
    let rs = a(3);
    let th = generic_regular(&rs);
    let tr = BusemannTrace::from_indices(rs.clone(), th.clone(), &[(4, 0.0)]).unwrap();
    let g = tr.pieces()[0].gradient.clone();
    let beta = project_to_chamber(&rs, &g).unwrap();
    let w = (0..rs.order()).find(|&w| (&rs.elements()[w] * beta.direction() - &g).norm() < 1e-9).unwrap();
    let r = descent_rate(&tr, &vector(&[0.1, 0.2, 0.3]), &beta, w).unwrap();
    assert!((r - 1.0).abs() < 1e-9);

    let slab = diagonal_slab(0.0);
    let srs = slab.root_system().clone();
    let v = &slab.pieces()[0].gradient;
    let perp = vector(&[v[1], -v[0]]);
    let beta = project_to_chamber(&srs, &perp).unwrap();
    let w = (0..srs.order()).find(|&w| (&srs.elements()[w] * beta.direction() - &perp).norm() < 1e-9).unwrap();
    assert!(descent_rate(&slab, &vector(&[2.0, 0.5]), &beta, w).unwrap() < 1e-12);
    assert!(ort_distance(&srs, slab.theta(), &beta) < 1e-12);
    assert!(descent_rate(&slab, &vector(&[0.0, 0.0]), &beta, srs.order()).is_err());
}

#[test]
fn descent_rate_on_a3_samples() {
    let rs = a(3);
    let th = barycenter(&rs);
    let delta1 = 0.05;
    let good = find_good_slope(&rs, &th, delta1).unwrap();
    let tr = BusemannTrace::symmetric(rs.clone(), th, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let x = random_unit(3, &mut rng) * (5.0 * rng.random::<f64>());
        let w = rng.random_range(0..rs.order());
        let r = descent_rate(&tr, &x, &good.slope, w).unwrap();
        assert!(r >= delta1.sin(), "rate {r} at {x}");
    }
}

#[test]
fn similarity_scales_lengths() {
    let sym = BusemannTrace::symmetric(a(3), barycenter(&a(3)), -1.0).unwrap();
    let hb = horoball_polytope(&sym, 0.0).unwrap();
    let v = hb.vertices();
    let x = &v[0] * 0.5 + &v[1] * 0.5;
    let y = &v[2] * 0.5 + &v[5] * 0.5;
    let lam = 4.0;
    let big = sym.scaled(lam);
    let p1 = face_pair_path(&sym, 0.0, &x, &y).unwrap();
    let p2 = face_pair_path(&big, 0.0, &(&x * lam), &(&y * lam)).unwrap();
    assert!((p2.length - lam * p1.length).abs() < 1e-9 * (1.0 + p2.length));

    let q = vector(&[3.0, -2.0, 1.0]);
    let d1 = dist(&q, &level_project(&sym, &q, 0.0).unwrap());
    let d2 = dist(&(&q * lam), &level_project(&big, &(&q * lam), 0.0).unwrap());
    assert!((d2 - lam * d1).abs() < 1e-9);
}

fn random_trace(rs: &Arc<RootSystem>, seed: u64) -> BusemannTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let th = generic_regular(rs);
    let n = rs.orbit(&(-th.direction())).len();
    let k = rng.random_range(1..=n);
    let pieces: Vec<(usize, f64)> = (0..k).map(|_| (rng.random_range(0..n), rng.random_range(-1.0..1.0))).collect();
    BusemannTrace::from_indices(rs.clone(), th, &pieces).unwrap()
}

fn vec3() -> impl Strategy<Value = Vector> {
    prop::collection::vec(-4.0f64..4.0, 3).prop_map(Vector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn value_is_convex(seed in any::<u64>(), x in vec3(), y in vec3()) {
        for rs in [a(3), a2a1()] {
            let tr = random_trace(&rs, seed);
            let mid = (&x + &y) * 0.5;
            prop_assert!(tr.value(&mid) <= 0.5 * (tr.value(&x) + tr.value(&y)) + 1e-9);
        }
    }

    #[test]
    fn level_projection_contracts(u in vec3(), v in vec3(), s in 0.0f64..3.0, frac in 0.01f64..0.99) {
        let sym = BusemannTrace::symmetric(a(3), barycenter(&a(3)), -1.0).unwrap();
        let on_level = |d: &Vector| -> Option<Vector> {
            let u = unit(d)?;
            let rate = sym.pieces().iter().map(|p| p.gradient.dot(&u)).fold(f64::NEG_INFINITY, f64::max);
            Some(&u * ((s + 1.0) / rate))
        };
        let (Some(x), Some(y)) = (on_level(&u), on_level(&v)) else { return Ok(()) };
        prop_assert!((sym.value(&x) - s).abs() < 1e-9);
        let t = s - frac * (s + 1.0);
        let px = level_project(&sym, &x, t).unwrap();
        let py = level_project(&sym, &y, t).unwrap();
        prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-9);
    }

    #[test]
    fn min_set_edges_are_orthogonal_slopes(offsets in prop::collection::vec(0u8..3, 12)) {
        let pieces: Vec<(usize, f64)> = offsets.iter().enumerate().map(|(i, o)| (i, 0.5 * *o as f64)).collect();
        let tr = a3_root_trace(&pieces);
        let ms = min_set(&tr).unwrap();
        let rs = tr.root_system();
        for e in ms.polytope.edge_directions() {
            let b = project_to_chamber(rs, &e).unwrap();
            prop_assert!(ort_distance(rs, tr.theta(), &b) < 1e-6, "edge {}", e);
        }
    }

    #[test]
    fn min_set_of_orthogonal_pairs_is_a_line(o in prop::collection::vec(-1.0f64..1.0, 4)) {
        let probe = a3_root_trace(&[(0, 0.0)]);
        let (i, j) = orthogonal_orbit_pair(&probe);
        let orbit = probe.gradient_orbit();
        let ni = orbit.iter().position(|g| (g + &orbit[i]).norm() < 1e-9).unwrap();
        let nj = orbit.iter().position(|g| (g + &orbit[j]).norm() < 1e-9).unwrap();
        let tr = a3_root_trace(&[(i, o[0]), (ni, o[1]), (j, o[2]), (nj, o[3])]);
        let ms = min_set(&tr).unwrap();
        let rs = tr.root_system();
        let dirs = ms.polytope.edge_directions();
        prop_assert!(!dirs.is_empty());
        for e in dirs {
            let b = project_to_chamber(rs, &e).unwrap();
            prop_assert!(ort_distance(rs, tr.theta(), &b) < 1e-6);
        }
    }
}
