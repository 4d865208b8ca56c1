#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use horofill::coxeter::{RootSystem, RootSystemSpec, Slope};
use horofill::linalg::{vector, Vector};
use nalgebra::DMatrix;
use serde::Deserialize;

/// Regression bands shared by the integration tests, versioned in `fixtures/bands.json`.
#[derive(Debug, Deserialize)]
pub struct Bands {
    pub version: u32,
    pub exponent_band: (f64, f64),
    /// `L'` in `area <= L' l^2` for level-set loops.
    pub level_fill_constant: f64,
    pub radial_c_prime: f64,
    /// `path length / reference` for tube paths.
    pub tube_path_band: (f64, f64),
    pub oracle_factor: f64,
    pub term_balance_factor: f64,
    pub projection_slack: f64,
    /// `L` in `area <= L (l^2 + l delta + delta^2)` for tube loops.
    pub tube_fill_constant: f64,
    /// Area ratio when a loop length doubles.
    pub doubling_band: (f64, f64),
}

pub fn bands() -> Bands {
    let text = include_str!("../fixtures/bands.json");
    let b: Bands = serde_json::from_str(text).expect("bands.json parses");
    assert_eq!(b.version, 1, "fixture version");
    b
}

pub fn a(rank: usize) -> Arc<RootSystem> {
    Arc::new(RootSystem::new(RootSystemSpec::a(rank)).unwrap())
}

pub fn a2a1() -> Arc<RootSystem> {
    Arc::new(RootSystem::new(RootSystemSpec::product(vec![RootSystemSpec::a(2), RootSystemSpec::a(1)])).unwrap())
}

pub fn a1a1() -> Arc<RootSystem> {
    Arc::new(RootSystem::new(RootSystemSpec::product(vec![RootSystemSpec::a(1), RootSystemSpec::a(1)])).unwrap())
}

/// Normalised sum of the chamber's edge generators.
pub fn barycenter(rs: &RootSystem) -> Slope {
    let mut v = Vector::zeros(rs.rank());
    for g in rs.chamber_generators() {
        v += g;
    }
    Slope::from_direction(rs, &v).unwrap()
}

/// A regular slope off every symmetry axis: weights `1, 1.1, 1.2, ...` on the generators.
pub fn generic_regular(rs: &RootSystem) -> Slope {
    let mut v = Vector::zeros(rs.rank());
    for (i, g) in rs.chamber_generators().iter().enumerate() {
        v += g * (1.0 + 0.1 * i as f64);
    }
    Slope::from_direction(rs, &v).unwrap()
}

pub fn rows(vs: &[Vector]) -> Vec<String> {
    let mut out: Vec<String> = vs.iter().map(horofill::linalg::fmt_vec).collect();
    out.sort();
    out
}

/// The six elements of the dihedral group of order 6, written out as rotations by
/// multiples of 120 degrees and reflections in the lines orthogonal to the roots at
/// 0, 60 and 120 degrees.
pub fn hand_a2() -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for k in 0..3 {
        let phi = 2.0 * PI * k as f64 / 3.0;
        out.push(DMatrix::from_row_slice(2, 2, &[phi.cos(), -phi.sin(), phi.sin(), phi.cos()]));
    }
    for k in 0..3 {
        let psi = PI * k as f64 / 3.0;
        let (c, s) = (psi.cos(), psi.sin());
        out.push(DMatrix::from_row_slice(2, 2, &[1.0 - 2.0 * c * c, -2.0 * c * s, -2.0 * c * s, 1.0 - 2.0 * s * s]));
    }
    out
}

pub fn at_angle(deg: f64) -> Vector {
    let r = deg.to_radians();
    vector(&[r.cos(), r.sin()])
}

/// Chamber of the hand model: directions between 30 and 90 degrees.
pub fn hand_in_chamber(v: &Vector) -> bool {
    let a1 = at_angle(0.0);
    let a2 = at_angle(120.0);
    v.dot(&a1) >= -1e-12 && v.dot(&a2) >= -1e-12
}
