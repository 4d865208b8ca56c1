//! Piecewise-linear convex traces of Busemann functions on a single flat.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coxeter::{delta_zero, RootSystem, RootSystemSpec, Slope};
use crate::error::{Error, Result};
use crate::linalg::{complement_basis, dist, orthonormal_basis, unit, Vector, TOL};
use crate::polytope::{Halfspace, HPolytope, Lp};

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub gradient: Vector,
    pub offset: f64,
}

/// `value(x) = max_i (<x, g_i> + c_i)` with every `g_i` in the Weyl orbit of `-u_theta`.
#[derive(Clone, Debug)]
pub struct BusemannTrace {
    rs: Arc<RootSystem>,
    theta: Slope,
    gradient_orbit: Vec<Vector>,
    pieces: Vec<Piece>,
    orbit_indices: Vec<usize>,
}

/// On-disk description of a trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub root_system: RootSystemSpec,
    pub theta: Vec<f64>,
    pub pieces: Vec<PieceRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PieceRef {
    pub orbit_index: usize,
    pub offset: f64,
}

impl BusemannTrace {
    /// Build from explicit gradients; each must be a unit vector of the gradient orbit.
    pub fn new(rs: Arc<RootSystem>, theta: Slope, pieces: Vec<Piece>) -> Result<BusemannTrace> {
        let gradient_orbit = rs.orbit(&(-theta.direction()));
        if pieces.is_empty() {
            return Err(Error::InvalidTrace("no pieces".into()));
        }
        if pieces.len() > rs.order() {
            return Err(Error::InvalidTrace(format!(
                "{} pieces exceed the chamber count {}",
                pieces.len(),
                rs.order()
            )));
        }
        let mut orbit_indices = Vec::with_capacity(pieces.len());
        for (k, p) in pieces.iter().enumerate() {
            if p.gradient.len() != rs.rank() {
                return Err(Error::Dimension { expected: rs.rank(), got: p.gradient.len() });
            }
            if (p.gradient.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidTrace(format!("gradient {k} is not a unit vector")));
            }
            if !p.offset.is_finite() {
                return Err(Error::InvalidTrace(format!("offset {k} is not finite")));
            }
            match gradient_orbit.iter().position(|o| (o - &p.gradient).amax() <= 1e-9) {
                Some(i) => orbit_indices.push(i),
                None => {
                    return Err(Error::InvalidTrace(format!(
                        "gradient {k} is not in the orbit of the opposite slope"
                    )))
                }
            }
        }
        Ok(BusemannTrace { rs, theta, gradient_orbit, pieces, orbit_indices })
    }

    /// Build from `(orbit index, offset)` pairs.
    pub fn from_indices(rs: Arc<RootSystem>, theta: Slope, pieces: &[(usize, f64)]) -> Result<BusemannTrace> {
        let orbit = rs.orbit(&(-theta.direction()));
        let mut ps = Vec::new();
        for (i, c) in pieces {
            let g = orbit
                .get(*i)
                .ok_or_else(|| Error::InvalidTrace(format!("orbit index {i} >= {}", orbit.len())))?;
            ps.push(Piece { gradient: g.clone(), offset: *c });
        }
        BusemannTrace::new(rs, theta, ps)
    }

    /// Every orbit gradient with the same offset.
    pub fn symmetric(rs: Arc<RootSystem>, theta: Slope, offset: f64) -> Result<BusemannTrace> {
        let n = rs.orbit(&(-theta.direction())).len();
        let pieces: Vec<(usize, f64)> = (0..n).map(|i| (i, offset)).collect();
        BusemannTrace::from_indices(rs, theta, &pieces)
    }

    pub fn from_file(file: &TraceFile) -> Result<BusemannTrace> {
        let rs = Arc::new(RootSystem::new(file.root_system.clone())?);
        let theta = Slope::new(&rs, Vector::from_column_slice(&file.theta))?;
        let pieces: Vec<(usize, f64)> = file.pieces.iter().map(|p| (p.orbit_index, p.offset)).collect();
        BusemannTrace::from_indices(rs, theta, &pieces)
    }

    pub fn to_file(&self) -> TraceFile {
        TraceFile {
            root_system: self.rs.spec().clone(),
            theta: self.theta.direction().iter().copied().collect(),
            pieces: self
                .orbit_indices
                .iter()
                .zip(&self.pieces)
                .map(|(i, p)| PieceRef { orbit_index: *i, offset: p.offset })
                .collect(),
        }
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.rs
    }

    pub fn theta(&self) -> &Slope {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.rs.rank()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn orbit_indices(&self) -> &[usize] {
        &self.orbit_indices
    }

    /// The orbit the gradients are drawn from.
    pub fn gradient_orbit(&self) -> &[Vector] {
        &self.gradient_orbit
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.gradient.dot(x) + p.offset)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pieces attaining the maximum at `x` within `tol`.
    pub fn active_pieces(&self, x: &Vector, tol: f64) -> Vec<usize> {
        let v = self.value(x);
        (0..self.pieces.len())
            .filter(|i| v - (self.pieces[*i].gradient.dot(x) + self.pieces[*i].offset) <= tol)
            .collect()
    }

    /// Similarity image: `value_l(l x) = l value(x)`.
    pub fn scaled(&self, lambda: f64) -> BusemannTrace {
        let mut t = self.clone();
        for p in &mut t.pieces {
            p.offset *= lambda;
        }
        t
    }

    /// The trace minus `t`, so that level `t` becomes level zero.
    pub fn shifted(&self, t: f64) -> BusemannTrace {
        let mut out = self.clone();
        for p in &mut out.pieces {
            p.offset -= t;
        }
        out
    }

    /// Minimal dihedral angle between distinct non-parallel gradient hyperplanes.
    pub fn min_dihedral_angle(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.pieces.len() {
            for j in i + 1..self.pieces.len() {
                let c = self.pieces[i].gradient.dot(&self.pieces[j].gradient).abs();
                if c >= 1.0 - 1e-9 {
                    continue;
                }
                let a = c.acos();
                best = Some(best.map_or(a, |b| b.min(a)));
            }
        }
        best
    }

    /// Path constant `1/sin(varsigma/2)`.
    pub fn face_path_constant(&self) -> Option<f64> {
        self.min_dihedral_angle().map(|s| 1.0 / (s / 2.0).sin())
    }
}

/// `{x : value(x) <= t}`.
pub fn horoball_polytope(trace: &BusemannTrace, t: f64) -> Result<HPolytope> {
    let hs = trace
        .pieces()
        .iter()
        .map(|p| Halfspace::new(p.gradient.clone(), t - p.offset))
        .collect();
    HPolytope::new(trace.dim(), hs)
}

#[derive(Clone, Debug)]
pub struct MinSet {
    pub polytope: HPolytope,
    pub value: f64,
}

/// The argmin polytope of the trace and the minimum value.
pub fn min_set(trace: &BusemannTrace) -> Result<MinSet> {
    let n = trace.dim();
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); n + 1];
    let mut lp = Lp::new(false, &obj, &bounds);
    for p in trace.pieces() {
        let mut row: Vec<f64> = p.gradient.iter().copied().collect();
        row.push(-1.0);
        lp.le(&row, -p.offset);
    }
    let value = match lp.solve() {
        Ok(Some((v, _))) => v,
        Ok(None) => return Err(Error::Lp("min-set LP infeasible".into())),
        Err(crate::polytope::LpStatus::Unbounded) => return Err(Error::UnboundedBelow),
        Err(_) => return Err(Error::Lp("min-set LP failed".into())),
    };
    let polytope = horoball_polytope(trace, value)?;
    if polytope.is_empty() {
        // numerical slack: lift the level a hair
        let polytope = horoball_polytope(trace, value + 1e-10)?;
        return Ok(MinSet { polytope, value });
    }
    Ok(MinSet { polytope, value })
}

/// Nearest point of the sublevel set `{value <= t}` to `x` (a point at level `s >= t`).
pub fn level_project(trace: &BusemannTrace, x: &Vector, t: f64) -> Result<Vector> {
    let s = trace.value(x);
    if s < t - TOL {
        return Err(Error::BelowLevel { value: s, level: t });
    }
    if s <= t {
        return Ok(x.clone());
    }
    let hb = horoball_polytope(trace, t)?;
    if hb.is_empty() {
        return Err(Error::EmptyLevel(t));
    }
    hb.nearest_point(x)
}

/// Radii of the sandwich `N_m(Min) ⊂ Hb_0 ⊂ N_{am}(Min)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichRadii {
    pub m: f64,
    pub am: f64,
    pub a: f64,
    pub delta0: f64,
}

pub fn sandwich_radii(trace: &BusemannTrace) -> Result<SandwichRadii> {
    let ms = min_set(trace)?;
    if ms.value >= -TOL {
        return Err(Error::Hypothesis(format!("minimum value {} is not negative", ms.value)));
    }
    let dz = delta_zero(trace.root_system(), trace.theta())?;
    let a = 1.0 / dz.delta0.sin();
    let m = -ms.value;
    Ok(SandwichRadii { m, am: a * m, a, delta0: dz.delta0 })
}

/// Violations found while sampling both inclusions of the sandwich.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SandwichCheck {
    pub inner_samples: usize,
    pub inner_violations: usize,
    pub outer_samples: usize,
    pub outer_violations: usize,
}

/// Sample `N_m(Min)` (checking `value <= 0`) and `∂Hb_0` (checking `d(., Min) <= am`).
pub fn check_sandwich<R: Rng>(trace: &BusemannTrace, radii: &SandwichRadii, samples: usize, rng: &mut R) -> Result<SandwichCheck> {
    let ms = min_set(trace)?;
    let minp = &ms.polytope;
    let n = trace.dim();
    let hb = horoball_polytope(trace, 0.0)?;
    let base = minp.interior_point().cloned().unwrap_or_else(|| Vector::zeros(n));
    let mut out = SandwichCheck::default();
    for _ in 0..samples {
        // a point of Min: random convex combination of vertices plus unbounded directions
        let mut p = if minp.vertices().is_empty() {
            base.clone()
        } else {
            let w: Vec<f64> = minp.vertices().iter().map(|_| rng.random::<f64>()).collect();
            let tot: f64 = w.iter().sum();
            let mut p = Vector::zeros(n);
            for (v, c) in minp.vertices().iter().zip(&w) {
                p += v * (*c / tot);
            }
            p
        };
        for d in minp.rays().iter().chain(minp.lineality()) {
            p += d * (rng.random::<f64>() * 3.0 * radii.m);
        }
        let dir = random_unit(n, rng);
        let q = &p + &dir * (rng.random::<f64>() * radii.m);
        out.inner_samples += 1;
        if trace.value(&q) > 1e-9 * (1.0 + radii.m) {
            out.inner_violations += 1;
        }
        // boundary point of Hb_0 along the ray from p
        if let Some(b) = ray_exit(&hb, &p, &dir) {
            out.outer_samples += 1;
            let d = minp.distance(&b)?;
            if d > radii.am + 1e-9 * (1.0 + radii.am) {
                out.outer_violations += 1;
            }
        }
    }
    Ok(out)
}

pub fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vector {
    loop {
        let v = Vector::from_iterator(n, (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0));
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            return v / r;
        }
    }
}

/// Exit point of the ray `p + s d` (s >= 0) from a polyhedron containing `p`.
pub fn ray_exit(poly: &HPolytope, p: &Vector, d: &Vector) -> Option<Vector> {
    let mut smax = f64::INFINITY;
    for h in poly.halfspaces() {
        let rate = h.normal.dot(d);
        if rate > 1e-15 {
            let s = h.slack(p) / rate;
            smax = smax.min(s.max(0.0));
        }
    }
    if smax.is_finite() {
        Some(p + d * smax)
    } else {
        None
    }
}

/// Polyline on the level set between points on two facets.
#[derive(Clone, Debug)]
pub struct FacePairPath {
    pub points: Vec<Vector>,
    pub length: f64,
    /// `1/sin(varsigma/2)`.
    pub constant: f64,
    /// The corner used to choose the plane, when two distinct facets were used.
    pub corner: Option<Vector>,
}

fn polyline_length(points: &[Vector]) -> f64 {
    points.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// Join `x` and `y` (on level `t`) by a boundary polyline of a planar section.
pub fn face_pair_path(trace: &BusemannTrace, t: f64, x: &Vector, y: &Vector) -> Result<FacePairPath> {
    let constant = trace.face_path_constant().unwrap_or(1.0);
    for p in [x, y] {
        let off = (trace.value(p) - t).abs();
        if off > 1e-7 {
            return Err(Error::OffLevel(off));
        }
    }
    if dist(x, y) <= 1e-12 {
        return Ok(FacePairPath { points: Vec::new(), length: 0.0, constant, corner: None });
    }
    let ax = trace.active_pieces(x, 1e-7);
    let ay = trace.active_pieces(y, 1e-7);
    if ax.iter().any(|i| ay.contains(i)) {
        let points = vec![x.clone(), y.clone()];
        return Ok(FacePairPath { length: dist(x, y), points, constant, corner: None });
    }
    let g = |i: usize| &trace.pieces()[i].gradient;
    let mut pair = None;
    'search: for i in &ax {
        for j in &ay {
            if g(*i).dot(g(*j)).abs() < 1.0 - 1e-9 {
                pair = Some((*i, *j));
                break 'search;
            }
        }
    }
    let (i, j) = pair.ok_or(Error::ParallelFacets)?;
    let z = corner_point(trace, t, i, j, x, y);

    let hb = horoball_polytope(trace, t)?;
    let points = planar_boundary_walk(&hb, x, y, &z)?;
    let length = polyline_length(&points);
    Ok(FacePairPath { points, length, constant, corner: Some(z) })
}

/// Minimiser of `d(x,z) + d(z,y)` over `z` in the intersection of the two facet hyperplanes.
fn corner_point(trace: &BusemannTrace, t: f64, i: usize, j: usize, x: &Vector, y: &Vector) -> Vector {
    let n = trace.dim();
    let pi = &trace.pieces()[i];
    let pj = &trace.pieces()[j];
    let rows = [&pi.gradient, &pj.gradient];
    let rhs = [t - pi.offset, t - pj.offset];
    let z0 = crate::polytope::project_affine(x, &rows, &rhs).expect("non-parallel facets");
    let nb = orthonormal_basis(&[pi.gradient.clone(), pj.gradient.clone()], 1e-12);
    let b = complement_basis(&nb, n);
    if b.is_empty() {
        return z0;
    }
    // Weiszfeld iteration in the coordinates of the intersection
    let k = b.len();
    let coords = |v: &Vector| Vector::from_iterator(k, b.iter().map(|e| e.dot(&(v - &z0))));
    let px = coords(x);
    let py = coords(y);
    let hx = {
        let d = x - &z0;
        let along: f64 = b.iter().map(|e| e.dot(&d).powi(2)).sum();
        (d.norm_squared() - along).max(0.0)
    };
    let hy = {
        let d = y - &z0;
        let along: f64 = b.iter().map(|e| e.dot(&d).powi(2)).sum();
        (d.norm_squared() - along).max(0.0)
    };
    let mut u = (&px + &py) * 0.5;
    for _ in 0..500 {
        let rx = (hx + (&u - &px).norm_squared()).sqrt().max(1e-15);
        let ry = (hy + (&u - &py).norm_squared()).sqrt().max(1e-15);
        let next = (&px / rx + &py / ry) / (1.0 / rx + 1.0 / ry);
        let step = (&next - &u).norm();
        u = next;
        if step < 1e-14 {
            break;
        }
    }
    let mut z = z0.clone();
    for (c, e) in b.iter().enumerate() {
        z += e * u[c];
    }
    z
}

/// Walk the boundary of the planar section of `poly` through `x, y, z` from `x` to `y`
/// on the side of `z`.
fn planar_boundary_walk(poly: &HPolytope, x: &Vector, y: &Vector, z: &Vector) -> Result<Vec<Vector>> {
    let e1 = unit(&(y - x)).expect("distinct points");
    let mut w = z - x;
    w -= &e1 * w.dot(&e1);
    let collinear = w.norm() <= 1e-9 * (1.0 + dist(x, y));
    let e2 = if collinear {
        // fall back to the inward direction of the two facets
        let mut inward = Vector::zeros(x.len());
        for h in poly.halfspaces() {
            if h.slack(x).abs() <= 1e-7 || h.slack(y).abs() <= 1e-7 {
                inward -= &h.normal;
            }
        }
        inward -= &e1 * inward.dot(&e1);
        unit(&inward).ok_or_else(|| Error::Hypothesis("degenerate planar section".into()))?
    } else {
        unit(&w).unwrap()
    };
    let to2 = |p: &Vector| -> (f64, f64) {
        let d = p - x;
        (d.dot(&e1), d.dot(&e2))
    };
    // clip a large square by the halfplanes
    let xy = dist(x, y);
    let zz = to2(z);
    let big = 4.0 * (xy + zz.0.abs() + zz.1.abs() + 1.0);
    let mut poly2: Vec<(f64, f64)> = vec![(-big, -big), (big, -big), (big, big), (-big, big)];
    for h in poly.halfspaces() {
        let a = (h.normal.dot(&e1), h.normal.dot(&e2));
        let b = h.slack(x);
        if a.0.abs() + a.1.abs() < 1e-14 {
            continue;
        }
        poly2 = clip(&poly2, a, b);
        if poly2.is_empty() {
            return Err(Error::Hypothesis("empty planar section".into()));
        }
    }
    let m = poly2.len();
    let locate = |p: (f64, f64)| -> usize {
        let mut best = (f64::INFINITY, 0);
        for k in 0..m {
            let d = seg_dist(p, poly2[k], poly2[(k + 1) % m]);
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    };
    let px = (0.0, 0.0);
    let py = (xy, 0.0);
    let ex = locate(px);
    let ey = locate(py);
    // forward chain: vertices ex+1 ..= ey
    let mut fwd = Vec::new();
    let mut k = ex;
    while k != ey {
        k = (k + 1) % m;
        fwd.push(poly2[k]);
    }
    let mut bwd = Vec::new();
    let mut k = ey;
    while k != ex {
        k = (k + 1) % m;
        bwd.push(poly2[k]);
    }
    bwd.reverse();
    let chain_len = |c: &[(f64, f64)]| -> f64 {
        let mut pts = vec![px];
        pts.extend_from_slice(c);
        pts.push(py);
        pts.windows(2).map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt()).sum()
    };
    let side_ok = |c: &[(f64, f64)]| c.iter().all(|p| p.1 >= -1e-9 * (1.0 + xy));
    let chosen = if collinear {
        if chain_len(&fwd) <= chain_len(&bwd) {
            fwd
        } else {
            bwd
        }
    } else {
        match (side_ok(&fwd), side_ok(&bwd)) {
            (true, false) => fwd,
            (false, true) => bwd,
            _ => {
                if chain_len(&fwd) <= chain_len(&bwd) {
                    fwd
                } else {
                    bwd
                }
            }
        }
    };
    let lift = |p: (f64, f64)| x + &e1 * p.0 + &e2 * p.1;
    let mut pts = vec![x.clone()];
    for p in chosen {
        let q = lift(p);
        if dist(&q, pts.last().unwrap()) > 1e-12 {
            pts.push(q);
        }
    }
    if dist(y, pts.last().unwrap()) > 1e-12 {
        pts.push(y.clone());
    } else {
        *pts.last_mut().unwrap() = y.clone();
    }
    Ok(pts)
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let ab = (b.0 - a.0, b.1 - a.1);
    let ap = (p.0 - a.0, p.1 - a.1);
    let l2 = ab.0 * ab.0 + ab.1 * ab.1;
    let s = if l2 > 0.0 { ((ap.0 * ab.0 + ap.1 * ab.1) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let q = (a.0 + s * ab.0 - p.0, a.1 + s * ab.1 - p.1);
    (q.0 * q.0 + q.1 * q.1).sqrt()
}

/// Sutherland-Hodgman clip of a convex polygon by `a . p <= b`.
fn clip(poly: &[(f64, f64)], a: (f64, f64), b: f64) -> Vec<(f64, f64)> {
    let val = |p: (f64, f64)| a.0 * p.0 + a.1 * p.1 - b;
    let mut out = Vec::new();
    let m = poly.len();
    for k in 0..m {
        let p = poly[k];
        let q = poly[(k + 1) % m];
        let vp = val(p);
        let vq = val(q);
        if vp <= 0.0 {
            out.push(p);
        }
        if (vp < 0.0 && vq > 0.0) || (vp > 0.0 && vq < 0.0) {
            let s = vp / (vp - vq);
            out.push((p.0 + s * (q.0 - p.0), p.1 + s * (q.1 - p.1)));
        }
    }
    // drop near-duplicates
    let mut dedup: Vec<(f64, f64)> = Vec::new();
    for p in out {
        if dedup.last().is_none_or(|l| (l.0 - p.0).abs() + (l.1 - p.1).abs() > 1e-13) {
            dedup.push(p);
        }
    }
    if dedup.len() > 1 {
        let f = dedup[0];
        let l = *dedup.last().unwrap();
        if (l.0 - f.0).abs() + (l.1 - f.1).abs() <= 1e-13 {
            dedup.pop();
        }
    }
    dedup
}

/// `|directional derivative|` of the trace at `x` along `w u_beta` (one-sided).
pub fn descent_rate(trace: &BusemannTrace, x: &Vector, beta: &Slope, w: usize) -> Result<f64> {
    let rs = trace.root_system();
    let m = rs
        .elements()
        .get(w)
        .ok_or_else(|| Error::OutOfRange(format!("Weyl element {w} >= {}", rs.order())))?;
    let d = m * beta.direction();
    let act = trace.active_pieces(x, 1e-9);
    let r = act
        .iter()
        .map(|i| trace.pieces()[*i].gradient.dot(&d))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(r.abs())
}

/// Angle between `u` and the closest orbit gradient hyperplane, used in reports.
pub fn orthogonality_gap(trace: &BusemannTrace, u: &Vector) -> f64 {
    trace
        .gradient_orbit()
        .iter()
        .map(|g| (FRAC_PI_2 - crate::linalg::angle(u, g)).abs())
        .fold(f64::INFINITY, f64::min)
}
