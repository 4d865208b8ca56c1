//! Convex polytopes in `E^n` and the geometry of their tube boundaries `∂N_R(P)`:
//! nearest points, paths on the tube, radial projections, sandwiches and strips.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    angle, complement_basis, dist, for_each_combination, orthonormal_basis, project_onto, slerp, unit, Vector,
    SURFACE_TOL,
};
use crate::polytope::{HPolytope, Halfspace};

/// A facet of `P` inside its affine span: `normal . x <= bound` with `normal` in `Φ`.
#[derive(Clone, Debug)]
pub struct Facet {
    pub normal: Vector,
    pub bound: f64,
    pub vertices: Vec<usize>,
}

/// Convex hull of finitely many points, of codimension at least one.
#[derive(Clone, Debug)]
pub struct ConvexPolytope {
    n: usize,
    vertices: Vec<Vector>,
    origin: Vector,
    span: Vec<Vector>,
    normals: Vec<Vector>,
    local: Option<HPolytope>,
    local_vertices: Vec<Vector>,
    facets: Vec<Facet>,
}

impl ConvexPolytope {
    pub fn from_vertices(points: Vec<Vector>) -> Result<ConvexPolytope> {
        let first = points.first().ok_or_else(|| Error::InvalidPolytope("no vertices".into()))?;
        let n = first.len();
        if n == 0 {
            return Err(Error::InvalidPolytope("zero-dimensional ambient space".into()));
        }
        for p in &points {
            if p.len() != n {
                return Err(Error::Dimension { expected: n, got: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidPolytope("non-finite coordinate".into()));
            }
        }
        let points = crate::linalg::dedup_vectors(points, 1e-12);
        let origin = points[0].clone();
        let diffs: Vec<Vector> = points.iter().map(|p| p - &origin).collect();
        let span = orthonormal_basis(&diffs, 1e-9);
        let k = span.len();
        if k == n {
            return Err(Error::InvalidPolytope(
                "polytope is full-dimensional; its tube boundary is not defined here".into(),
            ));
        }
        let normals = complement_basis(&span, n);
        let to_local = |p: &Vector| Vector::from_iterator(k, span.iter().map(|e| e.dot(&(p - &origin))));
        let lpts: Vec<Vector> = points.iter().map(to_local).collect();
        let mut halfspaces: Vec<Halfspace> = Vec::new();
        if k == 1 {
            let lo = lpts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = lpts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            halfspaces.push(Halfspace::new(Vector::from_element(1, 1.0), hi));
            halfspaces.push(Halfspace::new(Vector::from_element(1, -1.0), -lo));
        } else if k >= 2 {
            let m = lpts.len();
            for_each_combination(m, k, |sel| {
                let rows: Vec<Vector> = sel[1..].iter().map(|i| &lpts[*i] - &lpts[sel[0]]).collect();
                let ob = orthonormal_basis(&rows, 1e-9);
                if ob.len() != k - 1 {
                    return true;
                }
                let nrm = complement_basis(&ob, k).remove(0);
                let b = nrm.dot(&lpts[sel[0]]);
                let scale = 1.0 + b.abs();
                let slacks: Vec<f64> = lpts.iter().map(|p| nrm.dot(p) - b).collect();
                let cand = if slacks.iter().all(|s| *s <= 1e-9 * scale) {
                    Some(Halfspace::new(nrm.clone(), b))
                } else if slacks.iter().all(|s| *s >= -1e-9 * scale) {
                    Some(Halfspace::new(-nrm.clone(), -b))
                } else {
                    None
                };
                if let Some(h) = cand {
                    if !halfspaces
                        .iter()
                        .any(|g| (&g.normal - &h.normal).amax() <= 1e-9 && (g.bound - h.bound).abs() <= 1e-9 * scale)
                    {
                        halfspaces.push(h);
                    }
                }
                true
            });
        }
        let (local, local_vertices) = if k == 0 {
            (None, vec![Vector::zeros(0)])
        } else {
            let hp = HPolytope::new(k, halfspaces.clone())?;
            let lv = hp.vertices().to_vec();
            (Some(hp), lv)
        };
        let from_local = |u: &Vector| {
            let mut x = origin.clone();
            for (c, e) in u.iter().zip(&span) {
                x += e * *c;
            }
            x
        };
        let vertices: Vec<Vector> = local_vertices.iter().map(from_local).collect();
        let facets = halfspaces
            .iter()
            .map(|h| {
                let mut nrm = Vector::zeros(n);
                for (c, e) in h.normal.iter().zip(&span) {
                    nrm += e * *c;
                }
                let vs = (0..local_vertices.len())
                    .filter(|i| (h.normal.dot(&local_vertices[*i]) - h.bound).abs() <= 1e-8 * (1.0 + h.bound.abs()))
                    .collect();
                Facet { bound: nrm.dot(&origin) + h.bound, normal: nrm, vertices: vs }
            })
            .collect();
        Ok(ConvexPolytope { n, vertices, origin, span, normals, local, local_vertices, facets })
    }

    pub fn point(p: Vector) -> ConvexPolytope {
        ConvexPolytope::from_vertices(vec![p]).expect("a point is a valid polytope")
    }

    /// The segment `[0,1] e_1` in `E^n`.
    pub fn unit_segment(n: usize) -> ConvexPolytope {
        let mut b = Vector::zeros(n);
        b[0] = 1.0;
        ConvexPolytope::from_vertices(vec![Vector::zeros(n), b]).expect("segment")
    }

    /// The square `[0,1]^2 x {0}` in `E^n`.
    pub fn unit_square(n: usize) -> ConvexPolytope {
        let mut vs = Vec::new();
        for (a, b) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            let mut v = Vector::zeros(n);
            v[0] = a;
            v[1] = b;
            vs.push(v);
        }
        ConvexPolytope::from_vertices(vs).expect("square")
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn affine_dim(&self) -> usize {
        self.span.len()
    }

    pub fn codim(&self) -> usize {
        self.n - self.span.len()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    /// Orthonormal basis of the directions of `Φ`.
    pub fn span_basis(&self) -> &[Vector] {
        &self.span
    }

    /// Orthonormal basis of `Φ⊥`.
    pub fn normal_basis(&self) -> &[Vector] {
        &self.normals
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn centroid(&self) -> Vector {
        let mut c = Vector::zeros(self.n);
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }

    pub fn radius_about(&self, c: &Vector) -> f64 {
        self.vertices.iter().map(|v| dist(v, c)).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max(dist(a, b));
            }
        }
        d
    }

    fn to_local(&self, x: &Vector) -> Vector {
        let d = x - &self.origin;
        Vector::from_iterator(self.span.len(), self.span.iter().map(|e| e.dot(&d)))
    }

    fn from_local(&self, u: &Vector) -> Vector {
        let mut x = self.origin.clone();
        for (c, e) in u.iter().zip(&self.span) {
            x += e * *c;
        }
        x
    }

    /// Orthogonal projection onto the affine span `Φ`.
    pub fn project_to_span(&self, x: &Vector) -> Vector {
        &self.origin + project_onto(&(x - &self.origin), &self.span)
    }

    /// Support function `max_{v in P} <v, d>`.
    pub fn support(&self, d: &Vector) -> f64 {
        self.vertices.iter().map(|v| v.dot(d)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unique nearest point of `P` and the distance to it.
    pub fn nearest_point(&self, x: &Vector) -> (Vector, f64) {
        let p = match &self.local {
            None => self.origin.clone(),
            Some(hp) => {
                let u = self.to_local(x);
                let v = if hp.dim() == 1 {
                    let lo = self.local_vertices.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                    let hi = self.local_vertices.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                    Vector::from_element(1, u[0].clamp(lo, hi))
                } else {
                    hp.nearest_point(&u).unwrap_or_else(|_| {
                        self.local_vertices
                            .iter()
                            .min_by(|a, b| dist(a, &u).partial_cmp(&dist(b, &u)).unwrap())
                            .unwrap()
                            .clone()
                    })
                };
                self.from_local(&v)
            }
        };
        let d = dist(x, &p);
        (p, d)
    }

    pub fn distance(&self, x: &Vector) -> f64 {
        self.nearest_point(x).1
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.distance(x) <= tol
    }

    /// The point at distance `r` on the ray from the nearest point of `P` through `x`.
    pub fn fiber_point(&self, x: &Vector, r: f64) -> Option<Vector> {
        let (x0, d) = self.nearest_point(x);
        if d <= 1e-14 {
            return None;
        }
        Some(&x0 + (x - &x0) * (r / d))
    }

    /// Relative-boundary point `z` minimising `d(a, z) + d(z, b)`, with the outward facet
    /// normal at `z`. Ties go to the lowest facet index.
    pub fn boundary_corner(&self, a: &Vector, b: &Vector) -> Option<(Vector, Vector, f64)> {
        let mut best: Option<(Vector, Vector, f64)> = None;
        for f in &self.facets {
            let pts: Vec<Vector> = f.vertices.iter().map(|i| self.vertices[*i].clone()).collect();
            if pts.is_empty() {
                continue;
            }
            let z = minimise_focal_sum(&pts, a, b);
            let val = dist(a, &z) + dist(&z, b);
            if best.as_ref().is_none_or(|(_, _, v)| val < *v - 1e-12) {
                best = Some((z, unit(&f.normal).unwrap_or_else(|| f.normal.clone()), val));
            }
        }
        best
    }
}

/// Minimise `d(a,z) + d(z,b)` over the convex hull of `pts`.
fn minimise_focal_sum(pts: &[Vector], a: &Vector, b: &Vector) -> Vector {
    let f = |z: &Vector| dist(a, z) + dist(z, b);
    if pts.len() == 1 {
        return pts[0].clone();
    }
    if pts.len() == 2 {
        let (p, q) = (&pts[0], &pts[1]);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if f(&(p + (q - p) * m1)) <= f(&(p + (q - p) * m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        return p + (q - p) * ((lo + hi) / 2.0);
    }
    let hull = match ConvexPolytope::from_vertices(pts.to_vec()) {
        Ok(h) => h,
        Err(_) => return pts[0].clone(),
    };
    let mut z = hull.nearest_point(&((a + b) * 0.5)).0;
    let mut best = (f(&z), z.clone());
    let scale = hull.diameter().max(1e-12);
    for it in 0..600 {
        let ga = unit(&(&z - a)).unwrap_or_else(|| Vector::zeros(z.len()));
        let gb = unit(&(&z - b)).unwrap_or_else(|| Vector::zeros(z.len()));
        let g = ga + gb;
        let step = scale * 0.5 / (1.0 + it as f64);
        z = hull.nearest_point(&(&z - g * step)).0;
        let v = f(&z);
        if v < best.0 {
            best = (v, z.clone());
        }
    }
    best.1
}

/// A point on `∂N_R(P)` with its projections and fiber angle.
#[derive(Clone, Debug)]
pub struct TubePoint {
    pub x: Vector,
    pub x0: Vector,
    pub xp: Vector,
    pub alpha: f64,
    pub radius: f64,
}

impl TubePoint {
    pub fn new(p: &ConvexPolytope, r: f64, x: Vector) -> Result<TubePoint> {
        let (x0, d) = p.nearest_point(&x);
        if (d - r).abs() > SURFACE_TOL {
            return Err(Error::OffTube((d - r).abs()));
        }
        let xp = p.project_to_span(&x);
        let v = &x - &x0;
        let par = project_onto(&v, p.span_basis()).norm();
        let perp = project_onto(&v, p.normal_basis()).norm();
        let alpha = par.atan2(perp);
        Ok(TubePoint { x, x0, xp, alpha, radius: r })
    }

    /// Component of `x - x0` in `Φ⊥`.
    pub fn perp(&self, p: &ConvexPolytope) -> Vector {
        project_onto(&(&self.x - &self.x0), p.normal_basis())
    }

    fn par(&self, p: &ConvexPolytope) -> Vector {
        project_onto(&(&self.x - &self.x0), p.span_basis())
    }
}

/// Angle between the `Φ⊥` parts of the two fibers; zero when either part vanishes.
pub fn fiber_angle(p: &ConvexPolytope, x: &TubePoint, y: &TubePoint) -> f64 {
    let a = x.perp(p);
    let b = y.perp(p);
    if a.norm() <= 1e-12 * x.radius || b.norm() <= 1e-12 * y.radius {
        0.0
    } else {
        angle(&a, &b)
    }
}

/// Which construction produced a tube path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathCase {
    /// Both fibers orthogonal to `Φ`.
    A,
    /// Exactly one oblique fiber.
    B,
    /// Both fibers oblique.
    C,
    /// Codimension one with `Φ` separating the points.
    Separated,
}

#[derive(Clone, Debug)]
pub struct TubePath {
    pub points: Vec<Vector>,
    pub length: f64,
    pub case: PathCase,
    /// `d(x0,y0) + R(α_x + α_y + β)`, or `d(x0,z) + d(z,y0) + R(α_x + α_y + π)` when separated.
    pub reference: f64,
    /// The corner used when separated.
    pub corner: Option<Vector>,
}

/// Does the segment `[a, b]` in `Φ` meet `P`?
pub fn segment_meets(p: &ConvexPolytope, a: &Vector, b: &Vector) -> bool {
    let f = |s: f64| p.distance(&(a + (b - a) * s));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..120 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let scale = 1.0 + a.amax().max(b.amax());
    let best = f(0.0).min(f(1.0)).min(f((lo + hi) / 2.0));
    best <= 1e-7 * scale
}

struct PathSampler {
    spacing: f64,
    points: Vec<Vector>,
    length: f64,
}

impl PathSampler {
    fn push(&mut self, x: Vector) {
        if self.points.last().is_none_or(|l| dist(l, &x) > 1e-13) {
            self.points.push(x);
        }
    }

    /// Circular arc `c + R(cos φ e + sin φ f)` for `φ` from `phi0` to `phi1`.
    fn arc(&mut self, c: &Vector, r: f64, e: &Vector, f: &Vector, phi0: f64, phi1: f64) {
        let len = r * (phi1 - phi0).abs();
        self.length += len;
        let k = ((len / self.spacing).ceil() as usize).max(1);
        for j in 0..=k {
            let phi = phi0 + (phi1 - phi0) * j as f64 / k as f64;
            self.push(c + (e * phi.cos() + f * phi.sin()) * r);
        }
    }

    /// Great-circle arc on the sphere of radius `r` about `c` between unit directions.
    fn sphere_arc(&mut self, c: &Vector, r: f64, u: &Vector, v: &Vector) {
        let th = angle(u, v);
        self.length += r * th;
        let k = ((r * th / self.spacing).ceil() as usize).max(1);
        for j in 0..=k {
            self.push(c + slerp(u, v, j as f64 / k as f64) * r);
        }
    }

    fn segment(&mut self, a: &Vector, b: &Vector) {
        let len = dist(a, b);
        self.length += len;
        let k = ((len / self.spacing).ceil() as usize).max(1);
        for j in 0..=k {
            self.push(a + (b - a) * (j as f64 / k as f64));
        }
    }
}

/// Path on `∂N_R(P)` from `x` to `y` following the face-arc / translate / sphere-arc scheme.
pub fn tube_path(p: &ConvexPolytope, r: f64, x: &TubePoint, y: &TubePoint) -> Result<TubePath> {
    tube_path_sampled(p, r, x, y, r / 16.0)
}

pub fn tube_path_sampled(p: &ConvexPolytope, r: f64, x: &TubePoint, y: &TubePoint, spacing: f64) -> Result<TubePath> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Hypothesis("tube radius must be positive".into()));
    }
    if spacing.is_nan() || spacing <= 0.0 {
        return Err(Error::InvalidMesh(spacing));
    }
    if !segment_meets(p, &x.xp, &y.xp) {
        return Err(Error::Hypothesis("the segment [x', y'] between the projections on the span misses P".into()));
    }
    let n = p.ambient_dim();
    let tiny = 1e-9;
    let perp_x = x.perp(p);
    let perp_y = y.perp(p);
    let mut nx = unit(&perp_x).filter(|_| perp_x.norm() > tiny * r);
    let mut ny = unit(&perp_y).filter(|_| perp_y.norm() > tiny * r);
    match (&nx, &ny) {
        (None, Some(v)) => nx = Some(v.clone()),
        (Some(v), None) => ny = Some(v.clone()),
        (None, None) => {
            let e = p.normal_basis()[0].clone();
            nx = Some(e.clone());
            ny = Some(e);
        }
        _ => {}
    }
    let (nx, ny) = (nx.unwrap(), ny.unwrap());
    let ox = x.alpha > 1e-9;
    let oy = y.alpha > 1e-9;
    let case = match (ox, oy) {
        (false, false) => PathCase::A,
        (true, false) | (false, true) => PathCase::B,
        (true, true) => PathCase::C,
    };
    let separated = p.codim() == 1 && nx.dot(&ny) < 0.0;
    let mut s = PathSampler { spacing, points: Vec::new(), length: 0.0 };
    s.push(x.x.clone());
    // face arc at x down to the orthogonal fiber
    if x.alpha > 0.0 {
        if let Some(t) = unit(&x.par(p)) {
            s.arc(&x.x0, r, &nx, &t, x.alpha, 0.0);
        }
    }
    let xt = &x.x0 + &nx * r;
    let yt = &y.x0 + &ny * r;
    let beta = fiber_angle(p, x, y);
    let (reference, corner) = if separated {
        let (z, m, focal) = p
            .boundary_corner(&x.x0, &y.x0)
            .ok_or_else(|| Error::InvalidPolytope("codimension-one polytope without facets".into()))?;
        s.segment(&xt, &(&z + &nx * r));
        s.arc(&z, r, &nx, &m, 0.0, PI);
        s.segment(&(&z + &ny * r), &yt);
        (focal + r * (x.alpha + y.alpha + PI), Some(z))
    } else {
        let mid = &y.x0 + &nx * r;
        s.segment(&xt, &mid);
        let th = angle(&nx, &ny);
        if th > 1e-12 {
            if th > PI - 1e-6 {
                // antipodal in Φ⊥: go through an orthogonal normal direction
                let w = p
                    .normal_basis()
                    .iter()
                    .map(|e| e - &nx * e.dot(&nx))
                    .find_map(|e| unit(&e).filter(|_| e.norm() > 1e-6))
                    .unwrap_or_else(|| Vector::zeros(n));
                s.sphere_arc(&y.x0, r, &nx, &w);
                s.sphere_arc(&y.x0, r, &w, &ny);
            } else {
                s.sphere_arc(&y.x0, r, &nx, &ny);
            }
        }
        (dist(&x.x0, &y.x0) + r * (x.alpha + y.alpha + beta), None)
    };
    if y.alpha > 0.0 {
        if let Some(t) = unit(&y.par(p)) {
            s.arc(&y.x0, r, &ny, &t, 0.0, y.alpha);
        }
    }
    s.push(y.x.clone());
    if let Some(last) = s.points.last_mut() {
        *last = y.x.clone();
    }
    Ok(TubePath {
        points: s.points,
        length: s.length,
        case: if separated { PathCase::Separated } else { case },
        reference,
        corner,
    })
}

pub fn polyline_length(points: &[Vector]) -> f64 {
    points.windows(2).map(|w| dist(&w[0], &w[1])).sum()
}

/// Result of projecting a path from `∂N_{R_out}` to `∂N_{R_in}`.
#[derive(Clone, Debug)]
pub struct RadialProjection {
    pub points: Vec<Vector>,
    pub a: f64,
    pub outer_length: f64,
    pub inner_length: f64,
    /// `outer_length / inner_length`.
    pub ratio: f64,
}

/// Map each point `x` to the point at distance `R_in` on `[x0, x]`.
pub fn radial_project_path(p: &ConvexPolytope, r_out: f64, r_in: f64, path: &[Vector]) -> Result<RadialProjection> {
    if !(r_in > 0.0 && r_in < r_out) {
        return Err(Error::Hypothesis(format!("need 0 < R_in < R_out, got {r_in} and {r_out}")));
    }
    let mut pts = Vec::with_capacity(path.len());
    for x in path {
        let (x0, d) = p.nearest_point(x);
        if (d - r_out).abs() > SURFACE_TOL {
            return Err(Error::OffTube((d - r_out).abs()));
        }
        pts.push(&x0 + (x - &x0) * (r_in / d));
    }
    let outer = polyline_length(path);
    let inner = polyline_length(&pts);
    let ratio = if inner > 0.0 { outer / inner } else { 1.0 };
    Ok(RadialProjection { points: pts, a: r_out / r_in, outer_length: outer, inner_length: inner, ratio })
}

/// Projection of `∂ℜ` onto `∂N_R(P)` for a polytope `N_R(P) ⊂ ℜ ⊂ N_{aR}(P)`.
#[derive(Clone, Debug)]
pub struct SandwichProjection {
    pub region: HPolytope,
    pub polytope: ConvexPolytope,
    pub radius: f64,
    /// Smallest `a` with `ℜ ⊂ N_{aR}(P)`.
    pub a: f64,
}

/// Sampled length ratios of the sandwich projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioReport {
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub fn sandwich_project(region: &HPolytope, p: &ConvexPolytope, r: f64) -> Result<SandwichProjection> {
    if region.dim() != p.ambient_dim() {
        return Err(Error::Dimension { expected: p.ambient_dim(), got: region.dim() });
    }
    if region.is_empty() {
        return Err(Error::Inclusion { witness: p.vertices()[0].iter().copied().collect(), reason: "region is empty".into() });
    }
    for h in region.halfspaces() {
        let (idx, sup) = p
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.dot(&h.normal)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if sup + r * h.normal.norm() > h.bound + 1e-9 * (1.0 + h.bound.abs()) {
            let w = &p.vertices()[idx] + &h.normal * (r / h.normal.norm());
            return Err(Error::Inclusion {
                witness: w.iter().copied().collect(),
                reason: "N_R(P) is not inside the region".into(),
            });
        }
    }
    if !region.is_bounded() {
        let base = region.interior_point().cloned().unwrap_or_else(|| p.centroid());
        let dir = region.rays().first().or(region.lineality().first()).cloned().unwrap();
        let w = base + dir * (10.0 * (r + p.diameter()) + 1.0);
        return Err(Error::Inclusion { witness: w.iter().copied().collect(), reason: "region is unbounded".into() });
    }
    let far = region
        .vertices().iter().map(|v| p.distance(v)).fold(0.0, f64::max);
    let a = (far / r).max(1.0);
    Ok(SandwichProjection { region: region.clone(), polytope: p.clone(), radius: r, a })
}

impl SandwichProjection {
    /// `∂ℜ -> ∂N_R(P)` along fibers.
    pub fn map(&self, x: &Vector) -> Option<Vector> {
        self.polytope.fiber_point(x, self.radius)
    }

    /// Inverse of [`map`](Self::map): exit point of the fiber ray from `P` through `y`.
    pub fn pull_back(&self, y: &Vector) -> Option<Vector> {
        let (y0, _) = self.polytope.nearest_point(y);
        let d = unit(&(y - &y0))?;
        crate::trace::ray_exit(&self.region, &y0, &d)
    }

    /// Length ratios `len(path on ∂ℜ) / len(projected path)` over random chords of facets.
    pub fn ratio_report<R: Rng>(&self, samples: usize, rng: &mut R) -> RatioReport {
        let facets: Vec<Vec<Vector>> = self
            .region
            .halfspaces()
            .iter()
            .map(|h| self.region.vertices().iter().filter(|v| h.slack(v).abs() <= 1e-7).cloned().collect::<Vec<_>>())
            .filter(|vs| vs.len() >= 2)
            .collect();
        let mut rep = RatioReport { samples: 0, min_ratio: f64::INFINITY, max_ratio: 0.0 };
        if facets.is_empty() {
            return rep;
        }
        let pick = |vs: &[Vector], rng: &mut R| {
            let w: Vec<f64> = vs.iter().map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
            let tot: f64 = w.iter().sum();
            let mut x = Vector::zeros(vs[0].len());
            for (v, c) in vs.iter().zip(&w) {
                x += v * (*c / tot);
            }
            x
        };
        for _ in 0..samples {
            let f = &facets[rng.random_range(0..facets.len())];
            let a = pick(f, rng);
            let b0 = pick(f, rng);
            let t = 0.02 + 0.3 * rng.random::<f64>();
            let b = &a + (&b0 - &a) * t;
            let pts: Vec<Vector> = (0..=32).map(|j| &a + (&b - &a) * (j as f64 / 32.0)).collect();
            let mapped: Option<Vec<Vector>> = pts.iter().map(|x| self.map(x)).collect();
            let Some(mapped) = mapped else { continue };
            let lo = polyline_length(&pts);
            let li = polyline_length(&mapped);
            if li <= 1e-12 || lo <= 1e-12 {
                continue;
            }
            let q = lo / li;
            rep.samples += 1;
            rep.min_ratio = rep.min_ratio.min(q);
            rep.max_ratio = rep.max_ratio.max(q);
        }
        rep
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StripCase {
    Codim3,
    Codim2Strip,
    Codim1Strip,
    Fails,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripClass {
    pub case: StripCase,
    pub delta: f64,
    /// Acute dihedral angle of the two slabs; zero outside the codimension-one case.
    pub epsilon: f64,
}

/// Minimal dihedral angle accepted between the two slabs of a codimension-one strip.
pub const STRIP_MIN_ANGLE: f64 = FRAC_PI_4;

fn width_along(pts: &[Vector], d: &Vector) -> f64 {
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let s = p.dot(d);
        (lo.min(s), hi.max(s))
    });
    hi - lo
}

/// Unit directions in `E^k` used by the strip searches (one per antipodal pair).
fn direction_grid(k: usize, extra: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = extra.iter().filter_map(unit).collect();
    match k {
        0 => {}
        1 => out.push(Vector::from_element(1, 1.0)),
        2 => {
            let m = 720;
            for j in 0..m {
                let t = PI * j as f64 / m as f64;
                out.push(Vector::from_vec(vec![t.cos(), t.sin()]));
            }
        }
        _ => {
            // Fibonacci points on the upper half of S^2, padded with zeros in higher dimensions
            let m = 800;
            let ga = PI * (3.0 - 5f64.sqrt());
            for j in 0..m {
                let z = 1.0 - (j as f64 + 0.5) / m as f64;
                let rr = (1.0 - z * z).sqrt();
                let th = ga * j as f64;
                let mut v = Vector::zeros(k);
                v[0] = rr * th.cos();
                v[1] = rr * th.sin();
                v[2] = z;
                out.push(v);
            }
            for i in 0..k {
                out.push(crate::linalg::basis_vector(k, i));
            }
        }
    }
    out
}

/// Strip classification of `P` inside its span.
pub fn classify_strip(p: &ConvexPolytope) -> StripClass {
    let fails = StripClass { case: StripCase::Fails, delta: f64::INFINITY, epsilon: 0.0 };
    if p.ambient_dim() < 3 || p.codim() == 0 {
        return fails;
    }
    let k = p.affine_dim();
    let local: Vec<Vector> = p.vertices().iter().map(|v| p.to_local(v)).collect();
    let facet_normals: Vec<Vector> = p.facets().iter().map(|f| p.to_local(&(&f.normal + &p.origin))).collect();
    match p.codim() {
        c if c >= 3 => StripClass { case: StripCase::Codim3, delta: 0.0, epsilon: 0.0 },
        2 => {
            let delta = if k == 0 {
                0.0
            } else {
                direction_grid(k, &facet_normals)
                    .iter()
                    .map(|d| width_along(&local, d))
                    .fold(f64::INFINITY, f64::min)
            };
            StripClass { case: StripCase::Codim2Strip, delta, epsilon: 0.0 }
        }
        _ => {
            let dirs = direction_grid(k, &facet_normals);
            let widths: Vec<f64> = dirs.iter().map(|d| width_along(&local, d)).collect();
            let mut best: Option<(f64, f64)> = None;
            for i in 0..dirs.len() {
                for j in i + 1..dirs.len() {
                    let ang = dirs[i].dot(&dirs[j]).abs().clamp(0.0, 1.0).acos();
                    if ang < STRIP_MIN_ANGLE - 1e-12 {
                        continue;
                    }
                    let delta = widths[i].max(widths[j]);
                    let better = match best {
                        None => true,
                        Some((bd, be)) => delta < bd - 1e-12 || ((delta - bd).abs() <= 1e-12 && ang > be + 1e-12),
                    };
                    if better {
                        best = Some((delta, ang));
                    }
                }
            }
            match best {
                Some((delta, eps)) => StripClass { case: StripCase::Codim1Strip, delta, epsilon: eps.min(FRAC_PI_2) },
                None => fails,
            }
        }
    }
}
