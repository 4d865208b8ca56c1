//! Flat fillings: cone fans, the descending cylinder, the one-apartment pipeline through a
//! tube, uniform refinement, and log-log exponent fits.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coxeter::{ort_distance, RootSystem, Slope};
use crate::error::{Error, Result};
use crate::fan::{densify_collinear, fill_tube_loop, flat_cone, FillCase, KAPPA_SHRINK};
use crate::linalg::{dist, Vector, SURFACE_TOL};
use crate::partition::{validate_partition, BrickCensus, Builder, FillingPartition, Host, Loop};
use crate::polytope::{HPolytope, Lp, LpStatus};
use crate::trace::{horoball_polytope, level_project, min_set, BusemannTrace};
use crate::tube::{classify_strip, sandwich_project, ConvexPolytope, StripCase};

/// Mark and rung spacing as a fraction of the mesh. Two sides of a strip triangle are at
/// most one spacing each and the diagonal at most `sqrt 2` of it, so `(2 + sqrt 2) s <= mesh`.
pub const STRIP_SPACING: f64 = 0.29;

const MAX_STRIP_RETRIES: usize = 8;
const MAX_PIPELINE_RETRIES: usize = 8;

/// Fan from the first loop vertex, refined until every brick has perimeter at most `mesh`.
/// Every brick is a flat Euclidean triangle.
pub fn cone_fill(lp: &Loop, mesh: f64) -> Result<FillingPartition> {
    if mesh.is_nan() || mesh <= 0.0 {
        return Err(Error::InvalidMesh(mesh));
    }
    if !matches!(lp.host(), Host::Flat) {
        return Err(Error::Hypothesis("cone fill needs a loop in a convex flat region".into()));
    }
    if lp.is_constant() {
        return Ok(FillingPartition::empty(&lp.vertices()[0]));
    }
    let mut fp = flat_cone(lp, mesh)?;
    fp.classify(|_, _, _| true);
    Ok(fp)
}

/// Annulus between an outer polygon and its image polygon, made of zipper strips along
/// straight rungs `outer[k] -> inner[k]`.
#[derive(Clone, Debug)]
pub struct Annulus {
    pub vertices: Vec<Vector>,
    pub triangles: Vec<[usize; 3]>,
    /// Outer cycle, one index per outer point.
    pub outer: Vec<usize>,
    /// Inner cycle with consecutive coincident points merged.
    pub inner: Vec<usize>,
    pub spacing: f64,
    pub mesh: f64,
}

impl Annulus {
    pub fn area(&self) -> usize {
        self.triangles.len()
    }

    pub fn inner_points(&self) -> Vec<Vector> {
        self.inner.iter().map(|i| self.vertices[*i].clone()).collect()
    }

    fn builder(&self) -> Builder {
        Builder { vertices: self.vertices.clone(), triangles: self.triangles.clone() }
    }

    /// Close the annulus with a disk whose boundary runs along the inner cycle.
    pub fn cap(&self, disk: &FillingPartition) -> Result<FillingPartition> {
        let mut b = self.builder();
        b.attach_disk(&self.inner, disk)?;
        Ok(b.finish(self.outer.clone()))
    }
}

fn rung(b: &mut Builder, top: usize, from: &Vector, to: &Vector, spacing: f64) -> Vec<usize> {
    let len = dist(from, to);
    let pieces = (len / spacing).ceil() as usize;
    let mut out = Vec::with_capacity(pieces + 1);
    out.push(b.add(from.clone()));
    for j in 1..pieces {
        let s = j as f64 / pieces as f64;
        out.push(b.add(from * (1.0 - s) + to * s));
    }
    if pieces == 0 {
        // coincident ends: the rung is the single top vertex
        return vec![top];
    }
    out.push(top);
    out
}

fn annulus_once(outer: &[Vector], inner: &[Vector], spacing: f64) -> Annulus {
    let n = outer.len();
    let mut b = Builder::default();
    // inner cycle first, merging repeats
    let mut inner_idx: Vec<usize> = Vec::with_capacity(n);
    for (k, q) in inner.iter().enumerate() {
        match inner_idx.last() {
            Some(&last) if k > 0 && dist(&b.vertices[last], q) <= 1e-12 => inner_idx.push(last),
            _ => {
                let i = b.add(q.clone());
                inner_idx.push(i);
            }
        }
    }
    if n > 1 && inner_idx[n - 1] != inner_idx[0] && dist(&b.vertices[inner_idx[n - 1]], &b.vertices[inner_idx[0]]) <= 1e-12 {
        let (last, first) = (inner_idx[n - 1], inner_idx[0]);
        for v in inner_idx.iter_mut().rev() {
            if *v == last {
                *v = first;
            } else {
                break;
            }
        }
    }
    let rungs: Vec<Vec<usize>> = (0..n).map(|k| rung(&mut b, inner_idx[k], &outer[k], &inner[k], spacing)).collect();
    let outer_idx: Vec<usize> = rungs.iter().map(|r| r[0]).collect();
    for k in 0..n {
        let k1 = (k + 1) % n;
        if n > 1 {
            b.zipper(&rungs[k1], &rungs[k]);
        }
    }
    let mut ring = Vec::new();
    for &i in &inner_idx {
        if ring.last() != Some(&i) {
            ring.push(i);
        }
    }
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    let mesh = if b.triangles.is_empty() { 0.0 } else { b.max_perimeter_from(0) };
    Annulus { vertices: b.vertices, triangles: b.triangles, outer: outer_idx, inner: ring, spacing, mesh }
}

/// Strips between `outer` and `inner` (same length), shrinking the rung spacing until every
/// strip brick has perimeter at most `mesh`.
pub fn build_annulus(outer: &[Vector], inner: &[Vector], mesh: f64) -> Result<Annulus> {
    if outer.len() != inner.len() || outer.is_empty() {
        return Err(Error::InvalidLoop("annulus sides differ in length".into()));
    }
    let mut spacing = STRIP_SPACING * mesh;
    let mut achieved = f64::INFINITY;
    for _ in 0..MAX_STRIP_RETRIES {
        let a = annulus_once(outer, inner, spacing);
        if a.mesh <= mesh * (1.0 + 1e-9) {
            return Ok(a);
        }
        achieved = achieved.min(a.mesh);
        spacing *= 0.9;
    }
    Err(Error::MeshNotReached { target: mesh, achieved })
}

/// Options of the descending cylinder.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderOptions {
    pub mesh: f64,
    /// Index into the Weyl group elements; the flow direction is `w u_beta`.
    pub weyl: usize,
    /// Distance of the target hyperplane from the first loop vertex; defaults to
    /// `length (1 + 1 / sin delta1)`.
    pub height: Option<f64>,
}

impl Default for CylinderOptions {
    fn default() -> Self {
        CylinderOptions { mesh: 1.0, weyl: 0, height: None }
    }
}

#[derive(Clone, Debug)]
pub struct CylinderDescent {
    /// The loop of flowed marks.
    pub inner: Loop,
    pub annulus: Annulus,
    pub direction: Vector,
    pub height: f64,
    pub mesh: f64,
    /// Marks on the input loop, at spacing at most the strip spacing.
    pub marks: Vec<Vector>,
    pub flowed: Vec<Vector>,
}

impl CylinderDescent {
    /// Close the cylinder by a cone fill of the inner loop.
    pub fn cap_with_cone(&self, lp: &Loop) -> Result<FillingPartition> {
        let mesh = self.mesh;
        let pts = self.annulus.inner_points();
        let disk = if pts.len() == 1 {
            FillingPartition::empty(&pts[0])
        } else {
            cone_fill(&Loop::flat(pts)?, mesh)?
        };
        let mut fp = self.annulus.cap(&disk)?;
        fp.classify(|_, _, _| true);
        validate_partition(lp, &fp)?;
        Ok(fp)
    }
}

/// Flow marks of a flat loop along `w u_beta` onto the hyperplane orthogonal to that
/// direction, and join the loop to its image by strips.
pub fn cylinder_descend(
    lp: &Loop,
    beta: &Slope,
    rs: &RootSystem,
    theta: &Slope,
    delta1: f64,
    opts: &CylinderOptions,
) -> Result<CylinderDescent> {
    if opts.mesh.is_nan() || opts.mesh <= 0.0 {
        return Err(Error::InvalidMesh(opts.mesh));
    }
    if !matches!(lp.host(), Host::Flat) {
        return Err(Error::Hypothesis("cylinder descent needs a loop in one apartment".into()));
    }
    if lp.dim() != rs.rank() {
        return Err(Error::Dimension { expected: rs.rank(), got: lp.dim() });
    }
    if !(delta1 > 0.0 && delta1 < std::f64::consts::FRAC_PI_2) {
        return Err(Error::OutOfRange(format!("delta1 = {delta1} must lie in (0, pi/2)")));
    }
    let gap = ort_distance(rs, theta, beta);
    if gap <= delta1 {
        return Err(Error::Hypothesis(format!("slope fails the good-slope recheck: gap {gap:.4} <= delta1 {delta1}")));
    }
    let w = rs
        .elements()
        .get(opts.weyl)
        .ok_or_else(|| Error::OutOfRange(format!("Weyl element {} >= {}", opts.weyl, rs.order())))?;
    let d = w * beta.direction();
    let ell = lp.length();
    let height = opts.height.unwrap_or(ell * (1.0 + 1.0 / delta1.sin()));
    let p0 = lp.vertices()[0].clone();
    let flow = |p: &Vector| -> Vector {
        let h = (p - &p0).dot(&d);
        p + &d * (height - h)
    };
    let mut spacing = STRIP_SPACING * opts.mesh;
    let mut achieved = f64::INFINITY;
    for _ in 0..MAX_STRIP_RETRIES {
        let marks = if lp.is_constant() { lp.vertices().to_vec() } else { densify_collinear(lp.vertices(), spacing).0 };
        let flowed: Vec<Vector> = marks.iter().map(&flow).collect();
        let annulus = annulus_once(&marks, &flowed, spacing);
        if annulus.mesh > opts.mesh * (1.0 + 1e-9) {
            achieved = achieved.min(annulus.mesh);
            spacing *= 0.9;
            continue;
        }
        let inner = Loop::flat(annulus.inner_points())?;
        if inner.length() > ell + 1e-6 * (1.0 + ell) {
            return Err(Error::Hypothesis(format!("inner loop is longer than the loop: {} > {ell}", inner.length())));
        }
        return Ok(CylinderDescent { inner, annulus, direction: d, height, mesh: opts.mesh, marks, flowed });
    }
    Err(Error::MeshNotReached { target: opts.mesh, achieved })
}

/// Which construction produced a flat filling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlatRoute {
    /// The loop's convex hull avoids the open sublevel set.
    Cone,
    /// Level projection, tube fill around the min set, pull back.
    Pipeline,
}

#[derive(Clone, Debug)]
pub struct FlatFilling {
    pub partition: FillingPartition,
    pub route: FlatRoute,
    /// Triangles of the projection annulus (zero on the cone route).
    pub annulus_area: usize,
    /// Mesh used for the inner tube fill.
    pub tube_mesh: Option<f64>,
    pub tube_case: Option<FillCase>,
    /// Sandwich constant of the pull back.
    pub a: Option<f64>,
}

impl FlatFilling {
    pub fn census(&self) -> BrickCensus {
        self.partition.census
    }
}

fn segment_min(trace: &BusemannTrace, a: &Vector, b: &Vector) -> f64 {
    let f = |s: f64| trace.value(&(a * (1.0 - s) + b * s));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
}

/// Minimum of the trace over the convex hull of `pts`.
fn hull_min(trace: &BusemannTrace, pts: &[Vector]) -> Result<f64> {
    let n = pts.len();
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut bounds = vec![(0.0, f64::INFINITY); n];
    bounds.push((f64::NEG_INFINITY, f64::INFINITY));
    let mut lp = Lp::new(false, &obj, &bounds);
    for piece in trace.pieces() {
        let mut row: Vec<f64> = pts.iter().map(|p| piece.gradient.dot(p) + piece.offset).collect();
        row.push(-1.0);
        lp.le(&row, 0.0);
    }
    let mut sum = vec![1.0; n];
    sum.push(0.0);
    lp.eq(&sum, 1.0);
    match lp.solve() {
        Ok(Some((v, _))) => Ok(v),
        Ok(None) => Err(Error::Lp("hull LP infeasible".into())),
        Err(LpStatus::Unbounded) => Err(Error::Lp("hull LP unbounded".into())),
        Err(LpStatus::Failed) => Err(Error::Lp("hull LP failed".into())),
    }
}

/// Fill a flat loop lying outside the open sublevel set `{value < 0}` of `trace`.
///
/// A loop whose hull misses the open sublevel set gets a cone. Otherwise the loop is
/// joined to its projection on the level set by strips, the projection is carried to the
/// tube `∂N_m(Min)` and filled there, and that disk is pulled back to the level set.
pub fn fill_flat_loop(trace: &BusemannTrace, lp: &Loop, mesh: f64) -> Result<FlatFilling> {
    if mesh.is_nan() || mesh <= 0.0 {
        return Err(Error::InvalidMesh(mesh));
    }
    if lp.dim() != trace.dim() {
        return Err(Error::Dimension { expected: trace.dim(), got: lp.dim() });
    }
    let pts = lp.vertices();
    let n = pts.len();
    for i in 0..n {
        let v = if n == 1 { trace.value(&pts[0]) } else { segment_min(trace, &pts[i], &pts[(i + 1) % n]) };
        if v < -SURFACE_TOL {
            return Err(Error::BelowLevel { value: v, level: 0.0 });
        }
    }
    let flat = FillingPartition::brick_is_flat_on(trace);
    if lp.is_constant() {
        return Ok(FlatFilling {
            partition: FillingPartition::empty(&pts[0]),
            route: FlatRoute::Cone,
            annulus_area: 0,
            tube_mesh: None,
            tube_case: None,
            a: None,
        });
    }
    let flat_loop = Loop::flat(pts.to_vec())?;
    if hull_min(trace, pts)? >= -1e-9 {
        let mut fp = cone_fill(&flat_loop, mesh)?;
        fp.classify(&flat);
        return Ok(FlatFilling { partition: fp, route: FlatRoute::Cone, annulus_area: 0, tube_mesh: None, tube_case: None, a: None });
    }

    let ms = min_set(trace)?;
    if !ms.polytope.is_bounded() {
        return Err(Error::Hypothesis("the min set is unbounded".into()));
    }
    let pmin = ConvexPolytope::from_vertices(ms.polytope.vertices().to_vec())?;
    if classify_strip(&pmin).case == StripCase::Fails {
        return Err(Error::StripFails);
    }
    let m = -ms.value;
    let hb0 = horoball_polytope(trace, 0.0)?;
    let sp = sandwich_project(&hb0, &pmin, m)?;
    let pmin = Arc::new(pmin);

    let mut spacing = STRIP_SPACING * mesh;
    let mut annulus = None;
    for _ in 0..MAX_STRIP_RETRIES {
        let (outer, _) = densify_collinear(pts, spacing);
        let inner = outer.iter().map(|x| level_project(trace, x, 0.0)).collect::<Result<Vec<_>>>()?;
        let a = annulus_once(&outer, &inner, spacing);
        if a.mesh <= mesh * (1.0 + 1e-9) {
            annulus = Some(a);
            break;
        }
        spacing *= 0.9;
    }
    let annulus = annulus.ok_or(Error::MeshNotReached { target: mesh, achieved: f64::NAN })?;
    let ring = annulus.inner_points();
    let fibers: Vec<Vector> = ring
        .iter()
        .map(|y| pmin.fiber_point(y, m).ok_or_else(|| Error::Hypothesis("level point lies on the min set".into())))
        .collect::<Result<_>>()?;
    let host = Host::Tube { polytope: pmin.clone(), radius: m };

    let mut tube_mesh = mesh / sp.a;
    let mut last = f64::INFINITY;
    for _ in 0..MAX_PIPELINE_RETRIES {
        let disk = if ring.len() == 1 {
            (FillingPartition::empty(&ring[0]), None)
        } else {
            let tl = Loop::new(fibers.clone(), host.clone())?;
            if tl.len() != ring.len() {
                return Err(Error::Hypothesis("distinct level points share a fiber".into()));
            }
            let tf = fill_tube_loop(&pmin, m, &tl, tube_mesh)?;
            let mut d = tf.partition;
            pull_back_disk(&mut d, &sp, &fibers, &ring)?;
            (d, Some(tf.case))
        };
        let (d, case) = disk;
        let mut fp = annulus.cap(&d)?;
        let (got, _) = validate_partition(&flat_loop, &fp)?;
        if got <= mesh * (1.0 + 1e-9) {
            fp.classify(&flat);
            return Ok(FlatFilling {
                partition: fp,
                route: FlatRoute::Pipeline,
                annulus_area: annulus.area(),
                tube_mesh: Some(tube_mesh),
                tube_case: case,
                a: Some(sp.a),
            });
        }
        last = last.min(got);
        tube_mesh *= (mesh / got * 0.97).min(KAPPA_SHRINK);
    }
    Err(Error::MeshNotReached { target: mesh, achieved: last })
}

/// Replace tube positions by their pull back to the level set; boundary vertices at the
/// fiber points snap exactly onto the matching level points.
fn pull_back_disk(
    d: &mut FillingPartition,
    sp: &crate::tube::SandwichProjection,
    fibers: &[Vector],
    ring: &[Vector],
) -> Result<()> {
    let mut exact: HashMap<usize, usize> = HashMap::new();
    let mut j = 0usize;
    for (pos, &bi) in d.boundary.iter().enumerate() {
        if pos == 0 {
            exact.insert(bi, 0);
            continue;
        }
        if j + 1 < fibers.len() && dist(&d.vertices[bi], &fibers[j + 1]) <= 1e-12 * (1.0 + fibers[j + 1].amax()) {
            j += 1;
            exact.insert(bi, j);
        }
    }
    for (i, v) in d.vertices.iter_mut().enumerate() {
        *v = match exact.get(&i) {
            Some(&k) => ring[k].clone(),
            None => sp.pull_back(v).ok_or_else(|| Error::Hypothesis("pull back ray misses the level set".into()))?,
        };
    }
    d.recompute();
    Ok(())
}

/// Boundary polygon of the section of a bounded polytope by the plane `center + span(e1, e2)`,
/// counterclockwise in the plane coordinates. Corners are where the plane meets faces of
/// codimension two, so every chord between consecutive corners lies in one facet.
pub fn plane_section(poly: &HPolytope, center: &Vector, e1: &Vector, e2: &Vector) -> Result<Vec<Vector>> {
    let lines: Vec<(f64, f64, f64)> = poly
        .halfspaces()
        .iter()
        .map(|h| (h.normal.dot(e1), h.normal.dot(e2), h.bound - h.normal.dot(center)))
        .collect();
    if lines.iter().any(|l| l.2 <= 0.0) {
        return Err(Error::Hypothesis("section center is not interior".into()));
    }
    let mut corners: Vec<(f64, f64)> = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-12 {
                continue;
            }
            let u = (c1 * b2 - c2 * b1) / det;
            let v = (a1 * c2 - a2 * c1) / det;
            let slack = 1e-9 * (1.0 + u.abs() + v.abs());
            if lines.iter().all(|(a, b, c)| a * u + b * v <= c + slack) {
                corners.push((u, v));
            }
        }
    }
    if corners.len() < 3 {
        return Err(Error::Hypothesis("plane section is unbounded or degenerate".into()));
    }
    corners.sort_by(|p, q| p.1.atan2(p.0).total_cmp(&q.1.atan2(q.0)));
    let mut out: Vec<Vector> = Vec::new();
    for (u, v) in corners {
        let x = center + e1 * u + e2 * v;
        if out.last().is_none_or(|l| dist(l, &x) > 1e-9) {
            out.push(x);
        }
    }
    while out.len() > 1 && dist(&out[0], out.last().unwrap()) <= 1e-9 {
        out.pop();
    }
    Ok(out)
}

/// What to do with uncontrolled bricks when refining.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WildPolicy {
    #[default]
    Reject,
    /// Subdivide every brick as if it were flat.
    Subdivide,
}

/// Subdivide every brick into `k^2` similar triangles with `k = ceil(mesh / lambda)`.
pub fn refine_partition(fp: &FillingPartition, lambda: f64, policy: WildPolicy) -> Result<FillingPartition> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidMesh(lambda));
    }
    if policy == WildPolicy::Reject && fp.census.wild_bricks > 0 {
        return Err(Error::WildBricks { count: fp.census.wild_bricks });
    }
    let k = ((fp.mesh / lambda) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    if k == 1 {
        return Ok(fp.clone());
    }
    let mut vertices = fp.vertices.clone();
    let mut edge_points: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    // interior points of edge (a, b) with a < b, ordered from a
    let mut edge = |vertices: &mut Vec<Vector>, a: usize, b: usize| -> Vec<usize> {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let pts = edge_points
            .entry((lo, hi))
            .or_insert_with(|| {
                (1..k)
                    .map(|j| {
                        let s = j as f64 / k as f64;
                        let p = &vertices[lo] * (1.0 - s) + &vertices[hi] * s;
                        vertices.push(p);
                        vertices.len() - 1
                    })
                    .collect()
            })
            .clone();
        if a < b {
            pts
        } else {
            pts.into_iter().rev().collect()
        }
    };
    let mut triangles = Vec::with_capacity(fp.triangles.len() * k * k);
    for t in &fp.triangles {
        let [a, b, c] = *t;
        let ab = edge(&mut vertices, a, b);
        let ac = edge(&mut vertices, a, c);
        let bc = edge(&mut vertices, b, c);
        // lattice index (i along ab, j along ac), i + j <= k
        let mut grid: HashMap<(usize, usize), usize> = HashMap::new();
        for i in 0..=k {
            for j in 0..=(k - i) {
                let id = match (i, j) {
                    (0, 0) => a,
                    (i, 0) if i == k => b,
                    (0, j) if j == k => c,
                    (i, 0) => ab[i - 1],
                    (0, j) => ac[j - 1],
                    (i, j) if i + j == k => bc[j - 1],
                    (i, j) => {
                        let s = i as f64 / k as f64;
                        let r = j as f64 / k as f64;
                        let p = &fp.vertices[a] + (&fp.vertices[b] - &fp.vertices[a]) * s + (&fp.vertices[c] - &fp.vertices[a]) * r;
                        vertices.push(p);
                        vertices.len() - 1
                    }
                };
                grid.insert((i, j), id);
            }
        }
        for i in 0..k {
            for j in 0..(k - i) {
                triangles.push([grid[&(i, j)], grid[&(i + 1, j)], grid[&(i, j + 1)]]);
                if i + j + 1 < k {
                    triangles.push([grid[&(i + 1, j)], grid[&(i + 1, j + 1)], grid[&(i, j + 1)]]);
                }
            }
        }
    }
    let nb = fp.boundary.len();
    let mut boundary = Vec::with_capacity(nb * k);
    for (p, &u) in fp.boundary.iter().enumerate() {
        boundary.push(u);
        if nb > 1 {
            let v = fp.boundary[(p + 1) % nb];
            if u != v {
                boundary.extend(edge(&mut vertices, u, v));
            }
        }
    }
    let mut out = FillingPartition::new(vertices, triangles, boundary);
    let scale = k * k;
    out.census = BrickCensus { flat_bricks: fp.census.flat_bricks * scale, wild_bricks: fp.census.wild_bricks * scale };
    Ok(out)
}

/// Least-squares line through `(log length, log area)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// `slope +- 2 stderr`.
    pub band: (f64, f64),
    /// Residuals of the points used in the fit.
    pub residuals: Vec<f64>,
    /// Lengths used (the top half of the range).
    pub lengths: Vec<f64>,
}

/// Fit `log area = slope log length + c` on the given points.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(Error::OutOfRange("need at least two points to fit".into()));
    }
    if points.iter().any(|(l, a)| !(*l > 0.0 && *a > 0.0)) {
        return Err(Error::OutOfRange("lengths and areas must be positive".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::OutOfRange("lengths are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (slope * x + intercept)).collect();
    let stderr = if points.len() > 2 {
        (residuals.iter().map(|r| r * r).sum::<f64>() / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LogLogFit {
        slope,
        intercept,
        stderr,
        band: (slope - 2.0 * stderr, slope + 2.0 * stderr),
        residuals,
        lengths: points.iter().map(|p| p.0).collect(),
    })
}

/// Exponent of the filling function from `(length, area)` observations.
///
/// Areas are reduced to the minimum per length, made nondecreasing in the length by a
/// running max, and fitted on the top half of the length range.
pub fn dehn_exponent(records: &[(f64, usize)]) -> Result<LogLogFit> {
    let mut per: Vec<(f64, usize)> = Vec::new();
    let mut sorted = records.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (l, a) in sorted {
        match per.last_mut() {
            Some(last) if (last.0 - l).abs() <= 1e-12 * l.abs().max(1.0) => last.1 = last.1.min(a),
            _ => per.push((l, a)),
        }
    }
    if per.len() < 4 {
        return Err(Error::OutOfRange(format!("need at least 4 distinct lengths, got {}", per.len())));
    }
    if per[per.len() - 1].0 < 10.0 * per[0].0 {
        return Err(Error::OutOfRange("lengths must span at least a decade".into()));
    }
    let mut running = 0usize;
    for p in per.iter_mut() {
        running = running.max(p.1);
        p.1 = running;
    }
    if per.iter().all(|p| p.1 == per[0].1) {
        return Err(Error::DegenerateFit(format!("areas are constant ({})", per[0].1)));
    }
    let top = &per[per.len() / 2..];
    let pts: Vec<(f64, f64)> = top.iter().map(|(l, a)| (*l, (*a).max(1) as f64)).collect();
    fit_loglog(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn unit_square() -> Loop {
        Loop::flat(vec![vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), vector(&[1.0, 1.0]), vector(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn refine_counts() {
        let pts = vec![vector(&[0.0, 0.0]), vector(&[1.0, 0.0]), vector(&[0.5, 0.8])];
        let lp = Loop::flat(pts.clone()).unwrap();
        let mut fp = FillingPartition::new(pts, vec![[0, 1, 2]], vec![0, 1, 2]);
        fp.classify(|_, _, _| true);
        let half = refine_partition(&fp, fp.mesh / 2.0, WildPolicy::Reject).unwrap();
        assert_eq!(half.area, 4);
        validate_partition(&lp, &half).unwrap();
        let quarter = refine_partition(&fp, fp.mesh / 4.0, WildPolicy::Reject).unwrap();
        assert_eq!(quarter.area, 16);
        validate_partition(&lp, &quarter).unwrap();
    }

    #[test]
    fn cone_square_valid() {
        let lp = unit_square();
        let fp = cone_fill(&lp, 1.0).unwrap();
        validate_partition(&lp, &fp).unwrap();
        assert!(fp.mesh <= 1.0 + 1e-9);
        assert_eq!(fp.census.flat_bricks, fp.area);
    }
}
