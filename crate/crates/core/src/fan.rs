//! Loop fillings on tube boundaries `∂N_R(P)` by fans of canonical curves.
//!
//! A fan is built in a chart: the sphere `S` of radius `ρ` about the centroid of `P`
//! maps onto the tube by the nearest-point projection to `N_R(P)`, which is 1-Lipschitz
//! and a homeomorphism. Spokes are images of great arcs of `S`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{angle, dist, slerp, unit, Vector, SURFACE_TOL};
use crate::partition::{validate_partition, Builder, FillingPartition, Host, Loop};
use crate::tube::{classify_strip, segment_meets, tube_path_sampled, ConvexPolytope, StripCase, TubePoint};

/// Apex clearance (radians) below which another apex strategy is tried.
pub const MIN_CLEARANCE: f64 = 0.3;

/// Initial spoke spacing as a fraction of the mesh.
pub const KAPPA0: f64 = 0.9;

pub(crate) const KAPPA_SHRINK: f64 = 0.85;
const MAX_RETRIES: usize = 12;
const MAX_DEPTH: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FillCase {
    /// The loop is a single point.
    Constant,
    /// Fan from a loop vertex whose fiber is orthogonal to `Φ`.
    VertexFan,
    /// Loop cut in two by a tube path, each half filled by a vertex fan.
    Split,
    /// Fan from a free apex on the tube.
    FreeApex,
}

#[derive(Clone, Debug)]
pub struct TubeFilling {
    pub partition: FillingPartition,
    pub case: FillCase,
    /// Spoke spacing used, as a fraction of the mesh.
    pub kappa: f64,
    /// Smallest angle between a lifted loop point and the antipode of an apex.
    pub clearance: f64,
}

/// Parametrisation of the surface a fan is drawn on: spokes are images of interpolation
/// paths between chart coordinates.
pub(crate) trait FanChart {
    /// Chart coordinates of a surface point.
    fn coord(&self, y: &Vector) -> Option<Vector>;
    fn point(&self, u: &Vector) -> Vector;
    fn interpolate(&self, a: &Vector, b: &Vector, t: f64) -> Vector;
    /// Upper bound for the length of the image of the path from `a` to `b`.
    fn span(&self, a: &Vector, b: &Vector) -> f64;
}

/// Sphere of radius `ρ` about the centroid of `P`, mapped to the tube by nearest-point
/// projection onto `N_R(P)`.
pub(crate) struct TubeChart<'a> {
    p: &'a ConvexPolytope,
    r: f64,
    c: Vector,
    rho: f64,
}

impl<'a> TubeChart<'a> {
    pub fn new(p: &'a ConvexPolytope, r: f64) -> TubeChart<'a> {
        let c = p.centroid();
        let rho = 1.25 * r + p.radius_about(&c);
        TubeChart { p, r, c, rho }
    }
}

impl FanChart for TubeChart<'_> {
    /// Unit direction whose image is `y` (or the fiber of `y` when off the tube).
    fn coord(&self, y: &Vector) -> Option<Vector> {
        let (y0, d) = self.p.nearest_point(y);
        if d <= 1e-12 {
            return None;
        }
        let n = (y - &y0) / d;
        let w = &y0 - &self.c;
        let b = w.dot(&n);
        let t = -b + (b * b - (w.norm_squared() - self.rho * self.rho)).max(0.0).sqrt();
        unit(&(w + n * t))
    }

    fn point(&self, u: &Vector) -> Vector {
        let x = &self.c + u * self.rho;
        self.p.fiber_point(&x, self.r).expect("chart sphere lies outside the tube")
    }

    fn interpolate(&self, a: &Vector, b: &Vector, t: f64) -> Vector {
        slerp(a, b, t)
    }

    fn span(&self, a: &Vector, b: &Vector) -> f64 {
        self.rho * angle(a, b)
    }
}

/// A flat region: straight spokes.
pub(crate) struct FlatChart;

impl FanChart for FlatChart {
    fn coord(&self, y: &Vector) -> Option<Vector> {
        Some(y.clone())
    }

    fn point(&self, u: &Vector) -> Vector {
        u.clone()
    }

    fn interpolate(&self, a: &Vector, b: &Vector, t: f64) -> Vector {
        a * (1.0 - t) + b * t
    }

    fn span(&self, a: &Vector, b: &Vector) -> f64 {
        dist(a, b)
    }
}

pub(crate) enum Apex {
    /// Position in the loop index list.
    Vertex(usize),
    Free(Vector),
}

struct Fan<'c, C: FanChart> {
    chart: &'c C,
    lam: f64,
    h: f64,
    apex_dir: Vector,
    apex_idx: usize,
}

impl<C: FanChart> Fan<'_, C> {
    /// Vertex indices along the image of the path from the apex to `u`, ending at `end`.
    fn spoke(&self, b: &mut Builder, u: &Vector, end: usize) -> Vec<usize> {
        if end == self.apex_idx {
            return vec![end];
        }
        let m = (2.0 * self.chart.span(&self.apex_dir, u) / self.h).ceil() as usize;
        let mut out = vec![self.apex_idx];
        if m <= 1 {
            out.push(end);
            return out;
        }
        let pts: Vec<Vector> = (1..m)
            .map(|k| self.chart.point(&self.chart.interpolate(&self.apex_dir, u, k as f64 / m as f64)))
            .collect();
        let end_pt = b.vertices[end].clone();
        let mut last = b.vertices[self.apex_idx].clone();
        for k in 0..pts.len() {
            let next = if k + 1 < pts.len() { &pts[k + 1] } else { &end_pt };
            if dist(&last, next) > self.h {
                let i = b.add(pts[k].clone());
                out.push(i);
                last = pts[k].clone();
            }
        }
        out.push(end);
        out
    }

    /// Zipper a strip, bisecting it while a brick is too large. Returns the chain of new
    /// spoke ends strictly between the two given ends.
    fn strip(&self, b: &mut Builder, left: &[usize], right: &[usize], ul: &Vector, ur: &Vector, depth: usize) -> Vec<usize> {
        let t0 = b.triangles.len();
        b.zipper(left, right);
        if depth >= MAX_DEPTH || b.max_perimeter_from(t0) <= self.lam || self.chart.span(ul, ur) < 0.05 * self.lam {
            return Vec::new();
        }
        b.triangles.truncate(t0);
        let mid = self.chart.interpolate(ul, ur, 0.5);
        let end = b.add(self.chart.point(&mid));
        let sm = self.spoke(b, &mid, end);
        let mut chain = self.strip(b, left, &sm, ul, &mid, depth + 1);
        chain.push(end);
        chain.extend(self.strip(b, &sm, right, &mid, ur, depth + 1));
        chain
    }
}

/// Fan `[p, q_1.., q_m, p']` on the loop side and `p' -> chain reversed -> p` on the fan side.
fn lens(b: &mut Builder, arc: &[usize], chain: &[usize]) {
    let mut poly: Vec<usize> = arc.to_vec();
    poly.extend(chain.iter().rev());
    for s in 1..poly.len().saturating_sub(1) {
        b.tri(poly[0], poly[s], poly[s + 1]);
    }
}

/// Positions in `idx` used as spoke ends: consecutive ones are at most `spacing` apart
/// along the loop. `forced` is always included.
fn targets(b: &Builder, idx: &[usize], spacing: f64, forced: Option<usize>) -> Vec<usize> {
    let n = idx.len();
    let start = forced.unwrap_or(0);
    let mut out = vec![start];
    let mut acc = 0.0;
    for s in 1..n {
        let k = (start + s) % n;
        let prev = (start + s - 1) % n;
        acc += b.d(idx[prev], idx[k]);
        let next = (k + 1) % n;
        let ahead = acc + b.d(idx[k], idx[next]);
        if ahead > spacing {
            out.push(k);
            acc = 0.0;
        }
    }
    out.dedup();
    if out.len() < 3 && n >= 3 {
        out = (0..3).map(|j| (start + j * n / 3) % n).collect();
        out.sort_by_key(|k| (*k + n - start) % n);
        out.dedup();
    }
    out
}

/// Fill the cyclic loop `idx` (builder indices) by a fan.
pub(crate) fn fan_fill<C: FanChart>(b: &mut Builder, chart: &C, idx: &[usize], coords: &[Vector], apex: &Apex, lam: f64, kappa: f64) {
    let n = idx.len();
    if n < 3 {
        return;
    }
    let h = kappa * lam;
    let forced = match apex {
        Apex::Vertex(j) => Some(*j),
        Apex::Free(_) => None,
    };
    let tg = targets(b, idx, h, forced);
    let (apex_dir, apex_idx) = match apex {
        Apex::Vertex(j) => (coords[*j].clone(), idx[*j]),
        Apex::Free(a) => {
            let v = chart.point(a);
            (a.clone(), b.add(v))
        }
    };
    let fan = Fan { chart, lam, h, apex_dir, apex_idx };
    let spokes: Vec<Vec<usize>> = tg.iter().map(|k| fan.spoke(b, &coords[*k], idx[*k])).collect();
    let m = tg.len();
    for s in 0..m {
        let e = (s + 1) % m;
        let chain = fan.strip(b, &spokes[s], &spokes[e], &coords[tg[s]], &coords[tg[e]], 0);
        let (a, z) = (tg[s], tg[e]);
        let mut arc = vec![idx[a]];
        let mut k = a;
        while k != z {
            k = (k + 1) % n;
            arc.push(idx[k]);
        }
        lens(b, &arc, &chain);
    }
}

/// Cone over a loop in a convex flat region from its first vertex, with bricks of
/// perimeter at most `mesh`; the smallest partition over a ladder of spoke spacings.
pub(crate) fn flat_cone(lp: &Loop, mesh: f64) -> Result<FillingPartition> {
    let mut best: Option<FillingPartition> = None;
    let mut last = f64::INFINITY;
    let mut kappa = KAPPA0;
    for _ in 0..MAX_RETRIES {
        let h = kappa * mesh;
        let (pts, _) = densify_collinear(lp.vertices(), h);
        let mut b = Builder::default();
        let idx: Vec<usize> = pts.iter().map(|v| b.add(v.clone())).collect();
        fan_fill(&mut b, &FlatChart, &idx, &pts, &Apex::Vertex(0), mesh, kappa);
        let fp = b.finish(idx);
        let m = fp.mesh;
        if m <= mesh * (1.0 + 1e-9) {
            validate_partition(lp, &fp)?;
            if best.as_ref().is_none_or(|b| fp.area < b.area) {
                best = Some(fp);
            } else {
                break;
            }
        } else {
            last = last.min(m);
        }
        kappa *= KAPPA_SHRINK;
    }
    best.ok_or(Error::MeshNotReached { target: mesh, achieved: last })
}

fn clearance(apex: &Vector, lifts: &[Vector]) -> f64 {
    let anti = -apex;
    lifts.iter().map(|u| angle(&anti, u)).fold(f64::INFINITY, f64::min)
}

fn free_apex(lifts: &[Vector]) -> (Vector, f64) {
    let n = lifts[0].len();
    let mut cands: Vec<Vector> = Vec::new();
    let mut mean = Vector::zeros(n);
    for u in lifts {
        mean += u;
    }
    if let Some(m) = unit(&mean) {
        cands.push(-m.clone());
        cands.push(m);
    }
    if n == 3 {
        let total = 600;
        let ga = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        for j in 0..total {
            let z = 1.0 - 2.0 * (j as f64 + 0.5) / total as f64;
            let r = (1.0 - z * z).sqrt();
            let t = ga * j as f64;
            cands.push(Vector::from_vec(vec![r * t.cos(), r * t.sin(), z]));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..1200 {
            let v = Vector::from_fn(n, |_, _| {
                let (a, b): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
                (-2.0 * a.ln()).sqrt() * (std::f64::consts::TAU * b).cos()
            });
            if let Some(u) = unit(&v) {
                cands.push(u);
            }
        }
    }
    let mut best = (cands[0].clone(), clearance(&cands[0], lifts));
    for c in &cands[1..] {
        let v = clearance(c, lifts);
        if v > best.1 + 1e-12 {
            best = (c.clone(), v);
        }
    }
    best
}

/// Insert collinear points so no loop edge is longer than `spacing`; `orig[k]` is true
/// for vertices of the input loop.
pub(crate) fn densify_collinear(pts: &[Vector], spacing: f64) -> (Vec<Vector>, Vec<bool>) {
    let n = pts.len();
    let mut out = Vec::new();
    let mut orig = Vec::new();
    for i in 0..n {
        let a = &pts[i];
        let c = &pts[(i + 1) % n];
        out.push(a.clone());
        orig.push(true);
        let k = (dist(a, c) / spacing).ceil() as usize;
        for j in 1..k {
            let s = j as f64 / k as f64;
            out.push(a * (1.0 - s) + c * s);
            orig.push(false);
        }
    }
    if out.len() == 2 {
        out.push((&out[0] + &out[1]) * 0.5);
        orig.push(false);
    }
    (out, orig)
}

/// Whether three tube points share one fiber normal.
pub fn same_fiber_normal(p: &ConvexPolytope) -> impl Fn(&Vector, &Vector, &Vector) -> bool + '_ {
    move |a, b, c| {
        let nrm = |x: &Vector| {
            let (x0, _) = p.nearest_point(x);
            unit(&(x - x0))
        };
        match (nrm(a), nrm(b), nrm(c)) {
            (Some(na), Some(nb), Some(nc)) => (&na - &nb).norm() <= 1e-7 && (&na - &nc).norm() <= 1e-7,
            _ => false,
        }
    }
}

/// Fill a loop on `∂N_R(P)` with bricks of perimeter at most `mesh`.
pub fn fill_tube_loop(p: &ConvexPolytope, r: f64, lp: &Loop, mesh: f64) -> Result<TubeFilling> {
    if mesh.is_nan() || mesh <= 0.0 {
        return Err(Error::InvalidMesh(mesh));
    }
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Hypothesis("tube radius must be positive".into()));
    }
    let sc = classify_strip(p);
    if sc.case == StripCase::Fails {
        return Err(Error::StripFails);
    }
    for v in lp.vertices() {
        if v.len() != p.ambient_dim() {
            return Err(Error::Dimension { expected: p.ambient_dim(), got: v.len() });
        }
        let d = p.distance(v) - r;
        if d.abs() > SURFACE_TOL {
            return Err(Error::OffTube(d.abs()));
        }
    }
    if lp.is_constant() {
        return Ok(TubeFilling {
            partition: FillingPartition::empty(&lp.vertices()[0]),
            case: FillCase::Constant,
            kappa: KAPPA0,
            clearance: std::f64::consts::PI,
        });
    }
    let chart = TubeChart::new(p, r);
    let mut best: Option<TubeFilling> = None;
    let mut last_mesh = f64::INFINITY;
    let mut last_err = None;
    for case in [FillCase::VertexFan, FillCase::Split, FillCase::FreeApex] {
        let mut kappa = KAPPA0;
        let mut prev_area: Option<usize> = None;
        for _ in 0..MAX_RETRIES {
            let (fp, clear) = match build_case(p, r, &chart, lp, mesh, kappa, case) {
                Ok(Some(x)) => x,
                Ok(None) => break,
                Err(e) => {
                    last_err = Some(e);
                    break;
                }
            };
            if fp.mesh > mesh * (1.0 + 1e-9) {
                last_mesh = last_mesh.min(fp.mesh);
                kappa *= KAPPA_SHRINK;
                continue;
            }
            if let Err(e) = validate_partition(lp, &fp) {
                last_err = Some(e);
                break;
            }
            // smaller spacing can need fewer bisections; stop once the area grows
            if prev_area.is_some_and(|a| fp.area >= a) {
                break;
            }
            prev_area = Some(fp.area);
            if best.as_ref().is_none_or(|b| fp.area < b.partition.area) {
                best = Some(TubeFilling { partition: fp, case, kappa, clearance: clear });
            }
            kappa *= KAPPA_SHRINK;
        }
    }
    match (best, last_err) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) if last_mesh.is_infinite() => Err(e),
        _ => Err(Error::MeshNotReached { target: mesh, achieved: last_mesh }),
    }
}

/// One construction; `None` when `case` does not apply to this loop.
fn build_case(p: &ConvexPolytope, r: f64, chart: &TubeChart, lp: &Loop, lam: f64, kappa: f64, case: FillCase) -> Result<Option<(FillingPartition, f64)>> {
    let h = kappa * lam;
    let (pts, orig) = densify_collinear(lp.vertices(), h);
    let mut b = Builder::default();
    let idx: Vec<usize> = pts.iter().map(|v| b.add(v.clone())).collect();
    let lift_all = |b: &Builder, ids: &[usize]| -> Result<Vec<Vector>> {
        ids.iter()
            .map(|i| chart.coord(&b.vertices[*i]).ok_or(Error::OffTube(r)))
            .collect()
    };
    let lifts = lift_all(&b, &idx)?;
    let n = idx.len();
    match case {
        FillCase::VertexFan => {
            // a vertex whose fiber is orthogonal to the span
            let mut best1: Option<(usize, f64)> = None;
            for k in 0..n {
                if !orig[k] {
                    continue;
                }
                let tp = TubePoint::new(p, r, pts[k].clone())?;
                if tp.alpha <= 1e-9 {
                    let c = clearance(&lifts[k], &lifts);
                    if best1.is_none_or(|(_, bc)| c > bc + 1e-12) {
                        best1 = Some((k, c));
                    }
                }
            }
            match best1 {
                Some((k, c)) if c >= MIN_CLEARANCE => {
                    fan_fill(&mut b, chart, &idx, &lifts, &Apex::Vertex(k), lam, kappa);
                    Ok(Some((finish(b, idx, p), c)))
                }
                _ => Ok(None),
            }
        }
        FillCase::Split => {
            let Some((i, j, path)) = best_split(p, r, chart, &pts, &orig, &lifts, h) else {
                return Ok(None);
            };
            let mut path_idx = vec![idx[i]];
            for q in &path[1..path.len() - 1] {
                path_idx.push(b.add(q.clone()));
            }
            path_idx.push(idx[j]);
            let inner = &path_idx[1..path_idx.len() - 1];
            let first: Vec<usize> = (i..=j).map(|k| idx[k]).chain(inner.iter().rev().copied()).collect();
            let second: Vec<usize> = (j..n + i + 1).map(|k| idx[k % n]).chain(inner.iter().copied()).collect();
            let mut clear = f64::INFINITY;
            for sub in [&first, &second] {
                let l = lift_all(&b, sub)?;
                let (pos, c) = (0..sub.len())
                    .filter(|k| sub[*k] == idx[i] || sub[*k] == idx[j])
                    .map(|k| (k, clearance(&l[k], &l)))
                    .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
                clear = clear.min(c);
                fan_fill(&mut b, chart, sub, &l, &Apex::Vertex(pos), lam, kappa);
            }
            Ok(Some((finish(b, idx, p), clear)))
        }
        FillCase::FreeApex => {
            let (a, c) = free_apex(&lifts);
            if c < 1e-3 {
                return Err(Error::Hypothesis("every apex direction is within 1e-3 rad of the lifted loop's antipode".into()));
            }
            fan_fill(&mut b, chart, &idx, &lifts, &Apex::Free(a), lam, kappa);
            Ok(Some((finish(b, idx, p), c)))
        }
        FillCase::Constant => Ok(None),
    }
}

type Split = (usize, usize, Vec<Vector>);

fn best_split(p: &ConvexPolytope, r: f64, chart: &TubeChart, pts: &[Vector], orig: &[bool], lifts: &[Vector], h: f64) -> Option<Split> {
    let n = pts.len();
    let stride = (n / 24).max(1);
    let cand: Vec<usize> = (0..n).step_by(stride).filter(|k| orig[*k]).collect();
    let tps: Vec<Option<TubePoint>> = pts.iter().map(|x| TubePoint::new(p, r, x.clone()).ok()).collect();
    let mut best: Option<(f64, Split)> = None;
    for (ai, &i) in cand.iter().enumerate() {
        for &j in &cand[ai + 1..] {
            if j - i < 2 || n - (j - i) < 2 {
                continue;
            }
            let (Some(x), Some(y)) = (&tps[i], &tps[j]) else { continue };
            if !segment_meets(p, &x.xp, &y.xp) {
                continue;
            }
            let Ok(path) = tube_path_sampled(p, r, x, y, h) else { continue };
            let pl: Option<Vec<Vector>> = path.points[1..path.points.len() - 1].iter().map(|q| chart.coord(q)).collect();
            let Some(pl) = pl else { continue };
            let mut first: Vec<Vector> = lifts[i..=j].to_vec();
            first.extend(pl.iter().cloned());
            let mut second: Vec<Vector> = (j..n + i + 1).map(|k| lifts[k % n].clone()).collect();
            second.extend(pl.iter().cloned());
            let score = [(&first, 0usize, j - i), (&second, 0usize, n - (j - i))]
                .iter()
                .map(|(l, a, b)| clearance(&l[*a], l).max(clearance(&l[*b], l)))
                .fold(f64::INFINITY, f64::min);
            if score >= MIN_CLEARANCE && best.as_ref().is_none_or(|(s, _)| score > *s + 1e-12) {
                best = Some((score, (i, j, path.points)));
            }
        }
    }
    best.map(|(_, s)| s)
}

fn finish(b: Builder, boundary: Vec<usize>, p: &ConvexPolytope) -> FillingPartition {
    let mut fp = b.finish(boundary);
    fp.classify(same_fiber_normal(p));
    fp
}

/// Loop on `∂N_R(P)`: image under the chart of the curve at polar angle
/// `π/2 + A sin(kφ)` about `axis`, with `A` and `k` chosen to hit `length`.
pub fn wobble_loop(p: &ConvexPolytope, r: f64, axis: &Vector, length: f64, spacing: f64) -> Result<Loop> {
    let chart = TubeChart::new(p, r);
    let axis = unit(axis).ok_or_else(|| Error::InvalidLoop("zero axis".into()))?;
    let n = axis.len();
    let mut e = None;
    for i in 0..n {
        let v = crate::linalg::basis_vector(n, i);
        let w = &v - &axis * v.dot(&axis);
        if w.norm() > 0.3 {
            e = unit(&w);
            break;
        }
    }
    let e = e.ok_or_else(|| Error::InvalidLoop("no equator direction".into()))?;
    let f0 = crate::linalg::complement_basis(&[axis.clone(), e.clone()], n).remove(0);
    let curve = |amp: f64, k: usize, m: usize| -> Vec<Vector> {
        (0..m)
            .map(|j| {
                let phi = std::f64::consts::TAU * j as f64 / m as f64;
                let pol = std::f64::consts::FRAC_PI_2 + amp * (k as f64 * phi).sin();
                let u = &axis * pol.cos() + (&e * phi.cos() + &f0 * phi.sin()) * pol.sin();
                chart.point(&u)
            })
            .collect()
    };
    let len = |v: &[Vector]| (0..v.len()).map(|i| dist(&v[i], &v[(i + 1) % v.len()])).sum::<f64>();
    let m_for = |k: usize| ((length / spacing).ceil() as usize).max(16 * k.max(1)).max(16);
    let base = len(&curve(0.0, 0, m_for(0)));
    let host = || Host::Tube { polytope: std::sync::Arc::new(p.clone()), radius: r };
    if length < base {
        // a latitude circle instead
        let circle = |pol: f64, m: usize| -> Vec<Vector> {
            (0..m)
                .map(|j| {
                    let phi = std::f64::consts::TAU * j as f64 / m as f64;
                    chart.point(&(&axis * pol.cos() + (&e * phi.cos() + &f0 * phi.sin()) * pol.sin()))
                })
                .collect()
        };
        let m = m_for(0);
        let (mut lo, mut hi) = (0.0f64, std::f64::consts::FRAC_PI_2);
        if len(&circle(1e-6, m)) > length {
            return Err(Error::InvalidLoop(format!("length {length} is below every latitude circle")));
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if len(&circle(mid, m)) < length {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Loop::new(circle(0.5 * (lo + hi), m), host());
    }
    let mut k = ((length / (base * 0.7)).round() as usize).max(1);
    loop {
        let m = m_for(k);
        if len(&curve(1.2, k, m)) >= length {
            let (mut lo, mut hi) = (0.0f64, 1.2f64);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if len(&curve(mid, k, m)) < length {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Loop::new(curve(0.5 * (lo + hi), k, m), host());
        }
        k += 1;
        if k > 100_000 {
            return Err(Error::InvalidLoop("length not reachable".into()));
        }
    }
}
