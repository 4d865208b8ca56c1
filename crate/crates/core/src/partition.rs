//! Loops, filling partitions (triangulated disks mapped into space) and their validation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, PartitionError, Result};
use crate::linalg::{dist, fmt12, Vector};
use crate::trace::BusemannTrace;
use crate::tube::ConvexPolytope;

/// Surface a loop lives on.
#[derive(Clone, Debug)]
pub enum Host {
    /// The whole apartment `E^r`.
    Flat,
    /// A level set `{value = level}` of a trace.
    Level { trace: Arc<BusemannTrace>, level: f64 },
    /// The tube boundary `∂N_R(P)`.
    Tube { polytope: Arc<ConvexPolytope>, radius: f64 },
}

impl Host {
    /// Signed defect of `x` from the host surface.
    pub fn defect(&self, x: &Vector) -> f64 {
        match self {
            Host::Flat => 0.0,
            Host::Level { trace, level } => trace.value(x) - level,
            Host::Tube { polytope, radius } => polytope.distance(x) - radius,
        }
    }

    /// Put a point near the surface back on it (used when densifying chords).
    pub fn settle(&self, x: &Vector, anchor: &Vector) -> Option<Vector> {
        match self {
            Host::Flat => Some(x.clone()),
            Host::Level { trace, level } => {
                // radial exit from an interior point of the sublevel set
                let hb = crate::trace::horoball_polytope(trace, *level).ok()?;
                let c = hb.interior_point().cloned().unwrap_or_else(|| anchor.clone());
                let d = crate::linalg::unit(&(x - &c))?;
                crate::trace::ray_exit(&hb, &c, &d)
            }
            Host::Tube { polytope, radius } => Some(polytope.fiber_point(x, *radius)?),
        }
    }
}

/// A closed polygonal loop; the last vertex connects back to the first.
#[derive(Clone, Debug)]
pub struct Loop {
    vertices: Vec<Vector>,
    host: Host,
}

impl Loop {
    /// Consecutive duplicates (and a repeated closing vertex) are dropped.
    pub fn new(vertices: Vec<Vector>, host: Host) -> Result<Loop> {
        if vertices.is_empty() {
            return Err(Error::InvalidLoop("no vertices".into()));
        }
        let n = vertices[0].len();
        let mut vs: Vec<Vector> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if v.len() != n {
                return Err(Error::Dimension { expected: n, got: v.len() });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidLoop("non-finite coordinate".into()));
            }
            if vs.last().is_none_or(|l| dist(l, &v) > 1e-12) {
                vs.push(v);
            }
        }
        while vs.len() > 1 && dist(&vs[0], vs.last().unwrap()) <= 1e-12 {
            vs.pop();
        }
        for (i, v) in vs.iter().enumerate() {
            let d = host.defect(v);
            if d.abs() > crate::linalg::SURFACE_TOL {
                return Err(Error::InvalidLoop(format!("vertex {i} is off the host surface by {d:.3e}")));
            }
        }
        Ok(Loop { vertices: vs, host })
    }

    pub fn flat(vertices: Vec<Vector>) -> Result<Loop> {
        Loop::new(vertices, Host::Flat)
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn host(&self) -> &Host {
        &self.host
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn is_constant(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn length(&self) -> f64 {
        let n = self.vertices.len();
        if n < 2 {
            return 0.0;
        }
        (0..n).map(|i| dist(&self.vertices[i], &self.vertices[(i + 1) % n])).sum()
    }

    pub fn max_edge(&self) -> f64 {
        let n = self.vertices.len();
        if n < 2 {
            return 0.0;
        }
        (0..n).map(|i| dist(&self.vertices[i], &self.vertices[(i + 1) % n])).fold(0.0, f64::max)
    }

    /// Insert points so that every edge is at most `spacing` long. On curved hosts the
    /// inserted chord points are pushed back onto the surface, so the result is a new loop.
    pub fn densified(&self, spacing: f64) -> Result<Loop> {
        if spacing.is_nan() || spacing <= 0.0 {
            return Err(Error::InvalidMesh(spacing));
        }
        let n = self.vertices.len();
        if n < 2 {
            return Ok(self.clone());
        }
        let mut out = Vec::new();
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            out.push(a.clone());
            let pieces = (dist(a, b) / spacing).ceil() as usize;
            for k in 1..pieces {
                let s = k as f64 / pieces as f64;
                let c = a * (1.0 - s) + b * s;
                match &self.host {
                    Host::Flat => out.push(c),
                    h => {
                        if let Some(p) = h.settle(&c, a) {
                            out.push(p);
                        }
                    }
                }
            }
        }
        let looped = Loop::new(out, self.host.clone())?;
        // chord points pushed to a curved surface can stretch edges; repeat if needed
        if looped.max_edge() > spacing * 1.0001 && !matches!(self.host, Host::Flat) && looped.len() < 1 << 22 {
            if looped.len() == self.len() {
                return Ok(looped);
            }
            return looped.densified(spacing);
        }
        Ok(looped)
    }

    pub fn scaled(&self, lambda: f64, host: Host) -> Result<Loop> {
        Loop::new(self.vertices.iter().map(|v| v * lambda).collect(), host)
    }
}

/// Flat versus uncontrolled bricks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BrickCensus {
    pub flat_bricks: usize,
    pub wild_bricks: usize,
}

/// A triangulated disk with a placement of its vertices.
///
/// `boundary` lists the disk vertices along the boundary cycle, starting at the image of
/// the first loop vertex.
#[derive(Clone, Debug)]
pub struct FillingPartition {
    pub vertices: Vec<Vector>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<usize>,
    pub census: BrickCensus,
    pub mesh: f64,
    pub area: usize,
}

pub fn triangle_perimeter(a: &Vector, b: &Vector, c: &Vector) -> f64 {
    dist(a, b) + dist(b, c) + dist(c, a)
}

impl FillingPartition {
    /// Partition of a constant loop.
    pub fn empty(point: &Vector) -> FillingPartition {
        FillingPartition {
            vertices: vec![point.clone()],
            triangles: Vec::new(),
            boundary: vec![0],
            census: BrickCensus::default(),
            mesh: 0.0,
            area: 0,
        }
    }

    /// Assemble and compute mesh and area; the census marks every brick wild.
    pub fn new(vertices: Vec<Vector>, triangles: Vec<[usize; 3]>, boundary: Vec<usize>) -> FillingPartition {
        let mut fp = FillingPartition {
            vertices,
            triangles,
            boundary,
            census: BrickCensus::default(),
            mesh: 0.0,
            area: 0,
        };
        fp.recompute();
        fp.census = BrickCensus { flat_bricks: 0, wild_bricks: fp.area };
        fp
    }

    pub fn recompute(&mut self) {
        self.area = self.triangles.len();
        self.mesh = self
            .triangles
            .iter()
            .filter(|t| t.iter().all(|i| *i < self.vertices.len()))
            .map(|t| triangle_perimeter(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .fold(0.0, f64::max);
    }

    /// Classify bricks with `is_flat`.
    pub fn classify(&mut self, is_flat: impl Fn(&Vector, &Vector, &Vector) -> bool) {
        let flat = self
            .triangles
            .iter()
            .filter(|t| is_flat(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]))
            .count();
        self.census = BrickCensus { flat_bricks: flat, wild_bricks: self.triangles.len() - flat };
    }

    pub fn brick_is_flat_on(trace: &BusemannTrace) -> impl Fn(&Vector, &Vector, &Vector) -> bool + '_ {
        move |a, b, c| {
            let aa = trace.active_pieces(a, 1e-7);
            let bb = trace.active_pieces(b, 1e-7);
            let cc = trace.active_pieces(c, 1e-7);
            aa.iter().any(|i| bb.contains(i) && cc.contains(i))
        }
    }

    /// Boundary loop of the partition, as placed points.
    pub fn boundary_points(&self) -> Vec<Vector> {
        self.boundary.iter().map(|i| self.vertices[*i].clone()).collect()
    }

    /// Indexed text export with 12-digit decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "partition {} {} {}", self.vertices.len(), self.triangles.len(), self.boundary.len());
        for v in &self.vertices {
            let _ = writeln!(s, "v {}", crate::linalg::fmt_vec(v));
        }
        for t in &self.triangles {
            let _ = writeln!(s, "t {} {} {}", t[0], t[1], t[2]);
        }
        let b: Vec<String> = self.boundary.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "b {}", b.join(" "));
        let _ = writeln!(
            s,
            "census {} {} mesh {}",
            self.census.flat_bricks,
            self.census.wild_bricks,
            fmt12(self.mesh)
        );
        s
    }

    pub fn from_text(text: &str) -> Result<FillingPartition> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        let mut boundary = Vec::new();
        let mut census = None;
        for (ln, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            let bad = || Error::Config(format!("partition line {}: malformed", ln + 1));
            match it.next() {
                Some("v") => {
                    let xs: std::result::Result<Vec<f64>, _> = it.map(str::parse::<f64>).collect();
                    vertices.push(Vector::from_vec(xs.map_err(|_| bad())?));
                }
                Some("t") => {
                    let xs: std::result::Result<Vec<usize>, _> = it.map(str::parse::<usize>).collect();
                    let xs = xs.map_err(|_| bad())?;
                    if xs.len() != 3 {
                        return Err(bad());
                    }
                    triangles.push([xs[0], xs[1], xs[2]]);
                }
                Some("b") => {
                    let xs: std::result::Result<Vec<usize>, _> = it.map(str::parse::<usize>).collect();
                    boundary = xs.map_err(|_| bad())?;
                }
                Some("census") => {
                    let f = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
                    let w = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
                    census = Some(BrickCensus { flat_bricks: f, wild_bricks: w });
                }
                Some("partition") | None => {}
                Some(_) => return Err(bad()),
            }
        }
        let mut fp = FillingPartition::new(vertices, triangles, boundary);
        if let Some(c) = census {
            fp.census = c;
        }
        Ok(fp)
    }
}

fn same_point(a: &Vector, b: &Vector, scale: f64) -> bool {
    dist(a, b) <= 1e-9 * (1.0 + scale)
}

/// Is `p` on the segment `[a, b]` (within tolerance)?
fn on_segment(p: &Vector, a: &Vector, b: &Vector, scale: f64) -> bool {
    let ab = b - a;
    let l2 = ab.norm_squared();
    let s = if l2 > 0.0 { ((p - a).dot(&ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    dist(&(a + ab * s), p) <= 1e-8 * (1.0 + scale)
}

/// Does the point sequence `b` trace the polygon `l` (starting at `l[0]`), allowing extra
/// points on the polygon's edges?
fn traces_loop(b: &[Vector], l: &[Vector], scale: f64) -> bool {
    if b.is_empty() || !same_point(&b[0], &l[0], scale) {
        return false;
    }
    let n = l.len();
    let mut j = 0usize; // current loop edge (l[j], l[j+1])
    for p in &b[1..] {
        loop {
            if j >= n {
                return false;
            }
            let next = &l[(j + 1) % n];
            if j + 1 < n && same_point(p, next, scale) {
                j += 1;
                break;
            }
            if on_segment(p, &l[j], next, scale) && !same_point(p, next, scale) {
                break;
            }
            // allow skipping only when the boundary revisits a vertex position exactly
            return false;
        }
    }
    j == n - 1
}

/// Recompute mesh and area from scratch, rejecting anything that is not a disk bounded by the loop.
pub fn validate_partition(lp: &Loop, fp: &FillingPartition) -> Result<(f64, usize)> {
    let nv = fp.vertices.len();
    if lp.is_constant() {
        if fp.triangles.is_empty() {
            return Ok((0.0, 0));
        }
    } else if fp.triangles.is_empty() {
        return Err(PartitionError::Empty.into());
    }
    for (k, t) in fp.triangles.iter().enumerate() {
        for i in t {
            if *i >= nv {
                return Err(PartitionError::BadIndex(*i).into());
            }
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(PartitionError::DegenerateTriangle(k).into());
        }
    }
    for i in &fp.boundary {
        if *i >= nv {
            return Err(PartitionError::BadIndex(*i).into());
        }
    }
    // undirected edge -> directed occurrences
    let mut edges: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
    for t in &fp.triangles {
        for k in 0..3 {
            let a = t[k];
            let b = t[(k + 1) % 3];
            edges.entry((a.min(b), a.max(b))).or_default().push((a, b));
        }
    }
    let mut keys: Vec<_> = edges.keys().copied().collect();
    keys.sort_unstable();
    for key in &keys {
        let occ = &edges[key];
        if occ.len() > 2 {
            return Err(PartitionError::NonManifoldEdge(key.0, key.1).into());
        }
        if occ.len() == 2 && occ[0] == occ[1] {
            return Err(PartitionError::Orientation(key.0, key.1).into());
        }
    }
    // boundary cycle from edges used once
    let mut succ: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut nb = 0usize;
    for key in &keys {
        let occ = &edges[key];
        if occ.len() == 1 {
            succ.entry(occ[0].0).or_default().push(occ[0].1);
            nb += 1;
        }
    }
    if nb == 0 {
        return Err(PartitionError::BoundaryMismatch("closed surface, no boundary".into()).into());
    }
    if succ.values().any(|v| v.len() != 1) {
        return Err(PartitionError::BoundaryMismatch("boundary is not a simple cycle".into()).into());
    }
    let start = match fp.boundary.first() {
        Some(s) if succ.contains_key(s) => *s,
        _ => {
            // orientation may be reversed: boundary[0] is then a head of a boundary edge
            *succ.keys().min().unwrap()
        }
    };
    let mut cycle = vec![start];
    let mut cur = start;
    loop {
        let nxt = succ[&cur][0];
        if nxt == start {
            break;
        }
        if cycle.len() > nb {
            return Err(PartitionError::BoundaryMismatch("boundary is not a single cycle".into()).into());
        }
        cycle.push(nxt);
        cur = nxt;
    }
    if cycle.len() != nb {
        return Err(PartitionError::BoundaryMismatch(format!(
            "boundary has {} components",
            if cycle.len() < nb { "several" } else { "malformed" }
        ))
        .into());
    }
    // the declared boundary must be this cycle, in either direction
    let declared = &fp.boundary;
    let matches_cycle = |seq: &[usize]| -> bool {
        if seq.len() != cycle.len() {
            return false;
        }
        match cycle.iter().position(|v| *v == seq[0]) {
            None => false,
            Some(off) => (0..seq.len()).all(|k| cycle[(off + k) % cycle.len()] == seq[k]),
        }
    };
    let mut rev: Vec<usize> = declared.clone();
    if !rev.is_empty() {
        rev[1..].reverse();
    }
    if !matches_cycle(declared) && !matches_cycle(&rev) {
        return Err(PartitionError::BoundaryMismatch("declared boundary differs from the boundary cycle".into()).into());
    }
    let scale = lp.vertices().iter().map(|v| v.amax()).fold(0.0, f64::max);
    let pts: Vec<Vector> = declared.iter().map(|i| fp.vertices[*i].clone()).collect();
    let mut rpts = pts.clone();
    rpts[1..].reverse();
    if !traces_loop(&pts, lp.vertices(), scale) && !traces_loop(&rpts, lp.vertices(), scale) {
        return Err(PartitionError::BoundaryMismatch("boundary points do not follow the loop".into()).into());
    }
    // Euler characteristic on the vertices actually used
    let mut used = vec![false; nv];
    for t in &fp.triangles {
        for i in t {
            used[*i] = true;
        }
    }
    let v = used.iter().filter(|u| **u).count() as i64;
    let e = keys.len() as i64;
    let f = fp.triangles.len() as i64;
    let chi = v - e + f;
    if chi != 1 {
        return Err(PartitionError::Euler(chi).into());
    }
    // vertex links: a path for boundary vertices, a cycle otherwise
    let mut link: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for t in &fp.triangles {
        for k in 0..3 {
            link.entry(t[k]).or_default().push((t[(k + 1) % 3], t[(k + 2) % 3]));
        }
    }
    let mut lverts: Vec<_> = link.keys().copied().collect();
    lverts.sort_unstable();
    for vtx in lverts {
        let es = &link[&vtx];
        let mut deg: HashMap<usize, usize> = HashMap::new();
        for (a, b) in es {
            *deg.entry(*a).or_default() += 1;
            *deg.entry(*b).or_default() += 1;
        }
        let ends = deg.values().filter(|d| **d == 1).count();
        if deg.values().any(|d| *d > 2) || (ends != 0 && ends != 2) {
            return Err(PartitionError::VertexLink(vtx).into());
        }
        // connectivity of the link graph
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for (a, b) in es {
            adj.entry(*a).or_default().push(*b);
            adj.entry(*b).or_default().push(*a);
        }
        let first = es[0].0;
        let mut seen = vec![first];
        let mut stack = vec![first];
        while let Some(x) = stack.pop() {
            for y in &adj[&x] {
                if !seen.contains(y) {
                    seen.push(*y);
                    stack.push(*y);
                }
            }
        }
        if seen.len() != adj.len() {
            return Err(PartitionError::VertexLink(vtx).into());
        }
        let on_boundary = succ.contains_key(&vtx);
        if on_boundary != (ends == 2) {
            return Err(PartitionError::VertexLink(vtx).into());
        }
    }
    let mesh = fp
        .triangles
        .iter()
        .map(|t| triangle_perimeter(&fp.vertices[t[0]], &fp.vertices[t[1]], &fp.vertices[t[2]]))
        .fold(0.0, f64::max);
    if fp.census.flat_bricks + fp.census.wild_bricks != fp.triangles.len() {
        return Err(Error::Hypothesis(format!(
            "census {} + {} does not add up to area {}",
            fp.census.flat_bricks,
            fp.census.wild_bricks,
            fp.triangles.len()
        )));
    }
    Ok((mesh, fp.triangles.len()))
}

/// Incremental triangle-mesh builder.
#[derive(Clone, Debug, Default)]
pub(crate) struct Builder {
    pub vertices: Vec<Vector>,
    pub triangles: Vec<[usize; 3]>,
}

impl Builder {
    pub fn add(&mut self, v: Vector) -> usize {
        self.vertices.push(v);
        self.vertices.len() - 1
    }

    /// Add a triangle unless it repeats a vertex.
    pub fn tri(&mut self, a: usize, b: usize, c: usize) {
        if a != b && b != c && a != c {
            self.triangles.push([a, b, c]);
        }
    }

    pub fn d(&self, a: usize, b: usize) -> f64 {
        dist(&self.vertices[a], &self.vertices[b])
    }

    pub fn perimeter(&self, t: &[usize; 3]) -> f64 {
        triangle_perimeter(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]])
    }

    pub fn max_perimeter_from(&self, first: usize) -> f64 {
        self.triangles[first..].iter().map(|t| self.perimeter(t)).fold(0.0, f64::max)
    }

    /// Triangulate the strip between two polylines that share their first vertices' side.
    ///
    /// `left` and `right` run from the bottom to the top; the strip's top edge is
    /// `left.last() -> right.last()` and the bottom edge is traversed `right[0] -> left[0]`.
    pub fn zipper(&mut self, left: &[usize], right: &[usize]) {
        let (mut i, mut k) = (0usize, 0usize);
        while i + 1 < left.len() || k + 1 < right.len() {
            let adv_left = if i + 1 >= left.len() {
                false
            } else if k + 1 >= right.len() {
                true
            } else {
                self.d(left[i + 1], right[k]) <= self.d(left[i], right[k + 1])
            };
            if adv_left {
                self.tri(left[i], left[i + 1], right[k]);
                i += 1;
            } else {
                self.tri(left[i], right[k + 1], right[k]);
                k += 1;
            }
        }
    }

    /// Glue a disk along the cyclic chain `ring` of builder vertices. The disk's boundary
    /// must start at `ring[0]` and pass through the ring vertices (by position) in order,
    /// possibly with extra points between them. Returns the builder index of every disk vertex.
    ///
    /// Extra points split the builder triangle on the corresponding ring edge; where no
    /// triangle carries that edge they are closed off by a fan onto the edge.
    pub fn attach_disk(&mut self, ring: &[usize], disk: &FillingPartition) -> Result<Vec<usize>> {
        let nr = ring.len();
        let mut map = vec![usize::MAX; disk.vertices.len()];
        let mut chains: Vec<Vec<usize>> = vec![Vec::new(); nr];
        let mut k = 0usize;
        for (pos, &bi) in disk.boundary.iter().enumerate() {
            let here = &disk.vertices[bi];
            let ring_pt = |j: usize| &self.vertices[ring[j % nr]];
            if pos == 0 {
                if dist(here, ring_pt(0)) > 1e-9 * (1.0 + here.amax()) {
                    return Err(PartitionError::BoundaryMismatch("disk boundary does not start at the ring".into()).into());
                }
                map[bi] = ring[0];
                continue;
            }
            if k + 1 < nr && dist(here, ring_pt(k + 1)) <= 1e-9 * (1.0 + here.amax()) {
                k += 1;
                map[bi] = ring[k];
            } else {
                let i = self.add(here.clone());
                map[bi] = i;
                chains[k].push(i);
            }
        }
        if k + 1 != nr {
            return Err(PartitionError::BoundaryMismatch(format!("disk boundary visits {} of {nr} ring vertices", k + 1)).into());
        }
        for (k, chain) in chains.iter().enumerate() {
            if chain.is_empty() {
                continue;
            }
            let (q, p) = (ring[k], ring[(k + 1) % nr]);
            // the builder side carries p -> q
            let found = self.triangles.iter().position(|t| (0..3).any(|r| t[r] == p && t[(r + 1) % 3] == q));
            match found {
                Some(ti) => {
                    let t = self.triangles.swap_remove(ti);
                    let r = (0..3).find(|r| t[*r] == p).unwrap();
                    let x = t[(r + 2) % 3];
                    let mut seq = vec![p];
                    seq.extend(chain.iter().rev());
                    seq.push(q);
                    for w in seq.windows(2) {
                        self.tri(w[0], w[1], x);
                    }
                }
                None => {
                    let mut seq = vec![p];
                    seq.extend(chain.iter().rev());
                    for w in seq.windows(2) {
                        self.tri(q, w[0], w[1]);
                    }
                }
            }
        }
        for (i, v) in disk.vertices.iter().enumerate() {
            if map[i] == usize::MAX {
                map[i] = self.add(v.clone());
            }
        }
        for t in &disk.triangles {
            self.tri(map[t[0]], map[t[1]], map[t[2]]);
        }
        Ok(map)
    }

    pub fn finish(self, boundary: Vec<usize>) -> FillingPartition {
        FillingPartition::new(self.vertices, self.triangles, boundary)
    }
}
