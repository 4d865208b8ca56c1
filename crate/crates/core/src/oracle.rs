//! Exact minimal fillings of edge loops on small cell complexes, and the frozen instances
//! the fill constructions are compared against.

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dist, Vector};

/// Largest complex the oracle accepts.
pub const ORACLE_CELL_LIMIT: usize = 1000;

/// A 2-dimensional cell complex given by polygonal faces on indexed vertices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellComplex {
    pub vertices: Vec<Vec<f64>>,
    pub faces: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeLoop {
    pub vertices: Vec<usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CellComplex {
    pub fn point(&self, i: usize) -> Vector {
        Vector::from_vec(self.vertices[i].clone())
    }

    pub fn face_perimeter(&self, f: usize) -> f64 {
        let face = &self.faces[f];
        (0..face.len()).map(|k| dist(&self.point(face[k]), &self.point(face[(k + 1) % face.len()]))).sum()
    }

    /// Largest face perimeter.
    pub fn mesh(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_perimeter(f)).fold(0.0, f64::max)
    }

    fn edge_faces(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (f, face) in self.faces.iter().enumerate() {
            for k in 0..face.len() {
                m.entry(key(face[k], face[(k + 1) % face.len()])).or_default().push(f);
            }
        }
        m
    }

    pub fn from_file(path: &Path) -> Result<CellComplex> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let c: CellComplex = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        let nv = self.vertices.len();
        let dim = self.vertices.first().map_or(0, |v| v.len());
        for v in &self.vertices {
            if v.len() != dim {
                return Err(Error::Dimension { expected: dim, got: v.len() });
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(Error::InvalidMesh(f as f64));
            }
            if let Some(i) = face.iter().find(|i| **i >= nv) {
                return Err(Error::Partition(crate::error::PartitionError::BadIndex(*i)));
            }
        }
        Ok(())
    }

    /// Boundary cycle of a union of faces, if it is a single simple cycle.
    pub fn region_boundary(&self, region: &[usize]) -> Option<Vec<usize>> {
        let set: HashSet<usize> = region.iter().copied().collect();
        let mut next: HashMap<usize, usize> = HashMap::new();
        let ef = self.edge_faces();
        for &f in region {
            let face = &self.faces[f];
            for k in 0..face.len() {
                let (a, b) = (face[k], face[(k + 1) % face.len()]);
                let inside = ef[&key(a, b)].iter().filter(|g| set.contains(g)).count();
                if inside == 1 {
                    if next.insert(a, b).is_some() {
                        return None;
                    }
                }
            }
        }
        let start = *next.keys().min()?;
        let mut cyc = vec![start];
        let mut cur = next[&start];
        while cur != start {
            cyc.push(cur);
            cur = *next.get(&cur)?;
            if cyc.len() > next.len() {
                return None;
            }
        }
        (cyc.len() == next.len()).then_some(cyc)
    }
}

/// Minimal number of 2-cells in a disk filling of an edge loop.
///
/// The loop cuts the faces into components (adjacency across edges not on the loop). A
/// filling chain with boundary the loop differs from the indicator of a component bounded
/// by the loop by a cycle, so on a closed surface the minimum is the smallest component
/// whose boundary is exactly the loop; components touching free edges of the complex are
/// not bounded by the loop.
pub fn brute_force_area(c: &CellComplex, lp: &EdgeLoop) -> Result<usize> {
    c.check()?;
    if c.faces.len() > ORACLE_CELL_LIMIT {
        return Err(Error::OracleTooLarge { cells: c.faces.len(), limit: ORACLE_CELL_LIMIT });
    }
    let n = lp.vertices.len();
    if n == 0 {
        return Err(Error::InvalidLoop("no vertices".into()));
    }
    if n == 1 {
        return Ok(0);
    }
    let distinct: HashSet<usize> = lp.vertices.iter().copied().collect();
    if distinct.len() != n || n < 3 {
        return Err(Error::InvalidLoop("edge loop must be a simple cycle of at least 3 vertices".into()));
    }
    let ef = c.edge_faces();
    let mut cut: HashSet<(usize, usize)> = HashSet::new();
    for k in 0..n {
        let e = key(lp.vertices[k], lp.vertices[(k + 1) % n]);
        if !ef.contains_key(&e) {
            return Err(Error::InvalidLoop(format!("{} -> {} is not an edge of the complex", e.0, e.1)));
        }
        cut.insert(e);
    }
    let mut comp = vec![usize::MAX; c.faces.len()];
    let mut sizes: Vec<usize> = Vec::new();
    let mut touches_free: Vec<bool> = Vec::new();
    let mut borders: Vec<HashSet<(usize, usize)>> = Vec::new();
    for f0 in 0..c.faces.len() {
        if comp[f0] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let (mut size, mut free, mut border) = (0usize, false, HashSet::new());
        let mut q = VecDeque::from([f0]);
        comp[f0] = id;
        while let Some(f) = q.pop_front() {
            size += 1;
            let face = &c.faces[f];
            for k in 0..face.len() {
                let e = key(face[k], face[(k + 1) % face.len()]);
                if cut.contains(&e) {
                    border.insert(e);
                    continue;
                }
                let nb = &ef[&e];
                if nb.len() == 1 {
                    free = true;
                }
                for &g in nb {
                    if comp[g] == usize::MAX {
                        comp[g] = id;
                        q.push_back(g);
                    }
                }
            }
        }
        sizes.push(size);
        touches_free.push(free);
        borders.push(border);
    }
    (0..sizes.len())
        .filter(|i| !touches_free[*i] && borders[*i].len() == cut.len())
        .map(|i| sizes[i])
        .min()
        .ok_or_else(|| Error::InvalidLoop("the loop bounds no disk region of the complex".into()))
}

/// Icosahedron subdivided `level` times, vertices on the sphere of radius `r` about 0.
pub fn icosphere(level: usize, r: f64) -> CellComplex {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vs: Vec<Vector> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vector::from_row_slice(p).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut get = |a: usize, b: usize, vs: &mut Vec<Vector>| {
            *mid.entry(key(a, b)).or_insert_with(|| {
                vs.push(((&vs[a] + &vs[b]) * 0.5).normalize());
                vs.len() - 1
            })
        };
        let mut nf = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = get(a, b, &mut vs);
            let bc = get(b, c, &mut vs);
            let ca = get(c, a, &mut vs);
            nf.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = nf;
    }
    CellComplex {
        vertices: vs.iter().map(|v| (v * r).iter().copied().collect()).collect(),
        faces: faces.iter().map(|f| f.to_vec()).collect(),
    }
}

/// Triangulated boundary of the tube of radius `r` about `[0, len] e_1` in `E^3`:
/// `segments` points per ring, `rings` cylinder rings and `cap_rings` rings per hemisphere.
pub fn capsule(len: f64, r: f64, segments: usize, rings: usize, cap_rings: usize) -> CellComplex {
    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut ring_ids: Vec<Vec<usize>> = Vec::new();
    let ring = |x: f64, rr: f64, vs: &mut Vec<Vec<f64>>| -> Vec<usize> {
        (0..segments)
            .map(|j| {
                let phi = std::f64::consts::TAU * j as f64 / segments as f64;
                vs.push(vec![x, rr * phi.cos(), rr * phi.sin()]);
                vs.len() - 1
            })
            .collect()
    };
    vs.push(vec![-r, 0.0, 0.0]);
    let south = 0;
    for k in 1..cap_rings {
        let th = std::f64::consts::FRAC_PI_2 * (1.0 - k as f64 / cap_rings as f64);
        let ids = ring(-r * th.sin(), r * th.cos(), &mut vs);
        ring_ids.push(ids);
    }
    for k in 0..=rings {
        let ids = ring(len * k as f64 / rings as f64, r, &mut vs);
        ring_ids.push(ids);
    }
    for k in 1..cap_rings {
        let th = std::f64::consts::FRAC_PI_2 * k as f64 / cap_rings as f64;
        let ids = ring(len + r * th.sin(), r * th.cos(), &mut vs);
        ring_ids.push(ids);
    }
    vs.push(vec![len + r, 0.0, 0.0]);
    let north = vs.len() - 1;
    let mut faces = Vec::new();
    let s = segments;
    for j in 0..s {
        faces.push(vec![south, ring_ids[0][(j + 1) % s], ring_ids[0][j]]);
    }
    for w in ring_ids.windows(2) {
        for j in 0..s {
            let (a, b, c, d) = (w[0][j], w[0][(j + 1) % s], w[1][(j + 1) % s], w[1][j]);
            faces.push(vec![a, b, c]);
            faces.push(vec![a, c, d]);
        }
    }
    let last = ring_ids.last().unwrap();
    for j in 0..s {
        faces.push(vec![north, last[j], last[(j + 1) % s]]);
    }
    CellComplex { vertices: vs, faces }
}

/// Planar grid of `nx * ny` square cells of side `cell`, embedded in `E^dim` (`dim >= 2`).
pub fn grid(nx: usize, ny: usize, cell: f64, dim: usize) -> CellComplex {
    let mut vs = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let mut v = vec![0.0; dim];
            v[0] = i as f64 * cell;
            v[1] = j as f64 * cell;
            vs.push(v);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            faces.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    CellComplex { vertices: vs, faces }
}

/// The grid with every square cut along its rising diagonal.
pub fn triangulated_grid(nx: usize, ny: usize, cell: f64, dim: usize) -> CellComplex {
    let sq = grid(nx, ny, cell, dim);
    let faces = sq.faces.iter().flat_map(|f| [vec![f[0], f[1], f[2]], vec![f[0], f[2], f[3]]]).collect();
    CellComplex { vertices: sq.vertices, faces }
}

/// Boundary of the `k x k` block of grid cells with lower corner `(i0, j0)`.
pub fn grid_square_loop(nx: usize, i0: usize, j0: usize, k: usize) -> EdgeLoop {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut v = Vec::new();
    for i in i0..i0 + k {
        v.push(id(i, j0));
    }
    for j in j0..j0 + k {
        v.push(id(i0 + k, j));
    }
    for i in (i0 + 1..=i0 + k).rev() {
        v.push(id(i, j0 + k));
    }
    for j in (j0 + 1..=j0 + k).rev() {
        v.push(id(i0, j));
    }
    EdgeLoop { vertices: v }
}

/// Faces whose centroid has `coord`-th coordinate above `cut`.
pub fn faces_above(c: &CellComplex, coord: usize, cut: f64) -> Vec<usize> {
    (0..c.faces.len())
        .filter(|f| {
            let face = &c.faces[*f];
            let m: f64 = face.iter().map(|i| c.vertices[*i][coord]).sum::<f64>() / face.len() as f64;
            m > cut
        })
        .collect()
}

/// The host on which an oracle instance's loop is filled by the constructions.
#[derive(Clone, Debug)]
pub enum OracleHost {
    Flat,
    Tube { polytope: crate::tube::ConvexPolytope, radius: f64 },
}

/// A frozen small instance: complex, loop, and the host surface the complex discretises.
#[derive(Clone, Debug)]
pub struct OracleInstance {
    pub name: String,
    pub complex: CellComplex,
    pub edge_loop: EdgeLoop,
    pub host: OracleHost,
}

impl OracleInstance {
    pub fn loop_points(&self) -> Vec<Vector> {
        self.edge_loop.vertices.iter().map(|i| self.complex.point(*i)).collect()
    }
}

/// The frozen instances: caps on icospheres, rings and caps on capsules, grid squares.
pub fn frozen_instances() -> Vec<OracleInstance> {
    let mut out = Vec::new();
    let sphere_host = || OracleHost::Tube { polytope: crate::tube::ConvexPolytope::point(Vector::zeros(3)), radius: 1.0 };
    for level in [1usize, 2] {
        let c = icosphere(level, 1.0);
        for (axis, cut) in [(2usize, 0.0), (2, 0.5), (2, -0.3), (0, 0.2), (1, 0.7)] {
            let region = faces_above(&c, axis, cut);
            if let Some(b) = c.region_boundary(&region) {
                out.push(OracleInstance {
                    name: format!("icosphere{level}-x{axis}>{cut}"),
                    complex: c.clone(),
                    edge_loop: EdgeLoop { vertices: b },
                    host: sphere_host(),
                });
            }
        }
    }
    let cap = capsule(1.0, 1.0, 12, 3, 4);
    let seg_host = || OracleHost::Tube { polytope: crate::tube::ConvexPolytope::unit_segment(3), radius: 1.0 };
    for cut in [0.5, 1.4, -0.5] {
        let region = faces_above(&cap, 0, cut);
        if let Some(b) = cap.region_boundary(&region) {
            out.push(OracleInstance {
                name: format!("capsule-x0>{cut}"),
                complex: cap.clone(),
                edge_loop: EdgeLoop { vertices: b },
                host: seg_host(),
            });
        }
    }
    let g = triangulated_grid(8, 8, 1.0, 2);
    for (i0, j0, k) in [(0, 0, 2), (1, 2, 3), (2, 2, 4), (0, 0, 6)] {
        out.push(OracleInstance {
            name: format!("grid-{k}x{k}@{i0},{j0}"),
            complex: g.clone(),
            edge_loop: grid_square_loop(8, i0, j0, k),
            host: OracleHost::Flat,
        });
    }
    out
}
