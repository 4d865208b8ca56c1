//! Finite reflection groups: root systems of type A, B, C, D and their products,
//! Weyl orbits, the fundamental chamber, slopes and the orthogonal-slope machinery.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{angle, basis_vector, complement_basis, orthonormal_basis, project_onto, unit, Vector, DEDUP_TOL, TOL};

/// Hard cap on the size of an enumerated group.
pub const MAX_GROUP_ORDER: usize = 50_000;

/// Descriptor of a root system, serialised as `{"family": "a", "rank": 3}` or
/// `{"family": "product", "factors": [...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum RootSystemSpec {
    A { rank: usize },
    B { rank: usize },
    C { rank: usize },
    D { rank: usize },
    Product { factors: Vec<RootSystemSpec> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    Product,
}

impl RootSystemSpec {
    pub fn a(rank: usize) -> Self {
        RootSystemSpec::A { rank }
    }

    pub fn product(factors: Vec<RootSystemSpec>) -> Self {
        RootSystemSpec::Product { factors }
    }

    pub fn family(&self) -> Family {
        match self {
            RootSystemSpec::A { .. } => Family::A,
            RootSystemSpec::B { .. } => Family::B,
            RootSystemSpec::C { .. } => Family::C,
            RootSystemSpec::D { .. } => Family::D,
            RootSystemSpec::Product { .. } => Family::Product,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            RootSystemSpec::A { rank }
            | RootSystemSpec::B { rank }
            | RootSystemSpec::C { rank }
            | RootSystemSpec::D { rank } => *rank,
            RootSystemSpec::Product { factors } => factors.iter().map(|f| f.rank()).sum(),
        }
    }

    /// Irreducible factors, flattening nested products.
    pub fn irreducible_factors(&self) -> Vec<RootSystemSpec> {
        match self {
            RootSystemSpec::Product { factors } => {
                factors.iter().flat_map(|f| f.irreducible_factors()).collect()
            }
            other => vec![other.clone()],
        }
    }

    fn validate(&self, standalone: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::UnsupportedRootSystem(msg));
        match self {
            RootSystemSpec::A { rank } => {
                let min = if standalone { 2 } else { 1 };
                if *rank < min {
                    return bad(format!("A_{rank}: rank must be at least {min}"));
                }
            }
            RootSystemSpec::B { rank } | RootSystemSpec::C { rank } => {
                if *rank < 2 {
                    return bad(format!("{:?}_{rank}: rank must be at least 2", self.family()));
                }
            }
            RootSystemSpec::D { rank } => {
                if *rank < 4 {
                    return bad(format!("D_{rank}: rank must be at least 4"));
                }
            }
            RootSystemSpec::Product { factors } => {
                if factors.is_empty() {
                    return bad("empty product".into());
                }
                for f in factors {
                    f.validate(false)?;
                }
            }
        }
        Ok(())
    }

    /// Expected Cartan matrix `a_ij = 2<a_i,a_j>/<a_j,a_j>` for an irreducible factor.
    fn cartan(&self) -> DMatrix<i64> {
        let n = self.rank();
        let mut c = DMatrix::<i64>::zeros(n, n);
        for i in 0..n {
            c[(i, i)] = 2;
        }
        match self {
            RootSystemSpec::A { .. } => {
                for i in 0..n.saturating_sub(1) {
                    c[(i, i + 1)] = -1;
                    c[(i + 1, i)] = -1;
                }
            }
            RootSystemSpec::B { .. } => {
                for i in 0..n - 1 {
                    c[(i, i + 1)] = -1;
                    c[(i + 1, i)] = -1;
                }
                // last root short
                c[(n - 2, n - 1)] = -2;
                c[(n - 1, n - 2)] = -1;
            }
            RootSystemSpec::C { .. } => {
                for i in 0..n - 1 {
                    c[(i, i + 1)] = -1;
                    c[(i + 1, i)] = -1;
                }
                // last root long
                c[(n - 2, n - 1)] = -1;
                c[(n - 1, n - 2)] = -2;
            }
            RootSystemSpec::D { .. } => {
                for i in 0..n - 2 {
                    c[(i, i + 1)] = -1;
                    c[(i + 1, i)] = -1;
                }
                c[(n - 3, n - 1)] = -1;
                c[(n - 1, n - 3)] = -1;
            }
            RootSystemSpec::Product { .. } => unreachable!("cartan of a product"),
        }
        c
    }

    /// Simple roots of an irreducible factor in E^rank.
    fn simple_roots(&self) -> Vec<Vector> {
        let n = self.rank();
        match self {
            RootSystemSpec::A { .. } => {
                // Cholesky factor of the Gram matrix; row i is alpha_i.
                let mut g = DMatrix::<f64>::zeros(n, n);
                for i in 0..n {
                    g[(i, i)] = 2.0;
                    if i + 1 < n {
                        g[(i, i + 1)] = -1.0;
                        g[(i + 1, i)] = -1.0;
                    }
                }
                let l = g.cholesky().expect("A-type Gram matrix is positive definite").l();
                (0..n).map(|i| Vector::from_iterator(n, (0..n).map(|j| l[(i, j)]))).collect()
            }
            RootSystemSpec::B { .. } | RootSystemSpec::C { .. } => {
                let mut roots: Vec<Vector> = (0..n - 1)
                    .map(|i| basis_vector(n, i) - basis_vector(n, i + 1))
                    .collect();
                let last = if matches!(self, RootSystemSpec::B { .. }) { 1.0 } else { 2.0 };
                roots.push(basis_vector(n, n - 1) * last);
                roots
            }
            RootSystemSpec::D { .. } => {
                let mut roots: Vec<Vector> = (0..n - 1)
                    .map(|i| basis_vector(n, i) - basis_vector(n, i + 1))
                    .collect();
                roots.push(basis_vector(n, n - 2) + basis_vector(n, n - 1));
                roots
            }
            RootSystemSpec::Product { .. } => unreachable!(),
        }
    }

    /// Known group order of the Weyl group.
    pub fn group_order(&self) -> usize {
        fn fact(n: usize) -> usize {
            (1..=n).product()
        }
        match self {
            RootSystemSpec::A { rank } => fact(rank + 1),
            RootSystemSpec::B { rank } | RootSystemSpec::C { rank } => (1 << rank) * fact(*rank),
            RootSystemSpec::D { rank } => (1 << (rank - 1)) * fact(*rank),
            RootSystemSpec::Product { factors } => factors.iter().map(|f| f.group_order()).product(),
        }
    }
}

/// A finite reflection group acting on E^rank, with its enumerated elements.
#[derive(Clone, Debug)]
pub struct RootSystem {
    spec: RootSystemSpec,
    rank: usize,
    simple_roots: Vec<Vector>,
    factor_roots: Vec<Vec<usize>>,
    elements: Vec<DMatrix<f64>>,
    roots: Vec<Vector>,
    reflections: Vec<Vector>,
    chamber_generators: Vec<Vector>,
}

/// A unit vector in the closed fundamental chamber, with its coordinate certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    direction: Vector,
    certificate: Vec<f64>,
}

impl Slope {
    /// Validate `v` as a slope of `rs`.
    pub fn new(rs: &RootSystem, v: Vector) -> Result<Slope> {
        if v.len() != rs.rank {
            return Err(Error::Dimension { expected: rs.rank, got: v.len() });
        }
        let n = v.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnit(n));
        }
        let certificate: Vec<f64> = rs.simple_roots.iter().map(|a| a.dot(&v)).collect();
        for (i, c) in certificate.iter().enumerate() {
            if *c < -TOL {
                return Err(Error::NotInChamber { root: i, value: *c });
            }
        }
        Ok(Slope { direction: v, certificate })
    }

    /// Normalise `v` first, then validate.
    pub fn from_direction(rs: &RootSystem, v: &Vector) -> Result<Slope> {
        let u = unit(v).ok_or(Error::NotUnit(0.0))?;
        Slope::new(rs, u)
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    /// Inner products with the simple roots, all `>= -1e-9`.
    pub fn certificate(&self) -> &[f64] {
        &self.certificate
    }

    pub fn is_regular(&self) -> bool {
        self.certificate.iter().all(|c| *c > TOL)
    }
}

/// The gap of the distance set around pi/2.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaZero {
    pub delta0: f64,
    pub delta0_prime: f64,
    /// Sorted, deduplicated distance set.
    pub distances: Vec<f64>,
}

/// Outcome of a good-slope search.
#[derive(Clone, Debug)]
pub struct GoodSlope {
    pub slope: Slope,
    /// `min(ort_distance, distance to the walls)`.
    pub margin: f64,
    pub ort_distance: f64,
    pub wall_distance: f64,
}

/// One irreducible factor with the component of a slope in it.
#[derive(Clone, Debug)]
pub struct FactorComponent {
    pub spec: RootSystemSpec,
    pub simple_root_indices: Vec<usize>,
    pub component: Vector,
}

#[derive(Clone, Debug)]
pub struct FactorSplit {
    pub factors: Vec<FactorComponent>,
    /// Index of the first factor in which the slope has a vanishing component,
    /// when there are at least two factors.
    pub parallel_to_factor: Option<usize>,
}

impl FactorSplit {
    pub fn is_parallel(&self) -> bool {
        self.parallel_to_factor.is_some()
    }
}

fn matrix_key(m: &DMatrix<f64>) -> Vec<i64> {
    m.iter().map(|x| (x * 1e6).round() as i64).collect()
}

impl RootSystem {
    pub fn new(spec: RootSystemSpec) -> Result<RootSystem> {
        spec.validate(true)?;
        let irreducible = spec.irreducible_factors();
        let rank = spec.rank();
        let expected_order = spec.group_order();
        if expected_order > MAX_GROUP_ORDER {
            return Err(Error::GroupTooLarge(MAX_GROUP_ORDER));
        }

        // block-diagonal simple roots
        let mut simple_roots = Vec::new();
        let mut offset = 0;
        for f in &irreducible {
            let k = f.rank();
            for r in f.simple_roots() {
                let mut v = Vector::zeros(rank);
                for j in 0..k {
                    v[offset + j] = r[j];
                }
                simple_roots.push(v);
            }
            offset += k;
        }

        // Cartan check per declared factor
        let mut offset = 0;
        for f in &irreducible {
            let k = f.rank();
            let expected = f.cartan();
            for i in 0..k {
                for j in 0..k {
                    let ai = &simple_roots[offset + i];
                    let aj = &simple_roots[offset + j];
                    let a = 2.0 * ai.dot(aj) / aj.dot(aj);
                    if (a - expected[(i, j)] as f64).abs() > 1e-9 {
                        return Err(Error::UnsupportedRootSystem(format!(
                            "Cartan integer mismatch at ({i},{j}) in {f:?}"
                        )));
                    }
                }
            }
            offset += k;
        }

        let factor_roots = diagram_components(&simple_roots);

        // reflection closure (breadth first, deterministic order)
        let gens: Vec<DMatrix<f64>> = simple_roots.iter().map(reflection_matrix).collect();
        let mut elements = vec![DMatrix::<f64>::identity(rank, rank)];
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
        seen.insert(matrix_key(&elements[0]), 0);
        let mut head = 0;
        while head < elements.len() {
            let current = elements[head].clone();
            for g in &gens {
                let next = g * &current;
                let key = matrix_key(&next);
                if !seen.contains_key(&key) {
                    seen.insert(key, elements.len());
                    elements.push(next);
                    if elements.len() > MAX_GROUP_ORDER {
                        return Err(Error::GroupTooLarge(MAX_GROUP_ORDER));
                    }
                }
            }
            head += 1;
        }
        if elements.len() != expected_order {
            return Err(Error::UnsupportedRootSystem(format!(
                "closure has {} elements, expected {expected_order}",
                elements.len()
            )));
        }

        // roots: orbit of the simple roots
        let mut roots = Vec::new();
        for a in &simple_roots {
            for w in &elements {
                roots.push(w * a);
            }
        }
        let roots = crate::linalg::dedup_vectors(roots, 1e-9);
        let mut reflections: Vec<Vector> = Vec::new();
        for r in &roots {
            let mut u = r / r.norm();
            let lead = u.iter().find(|x| x.abs() > 1e-9).copied().unwrap_or(1.0);
            if lead < 0.0 {
                u = -u;
            }
            if !reflections.iter().any(|v| (v - &u).amax() <= 1e-9) {
                reflections.push(u);
            }
        }

        // chamber generators: dual basis to the simple roots, normalised
        let mut a = DMatrix::<f64>::zeros(rank, rank);
        for (i, r) in simple_roots.iter().enumerate() {
            for j in 0..rank {
                a[(i, j)] = r[j];
            }
        }
        let inv = a.try_inverse().ok_or_else(|| {
            Error::UnsupportedRootSystem("simple roots are linearly dependent".into())
        })?;
        let chamber_generators = (0..rank)
            .map(|j| {
                let c = Vector::from_iterator(rank, (0..rank).map(|i| inv[(i, j)]));
                &c / c.norm()
            })
            .collect();

        Ok(RootSystem {
            spec,
            rank,
            simple_roots,
            factor_roots,
            elements,
            roots,
            reflections,
            chamber_generators,
        })
    }

    pub fn spec(&self) -> &RootSystemSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn simple_roots(&self) -> &[Vector] {
        &self.simple_roots
    }

    /// Group elements as matrices; index 0 is the identity.
    pub fn elements(&self) -> &[DMatrix<f64>] {
        &self.elements
    }

    /// |W|, which is also the number of chambers.
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn roots(&self) -> &[Vector] {
        &self.roots
    }

    /// Unit normals, one per reflection of the group.
    pub fn reflections(&self) -> &[Vector] {
        &self.reflections
    }

    /// Unit vectors spanning the extreme rays of the fundamental chamber.
    pub fn chamber_generators(&self) -> &[Vector] {
        &self.chamber_generators
    }

    /// Simple-root index sets of the irreducible factors.
    pub fn factor_roots(&self) -> &[Vec<usize>] {
        &self.factor_roots
    }

    pub fn in_chamber(&self, v: &Vector) -> bool {
        self.simple_roots.iter().all(|a| a.dot(v) >= -TOL)
    }

    /// Orbit of `v`, deduplicated, in group enumeration order.
    pub fn orbit(&self, v: &Vector) -> Vec<Vector> {
        let mut out: Vec<Vector> = Vec::new();
        for w in &self.elements {
            let p = w * v;
            if !out.iter().any(|u| (u - &p).amax() <= TOL) {
                out.push(p);
            }
        }
        out
    }

    /// Image of `v` in the closed fundamental chamber by successive reflections.
    pub fn fold_to_chamber(&self, v: &Vector) -> Vector {
        let mut x = v.clone();
        for _ in 0..10 * self.order() + 10 {
            let mut worst = None;
            let mut worst_val = -DEDUP_TOL;
            for (i, a) in self.simple_roots.iter().enumerate() {
                let c = a.dot(&x) / a.norm();
                if c < worst_val {
                    worst_val = c;
                    worst = Some(i);
                }
            }
            match worst {
                None => break,
                Some(i) => {
                    let a = &self.simple_roots[i];
                    x = &x - a * (2.0 * a.dot(&x) / a.dot(a));
                }
            }
        }
        x
    }
}

fn reflection_matrix(a: &Vector) -> DMatrix<f64> {
    let n = a.len();
    DMatrix::<f64>::identity(n, n) - (a * a.transpose()) * (2.0 / a.dot(a))
}

fn diagram_components(simple_roots: &[Vector]) -> Vec<Vec<usize>> {
    let n = simple_roots.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        let mut members = Vec::new();
        comp[s] = id;
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if comp[j] == usize::MAX && simple_roots[i].dot(&simple_roots[j]).abs() > TOL {
                    comp[j] = id;
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Build and validate a root system.
pub fn build_root_system(spec: RootSystemSpec) -> Result<RootSystem> {
    RootSystem::new(spec)
}

/// Weyl orbit of a unit vector.
pub fn weyl_orbit(rs: &RootSystem, v: &Vector) -> Result<Vec<Vector>> {
    check_unit(rs, v)?;
    Ok(rs.orbit(v))
}

fn check_unit(rs: &RootSystem, v: &Vector) -> Result<()> {
    if v.len() != rs.rank() {
        return Err(Error::Dimension { expected: rs.rank(), got: v.len() });
    }
    let n = v.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotUnit(n));
    }
    Ok(())
}

/// The unique orbit representative of `v` in the closed fundamental chamber.
pub fn project_to_chamber(rs: &RootSystem, v: &Vector) -> Result<Slope> {
    check_unit(rs, v)?;
    let x = rs.fold_to_chamber(v);
    Slope::new(rs, &x / x.norm())
}

/// The opposition involution: the chamber image of `-u_theta`.
pub fn opposition(rs: &RootSystem, theta: &Slope) -> Slope {
    project_to_chamber(rs, &(-theta.direction())).expect("negated slope is a unit vector")
}

/// `min_w |pi/2 - angle(u_beta, w u_theta)|`.
pub fn ort_distance(rs: &RootSystem, theta: &Slope, beta: &Slope) -> f64 {
    ort_distance_to_orbit(&rs.orbit(theta.direction()), beta.direction())
}

pub(crate) fn ort_distance_to_orbit(orbit: &[Vector], u: &Vector) -> f64 {
    orbit
        .iter()
        .map(|o| (FRAC_PI_2 - angle(u, o)).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Euclidean projection of `x` onto the simplicial cone spanned by `gens`
/// (linearly independent). Enumerates faces of the cone.
pub fn project_onto_cone(x: &Vector, gens: &[Vector]) -> Vector {
    let k = gens.len();
    let mut best = Vector::zeros(x.len());
    let mut best_d = x.norm();
    for mask in 1u32..(1u32 << k) {
        let sel: Vec<&Vector> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| &gens[i]).collect();
        let m = sel.len();
        let mut g = DMatrix::<f64>::zeros(m, m);
        let mut rhs = Vector::zeros(m);
        for i in 0..m {
            rhs[i] = sel[i].dot(x);
            for j in 0..m {
                g[(i, j)] = sel[i].dot(sel[j]);
            }
        }
        let Some(c) = crate::linalg::solve(&g, &rhs) else { continue };
        if c.iter().any(|v| *v < -1e-12) {
            continue;
        }
        let mut p = Vector::zeros(x.len());
        for i in 0..m {
            p += sel[i] * c[i];
        }
        let d = (x - &p).norm();
        if d < best_d - 1e-15 {
            best_d = d;
            best = p;
        }
    }
    best
}

/// Spherical distance from unit `x` to the spherical simplex spanned by `gens`.
pub fn spherical_distance_to_cone(x: &Vector, gens: &[Vector]) -> f64 {
    let p = project_onto_cone(x, gens);
    let n = p.norm();
    if n > 1e-12 {
        (x.dot(&p) / n).clamp(-1.0, 1.0).acos()
    } else {
        // x lies in the polar cone: the closest point is a vertex
        let m = gens
            .iter()
            .map(|g| x.dot(g) / g.norm())
            .fold(f64::NEG_INFINITY, f64::max);
        m.clamp(-1.0, 1.0).acos()
    }
}

/// All simplices of the Coxeter complex, as lists of unit generators.
pub fn coxeter_simplices(rs: &RootSystem) -> Vec<Vec<Vector>> {
    let r = rs.rank();
    let gens = rs.chamber_generators();
    let mut seen: HashMap<Vec<Vec<i64>>, ()> = HashMap::new();
    let mut out = Vec::new();
    for w in rs.elements() {
        let images: Vec<Vector> = gens.iter().map(|g| w * g).collect();
        for mask in 1u32..(1u32 << r) {
            let face: Vec<Vector> = (0..r).filter(|i| mask & (1 << i) != 0).map(|i| images[i].clone()).collect();
            let mut key: Vec<Vec<i64>> = face
                .iter()
                .map(|v| v.iter().map(|x| (x * 1e8).round() as i64).collect())
                .collect();
            key.sort();
            if seen.insert(key, ()).is_none() {
                out.push(face);
            }
        }
    }
    out
}

/// Factor decomposition via connectivity of the Coxeter diagram.
pub fn factor_split(rs: &RootSystem, theta: &Slope) -> FactorSplit {
    let irreducible = rs.spec().irreducible_factors();
    let mut factors = Vec::new();
    for (k, idx) in rs.factor_roots().iter().enumerate() {
        let span: Vec<Vector> = idx.iter().map(|i| rs.simple_roots()[*i].clone()).collect();
        let basis = orthonormal_basis(&span, 1e-12);
        let component = project_onto(theta.direction(), &basis);
        // diagram components follow the block order of the declared factors
        let spec = irreducible.get(k).cloned().unwrap_or(RootSystemSpec::A { rank: idx.len() });
        factors.push(FactorComponent { spec, simple_root_indices: idx.clone(), component });
    }
    let parallel_to_factor = if factors.len() >= 2 {
        factors.iter().position(|f| f.component.norm() <= TOL)
    } else {
        None
    };
    FactorSplit { factors, parallel_to_factor }
}

/// Gaps of the distance set D(theta) below and above pi/2.
pub fn delta_zero(rs: &RootSystem, theta: &Slope) -> Result<DeltaZero> {
    let split = factor_split(rs, theta);
    if let Some(f) = split.parallel_to_factor {
        return Err(Error::DegenerateSlope { factor: f });
    }
    let x = theta.direction();
    let mut ds: Vec<f64> = coxeter_simplices(rs)
        .iter()
        .map(|s| spherical_distance_to_cone(x, s))
        .collect();
    ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut distances: Vec<f64> = Vec::new();
    for d in ds {
        if distances.last().is_none_or(|l| d - l > TOL) {
            distances.push(d);
        }
    }
    let below = distances.iter().copied().filter(|d| *d < FRAC_PI_2 - TOL).fold(f64::NEG_INFINITY, f64::max);
    let above = distances.iter().copied().filter(|d| *d > FRAC_PI_2 + TOL).fold(f64::INFINITY, f64::min);
    if !below.is_finite() || !above.is_finite() {
        return Err(Error::DegenerateSlope { factor: 0 });
    }
    Ok(DeltaZero { delta0: FRAC_PI_2 - below, delta0_prime: above - FRAC_PI_2, distances })
}

/// Smallest angular distance from `u` (in the chamber) to a wall of the chamber.
pub fn wall_distance(rs: &RootSystem, u: &Vector) -> f64 {
    rs.simple_roots()
        .iter()
        .map(|a| (a.dot(u) / (a.norm() * u.norm())).clamp(-1.0, 1.0).asin())
        .fold(f64::INFINITY, f64::min)
}

/// Grid resolution used by [`find_good_slope`] along each chamber edge.
pub fn good_slope_resolution(rank: usize) -> usize {
    match rank {
        0..=2 => 60,
        3 => 24,
        4 => 12,
        _ => 6,
    }
}

/// Grid-plus-refine search for a slope far from Ort(theta) and from the walls.
pub fn find_good_slope(rs: &RootSystem, theta: &Slope, delta1: f64) -> Result<GoodSlope> {
    if !(delta1 > 0.0) {
        return Err(Error::OutOfRange(format!("delta1 = {delta1} must be positive")));
    }
    let r = rs.rank();
    let gens = rs.chamber_generators().to_vec();
    let orbit = rs.orbit(theta.direction());
    let resolution = good_slope_resolution(r);

    let eval = |b: &[f64]| -> Option<(f64, f64, f64, Vector)> {
        if b.iter().any(|x| *x < 0.0) {
            return None;
        }
        let mut v = Vector::zeros(r);
        for (g, c) in gens.iter().zip(b) {
            v += g * *c;
        }
        let u = unit(&v)?;
        let od = ort_distance_to_orbit(&orbit, &u);
        let wd = wall_distance(rs, &u);
        Some((od.min(wd), od, wd, u))
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut b = vec![0usize; r];
    grid_points(r, &mut b, 0, resolution, &mut |pt| {
        let bf: Vec<f64> = pt.iter().map(|x| *x as f64 / resolution as f64).collect();
        if let Some((m, ..)) = eval(&bf) {
            if best.as_ref().is_none_or(|(bm, _)| m > *bm + 1e-15) {
                best = Some((m, bf));
            }
        }
    });
    let (mut best_m, mut best_b) = best.expect("grid is nonempty");

    // pattern search refinement along e_i - e_j
    let mut step = 1.0 / resolution as f64;
    for _ in 0..40 {
        let mut improved = false;
        for i in 0..r {
            for j in 0..r {
                if i == j {
                    continue;
                }
                let mut cand = best_b.clone();
                cand[i] += step;
                cand[j] -= step;
                if let Some((m, ..)) = eval(&cand) {
                    if m > best_m + 1e-15 {
                        best_m = m;
                        best_b = cand;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let (m, od, wd, u) = eval(&best_b).expect("refined point is valid");
    if m > delta1 {
        let slope = Slope::new(rs, u)?;
        // re-validate the certificate independently
        let od2 = ort_distance(rs, theta, &slope);
        debug_assert!((od2 - od).abs() < 1e-12);
        Ok(GoodSlope { slope, margin: m, ort_distance: od, wall_distance: wd })
    } else {
        Err(Error::GoodSlopeNotFound { resolution, best_margin: m })
    }
}

fn grid_points(r: usize, b: &mut Vec<usize>, i: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
    if i + 1 == r {
        b[i] = left;
        f(b);
        return;
    }
    for v in 0..=left {
        b[i] = v;
        grid_points(r, b, i + 1, left - v, f);
    }
}

/// A wall of chamber `chamber` (index into the group elements) that neither contains
/// nor is orthogonal to the subspace spanned by `phi`.
pub fn skew_hyperplane(rs: &RootSystem, chamber: usize, phi: &[Vector]) -> Result<Vector> {
    let w = rs
        .elements()
        .get(chamber)
        .ok_or_else(|| Error::OutOfRange(format!("chamber index {chamber} >= {}", rs.order())))?;
    for v in phi {
        if v.len() != rs.rank() {
            return Err(Error::Dimension { expected: rs.rank(), got: v.len() });
        }
    }
    let basis = orthonormal_basis(phi, 1e-12);
    let perp = complement_basis(&basis, rs.rank());
    for a in rs.simple_roots() {
        let n = w * a;
        let n = &n / n.norm();
        let inside = project_onto(&n, &basis).norm();
        let outside = project_onto(&n, &perp).norm();
        if inside > TOL && outside > TOL {
            return Ok(n);
        }
    }
    Err(Error::NoSkewHyperplane)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn orders() {
        for n in 2..=4 {
            let rs = RootSystem::new(RootSystemSpec::a(n)).unwrap();
            assert_eq!(rs.order(), (1..=n + 1).product::<usize>());
        }
        let b3 = RootSystem::new(RootSystemSpec::B { rank: 3 }).unwrap();
        assert_eq!(b3.order(), 48);
        let d4 = RootSystem::new(RootSystemSpec::D { rank: 4 }).unwrap();
        assert_eq!(d4.order(), 192);
    }

    #[test]
    fn reflections_count() {
        let a2 = RootSystem::new(RootSystemSpec::a(2)).unwrap();
        assert_eq!(a2.reflections().len(), 3);
        assert_eq!(a2.roots().len(), 6);
        let a1a1 = RootSystem::new(RootSystemSpec::product(vec![RootSystemSpec::a(1), RootSystemSpec::a(1)])).unwrap();
        assert_eq!(a1a1.reflections().len(), 2);
        assert_eq!(a1a1.order(), 4);
        assert!(a1a1.reflections()[0].dot(&a1a1.reflections()[1]).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(RootSystem::new(RootSystemSpec::a(1)).is_err());
        assert!(RootSystem::new(RootSystemSpec::D { rank: 3 }).is_err());
        assert!(RootSystem::new(RootSystemSpec::product(vec![])).is_err());
    }

    #[test]
    fn chamber_generators_are_in_chamber() {
        let rs = RootSystem::new(RootSystemSpec::a(3)).unwrap();
        for g in rs.chamber_generators() {
            assert!(rs.in_chamber(g));
        }
    }

    #[test]
    fn not_in_chamber_certificate() {
        let rs = RootSystem::new(RootSystemSpec::a(2)).unwrap();
        let v = -rs.chamber_generators()[0].clone();
        match Slope::new(&rs, v) {
            Err(Error::NotInChamber { .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(Slope::new(&rs, vector(&[2.0, 0.0])).is_err());
    }
}
