//! Convex polyhedra given by halfspaces, with a derived vertex/ray description,
//! affine span and a nearest-point projection.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complement_basis, for_each_combination, orthonormal_basis, project_onto, Vector, TOL};

/// `normal . x <= bound`, with a unit normal once normalised.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vector,
    pub bound: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, bound: f64) -> Self {
        Halfspace { normal, bound }
    }

    pub fn slack(&self, x: &Vector) -> f64 {
        self.bound - self.normal.dot(x)
    }
}

/// A closed convex polyhedron `{x : n_i . x <= b_i}` in E^dim.
#[derive(Clone, Debug)]
pub struct HPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    empty: bool,
    /// Indices of implicit equalities.
    equalities: Vec<usize>,
    /// A linearly independent subset of `equalities`.
    eq_rows: Vec<usize>,
    /// A relative-interior point.
    interior: Option<Vector>,
    span_basis: Vec<Vector>,
    lineality: Vec<Vector>,
    vertices: Vec<Vector>,
    rays: Vec<Vector>,
}

/// Small LP front end. Variables without a finite lower bound are split into a
/// difference of two nonnegative variables (the simplex backend cycles on free
/// columns otherwise).
pub(crate) struct Lp {
    problem: Problem,
    cols: Vec<(microlp::Variable, Option<microlp::Variable>)>,
}

impl Lp {
    pub fn new(maximize: bool, obj: &[f64], bounds: &[(f64, f64)]) -> Lp {
        let dir = if maximize { OptimizationDirection::Maximize } else { OptimizationDirection::Minimize };
        let mut problem = Problem::new(dir);
        let mut cols = Vec::with_capacity(obj.len());
        let mut caps = Vec::new();
        for (c, (lo, hi)) in obj.iter().zip(bounds) {
            if lo.is_finite() {
                cols.push((problem.add_var(*c, (*lo, *hi)), None));
            } else {
                let p = problem.add_var(*c, (0.0, f64::INFINITY));
                let m = problem.add_var(-*c, (0.0, f64::INFINITY));
                if hi.is_finite() {
                    caps.push((p, m, *hi));
                }
                cols.push((p, Some(m)));
            }
        }
        for (p, m, hi) in caps {
            problem.add_constraint([(p, 1.0), (m, -1.0)].as_slice(), ComparisonOp::Le, hi);
        }
        Lp { problem, cols }
    }

    fn expr(&self, coeffs: &[f64]) -> Vec<(microlp::Variable, f64)> {
        let mut e = Vec::new();
        for ((p, m), c) in self.cols.iter().zip(coeffs) {
            if *c == 0.0 {
                continue;
            }
            e.push((*p, *c));
            if let Some(m) = m {
                e.push((*m, -*c));
            }
        }
        e
    }

    pub fn le(&mut self, coeffs: &[f64], rhs: f64) {
        let e = self.expr(coeffs);
        self.problem.add_constraint(e.as_slice(), ComparisonOp::Le, rhs);
    }

    pub fn eq(&mut self, coeffs: &[f64], rhs: f64) {
        let e = self.expr(coeffs);
        self.problem.add_constraint(e.as_slice(), ComparisonOp::Eq, rhs);
    }

    /// `Ok(Some((objective, x)))`, `Ok(None)` if infeasible, `Err` if unbounded or failed.
    pub fn solve(&self) -> std::result::Result<Option<(f64, Vec<f64>)>, LpStatus> {
        match self.problem.solve() {
            Ok(outcome) => match outcome.into_solution() {
                Ok(sol) => {
                    let xs = self
                        .cols
                        .iter()
                        .map(|(p, m)| sol.var_value(*p) - m.map(|m| sol.var_value(m)).unwrap_or(0.0))
                        .collect();
                    Ok(Some((sol.objective(), xs)))
                }
                Err(_) => Err(LpStatus::Failed),
            },
            Err(microlp::Error::Infeasible) => Ok(None),
            Err(microlp::Error::Unbounded) => Err(LpStatus::Unbounded),
            Err(_) => Err(LpStatus::Failed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Unbounded,
    Failed,
}

const FREE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);

impl HPolytope {
    /// Build from halfspaces; normals are normalised and zero rows checked.
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<HPolytope> {
        let mut hs = Vec::with_capacity(halfspaces.len());
        let mut trivially_empty = false;
        for h in halfspaces {
            if h.normal.len() != dim {
                return Err(Error::Dimension { expected: dim, got: h.normal.len() });
            }
            let n = h.normal.norm();
            if n <= 1e-14 {
                if h.bound < -TOL {
                    trivially_empty = true;
                }
                continue;
            }
            hs.push(Halfspace { normal: &h.normal / n, bound: h.bound / n });
        }
        let mut p = HPolytope {
            dim,
            halfspaces: hs,
            empty: false,
            equalities: Vec::new(),
            eq_rows: Vec::new(),
            interior: None,
            span_basis: Vec::new(),
            lineality: Vec::new(),
            vertices: Vec::new(),
            rays: Vec::new(),
        };
        if trivially_empty {
            p.empty = true;
            return Ok(p);
        }
        p.analyse()?;
        Ok(p)
    }

    /// Whole space (no constraints).
    pub fn whole_space(dim: usize) -> HPolytope {
        HPolytope::new(dim, Vec::new()).expect("no constraints")
    }

    fn analyse(&mut self) -> Result<()> {
        let n = self.dim;
        let m = self.halfspaces.len();
        if m == 0 {
            self.interior = Some(Vector::zeros(n));
            self.span_basis = (0..n).map(|i| crate::linalg::basis_vector(n, i)).collect();
            self.lineality = self.span_basis.clone();
            self.vertices = vec![Vector::zeros(n)];
            return Ok(());
        }
        // maximise the common slack s <= 1
        let (sigma, x) = self.max_slack(&[])?;
        let Some((sigma, x)) = sigma.zip(x) else {
            self.empty = true;
            return Ok(());
        };
        if sigma < -TOL {
            self.empty = true;
            return Ok(());
        }
        if sigma <= TOL {
            // lower-dimensional: find implicit equalities
            let eps = 1e-9;
            for i in 0..m {
                let h = &self.halfspaces[i];
                let obj: Vec<f64> = h.normal.iter().map(|v| -v).collect();
                let mut lp = Lp::new(true, &obj, &vec![FREE; n]);
                for g in &self.halfspaces {
                    lp.le(g.normal.as_slice(), g.bound + eps);
                }
                match lp.solve() {
                    Ok(Some((val, _))) => {
                        if h.bound + val <= 4.0 * eps {
                            self.equalities.push(i);
                        }
                    }
                    Ok(None) => {
                        self.empty = true;
                        return Ok(());
                    }
                    Err(LpStatus::Unbounded) => {}
                    Err(LpStatus::Failed) => return Err(Error::Lp("equality detection".into())),
                }
            }
        }
        let eq_normals: Vec<Vector> = self.equalities.iter().map(|i| self.halfspaces[*i].normal.clone()).collect();
        let eq_basis = orthonormal_basis(&eq_normals, 1e-9);
        let mut chosen: Vec<Vector> = Vec::new();
        for i in &self.equalities {
            let mut trial = chosen.clone();
            trial.push(self.halfspaces[*i].normal.clone());
            if orthonormal_basis(&trial, 1e-9).len() == trial.len() {
                chosen = trial;
                self.eq_rows.push(*i);
            }
        }
        self.span_basis = complement_basis(&eq_basis, n);

        // relative interior point: maximise slack of the non-equality rows inside the span
        let interior = if self.equalities.is_empty() {
            x
        } else {
            let (s2, x2) = self.max_slack(&self.equalities.clone())?;
            match (s2, x2) {
                (Some(_), Some(x2)) => x2,
                _ => x,
            }
        };
        let interior = self.settle_on_equalities(&interior);
        self.interior = Some(interior.clone());

        // lineality: span directions orthogonal to every normal
        let normals: Vec<Vector> = self.halfspaces.iter().map(|h| h.normal.clone()).collect();
        let nb = orthonormal_basis(&normals, 1e-9);
        let perp = complement_basis(&nb, n);
        self.lineality = perp;

        // reduced space: span minus lineality
        let mut reduced_gen = Vec::new();
        for b in &self.span_basis {
            let r = b - project_onto(b, &self.lineality);
            reduced_gen.push(r);
        }
        let reduced = orthonormal_basis(&reduced_gen, 1e-9);
        let k = reduced.len();
        let ineq: Vec<usize> = (0..m).filter(|i| !self.equalities.contains(i)).collect();
        let rows: Vec<Vector> = ineq
            .iter()
            .map(|i| Vector::from_iterator(k, reduced.iter().map(|b| b.dot(&self.halfspaces[*i].normal))))
            .collect();
        let rhs: Vec<f64> = ineq.iter().map(|i| self.halfspaces[*i].slack(&interior)).collect();

        let mut vertices: Vec<Vector> = Vec::new();
        if k == 0 {
            vertices.push(interior.clone());
        } else {
            for_each_combination(ineq.len(), k, |sel| {
                let mut a = DMatrix::<f64>::zeros(k, k);
                let mut b = Vector::zeros(k);
                for (r, s) in sel.iter().enumerate() {
                    for c in 0..k {
                        a[(r, c)] = rows[*s][c];
                    }
                    b[r] = rhs[*s];
                }
                if a.determinant().abs() < 1e-10 {
                    return true;
                }
                if let Some(y) = crate::linalg::solve(&a, &b) {
                    let ok = rows.iter().zip(&rhs).all(|(row, r)| row.dot(&y) <= r + 1e-9 * (1.0 + r.abs()));
                    if ok {
                        let mut x = interior.clone();
                        for (c, bvec) in reduced.iter().enumerate() {
                            x += bvec * y[c];
                        }
                        if !vertices.iter().any(|v| (v - &x).amax() <= 1e-9 * (1.0 + x.amax())) {
                            vertices.push(x);
                        }
                    }
                }
                true
            });
        }
        self.vertices = vertices;

        // extreme rays of the reduced recession cone
        let mut rays: Vec<Vector> = Vec::new();
        if k >= 1 {
            for_each_combination(ineq.len(), k - 1, |sel| {
                let sub: Vec<Vector> = sel.iter().map(|s| rows[*s].clone()).collect();
                let sb = orthonormal_basis(&sub, 1e-9);
                if sb.len() != k - 1 {
                    return true;
                }
                let dir = complement_basis(&sb, k);
                let d = &dir[0];
                for sign in [1.0, -1.0] {
                    let dd = d * sign;
                    if rows.iter().all(|row| row.dot(&dd) <= 1e-9) {
                        let mut x = Vector::zeros(n);
                        for (c, bvec) in reduced.iter().enumerate() {
                            x += bvec * dd[c];
                        }
                        let x = &x / x.norm();
                        if !rays.iter().any(|v| (v - &x).amax() <= 1e-9) {
                            rays.push(x);
                        }
                    }
                }
                true
            });
        }
        self.rays = rays;
        Ok(())
    }

    /// LP maximising the common slack of all rows except `equal` (which are held tight).
    fn max_slack(&self, equal: &[usize]) -> Result<(Option<f64>, Option<Vector>)> {
        let n = self.dim;
        let mut obj = vec![0.0; n + 1];
        obj[n] = 1.0;
        let mut bounds = vec![FREE; n + 1];
        bounds[n] = (f64::NEG_INFINITY, 1.0);
        let mut lp = Lp::new(true, &obj, &bounds);
        for (i, h) in self.halfspaces.iter().enumerate() {
            let mut row: Vec<f64> = h.normal.iter().copied().collect();
            if equal.contains(&i) {
                row.push(0.0);
                lp.eq(&row, h.bound);
            } else {
                row.push(1.0);
                lp.le(&row, h.bound);
            }
        }
        match lp.solve() {
            Ok(Some((val, xs))) => Ok((Some(val), Some(Vector::from_iterator(n, xs.into_iter().take(n))))),
            Ok(None) => Ok((None, None)),
            Err(LpStatus::Unbounded) => Err(Error::Lp("slack LP unbounded".into())),
            Err(LpStatus::Failed) => Err(Error::Lp("slack LP failed".into())),
        }
    }

    /// Least-squares correction of `x` onto the affine hull of the equality rows.
    fn settle_on_equalities(&self, x: &Vector) -> Vector {
        if self.equalities.is_empty() {
            return x.clone();
        }
        let rows: Vec<&Vector> = self.eq_rows.iter().map(|i| &self.halfspaces[*i].normal).collect();
        let b: Vec<f64> = self.eq_rows.iter().map(|i| self.halfspaces[*i].bound).collect();
        project_affine(x, &rows, &b).unwrap_or_else(|| x.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn is_bounded(&self) -> bool {
        !self.empty && self.rays.is_empty() && self.lineality.is_empty()
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    /// Extreme rays (unit vectors) of the pointed part.
    pub fn rays(&self) -> &[Vector] {
        &self.rays
    }

    /// Orthonormal basis of the lineality space.
    pub fn lineality(&self) -> &[Vector] {
        &self.lineality
    }

    /// Orthonormal basis of the direction space of the affine hull.
    pub fn span_basis(&self) -> &[Vector] {
        &self.span_basis
    }

    pub fn interior_point(&self) -> Option<&Vector> {
        self.interior.as_ref()
    }

    pub fn affine_dim(&self) -> usize {
        if self.empty {
            0
        } else {
            self.span_basis.len()
        }
    }

    pub fn codim(&self) -> usize {
        self.dim - self.affine_dim()
    }

    pub fn equalities(&self) -> &[usize] {
        &self.equalities
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        !self.empty && self.halfspaces.iter().all(|h| h.normal.dot(x) <= h.bound + tol)
    }

    /// Indices of the rows tight at `x`.
    pub fn active_rows(&self, x: &Vector, tol: f64) -> Vec<usize> {
        (0..self.halfspaces.len())
            .filter(|i| self.halfspaces[*i].slack(x).abs() <= tol)
            .collect()
    }

    /// Directions of edges, extreme rays and lineality generators.
    pub fn edge_directions(&self) -> Vec<Vector> {
        let mut out = Vec::new();
        let k = self.affine_dim() - self.lineality.len();
        if k >= 1 {
            let ineq: Vec<usize> = (0..self.halfspaces.len()).filter(|i| !self.equalities.contains(i)).collect();
            for i in 0..self.vertices.len() {
                for j in i + 1..self.vertices.len() {
                    let a = &self.vertices[i];
                    let b = &self.vertices[j];
                    let common: Vec<&Vector> = ineq
                        .iter()
                        .filter(|r| {
                            let h = &self.halfspaces[**r];
                            h.slack(a).abs() <= 1e-7 && h.slack(b).abs() <= 1e-7
                        })
                        .map(|r| &self.halfspaces[*r].normal)
                        .collect();
                    // restrict to the reduced space: rank of normals projected to the span
                    let projected: Vec<Vector> = common.iter().map(|nv| project_onto(nv, &self.span_basis)).collect();
                    let refs: Vec<&Vector> = projected.iter().collect();
                    if crate::linalg::rank(&refs, 1e-9) >= k - 1 {
                        if let Some(u) = crate::linalg::unit(&(b - a)) {
                            out.push(u);
                        }
                    }
                }
            }
        }
        out.extend(self.rays.iter().cloned());
        out.extend(self.lineality.iter().cloned());
        out
    }

    /// Euclidean nearest point of the polyhedron to `x`.
    pub fn nearest_point(&self, x: &Vector) -> Result<Vector> {
        if self.empty {
            return Err(Error::InvalidPolytope("nearest point on an empty set".into()));
        }
        if self.contains(x, 0.0) {
            return Ok(x.clone());
        }
        let m = self.halfspaces.len();
        let eq = &self.eq_rows;
        let ineq: Vec<usize> = (0..m).filter(|i| !self.equalities.contains(i)).collect();
        // order inequality rows by violation, most violated first
        let mut order: Vec<usize> = ineq.clone();
        order.sort_by(|a, b| {
            let va = -self.halfspaces[*a].slack(x);
            let vb = -self.halfspaces[*b].slack(x);
            vb.partial_cmp(&va).unwrap()
        });
        let kmax = self.affine_dim().min(order.len());
        let mut best: Option<(f64, Vector)> = None;
        let tol = 1e-9;
        for size in 0..=kmax {
            let mut found: Option<Vector> = None;
            for_each_combination(order.len(), size, |sel| {
                let mut rows: Vec<&Vector> = eq.iter().map(|i| &self.halfspaces[*i].normal).collect();
                let mut rhs: Vec<f64> = eq.iter().map(|i| self.halfspaces[*i].bound).collect();
                for s in sel {
                    rows.push(&self.halfspaces[order[*s]].normal);
                    rhs.push(self.halfspaces[order[*s]].bound);
                }
                let Some((y, lambda)) = project_affine_with_multipliers(x, &rows, &rhs) else {
                    return true;
                };
                let feasible = self.halfspaces.iter().all(|h| h.normal.dot(&y) <= h.bound + tol * (1.0 + h.bound.abs()));
                if !feasible {
                    return true;
                }
                let d = (&y - x).norm();
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, y.clone()));
                }
                let kkt = lambda.iter().skip(eq.len()).all(|l| *l >= -1e-10);
                if kkt {
                    found = Some(y);
                    return false;
                }
                true
            });
            if let Some(y) = found {
                return Ok(y);
            }
        }
        best.map(|(_, y)| y).ok_or_else(|| Error::InvalidPolytope("nearest point search failed".into()))
    }

    /// Distance from `x` to the polyhedron.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((self.nearest_point(x)? - x).norm())
    }
}

/// Project `x` onto `{y : rows . y = rhs}`; `None` if rows are dependent.
pub fn project_affine(x: &Vector, rows: &[&Vector], rhs: &[f64]) -> Option<Vector> {
    project_affine_with_multipliers(x, rows, rhs).map(|(y, _)| y)
}

/// As [`project_affine`], also returning the multipliers `lambda` with `y = x - A^T lambda`.
fn project_affine_with_multipliers(x: &Vector, rows: &[&Vector], rhs: &[f64]) -> Option<(Vector, Vector)> {
    let k = rows.len();
    if k == 0 {
        return Some((x.clone(), Vector::zeros(0)));
    }
    let mut g = DMatrix::<f64>::zeros(k, k);
    let mut r = Vector::zeros(k);
    for i in 0..k {
        r[i] = rows[i].dot(x) - rhs[i];
        for j in 0..k {
            g[(i, j)] = rows[i].dot(rows[j]);
        }
    }
    if g.clone().determinant().abs() < 1e-12 {
        // dependent rows: fall back to a rank-revealing reduction
        let owned: Vec<Vector> = rows.iter().map(|v| (*v).clone()).collect();
        if orthonormal_basis(&owned, 1e-9).len() < k {
            return None;
        }
    }
    let lambda = crate::linalg::solve(&g, &r)?;
    let mut y = x.clone();
    for i in 0..k {
        y -= rows[i] * lambda[i];
    }
    Some((y, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn hs(n: &[f64], b: f64) -> Halfspace {
        Halfspace::new(vector(n), b)
    }

    #[test]
    fn square_vertices() {
        let p = HPolytope::new(
            2,
            vec![hs(&[1.0, 0.0], 1.0), hs(&[-1.0, 0.0], 0.0), hs(&[0.0, 1.0], 1.0), hs(&[0.0, -1.0], 0.0)],
        )
        .unwrap();
        assert!(p.is_bounded());
        assert_eq!(p.vertices().len(), 4);
        assert_eq!(p.affine_dim(), 2);
        let y = p.nearest_point(&vector(&[2.0, 3.0])).unwrap();
        assert!((y - vector(&[1.0, 1.0])).norm() < 1e-12);
        let y = p.nearest_point(&vector(&[0.5, -2.0])).unwrap();
        assert!((y - vector(&[0.5, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn halfspace_is_unbounded() {
        let p = HPolytope::new(2, vec![hs(&[0.0, 1.0], 0.0)]).unwrap();
        assert!(!p.is_bounded());
        assert_eq!(p.lineality().len(), 1);
        assert_eq!(p.rays().len(), 1);
    }

    #[test]
    fn empty_detected() {
        let p = HPolytope::new(1, vec![hs(&[1.0], -1.0), hs(&[-1.0], -1.0)]).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn slab_collapse_to_line() {
        let p = HPolytope::new(2, vec![hs(&[0.0, 1.0], 0.0), hs(&[0.0, -1.0], 0.0)]).unwrap();
        assert_eq!(p.affine_dim(), 1);
        assert_eq!(p.codim(), 1);
        let y = p.nearest_point(&vector(&[3.0, 2.0])).unwrap();
        assert!((y - vector(&[3.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn triangle_collapse_to_point() {
        let g: Vec<Vector> = (0..3)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                vector(&[a.cos(), a.sin()])
            })
            .collect();
        let p = HPolytope::new(2, g.iter().map(|v| Halfspace::new(v.clone(), 0.0)).collect()).unwrap();
        assert_eq!(p.affine_dim(), 0);
        assert_eq!(p.vertices().len(), 1);
        assert!(p.vertices()[0].norm() < 1e-9);
    }
}
