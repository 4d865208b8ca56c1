//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;

/// Decision tolerance for geometric predicates.
pub const TOL: f64 = 1e-9;
/// Tolerance used when deduplicating vectors.
pub const DEDUP_TOL: f64 = 1e-12;
/// Tolerance for agreement of H- and V-representations.
pub const REP_TOL: f64 = 1e-7;
/// Global tolerance for "on the surface" checks.
pub const SURFACE_TOL: f64 = 1e-6;

pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

pub fn zeros(n: usize) -> Vector {
    Vector::zeros(n)
}

pub fn basis_vector(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

pub fn dist(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm()
}

/// Unit vector in the direction of `v`, or `None` when `v` is (numerically) zero.
pub fn unit(v: &Vector) -> Option<Vector> {
    let n = v.norm();
    if n <= 1e-14 {
        None
    } else {
        Some(v / n)
    }
}

/// Angle between two nonzero vectors, in [0, pi].
pub fn angle(a: &Vector, b: &Vector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Orthonormal basis of the span of `vectors` (modified Gram-Schmidt, two passes).
pub fn orthonormal_basis(vectors: &[Vector], tol: f64) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = w.dot(b);
                w -= b * c;
            }
        }
        let n = w.norm();
        if n > tol * scale.max(1.0) {
            basis.push(w / n);
        }
    }
    basis
}

/// Orthonormal basis of the orthogonal complement of span(`basis`) in R^n.
/// `basis` must already be orthonormal.
pub fn complement_basis(basis: &[Vector], n: usize) -> Vec<Vector> {
    let mut all: Vec<Vector> = basis.to_vec();
    let k = all.len();
    let mut out = Vec::new();
    for i in 0..n {
        let e = basis_vector(n, i);
        let extended = orthonormal_basis(&[all.clone(), vec![e]].concat(), 1e-8);
        if extended.len() > all.len() {
            let new = extended.last().unwrap().clone();
            out.push(new.clone());
            all.push(new);
        }
        if all.len() == n {
            break;
        }
    }
    debug_assert_eq!(out.len(), n - k);
    out
}

/// Orthogonal projection of `v` onto span(`basis`), `basis` orthonormal.
pub fn project_onto(v: &Vector, basis: &[Vector]) -> Vector {
    let mut p = Vector::zeros(v.len());
    for b in basis {
        p += b * v.dot(b);
    }
    p
}

/// Spherical interpolation between unit vectors `a` and `b`.
/// Falls back to a chord-normalised interpolation when they are nearly equal.
pub fn slerp(a: &Vector, b: &Vector, s: f64) -> Vector {
    let c = a.dot(b).clamp(-1.0, 1.0);
    let omega = c.acos();
    if omega < 1e-9 {
        let v = a * (1.0 - s) + b * s;
        return unit(&v).unwrap_or_else(|| a.clone());
    }
    let so = omega.sin();
    if so < 1e-12 {
        // antipodal; caller is expected to avoid this
        let v = a * (1.0 - s) + b * s;
        return unit(&v).unwrap_or_else(|| a.clone());
    }
    (a * ((1.0 - s) * omega).sin() + b * (s * omega).sin()) / so
}

/// Point at angle `phi` on the great circle through unit `a` heading towards the
/// unit vector `via` (orthogonal to `a`).
pub fn arc_point(a: &Vector, via: &Vector, phi: f64) -> Vector {
    a * phi.cos() + via * phi.sin()
}

/// Solve the square system `m x = rhs`; `None` if singular.
pub fn solve(m: &DMatrix<f64>, rhs: &Vector) -> Option<Vector> {
    let lu = m.clone().lu();
    let x = lu.solve(rhs)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Matrix whose rows are the given vectors.
pub fn rows_matrix(rows: &[&Vector], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..n {
            m[(i, j)] = r[j];
        }
    }
    m
}

/// Numerical rank of a set of vectors.
pub fn rank(vectors: &[&Vector], tol: f64) -> usize {
    let owned: Vec<Vector> = vectors.iter().map(|v| (*v).clone()).collect();
    orthonormal_basis(&owned, tol).len()
}

/// Round to a fixed 12-digit decimal string (used by all text exports).
pub fn fmt12(x: f64) -> String {
    let s = format!("{:.12}", x);
    if s == "-0.000000000000" {
        "0.000000000000".to_string()
    } else {
        s
    }
}

pub fn fmt_vec(v: &Vector) -> String {
    v.iter().map(|x| fmt12(*x)).collect::<Vec<_>>().join(" ")
}

/// Deduplicate vectors with an absolute tolerance, keeping first occurrences.
pub fn dedup_vectors(vs: Vec<Vector>, tol: f64) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vs {
        if !out.iter().any(|u| (u - &v).amax() <= tol) {
            out.push(v);
        }
    }
    out
}

/// Combinations of `k` indices out of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    'outer: loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                continue 'outer;
            }
        }
        return;
    }
}
