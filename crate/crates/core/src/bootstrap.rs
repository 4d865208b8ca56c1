//! Mixed-brick area bounds and the exponent recurrence `eps -> eps - eps^2 / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Area bound `k1 l^3 / lam^2 + k2 l^2 / lam^p` from a census with `k1 l^3` flat bricks and
/// `k2 l^2` bricks filled at exponent `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrickBound {
    pub k1: f64,
    pub k2: f64,
    pub p: f64,
}

impl BrickBound {
    pub fn new(k1: f64, k2: f64, p: f64) -> Result<BrickBound> {
        if !(k1 > 0.0 && k1.is_finite()) || !(k2 > 0.0 && k2.is_finite()) {
            return Err(Error::OutOfRange(format!("coefficients must be positive, got k1 = {k1}, k2 = {k2}")));
        }
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::OutOfRange(format!("exponent p = {p} must be at least 2")));
        }
        Ok(BrickBound { k1, k2, p })
    }

    /// The two terms separately.
    pub fn terms(&self, l: f64, lam: f64) -> (f64, f64) {
        (self.k1 * l.powi(3) / (lam * lam), self.k2 * l * l / lam.powf(self.p))
    }
}

pub fn mixed_area_bound(b: &BrickBound, l: f64, lam: f64) -> Result<f64> {
    if !(l > 0.0) || !(lam > 0.0) {
        return Err(Error::OutOfRange(format!("need l > 0 and lam > 0, got l = {l}, lam = {lam}")));
    }
    let (a, c) = b.terms(l, lam);
    Ok(a + c)
}

/// Improvement of the excess exponent: filling order `2 + eps` gives `2 + eps - eps^2 / 2`.
pub fn exponent_step(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(format!("eps = {eps} is outside [0, 1]")));
    }
    Ok(eps - eps * eps / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    /// `eps0, step(eps0), ...` up to the first value at most the tolerance.
    pub sequence: Vec<f64>,
    pub steps: usize,
}

/// Iterate [`exponent_step`] from `eps0` until the excess is at most `tol`.
pub fn bootstrap(eps0: f64, tol: f64) -> Result<Bootstrap> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange(format!("tolerance {tol} must be positive")));
    }
    if eps0 == 0.0 {
        return Ok(Bootstrap { sequence: Vec::new(), steps: 0 });
    }
    if !(eps0 > 0.0 && eps0 <= 1.0) {
        return Err(Error::OutOfRange(format!("eps0 = {eps0} is outside (0, 1]")));
    }
    let mut sequence = vec![eps0];
    let mut e = eps0;
    while e > tol {
        e = exponent_step(e)?;
        sequence.push(e);
    }
    let steps = sequence.len() - 1;
    Ok(Bootstrap { sequence, steps })
}

/// The two bound terms at `lam = l / m` and `l = m^(eps / 2)` with `p = 2 + eps`.
pub fn balanced_terms(k1: f64, k2: f64, eps: f64, m: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&eps) || !(m > 1.0) {
        return Err(Error::OutOfRange(format!("need eps in [0, 1] and M > 1, got eps = {eps}, M = {m}")));
    }
    let b = BrickBound::new(k1, k2, 2.0 + eps)?;
    let l = m.powf(eps / 2.0);
    Ok(b.terms(l, l / m))
}

/// `max / min` of the term ratio over the given `M` values.
pub fn term_balance_spread(k1: f64, k2: f64, eps: f64, ms: &[f64]) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &m in ms {
        let (a, b) = balanced_terms(k1, k2, eps, m)?;
        let r = a / b;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if ms.is_empty() {
        return Err(Error::OutOfRange("no M values".into()));
    }
    Ok(hi / lo)
}
