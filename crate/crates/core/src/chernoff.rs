//! Min-max divergence ("equidistant point") solvers.
//!
//! For two distributions `p0, p1` the value
//! `min_V max{D(V||p0), D(V||p1)}` equals `max_{l in [0,1]} g(l)` with
//! `g(l) = -ln sum_y p0(y)^l p1(y)^(1-l)`, the sum running over the common
//! support. The minimizing `V` is the tilted distribution at the maximizer.
//! The conditional version over channels separates row by row and shares a
//! single `l`.

use crate::error::{Error, Result};
use crate::prob::{Channel, Dist};

pub const DEFAULT_CHERNOFF_TOL: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, PartialEq)]
pub struct ChernoffResult {
    pub value: f64,
    pub lambda_star: f64,
    /// The minimizing `V`; `None` when the supports are disjoint.
    pub equalizer: Option<Dist>,
    /// `D(V || p0)`.
    pub d_left: f64,
    /// `D(V || p1)`.
    pub d_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondChernoffResult {
    pub value: f64,
    pub lambda_star: f64,
    /// Per-input rows of the minimizing channel `W`; `None` when some used
    /// input has an output support disjoint from the noise.
    pub equalizer: Option<Vec<Dist>>,
    /// `D(W || Q | p)`.
    pub d_left: f64,
    /// `D(W || Q_star | p)`.
    pub d_right: f64,
}

/// Log-probabilities of a pair restricted to their common support.
#[derive(Debug, Clone)]
pub(crate) struct TiltFamily {
    len: usize,
    idx: Vec<usize>,
    ln0: Vec<f64>,
    ln1: Vec<f64>,
}

impl TiltFamily {
    pub(crate) fn new(p0: &[f64], p1: &[f64]) -> Self {
        let mut idx = Vec::new();
        let mut ln0 = Vec::new();
        let mut ln1 = Vec::new();
        for (y, (&a, &b)) in p0.iter().zip(p1).enumerate() {
            if a > 0.0 && b > 0.0 {
                idx.push(y);
                ln0.push(a.ln());
                ln1.push(b.ln());
            }
        }
        Self {
            len: p0.len(),
            idx,
            ln0,
            ln1,
        }
    }

    pub(crate) fn disjoint(&self) -> bool {
        self.idx.is_empty()
    }

    fn exponents(&self, lambda: f64) -> impl Iterator<Item = f64> + '_ {
        self.ln0
            .iter()
            .zip(&self.ln1)
            .map(move |(a, b)| lambda * a + (1.0 - lambda) * b)
    }

    /// `g(l) = -ln sum exp(l ln p0 + (1-l) ln p1)`.
    pub(crate) fn g(&self, lambda: f64) -> f64 {
        let m = self.exponents(lambda).fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self.exponents(lambda).map(|e| (e - m).exp()).sum();
        -(m + s.ln())
    }

    /// Tilted weights `V_l` on the common support and the divergences
    /// `(D(V||p0), D(V||p1))`.
    fn tilt(&self, lambda: f64) -> (Vec<f64>, f64, f64) {
        let m = self.exponents(lambda).fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self.exponents(lambda).map(|e| (e - m).exp()).collect();
        let z: f64 = w.iter().sum();
        let ln_z = z.ln() + m;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        let mut v = vec![0.0; self.len];
        for (k, wk) in w.iter().enumerate() {
            let vk = wk / z;
            if vk > 0.0 {
                let ln_v = lambda * self.ln0[k] + (1.0 - lambda) * self.ln1[k] - ln_z;
                d0 += vk * (ln_v - self.ln0[k]);
                d1 += vk * (ln_v - self.ln1[k]);
            }
            v[self.idx[k]] = vk;
        }
        (v, d0.max(0.0), d1.max(0.0))
    }

    /// `g'(l) = D(V_l||p0) - D(V_l||p1) = E_V[ln p1 - ln p0]`.
    fn slope(&self, lambda: f64) -> f64 {
        let m = self.exponents(lambda).fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut acc = 0.0;
        for (k, e) in self.exponents(lambda).enumerate() {
            let w = (e - m).exp();
            z += w;
            acc += w * (self.ln1[k] - self.ln0[k]);
        }
        acc / z
    }
}

/// Maximizes a concave function on `[0,1]` by golden-section search down to
/// a bracket of width `tol`, then checks both endpoints. Returns
/// `(argmax, max, bracket)`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, tol: f64) -> (f64, f64, (f64, f64)) {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (mut best_x, mut best_f) = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [0.0, 1.0] {
        let fx = f(x);
        if fx > best_f {
            best_x = x;
            best_f = fx;
        }
    }
    (best_x, best_f, (a, b))
}

/// Bisection on the sign of a decreasing slope inside `[lo, hi]`. Golden
/// section cannot resolve the maximizer much below `sqrt(eps)`; the slope
/// can. Returns `None` if the slope does not change sign in the interval.
fn slope_root(slope: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
    let (mut lo, mut hi) = (lo.max(0.0), hi.min(1.0));
    let (s_lo, s_hi) = (slope(lo), slope(hi));
    if !(s_lo >= 0.0 && s_hi <= 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Finds the maximizer of a smooth concave `g` with known slope.
fn maximize(g: impl Fn(f64) -> f64, slope: impl Fn(f64) -> f64, tol: f64) -> (f64, f64) {
    let (x, fx, (a, b)) = golden_max(&g, tol);
    if x == 0.0 || x == 1.0 {
        return (x, fx);
    }
    let w = (b - a).max(1e-6);
    let polished = slope_root(&slope, a - w, b + w).or_else(|| slope_root(&slope, 0.0, 1.0));
    match polished {
        Some(p) => {
            let fp = g(p);
            if fp >= fx {
                (p, fp)
            } else {
                (x, fx)
            }
        }
        None => (x, fx),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance {tol} must lie in (0, 1)")))
    }
}

/// Normalized `p0^l p1^(1-l)` over the common support.
pub fn tilted_dist(p0: &Dist, p1: &Dist, lambda: f64) -> Result<Dist> {
    if p0.len() != p1.len() {
        return Err(Error::SizeMismatch {
            expected: p0.len(),
            got: p1.len(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} outside [0,1]")));
    }
    let fam = TiltFamily::new(p0.probs(), p1.probs());
    if fam.disjoint() {
        return Err(Error::InvalidArgument("supports do not intersect".into()));
    }
    // the endpoints are returned verbatim when the supports agree
    if lambda == 1.0 && fam.idx.len() == p0.support().count() {
        return Ok(p0.clone());
    }
    if lambda == 0.0 && fam.idx.len() == p1.support().count() {
        return Ok(p1.clone());
    }
    Ok(Dist::from_weights(fam.tilt(lambda).0))
}

/// `min_V max{D(V||p0), D(V||p1)}`.
pub fn chernoff_info(p0: &Dist, p1: &Dist, tol: f64) -> Result<ChernoffResult> {
    check_tol(tol)?;
    if p0.len() != p1.len() {
        return Err(Error::SizeMismatch {
            expected: p0.len(),
            got: p1.len(),
        });
    }
    let fam = TiltFamily::new(p0.probs(), p1.probs());
    Ok(solve_pair(&fam, tol))
}

pub(crate) fn solve_pair(fam: &TiltFamily, tol: f64) -> ChernoffResult {
    if fam.disjoint() {
        return ChernoffResult {
            value: f64::INFINITY,
            lambda_star: 0.5,
            equalizer: None,
            d_left: f64::INFINITY,
            d_right: f64::INFINITY,
        };
    }
    let (lambda, value) = maximize(|l| fam.g(l), |l| fam.slope(l), tol);
    let (v, d_left, d_right) = fam.tilt(lambda);
    ChernoffResult {
        value: value.max(0.0),
        lambda_star: lambda,
        equalizer: Some(Dist::from_weights(v)),
        d_left,
        d_right,
    }
}

/// Value-only Chernoff information, used inside grid searches.
pub(crate) fn chernoff_value(p0: &[f64], p1: &[f64], tol: f64) -> f64 {
    let fam = TiltFamily::new(p0, p1);
    if fam.disjoint() {
        return f64::INFINITY;
    }
    maximize(|l| fam.g(l), |l| fam.slope(l), tol).1.max(0.0)
}

/// Pre-processed channel for repeated conditional Chernoff evaluations.
#[derive(Debug, Clone)]
pub struct CondChernoff {
    rows: Vec<TiltFamily>,
}

impl CondChernoff {
    pub fn new(q: &Channel) -> Self {
        let noise = q.noise().probs();
        Self {
            rows: q
                .rows()
                .iter()
                .map(|r| TiltFamily::new(r.probs(), noise))
                .collect(),
        }
    }

    fn active<'a>(&'a self, p: &'a [f64]) -> impl Iterator<Item = (f64, &'a TiltFamily)> + 'a {
        p.iter()
            .zip(&self.rows)
            .filter(|(px, _)| **px > 0.0)
            .map(|(px, f)| (*px, f))
    }

    fn infinite(&self, p: &[f64]) -> bool {
        self.active(p).any(|(_, f)| f.disjoint())
    }

    /// `max_l sum_x p(x) g_x(l)`.
    pub fn value(&self, p: &[f64], tol: f64) -> f64 {
        if self.infinite(p) {
            return f64::INFINITY;
        }
        let g = |l: f64| self.active(p).map(|(px, f)| px * f.g(l)).sum::<f64>();
        let s = |l: f64| self.active(p).map(|(px, f)| px * f.slope(l)).sum::<f64>();
        maximize(g, s, tol).1.max(0.0)
    }

    pub fn solve(&self, p: &[f64], tol: f64) -> CondChernoffResult {
        if self.infinite(p) {
            return CondChernoffResult {
                value: f64::INFINITY,
                lambda_star: 0.5,
                equalizer: None,
                d_left: f64::INFINITY,
                d_right: f64::INFINITY,
            };
        }
        let g = |l: f64| self.active(p).map(|(px, f)| px * f.g(l)).sum::<f64>();
        let s = |l: f64| self.active(p).map(|(px, f)| px * f.slope(l)).sum::<f64>();
        let (lambda, value) = maximize(g, s, tol);
        let mut rows = Vec::with_capacity(self.rows.len());
        let (mut d_left, mut d_right) = (0.0, 0.0);
        for (px, fam) in p.iter().zip(&self.rows) {
            if fam.disjoint() {
                // unused input (px == 0): any row will do
                let mut w = vec![0.0; fam.len];
                w[0] = 1.0;
                rows.push(Dist::from_weights(w));
                continue;
            }
            let (v, d0, d1) = fam.tilt(lambda);
            d_left += px * d0;
            d_right += px * d1;
            rows.push(Dist::from_weights(v));
        }
        CondChernoffResult {
            value: value.max(0.0),
            lambda_star: lambda,
            equalizer: Some(rows),
            d_left,
            d_right,
        }
    }
}

/// `min_W max{D(W||Q|p), D(W||Q_star|p)}` with `Q_star` the noise row.
pub fn cond_chernoff(q: &Channel, p: &Dist, tol: f64) -> Result<CondChernoffResult> {
    check_tol(tol)?;
    if p.len() != q.inputs() {
        return Err(Error::SizeMismatch {
            expected: q.inputs(),
            got: p.len(),
        });
    }
    Ok(CondChernoff::new(q).solve(p.probs(), tol))
}
