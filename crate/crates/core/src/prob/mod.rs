//! Finite-alphabet probability primitives.
//!
//! All information measures are in nats. Infinite divergences are reported
//! as `f64::INFINITY`; they are never the result of overflow.

mod capacity;
mod types;

pub use capacity::{blahut_arimoto, Capacity, DEFAULT_BA_TOL, MAX_BA_ITERATIONS};
pub use types::{
    empirical_type, enumerate_types, enumerate_types_capped, joint_type, type_class_log_prob,
    EmpiricalType, JointType, DEFAULT_TYPE_CAP,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest deviation of a raw probability vector's sum from one that is
/// silently renormalized away.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// A probability vector over the alphabet `0..len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Dist {
    probs: Vec<f64>,
}

impl Dist {
    /// Validates and renormalizes `probs`.
    ///
    /// Entries must be finite and non-negative and must sum to one within
    /// [`SUM_TOLERANCE`]; the remaining float dust is divided out.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDist("empty probability vector".into()));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDist(format!("entry {i} is {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDist(format!("entries sum to {sum}")));
        }
        let probs = probs.into_iter().map(|p| p / sum).collect();
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Self {
        assert!(len > 0, "uniform distribution over an empty alphabet");
        Self {
            probs: vec![1.0 / len as f64; len],
        }
    }

    pub fn point_mass(len: usize, index: usize) -> Self {
        assert!(index < len, "point mass index {index} out of range {len}");
        let mut probs = vec![0.0; len];
        probs[index] = 1.0;
        Self { probs }
    }

    /// Builds a distribution from non-negative weights, normalizing by their
    /// sum. Used where the weights are known to be valid by construction.
    pub(crate) fn from_weights(weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        debug_assert!(sum > 0.0 && sum.is_finite());
        Self {
            probs: weights.into_iter().map(|w| w / sum).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(i, _)| i)
    }

    pub fn l1_distance(&self, other: &Dist) -> Result<f64> {
        same_len(self.len(), other.len())?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }

    /// Entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }
}

impl TryFrom<Vec<f64>> for Dist {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Dist::new(value)
    }
}

impl From<Dist> for Vec<f64> {
    fn from(d: Dist) -> Self {
        d.probs
    }
}

impl AsRef<[f64]> for Dist {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// A discrete memoryless channel `Q(y|x)` with a designated no-input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: Vec<Dist>,
    outputs: usize,
    star: usize,
}

impl Channel {
    /// Builds a channel from raw rows. Every row must be a valid distribution
    /// over the same output alphabet, `star` must index a row, and every
    /// output must be reachable from some input.
    pub fn new(rows: Vec<Vec<f64>>, star: usize) -> Result<Self> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(row, r)| {
                Dist::new(r).map_err(|e| Error::InvalidChannelRow {
                    row,
                    reason: match e {
                        Error::InvalidDist(s) => s,
                        other => other.to_string(),
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows, star)
    }

    pub fn from_rows(rows: Vec<Dist>, star: usize) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidChannel("no input rows".into()));
        };
        let outputs = first.len();
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != outputs) {
            return Err(Error::InvalidChannelRow {
                row,
                reason: format!("has {} outputs, expected {outputs}", r.len()),
            });
        }
        if star >= rows.len() {
            return Err(Error::InvalidChannel(format!(
                "no-input symbol {star} is not an input (|X| = {})",
                rows.len()
            )));
        }
        if let Some(y) = (0..outputs).find(|&y| rows.iter().all(|r| r.get(y) == 0.0)) {
            return Err(Error::InvalidChannel(format!(
                "output {y} cannot be produced by any input"
            )));
        }
        Ok(Self { rows, outputs, star })
    }

    /// Binary symmetric channel with crossover `eps`, no-input symbol 0.
    pub fn bsc(eps: f64, star: usize) -> Result<Self> {
        Self::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]], star)
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn star(&self) -> usize {
        self.star
    }

    pub fn rows(&self) -> &[Dist] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &Dist {
        &self.rows[x]
    }

    /// The noise distribution `Q(.|star)`.
    pub fn noise(&self) -> &Dist {
        &self.rows[self.star]
    }

    /// Rows of the constant channel that always outputs noise. Not a
    /// [`Channel`] because noise alone need not reach every output.
    pub fn noise_rows(&self) -> Vec<Dist> {
        vec![self.noise().clone(); self.inputs()]
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x].get(y)
    }
}

fn same_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected, got })
    }
}

/// `sum p ln(p/q)` on raw slices of equal length.
pub(crate) fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).ln();
        }
    }
    // round-off can leave tiny negatives for p ~ q
    d.max(0.0)
}

/// Kullback-Leibler divergence `D(p || q)` in nats.
pub fn kl(p: &Dist, q: &Dist) -> Result<f64> {
    same_len(p.len(), q.len())?;
    Ok(kl_slices(p.probs(), q.probs()))
}

/// Conditional divergence `sum_x p(x) D(w1(.|x) || w2(.|x))`.
pub fn cond_kl(w1: &[Dist], w2: &[Dist], p: &Dist) -> Result<f64> {
    same_len(p.len(), w1.len())?;
    same_len(p.len(), w2.len())?;
    let mut total = 0.0;
    for ((px, r1), r2) in p.probs().iter().zip(w1).zip(w2) {
        same_len(r1.len(), r2.len())?;
        if *px > 0.0 {
            let d = kl_slices(r1.probs(), r2.probs());
            if d.is_infinite() {
                return Ok(f64::INFINITY);
            }
            total += px * d;
        }
    }
    Ok(total)
}

/// Output marginal `(pQ)_Y`.
pub fn output_dist(p: &Dist, q: &Channel) -> Result<Dist> {
    same_len(q.inputs(), p.len())?;
    Ok(Dist {
        probs: output_probs(p.probs(), q),
    })
}

pub(crate) fn output_probs(p: &[f64], q: &Channel) -> Vec<f64> {
    let mut out = vec![0.0; q.outputs()];
    for (px, row) in p.iter().zip(q.rows()) {
        if *px > 0.0 {
            for (o, w) in out.iter_mut().zip(row.probs()) {
                *o += px * w;
            }
        }
    }
    out
}

/// Mutual information `I(pQ)` in nats.
pub fn mutual_info(p: &Dist, q: &Channel) -> Result<f64> {
    same_len(q.inputs(), p.len())?;
    Ok(mutual_info_slice(p.probs(), q))
}

pub(crate) fn mutual_info_slice(p: &[f64], q: &Channel) -> f64 {
    let out = output_probs(p, q);
    let mut total = 0.0;
    for (px, row) in p.iter().zip(q.rows()) {
        if *px > 0.0 {
            // out(y) >= px * Q(y|x) > 0 wherever the row is positive
            total += px * kl_slices(row.probs(), &out);
        }
    }
    total.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> Dist {
        Dist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn dist_renormalizes_dust_and_rejects_garbage() {
        let p = d(&[0.5 + 1e-9, 0.5]);
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Dist::new(vec![0.5, 0.4]).is_err());
        assert!(Dist::new(vec![1.1, -0.1]).is_err());
        assert!(Dist::new(vec![]).is_err());
        assert!(Dist::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl(&d(&[0.5, 0.5]), &d(&[0.5, 0.5])).unwrap(), 0.0);
        let v = kl(&d(&[0.9, 0.1]), &d(&[0.1, 0.9])).unwrap();
        assert!((v - 0.8 * 9f64.ln()).abs() < 1e-12);
        assert!((v - 1.757780).abs() < 1e-6);
        assert_eq!(kl(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), f64::INFINITY);
        assert!(matches!(
            kl(&d(&[1.0]), &d(&[0.5, 0.5])),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn cond_kl_examples() {
        let q = Channel::bsc(0.1, 0).unwrap();
        let p = d(&[0.3, 0.7]);
        assert_eq!(cond_kl(q.rows(), q.rows(), &p).unwrap(), 0.0);
        let noise = q.noise_rows();
        let point = Dist::point_mass(2, 1);
        let v = cond_kl(&noise, q.rows(), &point).unwrap();
        assert!((v - 0.8 * 9f64.ln()).abs() < 1e-12);
        assert!(cond_kl(q.rows(), q.rows(), &d(&[1.0])).is_err());
    }

    #[test]
    fn output_dist_examples() {
        let q = Channel::bsc(0.1, 0).unwrap();
        assert_eq!(output_dist(&Dist::point_mass(2, 0), &q).unwrap(), *q.noise());
        let o = output_dist(&d(&[0.3, 0.7]), &q).unwrap();
        assert!((o.get(0) - 0.34).abs() < 1e-12 && (o.get(1) - 0.66).abs() < 1e-12);
        let u = output_dist(&Dist::uniform(2), &q).unwrap();
        assert!((u.get(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mutual_info_examples() {
        let q = Channel::bsc(0.1, 0).unwrap();
        let hb = -(0.1f64 * 0.1f64.ln() + 0.9 * 0.9f64.ln());
        let i = mutual_info(&Dist::uniform(2), &q).unwrap();
        assert!((i - (2f64.ln() - hb)).abs() < 1e-12);
        assert!((i - 0.368).abs() < 1e-3);

        let flat = Channel::new(vec![vec![0.3, 0.7]; 3], 0).unwrap();
        assert!(mutual_info(&d(&[0.2, 0.3, 0.5]), &flat).unwrap() < 1e-15);

        // defining double sum, written out
        let p: [f64; 2] = [0.3, 0.7];
        let w: [[f64; 2]; 2] = [[0.9, 0.1], [0.1, 0.9]];
        let py = [0.3 * 0.9 + 0.7 * 0.1, 0.3 * 0.1 + 0.7 * 0.9];
        let mut direct = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                direct += p[x] * w[x][y] * (w[x][y] / py[y]).ln();
            }
        }
        assert!((mutual_info(&d(&p), &q).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn channel_validation() {
        let e = Channel::new(vec![vec![0.9, 0.1], vec![0.5, 0.4]], 0).unwrap_err();
        assert!(matches!(e, Error::InvalidChannelRow { row: 1, .. }));
        assert!(Channel::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]], 0).is_err());
        assert!(Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 2).is_err());
        assert!(Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0, 0.0]], 0).is_err());
    }
}
