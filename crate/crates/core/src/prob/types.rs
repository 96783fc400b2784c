//! Empirical types and type-class probabilities.

use super::{kl_slices, Dist};
use crate::error::{Error, Result};

/// Default cap on the number of types [`enumerate_types`] will materialize.
pub const DEFAULT_TYPE_CAP: usize = 1 << 24;

/// Integer-count type of a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EmpiricalType {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalType {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidArgument("type over an empty alphabet".into()));
        }
        let n = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidArgument("type of an empty sequence".into()));
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// `counts / n`; each entry is a single correctly rounded division.
    pub fn as_dist(&self) -> Dist {
        let n = self.n as f64;
        Dist {
            probs: self.counts.iter().map(|&c| c as f64 / n).collect(),
        }
    }
}

/// Joint type of a pair of equal-length sequences, stored row-major by `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointType {
    counts: Vec<u64>,
    x_size: usize,
    y_size: usize,
    n: u64,
}

impl JointType {
    pub fn count(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.y_size + y]
    }

    /// Count matrix as nested rows.
    pub fn matrix(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.y_size).map(<[u64]>::to_vec).collect()
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x_marginal(&self) -> EmpiricalType {
        let counts = self.counts.chunks(self.y_size).map(|r| r.iter().sum()).collect();
        EmpiricalType { counts, n: self.n }
    }

    pub fn y_marginal(&self) -> EmpiricalType {
        let mut counts = vec![0; self.y_size];
        for row in self.counts.chunks(self.y_size) {
            for (c, v) in counts.iter_mut().zip(row) {
                *c += v;
            }
        }
        EmpiricalType { counts, n: self.n }
    }

    /// Conditional type `N(x,y)/N(x)`; `None` for rows that never occur.
    pub fn conditional(&self) -> Vec<Option<Dist>> {
        self.counts
            .chunks(self.y_size)
            .map(|row| {
                let nx: u64 = row.iter().sum();
                (nx > 0).then(|| Dist {
                    probs: row.iter().map(|&c| c as f64 / nx as f64).collect(),
                })
            })
            .collect()
    }

    pub fn as_joint_probs(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn sizes(&self) -> (usize, usize) {
        (self.x_size, self.y_size)
    }
}

pub fn empirical_type(seq: &[usize], alphabet_size: usize) -> Result<EmpiricalType> {
    if seq.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let mut counts = vec![0u64; alphabet_size];
    for &s in seq {
        *counts
            .get_mut(s)
            .ok_or_else(|| Error::InvalidArgument(format!("symbol {s} outside alphabet")))? += 1;
    }
    EmpiricalType::new(counts)
}

pub fn joint_type(xs: &[usize], ys: &[usize], x_size: usize, y_size: usize) -> Result<JointType> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let mut counts = vec![0u64; x_size * y_size];
    for (&x, &y) in xs.iter().zip(ys) {
        if x >= x_size || y >= y_size {
            return Err(Error::InvalidArgument(format!("pair ({x},{y}) outside alphabet")));
        }
        counts[x * y_size + y] += 1;
    }
    Ok(JointType {
        counts,
        x_size,
        y_size,
        n: xs.len() as u64,
    })
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All types of length `n` over an alphabet of size `alphabet_size`, in
/// lexicographically decreasing order of counts.
pub fn enumerate_types(alphabet_size: usize, n: u64) -> Result<Vec<EmpiricalType>> {
    enumerate_types_capped(alphabet_size, n, DEFAULT_TYPE_CAP)
}

pub fn enumerate_types_capped(alphabet_size: usize, n: u64, cap: usize) -> Result<Vec<EmpiricalType>> {
    if alphabet_size == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "type enumeration needs n >= 1 and a non-empty alphabet".into(),
        ));
    }
    let count = binomial(n + alphabet_size as u64 - 1, alphabet_size as u64 - 1);
    if count > cap as u128 {
        return Err(Error::TooManyTypes { count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut counts = vec![0u64; alphabet_size];
    compositions(&mut counts, 0, n, &mut out);
    Ok(out)
}

fn compositions(counts: &mut Vec<u64>, pos: usize, remaining: u64, out: &mut Vec<EmpiricalType>) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        let n = counts.iter().sum();
        out.push(EmpiricalType {
            counts: counts.clone(),
            n,
        });
        return;
    }
    for c in (0..=remaining).rev() {
        counts[pos] = c;
        compositions(counts, pos + 1, remaining - c, out);
    }
}

fn ln_factorial(k: u64) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// `ln P(X^n in T_t)` for `X^n` i.i.d. from `source`.
///
/// Evaluated as `-n D(t || source) + (ln multinomial(t) - n H(t))`. The
/// bracketed term is never positive, so the result never exceeds
/// `-n D(t || source)`. Returns `-inf` if the type puts mass on a symbol the
/// source cannot emit.
pub fn type_class_log_prob(source: &Dist, t: &EmpiricalType) -> Result<f64> {
    if source.len() != t.alphabet_size() {
        return Err(Error::SizeMismatch {
            expected: source.len(),
            got: t.alphabet_size(),
        });
    }
    let n = t.len();
    let tp = t.as_dist();
    let d = kl_slices(tp.probs(), source.probs());
    if d.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let nf = n as f64;
    let ln_multinomial =
        ln_factorial(n) - t.counts().iter().map(|&c| ln_factorial(c)).sum::<f64>();
    let n_neg_entropy: f64 = t
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64 / nf).ln())
        .sum();
    // multinomial(t) <= exp(n H(t))
    let correction = (ln_multinomial + n_neg_entropy).min(0.0);
    Ok(-nf * d + correction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_and_joint_examples() {
        assert_eq!(empirical_type(&[0, 1, 1, 0], 2).unwrap().counts(), &[2, 2]);
        let single = empirical_type(&[1], 3).unwrap();
        assert_eq!(single.as_dist(), Dist::point_mass(3, 1));
        let j = joint_type(&[0, 0], &[1, 0], 2, 2).unwrap();
        assert_eq!(j.matrix(), vec![vec![1, 1], vec![0, 0]]);
        assert_eq!(j.x_marginal().counts(), &[2, 0]);
        assert_eq!(j.y_marginal().counts(), &[1, 1]);
        assert!(joint_type(&[0], &[0, 1], 2, 2).is_err());
        assert!(empirical_type(&[], 2).is_err());
        assert!(empirical_type(&[3], 2).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let t = enumerate_types(2, 2).unwrap();
        let c: Vec<_> = t.iter().map(|t| t.counts().to_vec()).collect();
        assert_eq!(c, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(enumerate_types(1, 7).unwrap()[0].counts(), &[7]);
        assert_eq!(enumerate_types(3, 4).unwrap().len(), 15);
        assert!(matches!(
            enumerate_types_capped(3, 100, 10),
            Err(Error::TooManyTypes { count: 5151, cap: 10 })
        ));
    }

    #[test]
    fn type_class_examples() {
        let src = Dist::new(vec![0.9, 0.1]).unwrap();
        let t = EmpiricalType::new(vec![1, 0]).unwrap();
        assert!((type_class_log_prob(&src, &t).unwrap() - 0.9f64.ln()).abs() < 1e-15);

        let half = Dist::uniform(2);
        let t = EmpiricalType::new(vec![2, 2]).unwrap();
        assert!((type_class_log_prob(&half, &t).unwrap() - (6.0f64 / 16.0).ln()).abs() < 1e-14);

        let zero = Dist::new(vec![1.0, 0.0]).unwrap();
        let t = EmpiricalType::new(vec![1, 1]).unwrap();
        assert_eq!(type_class_log_prob(&zero, &t).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn large_n_stays_finite() {
        let src = Dist::new(vec![0.5, 0.3, 0.2]).unwrap();
        let t = EmpiricalType::new(vec![500, 300, 200]).unwrap();
        let v = type_class_log_prob(&src, &t).unwrap();
        assert!(v.is_finite() && v < 0.0 && v > -3.0 * 1001f64.ln());
    }
}
