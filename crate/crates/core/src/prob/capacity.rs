use super::{kl_slices, mutual_info_slice, output_probs, Channel, Dist};
use crate::error::{Error, Result};

pub const DEFAULT_BA_TOL: f64 = 1e-9;
pub const MAX_BA_ITERATIONS: usize = 100_000;
const MAX_STEP: f64 = 64.0;

/// Synchronous capacity estimate with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    /// `I(input Q)`, a lower bound on capacity.
    pub capacity: f64,
    /// `max_x D(Q(.|x) || output)` over the allowed inputs, an upper bound.
    pub upper: f64,
    pub input: Dist,
    pub output: Dist,
    pub iterations: usize,
}

/// Blahut-Arimoto alternating maximization of `I(PQ)`.
///
/// `inputs` restricts the support of `P`; `None` allows every input. Stops
/// when the certified bracket `[I(PQ), max_x D(Q(.|x)||PQ)]` is at most `tol`
/// wide. Starts from the uniform distribution on the allowed inputs and
/// over-relaxes the multiplicative update while that keeps increasing
/// `I(PQ)`, which matters when some input is almost but not quite optimal.
pub fn blahut_arimoto(q: &Channel, inputs: Option<&[usize]>, tol: f64) -> Result<Capacity> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let allowed: Vec<usize> = match inputs {
        Some([]) => return Err(Error::InvalidArgument("empty input subset".into())),
        Some(s) => {
            if let Some(&x) = s.iter().find(|&&x| x >= q.inputs()) {
                return Err(Error::InvalidArgument(format!("input {x} out of range")));
            }
            let mut s = s.to_vec();
            s.sort_unstable();
            s.dedup();
            s
        }
        None => (0..q.inputs()).collect(),
    };

    let mut p = vec![0.0; q.inputs()];
    for &x in &allowed {
        p[x] = 1.0 / allowed.len() as f64;
    }
    let mut divs = vec![0.0; q.inputs()];
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    let mut step = 1.0;
    for iteration in 1..=MAX_BA_ITERATIONS {
        let out = output_probs(&p, q);
        for &x in &allowed {
            divs[x] = kl_slices(q.row(x).probs(), &out);
        }
        lower = mutual_info_slice(&p, q);
        upper = allowed.iter().map(|&x| divs[x]).fold(0.0, f64::max);
        if upper - lower <= tol {
            return Ok(Capacity {
                capacity: lower,
                upper,
                input: Dist::from_weights(p),
                output: Dist::from_weights(out),
                iterations: iteration,
            });
        }
        // p(x) <- p(x) exp(s D_x) / Z. s = 1 is the classical update, which
        // never decreases I; larger steps are kept only while they help.
        loop {
            let mut cand = p.clone();
            let mut z = 0.0;
            for &x in &allowed {
                cand[x] *= (step * (divs[x] - upper)).exp();
                z += cand[x];
            }
            for &x in &allowed {
                cand[x] /= z;
            }
            if step == 1.0 || mutual_info_slice(&cand, q) >= lower {
                p = cand;
                step = (step * 1.5).min(MAX_STEP);
                break;
            }
            step = (step / 2.0).max(1.0);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_BA_ITERATIONS,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hb(e: f64) -> f64 {
        -(e * e.ln() + (1.0 - e) * (1.0 - e).ln())
    }

    #[test]
    fn bsc_closed_form() {
        for eps in [0.05, 0.1, 0.25] {
            let c = blahut_arimoto(&Channel::bsc(eps, 0).unwrap(), None, 1e-9).unwrap();
            assert!((c.capacity - (2f64.ln() - hb(eps))).abs() <= 1e-9, "eps={eps}");
            assert!(c.upper - c.capacity <= 1e-9);
        }
    }

    #[test]
    fn identical_rows_have_zero_capacity() {
        let q = Channel::new(vec![vec![0.2, 0.8]; 3], 1).unwrap();
        let c = blahut_arimoto(&q, None, 1e-9).unwrap();
        assert!(c.capacity.abs() < 1e-15);
        assert_eq!(c.iterations, 1);
    }

    #[test]
    fn restricted_inputs_ignore_pure_noise_symbol() {
        let q = Channel::new(
            vec![vec![0.9, 0.1], vec![0.1, 0.9], vec![0.5, 0.5]],
            2,
        )
        .unwrap();
        let c = blahut_arimoto(&q, Some(&[0, 1]), 1e-9).unwrap();
        assert!((c.output.get(0) - 0.5).abs() < 1e-12);
        assert_eq!(c.input.get(2), 0.0);
        let full = blahut_arimoto(&q, None, 1e-9).unwrap();
        assert!((full.capacity - c.capacity).abs() < 2e-9);
        assert!(full.input.get(2) < 1e-6);
    }

    #[test]
    fn bad_arguments() {
        let q = Channel::bsc(0.1, 0).unwrap();
        assert!(blahut_arimoto(&q, Some(&[]), 1e-9).is_err());
        assert!(blahut_arimoto(&q, Some(&[5]), 1e-9).is_err());
        assert!(blahut_arimoto(&q, None, 0.0).is_err());
    }
}
