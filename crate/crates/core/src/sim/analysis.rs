//! Exact false-trigger probabilities of the joint decoder's first step.

use crate::error::Result;
use crate::prob::{enumerate_types, kl, type_class_log_prob, Dist};

/// Probability that `n` i.i.d. noise symbols have an empirical type at
/// divergence at least `alpha` from `noise`, summed exactly over types.
pub fn noise_trigger_probability(noise: &Dist, n: u64, alpha: f64) -> Result<f64> {
    let mut total = 0.0;
    for t in enumerate_types(noise.len(), n)? {
        if kl(&t.as_dist(), noise)? >= alpha {
            total += type_class_log_prob(noise, &t)?.exp();
        }
    }
    Ok(total.min(1.0))
}

/// `(n+1)^|Y| e^{-n alpha}`.
pub fn trigger_envelope(outputs: usize, n: u64, alpha: f64) -> f64 {
    (outputs as f64 * ((n + 1) as f64).ln() - n as f64 * alpha).exp()
}
