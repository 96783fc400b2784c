use serde::{Deserialize, Serialize};

use super::{
    discontinuity_at_zero, scale_exponent, BoundPoint, ChannelBounds, ConverseCandidate, Witness,
    DEFAULT_DISCONTINUITY_TOL,
};
use crate::error::{Error, Result};
use crate::prob::Channel;
use crate::simplex::GridSpec;

/// Channel-level constants reported above a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepHeader {
    pub capacity: f64,
    pub sync_threshold: f64,
    pub m1: f64,
    pub m2: f64,
    pub discontinuous_at_capacity: bool,
    pub discontinuous_at_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepValues {
    pub alpha_lower: BoundPoint,
    pub alpha_upper: BoundPoint,
    pub train_lower: f64,
    pub train_upper: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rate: f64,
    pub values: Result<SweepValues>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub header: SweepHeader,
    pub rows: Vec<SweepRow>,
}

/// Evaluates all bounds at each rate.
///
/// Rates are processed from the largest down and each row reuses the
/// witnesses found at larger rates as extra candidates (anything feasible at
/// a larger rate is feasible at a smaller one), so both exponent columns are
/// nonincreasing in the rate. Rows come back in input order; a rate outside
/// `(0, C]` yields an error row.
pub fn sweep(q: &Channel, rates: &[f64], grid: &GridSpec) -> Result<Sweep> {
    grid.validate()?;
    let cb = ChannelBounds::new(q)?;
    let capacity = cb.capacity().capacity;
    let m1 = cb.alpha_bar(grid)?.alpha;
    let m2 = cb.m2();
    let header = SweepHeader {
        capacity,
        sync_threshold: cb.sync_threshold(),
        m1,
        m2,
        discontinuous_at_capacity: q.noise().l1_distance(&cb.capacity().output)?
            > DEFAULT_DISCONTINUITY_TOL,
        discontinuous_at_zero: discontinuity_at_zero(q),
    };

    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| rates[b].total_cmp(&rates[a]));
    let mut warm_lower: Vec<Vec<f64>> = Vec::new();
    let mut warm_upper: Vec<ConverseCandidate> = Vec::new();
    let mut values: Vec<Option<Result<SweepValues>>> = vec![None; rates.len()];
    for idx in order {
        let rate = rates[idx];
        let row = (|| -> Result<SweepValues> {
            let r = cb.check_rate(rate)?;
            let lower = cb.lower(rate, grid, &warm_lower)?;
            let mut candidates = warm_upper.clone();
            if let Some(w) = lower.witness.as_ref().and_then(ConverseCandidate::from_witness) {
                candidates.push(w);
            }
            let upper = cb.upper(rate, grid, &candidates)?;
            let eta = (1.0 - r / capacity).max(0.0);
            let train_lower = scale_exponent(m1, eta);
            let train_upper = scale_exponent(m2, eta).min(upper.alpha);
            Ok(SweepValues {
                alpha_lower: lower,
                alpha_upper: upper,
                train_lower,
                train_upper,
                eta,
            })
        })();
        if let Ok(v) = &row {
            if let Some(Witness::Input(p)) = &v.alpha_lower.witness {
                warm_lower.push(p.probs().to_vec());
            }
            if let Some(c) = v.alpha_upper.witness.as_ref().and_then(ConverseCandidate::from_witness) {
                warm_upper.push(c);
            }
        }
        values[idx] = Some(row);
    }
    let rows = rates
        .iter()
        .zip(values)
        .map(|(&rate, v)| SweepRow {
            rate,
            values: v.unwrap_or(Err(Error::InvalidArgument("rate not evaluated".into()))),
        })
        .collect();
    Ok(Sweep { header, rows })
}
