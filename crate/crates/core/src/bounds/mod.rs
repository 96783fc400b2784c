//! Evaluators for the asynchronism-exponent bounds of a channel.
//!
//! Every maximization over input distributions is carried out on a
//! [`GridSpec`] lattice, so each returned exponent is a grid maximum: it can
//! only fall short of the true maximum, never exceed it.

mod gaussian;
mod sweep;

pub use gaussian::{gaussian_lower_bound, quantized_gaussian, Quantization};
pub use sweep::{sweep, Sweep, SweepHeader, SweepRow, SweepValues};

use serde::{Deserialize, Serialize};

use crate::chernoff::{chernoff_value, CondChernoff, DEFAULT_CHERNOFF_TOL};
use crate::error::{Error, Result};
use crate::prob::{
    blahut_arimoto, kl_slices, mutual_info_slice, output_probs, Capacity, Channel, Dist,
    DEFAULT_BA_TOL,
};
use crate::simplex::{self, better, lattice, local_lattice, GridSpec, EXHAUSTIVE_MAX_DIM};

/// Slack on the mutual-information constraint absorbing float dust at `R = C`.
pub const RATE_SLACK: f64 = 1e-9;

/// Default L1 tolerance when comparing the noise row with the
/// capacity-achieving output distribution.
pub const DEFAULT_DISCONTINUITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    SyncThreshold,
    /// Joint synchronization-and-decoding achievability.
    Achievability,
    /// General converse.
    Converse,
    /// Exact exponent for channels with an infinite threshold.
    InfiniteThreshold,
    TrainingAchievability,
    TrainingConverse,
    /// Achievability for the Gaussian channel with Gaussian inputs.
    GaussianAchievability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Input(Dist),
    Converse { p1: Dist, p1_alt: Dist, delta: f64 },
    Gaussian { mean: f64, variance: f64 },
}

/// A rate/exponent pair together with the arguments that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub rate: f64,
    pub alpha: f64,
    pub kind: BoundKind,
    pub witness: Option<Witness>,
}

/// `m * eta`, reading `inf * 0` as the left limit `inf`.
pub(crate) fn scale_exponent(m: f64, eta: f64) -> f64 {
    if m.is_infinite() {
        f64::INFINITY
    } else {
        m * eta
    }
}

/// Channel together with the quantities every bound needs.
#[derive(Debug, Clone)]
pub struct ChannelBounds<'a> {
    q: &'a Channel,
    capacity: Capacity,
    cond: CondChernoff,
    /// `chernoff(Q(.|x), Q_star)` for every input `x`.
    vertex_alpha2: Vec<f64>,
}

impl<'a> ChannelBounds<'a> {
    pub fn new(q: &'a Channel) -> Result<Self> {
        let capacity = blahut_arimoto(q, None, DEFAULT_BA_TOL)?;
        let cond = CondChernoff::new(q);
        let vertex_alpha2 = (0..q.inputs())
            .map(|x| {
                let mut e = vec![0.0; q.inputs()];
                e[x] = 1.0;
                cond.value(&e, DEFAULT_CHERNOFF_TOL)
            })
            .collect();
        Ok(Self {
            q,
            capacity,
            cond,
            vertex_alpha2,
        })
    }

    pub fn channel(&self) -> &Channel {
        self.q
    }

    pub fn capacity(&self) -> &Capacity {
        &self.capacity
    }

    pub fn sync_threshold(&self) -> f64 {
        sync_threshold(self.q)
    }

    /// Validates `rate` against `(0, C]` and clamps float dust above `C`.
    pub fn check_rate(&self, rate: f64) -> Result<f64> {
        let c = &self.capacity;
        if !(rate > 0.0) || rate > c.upper + 1e-12 {
            return Err(Error::RateOutOfRange {
                rate,
                capacity: c.capacity,
            });
        }
        Ok(rate.min(c.capacity))
    }

    fn noise(&self) -> &[f64] {
        self.q.noise().probs()
    }

    /// Achievability bound: max over `P` with `I(PQ) >= R` of the Chernoff
    /// information between `(PQ)_Y` and the noise.
    pub fn lower(&self, rate: f64, grid: &GridSpec, warm: &[Vec<f64>]) -> Result<BoundPoint> {
        grid.validate()?;
        let r = self.check_rate(rate)?;
        let mut extra = vec![self.capacity.input.probs().to_vec()];
        extra.extend(warm.iter().cloned());
        let best = simplex::maximize(
            self.q.inputs(),
            grid,
            &extra,
            Some(self.capacity.input.probs()),
            |p| {
                (mutual_info_slice(p, self.q) >= r - RATE_SLACK)
                    .then(|| chernoff_value(&output_probs(p, self.q), self.noise(), DEFAULT_CHERNOFF_TOL))
            },
        )
        .ok_or(Error::Infeasible { rate })?;
        Ok(BoundPoint {
            rate,
            alpha: best.value,
            kind: BoundKind::Achievability,
            witness: Some(Witness::Input(Dist::from_weights(best.witness))),
        })
    }

    /// Converse bound. For an infinite threshold this is the rate-independent
    /// [`ChannelBounds::alpha_bar`]; otherwise the grid maximum over
    /// `(P1, P1', delta)` of `min{alpha1, alpha2}`.
    pub fn upper(&self, rate: f64, grid: &GridSpec, warm: &[ConverseCandidate]) -> Result<BoundPoint> {
        grid.validate()?;
        if !(rate > 0.0) {
            return Err(Error::RateOutOfRange {
                rate,
                capacity: self.capacity.capacity,
            });
        }
        if self.sync_threshold().is_infinite() {
            let mut p = self.alpha_bar(grid)?;
            p.rate = rate;
            p.kind = BoundKind::Converse;
            return Ok(p);
        }
        let r = self.check_rate(rate)?;
        ConverseSearch::new(self, r).run(grid, warm).map(|(value, cand)| BoundPoint {
            rate,
            alpha: value,
            kind: BoundKind::Converse,
            witness: Some(cand.into_witness()),
        })
    }

    /// `max_P min_W max{D(W||Q|P), D(W||Q_star|P)}`.
    pub fn alpha_bar(&self, grid: &GridSpec) -> Result<BoundPoint> {
        grid.validate()?;
        let k = self.q.inputs();
        // the objective is convex in P, so vertices are natural candidates
        let vertices: Vec<Vec<f64>> = (0..k)
            .map(|x| {
                let mut e = vec![0.0; k];
                e[x] = 1.0;
                e
            })
            .collect();
        let best = simplex::maximize(k, grid, &vertices, None, |p| {
            Some(self.cond.value(p, DEFAULT_CHERNOFF_TOL))
        })
        .expect("objective is total");
        Ok(BoundPoint {
            rate: 0.0,
            alpha: best.value,
            kind: BoundKind::InfiniteThreshold,
            witness: Some(Witness::Input(Dist::from_weights(best.witness))),
        })
    }

    /// `-ln min_y Q_star(y)`.
    pub fn m2(&self) -> f64 {
        training_m2(self.q)
    }

    pub fn training(&self, rate: f64, grid: &GridSpec, upper: Option<&BoundPoint>) -> Result<TrainingBounds> {
        let r = self.check_rate(rate)?;
        let m1 = self.alpha_bar(grid)?;
        let eta = (1.0 - r / self.capacity.capacity).max(0.0);
        let upper_general = match upper {
            Some(u) => u.clone(),
            None => self.upper(rate, grid, &[])?,
        };
        let m2 = self.m2();
        let lower = BoundPoint {
            rate,
            alpha: scale_exponent(m1.alpha, eta),
            kind: BoundKind::TrainingAchievability,
            witness: m1.witness.clone(),
        };
        let m2_term = scale_exponent(m2, eta);
        let upper = if m2_term <= upper_general.alpha {
            BoundPoint {
                rate,
                alpha: m2_term,
                kind: BoundKind::TrainingConverse,
                witness: None,
            }
        } else {
            BoundPoint {
                kind: BoundKind::TrainingConverse,
                ..upper_general
            }
        };
        Ok(TrainingBounds {
            lower,
            upper,
            eta,
            m1: m1.alpha,
            m2,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingBounds {
    pub lower: BoundPoint,
    pub upper: BoundPoint,
    /// Largest preamble fraction, `1 - R/C`.
    pub eta: f64,
    pub m1: f64,
    pub m2: f64,
}

/// A point `(P1, P1', delta)` of the converse search space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConverseCandidate {
    pub p1: Vec<f64>,
    pub p1_alt: Vec<f64>,
    pub delta: f64,
}

impl ConverseCandidate {
    fn into_witness(self) -> Witness {
        Witness::Converse {
            p1: Dist::from_weights(self.p1),
            p1_alt: Dist::from_weights(self.p1_alt),
            delta: self.delta,
        }
    }

    pub fn from_witness(w: &Witness) -> Option<Self> {
        match w {
            Witness::Converse { p1, p1_alt, delta } => Some(Self {
                p1: p1.probs().to_vec(),
                p1_alt: p1_alt.probs().to_vec(),
                delta: *delta,
            }),
            Witness::Input(p) => Some(Self {
                p1: p.probs().to_vec(),
                p1_alt: p.probs().to_vec(),
                delta: 1.0,
            }),
            Witness::Gaussian { .. } => None,
        }
    }
}

/// Branch-and-bound search for the converse bound.
///
/// `alpha2` is convex in `P2` (a pointwise max of linear functions), so for
/// fixed `(P1, delta)` the best `P1'` is a vertex of the simplex and
/// `delta alpha2(P1) + (1-delta) alpha2(e_x)` bounds it from above.
/// `alpha1 = delta (I(P1Q) - R + D((P1Q)_Y || Q_star))` grows with `delta`,
/// so the `delta` scan stops once `alpha1` cannot beat the incumbent.
struct ConverseSearch<'b, 'a> {
    cb: &'b ChannelBounds<'a>,
    rate: f64,
    m1: f64,
    best: Option<(f64, ConverseCandidate)>,
}

impl<'b, 'a> ConverseSearch<'b, 'a> {
    fn new(cb: &'b ChannelBounds<'a>, rate: f64) -> Self {
        let m1 = cb.vertex_alpha2.iter().copied().fold(0.0, f64::max);
        Self {
            cb,
            rate,
            m1,
            best: None,
        }
    }

    fn best_value(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.0)
    }

    /// `I(P1Q) - R + D((P1Q)_Y || Q_star)`, or `None` if `P1` is infeasible.
    fn alpha1_slope(&self, p1: &[f64]) -> Option<f64> {
        let q = self.cb.q;
        let i = mutual_info_slice(p1, q);
        if i < self.rate - RATE_SLACK {
            return None;
        }
        let d = kl_slices(&output_probs(p1, q), self.cb.noise());
        Some((i - self.rate).max(0.0) + d)
    }

    fn alpha2(&self, p2: &[f64]) -> f64 {
        self.cb.cond.value(p2, DEFAULT_CHERNOFF_TOL)
    }

    fn offer(&mut self, value: f64, cand: impl FnOnce() -> ConverseCandidate) {
        if better(value, self.best_value()) {
            self.best = Some((value, cand()));
        }
    }

    fn evaluate_exact(&mut self, c: &ConverseCandidate) {
        let Some(slope) = self.alpha1_slope(&c.p1) else {
            return;
        };
        let p2: Vec<f64> = c
            .p1
            .iter()
            .zip(&c.p1_alt)
            .map(|(a, b)| c.delta * a + (1.0 - c.delta) * b)
            .collect();
        let v = (c.delta * slope).min(self.alpha2(&p2));
        self.offer(v, || c.clone());
    }

    /// Scans `deltas` (sorted descending) at a fixed `P1`.
    fn evaluate_p1(&mut self, p1: &[f64], slope: f64, deltas: &[f64]) {
        let k = p1.len();
        let mut a2_p1: Option<f64> = None;
        for &delta in deltas {
            let a1 = delta * slope;
            if !better(a1, self.best_value()) {
                break;
            }
            let a2_p1 = *a2_p1.get_or_insert_with(|| self.alpha2(p1));
            if delta >= 1.0 {
                let v = a1.min(a2_p1);
                self.offer(v, || ConverseCandidate {
                    p1: p1.to_vec(),
                    p1_alt: p1.to_vec(),
                    delta: 1.0,
                });
                continue;
            }
            for x in 0..k {
                let ub = delta * a2_p1 + (1.0 - delta) * self.cb.vertex_alpha2[x];
                if !better(a1.min(ub), self.best_value()) {
                    continue;
                }
                let mut p2: Vec<f64> = p1.iter().map(|v| delta * v).collect();
                p2[x] += 1.0 - delta;
                let v = a1.min(self.alpha2(&p2));
                self.offer(v, || {
                    let mut alt = vec![0.0; k];
                    alt[x] = 1.0;
                    ConverseCandidate {
                        p1: p1.to_vec(),
                        p1_alt: alt,
                        delta,
                    }
                });
            }
        }
    }

    fn scan(&mut self, points: Vec<Vec<f64>>, deltas: &[f64]) {
        let mut scored: Vec<(f64, Vec<f64>)> = points
            .into_iter()
            .filter_map(|p| self.alpha1_slope(&p).map(|s| (s, p)))
            .collect();
        // descending by the bound min(alpha1(delta = 1), m1); stable sort keeps ties in order
        scored.sort_by(|a, b| b.0.min(self.m1).total_cmp(&a.0.min(self.m1)));
        for (slope, p) in scored {
            if !better(slope.min(self.m1), self.best_value()) {
                break;
            }
            self.evaluate_p1(&p, slope, deltas);
        }
    }

    fn run(
        mut self,
        grid: &GridSpec,
        warm: &[ConverseCandidate],
    ) -> Result<(f64, ConverseCandidate)> {
        let k = self.cb.q.inputs();
        let md = grid.delta_divisions();
        let deltas: Vec<f64> = (0..=md).rev().map(|i| i as f64 / md as f64).collect();

        for c in warm {
            self.evaluate_exact(c);
        }
        let mut points = vec![self.cb.capacity.input.probs().to_vec()];
        points.extend(warm.iter().map(|c| c.p1.clone()));
        if k <= EXHAUSTIVE_MAX_DIM {
            points.extend(lattice(k, grid.simplex_divisions()));
            self.scan(points, &deltas);
            let (mut step, mut dstep) = (grid.simplex_step, grid.delta_step);
            for _ in 0..grid.refine_rounds {
                let Some((_, inc)) = self.best.clone() else { break };
                step /= 10.0;
                dstep /= 10.0;
                let mut local_deltas: Vec<f64> = (-10..=10)
                    .map(|j| inc.delta + j as f64 * dstep)
                    .filter(|d| (0.0..=1.0).contains(d))
                    .collect();
                local_deltas.sort_by(|a, b| b.total_cmp(a));
                self.scan(local_lattice(&inc.p1, step, 10), &local_deltas);
            }
        } else {
            self.scan(points, &deltas);
            let anchor = self.cb.capacity.input.probs().to_vec();
            let seed_best = self.best.clone();
            let extra: Vec<Vec<f64>> = seed_best.iter().map(|b| b.1.p1.clone()).collect();
            // ascent over P1 of the best value across the delta grid
            let found = simplex::maximize(k, grid, &extra, Some(&anchor), |p1| {
                let slope = self.alpha1_slope(p1)?;
                let mut sub = ConverseSearch {
                    cb: self.cb,
                    rate: self.rate,
                    m1: self.m1,
                    best: None,
                };
                sub.evaluate_p1(p1, slope, &deltas);
                sub.best.map(|b| b.0)
            });
            if let Some(inc) = found {
                let slope = self.alpha1_slope(&inc.witness).expect("feasible incumbent");
                self.evaluate_p1(&inc.witness, slope, &deltas);
            }
        }
        self.best.ok_or(Error::Infeasible { rate: self.rate })
    }
}

/// `max_x D(Q(.|x) || Q_star)`; infinite iff noise cannot produce some
/// output that an input can.
pub fn sync_threshold(q: &Channel) -> f64 {
    q.rows()
        .iter()
        .map(|r| kl_slices(r.probs(), q.noise().probs()))
        .fold(0.0, f64::max)
}

pub fn lower_bound_alpha(q: &Channel, rate: f64, grid: &GridSpec) -> Result<BoundPoint> {
    ChannelBounds::new(q)?.lower(rate, grid, &[])
}

pub fn upper_bound_alpha(q: &Channel, rate: f64, grid: &GridSpec) -> Result<BoundPoint> {
    ChannelBounds::new(q)?.upper(rate, grid, &[])
}

pub fn alpha_bar(q: &Channel, grid: &GridSpec) -> Result<BoundPoint> {
    ChannelBounds::new(q)?.alpha_bar(grid)
}

pub fn training_bounds(q: &Channel, rate: f64, grid: &GridSpec) -> Result<TrainingBounds> {
    ChannelBounds::new(q)?.training(rate, grid, None)
}

pub fn training_m2(q: &Channel) -> f64 {
    let min = q.noise().probs().iter().copied().fold(f64::INFINITY, f64::min);
    -min.ln()
}

/// Whether the exponent jumps at `R = C`: the noise row differs from the
/// capacity-achieving output distribution by more than `tol` in L1.
pub fn discontinuity_at_capacity(q: &Channel, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let cap = blahut_arimoto(q, None, DEFAULT_BA_TOL)?;
    Ok(q.noise().l1_distance(&cap.output)? > tol)
}

/// Sufficient condition for a jump at `R = 0`:
/// `max_x D(Q(.|x)||Q_star) > max_x D(Q_star||Q(.|x))`.
pub fn discontinuity_at_zero(q: &Channel) -> bool {
    let reverse = q
        .rows()
        .iter()
        .map(|r| kl_slices(q.noise().probs(), r.probs()))
        .fold(0.0, f64::max);
    sync_threshold(q) > reverse
}
