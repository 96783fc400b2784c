//! Search over the probability simplex.
//!
//! Small alphabets (at most [`EXHAUSTIVE_MAX_DIM`] symbols) are searched on a
//! barycentric lattice followed by local refinement rounds, each shrinking
//! the step tenfold around the incumbent. Larger alphabets use seeded
//! multi-start pairwise coordinate ascent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EXHAUSTIVE_MAX_DIM: usize = 3;

/// Discretization of the maximizations over input distributions and `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub simplex_step: f64,
    pub delta_step: f64,
    pub refine_rounds: u32,
    /// Seed for multi-start ascent on large alphabets.
    pub seed: u64,
    pub starts: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            simplex_step: 0.01,
            delta_step: 0.02,
            refine_rounds: 2,
            seed: 0,
            starts: 20,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        divisions(self.simplex_step)?;
        divisions(self.delta_step)?;
        if self.starts == 0 {
            return Err(Error::InvalidArgument("at least one start is required".into()));
        }
        Ok(())
    }

    pub(crate) fn simplex_divisions(&self) -> u32 {
        divisions(self.simplex_step).expect("validated grid")
    }

    pub(crate) fn delta_divisions(&self) -> u32 {
        divisions(self.delta_step).expect("validated grid")
    }
}

/// Number of lattice divisions for a step that must be `1/m`.
fn divisions(step: f64) -> Result<u32> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!("grid step {step} outside (0,1]")));
    }
    let m = (1.0 / step).round();
    if (m * step - 1.0).abs() > 1e-9 || m > 1e7 {
        return Err(Error::InvalidArgument(format!(
            "grid step {step} is not the reciprocal of an integer"
        )));
    }
    Ok(m as u32)
}

/// Every point `z/m` with `z` a composition of `m` into `k` parts.
pub fn lattice(k: usize, m: u32) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut z = vec![0u32; k];
    fn rec(z: &mut Vec<u32>, pos: usize, rem: u32, m: u32, out: &mut Vec<Vec<f64>>) {
        if pos + 1 == z.len() {
            z[pos] = rem;
            out.push(z.iter().map(|&c| c as f64 / m as f64).collect());
            return;
        }
        for c in (0..=rem).rev() {
            z[pos] = c;
            rec(z, pos + 1, rem - c, m, out);
        }
    }
    rec(&mut z, 0, m, m, &mut out);
    out
}

/// Points `center + step * z` with integer offsets `|z_i| <= radius`,
/// `sum z = 0`, that stay inside the simplex.
pub fn local_lattice(center: &[f64], step: f64, radius: i32) -> Vec<Vec<f64>> {
    let k = center.len();
    let mut out = Vec::new();
    let mut z = vec![0i32; k];
    fn rec(
        center: &[f64],
        step: f64,
        radius: i32,
        z: &mut Vec<i32>,
        pos: usize,
        partial: i32,
        out: &mut Vec<Vec<f64>>,
    ) {
        let k = z.len();
        if pos + 1 == k {
            let last = -partial;
            if last.abs() > radius {
                return;
            }
            z[pos] = last;
            let mut p = Vec::with_capacity(k);
            for (c, &zi) in center.iter().zip(z.iter()) {
                let v = c + step * zi as f64;
                if v < -1e-12 {
                    return;
                }
                p.push(v.max(0.0));
            }
            let s: f64 = p.iter().sum();
            out.push(p.into_iter().map(|v| v / s).collect());
            return;
        }
        for zi in -radius..=radius {
            z[pos] = zi;
            rec(center, step, radius, z, pos + 1, partial + zi, out);
        }
    }
    if k == 1 {
        return vec![vec![1.0]];
    }
    rec(center, step, radius, &mut z, 0, 0, &mut out);
    out
}

/// Best point found so far; ties keep the earlier candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent<W> {
    pub value: f64,
    pub witness: W,
}

pub(crate) fn better(candidate: f64, incumbent: Option<f64>) -> bool {
    match incumbent {
        None => !candidate.is_nan(),
        Some(v) => candidate > v,
    }
}

/// Maximizes `objective` over the simplex of dimension `k`.
///
/// `objective` returns `None` at infeasible points. `extra` candidates are
/// evaluated before the lattice; `anchor`, if given, must be feasible and is
/// used to pull infeasible random starts into the feasible set.
pub fn maximize(
    k: usize,
    grid: &GridSpec,
    extra: &[Vec<f64>],
    anchor: Option<&[f64]>,
    objective: impl Fn(&[f64]) -> Option<f64>,
) -> Option<Incumbent<Vec<f64>>> {
    let mut best: Option<Incumbent<Vec<f64>>> = None;
    let consider = |p: Vec<f64>, best: &mut Option<Incumbent<Vec<f64>>>| {
        if let Some(v) = objective(&p) {
            if better(v, best.as_ref().map(|b| b.value)) {
                *best = Some(Incumbent { value: v, witness: p });
            }
        }
    };
    for p in extra {
        consider(p.clone(), &mut best);
    }
    if k <= EXHAUSTIVE_MAX_DIM {
        let m = grid.simplex_divisions();
        for p in lattice(k, m) {
            consider(p, &mut best);
        }
        let mut step = grid.simplex_step;
        for _ in 0..grid.refine_rounds {
            let Some(center) = best.as_ref().map(|b| b.witness.clone()) else {
                break;
            };
            if best.as_ref().is_some_and(|b| b.value.is_infinite()) {
                break;
            }
            step /= 10.0;
            for p in local_lattice(&center, step, 10) {
                consider(p, &mut best);
            }
        }
        return best;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut starts: Vec<Vec<f64>> = extra.to_vec();
    starts.extend((0..k).map(|i| {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        v
    }));
    starts.extend((0..grid.starts).map(|_| {
        let e: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    }));
    let finest = grid.simplex_step / 10f64.powi(grid.refine_rounds as i32);
    for start in starts {
        let Some(start) = make_feasible(start, anchor, &objective) else {
            continue;
        };
        if let Some((p, v)) = coordinate_ascent(start, finest, &objective) {
            if better(v, best.as_ref().map(|b| b.value)) {
                best = Some(Incumbent { value: v, witness: p });
            }
        }
    }
    best
}

fn make_feasible(
    start: Vec<f64>,
    anchor: Option<&[f64]>,
    objective: &impl Fn(&[f64]) -> Option<f64>,
) -> Option<Vec<f64>> {
    if objective(&start).is_some() {
        return Some(start);
    }
    let anchor = anchor?;
    let mix = |t: f64| -> Vec<f64> {
        start
            .iter()
            .zip(anchor)
            .map(|(s, a)| (1.0 - t) * s + t * a)
            .collect()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    objective(&mix(hi))?;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if objective(&mix(mid)).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(mix(hi))
}

/// Moves mass between pairs of coordinates, shrinking the move size from
/// 0.1 down to `finest`.
fn coordinate_ascent(
    mut p: Vec<f64>,
    finest: f64,
    objective: &impl Fn(&[f64]) -> Option<f64>,
) -> Option<(Vec<f64>, f64)> {
    let k = p.len();
    let mut value = objective(&p)?;
    if value.is_infinite() {
        return Some((p, value));
    }
    let mut h = 0.1;
    while h >= finest * 0.999 {
        let mut improved = true;
        let mut sweeps = 0;
        while improved && sweeps < 1000 {
            improved = false;
            sweeps += 1;
            for i in 0..k {
                for j in 0..k {
                    if i == j || p[i] <= 0.0 {
                        continue;
                    }
                    let mv = h.min(p[i]);
                    let mut q = p.clone();
                    q[i] -= mv;
                    q[j] += mv;
                    if let Some(v) = objective(&q) {
                        if v > value + 1e-15 {
                            p = q;
                            value = v;
                            improved = true;
                        }
                    }
                }
            }
        }
        h /= 10.0;
    }
    Some((p, value))
}
