use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::rng::{stream, Purpose, Sampler, CODEBOOK_KEY};
use crate::error::{Error, Result};
use crate::prob::{kl, Channel, Dist};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub codewords: Vec<Vec<usize>>,
    pub generator: Dist,
    /// Length of the prefix shared by every codeword; 0 without training.
    pub preamble_len: usize,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn block_len(&self) -> usize {
        self.codewords.first().map_or(0, Vec::len)
    }

    pub fn preamble(&self) -> &[usize] {
        self.codewords.first().map_or(&[], |c| &c[..self.preamble_len])
    }
}

/// Codebook with i.i.d. entries drawn from `generator`.
pub fn random_codebook(messages: usize, n: usize, generator: &Dist, seed: u64) -> Codebook {
    let sampler = Sampler::new(generator);
    let mut rng = stream(seed, CODEBOOK_KEY, 0, Purpose::Codebook);
    let codewords = (0..messages)
        .map(|_| (0..n).map(|_| sampler.sample(&mut rng)).collect())
        .collect();
    Codebook {
        codewords,
        generator: generator.clone(),
        preamble_len: 0,
    }
}

/// Counts summing to `total` that are closest in L1 to `total * p`
/// (largest-remainder rounding).
pub fn closest_type(p: &Dist, total: usize) -> Vec<usize> {
    let scaled: Vec<f64> = p.probs().iter().map(|&v| v * total as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|v| v.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - counts[a] as f64;
        let rb = scaled[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let short = total - counts.iter().sum::<usize>().min(total);
    for &i in order.iter().take(short) {
        counts[i] += 1;
    }
    counts
}

/// Codebook whose codewords share a preamble of length `floor(eta * n)`.
///
/// The preamble has the type closest to `preamble_dist`, arranged in a
/// seeded random order; then `ceil(ln n)` evenly spaced positions are set to
/// the input whose output law is farthest from noise, to break coincidences
/// with shifted copies of itself. The remaining symbols are i.i.d. from
/// `generator`.
pub fn training_codebook(
    q: &Channel,
    messages: usize,
    n: usize,
    eta: f64,
    preamble_dist: &Dist,
    generator: &Dist,
    seed: u64,
) -> Result<Codebook> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidConfig(format!("eta = {eta} must lie in (0, 1]")));
    }
    let len = (eta * n as f64 + 1e-9).floor() as usize;
    if len == 0 {
        return Err(Error::InvalidConfig(format!(
            "preamble length floor(eta * n) = 0 for eta = {eta}, n = {n}"
        )));
    }
    for d in [preamble_dist, generator] {
        if d.len() != q.inputs() {
            return Err(Error::SizeMismatch {
                expected: q.inputs(),
                got: d.len(),
            });
        }
    }
    let mut rng = stream(seed, CODEBOOK_KEY, 0, Purpose::Codebook);
    let mut preamble: Vec<usize> = closest_type(preamble_dist, len)
        .into_iter()
        .enumerate()
        .flat_map(|(x, c)| std::iter::repeat_n(x, c))
        .collect();
    preamble.shuffle(&mut rng);

    let mut marker = 0;
    let mut best = f64::NEG_INFINITY;
    for x in 0..q.inputs() {
        let d = kl(q.row(x), q.noise())?;
        if d > best {
            best = d;
            marker = x;
        }
    }
    let marks = (n as f64).ln().ceil().max(1.0) as usize;
    for k in 0..marks {
        preamble[k * len / marks] = marker;
    }

    let sampler = Sampler::new(generator);
    let codewords = (0..messages)
        .map(|_| {
            let mut c = preamble.clone();
            c.extend((len..n).map(|_| sampler.sample(&mut rng)));
            c
        })
        .collect();
    Ok(Codebook {
        codewords,
        generator: generator.clone(),
        preamble_len: len,
    })
}
