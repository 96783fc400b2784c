use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use crate::prob::Channel;

/// What a decoder declares when it stops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Message(usize),
    /// Several messages are equally likely; one is drawn uniformly.
    Tied(Vec<usize>),
    /// No information; a uniformly random message is declared.
    Random,
}

/// What the joint decoder does when its decoding window closes without a
/// unique typical codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowExpiry {
    /// Stop and declare a random message.
    #[default]
    DeclareRandom,
    /// Go back to scanning for a non-noise type.
    Resume,
}

/// A decoder fed one output symbol per time step. Returning `Some` stops it
/// at the current time. Past symbols are all it ever sees.
pub trait SequentialDecoder {
    fn observe(&mut self, t: u64, y: usize) -> Option<Decision>;
}

/// `ln Q(y|x)` for every pair, `-inf` where the transition is impossible.
pub(crate) fn log_table(q: &Channel) -> Vec<Vec<f64>> {
    q.rows()
        .iter()
        .map(|r| r.probs().iter().map(|p| p.ln()).collect())
        .collect()
}

/// Maximum-likelihood decision for `ys` against `codewords[m][offset..]`.
pub(crate) fn ml_decode<'a>(
    log_q: &[Vec<f64>],
    codewords: impl Iterator<Item = &'a [usize]>,
    ys: &[usize],
) -> Decision {
    let mut best = f64::NEG_INFINITY;
    let mut winners: Vec<usize> = Vec::new();
    for (m, c) in codewords.enumerate() {
        let score: f64 = c.iter().zip(ys).map(|(&x, &y)| log_q[x][y]).sum();
        if score > best {
            best = score;
            winners.clear();
            winners.push(m);
        } else if score == best {
            winners.push(m);
        }
    }
    match winners.len() {
        1 => Decision::Message(winners[0]),
        _ => Decision::Tied(winners),
    }
}

/// Fixed-capacity window over the most recent symbols.
#[derive(Debug, Clone)]
struct Ring {
    buf: Vec<usize>,
    head: usize,
    filled: usize,
}

impl Ring {
    fn new(len: usize) -> Self {
        Self {
            buf: vec![0; len],
            head: 0,
            filled: 0,
        }
    }

    /// Pushes `y` and returns the symbol that fell out, if any.
    fn push(&mut self, y: usize) -> Option<usize> {
        let old = (self.filled == self.buf.len()).then(|| self.buf[self.head]);
        self.buf[self.head] = y;
        self.head = (self.head + 1) % self.buf.len();
        self.filled = (self.filled + 1).min(self.buf.len());
        old
    }

    fn full(&self) -> bool {
        self.filled == self.buf.len()
    }

    /// Oldest first.
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let (a, b) = self.buf.split_at(self.head);
        b.iter().chain(a.iter()).copied()
    }
}

#[derive(Debug, Clone, Copy)]
enum JointState {
    Scanning,
    Window { opened: u64 },
}

/// Two-step decoder: scan for an output type far from noise, then look for
/// a unique jointly typical codeword within the next `n` steps.
#[derive(Debug, Clone)]
pub struct JointDecoder<'a> {
    codebook: &'a Codebook,
    n: usize,
    outputs: usize,
    alpha: f64,
    mu: f64,
    expiry: WindowExpiry,
    /// `div_terms[y][c] = (c/n) ln(c / (n Q_star(y)))`.
    div_terms: Vec<Vec<f64>>,
    /// Per codeword, `P_hat_c(a) Q(b|a)` flattened over `(a, b)`.
    targets: Vec<Vec<f64>>,
    window: Ring,
    counts: Vec<usize>,
    joint: Vec<usize>,
    state: JointState,
}

impl<'a> JointDecoder<'a> {
    pub fn new(q: &Channel, codebook: &'a Codebook, alpha: f64, mu: f64, expiry: WindowExpiry) -> Self {
        let n = codebook.block_len();
        let ny = q.outputs();
        let div_terms = q
            .noise()
            .probs()
            .iter()
            .map(|&qs| {
                (0..=n)
                    .map(|c| {
                        if c == 0 {
                            0.0
                        } else if qs == 0.0 {
                            f64::INFINITY
                        } else {
                            let f = c as f64 / n as f64;
                            f * (f / qs).ln()
                        }
                    })
                    .collect()
            })
            .collect();
        let targets = codebook
            .codewords
            .iter()
            .map(|c| {
                let mut t = vec![0.0; q.inputs() * ny];
                for &x in c {
                    for y in 0..ny {
                        t[x * ny + y] += q.prob(x, y) / n as f64;
                    }
                }
                t
            })
            .collect();
        Self {
            codebook,
            n,
            outputs: ny,
            alpha,
            mu,
            expiry,
            div_terms,
            targets,
            window: Ring::new(n),
            counts: vec![0; ny],
            joint: vec![0; q.inputs() * ny],
            state: JointState::Scanning,
        }
    }

    /// `D(P_hat || Q_star)` of the current window.
    fn divergence(&self) -> f64 {
        self.counts
            .iter()
            .zip(&self.div_terms)
            .map(|(&c, terms)| terms[c])
            .sum()
    }

    fn typical(&mut self, m: usize) -> bool {
        self.joint.iter_mut().for_each(|v| *v = 0);
        for (&x, y) in self.codebook.codewords[m].iter().zip(self.window.iter()) {
            self.joint[x * self.outputs + y] += 1;
        }
        let n = self.n as f64;
        self.joint
            .iter()
            .zip(&self.targets[m])
            .all(|(&c, &p)| (c as f64 / n - p).abs() <= self.mu)
    }

    fn unique_typical(&mut self) -> Option<usize> {
        let mut found = None;
        for m in 0..self.codebook.len() {
            if self.typical(m) {
                if found.is_some() {
                    return None;
                }
                found = Some(m);
            }
        }
        found
    }
}

impl SequentialDecoder for JointDecoder<'_> {
    fn observe(&mut self, t: u64, y: usize) -> Option<Decision> {
        if let Some(old) = self.window.push(y) {
            self.counts[old] -= 1;
        }
        self.counts[y] += 1;
        if !self.window.full() {
            return None;
        }
        if let JointState::Scanning = self.state {
            if self.divergence() >= self.alpha {
                self.state = JointState::Window { opened: t };
            } else {
                return None;
            }
        }
        let JointState::Window { opened } = self.state else {
            return None;
        };
        if let Some(m) = self.unique_typical() {
            return Some(Decision::Message(m));
        }
        if t + 1 >= opened + self.n as u64 {
            match self.expiry {
                WindowExpiry::DeclareRandom => return Some(Decision::Random),
                WindowExpiry::Resume => self.state = JointState::Scanning,
            }
        }
        None
    }
}

/// Preamble detector followed by maximum-likelihood decoding of the
/// remaining symbols.
///
/// Detection compares the conditional divergences of the last `L` outputs
/// given the preamble against the channel and against noise. With the
/// conditional type weighted by the preamble's own type, the comparison is a
/// log-likelihood ratio test of `Q(.|preamble)` against `Q_star`.
#[derive(Debug, Clone)]
pub struct TrainingDecoder<'a> {
    codebook: &'a Codebook,
    log_q: Vec<Vec<f64>>,
    star: usize,
    detect_until: u64,
    window: Ring,
    detected: bool,
    suffix_len: usize,
    suffix: Vec<usize>,
}

impl<'a> TrainingDecoder<'a> {
    /// Detection is only attempted up to `detect_until`, the last time at
    /// which decoding can still finish inside the stream.
    pub fn new(q: &Channel, codebook: &'a Codebook, detect_until: u64) -> Self {
        Self {
            codebook,
            log_q: log_table(q),
            star: q.star(),
            detect_until,
            window: Ring::new(codebook.preamble_len.max(1)),
            detected: false,
            suffix_len: codebook.block_len() - codebook.preamble_len,
            suffix: Vec::new(),
        }
    }

    fn preamble_fits(&self) -> bool {
        let star = &self.log_q[self.star];
        let (mut sum, mut impossible, mut unseen_in_noise) = (0.0, false, false);
        for (&x, y) in self.codebook.preamble().iter().zip(self.window.iter()) {
            let (a, b) = (self.log_q[x][y], star[y]);
            if a == f64::NEG_INFINITY {
                impossible = true;
            }
            if b == f64::NEG_INFINITY {
                unseen_in_noise = true;
            }
            if a.is_finite() && b.is_finite() {
                sum += a - b;
            }
        }
        match (impossible, unseen_in_noise) {
            (false, false) => sum >= -1e-9,
            (false, true) => true,
            (true, false) => false,
            // neither hypothesis explains the window
            (true, true) => false,
        }
    }

    fn decode(&self) -> Decision {
        let len = self.codebook.preamble_len;
        ml_decode(
            &self.log_q,
            self.codebook.codewords.iter().map(|c| &c[len..]),
            &self.suffix,
        )
    }
}

impl SequentialDecoder for TrainingDecoder<'_> {
    fn observe(&mut self, t: u64, y: usize) -> Option<Decision> {
        if self.detected {
            self.suffix.push(y);
        } else {
            if t > self.detect_until {
                return None;
            }
            self.window.push(y);
            if !self.window.full() || !self.preamble_fits() {
                return None;
            }
            self.detected = true;
        }
        (self.suffix.len() == self.suffix_len).then(|| self.decode())
    }
}

/// Synchronous maximum-likelihood decoding of a whole block.
pub fn genie_decode(q: &Channel, codebook: &Codebook, ys: &[usize]) -> Decision {
    ml_decode(
        &log_table(q),
        codebook.codewords.iter().map(Vec::as_slice),
        ys,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Dist;

    fn identity(k: usize, star: usize) -> Channel {
        Channel::new(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            star,
        )
        .unwrap()
    }

    fn book(codewords: Vec<Vec<usize>>, preamble_len: usize) -> Codebook {
        Codebook {
            codewords,
            generator: Dist::uniform(3),
            preamble_len,
        }
    }

    fn run(d: &mut impl SequentialDecoder, ys: &[usize]) -> Option<(u64, Decision)> {
        ys.iter()
            .enumerate()
            .find_map(|(i, &y)| d.observe(i as u64 + 1, y).map(|dec| (i as u64 + 1, dec)))
    }

    #[test]
    fn ring_keeps_order() {
        let mut r = Ring::new(3);
        assert_eq!(r.push(1), None);
        r.push(2);
        r.push(3);
        assert_eq!(r.push(4), Some(1));
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![2, 3, 4]);
    }

    #[test]
    fn ml_reports_ties() {
        let q = Channel::bsc(0.1, 0).unwrap();
        let cb = book(vec![vec![0, 1], vec![1, 0]], 0);
        assert_eq!(genie_decode(&q, &cb, &[0, 1]), Decision::Message(0));
        assert_eq!(genie_decode(&q, &cb, &[1, 1]), Decision::Tied(vec![0, 1]));
        let one = book(vec![vec![1, 1]], 0);
        assert_eq!(genie_decode(&q, &one, &[0, 0]), Decision::Message(0));
    }

    #[test]
    fn joint_noise_only_short_stream_never_fires() {
        let q = identity(3, 0);
        let cb = book(vec![vec![1, 2, 1, 2], vec![2, 1, 1, 1]], 0);
        let mut d = JointDecoder::new(&q, &cb, 0.5, 0.05, WindowExpiry::DeclareRandom);
        assert_eq!(run(&mut d, &[0, 0, 0]), None);
    }

    #[test]
    fn joint_alpha_zero_opens_window_at_n() {
        let q = identity(3, 0);
        let cb = book(vec![vec![1, 2, 1, 2], vec![2, 1, 1, 1]], 0);
        let mut d = JointDecoder::new(&q, &cb, 0.0, 0.01, WindowExpiry::DeclareRandom);
        // pure noise: window opens at t = 4 and expires at t = 7
        assert_eq!(run(&mut d, &[0; 20]), Some((7, Decision::Random)));
        let mut d = JointDecoder::new(&q, &cb, 0.0, 0.01, WindowExpiry::Resume);
        assert_eq!(run(&mut d, &[0; 20]), None);
    }

    #[test]
    fn joint_noiseless_decodes_at_block_end() {
        let q = identity(3, 0);
        let cb = book(vec![vec![1, 2, 1, 2], vec![2, 1, 1, 1]], 0);
        let mut d = JointDecoder::new(&q, &cb, 0.1, 0.01, WindowExpiry::DeclareRandom);
        let ys = [0, 0, 2, 1, 1, 1, 0, 0];
        assert_eq!(run(&mut d, &ys), Some((6, Decision::Message(1))));
    }

    #[test]
    fn joint_ambiguity_does_not_fire() {
        let q = identity(3, 0);
        let cb = book(vec![vec![1, 2], vec![1, 2]], 0);
        let mut d = JointDecoder::new(&q, &cb, 0.1, 0.01, WindowExpiry::DeclareRandom);
        assert_eq!(run(&mut d, &[1, 2, 0]), Some((3, Decision::Random)));
    }

    #[test]
    fn training_detects_noiseless_preamble_at_full_overlap() {
        let q = identity(3, 0);
        let cb = book(vec![vec![1, 2, 1, 1, 2], vec![1, 2, 1, 2, 1]], 3);
        let mut d = TrainingDecoder::new(&q, &cb, 100);
        let ys = [0, 0, 1, 2, 1, 2, 1, 0];
        // preamble ends at t = 5, suffix read by t = 7
        assert_eq!(run(&mut d, &ys), Some((7, Decision::Message(1))));
    }

    #[test]
    fn training_on_noise_like_channel_detects_immediately() {
        let q = Channel::new(vec![vec![0.3, 0.7]; 2], 0).unwrap();
        let cb = book(vec![vec![1, 1, 0, 1], vec![1, 1, 1, 0]], 2);
        let mut d = TrainingDecoder::new(&q, &cb, 100);
        assert_eq!(run(&mut d, &[0, 1, 0, 0, 1]), Some((4, Decision::Tied(vec![0, 1]))));
    }

    #[test]
    fn training_respects_detection_deadline() {
        let q = identity(3, 0);
        let cb = book(vec![vec![1, 2, 1], vec![1, 2, 2]], 2);
        let mut d = TrainingDecoder::new(&q, &cb, 3);
        assert_eq!(run(&mut d, &[0, 0, 0, 1, 2, 1]), None);
    }
}
