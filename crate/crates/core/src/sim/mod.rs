//! Monte-Carlo simulation of sequential decoding over the asynchronous
//! channel.
//!
//! A codeword of length `n` starts at a time `nu` uniform on `1..=A` with
//! `A = floor(e^{alpha n})`; every other time step up to `A + n - 1` carries
//! the noise symbol. The decoder's stopping time `tau` and declared message
//! give the error indicator and the delay `(tau - nu + 1)^+`, so a decoder
//! that stops right after the last codeword symbol has delay exactly `n`.

pub mod analysis;
pub mod codebook;
pub mod decoder;
pub mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{ChannelBounds, Witness};
use crate::error::{Error, Result};
use crate::prob::{Channel, Dist};
use crate::simplex::GridSpec;
pub use codebook::Codebook;
use decoder::{genie_decode, Decision, JointDecoder, SequentialDecoder, TrainingDecoder};
pub use decoder::WindowExpiry;
use rng::{below, stream, Purpose, Sampler};

pub const DEFAULT_MU: f64 = 0.05;
/// Default cap on the simulated asynchronism level.
pub const DEFAULT_MAX_ASYNC_LEVEL: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Joint,
    Training,
    Genie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub alpha: f64,
    pub messages: usize,
    pub scheme: Scheme,
    /// Codebook generator; defaults to a capacity-achieving input.
    pub input_dist: Option<Dist>,
    /// Typicality slack, joint scheme only.
    pub mu: Option<f64>,
    /// Preamble fraction, training scheme only.
    pub eta: Option<f64>,
    #[serde(default)]
    pub window_expiry: WindowExpiry,
    pub trials: usize,
    pub seed: u64,
    /// `A` is clamped to this value; the result records whether it was.
    pub max_async_level: u64,
    /// Worker threads, 0 for the rayon default. Does not affect results.
    #[serde(skip)]
    pub threads: usize,
}

impl SimConfig {
    pub fn new(scheme: Scheme, n: usize, alpha: f64, messages: usize, trials: usize, seed: u64) -> Self {
        Self {
            n,
            alpha,
            messages,
            scheme,
            input_dist: None,
            mu: (scheme == Scheme::Joint).then_some(DEFAULT_MU),
            eta: None,
            window_expiry: WindowExpiry::default(),
            trials,
            seed,
            max_async_level: DEFAULT_MAX_ASYNC_LEVEL,
            threads: 0,
        }
    }

    pub fn validate(&self, q: &Channel) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.messages < 2 {
            return bad(format!("need at least 2 messages, got {}", self.messages));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha = {} must be finite and non-negative", self.alpha));
        }
        if self.max_async_level == 0 {
            return bad("max_async_level must be positive".into());
        }
        if let Some(p) = &self.input_dist {
            if p.len() != q.inputs() {
                return Err(Error::SizeMismatch {
                    expected: q.inputs(),
                    got: p.len(),
                });
            }
        }
        match (self.scheme, self.mu) {
            (Scheme::Joint, None) => return bad("the joint scheme requires mu".into()),
            (Scheme::Joint, Some(mu)) if !(mu > 0.0) => return bad(format!("mu = {mu} must be positive")),
            (Scheme::Training | Scheme::Genie, Some(_)) => {
                return bad("mu applies to the joint scheme only".into())
            }
            _ => {}
        }
        match (self.scheme, self.eta) {
            (Scheme::Training, None) => return bad("the training scheme requires eta".into()),
            (Scheme::Training, Some(eta)) => {
                if !(eta > 0.0 && eta < 1.0) {
                    return bad(format!("eta = {eta} must lie in (0, 1)"));
                }
                if (eta * self.n as f64 + 1e-9).floor() < 1.0 {
                    return bad(format!("preamble length floor(eta * n) is 0 for eta = {eta}"));
                }
            }
            (_, Some(_)) => return bad("eta applies to the training scheme only".into()),
            _ => {}
        }
        if self.window_expiry != WindowExpiry::default() && self.scheme != Scheme::Joint {
            return bad("window_expiry applies to the joint scheme only".into());
        }
        Ok(())
    }

    /// `(A, clamped)` with `A = max(1, floor(e^{alpha n}))`.
    pub fn async_level(&self) -> (u64, bool) {
        let a = (self.alpha * self.n as f64).exp().floor();
        if a > self.max_async_level as f64 {
            (self.max_async_level, true)
        } else {
            ((a as u64).max(1), false)
        }
    }
}

/// One trial's outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub decoded: usize,
    pub tau: u64,
    pub nu: u64,
}

impl TrialOutcome {
    /// `(tau - nu + 1)^+`.
    pub fn delay(&self) -> u64 {
        (self.tau + 1).saturating_sub(self.nu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    /// Largest per-message error frequency.
    pub max_error_rate: f64,
    pub avg_error_rate: f64,
    /// Largest per-message mean of `(tau - nu + 1)^+`.
    pub mean_reaction_delay: f64,
    /// `ln M / mean_reaction_delay` in nats per channel use.
    pub empirical_rate: f64,
    /// Fraction of trials with `tau < nu`.
    pub false_alarm_rate: f64,
    /// Fraction of trials with `tau >= nu + 2n`.
    pub miss_rate: f64,
    pub trials_per_message: usize,
    /// 95% normal-approximation half-width for `max_error_rate`.
    pub ci_halfwidth: f64,
    pub per_message_error_rate: Vec<f64>,
    pub async_level: u64,
    pub async_level_clamped: bool,
    pub preamble_len: usize,
}

/// Everything a trial needs, shared read-only across workers.
pub struct Experiment<'a> {
    q: &'a Channel,
    cfg: &'a SimConfig,
    codebook: Codebook,
    samplers: Vec<Sampler>,
    async_level: u64,
}

impl<'a> Experiment<'a> {
    pub fn new(q: &'a Channel, cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate(q)?;
        let generator = match &cfg.input_dist {
            Some(p) => p.clone(),
            None => ChannelBounds::new(q)?.capacity().input.clone(),
        };
        let codebook = match cfg.scheme {
            Scheme::Joint | Scheme::Genie => {
                codebook::random_codebook(cfg.messages, cfg.n, &generator, cfg.seed)
            }
            Scheme::Training => {
                let cb = ChannelBounds::new(q)?;
                let Some(Witness::Input(pp)) = cb.alpha_bar(&GridSpec::default())?.witness else {
                    unreachable!("alpha_bar always reports an input witness")
                };
                let eta = cfg.eta.expect("validated");
                codebook::training_codebook(q, cfg.messages, cfg.n, eta, &pp, &generator, cfg.seed)?
            }
        };
        Ok(Self {
            q,
            cfg,
            codebook,
            samplers: q.rows().iter().map(Sampler::new).collect(),
            async_level: cfg.async_level().0,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn async_level(&self) -> u64 {
        self.async_level
    }

    /// Runs trial `trial` for message `m`.
    pub fn trial(&self, m: usize, trial: u64) -> TrialOutcome {
        let (seed, mm) = (self.cfg.seed, m as u64);
        let n = self.cfg.n as u64;
        let a = self.async_level;
        let nu = 1 + below(&mut stream(seed, mm, trial, Purpose::Position), a);
        let mut ch = stream(seed, mm, trial, Purpose::Channel);
        let codeword = &self.codebook.codewords[m];
        let star = self.q.star();
        let end = a + n - 1;

        let (tau, decision) = if self.cfg.scheme == Scheme::Genie {
            // output at time t uses channel words 2(t-1) and 2(t-1)+1
            ch.set_word_pos(2 * (nu as u128 - 1));
            let ys: Vec<usize> = codeword.iter().map(|&x| self.samplers[x].sample(&mut ch)).collect();
            (nu + n - 1, genie_decode(self.q, &self.codebook, &ys))
        } else {
            let mut dec: Box<dyn SequentialDecoder + '_> = match self.cfg.scheme {
                Scheme::Joint => Box::new(JointDecoder::new(
                    self.q,
                    &self.codebook,
                    self.cfg.alpha,
                    self.cfg.mu.expect("validated"),
                    self.cfg.window_expiry,
                )),
                _ => {
                    let suffix = (self.cfg.n - self.codebook.preamble_len) as u64;
                    Box::new(TrainingDecoder::new(self.q, &self.codebook, end - suffix))
                }
            };
            let mut stopped = None;
            for t in 1..=end {
                let x = if t >= nu && t < nu + n {
                    codeword[(t - nu) as usize]
                } else {
                    star
                };
                let y = self.samplers[x].sample(&mut ch);
                if let Some(d) = dec.observe(t, y) {
                    stopped = Some((t, d));
                    break;
                }
            }
            stopped.unwrap_or((end, Decision::Random))
        };

        let mut pick = stream(seed, mm, trial, Purpose::Decision);
        let decoded = match decision {
            Decision::Message(d) => d,
            Decision::Tied(v) => v[below(&mut pick, v.len() as u64) as usize],
            Decision::Random => below(&mut pick, self.cfg.messages as u64) as usize,
        };
        TrialOutcome { decoded, tau, nu }
    }

    pub fn run(&self) -> Result<SimResult> {
        let (mm, trials) = (self.cfg.messages, self.cfg.trials);
        let work = || -> Vec<TrialOutcome> {
            (0..mm * trials)
                .into_par_iter()
                .map(|i| self.trial(i / trials, (i % trials) as u64))
                .collect()
        };
        let outcomes = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(work);
        Ok(self.aggregate(&outcomes))
    }

    fn aggregate(&self, outcomes: &[TrialOutcome]) -> SimResult {
        let (mm, trials) = (self.cfg.messages, self.cfg.trials);
        let n = self.cfg.n as u64;
        let mut errors = vec![0u64; mm];
        let mut delays = vec![0u128; mm];
        let (mut false_alarms, mut misses) = (0u64, 0u64);
        for (i, o) in outcomes.iter().enumerate() {
            let m = i / trials;
            errors[m] += u64::from(o.decoded != m);
            delays[m] += u128::from(o.delay());
            false_alarms += u64::from(o.tau < o.nu);
            misses += u64::from(o.tau >= o.nu + 2 * n);
        }
        let t = trials as f64;
        let total = (mm * trials) as f64;
        let per_message: Vec<f64> = errors.iter().map(|&e| e as f64 / t).collect();
        let max_error = per_message.iter().copied().fold(0.0, f64::max);
        let delay = delays.iter().map(|&d| d as f64 / t).fold(0.0, f64::max);
        SimResult {
            max_error_rate: max_error,
            avg_error_rate: errors.iter().sum::<u64>() as f64 / total,
            mean_reaction_delay: delay,
            empirical_rate: (mm as f64).ln() / delay,
            false_alarm_rate: false_alarms as f64 / total,
            miss_rate: misses as f64 / total,
            trials_per_message: trials,
            ci_halfwidth: 1.96 * (max_error * (1.0 - max_error) / t).sqrt(),
            per_message_error_rate: per_message,
            async_level: self.async_level,
            async_level_clamped: self.cfg.async_level().1,
            preamble_len: self.codebook.preamble_len,
        }
    }
}

/// Builds the codebook for `cfg` and runs every trial.
pub fn run_experiment(q: &Channel, cfg: &SimConfig) -> Result<SimResult> {
    Experiment::new(q, cfg)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> Channel {
        Channel::bsc(0.1, 0).unwrap()
    }

    #[test]
    fn config_conflicts() {
        let q = fig3();
        let mut c = SimConfig::new(Scheme::Genie, 10, 0.0, 2, 5, 0);
        assert!(c.validate(&q).is_ok());
        c.eta = Some(0.5);
        assert!(matches!(c.validate(&q), Err(Error::InvalidConfig(_))));
        let mut t = SimConfig::new(Scheme::Training, 10, 0.0, 2, 5, 0);
        assert!(t.validate(&q).is_err());
        t.eta = Some(1.0);
        assert!(t.validate(&q).is_err());
        t.eta = Some(0.5);
        assert!(t.validate(&q).is_ok());
        t.mu = Some(0.1);
        assert!(t.validate(&q).is_err());
        assert!(SimConfig::new(Scheme::Joint, 10, 0.0, 1, 5, 0).validate(&q).is_err());
    }

    #[test]
    fn async_level_clamps() {
        let mut c = SimConfig::new(Scheme::Genie, 200, 0.05, 2, 1, 0);
        assert_eq!(c.async_level(), (22026, false));
        c.alpha = 1.5;
        c.max_async_level = 1000;
        assert_eq!(c.async_level(), (1000, true));
        c.alpha = 0.0;
        assert_eq!(c.async_level(), (1, false));
    }

    #[test]
    fn genie_at_a1_has_delay_n() {
        let q = fig3();
        let c = SimConfig::new(Scheme::Genie, 20, 0.0, 4, 50, 3);
        let r = run_experiment(&q, &c).unwrap();
        assert_eq!(r.mean_reaction_delay, 20.0);
        assert_eq!(r.empirical_rate, 4f64.ln() / 20.0);
        assert_eq!(r.false_alarm_rate, 0.0);
    }

    #[test]
    fn reproducible() {
        let q = fig3();
        let c = SimConfig::new(Scheme::Joint, 30, 0.1, 2, 1, 9);
        assert_eq!(run_experiment(&q, &c).unwrap(), run_experiment(&q, &c).unwrap());
    }

    #[test]
    fn noiseless_joint_is_error_free() {
        let q = Channel::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 0).unwrap();
        let mut c = SimConfig::new(Scheme::Joint, 12, 0.3, 3, 40, 1);
        c.input_dist = Some(Dist::new(vec![0.0, 0.5, 0.5]).unwrap());
        c.mu = Some(0.01);
        let exp = Experiment::new(&q, &c).unwrap();
        let cw = &exp.codebook().codewords;
        assert!(cw[0] != cw[1] && cw[1] != cw[2] && cw[0] != cw[2]);
        let r = exp.run().unwrap();
        assert_eq!(r.max_error_rate, 0.0);
        assert_eq!(r.mean_reaction_delay, 12.0);
    }

    #[test]
    fn tau_never_exceeds_stream_end() {
        let q = fig3();
        for scheme in [Scheme::Joint, Scheme::Training] {
            let mut c = SimConfig::new(scheme, 16, 0.4, 2, 30, 5);
            if scheme == Scheme::Training {
                c.eta = Some(0.5);
            }
            let exp = Experiment::new(&q, &c).unwrap();
            let a = exp.async_level();
            for k in 0..30 {
                let o = exp.trial(1, k);
                assert!(o.tau <= a + 15 && o.nu >= 1 && o.nu <= a);
            }
        }
    }
}
