//! Stochastic control-noise models and their seeded samplers.
//!
//! Every sample owns its random streams: a stream is identified by
//! `(master seed, sample index, label)` and is derived with a counter-based
//! ChaCha generator, so the realization drawn for a given index never
//! depends on how samples are distributed over workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::chain::{ChainSpec, NoiseRealization};
use crate::error::{check_range, Error, Result};

/// Largest timing amplitude for which no independent-uniform draw can reorder
/// the pulses.
pub const SAFE_EPS_TAU: f64 = PI / (4.0 * SQRT_2);
/// Largest pulse-angle amplitude keeping every `cos(theta)` positive.
pub const SAFE_EPS_THETA: f64 = FRAC_PI_2;

/// How the timing offsets of the independent model are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// `tau_i` i.i.d. uniform; consecutive differences share a variable.
    TauExact,
    /// `tau_1` uniform, then independent triangular differences accumulated.
    DeltaIndependent,
}

/// Which stochastic process a correlated model drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Pulses,
    Times,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum StreamLabel {
    Pulse = 0x5055_4c53,
    Time = 0x5449_4d45,
}

/// Identifies the random streams of one Monte Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master: u64,
    pub index: u64,
}

impl SeedSpec {
    pub fn new(master: u64, index: u64) -> Self {
        Self { master, index }
    }

    /// Independent generator for `(master, index, label)`.
    pub fn stream(&self, label: StreamLabel) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.master ^ splitmix64(label as u64)));
        rng.set_stream(self.index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform pulse-angle and timing noise, all variables independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndependentUniformModel {
    pub eps_theta: f64,
    pub eps_tau: f64,
    pub mode: SamplingMode,
}

impl IndependentUniformModel {
    /// Amplitudes must be finite and non-negative. Values beyond the safe
    /// ranges are accepted; draws that break the schedule are then rejected
    /// downstream.
    pub fn new(eps_theta: f64, eps_tau: f64, mode: SamplingMode) -> Result<Self> {
        check_range("eps_theta", eps_theta, 0.0, f64::MAX, "[0, inf)")?;
        check_range("eps_tau", eps_tau, 0.0, f64::MAX, "[0, inf)")?;
        Ok(Self {
            eps_theta,
            eps_tau,
            mode,
        })
    }

    pub fn is_within_safe_range(&self) -> bool {
        self.eps_theta < SAFE_EPS_THETA && self.eps_tau < SAFE_EPS_TAU
    }
}

/// Three-value noise `{+eps, 0, -eps}` with marginal `(p, 1-2p, p)` and
/// one-step correlation `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeValueCorrelatedModel {
    pub eps: f64,
    pub p: f64,
    pub q: f64,
    pub target: Target,
}

impl ThreeValueCorrelatedModel {
    pub fn new(eps: f64, p: f64, q: f64, target: Target) -> Result<Self> {
        check_range("eps", eps, 0.0, f64::MAX, "[0, inf)")?;
        check_range("p", p, 0.0, 0.5, "[0, 1/2]")?;
        check_range("q", q, 0.0, 1.0, "[0, 1]")?;
        Ok(Self { eps, p, q, target })
    }

    /// State values in transfer-matrix order `(+eps, 0, -eps)`.
    pub fn values(&self) -> [f64; 3] {
        [self.eps, 0.0, -self.eps]
    }

    /// Marginal law over `(+eps, 0, -eps)`.
    pub fn marginal(&self) -> [f64; 3] {
        [self.p, 1.0 - 2.0 * self.p, self.p]
    }

    fn draw_marginal<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u < self.p {
            self.eps
        } else if u < 2.0 * self.p {
            -self.eps
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    Independent(IndependentUniformModel),
    Correlated(ThreeValueCorrelatedModel),
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel::Independent(IndependentUniformModel {
            eps_theta: 0.0,
            eps_tau: 0.0,
            mode: SamplingMode::TauExact,
        })
    }

    /// Draws the full realization for one sample.
    pub fn sample(&self, spec: &ChainSpec, seed: &SeedSpec) -> NoiseRealization {
        match self {
            NoiseModel::Independent(m) => sample_independent(m, spec, seed),
            NoiseModel::Correlated(m) => {
                let mut noise = NoiseRealization::zero(spec);
                match m.target {
                    Target::Pulses => noise.theta = sample_correlated(m, spec.num_pulses(), seed),
                    Target::Times => noise.tau = sample_correlated(m, spec.num_segments(), seed),
                }
                noise
            }
        }
    }
}

fn symmetric_uniform<R: Rng>(rng: &mut R, eps: f64) -> f64 {
    eps * (2.0 * rng.random::<f64>() - 1.0)
}

/// One realization of the independent uniform model.
///
/// Pulse angles come from the pulse stream and timing offsets from the time
/// stream, so both sampling modes see the same angles and the same `tau_1`
/// for a given seed.
pub fn sample_independent(
    model: &IndependentUniformModel,
    spec: &ChainSpec,
    seed: &SeedSpec,
) -> NoiseRealization {
    let mut noise = NoiseRealization::zero(spec);
    if model.eps_theta > 0.0 {
        let mut rng = seed.stream(StreamLabel::Pulse);
        for theta in noise.theta.iter_mut() {
            *theta = symmetric_uniform(&mut rng, model.eps_theta);
        }
    }
    if model.eps_tau > 0.0 {
        let eps = model.eps_tau;
        let mut rng = seed.stream(StreamLabel::Time);
        noise.tau[0] = symmetric_uniform(&mut rng, eps);
        match model.mode {
            SamplingMode::TauExact => {
                for tau in noise.tau[1..].iter_mut() {
                    *tau = symmetric_uniform(&mut rng, eps);
                }
            }
            SamplingMode::DeltaIndependent => {
                for i in 1..noise.tau.len() {
                    // difference of two independent uniforms: triangular on [-2eps, 2eps]
                    let delta = symmetric_uniform(&mut rng, eps) - symmetric_uniform(&mut rng, eps);
                    noise.tau[i] = noise.tau[i - 1] + delta;
                }
            }
        }
    }
    noise
}

/// Markov sequence of `length` values: the first from the marginal, each next
/// one a copy of its predecessor with probability `q`, otherwise a fresh
/// marginal draw.
pub fn sample_correlated(
    model: &ThreeValueCorrelatedModel,
    length: usize,
    seed: &SeedSpec,
) -> Vec<f64> {
    if model.p == 0.0 || model.eps == 0.0 || length == 0 {
        return vec![0.0; length];
    }
    let label = match model.target {
        Target::Pulses => StreamLabel::Pulse,
        Target::Times => StreamLabel::Time,
    };
    let mut rng = seed.stream(label);
    sample_markov(model, length, &mut rng)
}

pub fn sample_markov<R: Rng>(
    model: &ThreeValueCorrelatedModel,
    length: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(length);
    if length == 0 {
        return out;
    }
    let mut current = model.draw_marginal(rng);
    out.push(current);
    for _ in 1..length {
        let stay: f64 = rng.random();
        if stay >= model.q {
            current = model.draw_marginal(rng);
        }
        out.push(current);
    }
    out
}

/// Density of the difference of two independent uniforms on `[-eps, eps]`.
pub fn triangular_density(delta: f64, eps: f64) -> Result<f64> {
    if eps == 0.0 {
        return Err(Error::DegenerateWidth);
    }
    check_range("eps", eps, 0.0, f64::MAX, "(0, inf)")?;
    Ok(((2.0 * eps - delta.abs()) / (4.0 * eps * eps)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulses(eps: f64, p: f64, q: f64) -> ThreeValueCorrelatedModel {
        ThreeValueCorrelatedModel::new(eps, p, q, Target::Pulses).unwrap()
    }

    #[test]
    fn zero_amplitudes_give_zero_realization() {
        let spec = ChainSpec::new(5);
        for mode in [SamplingMode::TauExact, SamplingMode::DeltaIndependent] {
            let m = IndependentUniformModel::new(0.0, 0.0, mode).unwrap();
            assert_eq!(
                sample_independent(&m, &spec, &SeedSpec::new(7, 3)),
                NoiseRealization::zero(&spec)
            );
        }
    }

    #[test]
    fn sampling_is_reproducible_and_stream_separated() {
        let spec = ChainSpec::new(4);
        let m = IndependentUniformModel::new(0.1, 0.2, SamplingMode::TauExact).unwrap();
        let a = sample_independent(&m, &spec, &SeedSpec::new(42, 9));
        let b = sample_independent(&m, &spec, &SeedSpec::new(42, 9));
        assert_eq!(a, b);
        let c = sample_independent(&m, &spec, &SeedSpec::new(42, 10));
        assert_ne!(a, c);
        let d = sample_independent(&m, &spec, &SeedSpec::new(43, 9));
        assert_ne!(a, d);
        assert!(a.theta.iter().all(|t| t.abs() <= 0.1));
        assert!(a.tau.iter().all(|t| t.abs() <= 0.2));
    }

    #[test]
    fn modes_share_angles_and_first_offset() {
        let spec = ChainSpec::new(6);
        let exact = IndependentUniformModel::new(0.1, 0.2, SamplingMode::TauExact).unwrap();
        let delta = IndependentUniformModel {
            mode: SamplingMode::DeltaIndependent,
            ..exact
        };
        let seed = SeedSpec::new(1, 2);
        let a = sample_independent(&exact, &spec, &seed);
        let b = sample_independent(&delta, &spec, &seed);
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.tau[0], b.tau[0]);
        for w in b.tau.windows(2) {
            assert!((w[1] - w[0]).abs() <= 0.4 + 1e-15);
        }
    }

    #[test]
    fn model_validation() {
        assert!(IndependentUniformModel::new(-0.1, 0.0, SamplingMode::TauExact).is_err());
        assert!(IndependentUniformModel::new(0.0, f64::NAN, SamplingMode::TauExact).is_err());
        assert!(
            !IndependentUniformModel::new(0.1, 0.6, SamplingMode::TauExact)
                .unwrap()
                .is_within_safe_range()
        );
        assert!(
            IndependentUniformModel::new(0.1, 0.5, SamplingMode::TauExact)
                .unwrap()
                .is_within_safe_range()
        );
        assert!(ThreeValueCorrelatedModel::new(0.5, 0.6, 0.5, Target::Pulses).is_err());
        assert!(ThreeValueCorrelatedModel::new(0.5, 0.2, 1.5, Target::Pulses).is_err());
        assert!(ThreeValueCorrelatedModel::new(0.5, 0.2, -0.1, Target::Times).is_err());
        let m = pulses(0.3, 0.2, 0.4);
        assert_eq!(m.marginal().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn correlated_limits() {
        let m = pulses(0.5, 0.3, 1.0);
        for i in 0..50 {
            let seq = sample_correlated(&m, 20, &SeedSpec::new(11, i));
            assert!(seq.iter().all(|&x| x == seq[0]));
        }
        let m = pulses(0.5, 0.0, 0.4);
        for i in 0..50 {
            assert!(sample_correlated(&m, 20, &SeedSpec::new(11, i))
                .iter()
                .all(|&x| x == 0.0));
        }
        let m = pulses(0.5, 0.5, 0.0);
        let seq = sample_correlated(&m, 1000, &SeedSpec::new(3, 0));
        assert!(seq.iter().all(|&x| x == 0.5 || x == -0.5));
        let switches = seq.windows(2).filter(|w| w[0] != w[1]).count();
        // i.i.d. fair +-eps: about half of the steps switch
        assert!((400..600).contains(&switches), "{switches}");
    }

    #[test]
    fn correlated_one_step_statistics() {
        let (p, q) = (0.2, 0.6);
        let m = pulses(1.0, p, q);
        let n = 100_000u64;
        let (mut same, mut plus, mut zero, mut sum) = (0u64, 0u64, 0u64, 0.0);
        for i in 0..n {
            let seq = sample_correlated(&m, 3, &SeedSpec::new(5, i));
            if seq[2] == seq[1] {
                same += 1;
            }
            if seq[2] > 0.0 {
                plus += 1;
            } else if seq[2] == 0.0 {
                zero += 1;
            }
            sum += seq[2];
        }
        let nf = n as f64;
        let check = |count: u64, prob: f64| {
            let sd = (prob * (1.0 - prob) / nf).sqrt();
            let est = count as f64 / nf;
            assert!((est - prob).abs() < 3.0 * sd, "est {est} prob {prob}");
        };
        check(
            same,
            q + (1.0 - q) * (2.0 * p * p + (1.0 - 2.0 * p).powi(2)),
        );
        check(plus, p);
        check(zero, 1.0 - 2.0 * p);
        let sd_mean = (2.0 * p / nf).sqrt();
        assert!((sum / nf).abs() < 3.0 * sd_mean);
    }

    #[test]
    fn triangular_density_values() {
        let eps = 0.3;
        assert!((triangular_density(0.0, eps).unwrap() - 1.0 / (2.0 * eps)).abs() < 1e-15);
        assert_eq!(triangular_density(2.0 * eps, eps).unwrap(), 0.0);
        assert_eq!(triangular_density(-2.0 * eps, eps).unwrap(), 0.0);
        assert_eq!(triangular_density(1.0, eps).unwrap(), 0.0);
        assert_eq!(triangular_density(0.1, 0.0), Err(Error::DegenerateWidth));

        // piecewise-linear integrand: Simpson on each half is exact up to rounding
        let n = 2000;
        let h = 2.0 * eps / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * triangular_density(i as f64 * h, eps).unwrap();
        }
        let integral = 2.0 * acc * h / 3.0;
        assert!((integral - 1.0).abs() < 1e-10, "{integral}");
    }
}
