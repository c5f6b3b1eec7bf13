//! Monte Carlo estimates of the noise-averaged fidelity.
//!
//! Sample `i` draws its realization from streams keyed by `(seed, i)`.
//! Samples are grouped into fixed-size chunks; each chunk is reduced
//! sequentially and the chunk results are merged in index order, so the
//! estimate is bit-identical for any number of worker threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{self, ChainSpec};
use crate::error::{Error, Result};
use crate::noise::{
    sample_independent, IndependentUniformModel, NoiseModel, SamplingMode, SeedSpec,
};
use crate::readout::averaged_from_moments;

const CHUNK: u64 = 1024;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PULSECHAIN_THREADS";

/// Streaming mean/variance (Welford) with pairwise merging.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let wa = self.count as f64;
        let wb = other.count as f64;
        self.mean += delta * wb / n;
        self.m2 += other.m2 + delta * delta * wa * wb / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// How the transfer amplitude of each sample is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalPath {
    /// Closed-form product of pulse and timing factors.
    #[default]
    Product,
    /// Full block-wise propagation of `|1>`.
    Propagation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EstimateOptions {
    /// Worker threads; `None` reads [`THREADS_ENV`] and falls back to rayon's default.
    pub threads: Option<usize>,
    pub path: EvalPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityEstimate {
    /// Accepted samples.
    pub n_samples: u64,
    pub mean_f: f64,
    pub se_f: f64,
    pub mean_psi: f64,
    pub se_psi: f64,
    pub mean_sq_psi: f64,
    pub se_sq_psi: f64,
    /// Draws dropped because their schedule was not strictly increasing.
    pub n_rejected: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Accumulator {
    psi: RunningMoments,
    psi_sq: RunningMoments,
    fidelity: RunningMoments,
    rejected: u64,
}

impl Accumulator {
    fn push(&mut self, psi: f64) {
        let sq = psi * psi;
        self.psi.push(psi);
        self.psi_sq.push(sq);
        self.fidelity.push(averaged_from_moments(psi, sq));
    }

    fn merge(&mut self, other: &Accumulator) {
        self.psi.merge(&other.psi);
        self.psi_sq.merge(&other.psi_sq);
        self.fidelity.merge(&other.fidelity);
        self.rejected += other.rejected;
    }

    fn finish(&self) -> Result<FidelityEstimate> {
        if self.psi.count() == 0 {
            return Err(Error::AllSamplesRejected(self.rejected));
        }
        Ok(FidelityEstimate {
            n_samples: self.psi.count(),
            mean_f: self.fidelity.mean(),
            se_f: self.fidelity.standard_error(),
            mean_psi: self.psi.mean(),
            se_psi: self.psi.standard_error(),
            mean_sq_psi: self.psi_sq.mean(),
            se_sq_psi: self.psi_sq.standard_error(),
            n_rejected: self.rejected,
        })
    }
}

fn resolve_threads(requested: Option<usize>) -> Option<usize> {
    requested
        .or_else(|| std::env::var(THREADS_ENV).ok()?.trim().parse().ok())
        .filter(|&t| t > 0)
}

/// Runs `per_chunk` over index ranges in parallel and merges the results in
/// chunk order.
fn run_chunked<A, F>(n: u64, threads: Option<usize>, per_chunk: F) -> A
where
    A: Send + Default,
    F: Fn(std::ops::Range<u64>) -> A + Sync + Send,
    A: MergeInOrder,
{
    let chunks = n.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| per_chunk(c * CHUNK..((c + 1) * CHUNK).min(n)))
            .collect::<Vec<A>>()
    };
    let parts = match resolve_threads(threads) {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        },
        None => work(),
    };
    let mut total = A::default();
    for part in &parts {
        total.merge_in_order(part);
    }
    total
}

trait MergeInOrder {
    fn merge_in_order(&mut self, other: &Self);
}

impl MergeInOrder for Accumulator {
    fn merge_in_order(&mut self, other: &Self) {
        self.merge(other);
    }
}

fn amplitude(spec: &ChainSpec, noise: &chain::NoiseRealization, path: EvalPath) -> Result<f64> {
    match path {
        EvalPath::Product => chain::product_psi_n(spec, noise),
        EvalPath::Propagation => chain::corrected_psi_n(spec, noise),
    }
}

/// Estimates the averaged fidelity from `n` seeded realizations of `model`.
pub fn estimate(
    spec: &ChainSpec,
    model: &NoiseModel,
    n: u64,
    seed: u64,
    options: &EstimateOptions,
) -> Result<FidelityEstimate> {
    if n == 0 {
        return Err(Error::InvalidState(
            "sample count must be at least 1".into(),
        ));
    }
    let acc = run_chunked(n, options.threads, |range| {
        let mut acc = Accumulator::default();
        for i in range {
            let noise = model.sample(spec, &SeedSpec::new(seed, i));
            match amplitude(spec, &noise, options.path) {
                Ok(psi) => acc.push(psi),
                Err(Error::NonMonotoneSchedule { .. }) => acc.rejected += 1,
                Err(e) => unreachable!("sampled realization failed: {e}"),
            }
        }
        acc
    });
    acc.finish()
}

/// Two sampling modes of the same independent model run on common random
/// numbers, with statistics of the per-sample fidelity difference `a - b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedEstimate {
    pub a: FidelityEstimate,
    pub b: FidelityEstimate,
    pub gap_mean: f64,
    pub gap_se: f64,
    /// Samples accepted under both modes.
    pub n_paired: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct PairedAccumulator {
    a: Accumulator,
    b: Accumulator,
    gap: RunningMoments,
}

impl MergeInOrder for PairedAccumulator {
    fn merge_in_order(&mut self, other: &Self) {
        self.a.merge(&other.a);
        self.b.merge(&other.b);
        self.gap.merge(&other.gap);
    }
}

/// Estimates `model` under `mode_a` and `mode_b` with shared pulse angles and
/// shared first timing offset.
pub fn estimate_paired(
    spec: &ChainSpec,
    model: &IndependentUniformModel,
    n: u64,
    seed: u64,
    mode_a: SamplingMode,
    mode_b: SamplingMode,
    options: &EstimateOptions,
) -> Result<PairedEstimate> {
    if n == 0 {
        return Err(Error::InvalidState(
            "sample count must be at least 1".into(),
        ));
    }
    let model_a = IndependentUniformModel {
        mode: mode_a,
        ..*model
    };
    let model_b = IndependentUniformModel {
        mode: mode_b,
        ..*model
    };
    let acc = run_chunked(n, options.threads, |range| {
        let mut acc = PairedAccumulator::default();
        for i in range {
            let s = SeedSpec::new(seed, i);
            let fa = push_one(
                &mut acc.a,
                spec,
                &sample_independent(&model_a, spec, &s),
                options.path,
            );
            let fb = push_one(
                &mut acc.b,
                spec,
                &sample_independent(&model_b, spec, &s),
                options.path,
            );
            if let (Some(fa), Some(fb)) = (fa, fb) {
                acc.gap.push(fa - fb);
            }
        }
        acc
    });
    Ok(PairedEstimate {
        a: acc.a.finish()?,
        b: acc.b.finish()?,
        gap_mean: acc.gap.mean(),
        gap_se: acc.gap.standard_error(),
        n_paired: acc.gap.count(),
    })
}

fn push_one(
    acc: &mut Accumulator,
    spec: &ChainSpec,
    noise: &chain::NoiseRealization,
    path: EvalPath,
) -> Option<f64> {
    match amplitude(spec, noise, path) {
        Ok(psi) => {
            acc.push(psi);
            Some(averaged_from_moments(psi, psi * psi))
        }
        Err(_) => {
            acc.rejected += 1;
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_moments_match_two_pass() {
        let xs: Vec<f64> = (0..1000)
            .map(|i| ((i * 37) % 101) as f64 * 0.01 + 1e6)
            .collect();
        let mut r = RunningMoments::default();
        xs.iter().for_each(|&x| r.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((r.mean() - mean).abs() < 1e-9);
        assert!((r.variance() - var).abs() < 1e-9 * var);

        let mut left = RunningMoments::default();
        let mut right = RunningMoments::default();
        xs[..313].iter().for_each(|&x| left.push(x));
        xs[313..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        assert_eq!(left.count(), 1000);
        assert!((left.mean() - mean).abs() < 1e-9);
        assert!((left.variance() - var).abs() < 1e-9 * var);
    }

    #[test]
    fn noiseless_estimate_is_exact() {
        let spec = ChainSpec::new(6);
        for path in [EvalPath::Product, EvalPath::Propagation] {
            let opts = EstimateOptions {
                threads: Some(2),
                path,
            };
            let e = estimate(&spec, &NoiseModel::noiseless(), 3000, 1, &opts).unwrap();
            assert_eq!(e.mean_f, 1.0);
            assert_eq!((e.se_f, e.se_psi, e.se_sq_psi), (0.0, 0.0, 0.0));
            assert_eq!(e.n_samples, 3000);
            assert_eq!(e.n_rejected, 0);
        }
    }

    #[test]
    fn fidelity_mean_is_consistent_with_moments() {
        let spec = ChainSpec::new(3);
        let model = NoiseModel::Independent(
            IndependentUniformModel::new(0.3, 0.2, SamplingMode::TauExact).unwrap(),
        );
        let e = estimate(&spec, &model, 5000, 9, &EstimateOptions::default()).unwrap();
        assert!((e.mean_f - averaged_from_moments(e.mean_psi, e.mean_sq_psi)).abs() < 1e-12);
        assert!(e.se_f > 0.0);
    }

    #[test]
    fn rejections_are_counted() {
        let spec = ChainSpec::new(2);
        let model = NoiseModel::Independent(
            IndependentUniformModel::new(0.0, 1.0, SamplingMode::TauExact).unwrap(),
        );
        let e = estimate(&spec, &model, 4000, 3, &EstimateOptions::default()).unwrap();
        assert!(e.n_rejected > 0);
        assert_eq!(e.n_samples + e.n_rejected, 4000);

        let all_rejected = Accumulator {
            rejected: 100,
            ..Accumulator::default()
        };
        assert_eq!(all_rejected.finish(), Err(Error::AllSamplesRejected(100)));
    }

    #[test]
    fn zero_samples_rejected() {
        let spec = ChainSpec::new(0);
        assert!(estimate(
            &spec,
            &NoiseModel::noiseless(),
            0,
            0,
            &EstimateOptions::default()
        )
        .is_err());
    }

    #[test]
    fn paths_agree_per_sample() {
        let spec = ChainSpec::new(5);
        let model = NoiseModel::Independent(
            IndependentUniformModel::new(0.3, 0.3, SamplingMode::DeltaIndependent).unwrap(),
        );
        for i in 0..500 {
            let noise = model.sample(&spec, &SeedSpec::new(77, i));
            let a = amplitude(&spec, &noise, EvalPath::Product).unwrap();
            let b = amplitude(&spec, &noise, EvalPath::Propagation).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn paired_gap_vanishes_without_timing_noise() {
        let spec = ChainSpec::new(8);
        let model = IndependentUniformModel::new(0.2, 0.0, SamplingMode::TauExact).unwrap();
        let r = estimate_paired(
            &spec,
            &model,
            3000,
            5,
            SamplingMode::TauExact,
            SamplingMode::DeltaIndependent,
            &EstimateOptions::default(),
        )
        .unwrap();
        assert_eq!(r.gap_mean, 0.0);
        assert_eq!(r.gap_se, 0.0);
        assert_eq!(r.a, r.b);
    }
}
