//! Parameter sweeps over chain length and over correlated-noise parameters.

use pulsechain::analytic::{
    averaged_fidelity, closed_form_q0_pulse, closed_form_q1_pulse, closed_form_q1_time_published,
    correlated_moments, independent_moments, ClosedFormVariant,
};
use pulsechain::chain::ChainSpec;
use pulsechain::montecarlo::{estimate, estimate_paired, EstimateOptions};
use pulsechain::noise::{
    IndependentUniformModel, NoiseModel, SamplingMode, Target, ThreeValueCorrelatedModel,
};

use crate::config::{SweepCorrelationConfig, SweepLengthConfig};
use crate::error::Result;
use crate::output::{num, Csv};

pub const LENGTH_COLUMNS: [&str; 8] = [
    "epsilon",
    "K",
    "N",
    "F_analytic",
    "F_mc",
    "se_mc",
    "F_mc_tau_exact",
    "se_tau_exact",
];

/// One row per `(eps, K)` with `eps_theta = eps_tau = eps`. `F_mc` samples
/// independent triangular differences; `F_mc_tau_exact` samples the offsets
/// directly, on the same random numbers.
pub fn sweep_length(cfg: &SweepLengthConfig) -> Result<String> {
    let mut csv = Csv::new(cfg);
    csv.header(&LENGTH_COLUMNS);
    let options = EstimateOptions::default();
    for &eps in &cfg.eps {
        for k in cfg.k..=cfg.k_max {
            let spec = ChainSpec::new(k);
            let analytic = averaged_fidelity(&independent_moments(eps, eps, k));
            let mut row = vec![
                num(eps),
                k.to_string(),
                spec.sites().to_string(),
                num(analytic),
            ];
            if cfg.mc {
                let model = IndependentUniformModel::new(eps, eps, SamplingMode::DeltaIndependent)?;
                let paired = estimate_paired(
                    &spec,
                    &model,
                    cfg.samples,
                    cfg.seed,
                    SamplingMode::DeltaIndependent,
                    SamplingMode::TauExact,
                    &options,
                )?;
                row.extend([
                    num(paired.a.mean_f),
                    num(paired.a.se_f),
                    num(paired.b.mean_f),
                    num(paired.b.se_f),
                ]);
            } else {
                row.extend(std::iter::repeat_n(String::new(), 4));
            }
            csv.row(&row);
        }
    }
    Ok(csv.finish())
}

/// Printed closed form for the row, where one exists.
pub fn published_value(target: Target, eps: f64, p: f64, q: f64, k: usize) -> Option<f64> {
    match target {
        Target::Pulses if q == 1.0 => Some(closed_form_q1_pulse(eps, p, k)),
        Target::Pulses if q == 0.0 => Some(closed_form_q0_pulse(
            eps,
            p,
            k,
            ClosedFormVariant::Published,
        )),
        Target::Times if q == 1.0 => Some(closed_form_q1_time_published(eps, p)),
        _ => None,
    }
}

/// One row per `(q, p)`, `q` outermost.
pub fn sweep_correlation(cfg: &SweepCorrelationConfig) -> Result<String> {
    let mut csv = Csv::new(cfg);
    let mut columns = vec!["q", "p", "F_matrix", "F_mc", "se_mc"];
    if cfg.paper_verbatim {
        columns.push("F_paper");
    }
    csv.header(&columns);
    let spec = ChainSpec::new(cfg.k);
    let options = EstimateOptions::default();
    for &q in &cfg.q {
        for &p in &cfg.p {
            let matrix = averaged_fidelity(&correlated_moments(cfg.target, cfg.eps, p, q, cfg.k)?);
            let mut row = vec![num(q), num(p), num(matrix)];
            if cfg.mc {
                let model = NoiseModel::Correlated(ThreeValueCorrelatedModel::new(
                    cfg.eps, p, q, cfg.target,
                )?);
                let e = estimate(&spec, &model, cfg.samples, cfg.seed, &options)?;
                row.extend([num(e.mean_f), num(e.se_f)]);
            } else {
                row.extend([String::new(), String::new()]);
            }
            if cfg.paper_verbatim {
                row.push(
                    published_value(cfg.target, cfg.eps, p, q, cfg.k)
                        .map(num)
                        .unwrap_or_default(),
                );
            }
            csv.row(&row);
        }
    }
    Ok(csv.finish())
}
