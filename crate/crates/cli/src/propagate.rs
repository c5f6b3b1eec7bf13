//! Final amplitudes of a single noise realization.

use pulsechain::chain::{self, AmplitudeState, ChainSpec, NoiseRealization};
use pulsechain::noise::{sample_independent, IndependentUniformModel, SeedSpec};
use pulsechain::readout::input_averaged_fidelity;

use crate::config::PropagateConfig;
use crate::error::Result;
use crate::output::{num, Csv};

/// The realization described by `cfg`: explicit lists if any were given,
/// otherwise sample 0 of the independent model under `seed`.
pub fn realization(cfg: &PropagateConfig) -> Result<NoiseRealization> {
    let spec = ChainSpec::new(cfg.k);
    if cfg.theta.is_some() || cfg.tau.is_some() {
        let theta = cfg
            .theta
            .clone()
            .unwrap_or_else(|| vec![0.0; spec.num_pulses()]);
        let tau = cfg
            .tau
            .clone()
            .unwrap_or_else(|| vec![0.0; spec.num_segments()]);
        return Ok(NoiseRealization::new(&spec, tau, theta)?);
    }
    let model = IndependentUniformModel::new(cfg.eps_theta, cfg.eps_tau, cfg.mode)?;
    Ok(sample_independent(
        &model,
        &spec,
        &SeedSpec::new(cfg.seed, 0),
    ))
}

pub fn propagate(cfg: &PropagateConfig) -> Result<String> {
    let spec = ChainSpec::new(cfg.k);
    let noise = realization(cfg)?;
    let out = chain::propagate(&spec, &noise, &AmplitudeState::basis(&spec, 1))?;
    let raw = out.amplitude(spec.sites());
    let corrected = raw * spec.protocol_sign();

    let mut csv = Csv::new(cfg);
    let list = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ");
    csv.comment(&format!("theta = {}", list(&noise.theta)));
    csv.comment(&format!("tau = {}", list(&noise.tau)));
    csv.comment(&format!("psi_N_raw = {} {}", num(raw.re), num(raw.im)));
    csv.comment(&format!(
        "psi_N_corrected = {} {}",
        num(corrected.re),
        num(corrected.im)
    ));
    csv.comment(&format!(
        "F_averaged = {}",
        num(input_averaged_fidelity(corrected)?)
    ));
    csv.header(&["site", "re", "im", "modulus_sq"]);
    for (i, a) in out.as_slice().iter().enumerate() {
        csv.row(&[(i + 1).to_string(), num(a.re), num(a.im), num(a.norm_sqr())]);
    }
    Ok(csv.finish())
}
