//! Exact single-excitation dynamics of the virtual chain.
//!
//! The virtual basis has `N = 3K + 4` states. Free evolution over a segment
//! of duration `t` is block diagonal: `exp(-i t sqrt(2) sigma_x)` on the two
//! end blocks and `exp(-2 i t S_x)` on each of the `K` three-site blocks. A
//! pulse layer couples the last state of each block to the first state of the
//! next one, leaving the apex states `3i + 1` untouched.
//!
//! Everything here works block by block on an amplitude slice; no dense
//! `N x N` operator is ever built.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Geometry of a chain with `k` three-site sub-chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainSpec {
    k: usize,
}

impl ChainSpec {
    pub fn new(k: usize) -> Self {
        Self { k }
    }

    /// Builds the spec from a site count, which must be of the form `3K + 4`.
    pub fn from_sites(n: usize) -> Result<Self> {
        if n < 4 || !(n - 4).is_multiple_of(3) {
            return Err(Error::InvalidState(format!(
                "site count {n} is not of the form 3K+4"
            )));
        }
        Ok(Self::new((n - 4) / 3))
    }

    /// Number of three-site sub-chains.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of sites `N = 3K + 4`.
    pub fn sites(&self) -> usize {
        3 * self.k + 4
    }

    pub fn num_pulses(&self) -> usize {
        self.k + 1
    }

    pub fn num_segments(&self) -> usize {
        self.k + 2
    }

    /// Block sizes in chain order: `[2, 3, ..., 3, 2]`.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.num_segments());
        sizes.push(2);
        sizes.extend(std::iter::repeat_n(3, self.k));
        sizes.push(2);
        sizes
    }

    /// 1-based indices of the apex states `{3i + 1 : i = 0..=K+1}`.
    pub fn apex_indices(&self) -> Vec<usize> {
        (0..=self.k + 1).map(|i| 3 * i + 1).collect()
    }

    /// Sign `(-1)^(K+1)` acquired by the excitation in the noiseless protocol.
    pub fn protocol_sign(&self) -> f64 {
        if self.k.is_multiple_of(2) {
            -1.0
        } else {
            1.0
        }
    }
}

/// Absolute pulse times and final readout time.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pulse_times: Vec<f64>,
    final_time: f64,
}

impl Schedule {
    /// Validates that all times are finite and strictly increasing from zero.
    pub fn new(pulse_times: Vec<f64>, final_time: f64) -> Result<Self> {
        let schedule = Self {
            pulse_times,
            final_time,
        };
        for (i, d) in schedule.durations().into_iter().enumerate() {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::NonMonotoneSchedule {
                    segment: i + 1,
                    duration: d,
                });
            }
        }
        Ok(schedule)
    }

    pub fn pulse_times(&self) -> &[f64] {
        &self.pulse_times
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    /// Segment durations `t1, t2 - t1, ..., tf - t_{K+1}`.
    pub fn durations(&self) -> Vec<f64> {
        let mut prev = 0.0;
        let mut out = Vec::with_capacity(self.pulse_times.len() + 1);
        for &t in self
            .pulse_times
            .iter()
            .chain(std::iter::once(&self.final_time))
        {
            out.push(t - prev);
            prev = t;
        }
        out
    }
}

/// One draw of the control noise: `K + 2` timing offsets and `K + 1` pulse angles.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub tau: Vec<f64>,
    pub theta: Vec<f64>,
}

impl NoiseRealization {
    pub fn new(spec: &ChainSpec, tau: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        let noise = Self { tau, theta };
        noise.check(spec)?;
        Ok(noise)
    }

    pub fn zero(spec: &ChainSpec) -> Self {
        Self {
            tau: vec![0.0; spec.num_segments()],
            theta: vec![0.0; spec.num_pulses()],
        }
    }

    pub fn check(&self, spec: &ChainSpec) -> Result<()> {
        if self.tau.len() != spec.num_segments() {
            return Err(Error::LengthMismatch {
                what: "tau offsets",
                expected: spec.num_segments(),
                actual: self.tau.len(),
            });
        }
        if self.theta.len() != spec.num_pulses() {
            return Err(Error::LengthMismatch {
                what: "pulse angles",
                expected: spec.num_pulses(),
                actual: self.theta.len(),
            });
        }
        if let Some(v) = self.tau.iter().chain(&self.theta).find(|v| !v.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite noise value {v}")));
        }
        Ok(())
    }
}

/// Complex amplitudes over the virtual basis (vacuum component excluded).
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    amplitudes: Vec<Complex64>,
}

impl AmplitudeState {
    /// Accepts any vector of unit norm (within 1e-10).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self { amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// The basis state `|site>`, 1-based.
    pub fn basis(spec: &ChainSpec, site: usize) -> Self {
        assert!(
            (1..=spec.sites()).contains(&site),
            "site {site} outside 1..={}",
            spec.sites()
        );
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); spec.sites()];
        amplitudes[site - 1] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitude on `site`, 1-based.
    pub fn amplitude(&self, site: usize) -> Complex64 {
        self.amplitudes[site - 1]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Times of the noiseless protocol.
pub fn ideal_schedule(spec: &ChainSpec) -> Schedule {
    let first = PI / (2.0 * SQRT_2);
    let pulse_times = (0..spec.num_pulses())
        .map(|j| first + j as f64 * PI / 2.0)
        .collect();
    Schedule {
        pulse_times,
        final_time: PI / SQRT_2 + spec.k() as f64 * PI / 2.0,
    }
}

/// Ideal times shifted by the realization's offsets: `t_j + tau_j`, `t_f + tau_{K+2}`.
pub fn noisy_schedule(spec: &ChainSpec, noise: &NoiseRealization) -> Result<Schedule> {
    noise.check(spec)?;
    let ideal = ideal_schedule(spec);
    let pulse_times = ideal
        .pulse_times
        .iter()
        .zip(&noise.tau)
        .map(|(t, tau)| t + tau)
        .collect();
    let final_time = ideal.final_time + noise.tau[spec.num_segments() - 1];
    Schedule::new(pulse_times, final_time)
}

/// `exp(-i t sqrt(2) sigma_x)`.
pub fn two_site_block(t: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (SQRT_2 * t).sin_cos();
    let diag = Complex64::new(c, 0.0);
    let off = Complex64::new(0.0, -s);
    [[diag, off], [off, diag]]
}

/// `exp(-2 i t S_x)` with `S_x` the spin-1 x operator.
pub fn three_site_block(t: f64) -> [[Complex64; 3]; 3] {
    let (s, c) = (2.0 * t).sin_cos();
    let corner_same = Complex64::new((1.0 + c) / 2.0, 0.0);
    let corner_cross = Complex64::new((c - 1.0) / 2.0, 0.0);
    let off = Complex64::new(0.0, -s * FRAC_1_SQRT_2);
    let centre = Complex64::new(c, 0.0);
    [
        [corner_same, off, corner_cross],
        [off, centre, off],
        [corner_cross, off, corner_same],
    ]
}

/// Noisy pulse on one pair: `[[i sin theta, cos theta], [cos theta, i sin theta]]`.
pub fn pulse_block(theta: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    let diag = Complex64::new(0.0, s);
    let off = Complex64::new(c, 0.0);
    [[diag, off], [off, diag]]
}

fn apply2(m: &[[Complex64; 2]; 2], v: &mut [Complex64]) {
    let (a, b) = (v[0], v[1]);
    v[0] = m[0][0] * a + m[0][1] * b;
    v[1] = m[1][0] * a + m[1][1] * b;
}

fn apply3(m: &[[Complex64; 3]; 3], v: &mut [Complex64]) {
    let (a, b, c) = (v[0], v[1], v[2]);
    for (row, out) in m.iter().zip(v.iter_mut()) {
        *out = row[0] * a + row[1] * b + row[2] * c;
    }
}

/// Applies free evolution over `duration` in place.
///
/// Panics if `amplitudes.len()` differs from the site count.
pub fn apply_segment(spec: &ChainSpec, duration: f64, amplitudes: &mut [Complex64]) {
    assert_eq!(amplitudes.len(), spec.sites(), "amplitude length");
    let n = spec.sites();
    let two = two_site_block(duration);
    apply2(&two, &mut amplitudes[0..2]);
    if spec.k() > 0 {
        let three = three_site_block(duration);
        for block in amplitudes[2..n - 2].chunks_exact_mut(3) {
            apply3(&three, block);
        }
    }
    apply2(&two, &mut amplitudes[n - 2..n]);
}

/// Applies the pulse layer with angles `theta` (length `K + 1`) in place.
///
/// Panics on length mismatch.
pub fn apply_pulse_layer(spec: &ChainSpec, theta: &[f64], amplitudes: &mut [Complex64]) {
    assert_eq!(amplitudes.len(), spec.sites(), "amplitude length");
    assert_eq!(theta.len(), spec.num_pulses(), "pulse angle count");
    for (n, &angle) in theta.iter().enumerate() {
        // 1-based pair (3n+2, 3n+3)
        let start = 3 * n + 1;
        apply2(&pulse_block(angle), &mut amplitudes[start..start + 2]);
    }
}

/// Applies the global pulse `P(angle)`: the same angle on every pair.
pub fn apply_global_pulse(spec: &ChainSpec, angle: f64, amplitudes: &mut [Complex64]) {
    assert_eq!(amplitudes.len(), spec.sites(), "amplitude length");
    let block = pulse_block(angle);
    for n in 0..spec.num_pulses() {
        let start = 3 * n + 1;
        apply2(&block, &mut amplitudes[start..start + 2]);
    }
}

/// `U(d_{K+2}) P(theta_{K+1}) ... P(theta_1) U(d_1)` applied to `amplitudes`.
pub fn apply_protocol(
    spec: &ChainSpec,
    schedule: &Schedule,
    theta: &[f64],
    amplitudes: &mut [Complex64],
) {
    let durations = schedule.durations();
    assert_eq!(durations.len(), spec.num_segments(), "segment count");
    assert_eq!(theta.len(), spec.num_pulses(), "pulse angle count");
    let (last, rest) = durations.split_last().expect("at least two segments");
    for (&d, &angle) in rest.iter().zip(theta) {
        apply_segment(spec, d, amplitudes);
        apply_global_pulse(spec, angle, amplitudes);
    }
    apply_segment(spec, *last, amplitudes);
}

/// Full propagation of `initial` through the noisy protocol.
pub fn propagate(
    spec: &ChainSpec,
    noise: &NoiseRealization,
    initial: &AmplitudeState,
) -> Result<AmplitudeState> {
    if initial.len() != spec.sites() {
        return Err(Error::LengthMismatch {
            what: "initial state",
            expected: spec.sites(),
            actual: initial.len(),
        });
    }
    let schedule = noisy_schedule(spec, noise)?;
    let mut amplitudes = initial.amplitudes.clone();
    apply_protocol(spec, &schedule, &noise.theta, &mut amplitudes);
    Ok(AmplitudeState { amplitudes })
}

/// `<N| U |1>` by full propagation.
pub fn last_amplitude(spec: &ChainSpec, noise: &NoiseRealization) -> Result<Complex64> {
    let out = propagate(spec, noise, &AmplitudeState::basis(spec, 1))?;
    Ok(out.amplitude(spec.sites()))
}

/// Last amplitude with the deterministic `(-1)^(K+1)` protocol phase removed.
///
/// Real up to rounding; `+1` for the noiseless protocol.
pub fn corrected_psi_n(spec: &ChainSpec, noise: &NoiseRealization) -> Result<f64> {
    Ok(corrected_psi_n_complex(spec, noise)?.re)
}

/// As [`corrected_psi_n`] but keeping the (rounding-level) imaginary part.
pub fn corrected_psi_n_complex(spec: &ChainSpec, noise: &NoiseRealization) -> Result<Complex64> {
    Ok(last_amplitude(spec, noise)? * spec.protocol_sign())
}

/// Pulse factor `prod cos(theta_i)`.
pub fn pulse_factor(theta: &[f64]) -> f64 {
    theta.iter().map(|t| t.cos()).product()
}

/// Timing factor: `cos(sqrt2 tau_1) prod_{i=2}^{K+1} (1 + cos 2(tau_i - tau_{i-1}))/2
/// * cos(sqrt2 (tau_{K+2} - tau_{K+1}))`.
pub fn timing_factor(tau: &[f64]) -> f64 {
    let m = tau.len();
    assert!(m >= 2, "timing factor needs at least two offsets");
    let mut value = (SQRT_2 * tau[0]).cos();
    for w in tau[..m - 1].windows(2) {
        value *= (1.0 + (2.0 * (w[1] - w[0])).cos()) / 2.0;
    }
    value * (SQRT_2 * (tau[m - 1] - tau[m - 2])).cos()
}

/// Sign-corrected last amplitude from the closed-form product, without
/// propagation. Fails exactly when [`propagate`] would.
pub fn product_psi_n(spec: &ChainSpec, noise: &NoiseRealization) -> Result<f64> {
    noisy_schedule(spec, noise)?;
    Ok(pulse_factor(&noise.theta) * timing_factor(&noise.tau))
}
