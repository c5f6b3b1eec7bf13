//! Noise-averaged moments of the transfer amplitude without sampling.
//!
//! The sign-corrected amplitude factorises into a pulse factor
//! `prod cos(theta_i)` and a timing factor built from `cos(sqrt2 tau_1)`,
//! `(1 + cos 2 delta_i)/2` for the inner differences, and the final
//! `cos(sqrt2 delta_{K+2})`. Averages of products over uniform noise reduce
//! to powers of sinc kernels; over three-value Markov noise they reduce to
//! contractions of 3x3 transfer matrices.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::{check_range, Result};
use crate::noise::Target;
use crate::readout::averaged_from_moments;

/// First and second moments of the sign-corrected amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub mean_psi: f64,
    pub mean_sq_psi: f64,
}

impl MomentPair {
    pub fn fidelity(&self) -> f64 {
        averaged_fidelity(self)
    }

    /// Moments of a product of independent factors.
    pub fn product(&self, other: &MomentPair) -> MomentPair {
        MomentPair {
            mean_psi: self.mean_psi * other.mean_psi,
            mean_sq_psi: self.mean_sq_psi * other.mean_sq_psi,
        }
    }
}

/// `1/2 + <psi^2>/6 + <psi>/3`.
pub fn averaged_fidelity(m: &MomentPair) -> f64 {
    averaged_from_moments(m.mean_psi, m.mean_sq_psi)
}

/// `sin(x)/x`, continuous at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Moments of the pulse factor for i.i.d. uniform angles on `[-eps, eps]`.
pub fn independent_pulse_moments(eps_theta: f64, k: usize) -> MomentPair {
    let n = (k + 1) as i32;
    MomentPair {
        mean_psi: sinc(eps_theta).powi(n),
        mean_sq_psi: ((1.0 + sinc(2.0 * eps_theta)) / 2.0).powi(n),
    }
}

/// Moments of the timing factor when `tau_1` is uniform on `[-eps, eps]` and
/// the differences are independent triangular variables on `[-2eps, 2eps]`.
pub fn independent_timing_moments(eps_tau: f64, k: usize) -> MomentPair {
    let k = k as i32;
    let s_r2 = sinc(SQRT_2 * eps_tau);
    let s2 = sinc(2.0 * eps_tau);
    let s4 = sinc(4.0 * eps_tau);
    let s2r2 = sinc(2.0 * SQRT_2 * eps_tau);
    MomentPair {
        mean_psi: s_r2.powi(3) * ((1.0 + s2 * s2) / 2.0).powi(k),
        mean_sq_psi: (1.0 + s2r2) / 2.0 * (1.0 + s2r2 * s2r2) / 2.0
            * ((3.0 + 4.0 * s2 * s2 + s4 * s4) / 8.0).powi(k),
    }
}

/// Sign-corrected moments for independent uniform pulse and timing noise.
pub fn independent_moments(eps_theta: f64, eps_tau: f64, k: usize) -> MomentPair {
    independent_pulse_moments(eps_theta, k).product(&independent_timing_moments(eps_tau, k))
}

/// Which moment of the amplitude a kernel contributes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentOrder {
    First,
    Second,
}

impl MomentOrder {
    fn apply(self, x: f64) -> f64 {
        match self {
            MomentOrder::First => x,
            MomentOrder::Second => x * x,
        }
    }
}

type Mat3 = [[f64; 3]; 3];

/// Column-stochastic one-step transition matrix over `(+eps, 0, -eps)`:
/// entry `[a][b]` is the probability of moving to state `a` from state `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix {
    entries: Mat3,
    stationary: [f64; 3],
}

impl TransitionMatrix {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        check_range("p", p, 0.0, 0.5, "[0, 1/2]")?;
        check_range("q", q, 0.0, 1.0, "[0, 1]")?;
        let stationary = [p, 1.0 - 2.0 * p, p];
        let mut entries = [[0.0; 3]; 3];
        for (a, row) in entries.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                *e = (1.0 - q) * stationary[a] + if a == b { q } else { 0.0 };
            }
        }
        Ok(Self {
            entries,
            stationary,
        })
    }

    pub fn entries(&self) -> &Mat3 {
        &self.entries
    }

    pub fn stationary(&self) -> [f64; 3] {
        self.stationary
    }

    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        mat_vec(&self.entries, v)
    }
}

pub fn transition_matrix(p: f64, q: f64) -> Result<TransitionMatrix> {
    TransitionMatrix::new(p, q)
}

fn mat_vec(m: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

/// Weighting kernel of a transfer step: either diagonal `f(x)` or a
/// difference kernel `f(x - x')` combined entrywise with the transition matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentKernel {
    entries: Mat3,
}

impl MomentKernel {
    pub fn diagonal(values: [f64; 3], f: impl Fn(f64) -> f64) -> Self {
        let mut entries = [[0.0; 3]; 3];
        for i in 0..3 {
            entries[i][i] = f(values[i]);
        }
        Self { entries }
    }

    pub fn difference(values: [f64; 3], f: impl Fn(f64) -> f64) -> Self {
        let mut entries = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                entries[a][b] = f(values[a] - values[b]);
            }
        }
        Self { entries }
    }

    pub fn entries(&self) -> &Mat3 {
        &self.entries
    }

    /// Matrix product `F P`.
    fn times(&self, t: &TransitionMatrix) -> Mat3 {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| (0..3).map(|c| self.entries[a][c] * t.entries[c][b]).sum())
        })
    }

    /// Entrywise product `F o P`.
    fn hadamard(&self, t: &TransitionMatrix) -> Mat3 {
        std::array::from_fn(|a| std::array::from_fn(|b| self.entries[a][b] * t.entries[a][b]))
    }
}

fn three_values(eps: f64) -> [f64; 3] {
    [eps, 0.0, -eps]
}

/// `<prod_{i=1}^{K+1} f(theta_i)>` over the three-value Markov chain, with
/// `f = cos` (first order) or `cos^2` (second order).
///
/// Contracted as `(1,1,1) (F P)^K F |stationary>`, first pulse innermost.
pub fn correlated_pulse_moment(
    order: MomentOrder,
    eps: f64,
    p: f64,
    q: f64,
    k: usize,
) -> Result<f64> {
    check_range("eps", eps, 0.0, f64::MAX, "[0, inf)")?;
    let t = TransitionMatrix::new(p, q)?;
    let kernel = MomentKernel::diagonal(three_values(eps), |x| order.apply(x.cos()));
    let step = kernel.times(&t);
    let mut v = mat_vec(kernel.entries(), &t.stationary());
    for _ in 0..k {
        v = mat_vec(&step, &v);
    }
    Ok(v.iter().sum())
}

/// `<phi>` or `<phi^2>` for three-value Markov timing offsets
/// `tau_1 .. tau_{K+2}`.
///
/// The start weight is `cos(sqrt2 tau_1)` on the stationary law; each of the
/// `K` inner steps carries `(1 + cos 2(tau - tau'))/2` and the last step
/// `cos(sqrt2 (tau - tau'))`, each times the transition probability.
pub fn correlated_time_moment(
    order: MomentOrder,
    eps: f64,
    p: f64,
    q: f64,
    k: usize,
) -> Result<f64> {
    check_range("eps", eps, 0.0, f64::MAX, "[0, inf)")?;
    let t = TransitionMatrix::new(p, q)?;
    let values = three_values(eps);
    let start = MomentKernel::diagonal(values, |x| order.apply((SQRT_2 * x).cos()));
    let inner = MomentKernel::difference(values, |d| order.apply((1.0 + (2.0 * d).cos()) / 2.0))
        .hadamard(&t);
    let last = MomentKernel::difference(values, |d| order.apply((SQRT_2 * d).cos())).hadamard(&t);
    let mut v = mat_vec(start.entries(), &t.stationary());
    for _ in 0..k {
        v = mat_vec(&inner, &v);
    }
    v = mat_vec(&last, &v);
    Ok(v.iter().sum())
}

/// Moments of the sign-corrected amplitude when only `target` is noisy.
pub fn correlated_moments(
    target: Target,
    eps: f64,
    p: f64,
    q: f64,
    k: usize,
) -> Result<MomentPair> {
    let moment = match target {
        Target::Pulses => correlated_pulse_moment,
        Target::Times => correlated_time_moment,
    };
    Ok(MomentPair {
        mean_psi: moment(MomentOrder::First, eps, p, q, k)?,
        mean_sq_psi: moment(MomentOrder::Second, eps, p, q, k)?,
    })
}

/// Selects between the internally consistent form of a closed formula and
/// the form exactly as it appears in print.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ClosedFormVariant {
    #[default]
    Derived,
    Published,
}

/// Averaged fidelity for fully correlated (`q = 1`) three-value pulse noise:
/// `1 - p + p/3 [2 cos^{K+1} eps + cos^{2K+2} eps]`.
pub fn closed_form_q1_pulse(eps: f64, p: f64, k: usize) -> f64 {
    let c = eps.cos().powi((k + 1) as i32);
    1.0 - p + p / 3.0 * (2.0 * c + c * c)
}

/// Averaged fidelity for uncorrelated (`q = 0`) three-value pulse noise.
///
/// [`ClosedFormVariant::Derived`] pairs the `1/6` coefficient with the second
/// moment `<cos^2> = 1 - 2p sin^2 eps` and `1/3` with the first moment
/// `<cos> = 1 - 4p sin^2(eps/2)`. The published display has the two brackets
/// swapped.
pub fn closed_form_q0_pulse(eps: f64, p: f64, k: usize, variant: ClosedFormVariant) -> f64 {
    let n = (k + 1) as i32;
    let first = (1.0 - 4.0 * p * (eps / 2.0).sin().powi(2)).powi(n);
    let second = (1.0 - 2.0 * p * eps.sin().powi(2)).powi(n);
    match variant {
        ClosedFormVariant::Derived => 0.5 + second / 6.0 + first / 3.0,
        ClosedFormVariant::Published => 0.5 + first / 6.0 + second / 3.0,
    }
}

/// The published constant for fully correlated three-value timing noise,
/// `1 - (2p/3) sin^2(2 eps) (2 + sin^2(2 eps))`. Reported for comparison only;
/// it does not follow from the timing factor (see
/// [`correlated_time_q1_fidelity`]).
pub fn closed_form_q1_time_published(eps: f64, p: f64) -> f64 {
    let s2 = (2.0 * eps).sin().powi(2);
    1.0 - 2.0 * p / 3.0 * s2 * (2.0 + s2)
}

/// Averaged fidelity for fully correlated timing noise derived from the
/// timing factor: all offsets are equal, so only `cos(sqrt2 tau_1)` survives,
/// giving `1 - p/3 [2 (1 - cos sqrt2 eps) + sin^2(sqrt2 eps)]` for every K.
pub fn correlated_time_q1_fidelity(eps: f64, p: f64) -> f64 {
    let c = (SQRT_2 * eps).cos();
    1.0 - p / 3.0 * (2.0 * (1.0 - c) + (1.0 - c * c))
}

/// Longest sequence accepted by the enumeration functions.
pub const MAX_ENUMERATION_LENGTH: usize = 12;

/// Calls `visit` with every sequence over `(+eps, 0, -eps)` of `length` and
/// its joint probability under the one-step Markov law.
fn enumerate_sequences(
    eps: f64,
    p: f64,
    q: f64,
    length: usize,
    mut visit: impl FnMut(&[f64], f64),
) -> Result<()> {
    let t = TransitionMatrix::new(p, q)?;
    check_range("eps", eps, 0.0, f64::MAX, "[0, inf)")?;
    check_range(
        "sequence length",
        length as f64,
        1.0,
        MAX_ENUMERATION_LENGTH as f64,
        "[1, 12]",
    )?;
    let values = three_values(eps);
    let marginal = t.stationary();
    let mut idx = vec![0usize; length];
    let mut seq = vec![0.0; length];
    for code in 0..3usize.pow(length as u32) {
        let mut c = code;
        for (i, s) in idx.iter_mut().zip(seq.iter_mut()) {
            *i = c % 3;
            *s = values[*i];
            c /= 3;
        }
        let mut weight = marginal[idx[0]];
        for w in idx.windows(2) {
            weight *= t.entries()[w[1]][w[0]];
        }
        visit(&seq, weight);
    }
    Ok(())
}

/// Brute-force counterpart of [`correlated_pulse_moment`], summing over all
/// `3^{K+1}` angle sequences.
pub fn enumerated_pulse_moment(
    order: MomentOrder,
    eps: f64,
    p: f64,
    q: f64,
    k: usize,
) -> Result<f64> {
    let mut total = 0.0;
    enumerate_sequences(eps, p, q, k + 1, |theta, w| {
        total += w * order.apply(crate::chain::pulse_factor(theta));
    })?;
    Ok(total)
}

/// Brute-force counterpart of [`correlated_time_moment`], summing over all
/// `3^{K+2}` offset sequences.
pub fn enumerated_time_moment(
    order: MomentOrder,
    eps: f64,
    p: f64,
    q: f64,
    k: usize,
) -> Result<f64> {
    let mut total = 0.0;
    enumerate_sequences(eps, p, q, k + 2, |tau, w| {
        total += w * order.apply(crate::chain::timing_factor(tau));
    })?;
    Ok(total)
}
