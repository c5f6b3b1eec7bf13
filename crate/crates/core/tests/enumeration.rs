//! Transfer-matrix moments against brute-force sums over every three-value
//! sequence, weighted by the Markov joint law.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use pulsechain::analytic::{
    averaged_fidelity, closed_form_q0_pulse, closed_form_q1_pulse, correlated_pulse_moment,
    correlated_time_moment, ClosedFormVariant, MomentOrder, MomentPair,
};

const ORDERS: [MomentOrder; 2] = [MomentOrder::First, MomentOrder::Second];
const GRID: [(f64, f64, f64); 6] = [
    (0.5, 0.3, 0.9),
    (0.5, 0.1, 0.0),
    (0.8, 0.5, 1.0),
    (0.2, 0.25, 0.4),
    (1.3, 0.45, 0.65),
    (0.05, 0.0, 0.3),
];

fn power(order: MomentOrder, x: f64) -> f64 {
    match order {
        MomentOrder::First => x,
        MomentOrder::Second => x * x,
    }
}

/// Visits every index sequence in `{0,1,2}^len` with its joint probability.
fn for_each_sequence(len: usize, p: f64, q: f64, mut visit: impl FnMut(&[usize], f64)) {
    let marginal = [p, 1.0 - 2.0 * p, p];
    let mut idx = vec![0usize; len];
    for code in 0..3usize.pow(len as u32) {
        let mut c = code;
        for slot in idx.iter_mut() {
            *slot = c % 3;
            c /= 3;
        }
        let mut weight = marginal[idx[0]];
        for w in idx.windows(2) {
            let stay = if w[0] == w[1] { q } else { 0.0 };
            weight *= stay + (1.0 - q) * marginal[w[1]];
        }
        visit(&idx, weight);
    }
}

fn enumerate_pulse(order: MomentOrder, eps: f64, p: f64, q: f64, k: usize) -> f64 {
    let values = [eps, 0.0, -eps];
    let mut total = 0.0;
    for_each_sequence(k + 1, p, q, |idx, w| {
        let prod: f64 = idx.iter().map(|&i| power(order, values[i].cos())).product();
        total += w * prod;
    });
    total
}

fn enumerate_time(order: MomentOrder, eps: f64, p: f64, q: f64, k: usize) -> f64 {
    let values = [eps, 0.0, -eps];
    let mut total = 0.0;
    for_each_sequence(k + 2, p, q, |idx, w| {
        let tau: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        let mut phi = (SQRT_2 * tau[0]).cos();
        for i in 1..=k {
            phi *= (1.0 + (2.0 * (tau[i] - tau[i - 1])).cos()) / 2.0;
        }
        phi *= (SQRT_2 * (tau[k + 1] - tau[k])).cos();
        total += w * power(order, phi);
    });
    total
}

#[test]
fn pulse_moments_match_enumeration_up_to_length_five() {
    for &(eps, p, q) in &GRID {
        for order in ORDERS {
            for k in 0..=4 {
                let matrix = correlated_pulse_moment(order, eps, p, q, k).unwrap();
                let brute = enumerate_pulse(order, eps, p, q, k);
                assert!(
                    (matrix - brute).abs() < 1e-14,
                    "pulse {order:?} eps={eps} p={p} q={q} K={k}: {matrix} vs {brute}"
                );
            }
        }
    }
}

#[test]
fn time_moments_match_enumeration_up_to_length_five() {
    for &(eps, p, q) in &GRID {
        for order in ORDERS {
            for k in 0..=3 {
                let matrix = correlated_time_moment(order, eps, p, q, k).unwrap();
                let brute = enumerate_time(order, eps, p, q, k);
                assert!(
                    (matrix - brute).abs() < 1e-14,
                    "time {order:?} eps={eps} p={p} q={q} K={k}: {matrix} vs {brute}"
                );
            }
        }
    }
}

#[test]
fn q1_time_moment_is_boundary_factor_only() {
    for &(eps, p) in &[(0.3, 0.2), (0.7, 0.5), (0.1, 0.05)] {
        let expected = 1.0 - 2.0 * p + 2.0 * p * (SQRT_2 * eps).cos();
        for k in [0, 1, 5, 100] {
            let m = correlated_time_moment(MomentOrder::First, eps, p, 1.0, k).unwrap();
            assert!((m - expected).abs() < 1e-13, "K={k}");
        }
    }
}

#[test]
fn q0_closed_form_two_pulse_examples() {
    // <cos> and <cos^2> at eps = pi/2 are both 1 - 2p
    let direct = |p: f64| {
        let m = 1.0 - 2.0 * p;
        0.5 + m * m / 6.0 + m * m / 3.0
    };
    for p in [0.25, 0.5] {
        let brute = MomentPair {
            mean_psi: enumerate_pulse(MomentOrder::First, FRAC_PI_2, p, 0.0, 1),
            mean_sq_psi: enumerate_pulse(MomentOrder::Second, FRAC_PI_2, p, 0.0, 1),
        };
        let closed = closed_form_q0_pulse(FRAC_PI_2, p, 1, ClosedFormVariant::Derived);
        assert!((averaged_fidelity(&brute) - closed).abs() < 1e-15);
        assert!((closed - direct(p)).abs() < 1e-15);
    }
    assert!(
        (closed_form_q0_pulse(FRAC_PI_2, 0.25, 1, ClosedFormVariant::Derived) - 0.625).abs()
            < 1e-15
    );
    assert!(
        (closed_form_q0_pulse(FRAC_PI_2, 0.5, 1, ClosedFormVariant::Derived) - 0.5).abs() < 1e-15
    );
}

#[test]
fn q1_closed_form_matches_enumeration() {
    for &(eps, p) in &[(0.5, 0.3), (1.1, 0.5), (0.2, 0.1)] {
        for k in 0..=4 {
            let brute = MomentPair {
                mean_psi: enumerate_pulse(MomentOrder::First, eps, p, 1.0, k),
                mean_sq_psi: enumerate_pulse(MomentOrder::Second, eps, p, 1.0, k),
            };
            assert!((averaged_fidelity(&brute) - closed_form_q1_pulse(eps, p, k)).abs() < 1e-14);
        }
    }
}
