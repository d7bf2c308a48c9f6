//! Independent re-implementation of the constraint set and the metrics,
//! written directly from the model equations and sharing no numerical code
//! with the library beyond reading the scenario's raw parameters.

#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::{LN_2, LOG2_E, PI, SQRT_2};

use ncs_codesign::ece::Allocation;
use ncs_codesign::system::System;
use statrs::function::erf::erfc;

/// `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// `Q^{-1}(p)` by Newton iteration in log space.
pub fn q_inv(p: f64) -> f64 {
    assert!(p > 0.0 && p < 0.5);
    let mut x = (-2.0 * p.ln()).sqrt();
    for _ in 0..100 {
        let qx = q(x);
        let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        // d/dx ln Q(x) = -pdf / Q
        let step = (qx.ln() - p.ln()) / (-pdf / qx);
        x -= step;
        if step.abs() < 1e-15 * x.abs() {
            break;
        }
    }
    x
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// `n_use log2(1+gamma) - (N/2) log2(s2/d) - sqrt(n_use + N/2) Q^{-1}(delta) log2 e`.
pub fn sensing_slack_raw(gamma: f64, n_use: f64, n_states: usize, source_over_distortion: f64, delta: f64) -> f64 {
    let n = n_states as f64;
    let bits = n / 2.0 * source_over_distortion.log2();
    n_use * log2_1p(gamma) - bits - (n_use + n / 2.0).sqrt() * q_inv(delta) * LOG2_E
}

/// Sensing constraint slack in bits.
pub fn sensing_slack(sys: &System, k: usize, p_s: f64, l_s: f64) -> f64 {
    let pl = &sys.plants[k];
    sensing_slack_raw(
        p_s * pl.chi * pl.beta / sys.noise_sensing,
        l_s * sys.bandwidth,
        pl.sensing.n_states,
        pl.sensing.sigma2_ps / pl.sensing.distortion,
        pl.delta,
    )
}

/// Control information surplus in bits.
pub fn omega(sys: &System, k: usize, p_c: f64, l_c: f64) -> f64 {
    let pl = &sys.plants[k];
    let n_use = l_c * sys.bandwidth;
    let gamma = p_c * pl.chi * pl.beta / sys.noise_control;
    n_use * log2_1p(gamma) - n_use.sqrt() * q_inv(pl.epsilon) * LOG2_E - pl.dynamics.log2_det_a()
}

/// LQR cost, infinite without positive surplus.
pub fn cost(sys: &System, k: usize, p_c: f64, l_c: f64) -> f64 {
    let d = &sys.plants[k].dynamics;
    let om = omega(sys, k, p_c, l_c);
    if om <= 0.0 {
        return f64::INFINITY;
    }
    let n = d.n_states() as f64;
    let scale = n * d.entropy_power() * d.det_m().powf(1.0 / n);
    d.c_min() + scale / (2.0 * om * LN_2 / n).exp_m1()
}

pub fn sensing_energy(sys: &System, k: usize, p_s: f64, l_s: f64) -> f64 {
    let e = &sys.energy;
    p_s * l_s / e.mu_s[k] + e.p_circ_s[k] * l_s
}

pub fn control_energy(sys: &System, p_c: f64, l_c: f64) -> f64 {
    let e = &sys.energy;
    p_c * l_c / e.mu_c + e.p_circ_c * l_c / sys.plants.len() as f64
}

pub fn e_max_fece(sys: &System) -> f64 {
    let e = &sys.energy;
    let mu = e.mu_s.iter().copied().fold(f64::INFINITY, f64::min);
    let circ = e.p_circ_s.iter().copied().fold(0.0, f64::max);
    sys.l_max * (e.p_s_max / mu + circ + e.p_c_max / e.mu_c + e.p_circ_c / sys.plants.len() as f64)
}

pub fn e_max_gece(sys: &System) -> f64 {
    let e = &sys.energy;
    let k = sys.plants.len() as f64;
    let mu = e.mu_s.iter().copied().fold(f64::INFINITY, f64::min);
    let circ = e.p_circ_s.iter().copied().fold(0.0, f64::max);
    sys.l_max * (k * e.p_s_max / mu + k * circ + e.p_c_max / e.mu_c + e.p_circ_c)
}

pub fn fece(sys: &System, a: &Allocation) -> f64 {
    let e_max = e_max_fece(sys);
    (0..sys.plants.len())
        .map(|k| {
            let f = e_max - sensing_energy(sys, k, a.p_s[k], a.l_s) - control_energy(sys, a.p_c[k], a.l_c);
            f / cost(sys, k, a.p_c[k], a.l_c)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn gece(sys: &System, a: &Allocation) -> f64 {
    let k = sys.plants.len();
    let used: f64 = (0..k)
        .map(|i| sensing_energy(sys, i, a.p_s[i], a.l_s) + control_energy(sys, a.p_c[i], a.l_c))
        .sum();
    let costs: f64 = (0..k).map(|i| cost(sys, i, a.p_c[i], a.l_c)).sum();
    (e_max_gece(sys) - used) / costs
}

/// Smallest slack over every constraint. Budgets are measured relative to
/// their caps, the sensing constraint in bits and stabilization as the
/// surplus in bits.
pub fn min_slack(sys: &System, a: &Allocation) -> f64 {
    let e = &sys.energy;
    let mut slack = [
        (sys.l_max - a.l_s - a.l_c) / sys.l_max,
        (e.p_c_max - a.p_c.iter().sum::<f64>()) / e.p_c_max,
        a.l_s,
        a.l_c,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min);
    for k in 0..sys.plants.len() {
        slack = slack
            .min((e.p_s_max - a.p_s[k]) / e.p_s_max)
            .min(a.p_s[k])
            .min(a.p_c[k])
            .min(sensing_slack(sys, k, a.p_s[k], a.l_s))
            .min(omega(sys, k, a.p_c[k], a.l_c));
    }
    slack
}

/// Smallest sensing power meeting the sensing constraint, by bisection on
/// the slack; `None` if even the power cap does not suffice.
pub fn min_sensing_power_bisect(sys: &System, k: usize, l_s: f64) -> Option<f64> {
    let cap = sys.energy.p_s_max;
    if sensing_slack(sys, k, cap, l_s) < 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sensing_slack(sys, k, mid, l_s) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Exhaustive worst-plant ECE search for two plants over `n`-point axes of
/// control powers and phase latencies, with sensing power at its minimum.
pub fn grid_optimum_two_plants(sys: &System, n: usize) -> f64 {
    assert_eq!(sys.plants.len(), 2);
    let l_axis: Vec<f64> = (1..=n).map(|i| sys.l_max * i as f64 / n as f64).collect();
    let p_axis: Vec<f64> = (1..=n).map(|i| sys.energy.p_c_max * i as f64 / n as f64).collect();
    let e_max = e_max_fece(sys);
    // Per plant: cost and control energy on the (l_c, p_c) grid.
    let table = |k: usize| -> Vec<Vec<(f64, f64)>> {
        l_axis
            .iter()
            .map(|&l| p_axis.iter().map(|&p| (cost(sys, k, p, l), control_energy(sys, p, l))).collect())
            .collect()
    };
    let (t0, t1) = (table(0), table(1));
    let mut best = f64::NEG_INFINITY;
    for (i, &l_s) in l_axis.iter().enumerate() {
        let (Some(ps0), Some(ps1)) = (min_sensing_power_bisect(sys, 0, l_s), min_sensing_power_bisect(sys, 1, l_s))
        else {
            continue;
        };
        let es = [sensing_energy(sys, 0, ps0, l_s), sensing_energy(sys, 1, ps1, l_s)];
        for j in 0..(n - i - 1) {
            for a in 0..n {
                let (c0, ec0) = t0[j][a];
                if !c0.is_finite() {
                    continue;
                }
                let r0 = (e_max - es[0] - ec0) / c0;
                if r0 <= best {
                    continue;
                }
                for b in 0..(n - a - 1) {
                    let (c1, ec1) = t1[j][b];
                    let r = r0.min((e_max - es[1] - ec1) / c1);
                    if r > best {
                        best = r;
                    }
                }
            }
        }
    }
    best
}
