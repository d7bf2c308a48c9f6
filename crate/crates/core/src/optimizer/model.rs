//! Per-plant constants hoisted out of the solver's inner loops.

use std::f64::consts::{LN_2, LOG2_E};

use crate::energy::EceKind;
use crate::rates::q_inverse;
use crate::system::System;
use crate::Result;

#[derive(Debug, Clone, Copy)]
struct Consts {
    /// `chi beta / sigma^2` per phase.
    gain_s: f64,
    gain_c: f64,
    qinv_eps: f64,
    qinv_delta: f64,
    log2_det_a: f64,
    omega_valid: f64,
    cost_scale: f64,
    c_min: f64,
    /// `2 ln 2 / N`.
    exp_coef: f64,
    sensing_bits: f64,
    n_states: f64,
}

pub(crate) struct Model<'a> {
    pub sys: &'a System,
    plants: Vec<Consts>,
    pub e_max_fece: f64,
}

pub(crate) fn sensing_power_core(n: f64, bits: f64, n_states: f64, qinv: f64, gain: f64) -> f64 {
    let phi = bits / (n * LOG2_E) + (n + 0.5 * n_states).sqrt() * qinv / n;
    phi.exp_m1() / gain
}

pub(crate) fn sensing_latency_core(gamma: f64, bandwidth: f64, bits: f64, n_states: f64, qinv: f64) -> f64 {
    let q0 = bandwidth * gamma.ln_1p() / qinv;
    let q1 = bits / (qinv * LOG2_E);
    let b = bandwidth;
    (2.0 * q0 * q1 + b + (4.0 * b * q0 * q1 + 2.0 * n_states * q0 * q0 + b * b).sqrt()) / (2.0 * q0 * q0)
}

impl<'a> Model<'a> {
    pub fn new(sys: &'a System) -> Result<Self> {
        let plants = sys
            .plants
            .iter()
            .map(|pl| {
                let n = pl.dynamics.n_states() as f64;
                Ok(Consts {
                    gain_s: pl.chi * pl.beta / sys.noise_sensing,
                    gain_c: pl.chi * pl.beta / sys.noise_control,
                    qinv_eps: q_inverse(pl.epsilon)?,
                    qinv_delta: q_inverse(pl.delta)?,
                    log2_det_a: pl.dynamics.log2_det_a(),
                    omega_valid: pl.dynamics.upper_bound_min_omega(),
                    cost_scale: pl.dynamics.cost_scale(),
                    c_min: pl.dynamics.c_min(),
                    exp_coef: 2.0 * LN_2 / n,
                    sensing_bits: pl.sensing.required_bits(),
                    n_states: pl.sensing.n_states as f64,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            sys,
            plants,
            e_max_fece: sys.e_max(EceKind::Fece),
        })
    }

    pub fn len(&self) -> usize {
        self.plants.len()
    }

    pub fn omega_valid(&self, k: usize) -> f64 {
        self.plants[k].omega_valid
    }

    pub fn omega(&self, k: usize, p_c: f64, l_c: f64) -> f64 {
        let c = &self.plants[k];
        let n = l_c * self.sys.bandwidth;
        n * (p_c * c.gain_c).ln_1p() * LOG2_E - n.sqrt() * c.qinv_eps * LOG2_E - c.log2_det_a
    }

    /// Upper-bound surrogate of the LQR cost; only meaningful for
    /// `omega >= omega_valid`.
    pub fn surrogate_cost(&self, k: usize, omega: f64) -> f64 {
        let c = &self.plants[k];
        c.c_min + c.cost_scale * (1.0 - c.exp_coef * omega).exp()
    }

    /// True LQR cost, infinite when the surplus is not positive.
    pub fn cost(&self, k: usize, omega: f64) -> f64 {
        let c = &self.plants[k];
        if omega > 0.0 {
            c.c_min + c.cost_scale / (c.exp_coef * omega).exp_m1()
        } else {
            f64::INFINITY
        }
    }

    pub fn min_sensing_power(&self, k: usize, l_s: f64) -> f64 {
        let c = &self.plants[k];
        sensing_power_core(l_s * self.sys.bandwidth, c.sensing_bits, c.n_states, c.qinv_delta, c.gain_s)
    }

    pub fn min_sensing_latency(&self, k: usize, p_s: f64) -> f64 {
        let c = &self.plants[k];
        sensing_latency_core(p_s * c.gain_s, self.sys.bandwidth, c.sensing_bits, c.n_states, c.qinv_delta)
    }

    pub fn power_floor(&self, k: usize, l_c: f64, omega_target: f64) -> f64 {
        let c = &self.plants[k];
        let n = l_c * self.sys.bandwidth;
        let bits = omega_target + n.sqrt() * c.qinv_eps * LOG2_E + c.log2_det_a;
        (LN_2 * bits / n).exp_m1() / c.gain_c
    }

    pub fn latency_floor(&self, k: usize, p_c: f64, omega_target: f64) -> f64 {
        let c = &self.plants[k];
        let gamma = p_c * c.gain_c;
        if !(gamma > 0.0) {
            return f64::INFINITY;
        }
        let bw = self.sys.bandwidth;
        let a = bw * gamma.ln_1p() * LOG2_E;
        let b = bw.sqrt() * c.qinv_eps * LOG2_E;
        let rhs = c.log2_det_a + omega_target;
        let s = (b + (b * b + 4.0 * a * rhs).sqrt()) / (2.0 * a);
        (s * s).max(1.0 / bw)
    }

    /// `f_k - eta g~_k` with the surrogate cost.
    pub fn surrogate_gap(&self, eta: f64, k: usize, p_s: f64, p_c: f64, l_s: f64, l_c: f64) -> f64 {
        let e = &self.sys.energy;
        let f = self.e_max_fece - e.sensing_energy(k, p_s, l_s) - e.control_energy(p_c, l_c);
        f - eta * self.surrogate_cost(k, self.omega(k, p_c, l_c))
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::system::fixtures::table_system;

    #[test]
    fn cached_evaluations_match_system() {
        let sys = table_system(3, 2e-8);
        let m = Model::new(&sys).unwrap();
        let (p, l) = (0.8, 3e-4);
        let omega = sys.omega(1, p, l).unwrap();
        assert_relative_eq!(m.omega(1, p, l), omega, max_relative = 1e-12);
        assert_relative_eq!(m.cost(1, omega), sys.cost(1, p, l).unwrap().value(), max_relative = 1e-12);
        assert_relative_eq!(m.surrogate_cost(1, omega), sys.cost_upper_bound(1, p, l).unwrap(), max_relative = 1e-12);
        assert_eq!(m.omega_valid(0), sys.plants[0].dynamics.upper_bound_min_omega());
        assert_eq!(m.cost(0, 0.0), f64::INFINITY);
    }
}
