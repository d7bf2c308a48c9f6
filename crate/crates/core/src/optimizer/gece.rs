//! Dinkelbach loop for the system-wide metric.
//!
//! The parametric subproblem
//! `max (E_max - sum_k E_k) - eta sum_k c_k`
//! is solved by block ascent. The control powers are priced against the
//! shared budget with a scalar multiplier and re-solved for every candidate
//! control latency; the sensing latency (with sensing powers at their
//! minimum) is the second block.

use super::feasibility::{diagnose_model, LatencyBounds};
use super::model::Model;
use super::scalar::{bisect_boundary, golden_section_max};
use super::{infeasible, plant_reports, DinkelbachStep, DinkelbachTrace, Infeasibility, OptimizationOutcome, SolverSettings};
use crate::ece::{gece, Allocation};
use crate::energy::EceKind;
use crate::system::System;
use crate::{Error, Result};

/// Surplus kept between the iterate and the stabilization boundary, where
/// the cost diverges.
const OMEGA_EPS: f64 = 1e-6;
const MAX_ROUNDS: usize = 100;

struct Subproblem<'m, 'a> {
    m: &'m Model<'a>,
    eta: f64,
    e_max: f64,
    l_s_lo: f64,
}

impl Subproblem<'_, '_> {
    fn sensing_energy(&self, l_s: f64) -> f64 {
        let e = &self.m.sys.energy;
        (0..self.m.len())
            .map(|k| e.sensing_energy(k, self.m.min_sensing_power(k, l_s), l_s))
            .sum()
    }

    fn control_term(&self, l_c: f64, p_c: &[f64]) -> f64 {
        let e = &self.m.sys.energy;
        p_c.iter()
            .enumerate()
            .map(|(k, &p)| -e.control_energy(p, l_c) - self.eta * self.m.cost(k, self.m.omega(k, p, l_c)))
            .sum()
    }

    /// Parametric objective.
    fn value(&self, l_s: f64, l_c: f64, p_c: &[f64]) -> f64 {
        self.e_max - self.sensing_energy(l_s) + self.control_term(l_c, p_c)
    }

    /// Best control powers at latency `l_c` under the shared cap, or `None`
    /// when the stabilization floors alone exceed it.
    fn power_block(&self, l_c: f64) -> Option<Vec<f64>> {
        let m = self.m;
        let e = &m.sys.energy;
        let floors: Vec<f64> = (0..m.len()).map(|k| m.power_floor(k, l_c, OMEGA_EPS)).collect();
        if !(floors.iter().sum::<f64>() <= e.p_c_max) {
            return None;
        }
        let base = l_c / e.mu_c;
        let powers_at = |price: f64| -> Vec<f64> {
            (0..m.len())
                .map(|k| {
                    let term = |p: f64| -price * p - self.eta * m.cost(k, m.omega(k, p, l_c));
                    golden_section_max(term, floors[k], e.p_c_max).0
                })
                .collect()
        };
        let fits = |p: &[f64]| p.iter().sum::<f64>() <= e.p_c_max;
        let free = powers_at(base);
        if fits(&free) {
            return Some(free);
        }
        let mut hi = 2.0 * base.max(1e-12);
        let mut found = false;
        for _ in 0..200 {
            if fits(&powers_at(base + hi)) {
                found = true;
                break;
            }
            hi *= 2.0;
        }
        if !found {
            return Some(floors);
        }
        let lambda = bisect_boundary(|l| fits(&powers_at(base + l)), hi, 0.0);
        Some(powers_at(base + lambda))
    }

    fn control_block(&self, l_c: f64) -> f64 {
        match self.power_block(l_c) {
            Some(p) => self.control_term(l_c, &p),
            None => f64::NEG_INFINITY,
        }
    }

    /// Shortest control latency at which the stabilization floors fit the budget.
    fn control_latency_lo(&self, hi: f64) -> Option<f64> {
        let m = self.m;
        let e = &m.sys.energy;
        let floors_fit = |l: f64| (0..m.len()).map(|k| m.power_floor(k, l, OMEGA_EPS)).sum::<f64>() <= e.p_c_max;
        if !floors_fit(hi) {
            return None;
        }
        let mut lo = 1.0 / m.sys.bandwidth;
        for k in 0..m.len() {
            lo = lo.max(m.latency_floor(k, e.p_c_max, OMEGA_EPS));
        }
        if lo > hi {
            return None;
        }
        Some(if floors_fit(lo) { lo } else { bisect_boundary(floors_fit, hi, lo) })
    }

    fn solve(&self) -> Option<Allocation> {
        let l_max = self.m.sys.l_max;
        let mut l_s = self.l_s_lo;
        let mut current = f64::NEG_INFINITY;
        let mut l_c = 0.0;
        for _ in 0..MAX_ROUNDS {
            let start = current;
            let hi = l_max - l_s;
            if let Some(lo) = self.control_latency_lo(hi) {
                let (l, v) = golden_section_max(|l| self.control_block(l), lo, hi);
                if v.is_finite() {
                    l_c = l;
                }
            }
            if l_c == 0.0 {
                return None;
            }
            let (l, _) = golden_section_max(|l| -self.sensing_energy(l), self.l_s_lo, (l_max - l_c).max(self.l_s_lo));
            l_s = l;
            let p_c = self.power_block(l_c)?;
            current = self.value(l_s, l_c, &p_c);
            if current - start <= 1e-13 * current.abs() {
                break;
            }
        }
        let p_c = self.power_block(l_c)?;
        let p_s = (0..self.m.len()).map(|k| self.m.min_sensing_power(k, l_s)).collect();
        Some(Allocation { p_s, p_c, l_s, l_c })
    }
}

/// Maximizes `(E_max - sum_k E_k) / sum_k c_k` with the same Dinkelbach
/// skeleton as the worst-plant variant, starting from
/// `eta_0 = E_max / (2 sum_k c_min_k)`.
pub fn optimize_gece(system: &System, settings: &SolverSettings) -> Result<OptimizationOutcome> {
    let m = Model::new(system)?;
    if let Some(why) = diagnose_model(&m) {
        return Err(Error::Infeasible(why));
    }
    let l_s_lo = LatencyBounds::new(&m).l_s_lo;
    let e_max = system.e_max(EceKind::Gece);
    let c_min_total: f64 = (0..system.plant_count()).map(|k| system.c_min(k)).sum();
    let mut eta = e_max / (2.0 * c_min_total);
    let mut trace = DinkelbachTrace {
        iterations: Vec::new(),
        final_eta: eta,
        converged: false,
    };
    let mut best: Option<(Allocation, f64)> = None;
    for _ in 0..settings.max_outer {
        let sub = Subproblem {
            m: &m,
            eta,
            e_max,
            l_s_lo,
        };
        let Some(alloc) = sub.solve() else {
            if best.is_none() {
                return Err(infeasible(system, Infeasibility::NoWitness));
            }
            break;
        };
        let f_value = sub.value(alloc.l_s, alloc.l_c, &alloc.p_c);
        let ratio = gece(&alloc, system)?.value;
        trace.iterations.push(DinkelbachStep {
            eta,
            f_value,
            bisection_steps: 0,
        });
        if best.as_ref().is_none_or(|b| ratio > b.1) {
            best = Some((alloc, ratio));
        }
        if f_value <= settings.zeta1 {
            trace.converged = true;
            break;
        }
        eta = ratio;
    }
    let (allocation, eta_star) = best.expect("at least one witness");
    trace.final_eta = eta_star;
    Ok(OptimizationOutcome {
        variant: EceKind::Gece,
        per_plant: plant_reports(system, &allocation)?,
        allocation,
        eta_star,
        trace,
    })
}
