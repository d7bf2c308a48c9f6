//! Dinkelbach outer loop for the worst-plant metric, and the fixed baseline.

use super::feasibility::{bisection, initial_latencies};
use super::model::Model;
use super::{infeasible, plant_reports, DinkelbachStep, DinkelbachTrace, Infeasibility, OptimizationOutcome, SolverSettings};
use crate::ece::{fece, fk, gk, Allocation};
use crate::energy::EceKind;
use crate::system::System;
use crate::{Error, Result};

/// Full sensing power, equal control power split, even latency split.
pub fn fpepla_baseline(system: &System) -> Allocation {
    let k = system.plant_count();
    let e = &system.energy;
    Allocation {
        p_s: vec![e.p_s_max; k],
        p_c: vec![e.p_c_max / k as f64; k],
        l_s: 0.5 * system.l_max,
        l_c: 0.5 * system.l_max,
    }
}

/// `F(eta) = min_k (f_k - eta g_k)` with the true cost.
fn parametric_value(system: &System, alloc: &Allocation, eta: f64, e_max: f64) -> Result<f64> {
    let mut f_value = f64::INFINITY;
    for k in 0..system.plant_count() {
        let g = gk(alloc, k, system)?.value();
        f_value = f_value.min(fk(alloc, k, &system.energy, e_max) - eta * g);
    }
    Ok(f_value)
}

/// Maximizes `min_k f_k / g_k`.
///
/// Starts from `eta_0 = min_k E_max / (2 c_min_k)`; each iteration solves the
/// parametric subproblem, evaluates `F(eta) = min_k (f_k - eta g_k)` at its
/// witness with the true cost, and moves to the witness's ratio. Stops once
/// `F <= zeta1`. If a later subproblem yields no witness the best allocation
/// so far is returned with `converged == false`.
pub fn dinkelbach_fece(system: &System, settings: &SolverSettings) -> Result<OptimizationOutcome> {
    let m = Model::new(system)?;
    let l_init = initial_latencies(&m).map_err(Error::Infeasible)?;
    let e_max = system.e_max(EceKind::Fece);
    let mut eta = (0..system.plant_count())
        .map(|k| e_max / (2.0 * system.c_min(k)))
        .fold(f64::INFINITY, f64::min);
    let mut trace = DinkelbachTrace {
        iterations: Vec::new(),
        final_eta: eta,
        converged: false,
    };
    let mut best: Option<(Allocation, f64)> = None;
    for _ in 0..settings.max_outer {
        let state = bisection(&m, eta, l_init, settings);
        let Some(alloc) = state.best_feasible else {
            if best.is_none() {
                return Err(infeasible(system, state.last_rejection.unwrap_or(Infeasibility::NoWitness)));
            }
            break;
        };
        let f_value = parametric_value(system, &alloc, eta, e_max)?;
        // The previous best attains F(eta) = 0 by construction; an inexact
        // subproblem answer below it is discarded in its favour.
        if let Some((prev, _)) = best.as_ref().filter(|_| f_value < 0.0) {
            let f_prev = parametric_value(system, prev, eta, e_max)?;
            trace.iterations.push(DinkelbachStep {
                eta,
                f_value: f_prev,
                bisection_steps: state.steps,
            });
            trace.converged = true;
            break;
        }
        let ratio = fece(&alloc, system)?.value;
        trace.iterations.push(DinkelbachStep {
            eta,
            f_value,
            bisection_steps: state.steps,
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
        variant: EceKind::Fece,
        per_plant: plant_reports(system, &allocation)?,
        allocation,
        eta_star,
        trace,
    })
}
