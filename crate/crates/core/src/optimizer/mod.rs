//! Max-min energy-to-control-efficiency resource allocation.
//!
//! The fractional objective is handled by a Dinkelbach outer loop. For the
//! worst-plant metric each parametric subproblem is solved by bisecting an
//! epigraph level; every probed level picks the phase latencies that leave the
//! most control-power headroom, then runs the power and latency feasibility
//! checks, all of which reduce to one-dimensional searches. The global metric
//! uses block ascent over control latency (with powers priced against the
//! shared budget) and sensing latency.

mod dinkelbach;
mod feasibility;
mod gece;
mod model;
mod scalar;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use dinkelbach::{dinkelbach_fece, fpepla_baseline};
pub use feasibility::{
    diagnose, min_sensing_latency, min_sensing_power, solve_fp_latency, solve_fp_power, subproblem_bisection,
    surrogate_objective, BisectionState, PowerWitness,
};
pub use gece::optimize_gece;

use crate::ece::Allocation;
use crate::energy::EceKind;
use crate::system::System;
use crate::{Error, Result};

/// Why no allocation satisfies the constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Infeasibility {
    /// The sensing constraint cannot be met within the latency budget at full power.
    SensingUnattainable { plant: usize },
    /// The plant cannot reach the required control surplus at full power.
    ControlUnattainable { plant: usize },
    /// Every plant can be served alone, but not all within the shared control power.
    ControlPowerBudget,
    /// The epigraph bisection found no feasible level.
    NoWitness,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::SensingUnattainable { plant } => {
                write!(f, "plant {plant}: sensing constraint unattainable within the latency budget")
            }
            Infeasibility::ControlUnattainable { plant } => {
                write!(f, "plant {plant}: control surplus unattainable at maximum control power")
            }
            Infeasibility::ControlPowerBudget => f.write_str("control power budget too small for all plants"),
            Infeasibility::NoWitness => f.write_str("no feasible epigraph level found"),
        }
    }
}

/// Result of a feasibility check: a witness or the reason there is none.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe<T> {
    Feasible(T),
    Infeasible(Infeasibility),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Dinkelbach stopping threshold on `F(eta)`.
    pub zeta1: f64,
    /// Epigraph bisection width.
    pub zeta2: f64,
    pub max_outer: usize,
    pub max_bisection: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            zeta1: 1e-2,
            zeta2: 1e-3,
            max_outer: 50,
            max_bisection: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachStep {
    pub eta: f64,
    pub f_value: f64,
    /// Epigraph bisection halvings (zero for coordinate-ascent subproblems).
    pub bisection_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachTrace {
    pub iterations: Vec<DinkelbachStep>,
    pub final_eta: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantReport {
    pub lqr_cost: f64,
    pub sensing_energy: f64,
    pub control_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationOutcome {
    pub variant: EceKind,
    pub allocation: Allocation,
    pub eta_star: f64,
    pub per_plant: Vec<PlantReport>,
    pub trace: DinkelbachTrace,
}

pub(crate) fn plant_reports(system: &System, alloc: &Allocation) -> Result<Vec<PlantReport>> {
    (0..system.plant_count())
        .map(|k| {
            Ok(PlantReport {
                lqr_cost: system.cost(k, alloc.p_c[k], alloc.l_c)?.value(),
                sensing_energy: system.energy.sensing_energy(k, alloc.p_s[k], alloc.l_s),
                control_energy: system.energy.control_energy(alloc.p_c[k], alloc.l_c),
            })
        })
        .collect()
}

pub(crate) fn infeasible(system: &System, fallback: Infeasibility) -> Error {
    match diagnose(system) {
        Ok(Some(why)) => Error::Infeasible(why),
        _ => Error::Infeasible(fallback),
    }
}

/// Runs the optimizer for the requested metric.
pub fn optimize(kind: EceKind, system: &System, settings: &SolverSettings) -> Result<OptimizationOutcome> {
    match kind {
        EceKind::Fece => dinkelbach_fece(system, settings),
        EceKind::Gece => optimize_gece(system, settings),
    }
}
