//! Energy-to-control efficiency: saved energy per unit of LQR cost.
//!
//! Values are in J per cost unit. The per-plant numerator and denominator,
//! `f_k` and `g_k`, are exposed separately because the optimizer works on them
//! directly.

use serde::{Deserialize, Serialize};

use crate::control_cost::LqrCost;
use crate::energy::{EceKind, EnergyProfile};
use crate::system::System;
use crate::{Error, Result};

/// Transmit powers for both phases plus the shared phase latencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    /// Sensing power per plant (W).
    pub p_s: Vec<f64>,
    /// Control power per plant (W).
    pub p_c: Vec<f64>,
    /// Sensing-phase latency (s).
    pub l_s: f64,
    /// Control-phase latency (s).
    pub l_c: f64,
}

impl Allocation {
    pub fn validate(&self, plant_count: usize) -> Result<()> {
        if self.p_s.len() != plant_count || self.p_c.len() != plant_count {
            return Err(Error::domain(
                "allocation",
                format!("expected {plant_count} powers per phase, got {} and {}", self.p_s.len(), self.p_c.len()),
            ));
        }
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !self.p_s.iter().chain(&self.p_c).all(|&p| ok(p)) || !ok(self.l_s) || !ok(self.l_c) {
            return Err(Error::domain("allocation", "powers and latencies must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EceValue {
    pub value: f64,
    /// Plant attaining the minimum ratio; `None` for the global metric.
    pub argmin_plant: Option<usize>,
}

/// `E_max - E^S_k - E^C_k`.
pub fn fk(alloc: &Allocation, k: usize, profile: &EnergyProfile, e_max_fece: f64) -> f64 {
    e_max_fece - profile.sensing_energy(k, alloc.p_s[k], alloc.l_s) - profile.control_energy(alloc.p_c[k], alloc.l_c)
}

/// LQR cost of plant `k` under the allocation.
pub fn gk(alloc: &Allocation, k: usize, system: &System) -> Result<LqrCost> {
    system.cost(k, alloc.p_c[k], alloc.l_c)
}

/// Worst-plant ratio `min_k f_k / g_k`; ties go to the lowest index.
pub fn fece(alloc: &Allocation, system: &System) -> Result<EceValue> {
    alloc.validate(system.plant_count())?;
    let e_max = system.e_max(EceKind::Fece);
    let mut best = EceValue {
        value: f64::INFINITY,
        argmin_plant: None,
    };
    for k in 0..system.plant_count() {
        let ratio = fk(alloc, k, &system.energy, e_max) / gk(alloc, k, system)?.value();
        if ratio < best.value {
            best = EceValue {
                value: ratio,
                argmin_plant: Some(k),
            };
        }
    }
    Ok(best)
}

/// `(E_max - sum_k (E^S_k + E^C_k)) / sum_k c_k`.
pub fn gece(alloc: &Allocation, system: &System) -> Result<EceValue> {
    alloc.validate(system.plant_count())?;
    let breakdown = system.energy.breakdown(alloc);
    let costs = (0..system.plant_count())
        .map(|k| gk(alloc, k, system).map(|c| c.value()))
        .sum::<Result<f64>>()?;
    Ok(EceValue {
        value: (system.e_max(EceKind::Gece) - breakdown.e_s_total - breakdown.e_c_total) / costs,
        argmin_plant: None,
    })
}

/// Evaluates the requested metric.
pub fn ece(kind: EceKind, alloc: &Allocation, system: &System) -> Result<EceValue> {
    match kind {
        EceKind::Fece => fece(alloc, system),
        EceKind::Gece => gece(alloc, system),
    }
}
