//! Round-trip energy consumption of the sensing and control phases.
//!
//! Units are W, s and J throughout.

use serde::{Deserialize, Serialize};

use crate::ece::Allocation;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EceKind {
    /// System-wide ratio of saved energy to summed cost.
    Gece,
    /// Worst-plant ratio.
    Fece,
}

impl std::fmt::Display for EceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EceKind::Gece => "gece",
            EceKind::Fece => "fece",
        })
    }
}

impl std::str::FromStr for EceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gece" => Ok(EceKind::Gece),
            "fece" => Ok(EceKind::Fece),
            other => Err(format!("unknown ECE variant `{other}` (expected fece or gece)")),
        }
    }
}

/// Amplifier efficiencies, circuit powers and transmit-power caps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    /// Per-plant amplifier efficiency.
    pub mu_s: Vec<f64>,
    /// Per-plant circuit power (W).
    pub p_circ_s: Vec<f64>,
    pub mu_c: f64,
    /// Control-center circuit power (W), shared evenly among plants.
    pub p_circ_c: f64,
    pub p_s_max: f64,
    pub p_c_max: f64,
}

impl EnergyProfile {
    pub fn uniform(
        plant_count: usize,
        mu_s: f64,
        p_circ_s: f64,
        mu_c: f64,
        p_circ_c: f64,
        p_s_max: f64,
        p_c_max: f64,
    ) -> Result<Self> {
        let profile = Self {
            mu_s: vec![mu_s; plant_count],
            p_circ_s: vec![p_circ_s; plant_count],
            mu_c,
            p_circ_c,
            p_s_max,
            p_c_max,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu_s.is_empty() || self.mu_s.len() != self.p_circ_s.len() {
            return Err(Error::domain("energy profile", "need one efficiency and circuit power per plant"));
        }
        let eff_ok = |mu: f64| mu > 0.0 && mu <= 1.0;
        if !self.mu_s.iter().all(|&m| eff_ok(m)) || !eff_ok(self.mu_c) {
            return Err(Error::domain("energy profile", "amplifier efficiencies must lie in (0, 1]"));
        }
        let pow_ok = |p: f64| p >= 0.0 && p.is_finite();
        if !self.p_circ_s.iter().all(|&p| pow_ok(p))
            || !pow_ok(self.p_circ_c)
            || !pow_ok(self.p_s_max)
            || !pow_ok(self.p_c_max)
        {
            return Err(Error::domain("energy profile", "powers must be finite and non-negative"));
        }
        Ok(())
    }

    pub fn plant_count(&self) -> usize {
        self.mu_s.len()
    }

    /// `p L / mu_k + P_k L` for plant `k`.
    pub fn sensing_energy(&self, k: usize, p_s: f64, l_s: f64) -> f64 {
        p_s * l_s / self.mu_s[k] + self.p_circ_s[k] * l_s
    }

    /// `p L / mu_C + P_C L / K`.
    pub fn control_energy(&self, p_c: f64, l_c: f64) -> f64 {
        p_c * l_c / self.mu_c + self.p_circ_c * l_c / self.plant_count() as f64
    }

    /// Round-trip maximum energy used to normalize the chosen metric.
    pub fn e_max(&self, kind: EceKind, l_max: f64) -> f64 {
        let k = self.plant_count() as f64;
        let min_mu = self.mu_s.iter().copied().fold(f64::INFINITY, f64::min);
        let max_circ = self.p_circ_s.iter().copied().fold(0.0, f64::max);
        match kind {
            EceKind::Gece => {
                l_max * (k * self.p_s_max / min_mu + k * max_circ + self.p_c_max / self.mu_c + self.p_circ_c)
            }
            EceKind::Fece => {
                l_max * (self.p_s_max / min_mu + max_circ + self.p_c_max / self.mu_c + self.p_circ_c / k)
            }
        }
    }

    pub fn breakdown(&self, alloc: &Allocation) -> EnergyBreakdown {
        let e_s: Vec<f64> = (0..self.plant_count())
            .map(|k| self.sensing_energy(k, alloc.p_s[k], alloc.l_s))
            .collect();
        let e_c: Vec<f64> = alloc.p_c.iter().map(|&p| self.control_energy(p, alloc.l_c)).collect();
        EnergyBreakdown {
            e_s_total: e_s.iter().sum(),
            e_c_total: e_c.iter().sum(),
            e_s,
            e_c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e_s: Vec<f64>,
    pub e_c: Vec<f64>,
    pub e_s_total: f64,
    pub e_c_total: f64,
}
