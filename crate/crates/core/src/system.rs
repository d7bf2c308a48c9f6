//! A fully specified multi-plant scenario: channels, plants and energy budget.

use serde::{Deserialize, Serialize};

use crate::control_cost::{self, LqrCost, PlantDynamics};
use crate::energy::{EceKind, EnergyProfile};
use crate::rates::{self, SensingSpec};
use crate::{Error, Result};

/// Everything the allocator needs to know about one plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantProfile {
    /// Large-scale fading gain.
    pub beta: f64,
    /// CSI accuracy.
    pub chi: f64,
    pub dynamics: PlantDynamics,
    pub sensing: SensingSpec,
    /// Sensing-phase error probability.
    pub delta: f64,
    /// Control-phase error probability.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub plants: Vec<PlantProfile>,
    pub energy: EnergyProfile,
    /// Hz.
    pub bandwidth: f64,
    /// Noise power `N0 B` in the sensing phase (W).
    pub noise_sensing: f64,
    /// Noise power in the control phase (W).
    pub noise_control: f64,
    /// Round-trip latency budget (s).
    pub l_max: f64,
}

impl System {
    pub fn new(
        plants: Vec<PlantProfile>,
        energy: EnergyProfile,
        bandwidth: f64,
        noise_sensing: f64,
        noise_control: f64,
        l_max: f64,
    ) -> Result<Self> {
        if plants.is_empty() {
            return Err(Error::domain("system", "at least one plant is required"));
        }
        energy.validate()?;
        if energy.plant_count() != plants.len() {
            return Err(Error::domain(
                "system",
                format!("energy profile covers {} plants, system has {}", energy.plant_count(), plants.len()),
            ));
        }
        for (name, v) in [
            ("bandwidth", bandwidth),
            ("sensing noise power", noise_sensing),
            ("control noise power", noise_control),
            ("latency budget", l_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain("system", format!("{name} = {v} must be positive")));
            }
        }
        for (k, p) in plants.iter().enumerate() {
            if !(p.beta > 0.0 && p.beta.is_finite()) || !(p.chi > 0.0 && p.chi <= 1.0) {
                return Err(Error::domain("system", format!("plant {k}: need beta > 0 and chi in (0, 1]")));
            }
            for e in [p.delta, p.epsilon] {
                if !(e > 0.0 && e < 0.5) {
                    return Err(Error::domain("system", format!("plant {k}: error probability {e} outside (0, 0.5)")));
                }
            }
        }
        Ok(Self {
            plants,
            energy,
            bandwidth,
            noise_sensing,
            noise_control,
            l_max,
        })
    }

    pub fn plant_count(&self) -> usize {
        self.plants.len()
    }

    pub fn gamma_s(&self, k: usize, p_s: f64) -> f64 {
        let pl = &self.plants[k];
        p_s * pl.chi * pl.beta / self.noise_sensing
    }

    pub fn gamma_c(&self, k: usize, p_c: f64) -> f64 {
        let pl = &self.plants[k];
        p_c * pl.chi * pl.beta / self.noise_control
    }

    /// Information surplus of plant `k` in the control phase (bits).
    pub fn omega(&self, k: usize, p_c: f64, l_c: f64) -> Result<f64> {
        let pl = &self.plants[k];
        control_cost::omega_from_sinr(
            self.gamma_c(k, p_c),
            l_c * self.bandwidth,
            pl.epsilon,
            pl.dynamics.log2_det_a(),
        )
    }

    pub fn cost(&self, k: usize, p_c: f64, l_c: f64) -> Result<LqrCost> {
        control_cost::lqr_cost(&self.plants[k].dynamics, self.omega(k, p_c, l_c)?)
    }

    pub fn cost_upper_bound(&self, k: usize, p_c: f64, l_c: f64) -> Result<f64> {
        control_cost::lqr_cost_upper_bound(&self.plants[k].dynamics, self.omega(k, p_c, l_c)?)
    }

    /// Sensing-constraint slack of plant `k` in bits (non-negative when met).
    pub fn sensing_slack(&self, k: usize, p_s: f64, l_s: f64) -> Result<f64> {
        let pl = &self.plants[k];
        rates::sensing_slack(self.gamma_s(k, p_s), l_s, self.bandwidth, &pl.sensing, pl.delta)
    }

    pub fn e_max(&self, kind: EceKind) -> f64 {
        self.energy.e_max(kind, self.l_max)
    }

    pub fn c_min(&self, k: usize) -> f64 {
        self.plants[k].dynamics.c_min()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Default scenario with every plant at the same fading gain.
    pub fn table_system(k: usize, beta: f64) -> System {
        let plant = PlantProfile {
            beta,
            chi: 0.8,
            dynamics: PlantDynamics::scaled_identity(100, 2.0, 1e-3).unwrap(),
            sensing: SensingSpec::from_dnr_db(100, 1.0, -6.0).unwrap(),
            delta: 1e-5,
            epsilon: 1e-5,
        };
        let energy = EnergyProfile::uniform(k, 0.2, 2.0, 0.2, 1000.0, 1.0, 10.0).unwrap();
        System::new(vec![plant; k], energy, 5e5, 5e-11, 5e-11, 1e-3).unwrap()
    }

    /// Two-state, two-plant scenario used against brute-force search.
    pub fn small_system(betas: [f64; 2]) -> System {
        let plants = betas
            .iter()
            .map(|&beta| PlantProfile {
                beta,
                chi: 0.8,
                dynamics: PlantDynamics::scaled_identity(2, 2.0, 0.05).unwrap(),
                sensing: SensingSpec::from_dnr_db(2, 1.0, -6.0).unwrap(),
                delta: 1e-5,
                epsilon: 1e-5,
            })
            .collect();
        let energy = EnergyProfile::uniform(2, 0.2, 2.0, 0.2, 1000.0, 1.0, 10.0).unwrap();
        System::new(plants, energy, 5e5, 5e-11, 5e-11, 1e-3).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::fixtures::table_system;
    use super::*;

    #[test]
    fn sinr_and_surplus() {
        let sys = table_system(8, 1e-6);
        assert_relative_eq!(sys.gamma_c(0, 1.25), 2e4, max_relative = 1e-12);
        assert_relative_eq!(sys.gamma_s(0, 1.0), 16_000.0, max_relative = 1e-12);
        assert_relative_eq!(sys.omega(0, 1.25, 5e-4).unwrap(), 3_374.659_655_215_683_6, max_relative = 1e-12);
        assert!(sys.cost(0, 1.25, 5e-4).unwrap().value() >= 0.1);
        assert_relative_eq!(sys.e_max(EceKind::Fece), 0.182, max_relative = 1e-14);
    }

    #[test]
    fn rejects_mismatched_energy_profile() {
        let sys = table_system(2, 1e-6);
        let energy = EnergyProfile::uniform(3, 0.2, 2.0, 0.2, 1000.0, 1.0, 10.0).unwrap();
        assert!(System::new(sys.plants.clone(), energy, 5e5, 5e-11, 5e-11, 1e-3).is_err());
        assert!(System::new(vec![], sys.energy.clone(), 5e5, 5e-11, 5e-11, 1e-3).is_err());
        assert!(System::new(sys.plants.clone(), sys.energy.clone(), 0.0, 5e-11, 5e-11, 1e-3).is_err());
    }
}
