//! Scenario configuration: a flat `key = value` file with `#` comments.
//!
//! Every key is optional; missing keys take the default scenario values.
//! Overrides given as `key=value` strings are applied on top of the file.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{trial_rng, ChannelRealization};
use crate::control_cost::PlantDynamics;
use crate::energy::EnergyProfile;
use crate::optimizer::SolverSettings;
use crate::rates::SensingSpec;
use crate::system::{PlantProfile, System};
use crate::{Error, Result};

const DEFAULT_C_MIN: f64 = 0.1;
pub const DEFAULT_CDF_TRIALS: usize = 200;
pub const DEFAULT_SE_TRIALS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Annulus radii (m).
    pub r_inner: f64,
    pub r_outer: f64,
    /// Path-loss constant.
    pub theta: f64,
    /// Shadow-fading standard deviation (dB).
    pub sigma_sf_db: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// CSI accuracy.
    pub chi: f64,
    /// Noise spectral densities (dBm/Hz).
    pub n0_sensing_dbm_hz: f64,
    pub n0_control_dbm_hz: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Round-trip latency budget (s).
    pub l_max: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// W.
    pub p_s_max: f64,
    pub p_c_max: f64,
    pub p_circ_s: f64,
    pub p_circ_c: f64,
    pub mu_s: f64,
    pub mu_c: f64,
    pub n_states: usize,
    /// Minimum LQR cost; mutually exclusive with `sigma2_pn`.
    pub c_min: Option<f64>,
    /// Process-noise variance per state.
    pub sigma2_pn: Option<f64>,
    /// `A = a I`.
    pub instability: f64,
    pub dnr_db: f64,
    /// Source variance per state.
    pub sigma2_ps: f64,
    pub plant_count: usize,
    pub antennas: usize,
    /// Monte-Carlo trials; each experiment has its own default.
    pub trials: Option<usize>,
    pub seed: u64,
    pub zeta1: f64,
    pub zeta2: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            r_inner: 10.0,
            r_outer: 50.0,
            theta: 1e-3,
            sigma_sf_db: 8.0,
            alpha: 3.0,
            chi: 0.8,
            n0_sensing_dbm_hz: -130.0,
            n0_control_dbm_hz: -130.0,
            bandwidth: 5e5,
            l_max: 1e-3,
            delta: 1e-5,
            epsilon: 1e-5,
            p_s_max: 1.0,
            p_c_max: 10.0,
            p_circ_s: 2.0,
            p_circ_c: 1000.0,
            mu_s: 0.2,
            mu_c: 0.2,
            n_states: 100,
            c_min: None,
            sigma2_pn: None,
            instability: 2.0,
            dnr_db: -6.0,
            sigma2_ps: 1.0,
            plant_count: 8,
            antennas: 128,
            trials: None,
            seed: 0,
            zeta1: 1e-2,
            zeta2: 1e-3,
        }
    }
}

fn dbm_hz_to_w_hz(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

fn check(ok: bool, field: &str, reason: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, reason))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    check(v > 0.0 && v.is_finite(), field, format!("{v} must be positive and finite"))
}

fn probability(field: &str, v: f64) -> Result<()> {
    check(v > 0.0 && v < 0.5, field, format!("{v} must lie in (0, 0.5)"))
}

fn unit_interval(field: &str, v: f64) -> Result<()> {
    check(v > 0.0 && v <= 1.0, field, format!("{v} must lie in (0, 1]"))
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::config(origin, e.message().to_string()))
}

impl SystemConfig {
    /// Parses configuration text, applies no overrides, and validates.
    pub fn from_text(text: &str) -> Result<Self> {
        load_from_text(text, &[] as &[&str])
    }

    pub fn validate(&self) -> Result<()> {
        positive("r_inner", self.r_inner)?;
        positive("r_outer", self.r_outer)?;
        check(self.r_inner < self.r_outer, "r_outer", "must exceed r_inner")?;
        positive("theta", self.theta)?;
        check(
            self.sigma_sf_db >= 0.0 && self.sigma_sf_db.is_finite(),
            "sigma_sf_db",
            format!("{} must be non-negative", self.sigma_sf_db),
        )?;
        positive("alpha", self.alpha)?;
        unit_interval("chi", self.chi)?;
        for (field, v) in [
            ("n0_sensing_dbm_hz", self.n0_sensing_dbm_hz),
            ("n0_control_dbm_hz", self.n0_control_dbm_hz),
        ] {
            check(v.is_finite(), field, "must be finite")?;
        }
        positive("bandwidth", self.bandwidth)?;
        positive("l_max", self.l_max)?;
        check(self.l_max * self.bandwidth >= 2.0, "l_max", "budget must span at least two channel uses")?;
        probability("delta", self.delta)?;
        probability("epsilon", self.epsilon)?;
        positive("p_s_max", self.p_s_max)?;
        positive("p_c_max", self.p_c_max)?;
        for (field, v) in [("p_circ_s", self.p_circ_s), ("p_circ_c", self.p_circ_c)] {
            check(v >= 0.0 && v.is_finite(), field, format!("{v} must be non-negative"))?;
        }
        unit_interval("mu_s", self.mu_s)?;
        unit_interval("mu_c", self.mu_c)?;
        check(self.n_states >= 1, "n_states", "must be at least 1")?;
        match (self.c_min, self.sigma2_pn) {
            (Some(_), Some(_)) => return Err(Error::config("c_min", "set either c_min or sigma2_pn, not both")),
            (Some(c), None) => positive("c_min", c)?,
            (None, Some(s)) => positive("sigma2_pn", s)?,
            (None, None) => {}
        }
        check(
            self.instability.abs() >= 1.0 && self.instability.is_finite(),
            "instability",
            format!("|{}| must be at least 1", self.instability),
        )?;
        check(
            self.dnr_db <= 0.0 && self.dnr_db.is_finite(),
            "dnr_db",
            format!("{} dB must not exceed 0 (distortion above source variance)", self.dnr_db),
        )?;
        positive("sigma2_ps", self.sigma2_ps)?;
        check(self.plant_count >= 1, "plant_count", "must be at least 1")?;
        check(self.antennas >= 2, "antennas", "must be at least 2")?;
        check(self.trials != Some(0), "trials", "must be at least 1")?;
        positive("zeta1", self.zeta1)?;
        positive("zeta2", self.zeta2)?;
        Ok(())
    }

    /// Minimum LQR cost `N sigma2_pn`.
    pub fn c_min(&self) -> f64 {
        match (self.c_min, self.sigma2_pn) {
            (Some(c), _) => c,
            (None, Some(s)) => self.n_states as f64 * s,
            (None, None) => DEFAULT_C_MIN,
        }
    }

    pub fn cdf_trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_CDF_TRIALS)
    }

    pub fn se_trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_SE_TRIALS)
    }

    pub fn sigma2_pn(&self) -> f64 {
        self.c_min() / self.n_states as f64
    }

    /// Sensing-phase noise power `N0 B` (W).
    pub fn noise_sensing(&self) -> f64 {
        dbm_hz_to_w_hz(self.n0_sensing_dbm_hz) * self.bandwidth
    }

    /// Control-phase noise power `N0 B` (W).
    pub fn noise_control(&self) -> f64 {
        dbm_hz_to_w_hz(self.n0_control_dbm_hz) * self.bandwidth
    }

    /// Fading gain of a plant on the outer ring without shadowing.
    pub fn reference_beta(&self) -> f64 {
        self.theta * self.r_outer.powf(-self.alpha)
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            zeta1: self.zeta1,
            zeta2: self.zeta2,
            ..SolverSettings::default()
        }
    }

    pub fn dynamics(&self, instability: f64) -> Result<PlantDynamics> {
        PlantDynamics::scaled_identity(self.n_states, instability, self.sigma2_pn())
    }

    /// Scenario with one plant per entry of `betas` and otherwise identical plants.
    pub fn build_system(&self, betas: &[f64]) -> Result<System> {
        let dynamics = self.dynamics(self.instability)?;
        let sensing = SensingSpec::from_dnr_db(self.n_states, self.sigma2_ps, self.dnr_db)?;
        let plants = betas
            .iter()
            .map(|&beta| PlantProfile {
                beta,
                chi: self.chi,
                dynamics,
                sensing,
                delta: self.delta,
                epsilon: self.epsilon,
            })
            .collect();
        let energy = EnergyProfile::uniform(
            betas.len(),
            self.mu_s,
            self.p_circ_s,
            self.mu_c,
            self.p_circ_c,
            self.p_s_max,
            self.p_c_max,
        )?;
        System::new(
            plants,
            energy,
            self.bandwidth,
            self.noise_sensing(),
            self.noise_control(),
            self.l_max,
        )
    }

    /// Placement and fading for `trial`, drawn from that trial's own stream.
    pub fn realization(&self, trial: u64) -> Result<ChannelRealization> {
        let mut rng = trial_rng(self.seed, trial);
        ChannelRealization::sample(
            self.plant_count,
            self.r_inner,
            self.r_outer,
            self.theta,
            self.sigma_sf_db,
            self.alpha,
            &mut rng,
        )
    }

    pub fn sample_system(&self, trial: u64) -> Result<(ChannelRealization, System)> {
        let realization = self.realization(trial)?;
        let system = self.build_system(&realization.betas())?;
        Ok((realization, system))
    }
}

fn apply_overrides<S: AsRef<str>>(table: &mut toml::Table, overrides: &[S]) -> Result<()> {
    for raw in overrides {
        let raw = raw.as_ref();
        let Some((key, value)) = raw.split_once('=') else {
            return Err(Error::config(raw, "override must have the form key=value"));
        };
        let key = key.trim();
        let parsed = parse_table(&format!("{key} = {}", value.trim()), key)?;
        table.extend(parsed);
    }
    Ok(())
}

fn load_from_text<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<SystemConfig> {
    let mut table = parse_table(text, "config")?;
    apply_overrides(&mut table, overrides)?;
    let config: SystemConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| {
        let msg = e.message().to_string();
        let field = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_else(|| "config".to_string());
        Error::config(field, msg)
    })?;
    config.validate()?;
    Ok(config)
}

/// Reads the file at `path` (if any), applies `key=value` overrides in
/// order, and validates the result.
pub fn load_config<S: AsRef<str>>(path: Option<&Path>, overrides: &[S]) -> Result<SystemConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    load_from_text(&text, overrides)
}
