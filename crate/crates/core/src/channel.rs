//! Plant geometry, large-scale fading and SINR statistics.
//!
//! Channels are represented only through SINR statistics: the deterministic
//! large-antenna SINR and the Beta/Gamma instantaneous control-phase SINR.
//! No M-dimensional channel vector is ever materialized, so sampling cost is
//! independent of the antenna count.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Independent random stream for one Monte-Carlo trial.
///
/// Every trial of an experiment seeded with `seed` gets its own ChaCha stream,
/// so trials can run in any order (or in parallel) with identical results.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Sensing,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantGeometry {
    /// Distance to the control center (m).
    pub r: f64,
    /// Angle (rad).
    pub phi: f64,
    pub x: f64,
    pub y: f64,
}

impl PlantGeometry {
    pub fn polar(r: f64, phi: f64) -> Self {
        Self {
            r,
            phi,
            x: r * phi.cos(),
            y: r * phi.sin(),
        }
    }

    pub fn distance(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleFading {
    /// Linear power gain `theta * xi * d^-alpha`.
    pub beta: f64,
    pub theta: f64,
    /// Shadow-fading multiplier.
    pub xi: f64,
    pub alpha: f64,
    pub distance: f64,
}

impl LargeScaleFading {
    pub fn new(theta: f64, xi: f64, alpha: f64, distance: f64) -> Result<Self> {
        if !(theta > 0.0 && alpha > 0.0) {
            return Err(Error::domain("large-scale fading", "theta and alpha must be positive"));
        }
        if !(distance > 0.0 && distance.is_finite()) {
            return Err(Error::domain("large-scale fading", format!("distance {distance} must be positive")));
        }
        if !(xi > 0.0) {
            return Err(Error::domain("large-scale fading", "shadowing multiplier must be positive"));
        }
        Ok(Self {
            beta: theta * xi * distance.powf(-alpha),
            theta,
            xi,
            alpha,
            distance,
        })
    }
}

/// Channel estimation accuracy `chi` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsiModel {
    chi: f64,
}

impl CsiModel {
    pub fn new(chi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&chi) {
            return Err(Error::domain("CSI accuracy", format!("chi={chi} outside [0, 1]")));
        }
        Ok(Self { chi })
    }

    pub fn perfect() -> Self {
        Self { chi: 1.0 }
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrSample {
    pub gamma: f64,
    pub phase: Phase,
}

/// Places `count` plants uniformly on the annulus `r_inner <= r <= r_outer`.
///
/// Radii use the inverse CDF `r = sqrt(r_I^2 + u (r_O^2 - r_I^2))`, which has
/// density `2x / (r_O^2 - r_I^2)`.
pub fn sample_plant_positions<R: Rng + ?Sized>(
    count: usize,
    r_inner: f64,
    r_outer: f64,
    rng: &mut R,
) -> Result<Vec<PlantGeometry>> {
    if count == 0 {
        return Err(Error::config("plant_count", "must be positive"));
    }
    if !(r_inner > 0.0 && r_inner < r_outer && r_outer.is_finite()) {
        return Err(Error::config(
            "r_inner",
            format!("radii must satisfy 0 < r_inner < r_outer (got {r_inner}, {r_outer})"),
        ));
    }
    let (ri2, ro2) = (r_inner * r_inner, r_outer * r_outer);
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let r = (ri2 + u * (ro2 - ri2)).sqrt().clamp(r_inner, r_outer);
            let phi = rng.random::<f64>() * TAU;
            PlantGeometry::polar(r, phi)
        })
        .collect())
}

/// Draws log-normal shadowing and evaluates `beta = theta * xi * d^-alpha`.
///
/// A zero shadowing deviation gives `xi = 1` exactly; one normal deviate is
/// still consumed so the stream layout does not depend on the deviation.
pub fn large_scale_fading<R: Rng + ?Sized>(
    geometry: &PlantGeometry,
    theta: f64,
    sigma_sf_db: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<LargeScaleFading> {
    if !(sigma_sf_db >= 0.0 && sigma_sf_db.is_finite()) {
        return Err(Error::domain("shadow fading", format!("deviation {sigma_sf_db} dB must be non-negative")));
    }
    let z: f64 = Normal::new(0.0, 1.0).expect("unit normal").sample(rng);
    let xi = if sigma_sf_db == 0.0 {
        1.0
    } else {
        10f64.powf(sigma_sf_db * z / 10.0)
    };
    let d = geometry.distance();
    if d == 0.0 {
        return Err(Error::domain("large-scale fading", "plant located at the control center"));
    }
    LargeScaleFading::new(theta, xi, alpha, d)
}

/// Large-antenna SINR `p * chi * beta / sigma^2` (identical form for both phases).
pub fn asymptotic_sinr(phase: Phase, p: f64, chi: f64, beta: f64, noise_power: f64) -> Result<SinrSample> {
    if !(p >= 0.0) {
        return Err(Error::domain("SINR", format!("power {p} must be non-negative")));
    }
    if !(noise_power > 0.0) {
        return Err(Error::domain("SINR", format!("noise power {noise_power} must be positive")));
    }
    Ok(SinrSample {
        gamma: p * chi * beta / noise_power,
        phase,
    })
}

/// Instantaneous control-phase SINR of plant `k` under matched-filter
/// precoding with `antennas` transmit antennas:
///
/// ```text
/// gamma = p_k chi beta G / (B G chi beta sum_{i!=k} p_i + beta (1-chi) sum_j p_j + M sigma^2)
/// ```
///
/// with `B ~ Beta(1, M-1)` and `G ~ Gamma(M, 1)`.
pub fn sample_instantaneous_sinr_control<R: Rng + ?Sized>(
    antennas: usize,
    powers: &[f64],
    k: usize,
    chi: f64,
    beta: f64,
    noise_power: f64,
    rng: &mut R,
) -> Result<SinrSample> {
    if antennas < 2 {
        return Err(Error::domain("instantaneous SINR", format!("need at least 2 antennas, got {antennas}")));
    }
    if k >= powers.len() {
        return Err(Error::domain("instantaneous SINR", format!("plant index {k} out of range")));
    }
    if powers.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::domain("instantaneous SINR", "powers must be non-negative"));
    }
    if !(noise_power > 0.0) {
        return Err(Error::domain("instantaneous SINR", "noise power must be positive"));
    }
    let m = antennas as f64;
    let rv_b = Beta::new(1.0, m - 1.0).expect("valid Beta parameters").sample(rng);
    let rv_g = Gamma::new(m, 1.0).expect("valid Gamma parameters").sample(rng);
    let total: f64 = powers.iter().sum();
    let interference = total - powers[k];
    let num = powers[k] * chi * beta * rv_g;
    let den = rv_b * rv_g * chi * beta * interference + beta * (1.0 - chi) * total + m * noise_power;
    Ok(SinrSample {
        gamma: num / den,
        phase: Phase::Control,
    })
}

/// Placement and large-scale fading of every plant for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub geometry: Vec<PlantGeometry>,
    pub fading: Vec<LargeScaleFading>,
}

impl ChannelRealization {
    #[allow(clippy::too_many_arguments)]
    pub fn sample<R: Rng + ?Sized>(
        count: usize,
        r_inner: f64,
        r_outer: f64,
        theta: f64,
        sigma_sf_db: f64,
        alpha: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let geometry = sample_plant_positions(count, r_inner, r_outer, rng)?;
        let fading = geometry
            .iter()
            .map(|g| large_scale_fading(g, theta, sigma_sf_db, alpha, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { geometry, fading })
    }

    pub fn betas(&self) -> Vec<f64> {
        self.fading.iter().map(|f| f.beta).collect()
    }
}
