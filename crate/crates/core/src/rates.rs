//! Finite-blocklength rates for the sensing and control phases.
//!
//! All information quantities are in bits (log base 2). The normal
//! approximation uses the high-SINR channel dispersion `(log2 e)^2`, which
//! upper-bounds the exact complex-AWGN dispersion, so the rates returned here
//! are lower bounds on the normal-approximation rate.

use std::f64::consts::{LOG2_E, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf;

use crate::{Error, Result};

/// Latency budget and per-phase transmission error targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UrllcRequirement {
    /// Round-trip latency budget (s).
    pub l_max: f64,
    /// Sensing-phase error probability.
    pub delta: f64,
    /// Control-phase error probability.
    pub epsilon: f64,
}

impl UrllcRequirement {
    pub fn new(l_max: f64, delta: f64, epsilon: f64) -> Result<Self> {
        if !(l_max > 0.0 && l_max.is_finite()) {
            return Err(Error::domain("latency budget", format!("{l_max} s must be positive")));
        }
        for (name, p) in [("delta", delta), ("epsilon", epsilon)] {
            if !(p > 0.0 && p < 0.5) {
                return Err(Error::domain("error probability", format!("{name}={p} outside (0, 0.5)")));
            }
        }
        Ok(Self { l_max, delta, epsilon })
    }
}

/// Gaussian plant-state source to be described to the control center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingSpec {
    pub n_states: usize,
    /// Per-component plant-state variance.
    pub sigma2_ps: f64,
    /// Target mean-square distortion per component.
    pub distortion: f64,
}

impl SensingSpec {
    pub fn new(n_states: usize, sigma2_ps: f64, distortion: f64) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::domain("sensing spec", "at least one plant state is required"));
        }
        if !(sigma2_ps > 0.0 && sigma2_ps.is_finite()) {
            return Err(Error::domain("sensing spec", format!("state variance {sigma2_ps} must be positive")));
        }
        if !(distortion > 0.0 && distortion <= sigma2_ps) {
            return Err(Error::domain(
                "sensing spec",
                format!("distortion {distortion} must lie in (0, {sigma2_ps}]"),
            ));
        }
        Ok(Self {
            n_states,
            sigma2_ps,
            distortion,
        })
    }

    /// Builds the requirement from a distortion-to-noise ratio `d / sigma2_ps` in dB.
    pub fn from_dnr_db(n_states: usize, sigma2_ps: f64, dnr_db: f64) -> Result<Self> {
        Self::new(n_states, sigma2_ps, sigma2_ps * 10f64.powf(dnr_db / 10.0))
    }

    pub fn dnr_db(&self) -> f64 {
        10.0 * (self.distortion / self.sigma2_ps).log10()
    }

    /// Total rate-distortion requirement `N * R(d)` in bits.
    pub fn required_bits(&self) -> f64 {
        self.n_states as f64 * 0.5 * (self.sigma2_ps / self.distortion).log2()
    }
}

/// A rate together with the blocklength it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// bits/s/Hz; may be negative at very short blocklengths.
    pub value: f64,
    /// Channel uses `L * B`.
    pub blocklength: f64,
}

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erf::erfc(x / SQRT_2)
}

/// Inverse of the Gaussian Q-function, `Q^{-1}(p) = sqrt(2) erfc^{-1}(2p)`.
///
/// Round-trips `q_function(q_inverse(p)) == p` to better than 1e-9 relative
/// for `p` down to 1e-12.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("Q-function inverse", format!("probability {p} outside (0, 1)")));
    }
    Ok(SQRT_2 * erf::erfc_inv(2.0 * p))
}

/// Sensing-phase spectral efficiency `log2(1 + gamma)`.
pub fn sensing_capacity(gamma_s: f64) -> f64 {
    gamma_s.ln_1p() * LOG2_E
}

/// Exact complex-AWGN channel dispersion `(1 - (1+gamma)^-2)(log2 e)^2`.
pub fn channel_dispersion(gamma: f64) -> f64 {
    (1.0 - (1.0 + gamma).powi(-2)) * LOG2_E * LOG2_E
}

fn check_blocklength(what: &'static str, blocklength: f64) -> Result<()> {
    if !(blocklength >= 1.0) || !blocklength.is_finite() {
        return Err(Error::domain(what, format!("blocklength {blocklength} must be at least one channel use")));
    }
    Ok(())
}

/// Control-phase finite-blocklength rate
/// `log2(1+gamma) - sqrt(1/(L B)) Q^{-1}(eps) log2 e`.
///
/// Negative values are returned as-is; whether they are usable is the
/// caller's decision.
pub fn control_rate(gamma_c: f64, l_c: f64, bandwidth: f64, epsilon: f64) -> Result<RateResult> {
    let blocklength = l_c * bandwidth;
    check_blocklength("control rate", blocklength)?;
    let penalty = q_inverse(epsilon)? * LOG2_E / blocklength.sqrt();
    Ok(RateResult {
        value: sensing_capacity(gamma_c) - penalty,
        blocklength,
    })
}

/// Rate-distortion function of an i.i.d. Gaussian component, bits per state.
pub fn gaussian_rate_distortion(spec: &SensingSpec) -> Result<f64> {
    if !(spec.distortion > 0.0 && spec.distortion <= spec.sigma2_ps) {
        return Err(Error::domain(
            "rate-distortion",
            format!("distortion {} exceeds variance {}", spec.distortion, spec.sigma2_ps),
        ));
    }
    Ok(0.5 * (spec.sigma2_ps / spec.distortion).log2())
}

/// Rate-dispersion of a Gaussian source under mean-square distortion, bits^2.
pub fn gaussian_rate_dispersion() -> f64 {
    0.5 * LOG2_E * LOG2_E
}

/// Outcome of checking the sensing-phase finite-blocklength constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingCheck {
    pub satisfied: bool,
    /// Left-hand side minus right-hand side, in bits.
    pub slack: f64,
}

/// Sensing-phase constraint:
/// `L B log2(1+gamma) >= (N/2) log2(s2/d) + sqrt(L B + N/2) Q^{-1}(delta) log2 e`.
pub fn sensing_slack(gamma_s: f64, l_s: f64, bandwidth: f64, spec: &SensingSpec, delta: f64) -> Result<f64> {
    let blocklength = l_s * bandwidth;
    check_blocklength("sensing constraint", blocklength)?;
    let n = spec.n_states as f64;
    let lhs = blocklength * sensing_capacity(gamma_s);
    let rhs = n * gaussian_rate_distortion(spec)?
        + (blocklength + 0.5 * n).sqrt() * q_inverse(delta)? * LOG2_E;
    Ok(lhs - rhs)
}

#[allow(clippy::too_many_arguments)]
pub fn sensing_constraint_satisfied(
    p_s: f64,
    l_s: f64,
    bandwidth: f64,
    spec: &SensingSpec,
    delta: f64,
    chi: f64,
    beta: f64,
    noise_power: f64,
) -> Result<SensingCheck> {
    if p_s < 0.0 || noise_power <= 0.0 {
        return Err(Error::domain("sensing constraint", "power must be non-negative and noise positive"));
    }
    let slack = sensing_slack(p_s * chi * beta / noise_power, l_s, bandwidth, spec, delta)?;
    Ok(SensingCheck {
        satisfied: slack >= 0.0,
        slack,
    })
}
