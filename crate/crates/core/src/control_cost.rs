//! LQR rate-cost machinery.
//!
//! A plant is reduced to the handful of scalars the closed-form cost needs:
//! state dimension `N`, the data-rate floor `log2|det A|`, `|det M|`, the
//! entropy power of the process noise and the minimum cost `tr(Sigma_w S)`.
//! Full matrices are only accepted at construction.

use std::f64::consts::{E, LN_2, LOG2_E};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::rates::q_inverse;
use crate::{Error, Result};

/// Smallest exponent `x = (2/N) Omega ln 2` for which
/// `exp(x) - 1 >= exp(x - 1)`, i.e. `ln(e / (e - 1))`.
pub const UPPER_BOUND_MIN_EXPONENT: f64 = 0.458_675_145_387_081_9;

/// Entropy power of Gaussian process noise with per-component variance `sigma2_pn`.
pub fn entropy_power_gaussian(sigma2_pn: f64) -> Result<f64> {
    if !(sigma2_pn > 0.0 && sigma2_pn.is_finite()) {
        return Err(Error::domain("entropy power", format!("variance {sigma2_pn} must be positive")));
    }
    Ok(sigma2_pn)
}

/// Entropy power `exp(2 h / N) / (2 pi e)` from a differential entropy `h` in nats.
pub fn entropy_power(h_nats: f64, n_states: usize) -> Result<f64> {
    if n_states == 0 || !h_nats.is_finite() {
        return Err(Error::domain("entropy power", "need finite entropy and at least one state"));
    }
    Ok((2.0 * h_nats / n_states as f64).exp() / (2.0 * std::f64::consts::PI * E))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiSolution {
    pub s: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn riccati_m(s: &DMatrix<f64>, r: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inner = r + b.transpose() * s * b;
    let inv = inner
        .try_inverse()
        .ok_or(Error::Numeric("R + B^T S B is singular"))?;
    Ok(s * b * inv * b.transpose() * s)
}

fn riccati_residual(
    s: &DMatrix<f64>,
    m: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<f64> {
    let s_res = (q + a.transpose() * (s - m) * a - s).norm();
    let m_res = (riccati_m(s, r, b)? - m).norm();
    Ok(s_res.max(m_res))
}

/// Solves the coupled pair
///
/// ```text
/// S = Q + A^T (S - M) A
/// M = S B (R + B^T S B)^{-1} B^T S
/// ```
///
/// by fixed-point iteration on `S` with damping 0.5, starting from `S = Q`.
pub fn solve_riccati(
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<RiccatiSolution> {
    let n = a.nrows();
    for (name, mat) in [("Q", q), ("R", r), ("A", a), ("B", b)] {
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::domain("Riccati", format!("{name} must be {n}x{n}")));
        }
    }
    const DAMPING: f64 = 0.5;
    let mut s = q.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let m = riccati_m(&s, r, b)?;
        let target = q + a.transpose() * (&s - &m) * a;
        let next = &s * (1.0 - DAMPING) + target * DAMPING;
        let m_next = riccati_m(&next, r, b)?;
        residual = riccati_residual(&next, &m_next, q, r, a, b)?;
        s = next;
        if !residual.is_finite() {
            break;
        }
        if residual <= tol {
            return Ok(RiccatiSolution {
                s,
                m: m_next,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}

/// Scalar summary of a plant consumed by the closed-form LQR cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantDynamics {
    n_states: usize,
    log2_det_a: f64,
    det_m: f64,
    entropy_power: f64,
    c_min: f64,
}

impl PlantDynamics {
    pub fn new(n_states: usize, log2_det_a: f64, det_m: f64, entropy_power: f64, c_min: f64) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::domain("plant dynamics", "state dimension must be positive"));
        }
        if !(log2_det_a >= 0.0 && log2_det_a.is_finite()) {
            return Err(Error::domain(
                "plant dynamics",
                format!("log2|det A| = {log2_det_a} must be non-negative (unstable modes only)"),
            ));
        }
        if !(det_m > 0.0 && det_m.is_finite()) {
            return Err(Error::domain("plant dynamics", format!("|det M| = {det_m} must be positive")));
        }
        if !(entropy_power > 0.0 && entropy_power.is_finite()) {
            return Err(Error::domain("plant dynamics", "entropy power must be positive"));
        }
        if !(c_min > 0.0 && c_min.is_finite()) {
            return Err(Error::domain("plant dynamics", format!("c_min = {c_min} must be positive")));
        }
        Ok(Self {
            n_states,
            log2_det_a,
            det_m,
            entropy_power,
            c_min,
        })
    }

    /// `A = a I`, `Q = I`, `R = 0`, `B = I` with i.i.d. Gaussian noise of
    /// variance `sigma2_pn`, so that `S = M = I` and `c_min = N sigma2_pn`.
    pub fn scaled_identity(n_states: usize, a: f64, sigma2_pn: f64) -> Result<Self> {
        if !(a.abs() >= 1.0) {
            return Err(Error::domain("plant dynamics", format!("|a| = {} must be at least 1", a.abs())));
        }
        let z = entropy_power_gaussian(sigma2_pn)?;
        Self::new(n_states, n_states as f64 * a.abs().log2(), 1.0, z, n_states as f64 * sigma2_pn)
    }

    /// Reduces full system matrices through the Riccati pair.
    ///
    /// `M` must come out positive definite; semi-definite solutions are rejected.
    pub fn from_matrices(
        a: &DMatrix<f64>,
        b: &DMatrix<f64>,
        q: &DMatrix<f64>,
        r: &DMatrix<f64>,
        sigma_w: &DMatrix<f64>,
        entropy_power: f64,
    ) -> Result<Self> {
        let sol = solve_riccati(q, r, a, b, 1e-10, 10_000)?;
        let sym_m = (&sol.m + sol.m.transpose()) * 0.5;
        let chol = sym_m
            .cholesky()
            .ok_or_else(|| Error::domain("plant dynamics", "Riccati M is not positive definite"))?;
        let det_m = chol.l().diagonal().iter().map(|d| d * d).product::<f64>();
        let det_a = a.determinant().abs();
        if det_a == 0.0 {
            return Err(Error::domain("plant dynamics", "A is singular"));
        }
        let c_min = (sigma_w * &sol.s).trace();
        Self::new(a.nrows(), det_a.log2(), det_m, entropy_power, c_min)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn log2_det_a(&self) -> f64 {
        self.log2_det_a
    }

    pub fn det_m(&self) -> f64 {
        self.det_m
    }

    pub fn entropy_power(&self) -> f64 {
        self.entropy_power
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    /// `N Z |det M|^(1/N)`, the numerator of the closed-form cost.
    pub fn cost_scale(&self) -> f64 {
        let n = self.n_states as f64;
        n * self.entropy_power * self.det_m.powf(1.0 / n)
    }

    /// Surplus `Omega` at which `(2/N) Omega ln 2` reaches
    /// [`UPPER_BOUND_MIN_EXPONENT`].
    pub fn upper_bound_min_omega(&self) -> f64 {
        self.n_states as f64 * UPPER_BOUND_MIN_EXPONENT / (2.0 * LN_2)
    }

    fn exponent(&self, omega: f64) -> f64 {
        2.0 * omega * LN_2 / self.n_states as f64
    }
}

/// Lower bound on the rate needed to hold the plant at cost `c`, in bits:
/// `log2|det A| + (N/2) log2(1 + Z |det M|^(1/N) / ((c - c_min)/N))`.
pub fn rate_cost_lower_bound(dynamics: &PlantDynamics, c: f64) -> Result<f64> {
    if !(c > dynamics.c_min) {
        return Err(Error::domain("rate-cost bound", format!("cost {c} must exceed c_min {}", dynamics.c_min)));
    }
    let n = dynamics.n_states as f64;
    let ratio = dynamics.cost_scale() / (c - dynamics.c_min);
    Ok(dynamics.log2_det_a + 0.5 * n * ratio.log2_1p())
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() * LOG2_E
    }
}

/// Information surplus of the control phase over the data-rate floor, in bits:
/// `L B log2(1+gamma) - sqrt(L B) Q^{-1}(eps) log2 e - log2|det A|`.
#[allow(clippy::too_many_arguments)]
pub fn omega(
    p_c: f64,
    l_c: f64,
    bandwidth: f64,
    epsilon: f64,
    chi: f64,
    beta: f64,
    noise_power: f64,
    log2_det_a: f64,
) -> Result<f64> {
    if !(noise_power > 0.0) || p_c < 0.0 {
        return Err(Error::domain("information surplus", "power must be non-negative and noise positive"));
    }
    omega_from_sinr(p_c * chi * beta / noise_power, l_c * bandwidth, epsilon, log2_det_a)
}

pub(crate) fn omega_from_sinr(gamma: f64, blocklength: f64, epsilon: f64, log2_det_a: f64) -> Result<f64> {
    if !(blocklength >= 1.0) || !blocklength.is_finite() {
        return Err(Error::domain("information surplus", format!("blocklength {blocklength} below one channel use")));
    }
    Ok(blocklength * gamma.log2_1p() - blocklength.sqrt() * q_inverse(epsilon)? * LOG2_E - log2_det_a)
}

/// Closed-form LQR cost at information surplus `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LqrCost {
    /// Cost above the floor, `N Z |det M|^(1/N) / (2^(2 Omega/N) - 1)`.
    ///
    /// Kept separately because it falls below the resolution of `c_min`
    /// long before it reaches zero.
    pub excess: f64,
    pub c_min: f64,
    pub omega: f64,
}

impl LqrCost {
    pub fn value(&self) -> f64 {
        self.c_min + self.excess
    }
}

/// `c = N Z |det M|^(1/N) / (exp((2/N) Omega ln 2) - 1) + c_min`.
pub fn lqr_cost(dynamics: &PlantDynamics, omega: f64) -> Result<LqrCost> {
    if !(omega > 0.0) {
        return Err(Error::StabilizationInfeasible { omega });
    }
    let excess = dynamics.cost_scale() / dynamics.exponent(omega).exp_m1();
    Ok(LqrCost {
        excess,
        c_min: dynamics.c_min,
        omega,
    })
}

/// Upper bound `N Z |det M|^(1/N) / exp((2/N) Omega ln 2 - 1) + c_min` on
/// [`lqr_cost`], valid once the exponent reaches [`UPPER_BOUND_MIN_EXPONENT`].
pub fn lqr_cost_upper_bound(dynamics: &PlantDynamics, omega: f64) -> Result<f64> {
    let x = dynamics.exponent(omega);
    // A few ulps of slack so the boundary value computed from
    // `upper_bound_min_omega` is accepted.
    if !(x >= UPPER_BOUND_MIN_EXPONENT * (1.0 - 1e-12)) {
        return Err(Error::domain(
            "LQR cost upper bound",
            format!("exponent {x} below {UPPER_BOUND_MIN_EXPONENT}; the bound does not hold"),
        ));
    }
    Ok(upper_bound_unchecked(dynamics, omega))
}

/// The upper-bound expression without the validity check.
pub(crate) fn upper_bound_unchecked(dynamics: &PlantDynamics, omega: f64) -> f64 {
    dynamics.c_min + dynamics.cost_scale() * (1.0 - dynamics.exponent(omega)).exp()
}
