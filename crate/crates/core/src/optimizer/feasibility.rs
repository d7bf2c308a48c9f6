//! Closed-form resource floors, the power and latency feasibility
//! subproblems, and the epigraph bisection that drives them.

use serde::{Deserialize, Serialize};

use super::model::{sensing_latency_core, sensing_power_core, Model};
use super::scalar::{bisect_boundary, golden_section_max};
use super::{Infeasibility, Probe, SolverSettings};
use crate::ece::Allocation;
use crate::rates::{q_inverse, SensingSpec};
use crate::system::System;
use crate::{Error, Result};

fn check_link(chi: f64, beta: f64, noise_power: f64) -> Result<()> {
    if !(chi * beta > 0.0 && noise_power > 0.0) {
        return Err(Error::domain("sensing bound", "need chi * beta > 0 and positive noise power"));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<f64> {
    if !(delta < 0.5) {
        return Err(Error::domain("sensing bound", format!("delta={delta} must be below 0.5")));
    }
    q_inverse(delta)
}

/// Smallest sensing power meeting the sensing constraint at latency `l_s`:
/// `(sigma^2 / chi beta) (exp(Phi) - 1)` with
/// `Phi = N log2(s2/d) / (2 L B log2 e) + sqrt(L B + N/2) Q^{-1}(delta) / (L B)`.
pub fn min_sensing_power(
    l_s: f64,
    bandwidth: f64,
    spec: &SensingSpec,
    delta: f64,
    chi: f64,
    beta: f64,
    noise_power: f64,
) -> Result<f64> {
    let n = l_s * bandwidth;
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::domain("minimum sensing power", format!("blocklength {n} below one channel use")));
    }
    check_link(chi, beta, noise_power)?;
    let qinv = check_delta(delta)?;
    Ok(sensing_power_core(
        n,
        spec.required_bits(),
        spec.n_states as f64,
        qinv,
        chi * beta / noise_power,
    ))
}

/// Shortest sensing latency meeting the sensing constraint at power `p_s`,
/// the positive root of the quadratic in `L`:
///
/// ```text
/// L = [2 q0 q1 + B + sqrt(4 B q0 q1 + 2 N q0^2 + B^2)] / (2 q0^2)
/// q0 = B log2(1 + gamma) / (Q^{-1}(delta) log2 e)
/// q1 = N log2(s2/d) / (2 Q^{-1}(delta) log2 e)
/// ```
pub fn min_sensing_latency(
    p_s: f64,
    bandwidth: f64,
    spec: &SensingSpec,
    delta: f64,
    chi: f64,
    beta: f64,
    noise_power: f64,
) -> Result<f64> {
    if !(p_s > 0.0 && p_s.is_finite()) {
        return Err(Error::domain("minimum sensing latency", format!("power {p_s} must be positive")));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::domain("minimum sensing latency", "bandwidth must be positive"));
    }
    check_link(chi, beta, noise_power)?;
    let qinv = check_delta(delta)?;
    Ok(sensing_latency_core(
        p_s * chi * beta / noise_power,
        bandwidth,
        spec.required_bits(),
        spec.n_states as f64,
        qinv,
    ))
}

/// `min_k (f_k - eta g~_k)` at an allocation.
pub fn surrogate_objective(system: &System, eta: f64, alloc: &Allocation) -> Result<f64> {
    let m = Model::new(system)?;
    Ok((0..m.len())
        .map(|k| m.surrogate_gap(eta, k, alloc.p_s[k], alloc.p_c[k], alloc.l_s, alloc.l_c))
        .fold(f64::INFINITY, f64::min))
}

/// Shortest latencies usable at all: sensing at full sensing power, control
/// at full control power with the surplus the surrogate needs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LatencyBounds {
    pub l_s_lo: f64,
    pub l_c_lo: f64,
    pub worst_sensing: usize,
    pub worst_control: usize,
}

impl LatencyBounds {
    pub fn new(m: &Model) -> Self {
        let e = &m.sys.energy;
        let min_block = 1.0 / m.sys.bandwidth;
        let mut b = LatencyBounds {
            l_s_lo: min_block,
            l_c_lo: min_block,
            worst_sensing: 0,
            worst_control: 0,
        };
        for k in 0..m.len() {
            let ls = if e.p_s_max > 0.0 { m.min_sensing_latency(k, e.p_s_max) } else { f64::INFINITY };
            if !(ls <= b.l_s_lo) {
                b.l_s_lo = ls;
                b.worst_sensing = k;
            }
            let lc = m.latency_floor(k, e.p_c_max, m.omega_valid(k));
            if !(lc <= b.l_c_lo) {
                b.l_c_lo = lc;
                b.worst_control = k;
            }
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerWitness {
    pub p_s: Vec<f64>,
    pub p_c: Vec<f64>,
}

/// Per-plant control-power requirement at level `psi`: the lower end of the
/// interval where the concave gap clears `psi`, or the shortfall of its peak.
fn power_requirement(m: &Model, eta: f64, psi: f64, k: usize, p_s: f64, l_s: f64, l_c: f64) -> Result<f64, f64> {
    let p_max = m.sys.energy.p_c_max;
    let floor = m.power_floor(k, l_c, m.omega_valid(k));
    if !(floor <= p_max) {
        return Err(f64::INFINITY);
    }
    let h = |p: f64| m.surrogate_gap(eta, k, p_s, p, l_s, l_c);
    if h(floor) >= psi {
        return Ok(floor);
    }
    let (p_star, h_star) = golden_section_max(h, floor, p_max);
    if h_star < psi {
        return Err(psi - h_star);
    }
    Ok(bisect_boundary(|p| h(p) >= psi, p_star, floor))
}

pub(crate) fn fp_power(m: &Model, eta: f64, psi: f64, l_s: f64, l_c: f64) -> Probe<PowerWitness> {
    let e = &m.sys.energy;
    let mut p_s = Vec::with_capacity(m.len());
    for k in 0..m.len() {
        let p = m.min_sensing_power(k, l_s);
        if !(p <= e.p_s_max) {
            return Probe::Infeasible(Infeasibility::SensingUnattainable { plant: k });
        }
        p_s.push(p);
    }
    let mut p_c = Vec::with_capacity(m.len());
    for (k, &ps) in p_s.iter().enumerate() {
        match power_requirement(m, eta, psi, k, ps, l_s, l_c) {
            Ok(p) => p_c.push(p),
            Err(gap) if gap.is_infinite() => {
                return Probe::Infeasible(Infeasibility::ControlUnattainable { plant: k });
            }
            Err(_) => return Probe::Infeasible(Infeasibility::NoWitness),
        }
    }
    if p_c.iter().sum::<f64>() > e.p_c_max {
        return Probe::Infeasible(Infeasibility::ControlPowerBudget);
    }
    Probe::Feasible(PowerWitness { p_s, p_c })
}

/// Power feasibility at fixed latencies: is there `(p_s, p_c)` with
/// `f_k - eta g~_k >= psi` for every plant?
///
/// Sensing powers sit at their minimum. Each control power is the lower end
/// of the interval where the (concave) per-plant gap clears `psi`; the check
/// passes when those lower ends fit in the shared budget.
pub fn solve_fp_power(system: &System, eta: f64, psi: f64, l_s: f64, l_c: f64) -> Result<Probe<PowerWitness>> {
    for (name, l) in [("sensing", l_s), ("control", l_c)] {
        if !(l * system.bandwidth >= 1.0) {
            return Err(Error::domain("power subproblem", format!("{name} latency {l} below one channel use")));
        }
    }
    Ok(fp_power(&Model::new(system)?, eta, psi, l_s, l_c))
}

pub(crate) fn fp_latency(m: &Model, eta: f64, psi: f64, p_s: &[f64], p_c: &[f64]) -> Probe<(f64, f64)> {
    let sys = m.sys;
    let min_block = 1.0 / sys.bandwidth;
    let mut l_s = min_block;
    let mut worst_sensing = 0;
    for (k, &p) in p_s.iter().enumerate() {
        let l = m.min_sensing_latency(k, p);
        if !(l <= l_s) {
            l_s = l;
            worst_sensing = k;
        }
    }
    if !(l_s < sys.l_max) {
        return Probe::Infeasible(Infeasibility::SensingUnattainable { plant: worst_sensing });
    }
    let mut floor = min_block;
    let mut worst_control = 0;
    for (k, &p) in p_c.iter().enumerate() {
        let l = m.latency_floor(k, p, m.omega_valid(k));
        if !(l <= floor) {
            floor = l;
            worst_control = k;
        }
    }
    let upper = sys.l_max - l_s;
    if !(floor <= upper) {
        return Probe::Infeasible(Infeasibility::ControlUnattainable { plant: worst_control });
    }
    let h = |l: f64| {
        (0..p_c.len())
            .map(|k| m.surrogate_gap(eta, k, p_s[k], p_c[k], l_s, l))
            .fold(f64::INFINITY, f64::min)
    };
    if h(floor) >= psi {
        return Probe::Feasible((l_s, floor));
    }
    let (l_star, h_star) = golden_section_max(h, floor, upper);
    if h_star < psi {
        return Probe::Infeasible(Infeasibility::NoWitness);
    }
    Probe::Feasible((l_s, bisect_boundary(|l| h(l) >= psi, l_star, floor)))
}

/// Latency feasibility at fixed powers. Returns `(l_s, l_c)`: the shortest
/// sensing latency the powers allow and the shortest control latency at
/// which every plant clears `psi`.
pub fn solve_fp_latency(system: &System, eta: f64, psi: f64, p_s: &[f64], p_c: &[f64]) -> Result<Probe<(f64, f64)>> {
    if p_s.len() != system.plant_count() || p_c.len() != system.plant_count() {
        return Err(Error::domain("latency subproblem", "one power per plant and phase required"));
    }
    if p_s.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::domain("latency subproblem", "sensing powers must be positive"));
    }
    Ok(fp_latency(&Model::new(system)?, eta, psi, p_s, p_c))
}

/// Control power left over at level `psi` once every plant gets its
/// requirement; strongly negative (and ordered by total shortfall) when some
/// plant cannot reach `psi` at all.
fn headroom(m: &Model, eta: f64, psi: f64, l_s: f64, l_c: f64) -> f64 {
    let e = &m.sys.energy;
    let mut total = 0.0;
    let mut shortfall = 0.0;
    for k in 0..m.len() {
        let p_s = m.min_sensing_power(k, l_s);
        if !(p_s <= e.p_s_max) {
            shortfall += 1.0;
            continue;
        }
        match power_requirement(m, eta, psi, k, p_s, l_s, l_c) {
            Ok(p) => total += p,
            Err(gap) => shortfall += gap.min(1.0),
        }
    }
    if shortfall > 0.0 {
        -(m.len() as f64) * e.p_c_max.max(1.0) * (1.0 + shortfall)
    } else {
        e.p_c_max - total
    }
}

/// One sweep over the latencies: control latency, then sensing latency,
/// each chosen to leave the most control power at level `psi`.
fn latency_search(m: &Model, bounds: &LatencyBounds, eta: f64, psi: f64, tau: (f64, f64)) -> (f64, f64) {
    let l_max = m.sys.l_max;
    let (mut l_s, mut l_c) = tau;
    if bounds.l_c_lo <= l_max - l_s {
        l_c = golden_section_max(|l| headroom(m, eta, psi, l_s, l), bounds.l_c_lo, l_max - l_s).0;
    }
    if bounds.l_s_lo <= l_max - l_c {
        l_s = golden_section_max(|l| headroom(m, eta, psi, l, l_c), bounds.l_s_lo, l_max - l_c).0;
    }
    (l_s, l_c)
}

/// Epigraph bisection bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionState {
    pub psi_min: f64,
    pub psi_max: f64,
    pub tolerance: f64,
    pub best_feasible: Option<Allocation>,
    /// Number of halvings performed.
    pub steps: usize,
    /// Reason the most recent rejected probe failed.
    pub last_rejection: Option<Infeasibility>,
}

/// One probe at level `psi`: a latency sweep scored by the power subproblem,
/// then the power step and the latency step at the chosen point. A failed
/// latency step keeps the swept latencies, which are still a witness.
fn probe(m: &Model, bounds: &LatencyBounds, eta: f64, psi: f64, tau: (f64, f64)) -> Probe<Allocation> {
    let (l_s, l_c) = latency_search(m, bounds, eta, psi, tau);
    let powers = match fp_power(m, eta, psi, l_s, l_c) {
        Probe::Feasible(w) => w,
        Probe::Infeasible(why) => return Probe::Infeasible(why),
    };
    let (l_s, l_c) = match fp_latency(m, eta, psi, &powers.p_s, &powers.p_c) {
        Probe::Feasible(l) => l,
        Probe::Infeasible(_) => (l_s, l_c),
    };
    Probe::Feasible(Allocation {
        p_s: powers.p_s,
        p_c: powers.p_c,
        l_s,
        l_c,
    })
}

pub(crate) fn bisection(m: &Model, eta: f64, l_init: (f64, f64), settings: &SolverSettings) -> BisectionState {
    let bounds = LatencyBounds::new(m);
    let (mut psi_min, mut psi_max) = (f64::INFINITY, f64::INFINITY);
    for k in 0..m.len() {
        let c_min = m.sys.c_min(k);
        psi_min = psi_min.min(-eta * c_min);
        psi_max = psi_max.min(m.e_max_fece - eta * c_min);
    }
    let mut state = BisectionState {
        psi_min,
        psi_max,
        tolerance: settings.zeta2,
        best_feasible: None,
        steps: 0,
        last_rejection: None,
    };
    let mut tau = l_init;
    while state.psi_max - state.psi_min > state.tolerance && state.steps < settings.max_bisection {
        let psi = 0.5 * (state.psi_min + state.psi_max);
        state.steps += 1;
        match probe(m, &bounds, eta, psi, tau) {
            Probe::Feasible(alloc) => {
                state.psi_min = psi;
                tau = (alloc.l_s, alloc.l_c);
                state.best_feasible = Some(alloc);
            }
            Probe::Infeasible(why) => {
                state.psi_max = psi;
                state.last_rejection = Some(why);
            }
        }
    }
    if state.best_feasible.is_none() {
        match probe(m, &bounds, eta, state.psi_min, tau) {
            Probe::Feasible(alloc) => state.best_feasible = Some(alloc),
            Probe::Infeasible(why) => state.last_rejection = Some(why),
        }
    }
    state
}

/// Bisects the epigraph level `psi` of `max min_k (f_k - eta g~_k)`,
/// starting from latencies `l_init`.
pub fn subproblem_bisection(
    system: &System,
    eta: f64,
    l_init: (f64, f64),
    settings: &SolverSettings,
) -> Result<BisectionState> {
    if !(eta >= 0.0) {
        return Err(Error::domain("epigraph bisection", format!("eta={eta} must be non-negative")));
    }
    Ok(bisection(&Model::new(system)?, eta, l_init, settings))
}

pub(crate) fn diagnose_model(m: &Model) -> Option<Infeasibility> {
    let sys = m.sys;
    let e = &sys.energy;
    let bounds = LatencyBounds::new(m);
    if !(bounds.l_s_lo < sys.l_max) {
        return Some(Infeasibility::SensingUnattainable {
            plant: bounds.worst_sensing,
        });
    }
    let l_c = sys.l_max - bounds.l_s_lo;
    if l_c * sys.bandwidth < 1.0 || bounds.l_c_lo > l_c {
        return Some(Infeasibility::ControlUnattainable {
            plant: bounds.worst_control,
        });
    }
    let total: f64 = (0..m.len()).map(|k| m.power_floor(k, l_c, m.omega_valid(k))).sum();
    if total > e.p_c_max {
        return Some(Infeasibility::ControlPowerBudget);
    }
    None
}

/// Reports the first constraint that fails even with every resource at its
/// cap, or `None` when caps suffice.
pub fn diagnose(system: &System) -> Result<Option<Infeasibility>> {
    Ok(diagnose_model(&Model::new(system)?))
}

/// Starting latencies for the bisection: an even split when it admits
/// powers within the caps, otherwise the shortest sensing latency at full
/// sensing power with the remainder given to control.
pub(crate) fn initial_latencies(m: &Model) -> std::result::Result<(f64, f64), Infeasibility> {
    if let Some(why) = diagnose_model(m) {
        return Err(why);
    }
    let sys = m.sys;
    let e = &sys.energy;
    let half = 0.5 * sys.l_max;
    let even_ok = half * sys.bandwidth >= 1.0 && {
        let mut total = 0.0;
        let mut ok = true;
        for k in 0..m.len() {
            let pc = m.power_floor(k, half, m.omega_valid(k));
            ok &= m.min_sensing_power(k, half) <= e.p_s_max && pc <= e.p_c_max;
            total += pc;
        }
        ok && total <= e.p_c_max
    };
    if even_ok {
        return Ok((half, half));
    }
    let l_s = LatencyBounds::new(m).l_s_lo;
    Ok((l_s, sys.l_max - l_s))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::LOG2_E;

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::energy::EceKind;
    use crate::rates::sensing_slack;
    use crate::system::fixtures::{small_system, table_system};

    fn spec() -> SensingSpec {
        SensingSpec::from_dnr_db(100, 1.0, -6.0).unwrap()
    }

    #[test]
    fn min_power_example() {
        let p = min_sensing_power(5e-4, 5e5, &spec(), 1e-5, 0.8, 1e-6, 5e-11).unwrap();
        assert_relative_eq!(p, 4.821_474_953_680_240_8e-5, max_relative = 1e-10);
        let gamma = p * 0.8 * 1e-6 / 5e-11;
        assert!(sensing_slack(gamma, 5e-4, 5e5, &spec(), 1e-5).unwrap().abs() < 1e-6);
    }

    #[test]
    fn min_power_vanishes_without_demand() {
        let trivial = SensingSpec::new(4, 1.0, 1.0).unwrap();
        let p = min_sensing_power(5e-4, 5e5, &trivial, 0.499_999_999, 0.8, 1e-6, 5e-11).unwrap();
        assert!(p < 1e-12);
        assert!(min_sensing_power(1e-7, 5e5, &spec(), 1e-5, 0.8, 1e-6, 5e-11).is_err());
    }

    #[test]
    fn min_latency_properties() {
        let l1 = min_sensing_latency(1e-3, 5e5, &spec(), 1e-5, 0.8, 1e-6, 5e-11).unwrap();
        let l2 = min_sensing_latency(1e-2, 5e5, &spec(), 1e-5, 0.8, 1e-6, 5e-11).unwrap();
        assert!(l2 < l1);
        assert!(min_sensing_latency(0.0, 5e5, &spec(), 1e-5, 0.8, 1e-6, 5e-11).is_err());

        let trivial = SensingSpec::new(100, 1.0, 1.0).unwrap();
        let l = min_sensing_latency(1e-3, 5e5, &trivial, 1e-5, 0.8, 1e-6, 5e-11).unwrap();
        let q0 = 5e5 * (1.0 + 16.0f64).log2() / (q_inverse(1e-5).unwrap() * LOG2_E);
        let expected = (5e5 + (200.0 * q0 * q0 + 25e10f64).sqrt()) / (2.0 * q0 * q0);
        assert_relative_eq!(l, expected, max_relative = 1e-12);
        assert!(l > 0.0);
    }

    #[test]
    fn floors_hit_target_surplus() {
        let sys = table_system(2, 3e-8);
        let m = Model::new(&sys).unwrap();
        let target = m.omega_valid(0);
        let p = m.power_floor(0, 2e-4, target);
        assert_relative_eq!(sys.omega(0, p, 2e-4).unwrap(), target, max_relative = 1e-9);
        let l = m.latency_floor(0, 0.7, target);
        assert_relative_eq!(sys.omega(0, 0.7, l).unwrap(), target, max_relative = 1e-9);
        assert_eq!(m.latency_floor(0, 0.0, target), f64::INFINITY);
    }

    #[test]
    fn fp_power_very_low_level_is_feasible_near_floor() {
        let sys = table_system(4, 3e-8);
        let m = Model::new(&sys).unwrap();
        let eta = 1.0;
        let psi = -sys.e_max(EceKind::Fece) - 10.0;
        let Probe::Feasible(w) = solve_fp_power(&sys, eta, psi, 5e-4, 5e-4).unwrap() else {
            panic!("expected a witness");
        };
        for k in 0..4 {
            assert_relative_eq!(w.p_c[k], m.power_floor(k, 5e-4, m.omega_valid(k)), max_relative = 1e-12);
            assert!(sys.sensing_slack(k, w.p_s[k], 5e-4).unwrap().abs() < 1e-6);
        }
        assert!(w.p_c.iter().sum::<f64>() <= sys.energy.p_c_max);
    }

    #[test]
    fn fp_power_rejects_level_above_bound() {
        let sys = table_system(4, 3e-8);
        let eta = 1.0;
        let psi = sys.e_max(EceKind::Fece) - eta * 0.1 + 1e-6;
        assert!(matches!(
            solve_fp_power(&sys, eta, psi, 5e-4, 5e-4).unwrap(),
            Probe::Infeasible(_)
        ));
    }

    #[test]
    fn fp_power_matches_power_grid_verdict() {
        let sys = small_system([2e-9, 8e-9]);
        let m = Model::new(&sys).unwrap();
        let (l_s, l_c) = (2e-4, 1e-4);
        let e_max = sys.e_max(EceKind::Fece);
        let n = 200;
        let pmax = sys.energy.p_c_max;
        let p_s: Vec<f64> = (0..2).map(|k| m.min_sensing_power(k, l_s)).collect();
        let ok = |eta: f64, psi: f64, k: usize, p: f64| {
            m.omega(k, p, l_c) >= m.omega_valid(k) && m.surrogate_gap(eta, k, p_s[k], p, l_s, l_c) >= psi
        };
        for eta in [1.0, 3.0, 5.0] {
            for frac in [0.2, 0.5, 0.8, 0.95] {
                let psi = -eta * 0.1 + frac * e_max;
                let solver = solve_fp_power(&sys, eta, psi, l_s, l_c).unwrap();
                let mut grid = false;
                for i in 1..=n {
                    for j in 1..=n {
                        let (p1, p2) = (pmax * i as f64 / n as f64, pmax * j as f64 / n as f64);
                        grid |= p1 + p2 <= pmax && ok(eta, psi, 0, p1) && ok(eta, psi, 1, p2);
                    }
                }
                match solver {
                    Probe::Feasible(w) => {
                        for k in 0..2 {
                            assert!(m.surrogate_gap(eta, k, w.p_s[k], w.p_c[k], l_s, l_c) >= psi);
                        }
                        assert!(w.p_c.iter().sum::<f64>() <= pmax);
                    }
                    Probe::Infeasible(_) => assert!(!grid, "grid found a witness at eta={eta}, psi={psi}"),
                }
            }
        }
    }

    #[test]
    fn fp_latency_matches_dense_grid() {
        let sys = small_system([2e-9, 8e-9]);
        let m = Model::new(&sys).unwrap();
        let p_s: Vec<f64> = (0..2).map(|k| m.min_sensing_power(k, 2e-4)).collect();
        let p_c = vec![2.0, 1.0];
        let eta = 3.0;
        let l_s = (0..2).map(|k| m.min_sensing_latency(k, p_s[k])).fold(0.0, f64::max);
        let upper = sys.l_max - l_s;
        let n = 10_000;
        let h = |l: f64| {
            (0..2)
                .map(|k| {
                    if m.omega(k, p_c[k], l) < m.omega_valid(k) {
                        f64::NEG_INFINITY
                    } else {
                        m.surrogate_gap(eta, k, p_s[k], p_c[k], l_s, l)
                    }
                })
                .fold(f64::INFINITY, f64::min)
        };
        let grid: Vec<(f64, f64)> = (1..=n).map(|i| upper * i as f64 / n as f64).map(|l| (l, h(l))).collect();
        let best = grid.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
        for frac in [0.5, 0.9, 0.99] {
            let psi = -eta * 0.1 + frac * (best + eta * 0.1);
            let Probe::Feasible((ls, lc)) = solve_fp_latency(&sys, eta, psi, &p_s, &p_c).unwrap() else {
                panic!("solver missed a feasible level");
            };
            assert_relative_eq!(ls, l_s, max_relative = 1e-12);
            let first = grid.iter().find(|g| g.1 >= psi).unwrap().0;
            assert!((lc - first).abs() <= upper / n as f64, "{lc} vs grid {first}");
            assert!(h(lc) >= psi);
        }
        assert!(matches!(
            solve_fp_latency(&sys, eta, best + 1e-3, &p_s, &p_c).unwrap(),
            Probe::Infeasible(_)
        ));
    }

    #[test]
    fn fp_latency_budget_exhausted() {
        let sys = table_system(2, 1e-6);
        let p_s = vec![1e-9, 1e-9];
        assert!(matches!(
            solve_fp_latency(&sys, 1.0, -10.0, &p_s, &[1.0, 1.0]).unwrap(),
            Probe::Infeasible(Infeasibility::SensingUnattainable { .. })
        ));
    }

    #[test]
    fn bisection_behaviour() {
        let sys = table_system(2, 3e-8);
        let settings = SolverSettings::default();
        let eta = 1.0;
        let state = subproblem_bisection(&sys, eta, (5e-4, 5e-4), &settings).unwrap();
        assert!(state.psi_min <= state.psi_max);
        assert!(state.psi_max - state.psi_min <= settings.zeta2);
        let range = sys.e_max(EceKind::Fece);
        assert_eq!(state.steps, (range / settings.zeta2).log2().ceil() as usize);
        let alloc = state.best_feasible.unwrap();
        assert!(surrogate_objective(&sys, eta, &alloc).unwrap() >= state.psi_min - 1e-12);
        assert_relative_eq!(alloc.p_c[0], alloc.p_c[1], max_relative = 1e-9);
    }

    #[test]
    fn diagnosis() {
        assert_eq!(diagnose(&table_system(8, 1e-8)).unwrap(), None);
        assert_eq!(
            diagnose(&table_system(8, 1e-13)).unwrap(),
            Some(Infeasibility::SensingUnattainable { plant: 0 })
        );
        let mut sys = table_system(8, 1e-8);
        for p in &mut sys.plants {
            p.dynamics = crate::control_cost::PlantDynamics::scaled_identity(100, 2f64.powi(60), 1e-3).unwrap();
        }
        assert!(matches!(
            diagnose(&sys).unwrap(),
            Some(Infeasibility::ControlUnattainable { .. } | Infeasibility::ControlPowerBudget)
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn closed_form_bounds_zero_slack(
            n_states in 1usize..200,
            dnr_db in -40.0f64..-0.5,
            log_delta in -9.0f64..-1.0,
            log_beta in -10.0f64..-5.0,
            chi in 0.05f64..1.0,
            blocks in 10.0f64..2000.0,
            log_p in -4.0f64..1.0,
        ) {
            let bandwidth = 5e5;
            let spec = SensingSpec::from_dnr_db(n_states, 1.0, dnr_db).unwrap();
            let delta = 10f64.powf(log_delta);
            let beta = 10f64.powf(log_beta);
            let noise = 5e-11;
            let l_s = blocks / bandwidth;
            let p = min_sensing_power(l_s, bandwidth, &spec, delta, chi, beta, noise).unwrap();
            prop_assume!(p.is_finite());
            let slack = sensing_slack(p * chi * beta / noise, l_s, bandwidth, &spec, delta).unwrap();
            prop_assert!(slack.abs() < 1e-6, "power slack {slack}");

            let p_s = 10f64.powf(log_p);
            let l = min_sensing_latency(p_s, bandwidth, &spec, delta, chi, beta, noise).unwrap();
            prop_assume!(l * bandwidth >= 1.0);
            let slack = sensing_slack(p_s * chi * beta / noise, l, bandwidth, &spec, delta).unwrap();
            prop_assert!(slack.abs() < 1e-6, "latency slack {slack}");
        }
    }
}
