//! Seeded Monte-Carlo experiment drivers.
//!
//! Trials run in parallel, each on its own random stream, and are collected
//! in trial order so output is identical for a given seed regardless of
//! scheduling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SystemConfig;
use super::output::{summarize, ExperimentResult, Record, RecordDetail};
use crate::channel::{asymptotic_sinr, sample_instantaneous_sinr_control, trial_rng, Phase};
use crate::control_cost::{lqr_cost, omega};
use crate::ece::{ece, Allocation};
use crate::energy::EceKind;
use crate::optimizer::{fpepla_baseline, optimize};
use crate::rates::control_rate;
use crate::system::System;
use crate::{Error, Result};

/// Antenna counts swept by [`run_se_tightness`].
pub const SE_ANTENNAS: [usize; 5] = [8, 16, 32, 64, 128];
/// Fixed control power for the SE and LQR sweeps (W).
pub const SWEEP_POWER: f64 = 0.5;
/// Instabilities compared by [`run_lqr_sweeps`].
pub const SWEEP_INSTABILITIES: [f64; 2] = [2.0, 4.0];
pub const SWEEP_POINTS: usize = 100;

type SweepPoint = (f64, f64, f64);
/// Decades spanned by the reliability grid.
pub const EPSILON_RANGE: (f64, f64) = (1e-9, 1e-1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dinkelbach allocation.
    Optimized,
    /// Full sensing power, equal control power, equal latency split.
    Fpepla,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Optimized, Method::Fpepla];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Optimized => "optimized",
            Method::Fpepla => "fpepla",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "optimized" => Ok(Method::Optimized),
            "fpepla" => Ok(Method::Fpepla),
            _ => Err(Error::config("method", format!("unknown method `{s}`"))),
        }
    }
}

fn csi_variants(cfg: &SystemConfig) -> [(&'static str, f64); 2] {
    [("pcsi", 1.0), ("ipcsi", cfg.chi)]
}

fn antenna_list(cfg: &SystemConfig) -> Vec<usize> {
    let mut list = SE_ANTENNAS.to_vec();
    if !list.contains(&cfg.antennas) {
        list.push(cfg.antennas);
        list.sort_unstable();
    }
    list
}

fn finish(experiment: &str, cfg: &SystemConfig, records: Vec<Record>, with_cdf: bool) -> ExperimentResult {
    ExperimentResult {
        experiment: experiment.to_string(),
        config: cfg.clone(),
        summary: summarize(&records, with_cdf),
        records,
    }
}

/// Ergodic control-phase SE versus antenna count: Monte-Carlo mean of the
/// finite-blocklength rate over instantaneous SINR draws, next to the
/// large-antenna closed form.
///
/// The tagged plant sits on the outer ring without shadowing and every plant
/// transmits [`SWEEP_POWER`]; the control latency is half the budget. Both
/// CSI cases are evaluated on identical draws.
pub fn run_se_tightness(cfg: &SystemConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let trials = cfg.se_trials();
    let antennas = antenna_list(cfg);
    let beta = cfg.reference_beta();
    let noise = cfg.noise_control();
    let l_c = 0.5 * cfg.l_max;
    let powers = vec![SWEEP_POWER; cfg.plant_count];
    let csi = csi_variants(cfg);

    let per_trial: Vec<Vec<[f64; 2]>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t as u64);
            antennas
                .iter()
                .map(|&m| {
                    let mut out = [0.0; 2];
                    let start = rng.clone();
                    for (slot, &(_, chi)) in csi.iter().enumerate() {
                        let mut draw = start.clone();
                        let g = sample_instantaneous_sinr_control(m, &powers, 0, chi, beta, noise, &mut draw)?;
                        out[slot] = control_rate(g.gamma, l_c, cfg.bandwidth, cfg.epsilon)?.value;
                        rng = draw;
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (j, &m) in antennas.iter().enumerate() {
        for (slot, &(name, chi)) in csi.iter().enumerate() {
            let samples: Vec<f64> = per_trial.iter().map(|t| t[j][slot]).collect();
            let n = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let var = if samples.len() > 1 {
                samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                f64::NAN
            };
            let gamma = asymptotic_sinr(Phase::Control, SWEEP_POWER, chi, beta, noise)?.gamma;
            let closed = control_rate(gamma, l_c, cfg.bandwidth, cfg.epsilon)?.value;
            let row = |method: &str, value: f64, detail: Option<RecordDetail>| Record {
                experiment: "se-tightness".into(),
                trial: None,
                plant_count: cfg.plant_count,
                antennas: Some(m),
                variant: name.into(),
                method: method.into(),
                value: Some(value),
                feasible: true,
                seed: cfg.seed,
                x: None,
                detail,
            };
            records.push(row(
                "monte_carlo",
                mean,
                Some(RecordDetail::MonteCarlo {
                    std_error: (var / n).sqrt(),
                    samples: samples.len(),
                }),
            ));
            records.push(row("closed_form", closed, None));
        }
    }
    Ok(finish("se-tightness", cfg, records, false))
}

/// Grid of control latencies `l_max i / n` for `i = 1..=n`.
pub fn latency_grid(cfg: &SystemConfig) -> Vec<f64> {
    (1..=SWEEP_POINTS)
        .map(|i| cfg.l_max * i as f64 / SWEEP_POINTS as f64)
        .collect()
}

/// Log-spaced reliability grid over [`EPSILON_RANGE`].
pub fn epsilon_grid() -> Vec<f64> {
    let (lo, hi) = (EPSILON_RANGE.0.log10(), EPSILON_RANGE.1.log10());
    (0..SWEEP_POINTS)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (SWEEP_POINTS - 1) as f64))
        .collect()
}

/// LQR cost of the reference plant at [`SWEEP_POWER`] over a control-latency
/// grid (at the configured reliability) and a reliability grid (at half the
/// latency budget), for each instability in [`SWEEP_INSTABILITIES`] and both
/// CSI cases. Points without positive information surplus are infeasible.
pub fn run_lqr_sweeps(cfg: &SystemConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let beta = cfg.reference_beta();
    let noise = cfg.noise_control();
    let mut records = Vec::new();
    for a in SWEEP_INSTABILITIES {
        let dynamics = cfg.dynamics(a)?;
        for (csi, chi) in csi_variants(cfg) {
            let variant = format!("a{a}-{csi}");
            // (x, l_c, epsilon) per grid point.
            let sweeps: [(&str, Vec<SweepPoint>); 2] = [
                ("latency", latency_grid(cfg).into_iter().map(|l| (l, l, cfg.epsilon)).collect()),
                (
                    "reliability",
                    epsilon_grid().into_iter().map(|e| (e, 0.5 * cfg.l_max, e)).collect(),
                ),
            ];
            for (method, points) in sweeps {
                for (i, (x, l_c, eps)) in points.into_iter().enumerate() {
                    let om = omega(SWEEP_POWER, l_c, cfg.bandwidth, eps, chi, beta, noise, dynamics.log2_det_a())?;
                    let cost = match lqr_cost(&dynamics, om) {
                        Ok(c) => Some(c),
                        Err(Error::StabilizationInfeasible { .. }) => None,
                        Err(e) => return Err(e),
                    };
                    records.push(Record {
                        experiment: "lqr-sweep".into(),
                        trial: Some(i),
                        plant_count: 1,
                        antennas: None,
                        variant: variant.clone(),
                        method: method.into(),
                        value: cost.map(|c| c.value()),
                        feasible: cost.is_some(),
                        seed: cfg.seed,
                        x: Some(x),
                        detail: cost.map(|c| RecordDetail::Cost {
                            excess: c.excess,
                            omega: c.omega,
                        }),
                    });
                }
            }
        }
    }
    Ok(finish("lqr-sweep", cfg, records, false))
}

/// True when the allocation meets every constraint: latency and power
/// budgets, sensing reliability, and a positive information surplus.
pub fn allocation_feasible(system: &System, alloc: &Allocation) -> bool {
    let e = &system.energy;
    if alloc.validate(system.plant_count()).is_err()
        || alloc.l_s + alloc.l_c > system.l_max * (1.0 + 1e-12)
        || alloc.p_c.iter().sum::<f64>() > e.p_c_max * (1.0 + 1e-12)
    {
        return false;
    }
    (0..system.plant_count()).all(|k| {
        alloc.p_s[k] <= e.p_s_max * (1.0 + 1e-12)
            && system.sensing_slack(k, alloc.p_s[k], alloc.l_s).is_ok_and(|s| s >= -1e-9)
            && system.omega(k, alloc.p_c[k], alloc.l_c).is_ok_and(|o| o > 0.0)
    })
}

struct TrialOutcome {
    value: Option<f64>,
    allocation: Option<Allocation>,
}

fn run_method(system: &System, cfg: &SystemConfig, variant: EceKind, method: Method) -> Result<TrialOutcome> {
    match method {
        Method::Optimized => match optimize(variant, system, &cfg.solver_settings()) {
            Ok(out) => Ok(TrialOutcome {
                value: Some(out.eta_star),
                allocation: Some(out.allocation),
            }),
            Err(Error::Infeasible(_)) => Ok(TrialOutcome {
                value: None,
                allocation: None,
            }),
            Err(e) => Err(e),
        },
        Method::Fpepla => {
            let alloc = fpepla_baseline(system);
            let value = if allocation_feasible(system, &alloc) {
                Some(ece(variant, &alloc, system)?.value)
            } else {
                None
            };
            Ok(TrialOutcome {
                value,
                allocation: Some(alloc),
            })
        }
    }
}

/// Per trial: draws placements and shadowing, runs each method, and records
/// its ECE. Infeasible trials are recorded with `feasible = false` and
/// counted separately in the summary; the CDFs cover feasible trials only.
pub fn run_cdf_experiment(cfg: &SystemConfig, variant: EceKind, methods: &[Method]) -> Result<ExperimentResult> {
    cfg.validate()?;
    let per_trial: Vec<Vec<Record>> = (0..cfg.cdf_trials())
        .into_par_iter()
        .map(|t| {
            let (realization, system) = cfg.sample_system(t as u64)?;
            let betas = realization.betas();
            methods
                .iter()
                .map(|&method| {
                    let out = run_method(&system, cfg, variant, method)?;
                    Ok(Record {
                        experiment: "cdf".into(),
                        trial: Some(t),
                        plant_count: cfg.plant_count,
                        antennas: None,
                        variant: variant.to_string(),
                        method: method.to_string(),
                        value: out.value,
                        feasible: out.value.is_some(),
                        seed: cfg.seed,
                        x: None,
                        detail: out.allocation.map(|allocation| RecordDetail::Allocation {
                            betas: betas.clone(),
                            allocation,
                        }),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let records = per_trial.into_iter().flatten().collect();
    Ok(finish("cdf", cfg, records, true))
}
