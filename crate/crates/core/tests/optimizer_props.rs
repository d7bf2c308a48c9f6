mod common;

use proptest::prelude::*;

use ncs_codesign::ece::{fece, gece};
use ncs_codesign::energy::EceKind;
use ncs_codesign::harness::SystemConfig;
use ncs_codesign::optimizer::{fpepla_baseline, optimize, SolverSettings};
use ncs_codesign::Error;

fn scenario(betas: &[f64], instability: f64) -> ncs_codesign::system::System {
    SystemConfig {
        plant_count: betas.len(),
        instability,
        ..SystemConfig::default()
    }
    .build_system(betas)
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_are_feasible_and_beat_baseline(
        exps in prop::collection::vec(-8.7f64..-7.0, 2..5),
        instability in 1.5f64..3.0,
        gece_variant in any::<bool>(),
    ) {
        let betas: Vec<f64> = exps.iter().map(|e| 10f64.powf(*e)).collect();
        let sys = scenario(&betas, instability);
        let kind = if gece_variant { EceKind::Gece } else { EceKind::Fece };
        let out = match optimize(kind, &sys, &SolverSettings::default()) {
            Ok(out) => out,
            Err(Error::Infeasible(_)) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let a = &out.allocation;
        prop_assert!(common::min_slack(&sys, a) >= -1e-9);
        let (value, independent) = match kind {
            EceKind::Fece => (fece(a, &sys).unwrap().value, common::fece(&sys, a)),
            EceKind::Gece => (gece(a, &sys).unwrap().value, common::gece(&sys, a)),
        };
        prop_assert!((value - out.eta_star).abs() <= 1e-12 * value.abs());
        prop_assert!((independent - value).abs() <= 1e-9 * value.abs());

        let base = fpepla_baseline(&sys);
        if common::min_slack(&sys, &base) >= 0.0 {
            let b = match kind {
                EceKind::Fece => common::fece(&sys, &base),
                EceKind::Gece => common::gece(&sys, &base),
            };
            prop_assert!(out.eta_star >= b * (1.0 - 1e-9), "{} < baseline {b}", out.eta_star);
        }
        for w in out.trace.iterations.windows(2) {
            prop_assert!(w[1].eta > w[0].eta);
        }
    }

    #[test]
    fn independent_q_inverse_matches_library(p in 1e-12f64..0.4) {
        let lib = ncs_codesign::rates::q_inverse(p).unwrap();
        prop_assert!((common::q_inv(p) - lib).abs() <= 1e-9 * lib.abs().max(1e-3));
    }
}
