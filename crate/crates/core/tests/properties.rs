use infoembed::achievability::{
    alpha_feasible_interval, cost_upper_analytical, dpc_rate, lmmse_joint, mmse_upper_numeric, t_only_mmse,
    y_only_mmse, StrategyParams,
};
use infoembed::lower_bounds::{mmse_lower_full, mmse_lower_legacy, mmse_lower_loosened};
use infoembed::mc::{simulate_linear, simulate_quantizer, TrialConfig};
use infoembed::model::sigma_xv_interval;
use infoembed::optim::{maximize_on_interval, SearchConfig};
use infoembed::sweep::{run_sweep, Axis, AxisName, FixedParams, Quantity, Scale, SweepSpec};
use infoembed::weighted_cost::{cost_lower, cost_lower_loosened};
use infoembed::{ProblemParams, WeightedCostParams};
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

/// Feasible `(sigma2, power, rate)` with the power at least the communication floor.
fn feasible_params() -> impl Strategy<Value = ProblemParams> {
    (log_uniform(1e-2, 1e2), log_uniform(1e-3, 1e2), 0.0..2.0f64).prop_map(|(sigma2, extra, rate)| {
        let floor = 2f64.powf(2.0 * rate) - 1.0;
        ProblemParams::new(sigma2, floor + extra, rate).unwrap()
    })
}

fn strategy() -> impl Strategy<Value = StrategyParams> {
    (log_uniform(1e-2, 1e2), 0.0..1.0f64, 0.0..2.0f64, log_uniform(1e-3, 1e2)).prop_map(
        |(sigma2, beta, alpha, extra)| StrategyParams::new(sigma2, beta * beta * sigma2 + extra, alpha, beta).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_bound_dominates_loosened(p in feasible_params()) {
        let full = mmse_lower_full(&p).unwrap().value;
        let loose = mmse_lower_loosened(&p).unwrap().value;
        prop_assert!(full >= loose - 1e-9, "full {full} < loosened {loose}");
    }

    #[test]
    fn legacy_matches_loosened_at_zero_rate(sigma2 in log_uniform(1e-2, 1e2), power in log_uniform(1e-4, 1e2)) {
        let p = ProblemParams::new(sigma2, power, 0.0).unwrap();
        let a = mmse_lower_legacy(&p).unwrap().value;
        let b = mmse_lower_loosened(&p).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn lower_bound_within_trivial_range(p in feasible_params()) {
        let v = mmse_lower_full(&p).unwrap().value;
        prop_assert!(v >= 0.0);
        prop_assert!(v <= p.sigma2 / (p.sigma2 + 1.0) + 1e-12);
    }

    #[test]
    fn upper_bound_above_lower_bound(p in feasible_params()) {
        let lb = mmse_lower_full(&p).unwrap().value;
        let ub = mmse_upper_numeric(&p).unwrap().mmse;
        prop_assert!(ub >= lb - 1e-7, "ub {ub} < lb {lb} at {p:?}");
    }

    #[test]
    fn sigma_xv_interval_shape(p in feasible_params()) {
        let iv = sigma_xv_interval(&p).unwrap();
        let edge = (p.sigma2 * p.power).sqrt();
        prop_assert!(iv.lo >= -edge - 1e-12 && iv.hi <= edge + 1e-12);
        prop_assert!(iv.lo <= iv.hi);
        if p.rate == 0.0 {
            prop_assert!((iv.lo + edge).abs() <= 1e-12 * (1.0 + edge));
            prop_assert!((iv.hi - edge).abs() <= 1e-12 * (1.0 + edge));
        }
    }

    #[test]
    fn lmmse_beats_single_observations(s in strategy()) {
        let j = lmmse_joint(&s).unwrap();
        let bound = t_only_mmse(&s).min(y_only_mmse(&s));
        prop_assert!(j >= -1e-12);
        prop_assert!(j <= bound + 1e-10 * (1.0 + bound), "joint {j} above {bound}");
    }

    #[test]
    fn costa_alpha_attains_capacity(sigma2 in log_uniform(1e-2, 1e2), power in log_uniform(1e-3, 1e2)) {
        let s = StrategyParams::new(sigma2, power, power / (power + 1.0), 0.0).unwrap();
        prop_assert!((dpc_rate(&s).unwrap() - 0.5 * (1.0 + power).log2()).abs() <= 1e-12);
    }

    #[test]
    fn costa_alpha_maximizes_rate(s in strategy()) {
        let costa = s.p_dpc / (s.p_dpc + 1.0);
        let best = StrategyParams { alpha: costa, ..s };
        prop_assert!(dpc_rate(&best).unwrap() >= dpc_rate(&s).unwrap() - 1e-12);
    }

    #[test]
    fn alpha_interval_is_feasible(s in strategy(), rate in 0.0..1.5f64) {
        if let Some(iv) = alpha_feasible_interval(s.p_dpc, s.sigma_tilde2, rate) {
            for a in [iv.lo, 0.5 * (iv.lo + iv.hi), iv.hi] {
                let t = StrategyParams { alpha: a, ..s };
                prop_assert!(dpc_rate(&t).unwrap() >= rate - 1e-9);
            }
        } else {
            let costa = StrategyParams { alpha: s.p_dpc / (s.p_dpc + 1.0), ..s };
            prop_assert!(dpc_rate(&costa).unwrap() < rate + 1e-9);
        }
    }

    #[test]
    fn refinement_never_worse_than_grid(shift in -1.0..1.0f64, width in 0.01..2.0f64) {
        let f = |x: f64| -(x - shift).powi(2) + 0.3 * (7.0 * x).sin();
        let n = 33;
        let grid_best = (0..n)
            .map(|i| f(-1.0 + 2.0 * i as f64 / (n - 1) as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        let r = maximize_on_interval(f, -1.0, 1.0, &SearchConfig::new(n, 1e-10)).unwrap();
        prop_assert!(r.value >= grid_best);
        let coarse = maximize_on_interval(f, -1.0, 1.0, &SearchConfig::new(n, width * 1e-2)).unwrap();
        prop_assert!(r.value >= coarse.value - 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn analytical_cost_above_lower_cost(
        sigma2 in log_uniform(1e-2, 1e2),
        k2 in log_uniform(1e-3, 1e3),
        rate in 0.0..3.0f64,
    ) {
        let w = WeightedCostParams::new(sigma2, rate, k2).unwrap();
        let lb = cost_lower(&w).unwrap().value;
        let an = cost_upper_analytical(&w).value;
        prop_assert!(an >= lb - 1e-9, "analytical {an} < lower {lb}");
        prop_assert!(lb >= cost_lower_loosened(&w).unwrap().value - 1e-9);
    }

    #[test]
    fn simulations_reproducible(seed in any::<u64>(), gain in 0.0..1.0f64, step in 0.1..5.0f64) {
        let p = ProblemParams::new(1.0, 1.0, 0.0).unwrap();
        let mut cfg = TrialConfig::new(seed, 3, 700, p);
        let a = simulate_linear(&cfg, gain).unwrap();
        cfg.workers = 3;
        let b = simulate_linear(&cfg, gain).unwrap();
        prop_assert_eq!(a, b);
        let c = simulate_quantizer(&cfg, step).unwrap();
        cfg.workers = 1;
        prop_assert_eq!(c, simulate_quantizer(&cfg, step).unwrap());
    }
}

#[test]
fn sweep_is_worker_independent() {
    let spec = SweepSpec::new(
        Quantity::MmseRatioNew,
        Axis::new(AxisName::Power, 1e-2, 10.0, 5, Scale::Log10).unwrap(),
        Axis::new(AxisName::Sigma2, 0.1, 10.0, 4, Scale::Log10).unwrap(),
        FixedParams::default(),
    );
    let one = run_sweep(&spec, 1).unwrap();
    let four = run_sweep(&spec, 4).unwrap();
    assert_eq!(one, four);
    assert_eq!(one, run_sweep(&spec, 1).unwrap());
}

/// Monotonicity in power is expected but not guaranteed by construction;
/// report any dip rather than fail.
#[test]
fn lower_bound_power_monotonicity_probe() {
    let mut dips = 0;
    for sigma2 in [0.05, 0.618, 1.0, 10.0] {
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let p = 10f64.powf(-3.0 + 4.0 * i as f64 / 59.0);
            let v = mmse_lower_full(&ProblemParams::new(sigma2, p, 0.0).unwrap()).unwrap().value;
            if v > prev + 1e-9 {
                dips += 1;
                eprintln!("warning: lower bound rises from {prev} to {v} at sigma2={sigma2}, P={p}");
            }
            prev = v;
        }
    }
    eprintln!("monotonicity probe: {dips} rises");
}
