//! Brute-force reference computations checked against the library.

use infoembed::achievability::{dpc_rate, lmmse_joint, mmse_upper_numeric, StrategyParams};
use infoembed::lower_bounds::mmse_lower_full;
use infoembed::weighted_cost::cost_lower;
use infoembed::{ProblemParams, WeightedCostParams};

/// inf over a sigma_xv grid of the sup over a gamma grid, written from the
/// definition without reusing library helpers.
fn brute_lower(sigma2: f64, power: f64, rate: f64) -> f64 {
    let rho = 4f64.powf(rate);
    let reach = (sigma2 * power).sqrt();
    let lo = (-reach).max((rho - 1.0 - power - sigma2) / 2.0);
    let hi = reach;
    let gammas: Vec<f64> = (0..6000).map(|i| 10f64.powf(-6.0 + 8.0 * i as f64 / 5999.0)).collect();
    let n_x = 1500;
    let mut best = f64::INFINITY;
    for i in 0..=n_x {
        let x = lo + (hi - lo) * i as f64 / n_x as f64;
        let c = (sigma2 * rho / (1.0 + sigma2 + power + 2.0 * x)).sqrt();
        let mut sup = 0.0_f64;
        for &g in &gammas {
            let r = (1.0 - g).powi(2) * sigma2 + g * g * power - 2.0 * g * (1.0 - g) * x;
            let d = (c - r.max(0.0).sqrt()).max(0.0);
            sup = sup.max(d * d / (g * g));
        }
        best = best.min(sup);
    }
    best
}

#[test]
fn lower_bound_matches_brute_force() {
    let cases = [
        (1.0, 0.0, 0.0),
        (1.0, 0.1, 0.0),
        (0.618, 0.3, 0.0),
        (0.05, 0.02, 0.0),
        (4.0, 0.5, 0.0),
        (100.0, 0.2, 0.0),
        (2.0, 0.5, 0.2),
        (1.0, 4.0, 1.0),
        (0.3, 1.5, 0.5),
    ];
    for (sigma2, power, rate) in cases {
        let lib = mmse_lower_full(&ProblemParams::new(sigma2, power, rate).unwrap()).unwrap().value;
        let oracle = brute_lower(sigma2, power, rate);
        let tol = 2e-3 * oracle.max(1e-2);
        assert!(
            (lib - oracle).abs() <= tol,
            "sigma2={sigma2} P={power} R={rate}: library {lib}, brute force {oracle}"
        );
    }
}

#[test]
fn lower_bound_frozen_values() {
    let frozen = [
        ((0.618_033_988_749_894_8, 0.01, 0.0), 0.290_673_717_433_56),
        ((1.0, 0.1, 0.0), 0.199_135_306_801_74),
        ((4.0, 0.3, 0.0), 0.140_066_185_641_66),
        ((2.0, 0.5, 0.2), 0.092_440_451_362_23),
    ];
    for ((sigma2, power, rate), want) in frozen {
        let v = mmse_lower_full(&ProblemParams::new(sigma2, power, rate).unwrap()).unwrap().value;
        assert!((v - want).abs() < 1e-10, "({sigma2}, {power}, {rate}): {v} vs {want}");
    }
}

/// Minimum of the joint LMMSE over a dense (beta, alpha) grid subject to the
/// rate constraint.
fn brute_upper(sigma2: f64, power: f64, rate: f64) -> f64 {
    let beta_max = (power / sigma2).sqrt().min(1.0);
    let mut best = sigma2 / (sigma2 + 1.0);
    for i in 0..=400 {
        let beta = beta_max * i as f64 / 400.0;
        for j in 0..=800 {
            let alpha = 2.0 * j as f64 / 800.0;
            let Ok(s) = StrategyParams::new(sigma2, power, alpha, beta) else { continue };
            if s.p_dpc <= 0.0 || dpc_rate(&s).unwrap() < rate {
                continue;
            }
            best = best.min(lmmse_joint(&s).unwrap());
        }
    }
    best
}

#[test]
fn upper_bound_matches_dense_grid() {
    for (sigma2, power, rate) in [(1.0, 0.3, 0.0), (0.618, 0.2, 0.0), (2.0, 1.0, 0.3), (10.0, 0.5, 0.0), (0.2, 3.0, 0.8)] {
        let lib = mmse_upper_numeric(&ProblemParams::new(sigma2, power, rate).unwrap()).unwrap().mmse;
        let oracle = brute_upper(sigma2, power, rate);
        // the library may beat a coarse grid but never by much, and never lose to it
        assert!(lib <= oracle + 1e-9, "({sigma2}, {power}, {rate}): library {lib} above grid {oracle}");
        assert!(lib >= oracle - 5e-3, "({sigma2}, {power}, {rate}): library {lib} far below grid {oracle}");
    }
}

#[test]
fn cost_lower_matches_dense_power_grid() {
    for (sigma2, rate, k2) in [(0.618_033_988_749_894_8, 0.0, 0.1), (1.0, 0.0, 1.0), (4.0, 0.3, 0.05), (0.1, 1.0, 2.0)] {
        let w = WeightedCostParams::new(sigma2, rate, k2).unwrap();
        let lib = cost_lower(&w).unwrap();
        let p0 = w.min_power();
        let p_max = 64.0 * w.rate_factor().max(sigma2).max(1.0);
        let n = 20_000;
        let mut oracle = f64::INFINITY;
        for i in 0..=n {
            let u = (p_max - p0).sqrt() * (i as f64 / n as f64).powi(2);
            let p = p0 + u * u;
            let m = mmse_lower_full(&w.at_power(p).unwrap()).unwrap().value;
            oracle = oracle.min(k2 * p + m);
        }
        assert!(lib.value <= oracle + 1e-12, "({sigma2}, {rate}, {k2}): {} vs grid {oracle}", lib.value);
        assert!(lib.value >= oracle - 1e-5, "({sigma2}, {rate}, {k2}): {} vs grid {oracle}", lib.value);
    }
}

#[test]
fn lmmse_frozen_value() {
    let s = StrategyParams::new(2.0, 1.0, 0.5, 0.25).unwrap();
    assert!((lmmse_joint(&s).unwrap() - 0.175_487_465_181_058_5).abs() < 1e-13);
}
