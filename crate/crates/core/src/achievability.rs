//! Achievable (rate, MMSE) points of the combined linear + dirty-paper coding
//! scheme.
//!
//! The encoder first scales the host down by `1 - beta` with a linear input
//! `V_lin = -beta X0` (power `beta^2 sigma2`), then spends the remaining power
//! `p_dpc` on a Costa-style codeword with auxiliary `T = V_dpc + alpha X~0`.
//! The decoder recovers `T` and estimates `X1` jointly from `(Y, T)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rate_factor, validate_power, validate_rate, validate_sigma2, ClosedInterval, ProblemParams, WeightedCostParams};
use crate::optim::{maximize_on_interval, minimize_on_interval, SearchConfig};

/// Search box for the DPC mixing parameter.
pub const ALPHA_MAX: f64 = 2.0;

/// Relative slack used when a power split lands a hair outside the budget.
const POWER_SLACK: f64 = 1e-12;

/// `(alpha, beta)` of the combined scheme and the power split it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyParams {
    pub sigma2: f64,
    pub power: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `beta^2 sigma2`
    pub p_lin: f64,
    /// `power - p_lin`
    pub p_dpc: f64,
    /// `sigma2 (1 - beta)^2`
    pub sigma_tilde2: f64,
}

impl StrategyParams {
    pub fn new(sigma2: f64, power: f64, alpha: f64, beta: f64) -> Result<Self> {
        validate_sigma2(sigma2)?;
        validate_power(power)?;
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "beta must lie in [0, 1]",
            });
        }
        if !(0.0..=ALPHA_MAX).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "alpha must lie in [0, 2]",
            });
        }
        let p_lin = beta * beta * sigma2;
        let mut p_dpc = power - p_lin;
        if p_dpc < 0.0 {
            if p_dpc < -POWER_SLACK * power.max(1.0) {
                return Err(Error::InvalidParameter {
                    name: "beta",
                    value: beta,
                    reason: "linear part alone exceeds the power budget",
                });
            }
            p_dpc = 0.0;
        }
        Ok(StrategyParams {
            sigma2,
            power,
            alpha,
            beta,
            p_lin,
            p_dpc,
            sigma_tilde2: sigma2 * (1.0 - beta) * (1.0 - beta),
        })
    }

    /// Strategy spending `p_lin` on host scaling, i.e. `beta = sqrt(p_lin / sigma2)`.
    pub fn from_linear_power(sigma2: f64, power: f64, alpha: f64, p_lin: f64) -> Result<Self> {
        let beta = (p_lin.max(0.0) / sigma2).sqrt();
        StrategyParams::new(sigma2, power, alpha, beta)
    }

    /// Variance of the modified host `X1 = X~0 + V_dpc`.
    pub fn x1_var(&self) -> f64 {
        self.sigma_tilde2 + self.p_dpc
    }
}

/// Which construction produced an [`AchievablePoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyVariant {
    DpcGeneral,
    DpcOne,
    DpcCosta,
    Cancel,
    /// Host scaling only, no codeword; carries no message.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AchievablePoint {
    pub rate: f64,
    pub mmse: f64,
    pub strategy: StrategyParams,
    pub variant: StrategyVariant,
}

/// Message rate carried by the scheme (bits per channel use). Negative means
/// no positive rate is achievable.
pub fn dpc_rate(s: &StrategyParams) -> Result<f64> {
    if s.p_dpc <= 0.0 {
        return Err(Error::DegenerateStrategy(
            "dpc_rate needs a positive codeword power".into(),
        ));
    }
    Ok(dpc_rate_raw(s.p_dpc, s.sigma_tilde2, s.alpha))
}

#[inline]
fn dpc_rate_raw(p: f64, a: f64, alpha: f64) -> f64 {
    let num = p * (p + a + 1.0);
    let den = p * a * (1.0 - alpha) * (1.0 - alpha) + p + alpha * alpha * a;
    0.5 * (num / den).log2()
}

/// Linear MMSE of `X1` from the channel output `Y` and the decoded `T`,
/// using the asymptotic second moments of the scheme (codeword independent of
/// the scaled host).
pub fn lmmse_joint(s: &StrategyParams) -> Result<f64> {
    let a = s.sigma_tilde2;
    let p = s.p_dpc;
    let al = s.alpha;
    if p <= 0.0 && a <= 0.0 {
        return Err(Error::DegenerateStrategy(
            "joint estimate needs a codeword or a residual host".into(),
        ));
    }
    let var_x1 = a + p;
    if al == 1.0 && p > 0.0 {
        // T = X1
        return Ok(0.0);
    }
    let c_y = a + p;
    let c_t = al * a + p;
    let var_y = a + p + 1.0;
    let var_t = al * al * a + p;
    let cov_yt = al * a + p;
    let det = var_y * var_t - cov_yt * cov_yt;
    if !(det > 1e-300) {
        return Err(Error::NumericDomain {
            context: "singular (Y, T) covariance",
            arg: al,
        });
    }
    // c^T C^{-1} c with the explicit 2x2 inverse
    let quad = (c_y * c_y * var_t - 2.0 * c_y * c_t * cov_yt + c_t * c_t * var_y) / det;
    Ok((var_x1 - quad).clamp(0.0, var_x1))
}

/// MMSE of `X1` from `T` alone, assuming `T` decoded perfectly.
pub fn t_only_mmse(s: &StrategyParams) -> f64 {
    let a = s.sigma_tilde2;
    let p = s.p_dpc;
    let den = p + s.alpha * s.alpha * a;
    if den <= 0.0 {
        return a + p;
    }
    p * a * (1.0 - s.alpha) * (1.0 - s.alpha) / den
}

/// MMSE of `X1` from the channel output alone.
pub fn y_only_mmse(s: &StrategyParams) -> f64 {
    let v = s.x1_var();
    v / (v + 1.0)
}

/// Values of `alpha` for which the scheme carries at least `rate` bits, given
/// codeword power `p_dpc` and residual host variance `sigma_tilde2`. `None`
/// when no `alpha` works. Not clipped to the search box.
pub fn alpha_feasible_interval(p_dpc: f64, sigma_tilde2: f64, rate: f64) -> Option<ClosedInterval> {
    if p_dpc <= 0.0 {
        return None;
    }
    let rho = rate_factor(rate);
    let p = p_dpc;
    let a = sigma_tilde2;
    if a <= 0.0 {
        return if 1.0 + p >= rho {
            Some(ClosedInterval {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            })
        } else {
            None
        };
    }
    // A alpha^2 - 2 B alpha + C <= 0
    let qa = a * (p + 1.0);
    let qb = p * a;
    let qc = p * a + p - p * (p + a + 1.0) / rho;
    let disc = qb * qb - qa * qc;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    Some(ClosedInterval {
        lo: (qb - root) / qa,
        hi: (qb + root) / qa,
    })
}

/// How the inner `alpha` minimization is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaSearch {
    /// The joint MMSE decreases in `alpha` below 1 and increases above it,
    /// so the constrained minimizer is 1 projected onto the feasible interval.
    Projection,
    /// Grid + golden search over the feasible interval.
    Grid(SearchConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundConfig {
    pub beta: SearchConfig,
    pub alpha: AlphaSearch,
    pub r0: SearchConfig,
}

impl Default for UpperBoundConfig {
    fn default() -> Self {
        UpperBoundConfig {
            beta: SearchConfig::new(401, 1e-10),
            alpha: AlphaSearch::Projection,
            r0: SearchConfig::default(),
        }
    }
}

/// Best `alpha` at a given `beta`, or `None` if the rate cannot be met.
fn best_alpha_for_beta(params: &ProblemParams, beta: f64, search: &AlphaSearch) -> Result<Option<(f64, StrategyParams, StrategyVariant)>> {
    let s0 = StrategyParams::new(params.sigma2, params.power, 0.0, beta)?;
    if s0.p_dpc <= 0.0 {
        if params.rate == 0.0 {
            return Ok(Some((y_only_mmse(&s0), s0, StrategyVariant::Linear)));
        }
        return Ok(None);
    }
    let Some(iv) = alpha_feasible_interval(s0.p_dpc, s0.sigma_tilde2, params.rate) else {
        return Ok(None);
    };
    let lo = iv.lo.max(0.0);
    let hi = iv.hi.min(ALPHA_MAX);
    if lo > hi {
        return Ok(None);
    }
    // shrink toward the rate-maximizing alpha to absorb root rounding
    let center = (s0.p_dpc / (s0.p_dpc + 1.0)).clamp(lo, hi);
    let shrink = 1e-9;
    let lo = lo + shrink * (center - lo);
    let hi = hi - shrink * (hi - center);

    let eval = |alpha: f64| -> Result<(f64, StrategyParams)> {
        let s = StrategyParams::new(params.sigma2, params.power, alpha, beta)?;
        Ok((lmmse_joint(&s)?, s))
    };
    let mut alpha = match search {
        AlphaSearch::Projection => 1.0_f64.clamp(lo, hi),
        AlphaSearch::Grid(cfg) => {
            let r = minimize_on_interval(
                |al| match eval(al) {
                    Ok((m, _)) => m,
                    Err(_) => f64::INFINITY,
                },
                lo,
                hi,
                cfg,
            )?;
            r.arg
        }
    };
    let mut s = StrategyParams::new(params.sigma2, params.power, alpha, beta)?;
    if dpc_rate(&s)? < params.rate {
        alpha = center;
        s = StrategyParams::new(params.sigma2, params.power, alpha, beta)?;
        if dpc_rate(&s)? < params.rate {
            return Ok(None);
        }
    }
    let (m, s) = eval(alpha)?;
    Ok(Some((m, s, StrategyVariant::DpcGeneral)))
}

fn point_for(s: StrategyParams, variant: StrategyVariant) -> Result<AchievablePoint> {
    let (rate, mmse) = if s.p_dpc > 0.0 {
        (dpc_rate(&s)?, lmmse_joint(&s)?)
    } else {
        (0.0, y_only_mmse(&s))
    };
    Ok(AchievablePoint {
        rate,
        mmse,
        strategy: s,
        variant,
    })
}

/// Numerically optimized MMSE of the combined scheme at `params`, with the
/// closed-form DPC(1), DPC(alpha_Costa), cancelation and perfect-reconstruction
/// strategies included as candidates.
pub fn mmse_upper_numeric(params: &ProblemParams) -> Result<AchievablePoint> {
    mmse_upper_numeric_with(params, &UpperBoundConfig::default())
}

pub fn mmse_upper_numeric_with(params: &ProblemParams, config: &UpperBoundConfig) -> Result<AchievablePoint> {
    params.require_feasible()?;
    let sigma2 = params.sigma2;
    let power = params.power;
    let mut candidates: Vec<AchievablePoint> = Vec::with_capacity(6);

    if power > 0.0 {
        let one = StrategyParams::new(sigma2, power, 1.0, 0.0)?;
        if dpc_rate(&one)? >= params.rate {
            candidates.push(point_for(one, StrategyVariant::DpcOne)?);
        }
        let costa = StrategyParams::new(sigma2, power, power / (power + 1.0), 0.0)?;
        if dpc_rate(&costa)? >= params.rate {
            candidates.push(point_for(costa, StrategyVariant::DpcCosta)?);
        }
    }
    if power > sigma2 && power >= sigma2 + params.min_power() {
        let cancel = StrategyParams::new(sigma2, power, 1.0, 1.0)?;
        if dpc_rate(&cancel)? >= params.rate {
            candidates.push(point_for(cancel, StrategyVariant::Cancel)?);
        }
    }
    if power > 0.0 {
        let r0 = perfect_rate_r0_with(sigma2, power, &config.r0)?;
        if r0.rate >= params.rate {
            let beta = -r0.sigma_xv / sigma2;
            if (0.0..=1.0).contains(&beta) {
                let s = StrategyParams::new(sigma2, power, 1.0, beta)?;
                if s.p_dpc > 0.0 && dpc_rate(&s)? >= params.rate {
                    candidates.push(point_for(s, StrategyVariant::DpcGeneral)?);
                }
            }
        }
    }

    let beta_max = (power / sigma2).sqrt().min(1.0);
    let mut failure = None;
    let r = minimize_on_interval(
        |beta| match best_alpha_for_beta(params, beta, &config.alpha) {
            Ok(Some((m, _, _))) => m,
            Ok(None) => f64::INFINITY,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        0.0,
        beta_max,
        &config.beta,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    if r.value.is_finite() {
        if let Some((_, s, variant)) = best_alpha_for_beta(params, r.arg, &config.alpha)? {
            candidates.push(point_for(s, variant)?);
        }
    }

    candidates
        .into_iter()
        .filter(|c| c.mmse.is_finite())
        .min_by(|x, y| {
            x.mmse
                .total_cmp(&y.mmse)
                .then(x.strategy.beta.total_cmp(&y.strategy.beta))
                .then(x.strategy.alpha.total_cmp(&y.strategy.alpha))
        })
        .ok_or_else(|| Error::Infeasible {
            power,
            required: params.min_power(),
        })
}

/// Branch of the closed-form cost upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticalBranch {
    DpcOne,
    DpcCosta,
    Cancel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalCost {
    pub value: f64,
    pub branch: AnalyticalBranch,
    /// DPC(1), DPC(alpha_Costa) and cancelation costs, in that order.
    pub branches: [f64; 3],
}

/// Closed-form weighted-cost upper bound: the best of DPC(1),
/// DPC(alpha_Costa) and host cancelation.
pub fn cost_upper_analytical(params: &WeightedCostParams) -> AnalyticalCost {
    let rho = params.rate_factor();
    let k2 = params.k2;
    let s2 = params.sigma2;
    let dpc_one = k2 * rho;
    let dpc_costa = k2 * (rho - 1.0) + (s2 / (rho * rho + (rho - 1.0) * s2)).min(1.0);
    let cancel = k2 * (s2 + rho - 1.0);
    let branches = [dpc_one, dpc_costa, cancel];
    let mut branch = AnalyticalBranch::DpcOne;
    let mut value = dpc_one;
    if dpc_costa < value {
        value = dpc_costa;
        branch = AnalyticalBranch::DpcCosta;
    }
    if cancel < value {
        value = cancel;
        branch = AnalyticalBranch::Cancel;
    }
    AnalyticalCost { value, branch, branches }
}

/// Largest rate compatible with perfect reconstruction of `X1`, and the
/// correlation `sigma_xv = -sigma sqrt(p_lin)` attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfectRate {
    pub rate: f64,
    pub sigma_xv: f64,
}

/// Argument of the log in the perfect-reconstruction rate; `None` outside the
/// domain where both factors are positive.
#[inline]
pub(crate) fn perfect_rate_ratio(sigma2: f64, power: f64, sigma_xv: f64) -> Option<f64> {
    let resid = power * sigma2 - sigma_xv * sigma_xv;
    let q = sigma2 + power + 2.0 * sigma_xv;
    if resid <= 0.0 || q <= 0.0 {
        return None;
    }
    Some(resid * (1.0 + q) / (sigma2 * q))
}

pub fn perfect_rate_r0(sigma2: f64, power: f64) -> Result<PerfectRate> {
    perfect_rate_r0_with(sigma2, power, &SearchConfig::default())
}

pub fn perfect_rate_r0_with(sigma2: f64, power: f64, config: &SearchConfig) -> Result<PerfectRate> {
    validate_sigma2(sigma2)?;
    validate_power(power)?;
    let lo = -(sigma2 * power).sqrt();
    let r = maximize_on_interval(
        |x| perfect_rate_ratio(sigma2, power, x).unwrap_or(0.0),
        lo,
        0.0,
        config,
    )?;
    let rate = if r.value > 0.0 {
        0.5 * r.value.log2()
    } else {
        f64::NEG_INFINITY
    };
    Ok(PerfectRate { rate, sigma_xv: r.arg })
}

/// Bisection tolerance (absolute, on power) for the power inversions.
pub const POWER_TOL: f64 = 1e-8;
/// Relative bisection tolerance, which governs when the power is tiny.
pub const POWER_RTOL: f64 = 1e-9;

/// True once the bracket `[lo, hi]` meets both power tolerances.
#[inline]
pub(crate) fn bracket_done(lo: f64, hi: f64) -> bool {
    let w = hi - lo;
    w <= POWER_TOL && w <= POWER_RTOL * hi
}

/// Smallest power at which perfect reconstruction of `X1` is compatible with
/// carrying `rate` bits.
pub fn min_power_for_perfect(sigma2: f64, rate: f64) -> Result<f64> {
    validate_sigma2(sigma2)?;
    validate_rate(rate)?;
    let r0 = |p: f64| perfect_rate_r0(sigma2, p).map(|r| r.rate);
    let mut lo = rate_factor(rate) - 1.0;
    if r0(lo)? >= rate {
        return Ok(lo);
    }
    // host cancelation always reaches perfect reconstruction at this power
    let mut hi = sigma2 + rate_factor(rate) - 1.0;
    let mut doublings = 0;
    while r0(hi)? < rate {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::SearchFailure(format!(
                "could not bracket the perfect-reconstruction power for sigma2={sigma2}, rate={rate}"
            )));
        }
    }
    if r0(lo)? > r0(hi)? {
        return Err(Error::SearchFailure(
            "perfect-reconstruction rate not monotone on the bracket".into(),
        ));
    }
    while !bracket_done(lo, hi) {
        let mid = 0.5 * (lo + hi);
        if r0(mid)? >= rate {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest power (to within `POWER_TOL`) at which the numerically optimized
/// scheme reaches `target_mmse`, found by bisection.
pub fn power_upper_for_mmse(sigma2: f64, rate: f64, target_mmse: f64) -> Result<f64> {
    power_upper_for_mmse_with(sigma2, rate, target_mmse, &UpperBoundConfig::default())
}

pub fn power_upper_for_mmse_with(sigma2: f64, rate: f64, target_mmse: f64, config: &UpperBoundConfig) -> Result<f64> {
    validate_sigma2(sigma2)?;
    validate_rate(rate)?;
    if !target_mmse.is_finite() || target_mmse < 0.0 {
        return Err(Error::InvalidParameter {
            name: "target_mmse",
            value: target_mmse,
            reason: "target MMSE must be finite and non-negative",
        });
    }
    let ub = |p: f64| -> Result<f64> { Ok(mmse_upper_numeric_with(&ProblemParams::new(sigma2, p, rate)?, config)?.mmse) };
    let mut lo = rate_factor(rate) - 1.0;
    if ub(lo)? <= target_mmse {
        return Ok(lo);
    }
    let mut hi = sigma2 + rate_factor(rate) - 1.0;
    let mut doublings = 0;
    while ub(hi)? > target_mmse {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::SearchFailure(format!(
                "achievable MMSE never reaches {target_mmse} for sigma2={sigma2}, rate={rate}"
            )));
        }
    }
    while !bracket_done(lo, hi) {
        let mid = 0.5 * (lo + hi);
        if ub(mid)? <= target_mmse {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn strat(sigma2: f64, power: f64, alpha: f64, beta: f64) -> StrategyParams {
        StrategyParams::new(sigma2, power, alpha, beta).unwrap()
    }

    #[test]
    fn costa_alpha_reaches_capacity() {
        for &(s2, p) in &[(1.0, 1.0), (10.0, 0.3), (0.2, 7.0)] {
            let s = strat(s2, p, p / (p + 1.0), 0.0);
            assert_relative_eq!(dpc_rate(&s).unwrap(), 0.5 * (1.0 + p).log2(), max_relative = 1e-12);
        }
    }

    #[test]
    fn interference_as_noise_at_alpha_zero() {
        let (s2, p) = (3.0, 2.0);
        let s = strat(s2, p, 0.0, 0.0);
        let want = 0.5 * ((p + s2 + 1.0) / (s2 + 1.0)).log2();
        assert_relative_eq!(dpc_rate(&s).unwrap(), want, max_relative = 1e-12);
    }

    #[test]
    fn full_cancelation_rate() {
        let s = strat(1.0, 3.0, 1.0, 1.0);
        assert_relative_eq!(dpc_rate(&s).unwrap(), 0.5 * 3.0_f64.log2(), max_relative = 1e-12);
    }

    #[test]
    fn degenerate_codeword_power() {
        let s = strat(1.0, 1.0, 0.5, 1.0);
        assert!(matches!(dpc_rate(&s), Err(Error::DegenerateStrategy(_))));
    }

    #[test]
    fn alpha_one_reconstructs_exactly() {
        let s = strat(2.0, 1.0, 1.0, 0.3);
        assert!(lmmse_joint(&s).unwrap() < 1e-14);
    }

    #[test]
    fn joint_estimate_matches_conditioning_route() {
        // estimating X1 = T + (1 - alpha) X~0 from T and Y - T gives s / (1 + s)
        // with s the T-only error
        for &(a, b, s2, p) in &[(0.5, 0.25, 2.0, 1.0), (0.1, 0.0, 5.0, 0.4), (1.7, 0.6, 0.3, 2.0)] {
            let s = strat(s2, p, a, b);
            let t = t_only_mmse(&s);
            assert_relative_eq!(lmmse_joint(&s).unwrap(), t / (1.0 + t), max_relative = 1e-10);
        }
        let s = strat(2.0, 1.0, 0.5, 0.25);
        assert_relative_eq!(lmmse_joint(&s).unwrap(), 0.175_487_465_181_058_5, max_relative = 1e-12);
    }

    #[test]
    fn feasible_alpha_interval_brackets_costa() {
        let iv = alpha_feasible_interval(1.0, 2.0, 0.2).unwrap();
        let mid = 0.5;
        assert!(iv.contains(mid));
        for al in [iv.lo, iv.hi] {
            assert!((dpc_rate_raw(1.0, 2.0, al) - 0.2).abs() < 1e-12);
        }
        assert!(alpha_feasible_interval(1.0, 2.0, 0.6).is_none());
    }

    #[test]
    fn zero_power_is_pure_estimation() {
        let pt = mmse_upper_numeric(&ProblemParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_relative_eq!(pt.mmse, 0.5, max_relative = 1e-15);
        assert_eq!(pt.variant, StrategyVariant::Linear);
    }

    #[test]
    fn upper_bound_respects_rate_and_closed_forms() {
        let params = ProblemParams::new(100.0, 1.0, 0.0).unwrap();
        let pt = mmse_upper_numeric(&params).unwrap();
        let costa = strat(100.0, 1.0, 0.5, 0.0);
        assert!(pt.mmse <= 1.0_f64.min(t_only_mmse(&costa)));

        let params = ProblemParams::new(2.0, 3.0, 0.7).unwrap();
        let pt = mmse_upper_numeric(&params).unwrap();
        assert!(pt.rate >= 0.7);
    }

    #[test]
    fn infeasible_upper_bound() {
        let params = ProblemParams::new(1.0, 0.9, 0.5).unwrap();
        assert!(matches!(mmse_upper_numeric(&params), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn analytical_cost_examples() {
        let c = cost_upper_analytical(&WeightedCostParams::new(1.0, 0.0, 1.0).unwrap());
        assert_eq!(c.value, 1.0);
        assert_eq!(c.branches, [1.0, 1.0, 1.0]);

        let c = cost_upper_analytical(&WeightedCostParams::new(1.0, 1.0, 1e-4).unwrap());
        assert_relative_eq!(c.branches[1], 3e-4 + 1.0 / 19.0, max_relative = 1e-14);
        // k2 2^{2R} = 4e-4 undercuts the Costa branch here
        assert_eq!(c.branch, AnalyticalBranch::DpcOne);
        assert_relative_eq!(c.value, 4e-4, max_relative = 1e-14);

        let c = cost_upper_analytical(&WeightedCostParams::new(0.01, 0.0, 100.0).unwrap());
        assert_relative_eq!(c.branches[2], 1.0, max_relative = 1e-14);
        assert_eq!(c.branches[0], 100.0);
        // min{1, sigma2} = 0.01 for the Costa branch at R = 0
        assert_eq!(c.branch, AnalyticalBranch::DpcCosta);
        assert_relative_eq!(c.value, 0.01, max_relative = 1e-14);

        let c = cost_upper_analytical(&WeightedCostParams::new(4.0, 0.0, 0.1).unwrap());
        assert_eq!(c.branch, AnalyticalBranch::DpcOne);
        let c = cost_upper_analytical(&WeightedCostParams::new(0.5, 0.3, 0.2).unwrap());
        assert_eq!(c.branch, AnalyticalBranch::Cancel);
    }

    #[test]
    fn r0_zero_inner_point_is_a_lower_bound() {
        let (s2, p) = (1.0_f64, 2.0_f64);
        let at_zero = 0.5 * (p * (1.0 + s2 + p) / (s2 * (s2 + p))).log2();
        assert!(perfect_rate_r0(s2, p).unwrap().rate >= at_zero);
    }

    #[test]
    fn r0_at_zero_power_is_unachievable() {
        assert_eq!(perfect_rate_r0(1.0, 0.0).unwrap().rate, f64::NEG_INFINITY);
    }

    #[test]
    fn achievable_power_inversion() {
        assert_eq!(power_upper_for_mmse(1.0, 0.0, 0.5).unwrap(), 0.0);
        let p = power_upper_for_mmse(1.0, 0.0, 0.2).unwrap();
        let m = mmse_upper_numeric(&ProblemParams::new(1.0, p, 0.0).unwrap()).unwrap().mmse;
        assert!(m <= 0.2 && m > 0.19);
    }

    #[test]
    fn minimum_perfect_power_values() {
        let g = (5.0_f64.sqrt() - 1.0) / 2.0;
        assert!((min_power_for_perfect(g, 0.0).unwrap() - 0.472_135_954_999_579_3).abs() < 2e-8);
        assert!((min_power_for_perfect(1.0, 0.0).unwrap() - 0.581_412_179_607_29).abs() < 2e-8);
        assert!((min_power_for_perfect(100.0, 0.0).unwrap() - 0.990_194_211_289_534_4).abs() < 2e-8);

        let p = min_power_for_perfect(1.0, 2.0).unwrap();
        assert!(p >= rate_factor(2.0) - 1.0);

        assert!(min_power_for_perfect(1e-6, 0.0).unwrap() < 1e-2);
    }
}
