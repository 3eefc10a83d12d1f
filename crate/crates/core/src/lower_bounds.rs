//! Converse bounds on the reconstruction MMSE of `X1`.
//!
//! The main bound is
//!
//! ```text
//! inf_{sigma_xv} sup_{gamma} (1/gamma^2) ((c - b(gamma))^+)^2
//! c^2        = sigma2 2^{2R} / (1 + sigma2 + P + 2 sigma_xv)
//! b(gamma)^2 = (1-gamma)^2 sigma2 + gamma^2 P - 2 gamma (1-gamma) sigma_xv
//! ```
//!
//! Writing `t = 1/gamma`, `t^2 b^2` is a quadratic in `t` and the objective
//! `(c t - sqrt(quadratic))^+` is concave, so the supremum over `gamma > 0`
//! has the closed form used by [`GammaObjectiveTerms::sup_positive`]. The grid
//! route over `[1e-6, 4]` is kept for cross-checking.

use serde::{Deserialize, Serialize};

use crate::achievability::{bracket_done, perfect_rate_r0_with};
use crate::error::{Error, Result};
use crate::model::{rate_factor, sigma_xv_interval, validate_rate, validate_sigma2, ProblemParams};
use crate::optim::{inf_sup, maximize_on_interval, minimize_on_interval, ScalarOptResult, SearchConfig};

/// Lower end of the compact gamma interval used by the grid route.
pub const GAMMA_MIN: f64 = 1e-6;
/// Upper end of the compact gamma interval used by the grid route.
pub const GAMMA_MAX: f64 = 4.0;
/// Slack allowed when comparing bound variants.
pub const VARIANT_SLACK: f64 = 1e-9;
/// Gain from negative gamma above which a point is flagged.
pub const NEGATIVE_GAMMA_FLAG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    Full,
    Loosened,
    Legacy,
    GammaOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub witness_sigma_xv: f64,
    /// `None` for closed-form variants. A witness of `0.0` marks a supremum
    /// approached only as `gamma -> 0+`.
    pub witness_gamma: Option<f64>,
    pub variant: BoundVariant,
    /// How much allowing `gamma < 0` would raise the bound (zero when no
    /// sampled `sigma_xv` could benefit).
    pub negative_gamma_gain: f64,
}

impl BoundResult {
    fn closed_form(value: f64, witness_sigma_xv: f64, witness_gamma: Option<f64>, variant: BoundVariant) -> Self {
        BoundResult {
            value,
            witness_sigma_xv,
            witness_gamma,
            variant,
            negative_gamma_gain: 0.0,
        }
    }

    /// True when negative gamma would have raised the bound noticeably.
    pub fn negative_gamma_flag(&self) -> bool {
        self.negative_gamma_gain > NEGATIVE_GAMMA_FLAG
    }
}

/// The two composite terms of the gamma objective at a fixed `sigma_xv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaObjectiveTerms {
    pub sigma2: f64,
    pub power: f64,
    pub sigma_xv: f64,
    pub c: f64,
    /// `c^2`, kept unrounded by the square root.
    pub c2: f64,
}

impl GammaObjectiveTerms {
    pub fn new(params: &ProblemParams, sigma_xv: f64) -> Result<Self> {
        let denom = 1.0 + params.sigma2 + params.power + 2.0 * sigma_xv;
        if !(denom > 0.0) {
            return Err(Error::NumericDomain {
                context: "1 + sigma2 + P + 2 sigma_xv must be positive",
                arg: sigma_xv,
            });
        }
        let c2 = params.sigma2 * params.rate_factor() / denom;
        Ok(GammaObjectiveTerms {
            sigma2: params.sigma2,
            power: params.power,
            sigma_xv,
            c: c2.sqrt(),
            c2,
        })
    }

    /// `sigma2 + P + 2 sigma_xv`
    #[inline]
    pub fn q(&self) -> f64 {
        self.sigma2 + self.power + 2.0 * self.sigma_xv
    }

    #[inline]
    pub fn b(&self, gamma: f64) -> f64 {
        let g1 = 1.0 - gamma;
        let r = g1 * g1 * self.sigma2 + gamma * gamma * self.power - 2.0 * gamma * g1 * self.sigma_xv;
        r.max(0.0).sqrt()
    }

    /// `(1/gamma^2) ((c - b(gamma))^+)^2`
    #[inline]
    pub fn objective(&self, gamma: f64) -> f64 {
        let d = (self.c - self.b(gamma)).max(0.0);
        d * d / (gamma * gamma)
    }

    /// Closed-form choice `(sigma2 + sigma_xv) / (sigma2 + P + 2 sigma_xv)`.
    pub fn gamma_star(&self) -> Option<f64> {
        let q = self.q();
        if q > 0.0 {
            Some((self.sigma2 + self.sigma_xv) / q)
        } else {
            None
        }
    }

    /// True when the supremum over `gamma > 0` is exactly zero.
    #[inline]
    fn collapses(&self, s: f64, resid: f64) -> bool {
        s <= 0.0 || self.c2 * self.q() <= resid
    }

    /// Exact supremum over `gamma > 0`, with the maximizing gamma.
    pub fn sup_positive(&self) -> (f64, Option<f64>) {
        self.sup_signed(self.sigma2 + self.sigma_xv)
    }

    /// Exact supremum over `gamma < 0`; the `t -> -t` reflection flips the
    /// sign of `sigma2 + sigma_xv`.
    pub fn sup_negative(&self) -> (f64, Option<f64>) {
        let (v, g) = self.sup_signed(-(self.sigma2 + self.sigma_xv));
        (v, g.map(|g| -g))
    }

    fn sup_signed(&self, s: f64) -> (f64, Option<f64>) {
        let s2 = self.sigma2;
        let resid = (s2 * self.power - self.sigma_xv * self.sigma_xv).max(0.0);
        if self.collapses(s, resid) {
            return (0.0, self.gamma_star().filter(|g| *g > 0.0));
        }
        let c2 = self.c2;
        let slack = (s2 - c2).max(0.0);
        let value = if resid == 0.0 {
            c2 * s * s / (s2 * s2)
        } else {
            let h = ((self.c * s - (resid * slack).sqrt()) / s2).max(0.0);
            h * h
        };
        let t = s / s2 + self.c * resid.sqrt() / (s2 * slack.sqrt());
        let gamma = if t.is_finite() { 1.0 / t } else { 0.0 };
        (value, Some(gamma))
    }

    /// Grid + golden supremum on `[GAMMA_MIN, GAMMA_MAX]`, plus `gamma*`.
    pub fn sup_grid(&self, config: &SearchConfig) -> Result<(f64, Option<f64>)> {
        let r = maximize_on_interval(|g| self.objective(g), GAMMA_MIN, GAMMA_MAX, config)?;
        let mut best = (r.value, Some(r.arg));
        if let Some(gs) = self.gamma_star().filter(|g| *g > 0.0) {
            let v = self.objective(gs);
            if v > best.0 {
                best = (v, Some(gs));
            }
        }
        Ok(best)
    }
}

/// How the inner supremum over gamma is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GammaSearch {
    Analytic,
    Grid(SearchConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConfig {
    pub outer: SearchConfig,
    pub gamma: GammaSearch,
    /// Search used for the perfect-reconstruction candidate.
    pub r0: SearchConfig,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        LowerBoundConfig {
            outer: SearchConfig::default(),
            gamma: GammaSearch::Analytic,
            r0: SearchConfig::default(),
        }
    }
}

fn inner_sup(terms: &GammaObjectiveTerms, gamma: &GammaSearch) -> Result<(f64, Option<f64>)> {
    match gamma {
        GammaSearch::Analytic => Ok(terms.sup_positive()),
        GammaSearch::Grid(cfg) => terms.sup_grid(cfg),
    }
}

/// Full inf-sup lower bound with default search settings.
pub fn mmse_lower_full(params: &ProblemParams) -> Result<BoundResult> {
    mmse_lower_full_with(params, &LowerBoundConfig::default())
}

pub fn mmse_lower_full_with(params: &ProblemParams, config: &LowerBoundConfig) -> Result<BoundResult> {
    let iv = sigma_xv_interval(params)?;
    let inner = |x: f64| -> Result<ScalarOptResult> {
        let terms = GammaObjectiveTerms::new(params, x)?;
        let (value, g) = inner_sup(&terms, &config.gamma)?;
        Ok(ScalarOptResult {
            arg: g.unwrap_or(f64::NAN),
            value,
            evaluations: 1,
        })
    };
    let (mut x_best, mut r_best) = inf_sup(iv.lo, iv.hi, inner, &config.outer)?;

    // the perfect-reconstruction correlation is where the bound collapses
    if r_best.value > 0.0 && params.power > 0.0 {
        let r0 = perfect_rate_r0_with(params.sigma2, params.power, &config.r0)?;
        if iv.contains(r0.sigma_xv) {
            let r = inner(r0.sigma_xv)?;
            if r.value < r_best.value {
                x_best = r0.sigma_xv;
                r_best = r;
            }
        }
    }

    let mut gain = 0.0;
    if matches!(config.gamma, GammaSearch::Analytic) && iv.lo < -params.sigma2 {
        let both = minimize_on_interval(
            |x| match GammaObjectiveTerms::new(params, x) {
                Ok(t) => t.sup_positive().0.max(t.sup_negative().0),
                Err(_) => f64::INFINITY,
            },
            iv.lo,
            iv.hi,
            &config.outer,
        )?;
        gain = (both.value - r_best.value).max(0.0);
    }

    let witness_gamma = if r_best.arg.is_nan() { None } else { Some(r_best.arg) };
    Ok(BoundResult {
        value: r_best.value.max(0.0),
        witness_sigma_xv: x_best,
        witness_gamma,
        variant: BoundVariant::Full,
        negative_gamma_gain: gain,
    })
}

/// Gamma objective at the Closed-form choice `gamma*`.
pub fn mmse_lower_gamma_star_candidate(params: &ProblemParams, sigma_xv: f64) -> Result<f64> {
    let terms = GammaObjectiveTerms::new(params, sigma_xv)?;
    let q = terms.q();
    if !(q > 0.0) {
        return Err(Error::NumericDomain {
            context: "gamma* denominator sigma2 + P + 2 sigma_xv",
            arg: sigma_xv,
        });
    }
    let g = (params.sigma2 + sigma_xv) / q;
    if g == 0.0 {
        return Err(Error::NumericDomain {
            context: "gamma* = 0 is not admissible",
            arg: sigma_xv,
        });
    }
    Ok(terms.objective(g))
}

#[inline]
fn clipped_square(x: f64) -> f64 {
    let d = x.max(0.0);
    d * d
}

/// Loosened bound: gamma = 1 and the worst-case correlation `sigma sqrt(P)`.
pub fn mmse_lower_loosened(params: &ProblemParams) -> Result<BoundResult> {
    params.require_feasible()?;
    let (s, p) = (params.sigma(), params.power.sqrt());
    let denom = params.sigma2 + params.power + 2.0 * s * p + 1.0;
    let value = clipped_square((params.sigma2 * params.rate_factor() / denom).sqrt() - p);
    Ok(BoundResult::closed_form(value, s * p, Some(1.0), BoundVariant::Loosened))
}

/// Earlier zero-rate bound, kept for comparison sweeps.
pub fn mmse_lower_legacy(params: &ProblemParams) -> Result<BoundResult> {
    if params.rate != 0.0 {
        return Err(Error::UnsupportedVariant(format!(
            "legacy bound is defined only at rate 0 (got {})",
            params.rate
        )));
    }
    let (s, p) = (params.sigma(), params.power.sqrt());
    let value = clipped_square((params.sigma2 / ((s + p) * (s + p) + 1.0)).sqrt() - p);
    Ok(BoundResult::closed_form(value, s * p, None, BoundVariant::Legacy))
}

/// Gamma fixed at 1, infimum over `|sigma_xv| <= sigma sqrt(P)`.
pub fn mmse_lower_gamma_one(params: &ProblemParams) -> Result<BoundResult> {
    params.require_feasible()?;
    let reach = params.sigma() * params.power.sqrt();
    let p = params.power.sqrt();
    let num = params.sigma2 * params.rate_factor();
    let r = minimize_on_interval(
        |x| clipped_square((num / (params.sigma2 + params.power + 2.0 * x + 1.0)).sqrt() - p),
        -reach,
        reach,
        &SearchConfig::default(),
    )?;
    Ok(BoundResult::closed_form(r.value, r.arg, Some(1.0), BoundVariant::GammaOne))
}

/// Result of inverting the full bound in `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerForMmse {
    pub power: f64,
    /// The minimum communication power already meets the target.
    pub trivial: bool,
}

/// Smallest power (to within the bisection tolerances) at which the full lower bound drops
/// to `target_mmse`, found by bisection.
pub fn power_lower_for_mmse(sigma2: f64, rate: f64, target_mmse: f64) -> Result<PowerForMmse> {
    power_lower_for_mmse_with(sigma2, rate, target_mmse, &LowerBoundConfig::default())
}

pub fn power_lower_for_mmse_with(sigma2: f64, rate: f64, target_mmse: f64, config: &LowerBoundConfig) -> Result<PowerForMmse> {
    validate_sigma2(sigma2)?;
    validate_rate(rate)?;
    if !target_mmse.is_finite() || target_mmse < 0.0 {
        return Err(Error::InvalidParameter {
            name: "target_mmse",
            value: target_mmse,
            reason: "target MMSE must be finite and non-negative",
        });
    }
    let lb = |p: f64| -> Result<f64> {
        Ok(mmse_lower_full_with(&ProblemParams::new(sigma2, p, rate)?, config)?.value)
    };
    let mut lo = rate_factor(rate) - 1.0;
    if lb(lo)? <= target_mmse {
        return Ok(PowerForMmse { power: lo, trivial: true });
    }
    let mut hi = lo + sigma2.max(1.0);
    let mut doublings = 0;
    while lb(hi)? > target_mmse {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 64 {
            return Err(Error::SearchFailure(format!(
                "lower bound never reaches {target_mmse} for sigma2={sigma2}, rate={rate}"
            )));
        }
    }
    while !bracket_done(lo, hi) {
        let mid = 0.5 * (lo + hi);
        if lb(mid)? <= target_mmse {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(PowerForMmse { power: hi, trivial: false })
}
