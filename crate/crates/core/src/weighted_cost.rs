//! Weighted cost `k2 * P + MMSE`: lower and upper envelopes over the power,
//! and the four-region certificate that bounds their ratio by 16.

use serde::{Deserialize, Serialize};

use crate::achievability::{cost_upper_analytical, mmse_upper_numeric_with, AnalyticalBranch, UpperBoundConfig};
use crate::error::{Error, Result};
use crate::lower_bounds::{mmse_lower_full_with, mmse_lower_loosened, LowerBoundConfig};
use crate::model::WeightedCostParams;
use crate::optim::{minimize_on_interval, SearchConfig};

/// Multiple of `max(2^{2R}, sigma2, 1)` capping the power search.
pub const P_MAX_FACTOR: f64 = 64.0;

/// Cost and the power attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostPoint {
    pub value: f64,
    pub p_star: f64,
}

/// Search settings for the power envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    /// Search over `u = sqrt(P - P_min)`.
    pub power: SearchConfig,
    pub lower: LowerBoundConfig,
    pub upper: UpperBoundConfig,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            power: SearchConfig::new(401, 1e-10),
            lower: LowerBoundConfig::default(),
            upper: UpperBoundConfig::default(),
        }
    }
}

/// Upper end of the power search.
pub fn power_cap(params: &WeightedCostParams) -> f64 {
    P_MAX_FACTOR * params.rate_factor().max(params.sigma2).max(1.0)
}

/// Minimizes `k2 P + mmse_at(P)` over `[2^{2R} - 1, P_max]`. The search runs
/// in `u = sqrt(P - P_min)` so small powers are sampled densely.
pub fn cost_envelope<F>(params: &WeightedCostParams, mut mmse_at: F, config: &SearchConfig) -> Result<CostPoint>
where
    F: FnMut(f64) -> Result<f64>,
{
    let p0 = params.min_power();
    let p_max = power_cap(params);
    let u_max = (p_max - p0).sqrt();
    let mut failure = None;
    let r = minimize_on_interval(
        |u| {
            let p = p0 + u * u;
            match mmse_at(p) {
                Ok(m) => params.k2 * p + m,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            }
        },
        0.0,
        u_max,
        config,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    if r.arg >= u_max {
        return Err(Error::SearchFailure(format!(
            "cost minimizer reached the power cap {p_max}"
        )));
    }
    Ok(CostPoint {
        value: r.value,
        p_star: p0 + r.arg * r.arg,
    })
}

/// `inf_P k2 P + MMSE_lb(P)` with the full lower bound.
pub fn cost_lower(params: &WeightedCostParams) -> Result<CostPoint> {
    cost_lower_with(params, &CostConfig::default())
}

pub fn cost_lower_with(params: &WeightedCostParams, config: &CostConfig) -> Result<CostPoint> {
    cost_envelope(
        params,
        |p| Ok(mmse_lower_full_with(&params.at_power(p)?, &config.lower)?.value),
        &config.power,
    )
}

/// Same envelope with the loosened bound; its minimizer is the `P*` the
/// region analysis refers to.
pub fn cost_lower_loosened(params: &WeightedCostParams) -> Result<CostPoint> {
    cost_envelope(
        params,
        |p| Ok(mmse_lower_loosened(&params.at_power(p)?)?.value),
        &CostConfig::default().power,
    )
}

/// Zero-rate envelope with the legacy bound.
pub fn cost_lower_legacy(params: &WeightedCostParams) -> Result<CostPoint> {
    cost_envelope(
        params,
        |p| Ok(crate::lower_bounds::mmse_lower_legacy(&params.at_power(p)?)?.value),
        &CostConfig::default().power,
    )
}

/// `inf_P k2 P + MMSE_ub(P)` with the numerically optimized scheme.
pub fn cost_upper(params: &WeightedCostParams) -> Result<CostPoint> {
    cost_upper_with(params, &CostConfig::default())
}

pub fn cost_upper_with(params: &WeightedCostParams, config: &CostConfig) -> Result<CostPoint> {
    cost_envelope(
        params,
        |p| Ok(mmse_upper_numeric_with(&params.at_power(p)?, &config.upper)?.mmse),
        &config.power,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Case1,
    Case2,
    Case3,
    Case4a,
    Case4b,
}

impl Region {
    /// Proven bound on `analytical upper / lower` within the region.
    pub fn certificate(self) -> f64 {
        match self {
            Region::Case1 => std::f64::consts::SQRT_2 / (std::f64::consts::SQRT_2 - 1.0),
            Region::Case2 | Region::Case4a => 16.0,
            Region::Case3 => 1.0 / 0.09,
            Region::Case4b => 1.0 / 0.065,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCertificate {
    pub region: Region,
    /// `sigma2 2^{2R} / ((sigma + sqrt(P*))^2 + 1)`
    pub kappa: f64,
    pub certificate: f64,
}

/// `1/((1 + 2^{1/4}/4)^2 + 1)`, the floor on `kappa` in case 3.
pub fn case3_kappa_floor() -> f64 {
    let r = 2f64.powf(0.25) / 4.0;
    1.0 / ((1.0 + r) * (1.0 + r) + 1.0)
}

/// `(sqrt(0.37) - 2^{1/4}/4)^2`, the MMSE floor in case 3.
pub fn case3_mmse_floor() -> f64 {
    let d = 0.37f64.sqrt() - 2f64.powf(0.25) / 4.0;
    d * d
}

/// Region of the parameter space, tested in order: case 1, 2, 3, then 4a/4b.
pub fn classify_region(params: &WeightedCostParams, p_star: f64) -> RegionCertificate {
    let rho = params.rate_factor();
    let sigma = params.sigma2.sqrt();
    let sp = sigma + p_star.max(0.0).sqrt();
    let kappa = params.sigma2 * rho / (sp * sp + 1.0);
    let region = if params.rate >= 0.25 {
        Region::Case1
    } else if p_star >= rho / 16.0 {
        Region::Case2
    } else if params.sigma2 > 1.0 {
        Region::Case3
    } else if p_star >= params.sigma2 / 8.0 {
        Region::Case4a
    } else {
        Region::Case4b
    };
    RegionCertificate {
        region,
        kappa,
        certificate: region.certificate(),
    }
}

/// Lower and upper weighted costs at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSandwich {
    pub j_lb: f64,
    pub j_ub_numeric: f64,
    pub j_ub_analytical: f64,
    pub analytical_branch: AnalyticalBranch,
    /// `j_ub_numeric / j_lb`
    pub ratio: f64,
    /// `j_ub_analytical / j_lb`
    pub ratio_analytical: f64,
    pub p_star_lb: f64,
    pub p_star_ub: f64,
    /// Loosened-bound envelope and its minimizer.
    pub j_lb_loosened: f64,
    pub p_star_loosened: f64,
    /// Classification at the loosened-bound `P*`; the certificate applies here.
    pub region: RegionCertificate,
    /// Classification at the full-bound `P*`.
    pub region_full: RegionCertificate,
}

impl CostSandwich {
    /// True when the region certificate bounds the analytical ratio against
    /// the loosened envelope.
    pub fn certificate_holds(&self) -> bool {
        self.j_ub_analytical <= self.region.certificate * self.j_lb_loosened
    }
}

pub fn cost_sandwich(params: &WeightedCostParams) -> Result<CostSandwich> {
    cost_sandwich_with(params, &CostConfig::default())
}

pub fn cost_sandwich_with(params: &WeightedCostParams, config: &CostConfig) -> Result<CostSandwich> {
    let lb = cost_lower_with(params, config)?;
    let ub = cost_upper_with(params, config)?;
    let loose = cost_lower_loosened(params)?;
    let an = cost_upper_analytical(params);
    Ok(CostSandwich {
        j_lb: lb.value,
        j_ub_numeric: ub.value,
        j_ub_analytical: an.value,
        analytical_branch: an.branch,
        ratio: ub.value / lb.value,
        ratio_analytical: an.value / lb.value,
        p_star_lb: lb.p_star,
        p_star_ub: ub.p_star,
        j_lb_loosened: loose.value,
        p_star_loosened: loose.p_star,
        region: classify_region(params, loose.p_star),
        region_full: classify_region(params, lb.p_star),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.618_033_988_749_894_8;

    fn w(sigma2: f64, rate: f64, k2: f64) -> WeightedCostParams {
        WeightedCostParams::new(sigma2, rate, k2).unwrap()
    }

    #[test]
    fn tangent_value_at_golden_ratio() {
        let c = cost_lower(&w(GOLDEN, 0.0, 0.1)).unwrap();
        assert!((c.value - 0.043_572_495_112).abs() < 1e-8, "{}", c.value);
        assert!((c.p_star - 0.401_04).abs() < 1e-3);
    }

    #[test]
    fn expensive_power_stays_at_zero() {
        let c = cost_lower(&w(1.0, 0.0, 1e3)).unwrap();
        // the bound falls like sqrt(P) near zero, so the optimum sits just off it
        assert!(c.p_star < 1e-4);
        assert!(c.value <= 0.5);
    }

    #[test]
    fn lower_cost_covers_communication_power() {
        let params = w(2.0, 0.7, 0.3);
        assert!(cost_lower(&params).unwrap().value >= 0.3 * (params.rate_factor() - 1.0));
    }

    #[test]
    fn upper_envelope_below_closed_forms() {
        let params = w(1.0, 0.0, 1.0);
        let ub = cost_upper(&params).unwrap();
        assert!(ub.value <= 1.0 + 1e-7);
    }

    #[test]
    fn region_examples() {
        let r = classify_region(&w(2.0, 0.5, 1.0), 0.1);
        assert_eq!(r.region, Region::Case1);
        assert!((r.certificate - 3.414).abs() < 1e-3);

        let r = classify_region(&w(4.0, 0.0, 1.0), 0.001);
        assert_eq!(r.region, Region::Case3);
        assert!(r.kappa >= 0.37);

        let r = classify_region(&w(0.5, 0.0, 1.0), 0.01);
        assert_eq!(r.region, Region::Case4b);
        assert!(r.certificate < 16.0);

        assert_eq!(classify_region(&w(0.5, 0.0, 1.0), 0.1).region, Region::Case2);
        assert_eq!(classify_region(&w(0.5, 0.0, 1.0), 0.0625).region, Region::Case2);
        assert_eq!(classify_region(&w(0.3, 0.0, 1.0), 0.05).region, Region::Case4a);
    }

    #[test]
    fn region_constants() {
        let k = case3_kappa_floor();
        assert!(k > 0.37 && k < 0.373);
        assert!(case3_mmse_floor() > 0.09);
    }

    #[test]
    fn sandwich_orders_and_certifies() {
        let s = cost_sandwich(&w(GOLDEN, 0.0, 0.1)).unwrap();
        assert!(s.ratio >= 1.0 - 1e-7);
        assert!(s.j_ub_analytical <= 16.0 * s.j_lb);
        assert!(s.certificate_holds());
    }
}
