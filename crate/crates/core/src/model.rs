//! Problem parameters and feasibility predicates.
//!
//! The host `X0` is i.i.d. `N(0, sigma2)`, the encoder adds an input `V` of
//! average power at most `power`, the channel adds unit-variance white
//! Gaussian noise, and a message is carried at `rate` bits per channel use.
//! All rates are in bits (base-2 logarithms).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest host variance accepted; every bound divides by `sigma2`.
pub const MIN_SIGMA2: f64 = 1e-12;

/// Channel noise variance. Other noise levels are a caller-side rescaling.
pub const NOISE_VAR: f64 = 1.0;

/// `2^(2R)`, the power factor a rate-`R` message costs on a unit-noise channel.
#[inline]
pub fn rate_factor(rate: f64) -> f64 {
    (2.0 * rate).exp2()
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

pub(crate) fn validate_sigma2(sigma2: f64) -> Result<()> {
    check_finite("sigma2", sigma2)?;
    if sigma2 <= MIN_SIGMA2 {
        return Err(Error::InvalidParameter {
            name: "sigma2",
            value: sigma2,
            reason: "host variance must exceed 1e-12",
        });
    }
    Ok(())
}

pub(crate) fn validate_rate(rate: f64) -> Result<()> {
    check_finite("rate", rate)?;
    if rate < 0.0 {
        return Err(Error::InvalidParameter {
            name: "rate",
            value: rate,
            reason: "rate must be non-negative",
        });
    }
    Ok(())
}

pub(crate) fn validate_power(power: f64) -> Result<()> {
    check_finite("power", power)?;
    if power < 0.0 {
        return Err(Error::InvalidParameter {
            name: "power",
            value: power,
            reason: "power must be non-negative",
        });
    }
    Ok(())
}

/// Host variance, power budget and message rate of one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub sigma2: f64,
    pub power: f64,
    pub rate: f64,
    pub noise_var: f64,
}

impl ProblemParams {
    pub fn new(sigma2: f64, power: f64, rate: f64) -> Result<Self> {
        validate_sigma2(sigma2)?;
        validate_power(power)?;
        validate_rate(rate)?;
        Ok(ProblemParams {
            sigma2,
            power,
            rate,
            noise_var: NOISE_VAR,
        })
    }

    /// Host standard deviation.
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// `2^(2R)`.
    pub fn rate_factor(&self) -> f64 {
        rate_factor(self.rate)
    }

    /// Minimum power for reliable communication at `rate`: `2^(2R) - 1`.
    pub fn min_power(&self) -> f64 {
        self.rate_factor() - 1.0
    }

    /// Same instance at a different power budget.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        ProblemParams::new(self.sigma2, power, self.rate)
    }

    pub fn feasible(&self) -> bool {
        feasible(self)
    }

    /// Returns an [`Error::Infeasible`] unless `power >= 2^(2R) - 1`.
    pub fn require_feasible(&self) -> Result<()> {
        if self.feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible {
                power: self.power,
                required: self.min_power(),
            })
        }
    }
}

/// Weighted-cost instance: `k2 * power + mmse` at a fixed message rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedCostParams {
    pub sigma2: f64,
    pub rate: f64,
    pub k2: f64,
}

impl WeightedCostParams {
    pub fn new(sigma2: f64, rate: f64, k2: f64) -> Result<Self> {
        validate_sigma2(sigma2)?;
        validate_rate(rate)?;
        check_finite("k2", k2)?;
        if k2 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "k2",
                value: k2,
                reason: "power weight must be positive",
            });
        }
        Ok(WeightedCostParams { sigma2, rate, k2 })
    }

    /// The underlying problem evaluated at a particular input power.
    pub fn at_power(&self, power: f64) -> Result<ProblemParams> {
        ProblemParams::new(self.sigma2, power, self.rate)
    }

    pub fn rate_factor(&self) -> f64 {
        rate_factor(self.rate)
    }

    pub fn min_power(&self) -> f64 {
        self.rate_factor() - 1.0
    }
}

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ClosedInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// True iff `power >= 2^(2R) - 1`; the boundary is included.
pub fn feasible(params: &ProblemParams) -> bool {
    params.power >= params.min_power()
}

/// Range of the host/input correlation `sigma_xv = E[X0 V]` compatible with
/// the power budget (Cauchy-Schwarz) and with carrying `rate` bits over the
/// unit-noise channel.
pub fn sigma_xv_interval(params: &ProblemParams) -> Result<ClosedInterval> {
    params.require_feasible()?;
    let reach = params.sigma() * params.power.sqrt();
    let rate_floor = (params.min_power() - params.power - params.sigma2) / 2.0;
    let lo = (-reach).max(rate_floor);
    // feasibility gives rate_floor <= reach up to rounding
    Ok(ClosedInterval {
        lo: lo.min(reach),
        hi: reach,
    })
}
