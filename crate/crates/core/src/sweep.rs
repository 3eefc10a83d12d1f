//! Two-axis parameter sweeps of bound ratios, with CSV and JSON output.
//!
//! Cells are evaluated on a rayon pool and collected in row order (axis 1
//! outer, axis 2 inner). MMSE bounds are cached per `(sigma2, rate, power)`,
//! so cost envelopes sharing a host variance reuse each other's evaluations.
//! Cached values are pure functions of their key, which keeps the output
//! independent of scheduling.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use dashmap::DashMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::achievability::{mmse_upper_numeric_with, power_upper_for_mmse_with, UpperBoundConfig};
use crate::error::{Error, Result};
use crate::lower_bounds::{mmse_lower_full_with, mmse_lower_legacy, power_lower_for_mmse_with, LowerBoundConfig};
use crate::model::{ProblemParams, WeightedCostParams};
use crate::optim::SearchConfig;
use crate::weighted_cost::cost_envelope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    /// `log10 k`; sets `k2 = 10^(2v)`.
    Log10K,
    /// `log10 sigma`; sets `sigma2 = 10^(2v)`.
    Log10Sigma,
    Sigma2,
    Power,
    /// Target MMSE for the power ratio.
    Mmse,
    /// Target MMSE as a fraction of `sigma2 / (sigma2 + 1)`.
    MmseFrac,
    /// Target MMSE as `sigma2 / (sigma2 + 1)` minus this gap.
    MmseGap,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Log10K => "log10_k",
            AxisName::Log10Sigma => "log10_sigma",
            AxisName::Sigma2 => "sigma2",
            AxisName::Power => "power",
            AxisName::Mmse => "mmse",
            AxisName::MmseFrac => "mmse_frac",
            AxisName::MmseGap => "mmse_gap",
        }
    }

    fn slot(self) -> Slot {
        match self {
            AxisName::Log10K => Slot::K2,
            AxisName::Log10Sigma | AxisName::Sigma2 => Slot::Sigma2,
            AxisName::Power => Slot::Power,
            AxisName::Mmse | AxisName::MmseFrac | AxisName::MmseGap => Slot::Target,
        }
    }
}

impl FromStr for AxisName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "log10_k" => AxisName::Log10K,
            "log10_sigma" => AxisName::Log10Sigma,
            "sigma2" => AxisName::Sigma2,
            "power" => AxisName::Power,
            "mmse" => AxisName::Mmse,
            "mmse_frac" => AxisName::MmseFrac,
            "mmse_gap" => AxisName::MmseGap,
            other => return Err(Error::Config(format!("unknown axis name `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Slot {
    K2,
    Sigma2,
    Power,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log10,
}

/// One sweep axis: `count` points from `lo` to `hi`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn new(name: AxisName, lo: f64, hi: f64, count: usize, scale: Scale) -> Result<Self> {
        let a = Axis { name, lo, hi, count, scale };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Config(format!("axis {} needs at least 2 points", self.name.as_str())));
        }
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Config(format!(
                "axis {} needs finite lo < hi, got [{}, {}]",
                self.name.as_str(),
                self.lo,
                self.hi
            )));
        }
        if self.scale == Scale::Log10 && self.lo <= 0.0 {
            return Err(Error::Config(format!("log-scale axis {} needs positive bounds", self.name.as_str())));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear if i + 1 == n => self.hi,
                    Scale::Linear => self.lo + (self.hi - self.lo) * f,
                    Scale::Log10 if i + 1 == n => self.hi,
                    Scale::Log10 => 10f64.powf(self.lo.log10() + (self.hi.log10() - self.lo.log10()) * f),
                }
            })
            .collect()
    }
}

/// Parses `name:lo:hi:count[:log10|:linear]`.
impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 && parts.len() != 5 {
            return Err(Error::Config(format!("axis `{s}` is not name:lo:hi:count[:scale]")));
        }
        let num = |t: &str| -> Result<f64> {
            t.parse::<f64>().map_err(|_| Error::Config(format!("bad number `{t}` in axis `{s}`")))
        };
        let count = parts[3]
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("bad count `{}` in axis `{s}`", parts[3])))?;
        let scale = match parts.get(4) {
            None | Some(&"linear") => Scale::Linear,
            Some(&"log10") => Scale::Log10,
            Some(other) => return Err(Error::Config(format!("unknown axis scale `{other}`"))),
        };
        Axis::new(parts[0].parse()?, num(parts[1])?, num(parts[2])?, count, scale)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.name.as_str(), self.lo, self.hi, self.count)?;
        if self.scale == Scale::Log10 {
            write!(f, ":log10")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    CostRatioNew,
    CostRatioLegacy,
    MmseRatioNew,
    MmseRatioLegacy,
    PowerRatio,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::CostRatioNew => "cost_ratio_new",
            Quantity::CostRatioLegacy => "cost_ratio_legacy",
            Quantity::MmseRatioNew => "mmse_ratio_new",
            Quantity::MmseRatioLegacy => "mmse_ratio_legacy",
            Quantity::PowerRatio => "power_ratio",
        }
    }

    fn needs(self) -> &'static [Slot] {
        match self {
            Quantity::CostRatioNew | Quantity::CostRatioLegacy => &[Slot::K2, Slot::Sigma2],
            Quantity::MmseRatioNew | Quantity::MmseRatioLegacy => &[Slot::Sigma2, Slot::Power],
            Quantity::PowerRatio => &[Slot::Sigma2, Slot::Target],
        }
    }

    fn is_legacy(self) -> bool {
        matches!(self, Quantity::CostRatioLegacy | Quantity::MmseRatioLegacy)
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cost_ratio_new" => Quantity::CostRatioNew,
            "cost_ratio_legacy" => Quantity::CostRatioLegacy,
            "mmse_ratio_new" => Quantity::MmseRatioNew,
            "mmse_ratio_legacy" => Quantity::MmseRatioLegacy,
            "power_ratio" => Quantity::PowerRatio,
            other => return Err(Error::Config(format!("unknown quantity `{other}`"))),
        })
    }
}

/// Values for parameters not set by an axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub rate: f64,
    pub k2: Option<f64>,
    pub sigma2: Option<f64>,
    pub power: Option<f64>,
    pub mmse: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub axis1: Axis,
    pub axis2: Axis,
    pub fixed: FixedParams,
    /// Grid for the power envelopes of the cost ratios.
    pub power_search: SearchConfig,
}

impl SweepSpec {
    pub fn new(quantity: Quantity, axis1: Axis, axis2: Axis, fixed: FixedParams) -> Self {
        SweepSpec {
            quantity,
            axis1,
            axis2,
            fixed,
            power_search: SearchConfig::new(401, 1e-10),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        self.axis2.validate()?;
        if self.axis1.name.slot() == self.axis2.name.slot() {
            return Err(Error::Config("both axes set the same parameter".into()));
        }
        crate::model::validate_rate(self.fixed.rate)?;
        if self.quantity.is_legacy() && self.fixed.rate != 0.0 {
            return Err(Error::UnsupportedVariant("legacy ratios are defined only at rate 0".into()));
        }
        for slot in self.quantity.needs() {
            let on_axis = self.axis1.name.slot() == *slot || self.axis2.name.slot() == *slot;
            let fixed = match slot {
                Slot::K2 => self.fixed.k2.is_some(),
                Slot::Sigma2 => self.fixed.sigma2.is_some(),
                Slot::Power => self.fixed.power.is_some(),
                Slot::Target => self.fixed.mmse.is_some(),
            };
            if !on_axis && !fixed {
                return Err(Error::Config(format!(
                    "quantity {} needs {:?} from an axis or a fixed value",
                    self.quantity.as_str(),
                    slot
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis1: f64,
    pub axis2: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub max_value: f64,
    pub argmax_axis1: f64,
    pub argmax_axis2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub max_value: f64,
    pub argmax_axis1: f64,
    pub argmax_axis2: f64,
}

impl SweepResult {
    pub fn summary(&self) -> SweepSummary {
        SweepSummary {
            max_value: self.max_value,
            argmax_axis1: self.argmax_axis1,
            argmax_axis2: self.argmax_axis2,
        }
    }

    /// Rows whose axis-2 coordinate equals `axis2`.
    pub fn column(&self, axis2: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.axis2 == axis2)
    }
}

/// `num / den` with `0/0 = 1` and `x/0 = inf` for `x > 0`.
pub fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum BoundKind {
    Full,
    Legacy,
    Upper,
}

/// Memoized MMSE bounds keyed on exact parameter bits.
#[derive(Default)]
struct BoundCache {
    map: DashMap<(BoundKind, u64, u64, u64), f64>,
    lower: LowerBoundConfig,
    upper: UpperBoundConfig,
}

impl BoundCache {
    fn get(&self, kind: BoundKind, params: &ProblemParams) -> Result<f64> {
        let key = (kind, params.sigma2.to_bits(), params.rate.to_bits(), params.power.to_bits());
        if let Some(v) = self.map.get(&key) {
            return Ok(*v);
        }
        let v = match kind {
            BoundKind::Full => mmse_lower_full_with(params, &self.lower)?.value,
            BoundKind::Legacy => mmse_lower_legacy(params)?.value,
            BoundKind::Upper => mmse_upper_numeric_with(params, &self.upper)?.mmse,
        };
        self.map.insert(key, v);
        Ok(v)
    }
}

#[derive(Default, Clone, Copy)]
struct Cell {
    k2: Option<f64>,
    sigma2: Option<f64>,
    power: Option<f64>,
    mmse: Option<f64>,
    mmse_frac: Option<f64>,
    mmse_gap: Option<f64>,
}

impl Cell {
    fn set(&mut self, name: AxisName, v: f64) {
        match name {
            AxisName::Log10K => self.k2 = Some(10f64.powf(2.0 * v)),
            AxisName::Log10Sigma => self.sigma2 = Some(10f64.powf(2.0 * v)),
            AxisName::Sigma2 => self.sigma2 = Some(v),
            AxisName::Power => self.power = Some(v),
            AxisName::Mmse => self.mmse = Some(v),
            AxisName::MmseFrac => self.mmse_frac = Some(v),
            AxisName::MmseGap => self.mmse_gap = Some(v),
        }
    }
}

fn missing(what: &str) -> Error {
    Error::Config(format!("missing {what}"))
}

fn evaluate_cell(spec: &SweepSpec, cache: &BoundCache, v1: f64, v2: f64) -> Result<f64> {
    let mut cell = Cell {
        k2: spec.fixed.k2,
        sigma2: spec.fixed.sigma2,
        power: spec.fixed.power,
        mmse: spec.fixed.mmse,
        mmse_frac: None,
        mmse_gap: None,
    };
    cell.set(spec.axis1.name, v1);
    cell.set(spec.axis2.name, v2);
    let rate = spec.fixed.rate;
    let sigma2 = cell.sigma2.ok_or_else(|| missing("sigma2"))?;

    match spec.quantity {
        Quantity::CostRatioNew | Quantity::CostRatioLegacy => {
            let params = WeightedCostParams::new(sigma2, rate, cell.k2.ok_or_else(|| missing("k2"))?)?;
            let kind = if spec.quantity.is_legacy() { BoundKind::Legacy } else { BoundKind::Full };
            let lb = cost_envelope(&params, |p| cache.get(kind, &params.at_power(p)?), &spec.power_search)?;
            let ub = cost_envelope(
                &params,
                |p| cache.get(BoundKind::Upper, &params.at_power(p)?),
                &spec.power_search,
            )?;
            Ok(safe_ratio(ub.value, lb.value))
        }
        Quantity::MmseRatioNew | Quantity::MmseRatioLegacy => {
            let params = ProblemParams::new(sigma2, cell.power.ok_or_else(|| missing("power"))?, rate)?;
            let kind = if spec.quantity.is_legacy() { BoundKind::Legacy } else { BoundKind::Full };
            let lb = cache.get(kind, &params)?;
            let ub = cache.get(BoundKind::Upper, &params)?;
            Ok(safe_ratio(ub, lb))
        }
        Quantity::PowerRatio => {
            let ceiling = sigma2 / (sigma2 + 1.0);
            let target = match (cell.mmse_frac, cell.mmse_gap, cell.mmse) {
                (Some(f), _, _) => f * ceiling,
                (None, Some(g), _) => ceiling - g,
                (None, None, Some(m)) => m,
                (None, None, None) => return Err(missing("target mmse")),
            };
            let lo = power_lower_for_mmse_with(sigma2, rate, target, &cache.lower)?.power;
            let hi = power_upper_for_mmse_with(sigma2, rate, target, &cache.upper)?;
            Ok(safe_ratio(hi, lo))
        }
    }
}

/// Evaluates `spec` on `workers` threads (0 picks rayon's default).
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let xs = spec.axis1.values();
    let ys = spec.axis2.values();
    let cells: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let cache = BoundCache::default();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    let values: Vec<Result<f64>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(x, y)| evaluate_cell(spec, &cache, x, y))
            .collect()
    });

    let mut rows = Vec::with_capacity(cells.len());
    for (&(axis1, axis2), v) in cells.iter().zip(values) {
        rows.push(SweepRow { axis1, axis2, value: v? });
    }
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.value > rows[best].value {
            best = i;
        }
    }
    Ok(SweepResult {
        spec: *spec,
        max_value: rows[best].value,
        argmax_axis1: rows[best].axis1,
        argmax_axis2: rows[best].axis2,
        rows,
    })
}

/// Decimal rendering with `digits` significant digits; `inf` for infinities.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes `axis1,axis2,value` rows with 12 significant digits.
pub fn emit_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    writeln!(out, "axis1,axis2,value")?;
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{}",
            format_sig(r.axis1, 12),
            format_sig(r.axis2, 12),
            format_sig(r.value, 12)
        )?;
    }
    out.flush()?;
    Ok(())
}
