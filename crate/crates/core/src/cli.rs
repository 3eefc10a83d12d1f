//! Command-line front end. Every subcommand prints one JSON object (or a
//! one-row CSV with `--format csv`) holding the result and an `inputs` echo.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::achievability::{
    cost_upper_analytical, min_power_for_perfect, mmse_upper_numeric, perfect_rate_r0, power_upper_for_mmse, StrategyParams,
};
use crate::error::{Error, Result};
use crate::lower_bounds::{
    mmse_lower_full, mmse_lower_full_with, mmse_lower_gamma_one, mmse_lower_legacy, mmse_lower_loosened, power_lower_for_mmse,
    GammaSearch, LowerBoundConfig,
};
use crate::mc::{lmmse_oracle, simulate_dpc_smallm_with, simulate_linear, simulate_quantizer, DpcOptions, TrialConfig};
use crate::model::{ProblemParams, WeightedCostParams};
use crate::optim::SearchConfig;
use crate::sweep::{emit_csv, run_sweep, Axis, FixedParams, Quantity, SweepSpec};
use crate::weighted_cost::cost_sandwich;

#[derive(Parser, Debug)]
#[command(name = "infoembed", version, about = "Bounds for Gaussian information embedding and the vector Witsenhausen problem")]
struct Cli {
    /// Output format for the result object.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for sweeps and simulations (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Converse bound on the reconstruction MMSE.
    LowerBound(LowerArgs),
    /// Best MMSE of the linear + dirty-paper scheme.
    UpperBound(ProblemArgs),
    /// Largest rate compatible with perfect reconstruction.
    RatePerfect(RatePerfectArgs),
    /// Minimum power for perfect reconstruction, or for a target MMSE.
    MinPower(MinPowerArgs),
    /// Weighted-cost sandwich and region certificate.
    WeightedCost(CostArgs),
    /// Two-axis ratio sweep.
    Sweep(SweepArgs),
    /// Monte Carlo simulation of a strategy.
    Simulate(SimArgs),
}

#[derive(Args, Debug, Serialize)]
struct ProblemArgs {
    #[arg(long)]
    sigma2: f64,
    #[arg(long)]
    power: f64,
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Variant {
    Full,
    Loosened,
    Legacy,
    GammaOne,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum GammaMode {
    Analytic,
    Grid,
}

#[derive(Args, Debug, Serialize)]
struct LowerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = Variant::Full)]
    variant: Variant,
    /// Inner supremum over gamma: closed form or grid search.
    #[arg(long, value_enum, default_value_t = GammaMode::Analytic)]
    gamma_search: GammaMode,
    #[arg(long, default_value_t = 2001)]
    grid_points: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug, Serialize)]
struct RatePerfectArgs {
    #[arg(long)]
    sigma2: f64,
    #[arg(long)]
    power: f64,
}

#[derive(Args, Debug, Serialize)]
struct MinPowerArgs {
    #[arg(long)]
    sigma2: f64,
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    /// Invert both bounds at this MMSE instead of at zero.
    #[arg(long)]
    target_mmse: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CostArgs {
    #[arg(long)]
    sigma2: f64,
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    /// Weight on input power.
    #[arg(long)]
    k2: f64,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    quantity: String,
    /// `name:lo:hi:count[:log10]`
    #[arg(long)]
    axis1: String,
    #[arg(long)]
    axis2: String,
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    power: Option<f64>,
    #[arg(long)]
    mmse: Option<f64>,
    /// Grid points of the power envelopes in cost sweeps.
    #[arg(long, default_value_t = 401)]
    power_grid: usize,
    /// CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Strategy {
    Linear,
    Quantizer,
    Dpc,
    LmmseOracle,
}

#[derive(Args, Debug, Serialize)]
struct SimArgs {
    #[arg(long, value_enum)]
    strategy: Strategy,
    #[arg(long)]
    sigma2: f64,
    /// Power budget; only used by the DPC strategy and the oracle.
    #[arg(long, default_value_t = 0.0)]
    power: f64,
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Linear strategy gain.
    #[arg(long, default_value_t = 0.0)]
    gain: f64,
    /// Quantizer step.
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Auxiliary codebook rate of the DPC strategy.
    #[arg(long)]
    rate_t: Option<f64>,
    #[arg(long, default_value_t = 1)]
    trials_per_codebook: usize,
    /// Sample count for the LMMSE oracle.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
}

fn with_inputs<T: Serialize, I: Serialize>(result: &T, inputs: &I, workers: Option<usize>) -> Result<Value> {
    let mut obj = match serde_json::to_value(result).map_err(json_err)? {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    let mut echo = serde_json::to_value(inputs).map_err(json_err)?;
    if let (Some(w), Value::Object(e)) = (workers, &mut echo) {
        e.insert("workers".into(), json!(w));
    }
    obj.insert("inputs".into(), echo);
    Ok(Value::Object(obj))
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Config(format!("serialization: {e}"))
}

/// Non-finite floats as strings; plain serde would write `null`.
fn f64_json(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn write_result(v: &Value, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string(v).map_err(json_err)?)?,
        Format::Csv => {
            let mut cells = Vec::new();
            flatten("", v, &mut cells);
            let header: Vec<&str> = cells.iter().map(|c| c.0.as_str()).collect();
            let row: Vec<&str> = cells.iter().map(|c| c.1.as_str()).collect();
            writeln!(out, "{}", header.join(","))?;
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let value = match &cli.command {
        Command::LowerBound(a) => {
            let p = ProblemParams::new(a.problem.sigma2, a.problem.power, a.problem.rate)?;
            let r = match a.variant {
                Variant::Full => {
                    let search = SearchConfig::new(a.grid_points, a.tol);
                    let gamma = match a.gamma_search {
                        GammaMode::Analytic => GammaSearch::Analytic,
                        GammaMode::Grid => GammaSearch::Grid(search),
                    };
                    let cfg = LowerBoundConfig {
                        outer: search,
                        gamma,
                        r0: search,
                    };
                    mmse_lower_full_with(&p, &cfg)?
                }
                Variant::Loosened => mmse_lower_loosened(&p)?,
                Variant::Legacy => mmse_lower_legacy(&p)?,
                Variant::GammaOne => mmse_lower_gamma_one(&p)?,
            };
            let mut v = with_inputs(&r, a, None)?;
            v["negative_gamma_flag"] = json!(r.negative_gamma_flag());
            v
        }
        Command::UpperBound(a) => {
            let p = ProblemParams::new(a.sigma2, a.power, a.rate)?;
            with_inputs(&mmse_upper_numeric(&p)?, a, None)?
        }
        Command::RatePerfect(a) => {
            let r = perfect_rate_r0(a.sigma2, a.power)?;
            let mut v = with_inputs(&r, a, None)?;
            v["rate"] = f64_json(r.rate);
            v
        }
        Command::MinPower(a) => match a.target_mmse {
            None => with_inputs(&json!({ "power": min_power_for_perfect(a.sigma2, a.rate)? }), a, None)?,
            Some(t) => {
                let lo = power_lower_for_mmse(a.sigma2, a.rate, t)?;
                let hi = power_upper_for_mmse(a.sigma2, a.rate, t)?;
                let res = json!({
                    "power_lower": lo.power,
                    "trivial": lo.trivial,
                    "power_upper": hi,
                    "ratio": crate::sweep::safe_ratio(hi, lo.power),
                });
                with_inputs(&res, a, None)?
            }
        },
        Command::WeightedCost(a) => {
            let p = WeightedCostParams::new(a.sigma2, a.rate, a.k2)?;
            let s = cost_sandwich(&p)?;
            let mut v = with_inputs(&s, a, None)?;
            v["analytical_branches"] = json!(cost_upper_analytical(&p).branches);
            v["certificate_holds"] = json!(s.certificate_holds());
            v
        }
        Command::Sweep(a) => {
            let mut spec = SweepSpec::new(
                a.quantity.parse::<Quantity>()?,
                a.axis1.parse::<Axis>()?,
                a.axis2.parse::<Axis>()?,
                FixedParams {
                    rate: a.rate,
                    k2: a.k2,
                    sigma2: a.sigma2,
                    power: a.power,
                    mmse: a.mmse,
                },
            );
            spec.power_search = SearchConfig::new(a.power_grid, spec.power_search.tol);
            let result = run_sweep(&spec, cli.workers)?;
            if let Some(path) = &a.out {
                emit_csv(&result, BufWriter::new(File::create(path)?))?;
            } else if cli.format == Format::Csv {
                return emit_csv(&result, stdout);
            }
            let mut v = with_inputs(&result.summary(), a, Some(cli.workers))?;
            v["max_value"] = f64_json(result.max_value);
            v["rows"] = json!(result.rows.len());
            v
        }
        Command::Simulate(a) => simulate(a, cli.workers)?,
    };
    write_result(&value, cli.format, stdout)
}

fn simulate(a: &SimArgs, workers: usize) -> Result<Value> {
    let params = ProblemParams::new(a.sigma2, a.power, a.rate)?;
    if let Strategy::LmmseOracle = a.strategy {
        let alpha = a.alpha.unwrap_or(a.power / (a.power + 1.0));
        let s = StrategyParams::new(a.sigma2, a.power, alpha, a.beta)?;
        let o = lmmse_oracle(&s, a.samples, a.seed)?;
        let mut v = with_inputs(&o, a, Some(workers))?;
        v["lmmse_joint"] = json!(crate::achievability::lmmse_joint(&s)?);
        return Ok(v);
    }
    let mut cfg = TrialConfig::new(a.seed, a.m, a.trials, params);
    cfg.workers = workers;
    let stats = match a.strategy {
        Strategy::Linear => simulate_linear(&cfg, a.gain)?,
        Strategy::Quantizer => simulate_quantizer(&cfg, a.step)?,
        Strategy::Dpc => {
            let alpha = a.alpha.unwrap_or(a.power / (a.power + 1.0));
            let s = StrategyParams::new(a.sigma2, a.power, alpha, a.beta)?;
            let rate_t = a.rate_t.ok_or_else(|| Error::Config("--rate-t is required for the dpc strategy".into()))?;
            let opts = DpcOptions {
                trials_per_codebook: a.trials_per_codebook,
            };
            simulate_dpc_smallm_with(&cfg, &s, rate_t, &opts)?
        }
        Strategy::LmmseOracle => unreachable!(),
    };
    let mut v = with_inputs(&stats, a, Some(workers))?;
    // converse at the measured power, for the finite-m dominance check
    let lb = mmse_lower_full(&ProblemParams::new(a.sigma2, stats.mean_power, 0.0)?)?.value;
    v["lower_bound_at_mean_power"] = json!(lb);
    Ok(v)
}

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    2
                }
            };
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
