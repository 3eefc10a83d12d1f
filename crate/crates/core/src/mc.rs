//! Seeded Monte Carlo: an LMMSE oracle for the joint estimator and
//! finite-blocklength simulators for the linear, scalar-quantizer and
//! random-codebook DPC strategies.
//!
//! Trials are split into fixed chunks of [`CHUNK`] trials. Chunk `i` draws
//! from a ChaCha8 stream seeded by `seed` with stream id `i`, and chunk sums
//! are merged in chunk order, so results are bit-identical for any worker
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::achievability::StrategyParams;
use crate::error::{Error, Result};
use crate::model::ProblemParams;

/// Trials per RNG stream.
pub const CHUNK: usize = 256;
/// Samples per RNG stream in the LMMSE oracle.
const ORACLE_CHUNK: usize = 1 << 14;
/// Largest codebook, in bits of index.
pub const MAX_CODEBOOK_BITS: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub seed: u64,
    /// Blocklength.
    pub m: usize,
    pub trials: usize,
    pub params: ProblemParams,
    /// Rayon threads; 0 uses the global default. Does not affect results.
    pub workers: usize,
}

impl TrialConfig {
    pub fn new(seed: u64, m: usize, trials: usize, params: ProblemParams) -> Self {
        TrialConfig {
            seed,
            m,
            trials,
            params,
            workers: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Config("blocklength m must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Empirical averages over trials, each with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: usize,
    pub m: usize,
    pub mean_power: f64,
    pub power_stderr: f64,
    pub mean_mmse: f64,
    pub mmse_stderr: f64,
    /// Fraction of trials whose decoded auxiliary word (or quantizer cell)
    /// differs from the transmitted one.
    pub decode_error_rate: f64,
    pub decode_error_stderr: f64,
    /// Fraction of trials with a wrong message.
    pub message_error_rate: f64,
    pub message_error_stderr: f64,
    /// Largest per-message average input power.
    pub max_bin_power: f64,
    /// Encoder rule label, e.g. the moment-surrogate substitution.
    pub encoder: String,
}

#[derive(Debug, Clone, Default)]
struct Acc {
    n: usize,
    power: f64,
    power_sq: f64,
    dist: f64,
    dist_sq: f64,
    t_err: usize,
    m_err: usize,
    bin_power: Vec<(f64, usize)>,
}

impl Acc {
    fn with_bins(bins: usize) -> Self {
        Acc {
            bin_power: vec![(0.0, 0); bins],
            ..Default::default()
        }
    }

    fn push(&mut self, power: f64, dist: f64, t_err: bool, m_err: bool, bin: usize) {
        self.n += 1;
        self.power += power;
        self.power_sq += power * power;
        self.dist += dist;
        self.dist_sq += dist * dist;
        self.t_err += t_err as usize;
        self.m_err += m_err as usize;
        let b = &mut self.bin_power[bin];
        b.0 += power;
        b.1 += 1;
    }

    fn merge(&mut self, other: &Acc) {
        self.n += other.n;
        self.power += other.power;
        self.power_sq += other.power_sq;
        self.dist += other.dist;
        self.dist_sq += other.dist_sq;
        self.t_err += other.t_err;
        self.m_err += other.m_err;
        for (a, b) in self.bin_power.iter_mut().zip(&other.bin_power) {
            a.0 += b.0;
            a.1 += b.1;
        }
    }

    fn finish(&self, m: usize, encoder: &str) -> TrialStats {
        let n = self.n as f64;
        let mean_se = |s: f64, sq: f64| {
            let mean = s / n;
            let var = if self.n > 1 {
                ((sq - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            (mean, (var / n).sqrt())
        };
        let rate_se = |k: usize| {
            let p = k as f64 / n;
            (p, (p * (1.0 - p) / n).sqrt())
        };
        let (mean_power, power_stderr) = mean_se(self.power, self.power_sq);
        let (mean_mmse, mmse_stderr) = mean_se(self.dist, self.dist_sq);
        let (decode_error_rate, decode_error_stderr) = rate_se(self.t_err);
        let (message_error_rate, message_error_stderr) = rate_se(self.m_err);
        let max_bin_power = self
            .bin_power
            .iter()
            .filter(|b| b.1 > 0)
            .map(|b| b.0 / b.1 as f64)
            .fold(0.0, f64::max);
        TrialStats {
            trials: self.n,
            m,
            mean_power,
            power_stderr,
            mean_mmse,
            mmse_stderr,
            decode_error_rate,
            decode_error_stderr,
            message_error_rate,
            message_error_stderr,
            max_bin_power,
            encoder: encoder.to_string(),
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

#[inline]
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))
}

/// Runs `trial(rng, acc)` for every trial, chunked and merged in order.
fn run_trials<F>(config: &TrialConfig, bins: usize, trial: F) -> Result<Acc>
where
    F: Fn(&mut ChaCha8Rng, &mut Acc) + Sync,
{
    config.validate()?;
    let chunks = config.trials.div_ceil(CHUNK);
    let parts: Vec<Acc> = pool(config.workers)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(config.seed, c);
                let mut acc = Acc::with_bins(bins);
                let n = CHUNK.min(config.trials - c * CHUNK);
                for _ in 0..n {
                    trial(&mut rng, &mut acc);
                }
                acc
            })
            .collect()
    });
    let mut total = Acc::with_bins(bins);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// Sample estimate of the best linear MSE of `X1` from `(Y, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub mmse: f64,
    pub stderr: f64,
    /// Same regression on `Y` alone.
    pub y_only_mmse: f64,
    pub y_only_stderr: f64,
    pub samples: usize,
}

#[inline]
fn draw_triple(rng: &mut ChaCha8Rng, s: &StrategyParams, sd_x0: f64, sd_dpc: f64) -> (f64, f64, f64) {
    let x0 = sd_x0 * normal(rng);
    let v_dpc = sd_dpc * normal(rng);
    let z = normal(rng);
    let xt = (1.0 - s.beta) * x0;
    let x1 = xt + v_dpc;
    (x1, x1 + z, v_dpc + s.alpha * xt)
}

/// Simulates `(X1, Y, T)` with an independent codeword, fits the least-squares
/// estimate of `X1` from `(Y, T)` and reports its residual mean square.
pub fn lmmse_oracle(strategy: &StrategyParams, samples: usize, seed: u64) -> Result<OracleEstimate> {
    if samples < 10_000 {
        return Err(Error::Config(format!("lmmse_oracle needs at least 1e4 samples, got {samples}")));
    }
    let sd_x0 = strategy.sigma2.sqrt();
    let sd_dpc = strategy.p_dpc.sqrt();
    let chunks = samples.div_ceil(ORACLE_CHUNK);
    let chunk_len = |c: usize| ORACLE_CHUNK.min(samples - c * ORACLE_CHUNK);

    // pass 1: second moments [yy, yt, tt, xy, xt]
    let moments: Vec<[f64; 5]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut m = [0.0; 5];
            for _ in 0..chunk_len(c) {
                let (x, y, t) = draw_triple(&mut rng, strategy, sd_x0, sd_dpc);
                m[0] += y * y;
                m[1] += y * t;
                m[2] += t * t;
                m[3] += x * y;
                m[4] += x * t;
            }
            m
        })
        .collect();
    let mut s = [0.0; 5];
    for m in &moments {
        for k in 0..5 {
            s[k] += m[k];
        }
    }
    let det = s[0] * s[2] - s[1] * s[1];
    let (wy, wt) = if det > 1e-12 * s[0] * s[2] {
        ((s[3] * s[2] - s[4] * s[1]) / det, (s[4] * s[0] - s[3] * s[1]) / det)
    } else {
        (s[3] / s[0], 0.0)
    };
    let wy_only = s[3] / s[0];

    // pass 2: residuals on the same draws
    let resid: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let mut r = [0.0; 4];
            for _ in 0..chunk_len(c) {
                let (x, y, t) = draw_triple(&mut rng, strategy, sd_x0, sd_dpc);
                let e = x - wy * y - wt * t;
                let e1 = x - wy_only * y;
                r[0] += e * e;
                r[1] += e * e * e * e;
                r[2] += e1 * e1;
                r[3] += e1 * e1 * e1 * e1;
            }
            r
        })
        .collect();
    let mut r = [0.0; 4];
    for v in &resid {
        for k in 0..4 {
            r[k] += v[k];
        }
    }
    let n = samples as f64;
    let se = |sum: f64, sq: f64| {
        let mean = sum / n;
        (mean, (((sq / n) - mean * mean).max(0.0) / (n - 1.0)).sqrt())
    };
    let (mmse, stderr) = se(r[0], r[1]);
    let (y_only_mmse, y_only_stderr) = se(r[2], r[3]);
    Ok(OracleEstimate {
        mmse,
        stderr,
        y_only_mmse,
        y_only_stderr,
        samples,
    })
}

/// Linear strategy `X1 = (1 - gain) X0` with the scalar LMMSE decoder.
pub fn simulate_linear(config: &TrialConfig, gain: f64) -> Result<TrialStats> {
    if !gain.is_finite() {
        return Err(Error::InvalidParameter {
            name: "gain",
            value: gain,
            reason: "must be finite",
        });
    }
    let sd = config.params.sigma();
    let v = (1.0 - gain) * (1.0 - gain) * config.params.sigma2;
    let w = v / (v + 1.0);
    let m = config.m;
    let acc = run_trials(config, 1, |rng, acc| {
        let (mut pw, mut d) = (0.0, 0.0);
        for _ in 0..m {
            let x0 = sd * normal(rng);
            let x1 = (1.0 - gain) * x0;
            let y = x1 + normal(rng);
            pw += (gain * x0) * (gain * x0);
            let e = x1 - w * y;
            d += e * e;
        }
        acc.push(pw / m as f64, d / m as f64, false, false, 0);
    })?;
    Ok(acc.finish(m, "linear"))
}

/// Scalar quantizer: `X1` is `X0` rounded to a multiple of `step`, and the
/// decoder rounds `Y` the same way.
pub fn simulate_quantizer(config: &TrialConfig, step: f64) -> Result<TrialStats> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "quantizer step must be positive",
        });
    }
    let sd = config.params.sigma();
    let m = config.m;
    let acc = run_trials(config, 1, |rng, acc| {
        let (mut pw, mut d) = (0.0, 0.0);
        let mut wrong = false;
        for _ in 0..m {
            let x0 = sd * normal(rng);
            let x1 = step * (x0 / step).round();
            let y = x1 + normal(rng);
            let xh = step * (y / step).round();
            pw += (x1 - x0) * (x1 - x0);
            d += (x1 - xh) * (x1 - xh);
            wrong |= xh != x1;
        }
        acc.push(pw / m as f64, d / m as f64, wrong, false, 0);
    })?;
    Ok(acc.finish(m, "scalar_quantizer"))
}

/// Random codebook of auxiliary words, binned by index modulo the bin count.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub m: usize,
    /// Row-major `words x m`.
    pub entries: Vec<f64>,
    pub bins: usize,
}

impl Codebook {
    /// Draws `words` i.i.d. `N(0, var)` words of length `m`.
    pub fn sample<R: Rng>(rng: &mut R, words: usize, m: usize, var: f64, bins: usize) -> Self {
        let sd = var.sqrt();
        let entries = (0..words * m).map(|_| { let z: f64 = StandardNormal.sample(rng); sd * z }).collect::<Vec<f64>>();
        Codebook { m, entries, bins }
    }

    pub fn len(&self) -> usize {
        self.entries.len() / self.m
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn word(&self, i: usize) -> &[f64] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }

    pub fn bin_of(&self, i: usize) -> usize {
        i % self.bins
    }

    /// Indices of the words in `bin`.
    pub fn bin_members(&self, bin: usize) -> impl Iterator<Item = usize> + '_ {
        (bin..self.len()).step_by(self.bins)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcOptions {
    /// Trials sharing one codebook draw.
    pub trials_per_codebook: usize,
}

impl Default for DpcOptions {
    fn default() -> Self {
        DpcOptions { trials_per_codebook: 1 }
    }
}

/// Mutual information `I(T; Y)` in bits under the asymptotic second moments.
pub fn info_t_y(s: &StrategyParams) -> f64 {
    let a = s.sigma_tilde2;
    let p = s.p_dpc;
    let var_t = s.alpha * s.alpha * a + p;
    let var_y = a + p + 1.0;
    let cov = s.alpha * a + p;
    0.5 * (var_t * var_y / (var_t * var_y - cov * cov)).log2()
}

/// Mutual information `I(T; X~0)` in bits.
pub fn info_t_x(s: &StrategyParams) -> f64 {
    let var_t = s.alpha * s.alpha * s.sigma_tilde2 + s.p_dpc;
    0.5 * (var_t / s.p_dpc).log2()
}

/// Random-codebook DPC at blocklength `m` with auxiliary rate `rate_t`.
///
/// The encoder picks, in the message's bin, the word whose empirical power
/// and correlation with the scaled host are closest to their ensemble values
/// (lowest index on ties). The decoder picks the word closest to `Y / kappa`
/// in the least-squares sense, which is maximum likelihood for the induced
/// Gaussian channel, and forms the asymptotic LMMSE estimate from `(Y, T^)`.
pub fn simulate_dpc_smallm(config: &TrialConfig, strategy: &StrategyParams, rate_t: f64) -> Result<TrialStats> {
    simulate_dpc_smallm_with(config, strategy, rate_t, &DpcOptions::default())
}

pub fn simulate_dpc_smallm_with(
    config: &TrialConfig,
    strategy: &StrategyParams,
    rate_t: f64,
    options: &DpcOptions,
) -> Result<TrialStats> {
    config.validate()?;
    let m = config.m;
    let rate = config.params.rate;
    if !(rate_t >= rate) {
        return Err(Error::Config(format!("rate_t {rate_t} is below the message rate {rate}")));
    }
    let bits = m as f64 * rate_t;
    if bits > MAX_CODEBOOK_BITS {
        return Err(Error::Resource(format!(
            "codebook of 2^{bits} words exceeds the 2^{MAX_CODEBOOK_BITS} limit"
        )));
    }
    if strategy.p_dpc <= 0.0 {
        return Err(Error::DegenerateStrategy("DPC simulation needs a positive codeword power".into()));
    }
    if options.trials_per_codebook == 0 {
        return Err(Error::Config("trials_per_codebook must be at least 1".into()));
    }
    let words = bits.exp2().round().max(1.0) as usize;
    let bins = ((m as f64 * rate).exp2().round() as usize).clamp(1, words);

    let s = *strategy;
    let (a, p, al, beta) = (s.sigma_tilde2, s.p_dpc, s.alpha, s.beta);
    let var_t = p + al * al * a;
    let cov_tx = al * a;
    let kappa = (al * a + p) / var_t;
    // asymptotic LMMSE weights of X1 on (Y, T)
    let (cy, ct) = (a + p, al * a + p);
    let (vy, vt, cyt) = (a + p + 1.0, var_t, al * a + p);
    let det = vy * vt - cyt * cyt;
    let wy = (cy * vt - ct * cyt) / det;
    let wt = (ct * vy - cy * cyt) / det;
    let sd_x0 = config.params.sigma();
    let per_cb = options.trials_per_codebook;

    let chunks = config.trials.div_ceil(CHUNK);
    // codebooks are redrawn on a separate stream family so sharing them across
    // trials does not shift the channel draws
    let cb_seed = config.seed ^ 0x9E37_79B9_7F4A_7C15;
    let parts: Vec<Acc> = pool(config.workers)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(config.seed, c);
                let mut acc = Acc::with_bins(bins);
                let first = c * CHUNK;
                let n = CHUNK.min(config.trials - first);
                let mut book: Option<(usize, Codebook)> = None;
                let mut x0 = vec![0.0; m];
                let mut xt = vec![0.0; m];
                let mut y = vec![0.0; m];
                for k in first..first + n {
                    let cb_index = k / per_cb;
                    if book.as_ref().map(|b| b.0) != Some(cb_index) {
                        let mut cb_rng = chunk_rng(cb_seed, cb_index);
                        book = Some((cb_index, Codebook::sample(&mut cb_rng, words, m, var_t, bins)));
                    }
                    let cb = &book.as_ref().expect("codebook drawn").1;

                    let msg = if bins > 1 { rng.random_range(0..bins) } else { 0 };
                    for i in 0..m {
                        x0[i] = sd_x0 * normal(&mut rng);
                        xt[i] = (1.0 - beta) * x0[i];
                    }

                    // moment-surrogate encoder
                    let mut chosen = usize::MAX;
                    let mut best = f64::INFINITY;
                    for idx in cb.bin_members(msg) {
                        let w = cb.word(idx);
                        let (mut tt, mut tx) = (0.0, 0.0);
                        for i in 0..m {
                            tt += w[i] * w[i];
                            tx += w[i] * xt[i];
                        }
                        let d1 = tt / m as f64 - var_t;
                        let d2 = tx / m as f64 - cov_tx;
                        let dist = d1 * d1 + d2 * d2;
                        if dist < best {
                            best = dist;
                            chosen = idx;
                        }
                    }
                    let t = cb.word(chosen);

                    let mut power = 0.0;
                    for i in 0..m {
                        let v_dpc = t[i] - al * xt[i];
                        let v = -beta * x0[i] + v_dpc;
                        power += v * v;
                        y[i] = xt[i] + v_dpc + normal(&mut rng);
                    }

                    // maximum-likelihood decoder
                    let mut decoded = 0;
                    let mut best = f64::INFINITY;
                    for idx in 0..cb.len() {
                        let w = cb.word(idx);
                        let mut dist = 0.0;
                        for i in 0..m {
                            let e = y[i] - kappa * w[i];
                            dist += e * e;
                        }
                        if dist < best {
                            best = dist;
                            decoded = idx;
                        }
                    }
                    let th = cb.word(decoded);

                    let mut d = 0.0;
                    for i in 0..m {
                        let x1 = xt[i] + t[i] - al * xt[i];
                        let e = x1 - wy * y[i] - wt * th[i];
                        d += e * e;
                    }
                    acc.push(
                        power / m as f64,
                        d / m as f64,
                        decoded != chosen,
                        cb.bin_of(decoded) != msg,
                        msg,
                    );
                }
                acc
            })
            .collect()
    });
    let mut total = Acc::with_bins(bins);
    for part in &parts {
        total.merge(part);
    }
    Ok(total.finish(m, "moment_surrogate_min_distance"))
}
