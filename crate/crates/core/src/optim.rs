//! Deterministic 1-D optimization on compact intervals.
//!
//! Every search samples a uniform grid (endpoints included), keeps the best
//! sample with lowest-index tie-breaking, then runs a golden-section search on
//! the two grid cells adjacent to it. The returned point is the best point
//! evaluated anywhere, so refinement can never be worse than the grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_GOLDEN_ITERS: usize = 200;

/// Grid density and refinement tolerance for a scalar search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub grid_points: usize,
    /// Width of the final golden-section bracket.
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_points: 2001,
            tol: 1e-10,
        }
    }
}

impl SearchConfig {
    pub fn new(grid_points: usize, tol: f64) -> Self {
        SearchConfig { grid_points, tol }
    }

    fn validate(&self, lo: f64, hi: f64) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::Config(format!(
                "grid_points must be at least 3, got {}",
                self.grid_points
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("invalid search interval [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// Optimizer output: the point, its objective value, and the call count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarOptResult {
    pub arg: f64,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
enum Sense {
    Max,
    Min,
}

impl Sense {
    #[inline]
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Max => a > b,
            Sense::Min => a < b,
        }
    }
}

struct Tracker<F> {
    objective: F,
    sense: Sense,
    best: Option<(f64, f64)>,
    evaluations: usize,
}

impl<F: FnMut(f64) -> f64> Tracker<F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        let v = (self.objective)(x);
        self.evaluations += 1;
        if v.is_nan() {
            return Err(Error::NumericDomain {
                context: "objective returned NaN",
                arg: x,
            });
        }
        match self.best {
            Some((_, bv)) if !self.sense.better(v, bv) => {}
            _ => self.best = Some((x, v)),
        }
        Ok(v)
    }
}

#[inline]
fn grid_point(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
    }
}

fn optimize<F: FnMut(f64) -> f64>(
    objective: F,
    lo: f64,
    hi: f64,
    config: &SearchConfig,
    sense: Sense,
) -> Result<ScalarOptResult> {
    config.validate(lo, hi)?;
    let mut t = Tracker {
        objective,
        sense,
        best: None,
        evaluations: 0,
    };
    if lo == hi {
        let v = t.eval(lo)?;
        return Ok(ScalarOptResult {
            arg: lo,
            value: v,
            evaluations: t.evaluations,
        });
    }

    let n = config.grid_points;
    let mut best_idx = 0;
    for i in 0..n {
        let before = t.best.map(|b| b.1);
        let v = t.eval(grid_point(lo, hi, i, n))?;
        if before.map_or(true, |b| sense.better(v, b)) {
            best_idx = i;
        }
    }

    let a0 = grid_point(lo, hi, best_idx.saturating_sub(1), n);
    let b0 = grid_point(lo, hi, (best_idx + 1).min(n - 1), n);
    golden(&mut t, a0, b0, config.tol)?;

    let (arg, value) = t.best.expect("at least one evaluation");
    Ok(ScalarOptResult {
        arg,
        value,
        evaluations: t.evaluations,
    })
}

fn golden<F: FnMut(f64) -> f64>(t: &mut Tracker<F>, mut a: f64, mut b: f64, tol: f64) -> Result<()> {
    let sense = t.sense;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = t.eval(c)?;
    let mut fd = t.eval(d)?;
    let mut iters = 0;
    while (b - a) > tol && iters < MAX_GOLDEN_ITERS {
        // keep the sub-bracket holding the better interior point
        if sense.better(fc, fd) || fc == fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = t.eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = t.eval(d)?;
        }
        iters += 1;
    }
    Ok(())
}

/// Maximizes `objective` on `[lo, hi]` by grid search plus golden-section
/// refinement of the best grid cell.
pub fn maximize_on_interval<F: FnMut(f64) -> f64>(
    objective: F,
    lo: f64,
    hi: f64,
    config: &SearchConfig,
) -> Result<ScalarOptResult> {
    optimize(objective, lo, hi, config, Sense::Max)
}

/// Minimizing counterpart of [`maximize_on_interval`].
pub fn minimize_on_interval<F: FnMut(f64) -> f64>(
    objective: F,
    lo: f64,
    hi: f64,
    config: &SearchConfig,
) -> Result<ScalarOptResult> {
    optimize(objective, lo, hi, config, Sense::Min)
}

/// Outer minimization of an inner supremum.
///
/// `inner(y)` returns the supremum at outer point `y` together with its
/// witness; the outer search uses the same grid + golden discipline and
/// returns the outer argument with the inner result evaluated there.
pub fn inf_sup<F>(
    outer_lo: f64,
    outer_hi: f64,
    mut inner: F,
    config: &SearchConfig,
) -> Result<(f64, ScalarOptResult)>
where
    F: FnMut(f64) -> Result<ScalarOptResult>,
{
    let mut failure: Option<Error> = None;
    let mut best: Option<(f64, ScalarOptResult)> = None;
    let outer = minimize_on_interval(
        |y| {
            if failure.is_some() {
                return f64::INFINITY;
            }
            match inner(y) {
                Ok(r) => {
                    if best.map_or(true, |(_, b)| r.value < b.value) {
                        best = Some((y, r));
                    }
                    r.value
                }
                Err(e) => {
                    failure = Some(e);
                    f64::INFINITY
                }
            }
        },
        outer_lo,
        outer_hi,
        config,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outer = outer?;
    let (arg, inner_result) = best.expect("inner evaluated at least once");
    debug_assert_eq!(arg, outer.arg);
    Ok((arg, inner_result))
}
