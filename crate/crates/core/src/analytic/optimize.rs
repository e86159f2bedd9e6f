//! Numerical search for the optimal constant retransmission probability.

use super::{check_dims, throughput_constant};
use crate::error::{Error, Result};

/// Default search resolution on `p`.
pub const DEFAULT_RESOLUTION: f64 = 1e-3;

/// Step of the dense verification grid over `(0, 1]`.
const VERIFY_STEP: f64 = 1e-3;

/// Result of [`optimize_constant_p`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantOptimum {
    pub p: f64,
    pub throughput: f64,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`. Returns `(x_max, f_max)`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;

    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximises `R(D, N, p)` over `p in (0, 1]`.
///
/// Golden-section search runs over the whole interval first and stops once the
/// bracket on the load `N p` is narrower than `resolution`, so the optimum
/// stays resolved when `p* ~ 1/N` is far below `resolution`. `R` is not known
/// to be unimodal in `p`, so a grid pass at step `1e-3` follows; if any grid
/// point beats the golden result, the search is repeated around that point.
/// The endpoint `p = 1` is always evaluated. For `D = 1` the optimum `1/N` is
/// known exactly and returned directly.
pub fn optimize_constant_p(delay: u32, stations: u32, resolution: f64) -> Result<ConstantOptimum> {
    check_dims(delay, stations)?;
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(Error::InvalidParams(format!("resolution must be in (0, 1), got {resolution}")));
    }
    if delay == 1 {
        let p = 1.0 / f64::from(stations);
        let throughput = throughput_constant(1, stations, p)?.throughput;
        return Ok(ConstantOptimum { p, throughput });
    }

    let eval = |p: f64| {
        throughput_constant(delay, stations, p.clamp(f64::MIN_POSITIVE, 1.0)).map(|r| r.throughput).unwrap_or(0.0)
    };

    let tol = resolution / f64::from(stations);
    let (mut p, mut best) = golden_section_max(eval, 0.0, 1.0, tol);
    let endpoint = eval(1.0);
    if endpoint >= best {
        p = 1.0;
        best = endpoint;
    }

    let steps = (1.0 / VERIFY_STEP).round() as u32;
    let (grid_p, grid_best) = (1..=steps)
        .map(|i| f64::from(i) / f64::from(steps))
        .map(|q| (q, eval(q)))
        .fold((0.0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });

    if grid_best > best {
        let lo = (grid_p - VERIFY_STEP).max(0.0);
        let hi = (grid_p + VERIFY_STEP).min(1.0);
        let (local_p, local_best) = golden_section_max(eval, lo, hi, tol);
        if local_best >= grid_best {
            p = local_p;
            best = local_best;
        } else {
            p = grid_p;
            best = grid_best;
        }
    }

    Ok(ConstantOptimum { p, throughput: best })
}
