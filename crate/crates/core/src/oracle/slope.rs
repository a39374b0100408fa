//! Steepest slope of a concave, monotone, piecewise-linear value function.

use super::OracleError;

/// Which end of the interval carries the steepest slope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Steep {
    /// Non-decreasing function; steepest right-derivative at the left end.
    Left,
    /// Non-increasing function; steepest left-derivative at the right end.
    Right,
}

const STEPS: [f64; 4] = [1e-4, 1e-6, 1e-8, 1e-10];
const AGREE: f64 = 1e-3;

/// Largest difference quotient `|v(b) − v(a)| / (b − a)` of `value` on
/// `[lo, hi]`, taken over a uniform grid and one-sided quotients at the steep
/// end with shrinking steps until two successive steps agree.
///
/// `value` returns `None` where the underlying program is infeasible; the
/// steep endpoint is nudged inwards if the boundary itself is numerically
/// infeasible.
pub(crate) fn steepest_slope(
    value: impl Fn(f64) -> Result<Option<f64>, OracleError>,
    lo: f64,
    hi: f64,
    steep: Steep,
    grid: usize,
) -> Result<f64, OracleError> {
    let width = hi - lo;
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also catches NaN
    if !(width > 0.0) {
        return Ok(0.0);
    }
    let dir = if steep == Steep::Left { 1.0 } else { -1.0 };
    let quotient = |a: f64, va: f64, b: f64, vb: f64| dir * (vb - va) / (b - a);

    let mut best: f64 = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=grid.max(1) {
        let s = lo + width * i as f64 / grid.max(1) as f64;
        if let Some(v) = value(s)? {
            if let Some((ps, pv)) = prev {
                best = best.max(quotient(ps, pv, s, v));
            }
            prev = Some((s, v));
        }
    }

    let (mut end, mut end_value) = (if steep == Steep::Left { lo } else { hi }, None);
    for attempt in 0..4 {
        if let Some(v) = value(end)? {
            end_value = Some(v);
            break;
        }
        end += dir * 1e-9 * (1.0 + end.abs()) * 10f64.powi(attempt);
    }
    let Some(end_value) = end_value else {
        return Err(OracleError::Contract(format!("value function infeasible near s = {end}")));
    };

    let mut last: Option<f64> = None;
    for &h in &STEPS {
        let h = h.min(width / 4.0);
        let inner = end + dir * h;
        let Some(v) = value(inner)? else { continue };
        let q = quotient(end, end_value, inner, v);
        best = best.max(q);
        if let Some(p) = last {
            if (q - p).abs() <= AGREE * q.abs().max(p.abs()).max(1e-12) {
                break;
            }
        }
        last = Some(q);
    }
    Ok(best.max(0.0))
}
