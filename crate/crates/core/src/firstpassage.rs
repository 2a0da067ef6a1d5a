//! Crossing primitives shared by the path engines.

use crate::error::{invalid, Result};

/// Time for a path at `value0` moving with `slope` to reach `level`.
pub fn linear_crossing(value0: f64, slope: f64, level: f64) -> Result<Option<f64>> {
    if !(value0 < level) {
        return Err(invalid(format!("linear_crossing needs value0 < level, got {value0} >= {level}")));
    }
    Ok((slope > 0.0).then(|| (level - value0) / slope))
}

/// Gaps from a barrier at the two ends of a Brownian segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeQuery {
    pub sigma: f64,
    pub dt: f64,
    /// level minus value at segment start
    pub gap_start: f64,
    /// level minus value at segment end
    pub gap_end: f64,
}

impl BridgeQuery {
    pub fn new(sigma: f64, dt: f64, gap_start: f64, gap_end: f64) -> Result<Self> {
        if !(sigma > 0.0 && dt > 0.0) {
            return Err(invalid("bridge query needs sigma > 0 and dt > 0"));
        }
        if !(gap_start >= 0.0 && gap_end >= 0.0) {
            return Err(invalid("bridge gaps must be non-negative"));
        }
        Ok(Self {
            sigma,
            dt,
            gap_start,
            gap_end,
        })
    }
}

/// Probability that a Brownian bridge between the segment endpoints touches
/// the barrier: `exp(-2 g0 g1 / (sigma^2 dt))`.
pub fn bridge_crossing_prob(q: &BridgeQuery) -> f64 {
    let p = (-2.0 * q.gap_start * q.gap_end / (q.sigma * q.sigma * q.dt)).exp();
    p.clamp(0.0, 1.0)
}
