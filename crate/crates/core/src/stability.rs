//! Linear stability of the uniform flow: long-wave expansion coefficients,
//! the neutral sensitivity surface, and operating-point classification.
//!
//! A mode `y_n ∝ exp(ikn + zt)` expanded to second order in `ik` gives
//! `z = z₁ ik + z₂ (ik)² + …`; the flow is stable when `z₂ > 0`, which is
//! equivalent to `a > a_c` with `a_c = 2(pV' + qV̄') - 2(λ₁ + λ₂)`.

use crate::error::{Error, Result};
use crate::model::{self, ModelParams};

/// A uniform-flow operating point.
///
/// `gate_open` selects how the adjacent-lane slope `V̄'` enters the theory:
/// equal to `V'` when the lateral gate is open at this headway, zero when it
/// is closed. Both readings are legitimate for gates whose state depends on
/// geometry the theory does not resolve, so the flag is explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Uniform headway (m).
    pub h: f64,
    /// Sensitivity a = α (1/s).
    pub a: f64,
    /// Whether the lateral gate is open at this operating point.
    pub gate_open: bool,
}

/// Relative tolerance for calling a point neutral.
pub const NEUTRAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Stable,
    Neutral,
    Unstable,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Stable => write!(f, "stable"),
            Classification::Neutral => write!(f, "neutral"),
            Classification::Unstable => write!(f, "unstable"),
        }
    }
}

/// Everything the linear theory says about one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// First-order long-wave coefficient (m/s).
    pub z1: f64,
    /// Second-order long-wave coefficient (m²/s); positive means stable.
    pub z2: f64,
    /// Neutral sensitivity (1/s).
    pub a_c: f64,
    pub classification: Classification,
}

/// The recurring combination `p V'(h) + q V̄'(h)`, with `V̄'` gated.
pub fn effective_ov_slope(point: &OperatingPoint, params: &ModelParams) -> f64 {
    let v1 = model::ov_slope(point.h, params);
    let vbar1 = if point.gate_open { v1 } else { 0.0 };
    params.p * v1 + params.q * vbar1
}

/// Long-wave expansion coefficients `(z₁, z₂)` of the growth rate.
pub fn long_wave_coefficients(point: &OperatingPoint, params: &ModelParams) -> (f64, f64) {
    let b = effective_ov_slope(point, params);
    let lambda = params.lambda1 + params.lambda2;
    let z1 = b;
    let z2 = (0.5 + lambda / point.a) * b - b * b / point.a;
    (z1, z2)
}

/// Neutral sensitivity `a_c = 2(pV' + qV̄') - 2(λ₁ + λ₂)`.
///
/// May come out non-positive, in which case every `a > 0` is stable at this
/// headway.
pub fn neutral_sensitivity(point: &OperatingPoint, params: &ModelParams) -> f64 {
    let b = effective_ov_slope(point, params);
    2.0 * b - 2.0 * (params.lambda1 + params.lambda2)
}

/// Stable for `a > a_c`, unstable for `a < a_c`, neutral within
/// [`NEUTRAL_TOLERANCE`] relative to `max(1, |a_c|)`.
pub fn classify(point: &OperatingPoint, params: &ModelParams) -> Classification {
    let a_c = neutral_sensitivity(point, params);
    if (point.a - a_c).abs() <= NEUTRAL_TOLERANCE * a_c.abs().max(1.0) {
        Classification::Neutral
    } else if point.a > a_c {
        Classification::Stable
    } else {
        Classification::Unstable
    }
}

/// Full linear-theory report for one operating point.
pub fn report(point: &OperatingPoint, params: &ModelParams) -> StabilityReport {
    let (z1, z2) = long_wave_coefficients(point, params);
    StabilityReport {
        z1,
        z2,
        a_c: neutral_sensitivity(point, params),
        classification: classify(point, params),
    }
}

/// The neutral curve `a_c(h)` sampled on a strictly increasing headway grid.
pub fn stability_surface(
    params: &ModelParams,
    h_grid: &[f64],
    gate_open: bool,
) -> Result<Vec<(f64, f64)>> {
    if h_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if h_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridNotIncreasing);
    }
    Ok(h_grid
        .iter()
        .map(|&h| {
            let point = OperatingPoint { h, a: 1.0, gate_open };
            (h, neutral_sensitivity(&point, params))
        })
        .collect())
}
