//! Optimal-velocity functions, their gated lateral counterparts, analytic
//! derivatives, and the two-lane acceleration law.
//!
//! Everything here is a pure function of its inputs and safe to call from any
//! number of threads.

use crate::error::{Error, Result};

/// Physical and behavioral constants of the two-lane car-following law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Driver sensitivity α (1/s): relaxation rate toward the optimal velocity.
    pub alpha: f64,
    /// Weight of the own-lane optimal-velocity term.
    pub p: f64,
    /// Weight of the adjacent-lane optimal-velocity term.
    pub q: f64,
    /// Own-lane velocity-difference gain λ₁ (1/s).
    pub lambda1: f64,
    /// Adjacent-lane velocity-difference gain λ₂ (1/s).
    pub lambda2: f64,
    /// Maximum velocity (m/s).
    pub v_max: f64,
    /// Safety headway h_c (m); the inflection point of the OV curve.
    pub h_c: f64,
    /// Vehicle length (m); lower bound of the lateral gate.
    pub l_v: f64,
    /// Upper bound of the lateral gate (m).
    pub d: f64,
}

impl ModelParams {
    /// Checks the hard invariants and returns soft warnings.
    ///
    /// Violations (non-positive α, v_max, h_c, negative weights or gains, a
    /// gate with `l_v >= d` or `l_v <= 0`) are errors. `p + q != 1` is legal
    /// but unusual, so it comes back as a warning rather than an error.
    pub fn validate(&self) -> Result<Vec<String>> {
        let err = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.alpha > 0.0) {
            return err(format!("alpha must be > 0 (got {})", self.alpha));
        }
        if !(self.v_max > 0.0) {
            return err(format!("v_max must be > 0 (got {})", self.v_max));
        }
        if !(self.h_c > 0.0) {
            return err(format!("h_c must be > 0 (got {})", self.h_c));
        }
        if !(self.p >= 0.0) || !(self.q >= 0.0) {
            return err(format!("p and q must be >= 0 (got p={}, q={})", self.p, self.q));
        }
        if !(self.lambda1 >= 0.0) || !(self.lambda2 >= 0.0) {
            return err(format!(
                "lambda1 and lambda2 must be >= 0 (got {}, {})",
                self.lambda1, self.lambda2
            ));
        }
        if !(self.l_v > 0.0 && self.l_v < self.d) {
            return err(format!(
                "lateral gate requires 0 < l_v < d (got l_v={}, d={})",
                self.l_v, self.d
            ));
        }
        let mut warnings = Vec::new();
        if (self.p + self.q - 1.0).abs() > 1e-12 {
            warnings.push(format!("p + q = {} differs from 1", self.p + self.q));
        }
        Ok(warnings)
    }

    /// The lateral gate of the adjacent-lane terms: open iff `l_v <= h_l < d`.
    pub fn lateral_gate_open(&self, h_l: f64) -> bool {
        self.l_v <= h_l && h_l < self.d
    }
}

/// What one vehicle sees: its own state plus same-lane and adjacent-lane leaders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborView {
    /// Own velocity (m/s).
    pub v_self: f64,
    /// Own-lane headway (m). Must be positive for a physically valid view;
    /// the simulator reports a violation instead of clamping.
    pub headway: f64,
    /// Own-lane leader velocity (m/s).
    pub v_lead: f64,
    /// Distance to the adjacent-lane leader (m).
    pub lateral_headway: f64,
    /// Adjacent-lane leader velocity (m/s).
    pub v_lateral_lead: f64,
}

/// Optimal velocity: `(v_max/2) [tanh(h - h_c) + tanh(h_c)]`.
///
/// Defined for all real `h`; strictly increasing, zero at `h = 0` and
/// saturating at `v_max` for large headways.
pub fn optimal_velocity(h: f64, params: &ModelParams) -> f64 {
    (params.v_max / 2.0) * ((h - params.h_c).tanh() + params.h_c.tanh())
}

/// Adjacent-lane optimal velocity: the same OV curve when the lateral gate is
/// open, exactly zero otherwise.
pub fn lateral_optimal_velocity(h_l: f64, params: &ModelParams) -> f64 {
    if params.lateral_gate_open(h_l) {
        optimal_velocity(h_l, params)
    } else {
        0.0
    }
}

/// Velocity difference to the adjacent-lane leader, gated like the lateral OV
/// term: `v_lateral_lead - v_self` when open, exactly zero otherwise.
pub fn lateral_velocity_difference(view: &NeighborView, params: &ModelParams) -> f64 {
    if params.lateral_gate_open(view.lateral_headway) {
        view.v_lateral_lead - view.v_self
    } else {
        0.0
    }
}

/// The acceleration law:
///
/// `α [p V(Δx) + q V̄(Δx_l) - v] + λ₁ (v_lead - v) + λ₂ Δv_l`
///
/// with the lateral terms gated on the lateral headway. With `q = 0` and
/// `λ₂ = 0` this reduces bit-exactly to the single-lane full-velocity-difference
/// law.
pub fn acceleration(view: &NeighborView, params: &ModelParams) -> f64 {
    let ov = params.p * optimal_velocity(view.headway, params)
        + params.q * lateral_optimal_velocity(view.lateral_headway, params);
    params.alpha * (ov - view.v_self)
        + params.lambda1 * (view.v_lead - view.v_self)
        + params.lambda2 * lateral_velocity_difference(view, params)
}

/// Analytic 1st/2nd/3rd derivative of the OV function with respect to headway.
///
/// With `x = h - h_c` and `s = sech x`, `t = tanh x`:
/// V' = (v_max/2) s², V'' = -v_max s² t, V''' = v_max s² (2t² - s²).
pub fn ov_derivative(h: f64, order: u32, params: &ModelParams) -> Result<f64> {
    match order {
        1 => Ok(ov_slope(h, params)),
        2 => {
            let x = h - params.h_c;
            let s2 = sech_sq(x);
            Ok(-params.v_max * s2 * x.tanh())
        }
        3 => Ok(ov_third(h, params)),
        other => Err(Error::InvalidOrder(other)),
    }
}

pub(crate) fn ov_slope(h: f64, params: &ModelParams) -> f64 {
    (params.v_max / 2.0) * sech_sq(h - params.h_c)
}

pub(crate) fn ov_third(h: f64, params: &ModelParams) -> f64 {
    let x = h - params.h_c;
    let s2 = sech_sq(x);
    let t = x.tanh();
    params.v_max * s2 * (2.0 * t * t - s2)
}

fn sech_sq(x: f64) -> f64 {
    let c = x.cosh();
    1.0 / (c * c)
}
