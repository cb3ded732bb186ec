//! Shared fixtures for the criterion benchmarks.

use laneflow_core::model::ModelParams;

/// The reference parameter set (a = 2.85, single-lane weights).
pub fn fig2_params() -> ModelParams {
    ModelParams {
        alpha: 2.85,
        p: 1.0,
        q: 0.0,
        lambda1: 0.2,
        lambda2: 0.0,
        v_max: 4.0,
        h_c: 7.0,
        l_v: 5.0,
        d: 10.0,
    }
}

/// The laterally coupled parameter set (a = 2.2, p = 0.8, q = 0.2).
pub fn fig4_params() -> ModelParams {
    ModelParams {
        alpha: 2.2,
        p: 0.8,
        q: 0.2,
        lambda1: 0.16,
        lambda2: 0.04,
        v_max: 4.0,
        h_c: 7.0,
        l_v: 5.0,
        d: 10.0,
    }
}
