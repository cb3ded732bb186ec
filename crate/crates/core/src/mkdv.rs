//! Nonlinear analysis near the critical point: reduction coefficients of the
//! modified KdV equation, the kink-antikink amplitude, the coexisting curve,
//! and a finite-difference residual check of the analytic kink solution.

use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::stability::{self, OperatingPoint};

/// Guard below which the amplitude denominator `2 m₂ m₄ - 3 m₁ m₅` is treated
/// as degenerate.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

/// Which sensitivity the reduction coefficients are evaluated at.
///
/// The expansion substitutes `a_c/a - 1 = ε²`, after which the residual `a`
/// inside m₁–m₅ may be read at the critical sensitivity (corrections are
/// O(ε²); the conventional choice) or at the operating sensitivity itself,
/// which is useful for sensitivity studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityEval {
    AtCritical,
    AtOperating,
}

/// Reduction coefficients and derived kink quantities for one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MkdvCoefficients {
    /// Propagation constant `b = p V' + q V̄'` (m/s).
    pub b: f64,
    /// Smallness parameter `ε = sqrt(a_c/a - 1)`; NaN when `a >= a_c`.
    pub epsilon: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
    /// Soliton amplitude parameter `B = 5 m₂ m₃ / (2 m₂ m₄ - 3 m₁ m₅)`.
    pub amplitude_b: f64,
    /// Headway kink amplitude `A = ε sqrt(5 m₁ m₃ / (2 m₂ m₄ - 3 m₁ m₅))` (m).
    pub kink_amplitude: f64,
    /// True when `a < a_c`, the denominator is non-degenerate and `B > 0`.
    pub valid: bool,
}

/// Evaluates m₁–m₅, B and the kink amplitude at the critical headway, with the
/// in-coefficient sensitivity taken at `a_c` (see [`SensitivityEval`]).
///
/// The reduction is anchored where the OV curvature vanishes, so `point.h`
/// must equal the safety headway `h_c`.
pub fn mkdv_coefficients(params: &ModelParams, point: &OperatingPoint) -> Result<MkdvCoefficients> {
    mkdv_coefficients_with(params, point, SensitivityEval::AtCritical)
}

/// [`mkdv_coefficients`] with an explicit choice of in-coefficient sensitivity.
pub fn mkdv_coefficients_with(
    params: &ModelParams,
    point: &OperatingPoint,
    eval: SensitivityEval,
) -> Result<MkdvCoefficients> {
    if (point.h - params.h_c).abs() > 1e-9 * params.h_c.abs().max(1.0) {
        return Err(Error::InvalidParams(format!(
            "mkdv reduction is anchored at the critical headway h_c = {} (got h = {})",
            params.h_c, point.h
        )));
    }
    if !(point.a > 0.0) {
        return Err(Error::InvalidParams(format!(
            "sensitivity must be positive (got {})",
            point.a
        )));
    }

    let v1 = model::ov_slope(params.h_c, params);
    let v3 = model::ov_third(params.h_c, params);
    let (vbar1, vbar3) = if point.gate_open { (v1, v3) } else { (0.0, 0.0) };
    let b = params.p * v1 + params.q * vbar1;
    let g3 = params.p * v3 + params.q * vbar3;
    let lambda = params.lambda1 + params.lambda2;
    let a_c = stability::neutral_sensitivity(point, params);

    let a_eval = match eval {
        SensitivityEval::AtCritical => a_c,
        SensitivityEval::AtOperating => point.a,
    };
    if !(a_eval > 0.0) {
        // a_c <= 0 means the flow is stable at every sensitivity; there is no
        // kink regime and the critical-sensitivity evaluation is undefined.
        return Ok(MkdvCoefficients {
            b,
            epsilon: f64::NAN,
            m1: f64::NAN,
            m2: f64::NAN,
            m3: f64::NAN,
            m4: f64::NAN,
            m5: f64::NAN,
            amplitude_b: f64::NAN,
            kink_amplitude: f64::NAN,
            valid: false,
        });
    }

    let m1 = (a_eval + 3.0 * lambda) * b / (6.0 * a_eval);
    let m2 = -g3 / 6.0;
    let m3 = b / 2.0;
    let m4 = (4.0 * (2.0 * b - lambda) * (a_eval + 3.0 * lambda) / (24.0 * a_eval * a_eval)) * b
        - (a_eval + 4.0 * lambda) / (24.0 * a_eval) * b;
    let m5 = (2.0 * (2.0 * b - lambda) - a_eval) / (12.0 * a_eval) * g3;

    let den = 2.0 * m2 * m4 - 3.0 * m1 * m5;
    let degenerate = den.abs() < DENOMINATOR_GUARD;
    let amplitude_b = if degenerate { f64::NAN } else { 5.0 * m2 * m3 / den };

    let in_kink_regime = point.a < a_c;
    let eps_sq = a_c / point.a - 1.0;
    let epsilon = if in_kink_regime { eps_sq.sqrt() } else { f64::NAN };
    let kink_amplitude = if in_kink_regime && !degenerate {
        (eps_sq * 5.0 * m1 * m3 / den).sqrt()
    } else {
        f64::NAN
    };

    let valid = in_kink_regime && !degenerate && amplitude_b > 0.0 && kink_amplitude > 0.0;
    Ok(MkdvCoefficients {
        b,
        epsilon,
        m1,
        m2,
        m3,
        m4,
        m5,
        amplitude_b,
        kink_amplitude,
        valid,
    })
}

impl MkdvCoefficients {
    /// Why this coefficient set has no kink solution, if it doesn't.
    pub fn invalid_reason(&self) -> Option<String> {
        if self.valid {
            None
        } else if self.epsilon.is_nan() {
            Some("no kink regime: a >= a_c (epsilon is not real)".into())
        } else if self.amplitude_b.is_nan() {
            Some("degenerate denominator 2 m2 m4 - 3 m1 m5".into())
        } else {
            Some(format!("non-positive amplitude B = {}", self.amplitude_b))
        }
    }
}

/// The soliton amplitude `B = 5 m₂ m₃ / (2 m₂ m₄ - 3 m₁ m₅)` of a valid
/// coefficient set.
pub fn soliton_amplitude(coeffs: &MkdvCoefficients) -> Result<f64> {
    if let Some(reason) = coeffs.invalid_reason() {
        return Err(Error::InvalidCoefficients(reason));
    }
    let den = 2.0 * coeffs.m2 * coeffs.m4 - 3.0 * coeffs.m1 * coeffs.m5;
    Ok(5.0 * coeffs.m2 * coeffs.m3 / den)
}

/// The kink-antikink headway profile
///
/// `Δx_n(t) = h_c + A tanh{ C [n + b t - ε² B t] }`
///
/// with `A = ε sqrt(5 m₁ m₃ / den)` and `C = sqrt(ε² 5 m₂ m₃ / (2 den))`.
/// The vehicle index is treated as a continuous coordinate.
pub fn kink_headway(
    n: f64,
    t: f64,
    params: &ModelParams,
    point: &OperatingPoint,
) -> Result<f64> {
    let coeffs = mkdv_coefficients(params, point)?;
    if !coeffs.valid {
        return Err(Error::InvalidCoefficients(describe_degeneracy(&coeffs, point, params)));
    }
    Ok(kink_headway_from(&coeffs, n, t, params))
}

pub(crate) fn kink_headway_from(
    coeffs: &MkdvCoefficients,
    n: f64,
    t: f64,
    params: &ModelParams,
) -> f64 {
    let eps_sq = coeffs.epsilon * coeffs.epsilon;
    let c = (eps_sq * coeffs.amplitude_b / 2.0).sqrt();
    let arg = c * (n + coeffs.b * t - eps_sq * coeffs.amplitude_b * t);
    params.h_c + coeffs.kink_amplitude * arg.tanh()
}

pub(crate) fn describe_degeneracy(
    coeffs: &MkdvCoefficients,
    point: &OperatingPoint,
    params: &ModelParams,
) -> String {
    let a_c = stability::neutral_sensitivity(point, params);
    if !(point.a < a_c) {
        format!("no kink regime: a = {} >= a_c = {}", point.a, a_c)
    } else if coeffs.amplitude_b.is_nan() {
        "degenerate denominator 2 m2 m4 - 3 m1 m5".into()
    } else {
        format!("non-positive amplitude B = {}", coeffs.amplitude_b)
    }
}

/// One row of the coexisting curve: the pair `h_c ± A(a)` when the kink exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoexistingPoint {
    pub a: f64,
    /// `(h_c - A, h_c + A)` for `a <= a_c` (A = 0 exactly at the neutral
    /// point, where the curve meets the stability surface); `None` above it.
    pub branches: Option<(f64, f64)>,
}

/// The coexisting curve over a grid of sensitivities.
pub fn coexisting_curve(
    params: &ModelParams,
    gate_open: bool,
    a_grid: &[f64],
) -> Result<Vec<CoexistingPoint>> {
    if a_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if a_grid.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidParams("all grid sensitivities must be positive".into()));
    }
    a_grid
        .iter()
        .map(|&a| {
            let point = OperatingPoint { h: params.h_c, a, gate_open };
            let a_c = stability::neutral_sensitivity(&point, params);
            if a > a_c {
                return Ok(CoexistingPoint { a, branches: None });
            }
            let coeffs = mkdv_coefficients(params, &point)?;
            let den = 2.0 * coeffs.m2 * coeffs.m4 - 3.0 * coeffs.m1 * coeffs.m5;
            if !den.is_finite() || den.abs() < DENOMINATOR_GUARD {
                return Ok(CoexistingPoint { a, branches: None });
            }
            let eps_sq = (a_c / a - 1.0).max(0.0);
            let amp = (eps_sq * 5.0 * coeffs.m1 * coeffs.m3 / den).sqrt();
            if !amp.is_finite() {
                return Ok(CoexistingPoint { a, branches: None });
            }
            Ok(CoexistingPoint {
                a,
                branches: Some((params.h_c - amp, params.h_c + amp)),
            })
        })
        .collect()
}

/// Grid for the finite-difference residual check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualGrid {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of spatial points (at least 5; the third derivative needs a
    /// five-point stencil).
    pub nx: usize,
    pub t_min: f64,
    pub t_max: f64,
    /// Number of time points (at least 3).
    pub nt: usize,
}

impl ResidualGrid {
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 5 || self.nt < 3 {
            return Err(Error::DegenerateGrid(format!(
                "need nx >= 5 and nt >= 3 (got nx = {}, nt = {})",
                self.nx, self.nt
            )));
        }
        if !(self.x_max > self.x_min) || !(self.t_max > self.t_min) {
            return Err(Error::DegenerateGrid("ranges must have positive extent".into()));
        }
        Ok(())
    }
}

/// Max |∂_T R - ∂_X³ R + ∂_X R³| over the grid interior for the analytic kink
/// `R(X,T) = sqrt(B) tanh(sqrt(B/2) (X - B T))`, all derivatives by central
/// differences (5-point stencil for the third derivative).
///
/// The analytic residual is zero, so the returned value is pure truncation
/// error and must shrink at second order under grid refinement.
pub fn standard_mkdv_residual(amplitude_b: f64, grid: &ResidualGrid) -> Result<f64> {
    if !(amplitude_b >= 0.0) || !amplitude_b.is_finite() {
        return Err(Error::InvalidParams(format!(
            "amplitude B must be finite and non-negative (got {})",
            amplitude_b
        )));
    }
    grid.validate()?;

    let dx = grid.dx();
    let dt = grid.dt();
    let s = (amplitude_b / 2.0).sqrt();
    let root_b = amplitude_b.sqrt();
    let kink = |x: f64, t: f64| root_b * (s * (x - amplitude_b * t)).tanh();

    let column = |j: usize| -> Vec<f64> {
        let t = grid.t_min + j as f64 * dt;
        (0..grid.nx)
            .map(|i| kink(grid.x_min + i as f64 * dx, t))
            .collect()
    };

    let mut prev = column(0);
    let mut cur = column(1);
    let mut next;
    let mut max_residual = 0.0_f64;
    for j in 1..grid.nt - 1 {
        next = column(j + 1);
        for i in 2..grid.nx - 2 {
            let d_t = (next[i] - prev[i]) / (2.0 * dt);
            let d3_x = (cur[i + 2] - 2.0 * cur[i + 1] + 2.0 * cur[i - 1] - cur[i - 2])
                / (2.0 * dx * dx * dx);
            let cube = |r: f64| r * r * r;
            let d_x_cubed = (cube(cur[i + 1]) - cube(cur[i - 1])) / (2.0 * dx);
            let residual = (d_t - d3_x + d_x_cubed).abs();
            if residual > max_residual {
                max_residual = residual;
            }
        }
        prev = cur;
        cur = next;
    }
    Ok(max_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(p: f64, q: f64, l1: f64, l2: f64) -> ModelParams {
        ModelParams {
            alpha: 1.0,
            p,
            q,
            lambda1: l1,
            lambda2: l2,
            v_max: 4.0,
            h_c: 7.0,
            l_v: 5.0,
            d: 10.0,
        }
    }

    fn fig2_point(a: f64) -> OperatingPoint {
        OperatingPoint { h: 7.0, a, gate_open: true }
    }

    #[test]
    fn coefficients_match_oracle() {
        // p=1, q=0, lambda1=0.2: V'=2, V'''=-4, a_c=3.6; values from the
        // high-precision oracle
        let c = mkdv_coefficients(&params(1.0, 0.0, 0.2, 0.0), &fig2_point(2.85)).unwrap();
        assert_relative_eq!(c.b, 2.0, epsilon = 1e-14);
        assert_relative_eq!(c.m1, 0.3888888888888889, epsilon = 1e-13);
        assert_relative_eq!(c.m2, 0.6666666666666667, epsilon = 1e-13);
        assert_relative_eq!(c.m3, 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.m4, 0.30864197530864197, epsilon = 1e-13);
        assert_relative_eq!(c.m5, -0.37037037037037035, epsilon = 1e-13);
        assert_relative_eq!(c.amplitude_b, 3.951219512195122, epsilon = 1e-12);
        assert_relative_eq!(c.kink_amplitude, 0.7788111805452164, epsilon = 1e-12);
        assert!(c.valid);
        assert_relative_eq!(c.epsilon * c.epsilon, 0.26315789473684211, epsilon = 1e-12);
    }

    #[test]
    fn soliton_amplitude_from_valid_coefficients() {
        let c = mkdv_coefficients(&params(1.0, 0.0, 0.2, 0.0), &fig2_point(2.85)).unwrap();
        assert_relative_eq!(
            soliton_amplitude(&c).unwrap(),
            3.951219512195122,
            epsilon = 1e-12
        );
    }

    #[test]
    fn soliton_amplitude_rejects_invalid() {
        let c = mkdv_coefficients(&params(1.0, 0.0, 0.2, 0.0), &fig2_point(3.8)).unwrap();
        assert!(!c.valid);
        assert!(soliton_amplitude(&c).is_err());
    }

    #[test]
    fn amplitude_with_m5_zero() {
        let mut c = mkdv_coefficients(&params(1.0, 0.0, 0.2, 0.0), &fig2_point(2.85)).unwrap();
        c.m5 = 0.0;
        // B = 5 m3 / (2 m4) once the m1 m5 product vanishes
        assert_relative_eq!(
            soliton_amplitude(&c).unwrap(),
            5.0 * c.m3 / (2.0 * c.m4),
            epsilon = 1e-14
        );
    }

    #[test]
    fn amplitude_is_scale_invariant() {
        let c0 = mkdv_coefficients(&params(1.0, 0.0, 0.2, 0.0), &fig2_point(2.85)).unwrap();
        let b0 = soliton_amplitude(&c0).unwrap();
        for scale in [0.5, 3.0, 117.0] {
            let mut c = c0;
            c.m1 *= scale;
            c.m2 *= scale;
            c.m3 *= scale;
            c.m4 *= scale;
            c.m5 *= scale;
            assert_relative_eq!(soliton_amplitude(&c).unwrap(), b0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lambda_free_specialization() {
        // q = 0, lambda1 = lambda2 = 0: m1 = V'/6, m3 = V'/2,
        // m5 = (4V' - a)/(12a) V'''
        let pr = params(1.0, 0.0, 0.0, 0.0);
        let a = 3.0;
        let c = mkdv_coefficients_with(
            &pr,
            &OperatingPoint { h: 7.0, a, gate_open: true },
            SensitivityEval::AtOperating,
        )
        .unwrap();
        assert_relative_eq!(c.m1, 2.0 / 6.0, epsilon = 1e-14);
        assert_relative_eq!(c.m3, 1.0, epsilon = 1e-14);
        assert_relative_eq!(c.m5, (4.0 * 2.0 - a) / (12.0 * a) * -4.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_off_critical_headway() {
        let point = OperatingPoint { h: 6.5, a: 2.85, gate_open: true };
        assert!(mkdv_coefficients(&params(1.0, 0.0, 0.2, 0.0), &point).is_err());
    }

    #[test]
    fn kink_center_and_saturation() {
        let pr = params(1.0, 0.0, 0.2, 0.0);
        let point = fig2_point(2.85);
        assert_eq!(kink_headway(0.0, 0.0, &pr, &point).unwrap(), 7.0);
        let a = 0.7788111805452164;
        assert_relative_eq!(kink_headway(1e6, 0.0, &pr, &point).unwrap(), 7.0 + a, epsilon = 1e-12);
        assert_relative_eq!(kink_headway(-1e6, 0.0, &pr, &point).unwrap(), 7.0 - a, epsilon = 1e-12);
    }

    #[test]
    fn kink_wave_speed_matches_formula() {
        // the tanh argument is linear in n and t; the index at which the kink
        // centre sits moves at dn/dt = -(b - eps^2 B)
        let pr = params(1.0, 0.0, 0.2, 0.0);
        let point = fig2_point(2.85);
        let c = mkdv_coefficients(&pr, &point).unwrap();
        let eps_sq = c.epsilon * c.epsilon;
        let speed = -(c.b - eps_sq * c.amplitude_b);
        for t in [10.0, 137.5] {
            let center = speed * t;
            assert_relative_eq!(
                kink_headway(center, t, &pr, &point).unwrap(),
                7.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn kink_errors_outside_regime() {
        let pr = params(1.0, 0.0, 0.2, 0.0);
        let err = kink_headway(0.0, 0.0, &pr, &fig2_point(3.8)).unwrap_err();
        assert!(err.to_string().contains("no kink regime"));
    }

    #[test]
    fn coexisting_curve_examples() {
        let pr = params(1.0, 0.0, 0.2, 0.0);
        let rows = coexisting_curve(&pr, true, &[2.85, 3.6, 3.8]).unwrap();
        let (lo, hi) = rows[0].branches.unwrap();
        assert_relative_eq!(lo, 6.2211888194547836, epsilon = 1e-12);
        assert_relative_eq!(hi, 7.7788111805452164, epsilon = 1e-12);
        assert_relative_eq!(lo + hi, 14.0, epsilon = 1e-12); // symmetric about h_c
        // the curve meets the neutral point with zero amplitude
        let (lo_c, hi_c) = rows[1].branches.unwrap();
        assert_eq!((lo_c, hi_c), (7.0, 7.0));
        assert_eq!(rows[2].branches, None);
    }

    #[test]
    fn coexisting_curve_rejects_bad_grids() {
        let pr = params(1.0, 0.0, 0.2, 0.0);
        assert!(matches!(coexisting_curve(&pr, true, &[]), Err(Error::EmptyGrid)));
        assert!(coexisting_curve(&pr, true, &[2.0, -1.0]).is_err());
    }

    #[test]
    fn residual_bounds_from_oracle() {
        // B = 1 on the documented grid: measured 3.52e-5, bounded by 1e-4
        let grid = ResidualGrid {
            x_min: -10.0,
            x_max: 10.0,
            nx: 2001,
            t_min: -0.1,
            t_max: 0.1,
            nt: 201,
        };
        let r = standard_mkdv_residual(1.0, &grid).unwrap();
        assert!(r < 1e-4, "residual {} exceeds 1e-4", r);
        assert!(r > 1e-6, "residual {} suspiciously small for this grid", r);
    }

    #[test]
    fn residual_refines_at_second_order() {
        let coarse = ResidualGrid {
            x_min: -10.0,
            x_max: 10.0,
            nx: 2001,
            t_min: -0.1,
            t_max: 0.1,
            nt: 201,
        };
        let fine = ResidualGrid { nx: 4001, nt: 401, ..coarse };
        let rc = standard_mkdv_residual(1.0, &coarse).unwrap();
        let rf = standard_mkdv_residual(1.0, &fine).unwrap();
        let ratio = rc / rf;
        assert!((3.0..5.0).contains(&ratio), "refinement ratio {} not ~4", ratio);
    }

    #[test]
    fn residual_zero_solution() {
        let grid = ResidualGrid {
            x_min: -5.0,
            x_max: 5.0,
            nx: 101,
            t_min: 0.0,
            t_max: 1.0,
            nt: 11,
        };
        assert_eq!(standard_mkdv_residual(0.0, &grid).unwrap(), 0.0);
    }

    #[test]
    fn residual_rejects_degenerate_grids() {
        let good = ResidualGrid {
            x_min: -5.0,
            x_max: 5.0,
            nx: 101,
            t_min: 0.0,
            t_max: 1.0,
            nt: 11,
        };
        assert!(standard_mkdv_residual(1.0, &ResidualGrid { nx: 4, ..good }).is_err());
        assert!(standard_mkdv_residual(1.0, &ResidualGrid { nt: 2, ..good }).is_err());
        assert!(standard_mkdv_residual(1.0, &ResidualGrid { x_max: -5.0, ..good }).is_err());
        assert!(standard_mkdv_residual(-1.0, &good).is_err());
        assert!(standard_mkdv_residual(f64::NAN, &good).is_err());
    }
}
