//! The self-validation suite behind `laneflow validate`: derivative
//! cross-checks, the z₂/a_c sign identity, kink amplitude consistency, the
//! MKdV residual, and reference simulator runs (fixed point, determinism,
//! stability bracket). Failures are report content, not errors.

use laneflow_core::mkdv::{self, ResidualGrid, SensitivityEval};
use laneflow_core::model::{self, ModelParams};
use laneflow_core::sim::{self, NeighborMode, PerturbationSpec, RingConfig, RunOptions, Scheme};
use laneflow_core::stability::{self, OperatingPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csvio::sig9;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip(String),
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !matches!(c.status, CheckStatus::Fail))
    }

    pub fn render(&self) -> String {
        let mut out = String::from("validation report\n=================\n");
        for check in &self.checks {
            let tag = match &check.status {
                CheckStatus::Pass => "PASS".to_string(),
                CheckStatus::Fail => "FAIL".to_string(),
                CheckStatus::Skip(reason) => format!("SKIP ({reason})"),
            };
            out.push_str(&format!("[{tag}] {} — {}\n", check.name, check.detail));
        }
        out.push_str(&format!(
            "\n{} checks, {} failed\n",
            self.checks.len(),
            self.checks
                .iter()
                .filter(|c| c.status == CheckStatus::Fail)
                .count()
        ));
        out
    }

    fn push(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
        });
    }

    fn skip(&mut self, name: &str, reason: &str) {
        self.checks.push(Check {
            name: name.to_string(),
            status: CheckStatus::Skip(reason.to_string()),
            detail: String::new(),
        });
    }
}

/// Central difference with one Richardson step; base step 1e-2 keeps the
/// order-3 stencil clear of f64 cancellation noise.
fn fd_derivative(f: impl Fn(f64) -> f64, x: f64, order: u32) -> f64 {
    let stencil = |h: f64| -> f64 {
        match order {
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
            _ => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h))
                / (2.0 * h * h * h),
        }
    };
    let h = 1e-2;
    (4.0 * stencil(h / 2.0) - stencil(h)) / 3.0
}

/// Compares an order-1..3 derivative evaluator against finite differences on
/// 100 seeded headways in [0, 20]. The evaluator is injectable so a corrupted
/// one is detected (and testable).
pub fn derivative_fd_check(
    params: &ModelParams,
    eval: &dyn Fn(f64, u32) -> f64,
) -> (f64, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a4e);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let h: f64 = rng.gen_range(0.0..20.0);
        for order in 1..=3 {
            let analytic = eval(h, order);
            let numeric = fd_derivative(|x| model::optimal_velocity(x, params), h, order);
            worst = worst.max((analytic - numeric).abs());
        }
    }
    (worst, worst < 1e-6)
}

fn bracket_config() -> RingConfig {
    // reference geometry with a linear-regime seed: the full-size perturbation
    // needs ~2500 s (lane 1) / ~7500 s (lane 2) of slow m=1 decay to fall
    // below 0.01 m at a = 3.8, which is outside the 2000 s desk budget
    RingConfig {
        n_vehicles: 100,
        lane_perturbations: [
            PerturbationSpec {
                baseline_headway: 7.0,
                deltas: vec![sim::HeadwayDelta { first: 46, last: 49, delta: -0.02 }],
            },
            PerturbationSpec {
                baseline_headway: 7.0,
                deltas: vec![sim::HeadwayDelta { first: 46, last: 49, delta: -0.06 }],
            },
        ],
    }
}

fn bracket_params(a: f64) -> ModelParams {
    ModelParams {
        alpha: a,
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

/// Amplitudes at t = 2000 s for the reference bracket run at sensitivity `a`.
pub fn bracket_amplitudes(a: f64, scheme: Scheme) -> laneflow_core::Result<[f64; 2]> {
    let record = sim::run(
        &bracket_config(),
        &bracket_params(a),
        &RunOptions {
            dt: 0.1,
            scheme,
            duration: 2000.0,
            sample_every: 1.0,
            mode: NeighborMode::Nearest,
        },
    )?;
    sim::measure_amplitude(&record, (2000.0, 2000.0))
}

/// Runs the full invariant suite against a manifest.
pub fn run_all(manifest: &RunManifest) -> ValidationReport {
    let mut report = ValidationReport::default();
    let params = &manifest.params;

    match params.validate() {
        Ok(warnings) if warnings.is_empty() => {
            report.push("parameter invariants", true, "all hard invariants hold".into())
        }
        Ok(warnings) => report.push(
            "parameter invariants",
            true,
            format!("warnings: {}", warnings.join("; ")),
        ),
        Err(e) => report.push("parameter invariants", false, e.to_string()),
    }

    let (worst, ok) = derivative_fd_check(params, &|h, order| {
        model::ov_derivative(h, order, params).unwrap()
    });
    report.push(
        "analytic derivatives vs finite differences",
        ok,
        format!("max |analytic - fd| = {} over 100 headways, orders 1-3 (tol 1e-6)", sig9(worst)),
    );

    report.push(
        "sign(z2) == sign(a - a_c) on 1000 random points",
        z2_equivalence_check(),
        "long-wave coefficient z2 and the neutral sensitivity must classify identically".into(),
    );

    // kink amplitude consistency at the manifest's own operating point,
    // under both gate readings
    for gate_open in [true, false] {
        let name = format!(
            "kink amplitude consistency (manifest, gate {})",
            if gate_open { "open" } else { "closed" }
        );
        let point = OperatingPoint { h: params.h_c, a: params.alpha, gate_open };
        let a_c = stability::neutral_sensitivity(&point, params);
        if !(params.alpha < a_c) {
            report.skip(&name, "neutral point");
            continue;
        }
        match mkdv::mkdv_coefficients(params, &point) {
            Ok(c) if c.valid => {
                let lhs = c.kink_amplitude * c.kink_amplitude;
                let rhs = c.epsilon * c.epsilon * (c.m1 / c.m2) * c.amplitude_b;
                let ok = (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0);
                report.push(
                    &name,
                    ok,
                    format!("A^2 = {}, eps^2 (m1/m2) B = {}", sig9(lhs), sig9(rhs)),
                );
            }
            Ok(c) => report.skip(&name, &mkdv::soliton_amplitude(&c).unwrap_err().to_string()),
            Err(e) => report.push(&name, false, e.to_string()),
        }
    }

    report.push(
        "kink amplitude consistency (random draws)",
        amplitude_consistency_check(),
        "A^2 = eps^2 (m1/m2) B to 1e-12 relative on 200 valid draws".into(),
    );

    // both sensitivity-evaluation modes for the reduction coefficients
    {
        let point = OperatingPoint { h: params.h_c, a: params.alpha, gate_open: true };
        let crit = mkdv::mkdv_coefficients_with(params, &point, SensitivityEval::AtCritical);
        let oper = mkdv::mkdv_coefficients_with(params, &point, SensitivityEval::AtOperating);
        match (crit, oper) {
            (Ok(c), Ok(o)) => report.push(
                "coefficient sensitivity modes",
                true,
                format!(
                    "B at critical sensitivity = {}, at operating sensitivity = {}",
                    sig9(c.amplitude_b),
                    sig9(o.amplitude_b)
                ),
            ),
            (Err(e), _) | (_, Err(e)) => {
                report.push("coefficient sensitivity modes", false, e.to_string())
            }
        }
    }

    // MKdV residual on the documented reference grid, plus refinement order
    {
        let coarse = ResidualGrid {
            x_min: -10.0,
            x_max: 10.0,
            nx: 2001,
            t_min: -0.1,
            t_max: 0.1,
            nt: 201,
        };
        let fine = ResidualGrid { nx: 4001, nt: 401, ..coarse };
        match (
            mkdv::standard_mkdv_residual(1.0, &coarse),
            mkdv::standard_mkdv_residual(1.0, &fine),
        ) {
            (Ok(rc), Ok(rf)) => {
                let ratio = rc / rf;
                report.push(
                    "MKdV residual (B = 1, dX = 1e-2, dT = 1e-3)",
                    rc < 1e-4,
                    format!("max residual = {} (tol 1e-4)", sig9(rc)),
                );
                report.push(
                    "MKdV residual refinement order",
                    (3.0..5.0).contains(&ratio),
                    format!("coarse/fine = {} (expected ~4 for second order)", sig9(ratio)),
                );
            }
            (Err(e), _) | (_, Err(e)) => {
                report.push("MKdV residual (B = 1)", false, e.to_string())
            }
        }

        let point = OperatingPoint { h: params.h_c, a: params.alpha, gate_open: true };
        match mkdv::mkdv_coefficients(params, &point) {
            Ok(c) if c.valid => {
                // scale dX with the kink width 1/sqrt(B)
                let scale = (1.0 / c.amplitude_b).sqrt();
                let nx = (2000.0 / scale).round() as usize + 1;
                let t_half = 0.1 / c.amplitude_b;
                let grid = ResidualGrid {
                    x_min: -10.0,
                    x_max: 10.0,
                    nx,
                    t_min: -t_half,
                    t_max: t_half,
                    nt: 201,
                };
                match mkdv::standard_mkdv_residual(c.amplitude_b, &grid) {
                    Ok(res) => report.push(
                        "MKdV residual (manifest B, kink-scaled grid)",
                        res < 1e-3,
                        format!("B = {}, max residual = {} (tol 1e-3)", sig9(c.amplitude_b), sig9(res)),
                    ),
                    Err(e) => report.push("MKdV residual (manifest B)", false, e.to_string()),
                }
            }
            _ => report.skip("MKdV residual (manifest B)", "neutral point"),
        }
    }

    // uniform flow must be a fixed point for 10^4 steps at a stable reference
    // point (at an unstable one, float noise is physically amplified)
    {
        let config = RingConfig {
            n_vehicles: 100,
            lane_perturbations: [PerturbationSpec::uniform(7.0), PerturbationSpec::uniform(7.0)],
        };
        let pr = bracket_params(3.8);
        let mut worst = 0.0_f64;
        let mut failure = None;
        for scheme in [Scheme::Euler, Scheme::Rk4] {
            for mode in [NeighborMode::Nearest, NeighborMode::Paired] {
                let opts = RunOptions { dt: 0.1, scheme, duration: 1000.0, sample_every: 10.0, mode };
                match sim::run(&config, &pr, &opts) {
                    Ok(record) => {
                        let drift = record
                            .lanes
                            .iter()
                            .flat_map(|l| l.headways.iter())
                            .flat_map(|row| row.iter())
                            .map(|&h| (h - 7.0).abs())
                            .fold(0.0, f64::max);
                        worst = worst.max(drift);
                    }
                    Err(e) => failure = Some(e.to_string()),
                }
            }
        }
        match failure {
            Some(e) => report.push("uniform-flow fixed point (10^4 steps)", false, e),
            None => report.push(
                "uniform-flow fixed point (10^4 steps)",
                worst < 1e-9,
                format!("max headway drift = {} over euler/rk4 x nearest/paired (tol 1e-9)", sig9(worst)),
            ),
        }
    }

    // stability bracket at dt = 0.1 around a_c = 3.6
    {
        match (bracket_amplitudes(3.8, Scheme::Euler), bracket_amplitudes(3.4, Scheme::Euler)) {
            (Ok(stable), Ok(unstable)) => {
                let decay_ok = stable[0] < 0.01 && stable[1] < 0.01;
                let growth_ok = unstable[0] > 0.1 && unstable[1] > 0.1;
                report.push(
                    "stability bracket (a = 3.8 decays, a = 3.4 grows)",
                    decay_ok && growth_ok,
                    format!(
                        "amplitudes at t = 2000 s: a=3.8 -> [{}, {}] (tol < 0.01); a=3.4 -> [{}, {}] (tol > 0.1)",
                        sig9(stable[0]),
                        sig9(stable[1]),
                        sig9(unstable[0]),
                        sig9(unstable[1])
                    ),
                );
            }
            (Err(e), _) | (_, Err(e)) => report.push("stability bracket", false, e.to_string()),
        }
    }

    // determinism of the manifest's own configuration over a short horizon
    {
        let opts = RunOptions {
            duration: manifest.options.duration.min(20.0),
            ..manifest.options
        };
        let a = sim::run(&manifest.ring, params, &opts);
        let b = sim::run(&manifest.ring, params, &opts);
        match (a, b) {
            (Ok(ra), Ok(rb)) => report.push(
                "run determinism (manifest config, 20 s)",
                ra == rb,
                "identical inputs must produce bit-identical records".into(),
            ),
            (Err(e), _) | (_, Err(e)) => report.push(
                "run determinism (manifest config, 20 s)",
                false,
                format!("run aborted: {e}"),
            ),
        }
    }

    // conservation and ordering on the manifest's own configuration
    {
        let opts = RunOptions {
            duration: manifest.options.duration.min(50.0),
            ..manifest.options
        };
        match sim::run(&manifest.ring, params, &opts) {
            Ok(record) => {
                let mut worst = 0.0_f64;
                let mut ordered = true;
                for lane in &record.lanes {
                    for row in &lane.headways {
                        let sum: f64 = row.iter().sum();
                        worst = worst.max((sum - lane.circumference).abs());
                        ordered &= row.iter().all(|&h| h > 0.0);
                    }
                }
                report.push(
                    "headway conservation and cyclic order (manifest config, 50 s)",
                    worst < 1e-9 && ordered,
                    format!("max |sum(headways) - circumference| = {} (tol 1e-9)", sig9(worst)),
                );
            }
            Err(e) => report.push(
                "headway conservation and cyclic order (manifest config, 50 s)",
                false,
                format!("run aborted: {e}"),
            ),
        }
    }

    report
}

fn z2_equivalence_check() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0xcafe);
    let mut checked = 0;
    while checked < 1000 {
        let params = ModelParams {
            alpha: 1.0,
            p: rng.gen_range(0.05..1.5),
            q: rng.gen_range(0.0..1.5),
            lambda1: rng.gen_range(0.0..0.5),
            lambda2: rng.gen_range(0.0..0.5),
            v_max: rng.gen_range(1.0..8.0),
            h_c: rng.gen_range(3.0..10.0),
            l_v: 5.0,
            d: 10.0,
        };
        let point = OperatingPoint {
            h: rng.gen_range(0.5..15.0),
            a: rng.gen_range(0.05..6.0),
            gate_open: rng.gen(),
        };
        let a_c = stability::neutral_sensitivity(&point, &params);
        if (point.a - a_c).abs() <= 1e-9 * a_c.abs().max(1.0) {
            continue;
        }
        let (_, z2) = stability::long_wave_coefficients(&point, &params);
        if (z2 > 0.0) != (point.a > a_c) {
            return false;
        }
        checked += 1;
    }
    true
}

fn amplitude_consistency_check() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x50111);
    let mut checked = 0;
    while checked < 200 {
        let params = ModelParams {
            alpha: 1.0,
            p: rng.gen_range(0.1..1.2),
            q: rng.gen_range(0.0..1.0),
            lambda1: rng.gen_range(0.0..0.4),
            lambda2: rng.gen_range(0.0..0.4),
            v_max: rng.gen_range(1.0..8.0),
            h_c: rng.gen_range(3.0..10.0),
            l_v: 2.0,
            d: 20.0,
        };
        let gate_open = rng.gen();
        let probe = OperatingPoint { h: params.h_c, a: 1.0, gate_open };
        let a_c = stability::neutral_sensitivity(&probe, &params);
        if a_c < 0.05 {
            continue;
        }
        let point = OperatingPoint {
            h: params.h_c,
            a: a_c * rng.gen_range(0.3..0.95),
            gate_open,
        };
        let coeffs = match mkdv::mkdv_coefficients(&params, &point) {
            Ok(c) if c.valid => c,
            _ => continue,
        };
        let lhs = coeffs.kink_amplitude * coeffs.kink_amplitude;
        let rhs = coeffs.epsilon * coeffs.epsilon * (coeffs.m1 / coeffs.m2) * coeffs.amplitude_b;
        if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(1.0) {
            return false;
        }
        checked += 1;
    }
    true
}
