//! The four CLI commands. Each takes a parsed manifest and an output
//! directory and writes CSV tables, SVG profiles and a `summary.txt`
//! (`validate_report.txt` for the validator). All writes are atomic and all
//! output is byte-stable for identical manifests.

use std::fs;
use std::path::{Path, PathBuf};

use laneflow_core::mkdv;
use laneflow_core::sim::{self, TrajectoryRecord};
use laneflow_core::stability::{self, OperatingPoint};

use crate::checks::{self, ValidationReport};
use crate::csvio::{atomic_write, profile_csv, sig9, spacetime_csv, time_label};
use crate::error::CliError;
use crate::manifest::{linspace, RunManifest};
use crate::plot::render_profile_plot;

/// What `simulate` produced; `aborted` carries the simulator diagnostic when
/// the run did not finish (the summary still lands on disk).
#[derive(Debug)]
pub struct SimulateOutcome {
    pub record: Option<TrajectoryRecord>,
    pub written: Vec<PathBuf>,
    pub aborted: Option<String>,
}

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io {
        path: out.display().to_string(),
        source: e,
    })
}

fn params_block(manifest: &RunManifest) -> String {
    let p = &manifest.params;
    let mut s = String::from("parameters\n");
    s.push_str(&format!(
        "  alpha = {}, p = {}, q = {}, lambda1 = {}, lambda2 = {}\n",
        p.alpha, p.p, p.q, p.lambda1, p.lambda2
    ));
    s.push_str(&format!(
        "  v_max = {} m/s, h_c = {} m, gate = [{}, {}) m\n",
        p.v_max, p.h_c, p.l_v, p.d
    ));
    s.push_str(&format!(
        "  ring: {} vehicles/lane, dt = {} s, scheme = {}, neighbor mode = {}\n",
        manifest.ring.n_vehicles, manifest.options.dt, manifest.options.scheme, manifest.options.mode
    ));
    if let Ok(warnings) = p.validate() {
        for w in warnings {
            s.push_str(&format!("  warning: {w}\n"));
        }
    }
    s
}

/// a_c, classification, and kink prediction under one gate reading.
fn theory_block(manifest: &RunManifest, gate_open: bool) -> String {
    let p = &manifest.params;
    let point = OperatingPoint { h: p.h_c, a: p.alpha, gate_open };
    let report = stability::report(&point, p);
    let gate = if gate_open { "open" } else { "closed" };
    let mut s = format!(
        "theory (gate {gate}): a_c = {} 1/s, classification = {}, z2 = {}\n",
        sig9(report.a_c),
        report.classification,
        sig9(report.z2)
    );
    match mkdv::mkdv_coefficients(p, &point) {
        Ok(c) if c.valid => {
            s.push_str(&format!(
                "  m1..m5 = [{}, {}, {}, {}, {}]\n",
                sig9(c.m1),
                sig9(c.m2),
                sig9(c.m3),
                sig9(c.m4),
                sig9(c.m5)
            ));
            s.push_str(&format!(
                "  B = {}, kink amplitude A = {} m, predicted swing 2A = {} m\n",
                sig9(c.amplitude_b),
                sig9(c.kink_amplitude),
                sig9(2.0 * c.kink_amplitude)
            ));
        }
        Ok(c) => {
            s.push_str(&format!(
                "  no kink regime: {}\n",
                mkdv::soliton_amplitude(&c).unwrap_err()
            ));
        }
        Err(e) => s.push_str(&format!("  mkdv coefficients unavailable: {e}\n")),
    }
    s
}

/// Runs the manifest's simulation and exports space-time CSVs, profile CSVs
/// and SVGs at the requested profile time, and a summary.
pub fn cmd_simulate(manifest: &RunManifest, out: &Path) -> Result<SimulateOutcome, CliError> {
    ensure_dir(out)?;
    let mut written = Vec::new();
    let mut summary = params_block(manifest);
    summary.push_str(&theory_block(manifest, true));
    summary.push_str(&theory_block(manifest, false));

    let record = match sim::run(&manifest.ring, &manifest.params, &manifest.options) {
        Ok(record) => record,
        Err(e) => {
            summary.push_str(&format!("\nstatus: ABORTED — {e}\n"));
            let path = out.join("summary.txt");
            atomic_write(&path, summary.as_bytes())?;
            written.push(path);
            return Ok(SimulateOutcome { record: None, written, aborted: Some(e.to_string()) });
        }
    };

    // nearest sampled time to the requested profile instant
    let profile_idx = record
        .times
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let da = (*a - manifest.profile_time).abs();
            let db = (*b - manifest.profile_time).abs();
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i)
        .expect("record always holds the initial sample");
    let label = time_label(manifest.profile_time);

    for lane in 0..2 {
        let spacetime = out.join(format!("lane{}_spacetime.csv", lane + 1));
        atomic_write(
            &spacetime,
            spacetime_csv(&record.times, &record.lanes[lane]).as_bytes(),
        )?;
        written.push(spacetime);

        let profile_path = out.join(format!("lane{}_profile_t{}.csv", lane + 1, label));
        atomic_write(
            &profile_path,
            profile_csv(&record.lanes[lane].headways[profile_idx]).as_bytes(),
        )?;
        let svg_path = profile_path.with_extension("svg");
        render_profile_plot(&profile_path, &svg_path)?;
        written.push(profile_path);
        written.push(svg_path);
    }

    let duration = manifest.options.duration;
    let window = ((duration - 100.0).max(0.0), duration);
    let initial = sim::measure_amplitude(&record, (0.0, 0.0))?;
    let final_amp = sim::measure_amplitude(&record, window)?;
    summary.push_str(&format!(
        "\nmeasured headway amplitudes (max - min per lane)\n  initial: lane1 = {} m, lane2 = {} m\n  window [{}, {}] s: lane1 = {} m, lane2 = {} m\n",
        sig9(initial[0]),
        sig9(initial[1]),
        time_label(window.0),
        time_label(window.1),
        sig9(final_amp[0]),
        sig9(final_amp[1])
    ));
    for lane in 0..2 {
        let verdict = if final_amp[lane] < 0.5 * initial[lane] {
            "decayed"
        } else if final_amp[lane] > 2.0 * initial[lane] {
            "grew"
        } else {
            "indeterminate"
        };
        summary.push_str(&format!(
            "  lane{}: {} (final/initial = {})\n",
            lane + 1,
            verdict,
            sig9(final_amp[lane] / initial[lane].max(1e-300))
        ));
    }
    summary.push_str(&format!(
        "profile exported at t = {} s (nearest sample t = {} s)\n",
        label,
        sig9(record.times[profile_idx])
    ));

    let path = out.join("summary.txt");
    atomic_write(&path, summary.as_bytes())?;
    written.push(path);
    Ok(SimulateOutcome { record: Some(record), written, aborted: None })
}

/// Neutral-stability curves and coexisting curves per gate reading.
pub fn cmd_stability_map(manifest: &RunManifest, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    let grid = &manifest.stability_grid;
    let h_grid = linspace(grid.h_min, grid.h_max, grid.h_count);
    let a_grid = linspace(grid.a_min, grid.a_max, grid.a_count);
    let mut written = Vec::new();
    let mut summary = params_block(manifest);

    for gate_open in [true, false] {
        let gate = if gate_open { "open" } else { "closed" };
        let surface = stability::stability_surface(&manifest.params, &h_grid, gate_open)?;
        let mut csv = String::from("h_m,a_c_per_s\n");
        for (h, a_c) in &surface {
            csv.push_str(&format!("{},{}\n", sig9(*h), sig9(*a_c)));
        }
        let path = out.join(format!("stability_gate_{gate}.csv"));
        atomic_write(&path, csv.as_bytes())?;
        written.push(path);

        let curve = mkdv::coexisting_curve(&manifest.params, gate_open, &a_grid)?;
        let mut csv = String::from("a_per_s,h_low_m,h_high_m\n");
        for row in &curve {
            match row.branches {
                Some((lo, hi)) => {
                    csv.push_str(&format!("{},{},{}\n", sig9(row.a), sig9(lo), sig9(hi)))
                }
                None => csv.push_str(&format!("{},,\n", sig9(row.a))),
            }
        }
        let path = out.join(format!("coexisting_gate_{gate}.csv"));
        atomic_write(&path, csv.as_bytes())?;
        written.push(path);

        let peak = surface
            .iter()
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, &(h, a_c)| {
                if a_c > acc.1 { (h, a_c) } else { acc }
            });
        summary.push_str(&format!(
            "gate {gate}: peak a_c = {} 1/s at h = {} m over {} grid headways\n",
            sig9(peak.1),
            sig9(peak.0),
            surface.len()
        ));
    }

    let path = out.join("summary.txt");
    atomic_write(&path, summary.as_bytes())?;
    written.push(path);
    Ok(written)
}

/// Analytic kink profile over the requested vehicle range and times.
pub fn cmd_soliton(manifest: &RunManifest, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(out)?;
    let p = &manifest.params;
    let spec = &manifest.soliton;
    let point = OperatingPoint { h: p.h_c, a: p.alpha, gate_open: spec.gate_open };
    let coeffs = mkdv::mkdv_coefficients(p, &point)?;
    if !coeffs.valid {
        // surface the degeneracy as an error: there is no profile to export
        return Err(mkdv::soliton_amplitude(&coeffs).unwrap_err().into());
    }

    let mut header = String::from("n");
    for t in &spec.times {
        header.push_str(&format!(",h_t{}_m", time_label(*t)));
    }
    header.push('\n');
    let mut csv = header;
    for n in spec.n_min..=spec.n_max {
        csv.push_str(&n.to_string());
        for &t in &spec.times {
            let h = mkdv::kink_headway(n as f64, t, p, &point)?;
            csv.push(',');
            csv.push_str(&sig9(h));
        }
        csv.push('\n');
    }
    let profile = out.join("soliton_profile.csv");
    atomic_write(&profile, csv.as_bytes())?;

    let mut summary = params_block(manifest);
    summary.push_str(&theory_block(manifest, spec.gate_open));
    summary.push_str(&format!(
        "epsilon = {}, wave argument coefficient C = {}\n",
        sig9(coeffs.epsilon),
        sig9((coeffs.epsilon * coeffs.epsilon * coeffs.amplitude_b / 2.0).sqrt())
    ));
    let path = out.join("summary.txt");
    atomic_write(&path, summary.as_bytes())?;
    Ok(vec![profile, path])
}

/// Runs the invariant suite and writes `validate_report.txt`. Check failures
/// are report content; only I/O problems error.
pub fn cmd_validate(manifest: &RunManifest, out: &Path) -> Result<ValidationReport, CliError> {
    ensure_dir(out)?;
    let report = checks::run_all(manifest);
    let text = report.render();
    atomic_write(&out.join("validate_report.txt"), text.as_bytes())?;
    Ok(report)
}
