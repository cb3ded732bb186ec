//! The run-manifest config format: flat `key = value` text with one section
//! per lane.
//!
//! Parsing collects *all* problems as located errors (line, field, reason)
//! instead of stopping at the first; unknown keys are errors so misspellings
//! cannot silently fall back to defaults. A manifest round-trips losslessly:
//! `parse(serialize(parse(text))) == parse(text)`.
//!
//! Only `alpha`, `p`, `q`, `lambda1` and `lambda2` are required; everything
//! else defaults to the reference two-lane setup (100 vehicles per lane, 7 m
//! baseline headway, headways 46..=49 perturbed by -0.1 m on lane 1 and
//! -0.3 m on lane 2, dt = 0.1 s, euler scheme, nearest neighbor resolution).

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use laneflow_core::model::ModelParams;
use laneflow_core::sim::{
    HeadwayDelta, NeighborMode, PerturbationSpec, RingConfig, RunOptions, Scheme,
};

/// One located problem in a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    /// 1-based line number; 0 when the problem is not tied to a line
    /// (e.g. a missing required key).
    pub line: usize,
    pub field: String,
    pub reason: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}: {}", self.line, self.field, self.reason)
        } else {
            write!(f, "{}: {}", self.field, self.reason)
        }
    }
}

/// All problems found in one parse pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} config error(s):", self.0.len())?;
        for issue in &self.0 {
            writeln!(f, "  {}", issue)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Grid bounds for the stability-map command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityGridSpec {
    pub h_min: f64,
    pub h_max: f64,
    pub h_count: usize,
    pub a_min: f64,
    pub a_max: f64,
    pub a_count: usize,
}

/// Options for the soliton command.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSpec {
    /// Gate reading for the theory: open takes `V̄' = V'`, closed takes 0.
    pub gate_open: bool,
    pub times: Vec<f64>,
    pub n_min: i64,
    pub n_max: i64,
}

/// A fully resolved experiment definition.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub params: ModelParams,
    pub ring: RingConfig,
    pub options: RunOptions,
    /// Time of the exported headway profile (the nearest sample is used).
    pub profile_time: f64,
    pub stability_grid: StabilityGridSpec,
    pub soliton: SolitonSpec,
    pub out_dir: Option<PathBuf>,
}

const GLOBAL_KEYS: &[&str] = &[
    "alpha", "p", "q", "lambda1", "lambda2", "v_max", "h_c", "l_v", "d", "n_vehicles", "dt",
    "duration", "sample_every", "scheme", "mode", "profile_time", "h_min", "h_max", "h_count",
    "a_min", "a_max", "a_count", "gate", "times", "n_min", "n_max", "out_dir",
];
const LANE_KEYS: &[&str] = &["baseline_headway", "perturb"];

#[derive(Default)]
struct LaneRaw {
    present: bool,
    baseline: Option<(usize, f64)>,
    perturbs: Vec<(usize, HeadwayDelta)>,
}

/// Parses a manifest, collecting every located error.
pub fn parse_config(text: &str) -> Result<RunManifest, ConfigErrors> {
    let mut issues: Vec<ConfigIssue> = Vec::new();
    // key -> (line, raw value)
    let mut globals: HashMap<String, (usize, String)> = HashMap::new();
    let mut lanes: [LaneRaw; 2] = [LaneRaw::default(), LaneRaw::default()];
    let mut section: Option<usize> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            match line {
                "[lane1]" => {
                    section = Some(0);
                    lanes[0].present = true;
                }
                "[lane2]" => {
                    section = Some(1);
                    lanes[1].present = true;
                }
                other => issues.push(ConfigIssue {
                    line: lineno,
                    field: other.to_string(),
                    reason: "unknown section (expected [lane1] or [lane2])".into(),
                }),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            issues.push(ConfigIssue {
                line: lineno,
                field: line.to_string(),
                reason: "expected `key = value`".into(),
            });
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        match section {
            None => {
                if !GLOBAL_KEYS.contains(&key) {
                    issues.push(ConfigIssue {
                        line: lineno,
                        field: key.to_string(),
                        reason: "unknown key".into(),
                    });
                } else if globals.insert(key.to_string(), (lineno, value.to_string())).is_some() {
                    issues.push(ConfigIssue {
                        line: lineno,
                        field: key.to_string(),
                        reason: "duplicate key".into(),
                    });
                }
            }
            Some(lane) => match key {
                "baseline_headway" => match value.parse::<f64>() {
                    Ok(v) if lanes[lane].baseline.is_none() => {
                        lanes[lane].baseline = Some((lineno, v));
                    }
                    Ok(_) => issues.push(ConfigIssue {
                        line: lineno,
                        field: key.to_string(),
                        reason: "duplicate key".into(),
                    }),
                    Err(e) => issues.push(ConfigIssue {
                        line: lineno,
                        field: key.to_string(),
                        reason: format!("not a number: {e}"),
                    }),
                },
                "perturb" => match parse_perturb(value) {
                    Ok(delta) => lanes[lane].perturbs.push((lineno, delta)),
                    Err(reason) => issues.push(ConfigIssue {
                        line: lineno,
                        field: key.to_string(),
                        reason,
                    }),
                },
                other if LANE_KEYS.contains(&other) => unreachable!(),
                other => issues.push(ConfigIssue {
                    line: lineno,
                    field: other.to_string(),
                    reason: "unknown key in lane section".into(),
                }),
            },
        }
    }

    let manifest = assemble(&globals, lanes, &mut issues);
    match manifest {
        Some(m) if issues.is_empty() => Ok(m),
        _ => Err(ConfigErrors(issues)),
    }
}

/// `FIRST..LAST @ DELTA`, both range ends inclusive.
fn parse_perturb(value: &str) -> Result<HeadwayDelta, String> {
    let (range, delta) = value
        .split_once('@')
        .ok_or_else(|| "expected `FIRST..LAST @ DELTA`".to_string())?;
    let (first, last) = range
        .trim()
        .split_once("..")
        .ok_or_else(|| "expected index range `FIRST..LAST`".to_string())?;
    let first: usize = first
        .trim()
        .parse()
        .map_err(|e| format!("bad range start: {e}"))?;
    let last: usize = last
        .trim()
        .parse()
        .map_err(|e| format!("bad range end: {e}"))?;
    if first > last {
        return Err(format!("range start {first} exceeds end {last}"));
    }
    let delta: f64 = delta
        .trim()
        .parse()
        .map_err(|e| format!("bad delta: {e}"))?;
    Ok(HeadwayDelta { first, last, delta })
}

struct FieldReader<'a> {
    globals: &'a HashMap<String, (usize, String)>,
    issues: &'a mut Vec<ConfigIssue>,
}

impl FieldReader<'_> {
    fn line_of(&self, key: &str) -> usize {
        self.globals.get(key).map(|(l, _)| *l).unwrap_or(0)
    }

    fn required_f64(&mut self, key: &str) -> Option<f64> {
        match self.globals.get(key) {
            None => {
                self.issues.push(ConfigIssue {
                    line: 0,
                    field: key.to_string(),
                    reason: "required key is missing".into(),
                });
                None
            }
            Some(_) => self.f64_or(key, f64::NAN),
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Option<f64> {
        match self.globals.get(key) {
            None => Some(default),
            Some((line, raw)) => match raw.parse::<f64>() {
                Ok(v) => Some(v),
                Err(e) => {
                    self.issues.push(ConfigIssue {
                        line: *line,
                        field: key.to_string(),
                        reason: format!("not a number: {e}"),
                    });
                    None
                }
            },
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Option<usize> {
        match self.globals.get(key) {
            None => Some(default),
            Some((line, raw)) => match raw.parse::<usize>() {
                Ok(v) => Some(v),
                Err(e) => {
                    self.issues.push(ConfigIssue {
                        line: *line,
                        field: key.to_string(),
                        reason: format!("not a non-negative integer: {e}"),
                    });
                    None
                }
            },
        }
    }

    fn i64_or(&mut self, key: &str, default: i64) -> Option<i64> {
        match self.globals.get(key) {
            None => Some(default),
            Some((line, raw)) => match raw.parse::<i64>() {
                Ok(v) => Some(v),
                Err(e) => {
                    self.issues.push(ConfigIssue {
                        line: *line,
                        field: key.to_string(),
                        reason: format!("not an integer: {e}"),
                    });
                    None
                }
            },
        }
    }

    fn choice_or<T: Copy>(&mut self, key: &str, table: &[(&str, T)], default: T) -> Option<T> {
        match self.globals.get(key) {
            None => Some(default),
            Some((line, raw)) => match table.iter().find(|(name, _)| *name == raw) {
                Some((_, v)) => Some(*v),
                None => {
                    let names: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
                    self.issues.push(ConfigIssue {
                        line: *line,
                        field: key.to_string(),
                        reason: format!("expected one of {}", names.join("|")),
                    });
                    None
                }
            },
        }
    }

    fn check(&mut self, ok: bool, key: &str, reason: String) {
        if !ok {
            let line = self.line_of(key);
            self.issues.push(ConfigIssue { line, field: key.to_string(), reason });
        }
    }
}

fn assemble(
    globals: &HashMap<String, (usize, String)>,
    lanes: [LaneRaw; 2],
    issues: &mut Vec<ConfigIssue>,
) -> Option<RunManifest> {
    let mut r = FieldReader { globals, issues };

    let alpha = r.required_f64("alpha");
    let p = r.required_f64("p");
    let q = r.required_f64("q");
    let lambda1 = r.required_f64("lambda1");
    let lambda2 = r.required_f64("lambda2");
    let v_max = r.f64_or("v_max", 4.0);
    let h_c = r.f64_or("h_c", 7.0);
    let l_v = r.f64_or("l_v", 5.0);
    let d = r.f64_or("d", 10.0);
    let n_vehicles = r.usize_or("n_vehicles", 100);
    let dt = r.f64_or("dt", 0.1);
    let duration = r.f64_or("duration", 1000.0);
    let sample_every = r.f64_or("sample_every", 1.0);
    let scheme = r.choice_or("scheme", &[("euler", Scheme::Euler), ("rk4", Scheme::Rk4)], Scheme::Euler);
    let mode = r.choice_or(
        "mode",
        &[("nearest", NeighborMode::Nearest), ("paired", NeighborMode::Paired)],
        NeighborMode::Nearest,
    );
    let profile_time = r.f64_or("profile_time", 950.0);
    let h_min = r.f64_or("h_min", 4.0);
    let h_max = r.f64_or("h_max", 10.0);
    let h_count = r.usize_or("h_count", 121);
    let a_min = r.f64_or("a_min", 0.5);
    let a_max = r.f64_or("a_max", 4.0);
    let a_count = r.usize_or("a_count", 141);
    let gate_open = r.choice_or("gate", &[("open", true), ("closed", false)], true);
    let n_min = r.i64_or("n_min", 0);
    let n_max = r.i64_or("n_max", 99);

    let times: Option<Vec<f64>> = match globals.get("times") {
        None => Some(vec![0.0, 950.0]),
        Some((line, raw)) => {
            let parsed: Result<Vec<f64>, _> =
                raw.split(',').map(|part| part.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) if !v.is_empty() => Some(v),
                Ok(_) => {
                    r.issues.push(ConfigIssue {
                        line: *line,
                        field: "times".into(),
                        reason: "must list at least one time".into(),
                    });
                    None
                }
                Err(e) => {
                    r.issues.push(ConfigIssue {
                        line: *line,
                        field: "times".into(),
                        reason: format!("not a comma-separated list of numbers: {e}"),
                    });
                    None
                }
            }
        }
    };
    let out_dir = globals.get("out_dir").map(|(_, raw)| PathBuf::from(raw));

    // range checks on whatever parsed
    if let Some(v) = alpha {
        r.check(v > 0.0, "alpha", format!("must be > 0 (got {v})"));
    }
    if let Some(v) = p {
        r.check(v >= 0.0, "p", format!("must be >= 0 (got {v})"));
    }
    if let Some(v) = q {
        r.check(v >= 0.0, "q", format!("must be >= 0 (got {v})"));
    }
    if let Some(v) = lambda1 {
        r.check(v >= 0.0, "lambda1", format!("must be >= 0 (got {v})"));
    }
    if let Some(v) = lambda2 {
        r.check(v >= 0.0, "lambda2", format!("must be >= 0 (got {v})"));
    }
    if let Some(v) = v_max {
        r.check(v > 0.0, "v_max", format!("must be > 0 (got {v})"));
    }
    if let Some(v) = h_c {
        r.check(v > 0.0, "h_c", format!("must be > 0 (got {v})"));
    }
    if let (Some(lv), Some(dv)) = (l_v, d) {
        r.check(lv > 0.0 && lv < dv, "l_v", format!("gate needs 0 < l_v < d (got l_v={lv}, d={dv})"));
    }
    if let Some(v) = n_vehicles {
        r.check(v >= 2, "n_vehicles", format!("need at least 2 vehicles (got {v})"));
    }
    if let Some(v) = dt {
        r.check(v > 0.0, "dt", format!("must be > 0 (got {v})"));
    }
    if let Some(v) = duration {
        r.check(v >= 0.0, "duration", format!("must be >= 0 (got {v})"));
    }
    if let Some(v) = sample_every {
        r.check(v > 0.0, "sample_every", format!("must be > 0 (got {v})"));
    }
    if let Some(v) = profile_time {
        r.check(v >= 0.0, "profile_time", format!("must be >= 0 (got {v})"));
    }
    if let (Some(lo), Some(hi), Some(count)) = (h_min, h_max, h_count) {
        r.check(count >= 1, "h_count", "must be >= 1".into());
        r.check(lo > 0.0, "h_min", format!("must be > 0 (got {lo})"));
        r.check(
            hi > lo || count == 1,
            "h_max",
            format!("must exceed h_min for multi-point grids (got {lo}..{hi})"),
        );
    }
    if let (Some(lo), Some(hi), Some(count)) = (a_min, a_max, a_count) {
        r.check(count >= 1, "a_count", "must be >= 1".into());
        r.check(lo > 0.0, "a_min", format!("must be > 0 (got {lo})"));
        r.check(
            hi > lo || count == 1,
            "a_max",
            format!("must exceed a_min for multi-point grids (got {lo}..{hi})"),
        );
    }
    if let (Some(lo), Some(hi)) = (n_min, n_max) {
        r.check(lo <= hi, "n_min", format!("must not exceed n_max (got {lo}..{hi})"));
    }

    // lane sections: absent section = reference perturbation for that lane
    let default_deltas = [
        HeadwayDelta { first: 46, last: 49, delta: -0.1 },
        HeadwayDelta { first: 46, last: 49, delta: -0.3 },
    ];
    let mut specs: Vec<PerturbationSpec> = Vec::with_capacity(2);
    for (lane_idx, lane) in lanes.iter().enumerate() {
        let baseline = lane.baseline.map(|(_, v)| v).unwrap_or(7.0);
        if let Some((line, v)) = lane.baseline {
            if !(v > 0.0) {
                issues.push(ConfigIssue {
                    line,
                    field: "baseline_headway".into(),
                    reason: format!("must be > 0 (got {v})"),
                });
            }
        }
        let deltas: Vec<HeadwayDelta> = if lane.present {
            lane.perturbs.iter().map(|(_, d)| *d).collect()
        } else {
            vec![default_deltas[lane_idx]]
        };
        if let Some(n) = n_vehicles {
            for (line, d) in &lane.perturbs {
                if d.last >= n {
                    issues.push(ConfigIssue {
                        line: *line,
                        field: "perturb".into(),
                        reason: format!("index range {}..{} out of bounds for {} vehicles", d.first, d.last, n),
                    });
                }
                if !(baseline + d.delta > 0.0) {
                    issues.push(ConfigIssue {
                        line: *line,
                        field: "perturb".into(),
                        reason: format!(
                            "baseline {} + delta {} must stay positive",
                            baseline, d.delta
                        ),
                    });
                }
            }
        }
        specs.push(PerturbationSpec { baseline_headway: baseline, deltas });
    }

    if !issues.is_empty() {
        return None;
    }
    let lane2 = specs.pop().expect("two lanes");
    let lane1 = specs.pop().expect("two lanes");
    Some(RunManifest {
        params: ModelParams {
            alpha: alpha?,
            p: p?,
            q: q?,
            lambda1: lambda1?,
            lambda2: lambda2?,
            v_max: v_max?,
            h_c: h_c?,
            l_v: l_v?,
            d: d?,
        },
        ring: RingConfig {
            n_vehicles: n_vehicles?,
            lane_perturbations: [lane1, lane2],
        },
        options: RunOptions {
            dt: dt?,
            scheme: scheme?,
            duration: duration?,
            sample_every: sample_every?,
            mode: mode?,
        },
        profile_time: profile_time?,
        stability_grid: StabilityGridSpec {
            h_min: h_min?,
            h_max: h_max?,
            h_count: h_count?,
            a_min: a_min?,
            a_max: a_max?,
            a_count: a_count?,
        },
        soliton: SolitonSpec {
            gate_open: gate_open?,
            times: times?,
            n_min: n_min?,
            n_max: n_max?,
        },
        out_dir,
    })
}

/// Canonical text form; floats are printed in shortest round-trip notation so
/// parse -> serialize -> parse is the identity.
pub fn serialize_manifest(m: &RunManifest) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    kv("alpha", m.params.alpha.to_string());
    kv("p", m.params.p.to_string());
    kv("q", m.params.q.to_string());
    kv("lambda1", m.params.lambda1.to_string());
    kv("lambda2", m.params.lambda2.to_string());
    kv("v_max", m.params.v_max.to_string());
    kv("h_c", m.params.h_c.to_string());
    kv("l_v", m.params.l_v.to_string());
    kv("d", m.params.d.to_string());
    kv("n_vehicles", m.ring.n_vehicles.to_string());
    kv("dt", m.options.dt.to_string());
    kv("duration", m.options.duration.to_string());
    kv("sample_every", m.options.sample_every.to_string());
    kv("scheme", m.options.scheme.to_string());
    kv("mode", m.options.mode.to_string());
    kv("profile_time", m.profile_time.to_string());
    kv("h_min", m.stability_grid.h_min.to_string());
    kv("h_max", m.stability_grid.h_max.to_string());
    kv("h_count", m.stability_grid.h_count.to_string());
    kv("a_min", m.stability_grid.a_min.to_string());
    kv("a_max", m.stability_grid.a_max.to_string());
    kv("a_count", m.stability_grid.a_count.to_string());
    kv("gate", if m.soliton.gate_open { "open" } else { "closed" }.to_string());
    let times: Vec<String> = m.soliton.times.iter().map(|t| t.to_string()).collect();
    kv("times", times.join(", "));
    kv("n_min", m.soliton.n_min.to_string());
    kv("n_max", m.soliton.n_max.to_string());
    if let Some(dir) = &m.out_dir {
        kv("out_dir", dir.display().to_string());
    }
    for (idx, spec) in m.ring.lane_perturbations.iter().enumerate() {
        s.push_str(&format!("\n[lane{}]\n", idx + 1));
        s.push_str(&format!("baseline_headway = {}\n", spec.baseline_headway));
        for d in &spec.deltas {
            s.push_str(&format!("perturb = {}..{} @ {}\n", d.first, d.last, d.delta));
        }
    }
    s
}

/// `count` evenly spaced values over `[min, max]` (just `min` for count 1).
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![min];
    }
    let step = (max - min) / (count - 1) as f64;
    (0..count).map(|i| min + step * i as f64).collect()
}
