//! CSV export/import helpers. Column 0 is always the row key (time or vehicle
//! index), headers carry units, numbers are written with 9 significant digits,
//! and files land atomically (write-then-rename) so partial output never
//! appears under the final name.

use std::fs;
use std::io::Write;
use std::path::Path;

use laneflow_core::sim::LaneTrack;

use crate::error::CliError;

/// Decimal formatting with 9 significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.8}", x);
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (8 - exponent).clamp(0, 17) as usize;
    format!("{:.*}", decimals, x)
}

/// Writes `bytes` to `path` via a sibling temp file and an atomic rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| CliError::Io { path: path.display().to_string(), source: e };
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(bytes).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    fs::rename(&tmp, path).map_err(io)
}

/// Space-time table: one row per sample time, one headway column per vehicle.
pub fn spacetime_csv(times: &[f64], track: &LaneTrack) -> String {
    let n = track.headways.first().map_or(0, Vec::len);
    let width = (n.max(1) - 1).to_string().len();
    let mut out = String::from("t_s");
    for i in 0..n {
        out.push_str(&format!(",h{:0width$}_m", i));
    }
    out.push('\n');
    for (t, row) in times.iter().zip(track.headways.iter()) {
        out.push_str(&sig9(*t));
        for h in row {
            out.push(',');
            out.push_str(&sig9(*h));
        }
        out.push('\n');
    }
    out
}

/// Snapshot profile: one row per vehicle.
pub fn profile_csv(headways: &[f64]) -> String {
    let mut out = String::from("vehicle_index,headway_m\n");
    for (i, h) in headways.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, sig9(*h)));
    }
    out
}

/// Reads a profile CSV back as `(index, headway)` pairs.
pub fn read_profile_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "vehicle_index,headway_m" => {}
        Some(other) => {
            return Err(CliError::MalformedCsv(format!(
                "{}: unexpected header {:?}",
                path.display(),
                other
            )))
        }
        None => {
            return Err(CliError::MalformedCsv(format!("{}: empty file", path.display())))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let parse = |cell: Option<&str>| -> Result<f64, CliError> {
            cell.and_then(|c| c.trim().parse::<f64>().ok()).ok_or_else(|| {
                CliError::MalformedCsv(format!(
                    "{}: row {}: expected `index,headway`",
                    path.display(),
                    idx + 2
                ))
            })
        };
        let n = parse(cells.next())?;
        let h = parse(cells.next())?;
        if cells.next().is_some() {
            return Err(CliError::MalformedCsv(format!(
                "{}: row {}: too many columns",
                path.display(),
                idx + 2
            )));
        }
        rows.push((n, h));
    }
    if rows.is_empty() {
        return Err(CliError::MalformedCsv(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Compact time label for file names: `950`, `950.5`, ...
pub fn time_label(t: f64) -> String {
    if t == t.trunc() && t.abs() < 1e15 {
        format!("{}", t as i64)
    } else {
        format!("{}", t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_gives_nine_significant_digits() {
        assert_eq!(sig9(7.0), "7.00000000");
        assert_eq!(sig9(699.6), "699.600000");
        assert_eq!(sig9(0.123456789123), "0.123456789");
        assert_eq!(sig9(-1.9999966738878893), "-1.99999667");
        assert_eq!(sig9(0.0), "0.00000000");
        assert_eq!(sig9(12345.6789), "12345.6789");
    }

    #[test]
    fn spacetime_layout() {
        let track = LaneTrack {
            circumference: 14.0,
            headways: vec![vec![7.0, 7.0], vec![6.9, 7.1]],
            velocities: vec![vec![0.0; 2]; 2],
        };
        let csv = spacetime_csv(&[0.0, 1.0], &track);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t_s,h0_m,h1_m"));
        assert_eq!(lines.next(), Some("0.00000000,7.00000000,7.00000000"));
        assert_eq!(lines.next(), Some("1.00000000,6.90000000,7.10000000"));
    }

    #[test]
    fn profile_round_trips_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.csv");
        atomic_write(&path, profile_csv(&[7.0, 6.9, 7.1]).as_bytes()).unwrap();
        let rows = read_profile_csv(&path).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1].0, 1.0);
        assert!((rows[1].1 - 6.9).abs() < 1e-8);
        // no stray temp file after the rename
        assert!(!path.with_extension("tmp").exists());
    }

    #[test]
    fn malformed_profiles_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "vehicle_index,headway_m\n").unwrap();
        assert!(read_profile_csv(&path).is_err());
        std::fs::write(&path, "wrong,header\n0,7\n").unwrap();
        assert!(read_profile_csv(&path).is_err());
        std::fs::write(&path, "vehicle_index,headway_m\n0,abc\n").unwrap();
        assert!(read_profile_csv(&path).is_err());
    }

    #[test]
    fn time_labels() {
        assert_eq!(time_label(950.0), "950");
        assert_eq!(time_label(950.5), "950.5");
        assert_eq!(time_label(0.0), "0");
    }
}
