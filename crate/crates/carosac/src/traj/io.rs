//! CSV formats of the evaluation pipeline and the recorded-length replay.
//!
//! - trajectory: `t,x,y,z`
//! - tracking record: `t,ref_x,ref_y,ref_z,x,y,z,L1c..L4c,L1m..L4m`
//! - length log (replay input): `t,L1,L2,L3,L4` with optional `x,y,z`
//!   reference columns
//!
//! Floats are written in Rust's shortest round-trip form, so a record
//! survives a write/read cycle bit-exactly. Records without references
//! store `NaN` in the ref columns.

use std::io::{BufRead, Write};

use super::spline::{TrajSample, Trajectory};
use super::track::TrackingRecord;
use super::TrajError;
use crate::fk::{FkSolver, FkSolverConfig};
use crate::rig::{CableLengths, Position, RigGeometry};
use crate::sim::{CableMaterial, SimParams, SimScene};

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "t,x,y,z")?;
    for s in &traj.samples {
        writeln!(out, "{},{},{},{}", s.t, s.p.0.x, s.p.0.y, s.p.0.z)?;
    }
    Ok(())
}

pub fn read_trajectory_csv<R: BufRead>(input: R) -> Result<Trajectory, TrajError> {
    let mut samples: Vec<TrajSample> = Vec::new();
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        if line_no == 0 {
            expect_header(&line, "t,x,y,z", line_no + 1)?;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields = parse_floats(&line, 4, line_no + 1)?;
        let t = fields[0];
        if let Some(last) = samples.last() {
            if t <= last.t {
                return Err(TrajError::NonMonotoneTime {
                    line: line_no + 1,
                    t_prev: last.t,
                    t,
                });
            }
        }
        samples.push(TrajSample {
            t,
            p: Position::new(fields[1], fields[2], fields[3]),
        });
    }
    if samples.is_empty() {
        return Err(TrajError::EmptyRecord);
    }
    let dt = if samples.len() > 1 {
        samples[1].t - samples[0].t
    } else {
        1.0
    };
    Ok(Trajectory { samples, dt })
}

pub fn write_record_csv<W: Write>(rec: &TrackingRecord, out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "t,ref_x,ref_y,ref_z,x,y,z,L1c,L2c,L3c,L4c,L1m,L2m,L3m,L4m"
    )?;
    for i in 0..rec.len() {
        let r = rec
            .reference
            .as_ref()
            .map(|refs| refs[i].0)
            .unwrap_or_else(|| nalgebra::Vector3::from_element(f64::NAN));
        let a = rec.achieved[i].0;
        write!(
            out,
            "{},{},{},{},{},{},{}",
            rec.t[i], r.x, r.y, r.z, a.x, a.y, a.z
        )?;
        for v in rec.commanded[i].iter() {
            write!(out, ",{v}")?;
        }
        for v in rec.measured[i].iter() {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_record_csv<R: BufRead>(input: R) -> Result<TrackingRecord, TrajError> {
    let mut rec = TrackingRecord::empty(true);
    let mut refs: Vec<Position> = Vec::new();
    let mut any_nan_ref = false;
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        if line_no == 0 {
            expect_header(
                &line,
                "t,ref_x,ref_y,ref_z,x,y,z,L1c,L2c,L3c,L4c,L1m,L2m,L3m,L4m",
                line_no + 1,
            )?;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f = parse_floats(&line, 15, line_no + 1)?;
        if let Some(&t_prev) = rec.t.last() {
            if f[0] <= t_prev {
                return Err(TrajError::NonMonotoneTime {
                    line: line_no + 1,
                    t_prev,
                    t: f[0],
                });
            }
        }
        rec.t.push(f[0]);
        if f[1].is_nan() || f[2].is_nan() || f[3].is_nan() {
            any_nan_ref = true;
        } else {
            refs.push(Position::new(f[1], f[2], f[3]));
        }
        rec.achieved.push(Position::new(f[4], f[5], f[6]));
        rec.commanded.push(CableLengths([f[7], f[8], f[9], f[10]]));
        rec.measured.push(CableLengths([f[11], f[12], f[13], f[14]]));
    }
    rec.reference = if any_nan_ref || refs.len() != rec.t.len() {
        None
    } else {
        Some(refs)
    };
    Ok(rec)
}

/// Commanded-length time series fed to the replay pipeline, with
/// optional reference positions for error statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthLog {
    pub t: Vec<f64>,
    pub lengths: Vec<CableLengths>,
    pub reference: Option<Vec<Position>>,
}

impl LengthLog {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Columns `t,L1..L4` plus optional `x,y,z`; time must be strictly
/// increasing.
pub fn read_length_log_csv<R: BufRead>(input: R) -> Result<LengthLog, TrajError> {
    let mut log = LengthLog {
        t: Vec::new(),
        lengths: Vec::new(),
        reference: None,
    };
    let mut with_refs = false;
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        if line_no == 0 {
            let header = line.trim();
            if header == "t,L1,L2,L3,L4" {
                with_refs = false;
            } else if header == "t,L1,L2,L3,L4,x,y,z" {
                with_refs = true;
                log.reference = Some(Vec::new());
            } else {
                return Err(TrajError::MalformedCsv {
                    line: 1,
                    reason: format!(
                        "header '{header}', expected 't,L1,L2,L3,L4' or 't,L1,L2,L3,L4,x,y,z'"
                    ),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let want = if with_refs { 8 } else { 5 };
        let f = parse_floats(&line, want, line_no + 1)?;
        if let Some(&t_prev) = log.t.last() {
            if f[0] <= t_prev {
                return Err(TrajError::NonMonotoneTime {
                    line: line_no + 1,
                    t_prev,
                    t: f[0],
                });
            }
        }
        log.t.push(f[0]);
        log.lengths.push(CableLengths([f[1], f[2], f[3], f[4]]));
        if with_refs {
            log.reference
                .as_mut()
                .expect("with_refs")
                .push(Position::new(f[5], f[6], f[7]));
        }
    }
    if log.is_empty() {
        return Err(TrajError::EmptyRecord);
    }
    Ok(log)
}

/// Feeds a recorded length log into the sagging simulator as commanded
/// targets with zero-order hold between timestamps, recording the
/// simulated positions at each log timestamp.
///
/// The scene starts at the reference start when references are present,
/// otherwise at the least-squares FK position of the first commanded
/// lengths, and is settled before the clock starts.
pub fn replay_recorded_lengths(
    log: &LengthLog,
    rig: &RigGeometry,
    params: &SimParams,
    material: &CableMaterial,
) -> Result<TrackingRecord, TrajError> {
    if log.is_empty() {
        return Err(TrajError::EmptyRecord);
    }
    let start = match &log.reference {
        Some(refs) => refs[0],
        None => {
            let (first, _) = rig.clamp_lengths(&log.lengths[0]);
            let mut fk = FkSolver::new(FkSolverConfig::default());
            let sol = fk
                .minimize_bounded(&first, rig, None, (rig.workspace_min(), rig.workspace_max()))
                .expect("clamped lengths are finite");
            sol.position
        }
    };
    let mut scene = SimScene::build(rig, params, material, start)?;
    scene.settle(1500)?;

    let mut record = TrackingRecord::empty(log.reference.is_some());
    let mut sim_time = log.t[0];
    for k in 0..log.len() {
        // Advance under the previous row's hold to this row's timestamp.
        while sim_time + params.dt <= log.t[k] + 1e-9 {
            if let Err(e) = scene.step() {
                record.complete = false;
                record.divergence = Some(e.to_string());
                return Ok(record);
            }
            sim_time += params.dt;
        }
        let (cmd, _) = rig.clamp_lengths(&log.lengths[k]);
        scene.set_commanded_lengths(&cmd);
        record.push(
            log.t[k],
            log.reference.as_ref().map(|r| r[k]),
            scene.robot_position(),
            cmd,
            scene.measured_cable_lengths(),
        );
    }
    Ok(record)
}

fn expect_header(line: &str, want: &str, line_no: usize) -> Result<(), TrajError> {
    if line.trim() != want {
        return Err(TrajError::MalformedCsv {
            line: line_no,
            reason: format!("header '{}', expected '{want}'", line.trim()),
        });
    }
    Ok(())
}

fn parse_floats(line: &str, want: usize, line_no: usize) -> Result<Vec<f64>, TrajError> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != want {
        return Err(TrajError::MalformedCsv {
            line: line_no,
            reason: format!("{} fields, expected {want}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.trim().parse::<f64>().map_err(|e| TrajError::MalformedCsv {
                line: line_no,
                reason: format!("'{f}': {e}"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvVariant;
    use crate::traj::spline::{cubic_spline_trajectory, random_waypoints};
    use crate::traj::track::{track, Controller, TrackOptions};

    #[test]
    fn record_csv_roundtrip_is_lossless() {
        let rig = RigGeometry::default();
        let wp = random_waypoints(3, &rig, 41).unwrap();
        let traj = cubic_spline_trajectory(&wp, 2.0, 0.1, 41, &rig).unwrap();
        let rec = track(
            &Controller::IkBaseline,
            EnvVariant::NoSag,
            &rig,
            &traj,
            &TrackOptions::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_record_csv(&rec, &mut buf).unwrap();
        let back = read_record_csv(&buf[..]).unwrap();
        assert_eq!(rec, back);
    }

    #[test]
    fn trajectory_csv_roundtrip() {
        let rig = RigGeometry::default();
        let wp = random_waypoints(4, &rig, 8).unwrap();
        let traj = cubic_spline_trajectory(&wp, 1.0, 0.05, 8, &rig).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let back = read_trajectory_csv(&buf[..]).unwrap();
        assert_eq!(traj.samples, back.samples);
    }

    #[test]
    fn shuffled_time_rejected() {
        let csv = "t,L1,L2,L3,L4\n0.0,4,4,4,4\n0.2,4,4,4,4\n0.1,4,4,4,4\n";
        assert!(matches!(
            read_length_log_csv(csv.as_bytes()),
            Err(TrajError::NonMonotoneTime { line: 4, .. })
        ));
    }

    #[test]
    fn malformed_csv_rejected() {
        let missing_field = "t,L1,L2,L3,L4\n0.0,4,4,4\n";
        assert!(matches!(
            read_length_log_csv(missing_field.as_bytes()),
            Err(TrajError::MalformedCsv { line: 2, .. })
        ));
        let bad_number = "t,L1,L2,L3,L4\n0.0,4,four,4,4\n";
        assert!(matches!(
            read_length_log_csv(bad_number.as_bytes()),
            Err(TrajError::MalformedCsv { line: 2, .. })
        ));
        let bad_header = "time,a,b,c,d\n";
        assert!(matches!(
            read_length_log_csv(bad_header.as_bytes()),
            Err(TrajError::MalformedCsv { line: 1, .. })
        ));
    }

    #[test]
    fn length_log_with_refs_parses() {
        let csv = "t,L1,L2,L3,L4,x,y,z\n0.0,4,4,4,4,0,0,1\n0.1,4.1,4,4,4,0.1,0,1\n";
        let log = read_length_log_csv(csv.as_bytes()).unwrap();
        assert_eq!(log.len(), 2);
        let refs = log.reference.unwrap();
        assert_eq!(refs[1], Position::new(0.1, 0.0, 1.0));
    }

    #[test]
    fn replay_without_refs_starts_from_fk() {
        // constant feasible lengths: scene should sit near the FK point
        let rig = RigGeometry::default();
        let lengths = crate::rig::inverse_kinematics(Position::new(0.5, -0.3, 1.2), &rig);
        let rows: Vec<String> = (0..30)
            .map(|k| {
                format!(
                    "{},{},{},{},{}",
                    k as f64 * 0.1,
                    lengths[0],
                    lengths[1],
                    lengths[2],
                    lengths[3]
                )
            })
            .collect();
        let csv = format!("t,L1,L2,L3,L4\n{}\n", rows.join("\n"));
        let log = read_length_log_csv(csv.as_bytes()).unwrap();
        let rec = replay_recorded_lengths(
            &log,
            &rig,
            &SimParams::default(),
            &CableMaterial::default(),
        )
        .unwrap();
        assert_eq!(rec.len(), 30);
        assert!(rec.reference.is_none());
        assert!(rec.complete);
        let last = rec.achieved.last().unwrap();
        assert!(
            last.distance(&Position::new(0.5, -0.3, 1.2)) < 0.05,
            "drifted to {:?}",
            last.0
        );
    }

    #[test]
    fn replay_is_deterministic() {
        let rig = RigGeometry::default();
        let csv = "t,L1,L2,L3,L4\n0.0,4.5,4.5,4.5,4.5\n0.5,4.2,4.5,4.5,4.5\n1.0,4.2,4.2,4.5,4.5\n";
        let log = read_length_log_csv(csv.as_bytes()).unwrap();
        let params = SimParams::default();
        let material = CableMaterial::default();
        let a = replay_recorded_lengths(&log, &rig, &params, &material).unwrap();
        let b = replay_recorded_lengths(&log, &rig, &params, &material).unwrap();
        assert_eq!(a, b);
    }
}
