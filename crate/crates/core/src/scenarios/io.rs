//! Trajectory persistence.
//!
//! A trajectory directory holds three files:
//! - `trajectory.csv`: one row per (frame, particle) with columns
//!   `frame,t,particle,x,y,on_boundary`;
//! - `summary.csv`: one row per frame with `frame,t,energy,min_separation`;
//! - `meta.json`: the integrator parameters needed to reinterpret the data.
//!
//! Floats are written with Rust's shortest round-trip formatting, so reading
//! a trajectory back reproduces the positions bit for bit.

use super::ScenarioError;
use crate::dynamics::{Frame, Scheme, TrajectoryRecord};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct TrajectoryMeta {
    scheme: Scheme,
    dt: f64,
    record_every: usize,
    contact_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    penalty_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aborted: Option<String>,
}

pub fn write_trajectory(trajectory: &TrajectoryRecord, dir: &Path) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir)?;

    let meta = TrajectoryMeta {
        scheme: trajectory.scheme,
        dt: trajectory.dt,
        record_every: trajectory.record_every,
        contact_tolerance: trajectory.contact_tolerance,
        penalty_k: trajectory.penalty_k,
        aborted: trajectory.aborted.clone(),
    };
    std::fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;

    let mut table = String::from("frame,t,particle,x,y,on_boundary\n");
    let mut summary = String::from("frame,t,energy,min_separation\n");
    for frame in &trajectory.frames {
        writeln!(
            summary,
            "{},{},{},{}",
            frame.step, frame.time, frame.energy, frame.min_separation
        )
        .expect("string write");
        for (i, p) in frame.positions.iter().enumerate() {
            writeln!(
                table,
                "{},{},{},{},{},{}",
                frame.step,
                frame.time,
                i,
                p.x,
                p.y,
                u8::from(frame.boundary_flags[i])
            )
            .expect("string write");
        }
    }
    std::fs::write(dir.join("trajectory.csv"), table)?;
    std::fs::write(dir.join("summary.csv"), summary)?;
    Ok(())
}

fn malformed(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::MalformedTrajectory(msg.into())
}

fn parse_f64(field: &str, line: usize) -> Result<f64, ScenarioError> {
    field
        .parse()
        .map_err(|_| malformed(format!("bad float '{field}' on line {line}")))
}

pub fn read_trajectory(dir: &Path) -> Result<TrajectoryRecord, ScenarioError> {
    let meta: TrajectoryMeta =
        serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json"))?)?;

    let mut frames: Vec<Frame> = Vec::new();
    let table = std::fs::read_to_string(dir.join("trajectory.csv"))?;
    let mut lines = table.lines().enumerate();
    match lines.next() {
        Some((_, "frame,t,particle,x,y,on_boundary")) => {}
        _ => return Err(malformed("missing trajectory.csv header")),
    }
    for (idx, line) in lines {
        let lineno = idx + 1;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(malformed(format!("expected 6 columns on line {lineno}")));
        }
        let step: usize = cols[0]
            .parse()
            .map_err(|_| malformed(format!("bad frame index on line {lineno}")))?;
        let time = parse_f64(cols[1], lineno)?;
        let particle: usize = cols[2]
            .parse()
            .map_err(|_| malformed(format!("bad particle index on line {lineno}")))?;
        let pos = Vec2::new(parse_f64(cols[3], lineno)?, parse_f64(cols[4], lineno)?);
        let on_boundary = match cols[5] {
            "0" => false,
            "1" => true,
            other => return Err(malformed(format!("bad flag '{other}' on line {lineno}"))),
        };
        if frames.last().map(|f| f.step) != Some(step) {
            frames.push(Frame {
                step,
                time,
                positions: Vec::new(),
                boundary_flags: Vec::new(),
                energy: f64::NAN,
                min_separation: f64::NAN,
            });
        }
        let frame = frames.last_mut().expect("pushed above");
        if particle != frame.positions.len() {
            return Err(malformed(format!(
                "particle indices out of order on line {lineno}"
            )));
        }
        frame.positions.push(pos);
        frame.boundary_flags.push(on_boundary);
    }

    let summary = std::fs::read_to_string(dir.join("summary.csv"))?;
    let mut summary_lines = summary.lines().enumerate();
    match summary_lines.next() {
        Some((_, "frame,t,energy,min_separation")) => {}
        _ => return Err(malformed("missing summary.csv header")),
    }
    let mut cursor = 0usize;
    for (idx, line) in summary_lines {
        let lineno = idx + 1;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(malformed(format!(
                "expected 4 summary columns on line {lineno}"
            )));
        }
        let step: usize = cols[0]
            .parse()
            .map_err(|_| malformed(format!("bad frame index on summary line {lineno}")))?;
        let frame = frames
            .get_mut(cursor)
            .filter(|f| f.step == step)
            .ok_or_else(|| malformed(format!("summary frame {step} not in trajectory")))?;
        frame.energy = parse_f64(cols[2], lineno)?;
        frame.min_separation = parse_f64(cols[3], lineno)?;
        cursor += 1;
    }
    if cursor != frames.len() {
        return Err(malformed("summary.csv shorter than trajectory.csv"));
    }

    Ok(TrajectoryRecord {
        scheme: meta.scheme,
        dt: meta.dt,
        record_every: meta.record_every,
        contact_tolerance: meta.contact_tolerance,
        penalty_k: meta.penalty_k,
        frames,
        aborted: meta.aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{builtin_scenario, run_scenario};
    use super::*;

    #[test]
    fn round_trip_is_bitwise_exact() {
        let mut config = builtin_scenario("circle_case1_desk").unwrap();
        config.n = 15;
        config.total_time = 5.0;
        let record = run_scenario(&config, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_trajectory(&record.trajectory, dir.path()).unwrap();
        let read = read_trajectory(dir.path()).unwrap();
        assert_eq!(read, record.trajectory);
    }

    #[test]
    fn round_trip_preserves_penalty_metadata_and_infinities() {
        let mut traj = TrajectoryRecord {
            scheme: Scheme::PenaltyEuler,
            dt: 0.1,
            record_every: 3,
            contact_tolerance: 1e-6,
            penalty_k: Some(100.0),
            frames: vec![Frame {
                step: 0,
                time: 0.0,
                positions: vec![Vec2::new(0.1 + 0.2, -1.0 / 3.0)],
                boundary_flags: vec![true],
                energy: f64::INFINITY,
                min_separation: f64::INFINITY,
            }],
            aborted: Some("energy overflow".into()),
        };
        traj.frames.push(Frame {
            step: 3,
            time: 0.3,
            positions: vec![Vec2::new(f64::MIN_POSITIVE, 1e300)],
            boundary_flags: vec![false],
            energy: -2.5e-17,
            min_separation: f64::INFINITY,
        });
        let dir = tempfile::tempdir().unwrap();
        write_trajectory(&traj, dir.path()).unwrap();
        let read = read_trajectory(dir.path()).unwrap();
        assert_eq!(read, traj);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("meta.json"),
            r#"{"scheme":"projected_rk4","dt":0.5,"record_every":1,"contact_tolerance":1e-6}"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("trajectory.csv"),
            "frame,t,particle,x,y,on_boundary\n0,0,0,zzz,0,0\n",
        )
        .unwrap();
        std::fs::write(dir.path().join("summary.csv"), "frame,t,energy,min_separation\n").unwrap();
        assert!(matches!(
            read_trajectory(dir.path()),
            Err(ScenarioError::MalformedTrajectory(_))
        ));
    }
}
