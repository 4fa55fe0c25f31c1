//! Deterministic SVG rendering of a trajectory frame.
//!
//! The domain boundary is extracted from the level set by marching squares
//! on a fixed grid; particles are drawn as filled circles colored by the
//! scenario's color rule evaluated at the initial positions.

use super::{DomainSpec, ScenarioConfig, ScenarioError};
use crate::dynamics::TrajectoryRecord;
use crate::geometry::DomainGeometry;
use crate::vec2::Vec2;
use std::fmt::Write as _;
use std::path::Path;

const GRID: usize = 256;
const SVG_WIDTH: f64 = 800.0;

#[derive(Debug, Clone, Copy)]
struct Bbox {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Bbox {
    fn pad(mut self, margin: f64) -> Bbox {
        self.x0 -= margin;
        self.x1 += margin;
        self.y0 -= margin;
        self.y1 += margin;
        self
    }

    fn include(&mut self, p: Vec2) {
        self.x0 = self.x0.min(p.x);
        self.x1 = self.x1.max(p.x);
        self.y0 = self.y0.min(p.y);
        self.y1 = self.y1.max(p.y);
    }
}

/// Finite bounding box of the spec shape; strips are unbounded in x and
/// report infinite x extents, clamped later against the particle extent.
fn spec_bbox(spec: &DomainSpec) -> Bbox {
    match spec {
        DomainSpec::Disk { center, radius } => Bbox {
            x0: center[0] - radius,
            x1: center[0] + radius,
            y0: center[1] - radius,
            y1: center[1] + radius,
        },
        DomainSpec::Strip { y_min, y_max } => Bbox {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: *y_min,
            y1: *y_max,
        },
        DomainSpec::Union { a, b, .. } | DomainSpec::Intersection { a, b, .. } => {
            let (ba, bb) = (spec_bbox(a), spec_bbox(b));
            Bbox {
                x0: ba.x0.min(bb.x0),
                x1: ba.x1.max(bb.x1),
                y0: ba.y0.min(bb.y0),
                y1: ba.y1.max(bb.y1),
            }
        }
        DomainSpec::Complement { a } => spec_bbox(a),
    }
}

fn view_box(config: &ScenarioConfig, positions: &[Vec2]) -> Bbox {
    let mut bb = spec_bbox(&config.domain);
    for &p in positions {
        bb.include(p);
    }
    if !bb.x0.is_finite() || !bb.x1.is_finite() || bb.x1 <= bb.x0 {
        bb.x0 = -2.0;
        bb.x1 = 2.0;
    }
    if !bb.y0.is_finite() || !bb.y1.is_finite() || bb.y1 <= bb.y0 {
        bb.y0 = -2.0;
        bb.y1 = 2.0;
    }
    let margin = 0.05 * (bb.x1 - bb.x0).max(bb.y1 - bb.y0);
    bb.pad(margin)
}

/// Zero crossings of the level set on the cell grid, as world-space
/// segments. Saddle cells are disambiguated by the sign at the cell center.
fn boundary_segments(domain: &DomainGeometry, bb: Bbox) -> Vec<(Vec2, Vec2)> {
    let mut phi = vec![0.0f64; (GRID + 1) * (GRID + 1)];
    let dx = (bb.x1 - bb.x0) / GRID as f64;
    let dy = (bb.y1 - bb.y0) / GRID as f64;
    for j in 0..=GRID {
        for i in 0..=GRID {
            let p = Vec2::new(bb.x0 + i as f64 * dx, bb.y0 + j as f64 * dy);
            phi[j * (GRID + 1) + i] = domain.level_set(p);
        }
    }
    let at = |i: usize, j: usize| phi[j * (GRID + 1) + i];
    let lerp = |pa: Vec2, va: f64, pb: Vec2, vb: f64| -> Vec2 {
        let t = if va == vb { 0.5 } else { va / (va - vb) };
        pa + (pb - pa) * t.clamp(0.0, 1.0)
    };
    let mut segments = Vec::new();
    for j in 0..GRID {
        for i in 0..GRID {
            let p00 = Vec2::new(bb.x0 + i as f64 * dx, bb.y0 + j as f64 * dy);
            let p10 = Vec2::new(p00.x + dx, p00.y);
            let p01 = Vec2::new(p00.x, p00.y + dy);
            let p11 = Vec2::new(p00.x + dx, p00.y + dy);
            let (v00, v10, v01, v11) = (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1));
            let mut crossings: Vec<Vec2> = Vec::with_capacity(4);
            for &(pa, va, pb, vb) in &[
                (p00, v00, p10, v10),
                (p10, v10, p11, v11),
                (p11, v11, p01, v01),
                (p01, v01, p00, v00),
            ] {
                if (va < 0.0) != (vb < 0.0) {
                    crossings.push(lerp(pa, va, pb, vb));
                }
            }
            match crossings.len() {
                2 => segments.push((crossings[0], crossings[1])),
                4 => {
                    // Saddle: connect crossings so the negative (interior)
                    // region matches the sign at the cell center.
                    let center = domain.level_set(Vec2::new(p00.x + dx / 2.0, p00.y + dy / 2.0));
                    if (center < 0.0) == (v00 < 0.0) {
                        segments.push((crossings[0], crossings[3]));
                        segments.push((crossings[1], crossings[2]));
                    } else {
                        segments.push((crossings[0], crossings[1]));
                        segments.push((crossings[2], crossings[3]));
                    }
                }
                _ => {}
            }
        }
    }
    segments
}

/// Writes one trajectory frame as an SVG file: domain boundary plus
/// particles, red where the scenario color rule applies to the particle's
/// initial position, blue otherwise.
pub fn render_frame(
    config: &ScenarioConfig,
    trajectory: &TrajectoryRecord,
    frame_index: usize,
    path: &Path,
) -> Result<(), ScenarioError> {
    let frame = trajectory.frames.get(frame_index).ok_or_else(|| {
        ScenarioError::InvalidConfig(format!(
            "frame {frame_index} out of range (trajectory has {} frames)",
            trajectory.frames.len()
        ))
    })?;
    let initial = &trajectory.frames[0].positions;
    let domain = config.domain.build()?;
    let bb = view_box(config, &frame.positions);

    let world_w = bb.x1 - bb.x0;
    let world_h = bb.y1 - bb.y0;
    let scale = SVG_WIDTH / world_w;
    let height = world_h * scale;
    // Flip y so the SVG matches mathematical orientation.
    let to_px = |p: Vec2| -> (f64, f64) { ((p.x - bb.x0) * scale, (bb.y1 - p.y) * scale) };

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{height:.2}" viewBox="0 0 {SVG_WIDTH} {height:.2}">"#
    )
    .expect("string write");
    writeln!(
        svg,
        r#"<rect width="100%" height="100%" fill="white"/>"#
    )
    .expect("string write");

    let mut d = String::new();
    for (a, b) in boundary_segments(&domain, bb) {
        let (ax, ay) = to_px(a);
        let (bx, by) = to_px(b);
        write!(d, "M{ax:.2} {ay:.2}L{bx:.2} {by:.2}").expect("string write");
    }
    writeln!(
        svg,
        r#"<path d="{d}" stroke="black" stroke-width="1.5" fill="none"/>"#
    )
    .expect("string write");

    let radius = (0.35 * SVG_WIDTH / (frame.positions.len().max(1) as f64).sqrt() / 4.0)
        .clamp(1.0, 6.0);
    for (i, &p) in frame.positions.iter().enumerate() {
        let color = if initial.get(i).is_some_and(|&x0| config.color_rule.is_red(x0)) {
            "#d62728"
        } else {
            "#1f77b4"
        };
        let (cx, cy) = to_px(p);
        writeln!(
            svg,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{radius:.2}" fill="{color}"/>"#
        )
        .expect("string write");
    }
    writeln!(svg, "</svg>").expect("string write");
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{builtin_scenario, run_scenario};
    use super::*;

    fn small_run(name: &str, n: usize, t: f64) -> (ScenarioConfig, TrajectoryRecord) {
        let mut config = builtin_scenario(name).unwrap();
        config.n = n;
        config.total_time = t;
        let record = run_scenario(&config, None).unwrap();
        (config, record.trajectory)
    }

    #[test]
    fn svg_output_is_deterministic_and_well_formed() {
        let (config, traj) = small_run("circle_case1_desk", 12, 3.0);
        let dir = tempfile::tempdir().unwrap();
        let a_path = dir.path().join("a.svg");
        let b_path = dir.path().join("b.svg");
        render_frame(&config, &traj, traj.frames.len() - 1, &a_path).unwrap();
        render_frame(&config, &traj, traj.frames.len() - 1, &b_path).unwrap();
        let a = std::fs::read_to_string(&a_path).unwrap();
        let b = std::fs::read_to_string(&b_path).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<circle").count(), 12);
        // Case-1 coloring: particles starting inside radius 1/2 are red.
        let reds = traj.frames[0]
            .positions
            .iter()
            .filter(|p| p.norm() < 0.5)
            .count();
        assert_eq!(a.matches("#d62728").count(), reds);
    }

    #[test]
    fn disk_boundary_segments_trace_the_unit_circle() {
        let config = builtin_scenario("circle_case1_desk").unwrap();
        let domain = config.domain.build().unwrap();
        let bb = Bbox {
            x0: -1.2,
            x1: 1.2,
            y0: -1.2,
            y1: 1.2,
        };
        let segments = boundary_segments(&domain, bb);
        assert!(!segments.is_empty());
        let cell = 2.4 / GRID as f64;
        for (a, b) in &segments {
            assert!((a.norm() - 1.0).abs() < cell, "endpoint off circle: {a:?}");
            assert!((b.norm() - 1.0).abs() < cell);
        }
        // Total polyline length approximates the circumference.
        let len: f64 = segments.iter().map(|(a, b)| a.distance(*b)).sum();
        assert!((len - 2.0 * std::f64::consts::PI).abs() < 0.05);
    }

    #[test]
    fn out_of_range_frame_is_an_error() {
        let (config, traj) = small_run("circle_case1_desk", 5, 1.0);
        let dir = tempfile::tempdir().unwrap();
        assert!(render_frame(&config, &traj, 10_000, &dir.path().join("x.svg")).is_err());
    }
}
