//! Numerical pass/fail checks of the flow's proved properties over recorded
//! trajectories: energy decay, minimal separation, boundary sign and
//! detachment tangency, penalty bounds, penalty-to-projected convergence and
//! Gronwall-type stability.
//!
//! Every check is a pure function of (trajectory, model, domain) and may run
//! concurrently over a shared immutable trajectory.

use crate::dynamics::{simulate, DynamicsError, IntegratorConfig, TrajectoryRecord};
use crate::energy::{separation_threshold, EnergyModel};
use crate::geometry::DomainGeometry;
use crate::vec2::Vec2;
use std::fmt;

/// Default per-step relative tolerance for the energy-decay check; the final
/// projection can raise the energy at machine scale.
pub const ENERGY_DECAY_TOL: f64 = 1e-8;
/// Loose relative tolerance on `|F . nu|` at detach events: the discrete
/// scheme localizes events only to O(dt).
pub const DETACH_TANGENCY_REL_TOL: f64 = 0.1;
/// Tolerance on `F . nu >= 0` at persistent boundary frames.
pub const BOUNDARY_SIGN_TOL: f64 = 1e-6;

/// Outcome of one diagnostic check.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticReport {
    pub name: String,
    pub pass: bool,
    /// The check did not apply (e.g. separation bound with a signed W).
    pub skipped: bool,
    /// Worst measured value, in the direction the check bounds.
    pub measured: f64,
    pub threshold: f64,
    pub offending_frame: Option<usize>,
    pub offending_particle: Option<usize>,
}

impl DiagnosticReport {
    fn skipped_report(name: &str) -> Self {
        DiagnosticReport {
            name: name.into(),
            pass: true,
            skipped: true,
            measured: 0.0,
            threshold: 0.0,
            offending_frame: None,
            offending_particle: None,
        }
    }
}

impl fmt::Display for DiagnosticReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.skipped {
            "SKIP"
        } else if self.pass {
            "PASS"
        } else {
            "FAIL"
        };
        write!(
            f,
            "{} {}: measured={} threshold={}",
            status, self.name, self.measured, self.threshold
        )?;
        if let Some(fr) = self.offending_frame {
            write!(f, " frame={fr}")?;
        }
        if let Some(p) = self.offending_particle {
            write!(f, " particle={p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    Attach,
    Detach,
}

/// A boundary-flag transition of one particle, with the normal force
/// component at the boundary-side frame.
#[derive(Debug, Clone, Copy)]
pub struct ContactEvent {
    pub particle: usize,
    pub frame: usize,
    pub kind: ContactKind,
    pub normal_force_component: f64,
}

/// Passes iff the recorded energy is non-increasing up to a per-step
/// relative tolerance; reports the largest violation.
pub fn check_energy_decay(trajectory: &TrajectoryRecord, tolerance: f64) -> DiagnosticReport {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_frame = None;
    for pair in trajectory.frames.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let rel_increase = (next.energy - prev.energy) / prev.energy.abs().max(1.0);
        if rel_increase > worst {
            worst = rel_increase;
            worst_frame = Some(next.step);
        }
    }
    if !worst.is_finite() && trajectory.frames.len() < 2 {
        worst = 0.0;
        worst_frame = None;
    }
    DiagnosticReport {
        name: "energy_decay".into(),
        pass: worst <= tolerance,
        skipped: false,
        measured: worst,
        threshold: tolerance,
        offending_frame: if worst > tolerance { worst_frame } else { None },
        offending_particle: None,
    }
}

/// Passes iff every frame's minimum pairwise distance is at least the
/// separation threshold implied by its energy. An exact algebraic
/// consequence of the energy definition, so a failure indicates a bug or
/// broken decay. Skipped (and vacuously passing) when the external
/// potential takes negative values or the interaction is regularized.
pub fn check_separation(trajectory: &TrajectoryRecord, model: &EnergyModel) -> DiagnosticReport {
    if !model.external.is_nonnegative() || !model.interaction.is_singular() {
        return DiagnosticReport::skipped_report("separation_bound");
    }
    let v = model.interaction.base();
    let n = model.n;
    let mut worst_margin = f64::INFINITY;
    let mut worst_frame = None;
    for frame in &trajectory.frames {
        if !frame.energy.is_finite() || frame.energy <= 0.0 {
            // Infinite energy means a coincident pair: an outright failure.
            if frame.energy.is_infinite() {
                return DiagnosticReport {
                    name: "separation_bound".into(),
                    pass: false,
                    skipped: false,
                    measured: f64::NEG_INFINITY,
                    threshold: 0.0,
                    offending_frame: Some(frame.step),
                    offending_particle: None,
                };
            }
            continue;
        }
        let h = match separation_threshold(&v, n, frame.energy) {
            Ok(h) => h,
            Err(_) => continue,
        };
        let margin = frame.min_separation - h;
        if margin < worst_margin {
            worst_margin = margin;
            worst_frame = Some(frame.step);
        }
    }
    DiagnosticReport {
        name: "separation_bound".into(),
        pass: worst_margin >= 0.0,
        skipped: false,
        measured: worst_margin,
        threshold: 0.0,
        offending_frame: if worst_margin < 0.0 { worst_frame } else { None },
        offending_particle: None,
    }
}

/// One event per boundary-flag transition. Attach events carry `F . nu` at
/// the first on-boundary frame; detach events at the last on-boundary frame.
pub fn detect_contact_events(
    trajectory: &TrajectoryRecord,
    domain: &DomainGeometry,
    model: &EnergyModel,
) -> Result<Vec<ContactEvent>, DynamicsError> {
    let mut events = Vec::new();
    let frames = &trajectory.frames;
    for w in frames.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        for i in 0..prev.boundary_flags.len() {
            let (was, is) = (prev.boundary_flags[i], next.boundary_flags[i]);
            if was == is {
                continue;
            }
            // Boundary-side frame: the one where the particle is flagged.
            let (kind, frame) = if is {
                (ContactKind::Attach, next)
            } else {
                (ContactKind::Detach, prev)
            };
            let f = model.force(i, &frame.positions)?;
            let nu = domain.boundary_query(frame.positions[i])?.normal;
            events.push(ContactEvent {
                particle: i,
                frame: frame.step,
                kind,
                normal_force_component: f.dot(nu),
            });
        }
    }
    Ok(events)
}

/// At every frame where a particle is flagged on-boundary and remains
/// on-boundary in the next frame, the force must not point strictly inward:
/// `F . nu >= -tolerance`.
pub fn check_boundary_sign(
    trajectory: &TrajectoryRecord,
    domain: &DomainGeometry,
    model: &EnergyModel,
    tolerance: f64,
) -> Result<DiagnosticReport, DynamicsError> {
    let mut worst = f64::INFINITY;
    let mut worst_frame = None;
    let mut worst_particle = None;
    for w in trajectory.frames.windows(2) {
        let (frame, next) = (&w[0], &w[1]);
        for i in 0..frame.boundary_flags.len() {
            if !(frame.boundary_flags[i] && next.boundary_flags[i]) {
                continue;
            }
            let f = model.force(i, &frame.positions)?;
            let nu = domain.boundary_query(frame.positions[i])?.normal;
            let fn_ = f.dot(nu);
            if fn_ < worst {
                worst = fn_;
                worst_frame = Some(frame.step);
                worst_particle = Some(i);
            }
        }
    }
    let vacuous = worst == f64::INFINITY;
    let pass = vacuous || worst >= -tolerance;
    Ok(DiagnosticReport {
        name: "boundary_sign".into(),
        pass,
        skipped: false,
        measured: if vacuous { 0.0 } else { worst },
        threshold: -tolerance,
        offending_frame: if pass { None } else { worst_frame },
        offending_particle: if pass { None } else { worst_particle },
    })
}

/// At every detach event the force must be close to tangential:
/// `|F . nu| <= rel_tol * |F|`.
pub fn check_detachment_tangency(
    trajectory: &TrajectoryRecord,
    domain: &DomainGeometry,
    model: &EnergyModel,
    rel_tol: f64,
) -> Result<DiagnosticReport, DynamicsError> {
    let events = detect_contact_events(trajectory, domain, model)?;
    let mut worst = 0.0f64;
    let mut worst_frame = None;
    let mut worst_particle = None;
    for ev in events.iter().filter(|e| e.kind == ContactKind::Detach) {
        let frame = trajectory
            .frames
            .iter()
            .find(|f| f.step == ev.frame)
            .expect("event frame recorded");
        let f = model.force(ev.particle, &frame.positions)?;
        let ratio = ev.normal_force_component.abs() / f.norm().max(f64::MIN_POSITIVE);
        if ratio > worst {
            worst = ratio;
            worst_frame = Some(ev.frame);
            worst_particle = Some(ev.particle);
        }
    }
    let pass = worst <= rel_tol;
    Ok(DiagnosticReport {
        name: "detachment_tangency".into(),
        pass,
        skipped: false,
        measured: worst,
        threshold: rel_tol,
        offending_frame: if pass { None } else { worst_frame },
        offending_particle: if pass { None } else { worst_particle },
    })
}

/// Maximum observed per-particle force norm across all recorded frames;
/// used as the running estimate of `|F|_inf`.
pub fn observed_max_force(
    trajectory: &TrajectoryRecord,
    model: &EnergyModel,
) -> Result<f64, DynamicsError> {
    let mut max_f = 0.0f64;
    for frame in &trajectory.frames {
        for i in 0..frame.positions.len() {
            max_f = max_f.max(model.force(i, &frame.positions)?.norm());
        }
    }
    Ok(max_f)
}

/// Penalty-mode bound: max penetration depth `d(x_i)` stays below
/// `|F|_inf / k * (1 + rel_tol)`, with `|F|_inf` estimated from the
/// trajectory itself.
pub fn check_penalty_penetration(
    trajectory: &TrajectoryRecord,
    domain: &DomainGeometry,
    model: &EnergyModel,
    rel_tol: f64,
) -> Result<DiagnosticReport, DynamicsError> {
    let k = trajectory.penalty_k.ok_or_else(|| {
        DynamicsError::InvalidConfig("penetration check applies to penalty trajectories".into())
    })?;
    let max_f = observed_max_force(trajectory, model)?;
    let mut worst = 0.0f64;
    let mut worst_frame = None;
    let mut worst_particle = None;
    for frame in &trajectory.frames {
        for (i, &x) in frame.positions.iter().enumerate() {
            let d = domain.signed_distance(x)?.max(0.0);
            if d > worst {
                worst = d;
                worst_frame = Some(frame.step);
                worst_particle = Some(i);
            }
        }
    }
    let threshold = max_f / k * (1.0 + rel_tol);
    let pass = worst <= threshold;
    Ok(DiagnosticReport {
        name: "penalty_penetration".into(),
        pass,
        skipped: false,
        measured: worst,
        threshold,
        offending_frame: if pass { None } else { worst_frame },
        offending_particle: if pass { None } else { worst_particle },
    })
}

/// Penalty-mode bound: finite-difference frame speeds stay below
/// `2 |F|_inf * (1 + rel_tol)`.
pub fn velocity_bound_check(
    trajectory: &TrajectoryRecord,
    model: &EnergyModel,
    rel_tol: f64,
) -> Result<DiagnosticReport, DynamicsError> {
    let max_f = observed_max_force(trajectory, model)?;
    let mut worst = 0.0f64;
    let mut worst_frame = None;
    let mut worst_particle = None;
    for w in trajectory.frames.windows(2) {
        let dt = w[1].time - w[0].time;
        for i in 0..w[0].positions.len() {
            let speed = (w[1].positions[i] - w[0].positions[i]).norm() / dt;
            if speed > worst {
                worst = speed;
                worst_frame = Some(w[1].step);
                worst_particle = Some(i);
            }
        }
    }
    let threshold = 2.0 * max_f * (1.0 + rel_tol);
    let pass = worst <= threshold;
    Ok(DiagnosticReport {
        name: "velocity_bound".into(),
        pass,
        skipped: false,
        measured: worst,
        threshold,
        offending_frame: if pass { None } else { worst_frame },
        offending_particle: if pass { None } else { worst_particle },
    })
}

/// Runs the penalty solver for each stiffness in `ks` and reports the
/// sup-norm distance (over matching frames and particles) to a projected-RK4
/// reference computed at the same step size.
pub fn penalty_convergence_study(
    domain: &DomainGeometry,
    model: &EnergyModel,
    initial: &[Vec2],
    ks: &[f64],
    dt: f64,
    total_time: f64,
) -> Result<Vec<(f64, f64)>, DynamicsError> {
    let steps = (total_time / dt).round() as usize;
    let record_every = (steps / 2000).max(1);
    let mut ref_cfg = IntegratorConfig::projected_rk4(dt);
    ref_cfg.record_every = record_every;
    let reference = simulate(domain, model, initial.to_vec(), &ref_cfg, total_time)?;
    let mut table = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut cfg = IntegratorConfig::penalty_euler(dt, k);
        cfg.record_every = record_every;
        let traj = simulate(domain, model, initial.to_vec(), &cfg, total_time)?;
        let mut sup = 0.0f64;
        for (a, b) in reference.frames.iter().zip(&traj.frames) {
            debug_assert_eq!(a.step, b.step);
            for (xa, xb) in a.positions.iter().zip(&b.positions) {
                sup = sup.max(xa.distance(*xb));
            }
        }
        table.push((k, sup));
    }
    Ok(table)
}

/// Twin-trajectory Gronwall check: runs from `initial` and a deterministic
/// perturbation of max-norm `delta`, fits an exponential rate on the first
/// 10% of frames and passes iff the distance stays below `delta * exp(C t)`
/// at every frame. Reports the fitted rate as `measured`.
pub fn stability_check(
    domain: &DomainGeometry,
    model: &EnergyModel,
    initial: &[Vec2],
    delta: f64,
    config: &IntegratorConfig,
    total_time: f64,
) -> Result<DiagnosticReport, DynamicsError> {
    let base = simulate(domain, model, initial.to_vec(), config, total_time)?;
    let perturbed_init: Vec<Vec2> = initial
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let th = 2.399963229728653 * i as f64; // golden-angle spread
            x + Vec2::new(th.cos(), th.sin()) * delta
        })
        .collect();
    let perturbed = simulate(domain, model, perturbed_init, config, total_time)?;

    let dist_at = |a: &crate::dynamics::Frame, b: &crate::dynamics::Frame| -> f64 {
        a.positions
            .iter()
            .zip(&b.positions)
            .map(|(x, y)| x.distance(*y))
            .fold(0.0, f64::max)
    };

    let frames: Vec<(f64, f64)> = base
        .frames
        .iter()
        .zip(&perturbed.frames)
        .map(|(a, b)| (a.time, dist_at(a, b)))
        .collect();

    if delta == 0.0 {
        let max_dist = frames.iter().map(|&(_, d)| d).fold(0.0, f64::max);
        return Ok(DiagnosticReport {
            name: "gronwall_stability".into(),
            pass: max_dist == 0.0,
            skipped: false,
            measured: 0.0,
            threshold: 0.0,
            offending_frame: None,
            offending_particle: None,
        });
    }

    // Fit the rate on the first 10% of frames (at least one step in).
    let fit_count = (frames.len() / 10).max(2).min(frames.len());
    let mut rate: f64 = 0.0;
    for &(t, d) in frames.iter().take(fit_count).skip(1) {
        if t > 0.0 && d > 0.0 {
            rate = rate.max((d / delta).ln() / t);
        }
    }
    let mut pass = true;
    let mut worst_frame = None;
    for (idx, &(t, d)) in frames.iter().enumerate() {
        let bound = delta * (rate * t).exp() * (1.0 + 1e-9);
        if d > bound {
            pass = false;
            worst_frame = Some(base.frames[idx].step);
            break;
        }
    }
    Ok(DiagnosticReport {
        name: "gronwall_stability".into(),
        pass,
        skipped: false,
        measured: rate,
        threshold: rate,
        offending_frame: worst_frame,
        offending_particle: None,
    })
}
