//! Time integration of the confined particle system.
//!
//! Two schemes are provided:
//!
//! * `projected_rk4` — classical RK4 on the raw (unprojected) force field,
//!   followed by mapping every particle that left the domain back to its
//!   closest boundary point;
//! * `penalty_euler` — explicit Euler on the penalized right-hand side
//!   `F_i - k d grad d(x_i)`, which lets particles penetrate up to
//!   `|F|_inf / k` instead of enforcing the constraint exactly.

use crate::energy::{min_separation, EnergyError, EnergyModel};
use crate::geometry::{DomainGeometry, GeometryError};
use crate::vec2::Vec2;
use thiserror::Error;

/// Stability cap for the stiff penalty term: require `dt * k <= theta`.
pub const PENALTY_STABILITY_FACTOR: f64 = 0.5;
/// Confinement tolerance after projection.
pub const POST_PROJECTION_TOL: f64 = 1e-9;
/// Default tolerance for flagging a particle as on-boundary.
pub const CONTACT_FLAG_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("closest-point projection failed for particle {particle} at step {step}")]
    ProjectionFailed { particle: usize, step: usize },
    #[error("penalty step dt*k = {product} exceeds the stability factor {max}")]
    UnstablePenalty { product: f64, max: f64 },
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ProjectedRk4,
    PenaltyEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    #[serde(default)]
    pub penalty_k: Option<f64>,
    #[serde(default = "default_contact_tolerance")]
    pub contact_tolerance: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_contact_tolerance() -> f64 {
    CONTACT_FLAG_TOL
}

fn default_record_every() -> usize {
    1
}

impl IntegratorConfig {
    pub fn projected_rk4(dt: f64) -> Self {
        IntegratorConfig {
            scheme: Scheme::ProjectedRk4,
            dt,
            penalty_k: None,
            contact_tolerance: CONTACT_FLAG_TOL,
            record_every: 1,
        }
    }

    pub fn penalty_euler(dt: f64, k: f64) -> Self {
        IntegratorConfig {
            scheme: Scheme::PenaltyEuler,
            dt,
            penalty_k: Some(k),
            contact_tolerance: CONTACT_FLAG_TOL,
            record_every: 1,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.dt > 0.0) {
            return Err(DynamicsError::InvalidConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(DynamicsError::InvalidConfig(
                "record_every must be at least 1".into(),
            ));
        }
        if self.scheme == Scheme::PenaltyEuler {
            let k = self.penalty_k.ok_or_else(|| {
                DynamicsError::InvalidConfig("penalty scheme requires penalty_k".into())
            })?;
            if !(k > 0.0) {
                return Err(DynamicsError::InvalidConfig(format!(
                    "penalty_k must be positive, got {k}"
                )));
            }
            let product = self.dt * k;
            if product > PENALTY_STABILITY_FACTOR {
                return Err(DynamicsError::UnstablePenalty {
                    product,
                    max: PENALTY_STABILITY_FACTOR,
                });
            }
        }
        Ok(())
    }
}

/// Time-stamped particle configuration with boundary-contact flags.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub time: f64,
    pub positions: Vec<Vec2>,
    pub boundary_flags: Vec<bool>,
}

impl SystemState {
    /// Initial state: flags computed from the geometry at `t = 0`.
    pub fn initial(
        domain: &DomainGeometry,
        positions: Vec<Vec2>,
        contact_tol: f64,
    ) -> Result<Self, GeometryError> {
        let mut flags = Vec::with_capacity(positions.len());
        for &x in &positions {
            flags.push(domain.signed_distance(x)?.abs() <= contact_tol);
        }
        Ok(SystemState {
            time: 0.0,
            positions,
            boundary_flags: flags,
        })
    }
}

/// One recorded trajectory frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub step: usize,
    pub time: f64,
    pub positions: Vec<Vec2>,
    pub boundary_flags: Vec<bool>,
    /// Energy of the frame; infinite when a coincident pair occurred.
    pub energy: f64,
    pub min_separation: f64,
}

/// Recorded trajectory: frames plus the integrator settings that produced
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub scheme: Scheme,
    pub dt: f64,
    pub record_every: usize,
    pub contact_tolerance: f64,
    pub penalty_k: Option<f64>,
    pub frames: Vec<Frame>,
    /// Set when the run aborted early; the last valid frame is retained.
    pub aborted: Option<String>,
}

impl TrajectoryRecord {
    pub fn particle_count(&self) -> usize {
        self.frames.first().map_or(0, |f| f.positions.len())
    }
}

/// One-sided projection of a force at a boundary point: removes the outward
/// normal component only when the particle sits on the boundary and the
/// force points outward.
pub fn one_sided_projection(
    domain: &DomainGeometry,
    x: Vec2,
    f: Vec2,
    contact_tol: f64,
) -> Result<Vec2, GeometryError> {
    let q = domain.boundary_query(x)?;
    if q.signed_distance.abs() <= contact_tol {
        let fn_ = f.dot(q.normal);
        if fn_ > 0.0 {
            return Ok(f - q.normal * fn_);
        }
    }
    Ok(f)
}

/// Projected velocity field `H_i = P(x_i, F_i(X))`.
pub fn projected_rhs(
    domain: &DomainGeometry,
    model: &EnergyModel,
    positions: &[Vec2],
    contact_tol: f64,
) -> Result<Vec<Vec2>, DynamicsError> {
    let mut out = Vec::with_capacity(positions.len());
    for i in 0..positions.len() {
        let f = model.force(i, positions)?;
        out.push(one_sided_projection(domain, positions[i], f, contact_tol)?);
    }
    Ok(out)
}

/// Penalty velocity field `F_i - k d grad d(x_i)`. Errors when a particle
/// leaves the trusted tube.
pub fn penalty_rhs(
    domain: &DomainGeometry,
    model: &EnergyModel,
    k: f64,
    positions: &[Vec2],
) -> Result<Vec<Vec2>, DynamicsError> {
    let mut out = Vec::with_capacity(positions.len());
    for i in 0..positions.len() {
        let f = model.force(i, positions)?;
        out.push(f - domain.d_grad_d(positions[i])? * k);
    }
    Ok(out)
}

/// One classical RK4 step on the raw forces, then every particle outside the
/// domain is mapped to its closest boundary point. Forces at intermediate
/// stage points are evaluated by their formulas even slightly outside the
/// domain.
pub fn step_projected_rk4(
    domain: &DomainGeometry,
    model: &EnergyModel,
    state: &SystemState,
    dt: f64,
    contact_tol: f64,
) -> Result<SystemState, DynamicsError> {
    let n = state.positions.len();
    let advance = |base: &[Vec2], vel: &[Vec2], h: f64| -> Vec<Vec2> {
        base.iter()
            .zip(vel)
            .map(|(&x, &v)| x + v * h)
            .collect()
    };
    let k1 = model.forces(&state.positions)?;
    let k2 = model.forces(&advance(&state.positions, &k1, dt / 2.0))?;
    let k3 = model.forces(&advance(&state.positions, &k2, dt / 2.0))?;
    let k4 = model.forces(&advance(&state.positions, &k3, dt))?;

    let mut positions = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for i in 0..n {
        let x = state.positions[i]
            + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        let q = domain.boundary_query(x)?;
        if q.signed_distance > 0.0 {
            if !q.converged {
                return Err(DynamicsError::ProjectionFailed {
                    particle: i,
                    step: 0,
                });
            }
            positions.push(q.foot_point);
            flags.push(true);
        } else {
            positions.push(x);
            flags.push(q.signed_distance.abs() <= contact_tol);
        }
    }
    Ok(SystemState {
        time: state.time + dt,
        positions,
        boundary_flags: flags,
    })
}

/// One explicit Euler step on the penalty right-hand side; no projection.
pub fn step_penalty_euler(
    domain: &DomainGeometry,
    model: &EnergyModel,
    state: &SystemState,
    dt: f64,
    k: f64,
    contact_tol: f64,
) -> Result<SystemState, DynamicsError> {
    if dt * k > PENALTY_STABILITY_FACTOR {
        return Err(DynamicsError::UnstablePenalty {
            product: dt * k,
            max: PENALTY_STABILITY_FACTOR,
        });
    }
    let rhs = penalty_rhs(domain, model, k, &state.positions)?;
    let mut positions = Vec::with_capacity(state.positions.len());
    let mut flags = Vec::with_capacity(state.positions.len());
    for (i, &v) in rhs.iter().enumerate() {
        let x = state.positions[i] + v * dt;
        positions.push(x);
        flags.push(domain.signed_distance(x)?.abs() <= contact_tol);
    }
    Ok(SystemState {
        time: state.time + dt,
        positions,
        boundary_flags: flags,
    })
}

fn record_frame(step: usize, state: &SystemState, model: &EnergyModel) -> Frame {
    let energy = match model.energy(&state.positions) {
        Ok(e) => e,
        Err(EnergyError::CoincidentPair { .. }) => f64::INFINITY,
        Err(_) => f64::NAN,
    };
    Frame {
        step,
        time: state.time,
        positions: state.positions.clone(),
        boundary_flags: state.boundary_flags.clone(),
        energy,
        min_separation: min_separation(&state.positions),
    }
}

/// Runs the configured integrator from `initial_positions` up to time `T`,
/// recording a frame every `record_every` steps (plus the initial and final
/// states). Step errors abort the run with the frames so far retained.
pub fn simulate(
    domain: &DomainGeometry,
    model: &EnergyModel,
    initial_positions: Vec<Vec2>,
    config: &IntegratorConfig,
    total_time: f64,
) -> Result<TrajectoryRecord, DynamicsError> {
    config.validate()?;
    let steps = (total_time / config.dt).round() as usize;
    let mut state = SystemState::initial(domain, initial_positions, config.contact_tolerance)?;
    let mut frames = vec![record_frame(0, &state, model)];
    let mut aborted = None;

    for step in 1..=steps {
        let next = match config.scheme {
            Scheme::ProjectedRk4 => {
                step_projected_rk4(domain, model, &state, config.dt, config.contact_tolerance)
            }
            Scheme::PenaltyEuler => step_penalty_euler(
                domain,
                model,
                &state,
                config.dt,
                config.penalty_k.expect("validated"),
                config.contact_tolerance,
            ),
        };
        match next {
            Ok(s) => state = s,
            Err(e) => {
                let e = match e {
                    DynamicsError::ProjectionFailed { particle, .. } => {
                        DynamicsError::ProjectionFailed { particle, step }
                    }
                    other => other,
                };
                aborted = Some(e.to_string());
                break;
            }
        }
        if step % config.record_every == 0 || step == steps {
            frames.push(record_frame(step, &state, model));
        }
    }

    Ok(TrajectoryRecord {
        scheme: config.scheme,
        dt: config.dt,
        record_every: config.record_every,
        contact_tolerance: config.contact_tolerance,
        penalty_k: config.penalty_k,
        frames,
        aborted,
    })
}

/// Consistency diagnostic for projected-mode trajectories: the maximum over
/// particles and frames of `|x_i(t) - x_i(0) - int_0^t H_i ds|`, with the
/// integral computed by trapezoidal quadrature over the recorded frames.
pub fn mild_solution_residual(
    trajectory: &TrajectoryRecord,
    domain: &DomainGeometry,
    model: &EnergyModel,
) -> Result<f64, DynamicsError> {
    let n = trajectory.particle_count();
    if trajectory.frames.len() < 2 || n == 0 {
        return Ok(0.0);
    }
    let tol = trajectory.contact_tolerance;
    let mut prev_h = projected_rhs(domain, model, &trajectory.frames[0].positions, tol)?;
    let mut prev_t = trajectory.frames[0].time;
    let x0 = trajectory.frames[0].positions.clone();
    let mut integral = vec![Vec2::ZERO; n];
    let mut residual = 0.0f64;
    for frame in &trajectory.frames[1..] {
        let h = projected_rhs(domain, model, &frame.positions, tol)?;
        let dt = frame.time - prev_t;
        for i in 0..n {
            integral[i] += (prev_h[i] + h[i]) * (dt / 2.0);
            let err = (frame.positions[i] - x0[i] - integral[i]).norm();
            residual = residual.max(err);
        }
        prev_h = h;
        prev_t = frame.time;
    }
    Ok(residual)
}
