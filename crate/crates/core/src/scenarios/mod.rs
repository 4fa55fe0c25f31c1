//! Scenario configuration, initial-condition generation, built-in
//! experiments, persistence and rendering.
//!
//! A scenario is described by a single JSON config file (domain, potentials,
//! integrator, initial condition, total time); `run_scenario` composes
//! sampling, simulation and the diagnostics suite and writes all outputs
//! into one directory.

mod io;
mod render;

pub use io::{read_trajectory, write_trajectory};
pub use render::render_frame;

use crate::diagnostics::{
    check_boundary_sign, check_detachment_tangency, check_energy_decay, check_penalty_penetration,
    check_separation, velocity_bound_check, DiagnosticReport, BOUNDARY_SIGN_TOL,
    DETACH_TANGENCY_REL_TOL, ENERGY_DECAY_TOL,
};
use crate::dynamics::{simulate, DynamicsError, IntegratorConfig, Scheme, TrajectoryRecord};
use crate::energy::{
    regularize, EnergyError, EnergyModel, ExternalPotential, InteractionPotential, PairPotential,
};
use crate::geometry::{
    complement, make_disk, make_strip, smooth_intersection, smooth_union, DomainGeometry,
    GeometryError,
};
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Maximum admissible packing fraction for rejection sampling.
pub const MAX_PACKING_FRACTION: f64 = 0.55;
/// Rejection sampling budget: total draws allowed per requested point.
pub const REJECTION_BUDGET_PER_POINT: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("packing fraction {fraction:.3} exceeds {max}: reduce n or min_separation")]
    PackingTooDense { fraction: f64, max: f64 },
    #[error("rejection budget exhausted after placing {placed} of {requested} points; reduce n or min_separation")]
    RejectionBudgetExceeded { placed: usize, requested: usize },
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("unknown builtin scenario '{0}'")]
    UnknownScenario(String),
    #[error("trajectory file malformed: {0}")]
    MalformedTrajectory(String),
    #[error("regularized interaction requires a cutoff")]
    MissingCutoff,
}

/// Domain sub-schema of the scenario config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Strip {
        y_min: f64,
        y_max: f64,
    },
    Union {
        a: Box<DomainSpec>,
        b: Box<DomainSpec>,
        blend_radius: f64,
    },
    Intersection {
        a: Box<DomainSpec>,
        b: Box<DomainSpec>,
        blend_radius: f64,
    },
    Complement {
        a: Box<DomainSpec>,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<DomainGeometry, GeometryError> {
        match self {
            DomainSpec::Disk { center, radius } => {
                Ok(make_disk(Vec2::new(center[0], center[1]), *radius))
            }
            DomainSpec::Strip { y_min, y_max } => Ok(make_strip(*y_min, *y_max)),
            DomainSpec::Union { a, b, blend_radius } => {
                smooth_union(a.build()?, b.build()?, *blend_radius)
            }
            DomainSpec::Intersection { a, b, blend_radius } => {
                smooth_intersection(a.build()?, b.build()?, *blend_radius)
            }
            DomainSpec::Complement { a } => Ok(complement(a.build()?)),
        }
    }
}

/// Interaction sub-schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InteractionSpec {
    InversePower {
        exponent: f64,
        #[serde(default)]
        regularized: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
    },
}

/// External potential sub-schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExternalSpec {
    None,
    Linear { coefficients: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub interaction: InteractionSpec,
    pub external: ExternalSpec,
}

impl PotentialSpec {
    pub fn build(&self, n: usize) -> Result<EnergyModel, ScenarioError> {
        let interaction = match &self.interaction {
            InteractionSpec::InversePower {
                exponent,
                regularized,
                cutoff,
            } => {
                let base = InteractionPotential::inverse_power(*exponent);
                if *regularized {
                    let h = cutoff.ok_or(ScenarioError::MissingCutoff)?;
                    PairPotential::Regularized(regularize(base, h)?)
                } else {
                    PairPotential::Singular(base)
                }
            }
        };
        let external = match &self.external {
            ExternalSpec::None => ExternalPotential::Zero,
            ExternalSpec::Linear { coefficients } => {
                ExternalPotential::Linear(Vec2::new(coefficients[0], coefficients[1]))
            }
        };
        Ok(EnergyModel::new(interaction, external, n))
    }
}

/// Sampling region for random initial conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionSpec {
    Disk { center: [f64; 2], radius: f64 },
    Rect { x_range: [f64; 2], y_range: [f64; 2] },
}

impl RegionSpec {
    pub fn area(&self) -> f64 {
        match self {
            RegionSpec::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            RegionSpec::Rect { x_range, y_range } => {
                (x_range[1] - x_range[0]) * (y_range[1] - y_range[0])
            }
        }
    }

    fn contains(&self, p: Vec2) -> bool {
        match self {
            RegionSpec::Disk { center, radius } => {
                p.distance(Vec2::new(center[0], center[1])) < *radius
            }
            RegionSpec::Rect { x_range, y_range } => {
                p.x > x_range[0] && p.x < x_range[1] && p.y > y_range[0] && p.y < y_range[1]
            }
        }
    }

    fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            RegionSpec::Disk { center, radius } => (
                [center[0] - radius, center[0] + radius],
                [center[1] - radius, center[1] + radius],
            ),
            RegionSpec::Rect { x_range, y_range } => (*x_range, *y_range),
        }
    }
}

/// Initial-condition sub-schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialConditionSpec {
    UniformRejection {
        region: RegionSpec,
        min_separation: f64,
        seed: u64,
    },
    Grid {
        x_range: [f64; 2],
        y_range: [f64; 2],
    },
}

/// Particle coloring rule, evaluated at the initial positions: particles for
/// which the predicate holds are drawn red, the rest blue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColorRule {
    #[default]
    None,
    InsideDisk {
        center: [f64; 2],
        radius: f64,
    },
    LeftOf {
        x: f64,
    },
}

impl ColorRule {
    pub fn is_red(&self, initial: Vec2) -> bool {
        match self {
            ColorRule::None => false,
            ColorRule::InsideDisk { center, radius } => {
                initial.distance(Vec2::new(center[0], center[1])) < *radius
            }
            ColorRule::LeftOf { x } => initial.x < *x,
        }
    }
}

/// Full scenario description, serializable as a single JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub domain: DomainSpec,
    pub potential: PotentialSpec,
    pub integrator: IntegratorConfig,
    pub n: usize,
    pub initial_condition: InitialConditionSpec,
    #[serde(rename = "T")]
    pub total_time: f64,
    #[serde(default)]
    pub color_rule: ColorRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ScenarioConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Generates the initial positions. Grid points falling outside the
    /// domain (e.g. inside a channel obstacle) are dropped.
    pub fn initial_positions(
        &self,
        domain: &DomainGeometry,
    ) -> Result<Vec<Vec2>, ScenarioError> {
        match &self.initial_condition {
            InitialConditionSpec::UniformRejection {
                region,
                min_separation,
                seed,
            } => sample_initial_uniform(region, self.n, *min_separation, *seed),
            InitialConditionSpec::Grid { x_range, y_range } => {
                let mut pts = sample_initial_grid(*x_range, *y_range, self.n);
                pts.retain(|&p| domain.level_set(p) < -1e-9);
                Ok(pts)
            }
        }
    }
}

/// `n` i.i.d.-uniform points in the region conditioned on pairwise distance
/// at least `min_separation`, via seeded rejection sampling.
pub fn sample_initial_uniform(
    region: &RegionSpec,
    n: usize,
    min_separation: f64,
    seed: u64,
) -> Result<Vec<Vec2>, ScenarioError> {
    if min_separation <= 0.0 {
        return Err(ScenarioError::InvalidConfig(
            "min_separation must be positive".into(),
        ));
    }
    let fraction =
        n as f64 * std::f64::consts::PI * (min_separation / 2.0).powi(2) / region.area();
    if fraction >= MAX_PACKING_FRACTION {
        return Err(ScenarioError::PackingTooDense {
            fraction,
            max: MAX_PACKING_FRACTION,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ([x0, x1], [y0, y1]) = region.bounding_box();
    let budget = REJECTION_BUDGET_PER_POINT.saturating_mul(n);
    let mut points: Vec<Vec2> = Vec::with_capacity(n);
    let mut draws = 0usize;
    while points.len() < n {
        if draws >= budget {
            return Err(ScenarioError::RejectionBudgetExceeded {
                placed: points.len(),
                requested: n,
            });
        }
        draws += 1;
        let p = Vec2::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
        if !region.contains(p) {
            continue;
        }
        if points.iter().all(|&q| q.distance(p) >= min_separation) {
            points.push(p);
        }
    }
    Ok(points)
}

/// Near-square grid of `n` points filling the rectangle, row-major (rows of
/// increasing y, columns of increasing x), points at cell centers. Columns
/// are chosen as `ceil(sqrt(n * width / height))`.
pub fn sample_initial_grid(x_range: [f64; 2], y_range: [f64; 2], n: usize) -> Vec<Vec2> {
    let w = x_range[1] - x_range[0];
    let h = y_range[1] - y_range[0];
    assert!(w > 0.0 && h > 0.0, "grid region must be nonempty");
    let cols = ((n as f64 * w / h).sqrt().ceil() as usize).max(1);
    let rows = n.div_ceil(cols);
    let mut pts = Vec::with_capacity(n);
    'outer: for r in 0..rows {
        for c in 0..cols {
            if pts.len() == n {
                break 'outer;
            }
            pts.push(Vec2::new(
                x_range[0] + (c as f64 + 0.5) * w / cols as f64,
                y_range[0] + (r as f64 + 0.5) * h / rows as f64,
            ));
        }
    }
    pts
}

fn coulomb_potential() -> PotentialSpec {
    PotentialSpec {
        interaction: InteractionSpec::InversePower {
            exponent: 1.0,
            regularized: false,
            cutoff: None,
        },
        external: ExternalSpec::None,
    }
}

fn channel_potential() -> PotentialSpec {
    PotentialSpec {
        interaction: InteractionSpec::InversePower {
            exponent: 1.0,
            regularized: false,
            cutoff: None,
        },
        external: ExternalSpec::Linear {
            coefficients: [-0.002, 0.0],
        },
    }
}

fn unit_disk_spec() -> DomainSpec {
    DomainSpec::Disk {
        center: [0.0, 0.0],
        radius: 1.0,
    }
}

/// Two transversally intersecting disks: the right lobe contains the Case-2
/// sampling ball B((1/2,0), 1/2) and the union stays inside the unit disk.
fn dumbbell_spec() -> DomainSpec {
    DomainSpec::Union {
        a: Box::new(DomainSpec::Disk {
            center: [-0.45, 0.0],
            radius: 0.55,
        }),
        b: Box::new(DomainSpec::Disk {
            center: [0.45, 0.0],
            radius: 0.55,
        }),
        // Wider blend than the default: it softens the re-entrant neck so
        // that sliding particles resolve the normal rotation at dt = 0.25.
        blend_radius: 0.1,
    }
}

fn channel_spec(obstacle: Option<DomainSpec>) -> DomainSpec {
    let strip = DomainSpec::Strip {
        y_min: 0.0,
        y_max: 1.2,
    };
    match obstacle {
        None => strip,
        Some(obs) => DomainSpec::Intersection {
            a: Box::new(strip),
            b: Box::new(DomainSpec::Complement { a: Box::new(obs) }),
            blend_radius: 0.05,
        },
    }
}

fn bump_spec() -> DomainSpec {
    DomainSpec::Disk {
        center: [0.7, 0.0],
        radius: 0.3,
    }
}

/// Horseshoe obstacle: a chain of blended disks along a circular arc
/// opening toward the incoming flow.
fn horseshoe_spec() -> DomainSpec {
    let arc_center = [1.2, 0.6];
    let arc_radius = 0.3;
    let disk_radius = 0.13;
    let mut spec: Option<DomainSpec> = None;
    let count = 7;
    for i in 0..count {
        // Angles from -120 to 120 degrees: solid on the right, open left.
        let th = (-120.0 + 240.0 * i as f64 / (count - 1) as f64).to_radians();
        let disk = DomainSpec::Disk {
            center: [
                arc_center[0] + arc_radius * th.cos(),
                arc_center[1] + arc_radius * th.sin(),
            ],
            radius: disk_radius,
        };
        spec = Some(match spec {
            None => disk,
            Some(prev) => DomainSpec::Union {
                a: Box::new(prev),
                b: Box::new(disk),
                blend_radius: 0.04,
            },
        });
    }
    spec.expect("count > 0")
}

fn circle_scenario(
    name: &str,
    n: usize,
    dt: f64,
    total_time: f64,
    region: RegionSpec,
    min_separation: f64,
    seed: u64,
    color_rule: ColorRule,
    record_every: usize,
) -> ScenarioConfig {
    let mut integrator = IntegratorConfig::projected_rk4(dt);
    integrator.record_every = record_every;
    ScenarioConfig {
        name: name.into(),
        domain: unit_disk_spec(),
        potential: coulomb_potential(),
        integrator,
        n,
        initial_condition: InitialConditionSpec::UniformRejection {
            region,
            min_separation,
            seed,
        },
        total_time,
        color_rule,
        output_dir: None,
    }
}

fn channel_scenario(
    name: &str,
    obstacle: Option<DomainSpec>,
    n: usize,
    x_range: [f64; 2],
    total_time: f64,
    record_every: usize,
) -> ScenarioConfig {
    let mut integrator = IntegratorConfig::projected_rk4(0.5);
    integrator.record_every = record_every;
    ScenarioConfig {
        name: name.into(),
        domain: channel_spec(obstacle),
        potential: channel_potential(),
        integrator,
        n,
        initial_condition: InitialConditionSpec::Grid {
            x_range,
            y_range: [0.0, 1.2],
        },
        total_time,
        color_rule: ColorRule::LeftOf { x: 0.7 },
        output_dir: None,
    }
}

/// Paper-scale channel grid range.
const CHANNEL_GRID: [f64; 2] = [-1.7, 3.1];
/// Desk-scale channel grid range: the initial block sits upstream of the
/// obstacles, so the expansion flow passes them within the shortened run.
const CHANNEL_GRID_DESK: [f64; 2] = [-1.7, 0.2];

/// The built-in experiment catalogue: each paper-scale experiment plus a
/// `_desk` variant sized to finish in seconds.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    let case1_region = RegionSpec::Disk {
        center: [0.0, 0.0],
        radius: 1.0,
    };
    let case2_region = RegionSpec::Disk {
        center: [0.5, 0.0],
        radius: 0.5,
    };
    let case1_color = ColorRule::InsideDisk {
        center: [0.0, 0.0],
        radius: 0.5,
    };
    let case2_color = ColorRule::InsideDisk {
        center: [0.5, 0.0],
        radius: 0.25,
    };

    let dumbbell = |name: &str, n: usize, t: f64, record: usize, region: RegionSpec, color: ColorRule| {
        let mut integrator = IntegratorConfig::projected_rk4(0.25);
        integrator.record_every = record;
        ScenarioConfig {
            name: name.into(),
            domain: dumbbell_spec(),
            potential: coulomb_potential(),
            integrator,
            n,
            initial_condition: InitialConditionSpec::UniformRejection {
                region,
                min_separation: 0.012,
                seed: 2,
            },
            total_time: t,
            color_rule: color,
            output_dir: None,
        }
    };

    vec![
        circle_scenario(
            "circle_case1",
            3000,
            0.5,
            3000.0,
            case1_region.clone(),
            0.025,
            1,
            case1_color.clone(),
            20,
        ),
        circle_scenario(
            "circle_case1_desk",
            100,
            0.5,
            300.0,
            case1_region,
            0.025,
            1,
            case1_color,
            1,
        ),
        circle_scenario(
            "circle_case2",
            3000,
            0.5,
            3000.0,
            case2_region.clone(),
            0.012,
            2,
            case2_color.clone(),
            20,
        ),
        circle_scenario(
            "circle_case2_desk",
            100,
            0.5,
            300.0,
            case2_region.clone(),
            0.012,
            2,
            case2_color.clone(),
            1,
        ),
        circle_scenario(
            "circle_case2_dt3",
            3000,
            3.0,
            3000.0,
            case2_region.clone(),
            0.012,
            2,
            case2_color.clone(),
            4,
        ),
        circle_scenario(
            "circle_case2_dt3_desk",
            100,
            3.0,
            300.0,
            case2_region.clone(),
            0.012,
            2,
            case2_color.clone(),
            1,
        ),
        dumbbell(
            "dumbbell",
            3000,
            2000.0,
            40,
            case2_region.clone(),
            case2_color.clone(),
        ),
        dumbbell("dumbbell_desk", 100, 250.0, 1, case2_region, case2_color),
        channel_scenario("channel_plain", None, 900, CHANNEL_GRID, 2400.0, 20),
        channel_scenario("channel_plain_desk", None, 100, CHANNEL_GRID_DESK, 600.0, 2),
        channel_scenario("channel_bump", Some(bump_spec()), 900, CHANNEL_GRID, 2400.0, 20),
        channel_scenario(
            "channel_bump_desk",
            Some(bump_spec()),
            100,
            CHANNEL_GRID_DESK,
            600.0,
            1,
        ),
        channel_scenario(
            "channel_horseshoe",
            Some(horseshoe_spec()),
            900,
            CHANNEL_GRID,
            2400.0,
            20,
        ),
        channel_scenario(
            "channel_horseshoe_desk",
            Some(horseshoe_spec()),
            100,
            CHANNEL_GRID_DESK,
            600.0,
            2,
        ),
    ]
}

pub fn builtin_scenario(name: &str) -> Result<ScenarioConfig, ScenarioError> {
    builtin_scenarios()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| ScenarioError::UnknownScenario(name.into()))
}

/// Full scenario run: config, recorded trajectory and the diagnostics suite.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: ScenarioConfig,
    pub trajectory: TrajectoryRecord,
    pub reports: Vec<DiagnosticReport>,
}

impl RunRecord {
    /// True iff every enabled (non-skipped) diagnostic passed.
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs the diagnostics suite appropriate to the trajectory's scheme.
pub fn run_diagnostics(
    trajectory: &TrajectoryRecord,
    domain: &DomainGeometry,
    model: &EnergyModel,
) -> Result<Vec<DiagnosticReport>, DynamicsError> {
    let mut reports = vec![
        check_energy_decay(trajectory, ENERGY_DECAY_TOL),
        check_separation(trajectory, model),
    ];
    match trajectory.scheme {
        Scheme::ProjectedRk4 => {
            reports.push(check_boundary_sign(
                trajectory,
                domain,
                model,
                BOUNDARY_SIGN_TOL,
            )?);
            reports.push(check_detachment_tangency(
                trajectory,
                domain,
                model,
                DETACH_TANGENCY_REL_TOL,
            )?);
        }
        Scheme::PenaltyEuler => {
            reports.push(check_penalty_penetration(trajectory, domain, model, 0.1)?);
            reports.push(velocity_bound_check(trajectory, model, 0.05)?);
        }
    }
    Ok(reports)
}

/// Informational mixing statistic (no pass/fail semantics): the fraction of
/// particles whose nearest neighbor in the final frame carries the same
/// color, with colors assigned by the rule at the initial positions. Values
/// near 1 mean the two populations stayed unmixed. `None` when the scenario
/// has no color rule or fewer than two particles.
pub fn color_ordering_statistic(
    config: &ScenarioConfig,
    trajectory: &TrajectoryRecord,
) -> Option<f64> {
    if config.color_rule == ColorRule::None {
        return None;
    }
    let initial = &trajectory.frames.first()?.positions;
    let last = &trajectory.frames.last()?.positions;
    if last.len() < 2 {
        return None;
    }
    let colors: Vec<bool> = initial.iter().map(|&p| config.color_rule.is_red(p)).collect();
    let mut same = 0usize;
    for (i, &p) in last.iter().enumerate() {
        let nearest = (0..last.len())
            .filter(|&j| j != i)
            .min_by(|&a, &b| {
                p.distance(last[a])
                    .partial_cmp(&p.distance(last[b]))
                    .expect("finite positions")
            })
            .expect("n >= 2");
        if colors[nearest] == colors[i] {
            same += 1;
        }
    }
    Some(same as f64 / last.len() as f64)
}

/// Composes sampling, simulation and diagnostics. When `out_dir` is given,
/// writes config snapshot, trajectory, summary, diagnostics report and the
/// final-frame rendering into it.
pub fn run_scenario(
    config: &ScenarioConfig,
    out_dir: Option<&Path>,
) -> Result<RunRecord, ScenarioError> {
    let domain = config.domain.build()?;
    let initial = config.initial_positions(&domain)?;
    let model = config.potential.build(initial.len())?;
    let trajectory = simulate(
        &domain,
        &model,
        initial,
        &config.integrator,
        config.total_time,
    )?;
    let reports = run_diagnostics(&trajectory, &domain, &model)?;
    let record = RunRecord {
        config: config.clone(),
        trajectory,
        reports,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("config.json"), record.config.to_json())?;
        write_trajectory(&record.trajectory, dir)?;
        let mut lines = String::new();
        for r in &record.reports {
            lines.push_str(&format!("{r}\n"));
        }
        if let Some(stat) = color_ordering_statistic(&record.config, &record.trajectory) {
            lines.push_str(&format!(
                "INFO color_ordering: same-color nearest-neighbor fraction = {stat}\n"
            ));
        }
        std::fs::write(dir.join("diagnostics.txt"), lines)?;
        let last = record.trajectory.frames.len() - 1;
        render_frame(&record.config, &record.trajectory, last, &dir.join("final.svg"))?;
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_sampling_respects_constraints() {
        let region = RegionSpec::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        let pts = sample_initial_uniform(&region, 100, 0.025, 7).unwrap();
        assert_eq!(pts.len(), 100);
        for (i, p) in pts.iter().enumerate() {
            assert!(p.norm() < 1.0);
            for q in &pts[..i] {
                assert!(p.distance(*q) >= 0.025);
            }
        }
    }

    #[test]
    fn uniform_sampling_single_point_and_determinism() {
        let region = RegionSpec::Rect {
            x_range: [0.0, 2.0],
            y_range: [0.0, 1.0],
        };
        let a = sample_initial_uniform(&region, 1, 0.1, 3).unwrap();
        assert!(region.contains(a[0]));
        let b = sample_initial_uniform(&region, 1, 0.1, 3).unwrap();
        assert_eq!(a, b);
        let c = sample_initial_uniform(&region, 50, 0.05, 3).unwrap();
        let d = sample_initial_uniform(&region, 50, 0.05, 3).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn packing_heuristic_rejects_dense_requests() {
        let region = RegionSpec::Rect {
            x_range: [0.0, 1.0],
            y_range: [0.0, 1.0],
        };
        assert!(matches!(
            sample_initial_uniform(&region, 1000, 0.05, 1),
            Err(ScenarioError::PackingTooDense { .. })
        ));
    }

    #[test]
    fn grid_quarter_centers_for_four_in_unit_square() {
        let pts = sample_initial_grid([0.0, 1.0], [0.0, 1.0], 4);
        assert_eq!(
            pts,
            vec![
                Vec2::new(0.25, 0.25),
                Vec2::new(0.75, 0.25),
                Vec2::new(0.25, 0.75),
                Vec2::new(0.75, 0.75),
            ]
        );
    }

    #[test]
    fn grid_single_point_sits_in_first_cell() {
        // cols = ceil(sqrt(1 * 2 / 1)) = 2, so the lone point occupies the
        // first cell center of a 2x1 grid.
        let pts = sample_initial_grid([0.0, 2.0], [0.0, 1.0], 1);
        assert_eq!(pts, vec![Vec2::new(0.5, 0.5)]);
    }

    #[test]
    fn grid_900_in_channel_range_respects_margins() {
        let pts = sample_initial_grid([-1.7, 3.1], [0.0, 1.2], 900);
        assert_eq!(pts.len(), 900);
        for p in &pts {
            assert!(p.x > -1.7 && p.x < 3.1);
            assert!(p.y > 0.0 && p.y < 1.2);
        }
    }

    #[test]
    fn builtin_catalogue_parameters() {
        let all = builtin_scenarios();
        let case1 = all.iter().find(|c| c.name == "circle_case1").unwrap();
        assert_eq!(case1.n, 3000);
        assert_abs_diff_eq!(case1.integrator.dt, 0.5);
        assert!(matches!(
            case1.initial_condition,
            InitialConditionSpec::UniformRejection {
                min_separation, ..
            } if min_separation == 0.025
        ));
        assert_eq!(case1.potential.external, ExternalSpec::None);

        let dumbbell = all.iter().find(|c| c.name == "dumbbell").unwrap();
        assert_abs_diff_eq!(dumbbell.integrator.dt, 0.25);

        let bump = all.iter().find(|c| c.name == "channel_bump_desk").unwrap();
        assert_eq!(bump.n, 100);
        assert_eq!(
            bump.potential.external,
            ExternalSpec::Linear {
                coefficients: [-0.002, 0.0]
            }
        );

        // Desk variants stay at desk scale.
        for c in all.iter().filter(|c| c.name.ends_with("_desk")) {
            assert!(c.n <= 200, "{} too large for desk scale", c.name);
        }
    }

    #[test]
    fn config_round_trip() {
        for config in builtin_scenarios() {
            let parsed = ScenarioConfig::from_json(&config.to_json()).unwrap();
            assert_eq!(parsed, config);
        }
    }

    #[test]
    fn grid_points_inside_obstacle_are_dropped() {
        let config = builtin_scenario("channel_bump_desk").unwrap();
        let domain = config.domain.build().unwrap();
        let pts = config.initial_positions(&domain).unwrap();
        assert!(!pts.is_empty() && pts.len() <= config.n);
        for p in &pts {
            assert!(domain.contains(*p));
        }
    }

    #[test]
    fn run_scenario_is_deterministic() {
        let mut config = builtin_scenario("circle_case1_desk").unwrap();
        config.n = 20;
        config.total_time = 10.0;
        let a = run_scenario(&config, None).unwrap();
        let b = run_scenario(&config, None).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
    }
}
