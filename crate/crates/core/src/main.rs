use clap::{Parser, Subcommand};
use confined_particles::diagnostics::penalty_convergence_study;
use confined_particles::dynamics::PENALTY_STABILITY_FACTOR;
use confined_particles::scenarios::{
    builtin_scenario, builtin_scenarios, color_ordering_statistic, read_trajectory, render_frame,
    run_diagnostics, run_scenario, InitialConditionSpec, ScenarioConfig, ScenarioError,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Environment variable naming the default root for run outputs.
const OUT_ROOT_ENV: &str = "CONFINED_PARTICLES_OUT";

#[derive(Parser)]
#[command(
    name = "confined-particles",
    about = "Particle dynamics confined by impenetrable boundaries",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in scenarios.
    List,
    /// Run a scenario from a JSON config file or by built-in name.
    Run {
        /// Path to a config file, or a built-in scenario name.
        scenario: String,
        /// Output directory (default: $CONFINED_PARTICLES_OUT/<name> or ./runs/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the random seed of the initial condition.
        #[arg(long)]
        seed: Option<u64>,
        /// For built-in names, select the desk-scale variant.
        #[arg(long)]
        desk: bool,
    },
    /// Re-run the diagnostics suite on a stored trajectory directory.
    Check {
        /// Directory containing trajectory.csv, summary.csv, meta.json, config.json.
        trajectory: PathBuf,
    },
    /// Penalty-stiffness convergence study against a projected reference.
    Converge {
        /// Built-in scenario (or config path) providing domain, potential and
        /// initial condition.
        benchmark: String,
        /// Comma-separated stiffness values.
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<f64>,
        /// Shared step size (default: chosen from the stiffest k).
        #[arg(long)]
        dt: Option<f64>,
        /// Total simulated time.
        #[arg(long, default_value_t = 1.0)]
        total_time: f64,
        /// Particle count override (the study is sized for small systems).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Render one frame of a stored trajectory to SVG.
    Render {
        /// Directory containing the trajectory and its config.json.
        trajectory: PathBuf,
        /// Frame index to draw.
        #[arg(long)]
        frame: usize,
    },
}

fn load_config(scenario: &str, desk: bool) -> Result<ScenarioConfig, ScenarioError> {
    let path = Path::new(scenario);
    if path.is_file() {
        return ScenarioConfig::from_json(&std::fs::read_to_string(path)?);
    }
    let name = if desk && !scenario.ends_with("_desk") {
        format!("{scenario}_desk")
    } else {
        scenario.to_string()
    };
    builtin_scenario(&name)
}

fn default_out_dir(name: &str) -> PathBuf {
    let root = std::env::var_os(OUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"));
    root.join(name)
}

fn cmd_list() {
    for config in builtin_scenarios() {
        let init = match &config.initial_condition {
            InitialConditionSpec::UniformRejection { min_separation, .. } => {
                format!("uniform (sep {min_separation})")
            }
            InitialConditionSpec::Grid { .. } => "grid".to_string(),
        };
        println!(
            "{:28} n={:<5} dt={:<5} T={:<7} init={}",
            config.name, config.n, config.integrator.dt, config.total_time, init
        );
    }
}

fn cmd_run(
    scenario: &str,
    out: Option<PathBuf>,
    seed: Option<u64>,
    desk: bool,
) -> Result<bool, ScenarioError> {
    let mut config = load_config(scenario, desk)?;
    if let Some(s) = seed {
        match &mut config.initial_condition {
            InitialConditionSpec::UniformRejection { seed, .. } => *seed = s,
            InitialConditionSpec::Grid { .. } => {
                eprintln!("note: --seed has no effect on grid initial conditions");
            }
        }
    }
    let out_dir = out
        .or_else(|| config.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| default_out_dir(&config.name));
    let record = run_scenario(&config, Some(&out_dir))?;
    println!(
        "ran {}: {} particles, {} frames -> {}",
        config.name,
        record.trajectory.particle_count(),
        record.trajectory.frames.len(),
        out_dir.display()
    );
    if let Some(reason) = &record.trajectory.aborted {
        println!("aborted early: {reason}");
    }
    for report in &record.reports {
        println!("{report}");
    }
    if let Some(stat) = color_ordering_statistic(&record.config, &record.trajectory) {
        println!("INFO color_ordering: same-color nearest-neighbor fraction = {stat}");
    }
    Ok(record.all_pass() && record.trajectory.aborted.is_none())
}

fn cmd_check(dir: &Path) -> Result<bool, ScenarioError> {
    let config = ScenarioConfig::from_json(&std::fs::read_to_string(dir.join("config.json"))?)?;
    let trajectory = read_trajectory(dir)?;
    let domain = config.domain.build()?;
    let model = config.potential.build(trajectory.particle_count())?;
    let reports = run_diagnostics(&trajectory, &domain, &model)?;
    let mut all_pass = true;
    for report in &reports {
        println!("{report}");
        all_pass &= report.pass;
    }
    Ok(all_pass)
}

fn cmd_converge(
    benchmark: &str,
    ks: &[f64],
    dt: Option<f64>,
    total_time: f64,
    n_override: Option<usize>,
) -> Result<bool, ScenarioError> {
    let mut config = load_config(benchmark, false)?;
    if let Some(n) = n_override {
        config.n = n;
    }
    let k_max = ks.iter().cloned().fold(f64::MIN, f64::max);
    let dt = dt.unwrap_or(0.1 * PENALTY_STABILITY_FACTOR / k_max);
    let domain = config.domain.build()?;
    let initial = config.initial_positions(&domain)?;
    let model = config.potential.build(initial.len())?;
    let table = penalty_convergence_study(&domain, &model, &initial, ks, dt, total_time)?;
    println!("k,sup_error");
    for (k, err) in &table {
        println!("{k},{err}");
    }
    // Fitted order of convergence in 1/k from a log-log least-squares line.
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|&(k, e)| (k.ln(), e.ln()))
        .collect();
    if pts.len() >= 2 {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        println!("fitted_order={}", -slope);
    }
    Ok(true)
}

fn cmd_render(dir: &Path, frame: usize) -> Result<bool, ScenarioError> {
    let config = ScenarioConfig::from_json(&std::fs::read_to_string(dir.join("config.json"))?)?;
    let trajectory = read_trajectory(dir)?;
    let out = dir.join(format!("frame_{frame}.svg"));
    render_frame(&config, &trajectory, frame, &out)?;
    println!("wrote {}", out.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List => {
            cmd_list();
            Ok(true)
        }
        Command::Run {
            scenario,
            out,
            seed,
            desk,
        } => cmd_run(scenario, out.clone(), *seed, *desk),
        Command::Check { trajectory } => cmd_check(trajectory),
        Command::Converge {
            benchmark,
            ks,
            dt,
            total_time,
            n,
        } => cmd_converge(benchmark, ks, *dt, *total_time, *n),
        Command::Render { trajectory, frame } => cmd_render(trajectory, *frame),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
