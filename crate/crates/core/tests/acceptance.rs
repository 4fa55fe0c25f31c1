//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with the measured quantity.

use confined_particles::diagnostics::{
    check_boundary_sign, check_detachment_tangency, check_energy_decay, check_penalty_penetration,
    detect_contact_events, penalty_convergence_study, velocity_bound_check, ContactKind,
    ENERGY_DECAY_TOL,
};
use confined_particles::dynamics::{simulate, IntegratorConfig, TrajectoryRecord};
use confined_particles::energy::{
    separation_threshold, EnergyModel, ExternalPotential, InteractionPotential, PairPotential,
};
use confined_particles::geometry::{make_disk, DomainGeometry};
use confined_particles::scenarios::{
    builtin_scenario, builtin_scenarios, run_scenario, sample_initial_uniform, RegionSpec,
};
use confined_particles::Vec2;
use std::time::Instant;

fn report(criterion: usize, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("{status} criterion {criterion}: {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn desk_run(name: &str) -> confined_particles::scenarios::RunRecord {
    let config = builtin_scenario(name).expect("builtin exists");
    run_scenario(&config, None).expect("scenario runs")
}

/// Count of frame-to-frame energy increases above the per-step tolerance.
fn increase_events(trajectory: &TrajectoryRecord, tol: f64) -> usize {
    trajectory
        .frames
        .windows(2)
        .filter(|w| w[1].energy - w[0].energy > tol * w[0].energy.abs().max(1.0))
        .count()
}

/// Single particle pushed by a constant force toward the disk boundary; the
/// penalty lemma benchmark.
fn constant_force_benchmark() -> (DomainGeometry, EnergyModel, Vec<Vec2>, f64) {
    let domain = make_disk(Vec2::ZERO, 1.0);
    let force_mag = 0.5;
    let model = EnergyModel::new(
        PairPotential::Singular(InteractionPotential::coulomb()),
        ExternalPotential::Linear(Vec2::new(-force_mag, 0.0)),
        1,
    );
    (domain, model, vec![Vec2::ZERO], force_mag)
}

#[test]
fn criterion_01_energy_decay() {
    let start = Instant::now();
    let record = desk_run("circle_case1_desk");
    let elapsed = start.elapsed().as_secs_f64();
    let decay = check_energy_decay(&record.trajectory, ENERGY_DECAY_TOL);
    let pass = decay.pass && elapsed <= 60.0;
    report(
        1,
        pass,
        &format!(
            "circle_case1 desk energy non-increasing (worst rel step {:+.3e}, tol 1e-8), runtime {elapsed:.2}s <= 60s",
            decay.measured
        ),
    );
}

#[test]
fn criterion_02_instability_reproduction() {
    let stable = desk_run("circle_case2_desk");
    let unstable = desk_run("circle_case2_dt3_desk");
    let stable_events = increase_events(&stable.trajectory, ENERGY_DECAY_TOL);
    let unstable_events = increase_events(&unstable.trajectory, ENERGY_DECAY_TOL);
    let pass = stable_events == 0 && unstable_events >= 1;
    report(
        2,
        pass,
        &format!(
            "dt=3 rerun shows {unstable_events} energy-increase events, dt=0.5 shows {stable_events}"
        ),
    );
}

#[test]
fn criterion_03_penalty_bounds() {
    let (domain, model, initial, force_mag) = constant_force_benchmark();
    let mut worst_pen = 0.0f64;
    let mut worst_speed = 0.0f64;
    let mut pass = true;
    for k in [10.0, 100.0, 1000.0] {
        let config = IntegratorConfig::penalty_euler(0.1 / k, k);
        let traj = simulate(&domain, &model, initial.clone(), &config, 4.0).expect("penalty run");
        assert!(traj.aborted.is_none());
        let pen = check_penalty_penetration(&traj, &domain, &model, 0.1).expect("check");
        let vel = velocity_bound_check(&traj, &model, 0.05).expect("check");
        pass &= pen.pass && vel.pass;
        worst_pen = worst_pen.max(pen.measured * k / force_mag);
        worst_speed = worst_speed.max(vel.measured / (2.0 * force_mag));
    }
    report(
        3,
        pass,
        &format!(
            "k in {{10,100,1000}}: penetration <= |F|/k (worst ratio {worst_pen:.4}), speed <= 2|F| (worst ratio {worst_speed:.4})"
        ),
    );
}

#[test]
fn criterion_04_penalty_convergence() {
    let (domain, model, initial, _) = constant_force_benchmark();
    let ks = [10.0, 100.0, 1000.0, 10000.0];
    let dt = 0.05 / ks[ks.len() - 1];
    let table =
        penalty_convergence_study(&domain, &model, &initial, &ks, dt, 4.0).expect("study runs");
    let decreasing = table.windows(2).all(|w| w[1].1 < w[0].1);
    // Least-squares slope of log(error) against log(k).
    let pts: Vec<(f64, f64)> = table.iter().map(|&(k, e)| (k.ln(), e.ln())).collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let order = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
    let pass = decreasing && (order - 1.0).abs() <= 0.3;
    report(
        4,
        pass,
        &format!("sup-distance strictly decreasing over k, fitted order {order:.3} within 1.0 +/- 0.3"),
    );
}

#[test]
fn criterion_05_confinement() {
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    for config in builtin_scenarios() {
        if !config.name.ends_with("_desk") {
            continue;
        }
        let record = run_scenario(&config, None).expect("scenario runs");
        let domain = config.domain.build().expect("domain builds");
        for frame in &record.trajectory.frames {
            for &p in &frame.positions {
                let d = domain.signed_distance(p).expect("within tube").max(0.0);
                if d > worst {
                    worst = d;
                    worst_name = config.name.clone();
                }
            }
        }
    }
    let pass = worst <= 1e-9;
    report(
        5,
        pass,
        &format!("max d_s over all desk builtin frames = {worst:.3e} <= 1e-9 (worst in {worst_name:?})"),
    );
}

#[test]
fn criterion_06_gradient_consistency() {
    let region = RegionSpec::Disk {
        center: [0.0, 0.0],
        radius: 1.0,
    };
    let h = 1e-6;
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let positions = sample_initial_uniform(&region, 10, 0.05, 1000 + seed).expect("sampled");
        let model = EnergyModel::new(
            PairPotential::Singular(InteractionPotential::coulomb()),
            ExternalPotential::Linear(Vec2::new(0.3, -0.2)),
            10,
        );
        for i in 0..positions.len() {
            let analytic = model.force(i, &positions).expect("force");
            let mut fd = Vec2::ZERO;
            for (axis, slot) in [(Vec2::new(h, 0.0), 0), (Vec2::new(0.0, h), 1)] {
                let mut plus = positions.clone();
                plus[i] = plus[i] + axis;
                let mut minus = positions.clone();
                minus[i] = minus[i] - axis;
                let df = -(model.energy(&plus).unwrap() - model.energy(&minus).unwrap())
                    / (2.0 * h);
                if slot == 0 {
                    fd.x = df;
                } else {
                    fd.y = df;
                }
            }
            let rel = (analytic - fd).norm() / analytic.norm().max(1e-300);
            worst = worst.max(rel);
        }
    }
    let pass = worst <= 1e-6;
    report(
        6,
        pass,
        &format!("100 random n=10 configurations, worst force-vs-FD relative error {worst:.3e} <= 1e-6"),
    );
}

#[test]
fn criterion_07_separation_bound() {
    let mut violations = 0usize;
    let mut worst_margin = f64::INFINITY;
    for name in ["circle_case1_desk", "circle_case2_desk"] {
        let record = desk_run(name);
        let n = record.trajectory.particle_count();
        let v = InteractionPotential::coulomb();
        for frame in &record.trajectory.frames {
            assert!(frame.energy.is_finite() && frame.energy > 0.0);
            // Closed form for V = 1/r: h = 1 / (n(n-1) E).
            let h = separation_threshold(&v, n, frame.energy).expect("threshold");
            if frame.min_separation < h {
                violations += 1;
            }
            worst_margin = worst_margin.min(frame.min_separation - h);
        }
    }
    let pass = violations == 0;
    report(
        7,
        pass,
        &format!("circle desk runs: {violations} violations of min_sep >= 1/(n(n-1)E), smallest margin {worst_margin:.3e}"),
    );
}

#[test]
fn criterion_08_detachment_tangency() {
    let config = builtin_scenario("channel_bump_desk").expect("builtin exists");
    let record = run_scenario(&config, None).expect("scenario runs");
    let domain = config.domain.build().expect("domain builds");
    let model = config
        .potential
        .build(record.trajectory.particle_count())
        .expect("model builds");
    let events = detect_contact_events(&record.trajectory, &domain, &model).expect("events");
    let detaches: Vec<_> = events
        .iter()
        .filter(|e| e.kind == ContactKind::Detach)
        .collect();
    let downstream = detaches.iter().all(|e| {
        let frame = record
            .trajectory
            .frames
            .iter()
            .find(|f| f.step == e.frame)
            .expect("frame recorded");
        frame.positions[e.particle].x > 0.7
    });
    let tangency = check_detachment_tangency(&record.trajectory, &domain, &model, 0.1)
        .expect("check");
    let sign = check_boundary_sign(&record.trajectory, &domain, &model, 1e-6).expect("check");
    let pass = !detaches.is_empty() && downstream && tangency.pass && sign.pass;
    report(
        8,
        pass,
        &format!(
            "{} detach events downstream of the bump, worst |F.nu|/|F| = {:.4} <= 0.1, persistent-boundary F.nu >= -1e-6 (worst {:+.3e})",
            detaches.len(),
            tangency.measured,
            sign.measured
        ),
    );
}

#[test]
fn criterion_09_gronwall_stability() {
    let domain = make_disk(Vec2::ZERO, 1.0);
    let model = EnergyModel::new(
        PairPotential::Singular(InteractionPotential::coulomb()),
        ExternalPotential::Zero,
        20,
    );
    let region = RegionSpec::Disk {
        center: [0.0, 0.0],
        radius: 1.0,
    };
    // Spacing 0.1 keeps the unperturbed flow well inside the RK4 stability
    // region at dt = 0.5, so the comparison measures Gronwall growth rather
    // than integrator blow-up.
    let initial = sample_initial_uniform(&region, 20, 0.1, 9).expect("sampled");
    let delta = 1e-6;
    let perturbed_init: Vec<Vec2> = initial
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let th = 2.399963229728653 * i as f64;
            x + Vec2::new(th.cos(), th.sin()) * delta
        })
        .collect();
    let config = IntegratorConfig::projected_rk4(0.5);
    let base = simulate(&domain, &model, initial, &config, 10.0).expect("base run");
    let pert = simulate(&domain, &model, perturbed_init, &config, 10.0).expect("perturbed run");
    let mut sup = 0.0f64;
    for (a, b) in base.frames.iter().zip(&pert.frames) {
        for (x, y) in a.positions.iter().zip(&b.positions) {
            sup = sup.max(x.distance(*y));
        }
    }
    let pass = sup <= 100.0 * delta;
    report(
        9,
        pass,
        &format!("n=20 disk, delta=1e-6, T=10: sup trajectory distance {sup:.3e} <= 1e-4"),
    );
}

#[test]
fn criterion_10_boundary_crowding() {
    let record = desk_run("circle_case1_desk");
    let last = record.trajectory.frames.last().expect("frames");
    let outer = last.positions.iter().filter(|p| p.norm() > 0.8).count();
    let fraction = outer as f64 / last.positions.len() as f64;
    let pass = fraction > 0.36;
    report(
        10,
        pass,
        &format!("final-time fraction with |x| > 0.8 is {fraction:.3} > uniform 0.36"),
    );
}
