//! Scratch experiment harness used to size the acceptance-test optimizer
//! settings: runs one algorithm on a case-study variant and prints the
//! quantities the acceptance criteria look at.
//!
//! Usage:
//!   tune <algo> <r> <rings> <ground_step> <corridor_step> <max_inner> <max_outer> [prob_los] [eta0_rho] [seed]

use std::time::Instant;

use corridor_opt::scenario_file::ScenarioFile;
use corridor_opt_core::objectives::{point_metrics, EvalTable};
use corridor_opt_core::optimizer::{run_with_observer, Algorithm, TerminationReason};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let algo: Algorithm = args[0].parse().unwrap();
    let r: f64 = args[1].parse().unwrap();
    let rings: u32 = args[2].parse().unwrap();
    let ground_step: f64 = args[3].parse().unwrap();
    let corridor_step: f64 = args[4].parse().unwrap();
    let max_inner: u32 = args[5].parse().unwrap();
    let max_outer: u32 = args[6].parse().unwrap();
    let prob_los: bool = args.get(7).map_or(false, |s| s == "1");
    let eta0_rho: f64 = args.get(8).map_or(0.5, |s| s.parse().unwrap());
    let seed: u64 = args.get(9).map_or(1, |s| s.parse().unwrap());

    let json = format!(
        r#"{{
            "seed": {seed},
            "objective": {{"algorithm": "{}"}},
            "regions": {{"mixing_ratio": {r}, "ground_step_m": {ground_step}, "corridor_step_m": {corridor_step}, "probabilistic_los": {prob_los}}},
            "deployment": {{"rings": {rings}}},
            "optimizer": {{"max_inner": {max_inner}, "max_outer": {max_outer}, "eta0_rho": {eta0_rho}}}
        }}"#,
        algo.name()
    );
    let scenario = ScenarioFile::from_json(&json).unwrap().assemble(None, None).unwrap();
    eprintln!(
        "points: {} stations: {}",
        scenario.samples.len(),
        scenario.deployment.n_bs()
    );

    let t = Instant::now();
    let mut last_print = Instant::now();
    let mut observer = |outer: u32, phi: f64| {
        if last_print.elapsed().as_secs_f64() > 5.0 {
            eprintln!("  outer {outer}: phi = {phi:.6}  [{:.1}s]", t.elapsed().as_secs_f64());
            last_print = Instant::now();
        }
    };
    let run = run_with_observer(
        algo,
        &scenario.objective,
        &scenario.deployment,
        &scenario.samples,
        &scenario.optimizer,
        &mut observer,
    )
    .unwrap();
    let secs = t.elapsed().as_secs_f64();

    let weights = run
        .partition
        .cell_weights(&scenario.samples, scenario.deployment.n_bs());
    let mut down = 0;
    let mut up = 0;
    for (n, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if run.tilts_deg[n] < 0.0 {
                down += 1;
            } else if run.tilts_deg[n] > 0.0 {
                up += 1;
            }
        }
    }
    let at_cap = run
        .powers_dbm
        .iter()
        .filter(|&&p| p == scenario.deployment.rho_max_dbm)
        .count();
    let inactive = run.active.iter().filter(|&&a| !a).count();
    let truncated_phases = run.phase_logs.iter().filter(|p| p.truncated).count();

    println!(
        "algo={} r={r} secs={secs:.1} outer={} term={:?} phi={:.6} down={down} up={up} at_cap={at_cap} inactive={inactive} truncated_phases={truncated_phases}/{}",
        algo.name(),
        run.outer_iterations,
        run.termination,
        run.final_objective,
        run.phase_logs.len()
    );
    if run.termination == TerminationReason::OuterIterationCap {
        println!("  NOTE: hit outer cap");
    }

    // Cross-evaluate on the common r=0.5 grid (same steps, same LoS mode).
    let eval_json = format!(
        r#"{{
            "seed": {seed},
            "objective": {{"algorithm": "{}"}},
            "regions": {{"mixing_ratio": 0.5, "ground_step_m": {ground_step}, "corridor_step_m": {corridor_step}, "probabilistic_los": {prob_los}}},
            "deployment": {{"rings": {rings}}}
        }}"#,
        algo.name()
    );
    let eval_scenario = ScenarioFile::from_json(&eval_json).unwrap().assemble(None, None).unwrap();
    let table = EvalTable::new(&eval_scenario.deployment, &eval_scenario.samples).unwrap();
    let partition = table.assign_best_rss(&run.tilts_deg, &run.powers_dbm, 0);
    let metrics = point_metrics(
        &table,
        &partition,
        &run.tilts_deg,
        &run.powers_dbm,
        eval_scenario.objective.sigma2,
    )
    .unwrap();
    let (rss, sinr) = corridor_opt::report::population_means(&eval_scenario.samples, &metrics);
    println!(
        "  cross-eval on r=0.5 grid: rss ground={:.3} uav={:.3}  sinr ground={:.3} uav={:.3}",
        rss.ground.unwrap(),
        rss.uav.unwrap(),
        sinr.ground.unwrap(),
        sinr.uav.unwrap()
    );
}
