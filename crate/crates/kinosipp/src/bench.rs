//! Benchmark harness: cross product of maps, seeds, limits, speed steps and
//! heuristics, plus fixed-speed baseline runs. Rows come out in job order
//! whatever the worker count.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use kinosipp_core::grid::{GridMap, Instance};
use kinosipp_core::Clock;
use kinosipp_core::heuristics::HeuristicKind;
use kinosipp_core::kinematics::KinematicParams;
use kinosipp_core::planner::{default_order, plan, plan_fixed_speed, PlanOptions, Solution};
use kinosipp_core::scenario::generate_instance;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BenchmarkConfig, LimitSet, MapSource};
use crate::formats::read_map;
use crate::StdClock;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "KINOSIPP_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub instance_id: String,
    pub seed: u64,
    pub step: f64,
    pub heuristic: String,
    pub success: bool,
    pub sum_of_costs: f64,
    pub makespan: f64,
    pub runtime_ms: f64,
    pub expansions: u64,
    pub generated: u64,
    pub v_max: f64,
    pub a_acc: f64,
    pub a_dec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub instance_id: String,
    pub seed: u64,
    pub speed: f64,
    pub heuristic: String,
    pub success: bool,
    pub sum_of_costs: f64,
    pub makespan: f64,
    pub runtime_ms: f64,
    pub expansions: u64,
    pub generated: u64,
}

/// Means per (map, limits, step, heuristic). Cost and makespan are averaged
/// over successful runs only; runtime and node counts over all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub map: String,
    pub v_max: f64,
    pub a_acc: f64,
    pub a_dec: f64,
    pub step: f64,
    pub heuristic: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_sum_of_costs: f64,
    pub mean_makespan: f64,
    pub mean_runtime_ms: f64,
    pub mean_expansions: f64,
    pub mean_generated: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<MetricsRow>,
    pub baseline: Vec<BaselineRow>,
    pub aggregates: Vec<Aggregate>,
    pub baseline_aggregates: Vec<Aggregate>,
}

pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.parse().ok().filter(|&n| n > 0)
}

fn map_label(instance_id: &str) -> &str {
    instance_id.rsplit_once('-').map_or(instance_id, |(m, _)| m)
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

pub fn aggregate(rows: &[MetricsRow]) -> Vec<Aggregate> {
    let mut groups: Vec<(String, [f64; 4], String, Vec<&MetricsRow>)> = Vec::new();
    for r in rows {
        let key = [r.v_max, r.a_acc, r.a_dec, r.step];
        let map = map_label(&r.instance_id);
        match groups
            .iter_mut()
            .find(|g| g.0 == map && g.1 == key && g.2 == r.heuristic)
        {
            Some(g) => g.3.push(r),
            None => groups.push((map.to_string(), key, r.heuristic.clone(), vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(map, [v_max, a_acc, a_dec, step], heuristic, rs)| {
            let ok: Vec<&&MetricsRow> = rs.iter().filter(|r| r.success).collect();
            Aggregate {
                map,
                v_max,
                a_acc,
                a_dec,
                step,
                heuristic,
                runs: rs.len(),
                successes: ok.len(),
                success_rate: ok.len() as f64 / rs.len() as f64,
                mean_sum_of_costs: mean(ok.iter().map(|r| r.sum_of_costs)),
                mean_makespan: mean(ok.iter().map(|r| r.makespan)),
                mean_runtime_ms: mean(rs.iter().map(|r| r.runtime_ms)),
                mean_expansions: mean(rs.iter().map(|r| r.expansions as f64)),
                mean_generated: mean(rs.iter().map(|r| r.generated as f64)),
            }
        })
        .collect()
}

/// Baseline rows grouped per (map, speed, heuristic); `step` holds the speed.
pub fn aggregate_baseline(rows: &[BaselineRow]) -> Vec<Aggregate> {
    let as_metrics: Vec<MetricsRow> = rows
        .iter()
        .map(|r| MetricsRow {
            instance_id: r.instance_id.clone(),
            seed: r.seed,
            step: r.speed,
            heuristic: r.heuristic.clone(),
            success: r.success,
            sum_of_costs: r.sum_of_costs,
            makespan: r.makespan,
            runtime_ms: r.runtime_ms,
            expansions: r.expansions,
            generated: r.generated,
            v_max: r.speed,
            a_acc: f64::INFINITY,
            a_dec: f64::INFINITY,
        })
        .collect();
    aggregate(&as_metrics)
}

/// Copy of `map` with another cell edge length.
pub fn with_cell_size(map: &GridMap, cell_size: f64) -> kinosipp_core::Result<GridMap> {
    let mut out = GridMap::with_cell_size(map.width(), map.height(), cell_size)?;
    for c in map.blocked_cells() {
        out.set_blocked(c, true)?;
    }
    Ok(out)
}

fn load_map(source: &MapSource, cell_size: f64) -> Result<GridMap> {
    let map = match (source, source.layout()) {
        (_, Some(layout)) => layout?.build()?,
        (MapSource::Path(p), None) => read_map(p).with_context(|| format!("loading map {}", p.display()))?,
        (MapSource::Preset { .. }, None) => unreachable!("presets always have a layout"),
    };
    Ok(with_cell_size(&map, cell_size)?)
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    Kinematic { limits: LimitSet, step: f64 },
    Fixed { speed: f64 },
}

struct Job<'a> {
    instance_id: &'a str,
    seed: u64,
    instance: &'a Instance,
    mode: Mode,
    heuristic: HeuristicKind,
}

struct Outcome {
    success: bool,
    sum_of_costs: f64,
    makespan: f64,
    runtime_ms: f64,
    expansions: u64,
    generated: u64,
}

fn run_job(job: &Job<'_>, config: &BenchmarkConfig) -> Result<Outcome> {
    let clock = StdClock::new();
    let options = PlanOptions {
        heuristic: job.heuristic,
        clock: &clock,
        time_limit: Some(config.timeout_secs),
        force: false,
    };
    let order = default_order(job.instance);
    let solution: Solution = match job.mode {
        Mode::Kinematic { limits, step } => {
            let params = KinematicParams::new(limits.v_max, limits.a_acc, limits.a_dec, step, config.rot_time)?;
            plan(job.instance, &params, &order, &options)?
        }
        Mode::Fixed { speed } => {
            let params = KinematicParams {
                rot_time_quarter: config.rot_time,
                ..KinematicParams::default()
            };
            plan_fixed_speed(job.instance, speed, &params, &order, &options)?
        }
    };
    Ok(Outcome {
        success: solution.success,
        sum_of_costs: solution.sum_of_costs,
        makespan: solution.makespan,
        runtime_ms: clock.now_secs() * 1e3,
        expansions: solution.stats.expansions,
        generated: solution.stats.generated,
    })
}

/// Runs every configured job. `workers` overrides the pool size (default:
/// the environment variable, then rayon's default).
pub fn run(config: &BenchmarkConfig, workers: Option<usize>) -> Result<BenchReport> {
    config.validate()?;
    let mut instances: Vec<(String, u64, Instance)> = Vec::new();
    for source in &config.maps {
        let map = load_map(source, config.cell_size)?;
        for &seed in &config.seeds {
            let inst = generate_instance(&map, config.agents, seed)
                .with_context(|| format!("generating {} agents on {} with seed {seed}", config.agents, source.label()))?;
            instances.push((format!("{}-{seed}", source.label()), seed, inst));
        }
    }

    let baseline_h = HeuristicKind::parse(&config.baseline_heuristic).expect("validated");
    let mut jobs = Vec::new();
    for (id, seed, inst) in &instances {
        for &limits in &config.limits {
            for &step in &config.steps {
                for heuristic in config.heuristic_kinds() {
                    jobs.push(Job {
                        instance_id: id,
                        seed: *seed,
                        instance: inst,
                        mode: Mode::Kinematic { limits, step },
                        heuristic,
                    });
                }
            }
        }
        for &speed in &config.baseline_speeds {
            jobs.push(Job {
                instance_id: id,
                seed: *seed,
                instance: inst,
                mode: Mode::Fixed { speed },
                heuristic: baseline_h,
            });
        }
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers.or_else(workers_from_env) {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building worker pool")?;
    let outcomes: Vec<Result<Outcome>> = pool.install(|| jobs.par_iter().map(|j| run_job(j, config)).collect());

    let mut report = BenchReport::default();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        let o = outcome?;
        match job.mode {
            Mode::Kinematic { limits, step } => report.rows.push(MetricsRow {
                instance_id: job.instance_id.to_string(),
                seed: job.seed,
                step,
                heuristic: job.heuristic.name().to_string(),
                success: o.success,
                sum_of_costs: o.sum_of_costs,
                makespan: o.makespan,
                runtime_ms: o.runtime_ms,
                expansions: o.expansions,
                generated: o.generated,
                v_max: limits.v_max,
                a_acc: limits.a_acc,
                a_dec: limits.a_dec,
            }),
            Mode::Fixed { speed } => report.baseline.push(BaselineRow {
                instance_id: job.instance_id.to_string(),
                seed: job.seed,
                speed,
                heuristic: job.heuristic.name().to_string(),
                success: o.success,
                sum_of_costs: o.sum_of_costs,
                makespan: o.makespan,
                runtime_ms: o.runtime_ms,
                expansions: o.expansions,
                generated: o.generated,
            }),
        }
    }
    report.aggregates = aggregate(&report.rows);
    report.baseline_aggregates = aggregate_baseline(&report.baseline);
    Ok(report)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `metrics.csv`, `aggregates.csv` and, when there are baseline
/// runs, `baseline.csv` and `baseline_aggregates.csv` into `dir`.
pub fn write_report(dir: &Path, report: &BenchReport) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_csv(&dir.join("metrics.csv"), &report.rows)?;
    write_csv(&dir.join("aggregates.csv"), &report.aggregates)?;
    if !report.baseline.is_empty() {
        write_csv(&dir.join("baseline.csv"), &report.baseline)?;
        write_csv(&dir.join("baseline_aggregates.csv"), &report.baseline_aggregates)?;
    }
    Ok(())
}

/// Plain-text table of the aggregates, one line per group.
pub fn summary_table(report: &BenchReport) -> String {
    let mut by_key: BTreeMap<String, &Aggregate> = BTreeMap::new();
    for a in &report.aggregates {
        by_key.insert(
            format!("{} v{} a{}/{} step {:>5} {}", a.map, a.v_max, a.a_acc, a.a_dec, a.step, a.heuristic),
            a,
        );
    }
    let mut out = String::from("group                                   ok%     cost   runtime_ms   expansions\n");
    for (k, a) in by_key {
        out.push_str(&format!(
            "{k:<38} {:>5.1} {:>8.2} {:>12.2} {:>12.1}\n",
            100.0 * a.success_rate,
            a.mean_sum_of_costs,
            a.mean_runtime_ms,
            a.mean_expansions
        ));
    }
    for a in &report.baseline_aggregates {
        out.push_str(&format!(
            "{:<38} {:>5.1} {:>8.2} {:>12.2} {:>12.1}\n",
            format!("{} fixed speed {} {}", a.map, a.step, a.heuristic),
            100.0 * a.success_rate,
            a.mean_sum_of_costs,
            a.mean_runtime_ms,
            a.mean_expansions
        ));
    }
    out
}
