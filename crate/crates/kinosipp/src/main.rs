use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use kinosipp::bench::{self, with_cell_size};
use kinosipp::config::{BenchmarkConfig, SolveConfig};
use kinosipp::formats::{
    self, parse_solution, read_instance, read_map, read_text, reservation_dump, serialize_map, serialize_scenario,
    solution_file, write_text, ModelRecord,
};
use kinosipp::StdClock;
use kinosipp_core::grid::Instance;
use kinosipp_core::heuristics::HeuristicKind;
use kinosipp_core::kinematics::KinematicParams;
use kinosipp_core::planner::{default_order, plan, plan_fixed_speed, shuffled_order, PlanOptions};
use kinosipp_core::reservation::ReservationTable;
use kinosipp_core::scenario::{generate_instance, WarehouseLayout};
use kinosipp_core::validator::{validate_solution, ValidationMode};

#[derive(Parser)]
#[command(name = "kinosipp", version, about = "Prioritized multi-agent planning with speed and acceleration limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan all agents of a scenario and write the solution as JSON.
    Solve(SolveArgs),
    /// Run a benchmark configuration and write metrics CSV files.
    Bench(BenchArgs),
    /// Write a warehouse map and a random scenario for it.
    Genmap(GenmapArgs),
    /// Check a solution file against its map and scenario.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// JSON file with defaults for any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    scen: Option<PathBuf>,
    /// Maximum speed (cells/s when the cell size is 1).
    #[arg(long)]
    vmax: Option<f64>,
    /// Maximum acceleration.
    #[arg(long)]
    acc: Option<f64>,
    /// Maximum deceleration.
    #[arg(long)]
    dec: Option<f64>,
    /// Speed discretization step.
    #[arg(long)]
    step: Option<f64>,
    /// h1, h2 or h3.
    #[arg(long)]
    heuristic: Option<String>,
    /// Seconds per quarter turn.
    #[arg(long)]
    rot_time: Option<f64>,
    #[arg(long)]
    cell_size: Option<f64>,
    /// Shuffle the priority order with this seed instead of using file order.
    #[arg(long)]
    order_seed: Option<u64>,
    /// Plan at this constant speed with instant starts and stops instead.
    #[arg(long)]
    fixed_speed: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plan even if the instance is not well-formed.
    #[arg(long)]
    force: bool,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Also write the final reservation table as JSON.
    #[arg(long)]
    dump_reservations: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Worker threads (default: KINOSIPP_WORKERS, then one per core).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct GenmapArgs {
    /// map1, map2 or map3.
    #[arg(long, default_value = "map1")]
    preset: String,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    #[arg(long)]
    blocks_x: Option<u32>,
    #[arg(long)]
    blocks_y: Option<u32>,
    #[arg(long)]
    block_w: Option<u32>,
    #[arg(long)]
    block_h: Option<u32>,
    #[arg(long)]
    gap_x: Option<u32>,
    #[arg(long)]
    gap_y: Option<u32>,
    #[arg(long, default_value_t = 20)]
    agents: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    map_out: PathBuf,
    /// Scenario output; omitted means no scenario.
    #[arg(long)]
    scen_out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    plan: PathBuf,
    map: PathBuf,
    scen: PathBuf,
}

/// Failures before planning starts.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench_cmd(a).map(|()| ExitCode::SUCCESS).map_err(InputError),
        Command::Genmap(a) => genmap(a).map(|()| ExitCode::SUCCESS).map_err(InputError),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => code,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn solve(a: SolveArgs) -> Result<ExitCode, InputError> {
    let file: SolveConfig = match &a.config {
        Some(p) => serde_json::from_str(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => SolveConfig::default(),
    };
    let map_path = a.map.or(file.map).ok_or_else(|| anyhow!("--map is required"))?;
    let scen_path = a.scen.or(file.scen).ok_or_else(|| anyhow!("--scen is required"))?;
    let defaults = KinematicParams::default();
    let params = KinematicParams::new(
        pick(a.vmax, file.vmax, defaults.v_max),
        pick(a.acc, file.acc, defaults.a_acc),
        pick(a.dec, file.dec, defaults.a_dec),
        pick(a.step, file.step, defaults.speed_step),
        pick(a.rot_time, file.rot_time, defaults.rot_time_quarter),
    )?;
    let cell_size = pick(a.cell_size, file.cell_size, 1.0);
    let h_name = pick(a.heuristic, file.heuristic, "h2".into());
    let heuristic = HeuristicKind::parse(&h_name).ok_or_else(|| anyhow!("unknown heuristic {h_name:?}"))?;
    let fixed_speed = a.fixed_speed.or(file.fixed_speed);
    let force = a.force || file.force.unwrap_or(false);
    let out = a.out.or(file.out);

    let instance = read_instance(&map_path, &scen_path)?;
    let instance = Instance::new(with_cell_size(&instance.map, cell_size)?, instance.agents)?;
    let order = match a.order_seed.or(file.order_seed) {
        Some(seed) => shuffled_order(&instance, seed),
        None => default_order(&instance),
    };
    let clock = StdClock::new();
    let options = PlanOptions {
        heuristic,
        clock: &clock,
        time_limit: a.time_limit.or(file.time_limit),
        force,
    };
    let solution = match fixed_speed {
        Some(v) => plan_fixed_speed(&instance, v, &params, &order, &options),
        None => plan(&instance, &params, &order, &options),
    }
    .map_err(|e| match e {
        kinosipp_core::Error::NotWellFormed { .. } => {
            anyhow!("{e}; pass --force to plan anyway without a completeness guarantee")
        }
        e => e.into(),
    })?;

    let model = ModelRecord {
        v_max: params.v_max,
        a_acc: params.a_acc,
        a_dec: params.a_dec,
        speed_step: params.speed_step,
        rot_time: params.rot_time_quarter,
        cell_size,
        fixed_speed,
    };
    let json = serde_json::to_string_pretty(&solution_file(&solution, model)).map_err(anyhow::Error::from)?;
    match &out {
        Some(p) => write_text(p, &json)?,
        None => println!("{json}"),
    }
    if let Some(p) = &a.dump_reservations {
        let mut table = ReservationTable::new(&instance.map);
        for plan in &solution.plans {
            table.reserve_plan(plan);
        }
        write_text(p, &serde_json::to_string_pretty(&reservation_dump(&table)).map_err(anyhow::Error::from)?)?;
    }
    eprintln!(
        "{} agents, success={}, sum_of_costs={:.3}, makespan={:.3}, expansions={}, {:.1} ms",
        instance.agents.len(),
        solution.success,
        solution.sum_of_costs,
        solution.makespan,
        solution.stats.expansions,
        solution.runtime_secs * 1e3
    );
    if solution.success {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "planning failed at agent {}{}",
            solution.failed_agent.map_or("?".into(), |i| i.to_string()),
            if solution.timed_out { " (time limit)" } else { "" }
        );
        Ok(ExitCode::from(2))
    }
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let config: BenchmarkConfig =
        serde_json::from_str(&read_text(&a.config)?).with_context(|| format!("parsing {}", a.config.display()))?;
    let report = bench::run(&config, a.workers)?;
    bench::write_report(&a.out, &report)?;
    print!("{}", bench::summary_table(&report));
    eprintln!("{} rows written to {}", report.rows.len() + report.baseline.len(), a.out.display());
    Ok(())
}

fn genmap(a: GenmapArgs) -> Result<()> {
    let base = WarehouseLayout::preset(&a.preset).ok_or_else(|| anyhow!("unknown preset {:?}", a.preset))?;
    let layout = WarehouseLayout {
        width: a.width.unwrap_or(base.width),
        height: a.height.unwrap_or(base.height),
        blocks_x: a.blocks_x.unwrap_or(base.blocks_x),
        blocks_y: a.blocks_y.unwrap_or(base.blocks_y),
        block_w: a.block_w.unwrap_or(base.block_w),
        block_h: a.block_h.unwrap_or(base.block_h),
        gap_x: a.gap_x.unwrap_or(base.gap_x),
        gap_y: a.gap_y.unwrap_or(base.gap_y),
    };
    let map = layout.build()?;
    write_text(&a.map_out, &serialize_map(&map))?;
    if let Some(p) = &a.scen_out {
        let instance = generate_instance(&map, a.agents, a.seed)?;
        write_text(p, &serialize_scenario(&instance))?;
    }
    Ok(())
}

fn load_for_validation(a: &ValidateArgs) -> Result<(Instance, Vec<kinosipp_core::AgentPlan>, ModelRecord)> {
    let (file, plans) = parse_solution(&read_text(&a.plan)?).with_context(|| format!("reading {}", a.plan.display()))?;
    let map = read_map(&a.map)?;
    let scen = read_text(&a.scen)?;
    let instance = formats::parse_scenario(&scen, with_cell_size(&map, file.model.cell_size)?)?;
    Ok((instance, plans, file.model))
}

fn validate(a: ValidateArgs) -> Result<ExitCode, InputError> {
    let (instance, plans, model) = load_for_validation(&a)?;
    let mode = match model.fixed_speed {
        Some(speed) => ValidationMode::FixedSpeed {
            speed,
            rot_time_quarter: model.rot_time,
        },
        None => ValidationMode::Kinematic(model.params()),
    };
    let violations = validate_solution(&plans, &instance, &mode)?;
    if violations.is_empty() {
        println!("ok: {} plans, no violations", plans.len());
        return Ok(ExitCode::SUCCESS);
    }
    for v in &violations {
        eprintln!("{v}");
    }
    eprintln!("{} violation(s) in {}", violations.len(), a.plan.display());
    Ok(ExitCode::from(2))
}
