//! Prioritized planning: agents are planned one by one, each avoiding the
//! sweeps of every agent planned before it and the start and goal cells of
//! every agent not planned yet.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clock::{Clock, NullClock};
use crate::error::{Error, Result};
use crate::grid::{well_formed_witnesses, Instance};
use crate::heuristics::{HeuristicContext, HeuristicKind};
use crate::kinematics::{KinematicParams, TransitionTable};
use crate::plan::AgentPlan;
use crate::reservation::ReservationTable;
use crate::search::{sipp, SafeIntervals, SearchLimits, SearchOutcome, SearchProblem, SearchStats, SpeedModel};

/// A permutation of the agent ids; earlier means higher priority.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityOrder(Vec<u32>);

impl PriorityOrder {
    pub fn new(ids: Vec<u32>, instance: &Instance) -> Result<Self> {
        let given: BTreeSet<u32> = ids.iter().copied().collect();
        let expected: BTreeSet<u32> = instance.agents.iter().map(|a| a.id).collect();
        if given.len() != ids.len() || given != expected {
            return Err(Error::BadOrder);
        }
        Ok(Self(ids))
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }
}

/// Instance order.
pub fn default_order(instance: &Instance) -> PriorityOrder {
    PriorityOrder(instance.agents.iter().map(|a| a.id).collect())
}

/// Seeded Fisher-Yates shuffle of the instance order.
pub fn shuffled_order(instance: &Instance, seed: u64) -> PriorityOrder {
    let mut ids: Vec<u32> = instance.agents.iter().map(|a| a.id).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    PriorityOrder(ids)
}

#[derive(Clone, Copy)]
pub struct PlanOptions<'a> {
    pub heuristic: HeuristicKind,
    pub clock: &'a dyn Clock,
    /// Wall-clock budget for the whole solve, in seconds.
    pub time_limit: Option<f64>,
    /// Plan even if the instance is not well-formed (no completeness guarantee).
    pub force: bool,
}

impl Default for PlanOptions<'_> {
    fn default() -> Self {
        Self {
            heuristic: HeuristicKind::H2,
            clock: &NullClock,
            time_limit: None,
            force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentOutcome {
    pub agent: u32,
    pub cost: f64,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Plans in priority order. On failure, only the agents planned before
    /// the failing one.
    pub plans: Vec<AgentPlan>,
    pub agents: Vec<AgentOutcome>,
    pub sum_of_costs: f64,
    pub makespan: f64,
    pub success: bool,
    pub failed_agent: Option<u32>,
    pub timed_out: bool,
    pub stats: SearchStats,
    pub runtime_secs: f64,
}

impl Solution {
    pub fn plan_for(&self, agent: u32) -> Option<&AgentPlan> {
        self.plans.iter().find(|p| p.agent == agent)
    }
}

/// Plans with discretized speeds and bounded acceleration.
pub fn plan(
    instance: &Instance,
    params: &KinematicParams,
    order: &PriorityOrder,
    options: &PlanOptions<'_>,
) -> Result<Solution> {
    params.validate()?;
    let table = TransitionTable::for_params(params, instance.map.cell_size());
    let ctx = HeuristicContext::kinematic(options.heuristic, &table, &instance.map);
    plan_with(instance, SpeedModel::Kinematic(&table), params, &ctx, order, options)
}

/// Baseline: every move at `speed` with instantaneous starts and stops.
pub fn plan_fixed_speed(
    instance: &Instance,
    speed: f64,
    params: &KinematicParams,
    order: &PriorityOrder,
    options: &PlanOptions<'_>,
) -> Result<Solution> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::InvalidParams(alloc::format!("fixed speed must be positive, got {speed}")));
    }
    let ctx = HeuristicContext::fixed_speed(options.heuristic, speed, params.rot_time_quarter, &instance.map);
    let model = SpeedModel::FixedSpeed {
        speed,
        cell_size: instance.map.cell_size(),
    };
    plan_with(instance, model, params, &ctx, order, options)
}

fn plan_with(
    instance: &Instance,
    model: SpeedModel<'_>,
    params: &KinematicParams,
    ctx: &HeuristicContext,
    order: &PriorityOrder,
    options: &PlanOptions<'_>,
) -> Result<Solution> {
    PriorityOrder::new(order.0.clone(), instance)?;
    if !options.force {
        well_formed_witnesses(instance)?;
    }
    let clock = options.clock;
    let started = clock.now_secs();
    let deadline = options.time_limit.map(|l| started + l);
    let map = &instance.map;

    let mut sweeps = ReservationTable::new(map);
    let mut planned = BTreeSet::new();
    let mut solution = Solution {
        plans: Vec::with_capacity(order.0.len()),
        agents: Vec::with_capacity(order.0.len()),
        sum_of_costs: 0.0,
        makespan: 0.0,
        success: true,
        failed_agent: None,
        timed_out: false,
        stats: SearchStats::default(),
        runtime_secs: 0.0,
    };

    for &id in &order.0 {
        let agent = instance.agent(id).ok_or(Error::BadOrder)?;
        let mut table = sweeps.clone();
        table.reserve_endpoints(instance, id, |other| planned.contains(&other));
        let safe = SafeIntervals::build(map, &table);
        let heuristic = ctx.for_goal(map, agent.goal);
        let problem = SearchProblem {
            map,
            safe: &safe,
            model,
            params,
            heuristic: &heuristic,
            agent: id,
            start: agent.start,
            start_heading: agent.start_heading,
            goal: agent.goal,
        };
        let limits = SearchLimits {
            deadline,
            ..SearchLimits::unlimited(clock)
        };
        let result = sipp(&problem, limits);
        solution.stats.accumulate(&result.stats);
        match result.outcome {
            SearchOutcome::Found(path) => {
                sweeps.reserve_plan(&path.plan);
                planned.insert(id);
                solution.sum_of_costs += path.cost;
                solution.makespan = solution.makespan.max(path.cost);
                solution.agents.push(AgentOutcome {
                    agent: id,
                    cost: path.cost,
                    stats: result.stats,
                });
                solution.plans.push(path.plan);
            }
            outcome => {
                solution.success = false;
                solution.failed_agent = Some(id);
                solution.timed_out = outcome == SearchOutcome::Aborted;
                solution.agents.push(AgentOutcome {
                    agent: id,
                    cost: f64::INFINITY,
                    stats: result.stats,
                });
                break;
            }
        }
    }
    solution.runtime_secs = clock.now_secs() - started;
    Ok(solution)
}
