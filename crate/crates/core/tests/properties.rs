use std::collections::VecDeque;

use kinosipp_core::grid::{is_well_formed, AgentTask, Cell, GridMap, Heading, Instance};
use kinosipp_core::kinematics::{KinematicParams, TransitionTable};
use kinosipp_core::planner::{default_order, plan, PlanOptions, PriorityOrder};
use kinosipp_core::reservation::{ReservationTable, TimeInterval};
use kinosipp_core::validator::{validate_solution, ValidationMode};
use kinosipp_core::HeuristicKind;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct SmallWorld {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
    // (start index, goal index, heading) into the free-cell list
    agents: Vec<(usize, usize, usize)>,
}

fn small_world(max_agents: usize) -> impl Strategy<Value = SmallWorld> {
    (3u32..=7, 3u32..=7).prop_flat_map(move |(w, h)| {
        let n = (w * h) as usize;
        (
            Just(w),
            Just(h),
            prop::collection::vec(prop::bool::weighted(0.2), n),
            prop::collection::vec((0usize..64, 0usize..64, 0usize..4), 1..=max_agents),
        )
            .prop_map(|(width, height, blocked, agents)| SmallWorld {
                width,
                height,
                blocked,
                agents,
            })
    })
}

impl SmallWorld {
    fn map(&self) -> GridMap {
        let cells = (0..self.width * self.height)
            .filter(|&i| self.blocked[i as usize])
            .map(|i| Cell::new(i % self.width, i / self.width));
        GridMap::from_blocked(self.width, self.height, cells).unwrap()
    }

    /// Picks distinct starts and distinct goals from the free cells; None
    /// when there are too few free cells.
    fn instance(&self) -> Option<Instance> {
        let map = self.map();
        let mut free: Vec<Cell> = map.free_cells().collect();
        if free.len() < self.agents.len() {
            return None;
        }
        let mut starts = free.clone();
        let mut tasks = Vec::new();
        for (id, &(s, g, h)) in self.agents.iter().enumerate() {
            let start = starts.remove(s % starts.len());
            let goal = free.remove(g % free.len());
            tasks.push(AgentTask {
                id: id as u32,
                start,
                start_heading: Heading::from_index(h),
                goal,
            });
        }
        Instance::new(map, tasks).ok()
    }
}

/// Flood fill on the grid with every other agent's endpoints deleted.
fn well_formed_oracle(inst: &Instance) -> bool {
    let w = inst.map.width() as i64;
    let h = inst.map.height() as i64;
    inst.agents.iter().all(|a| {
        let banned = |c: Cell| inst.agents.iter().any(|b| b.id != a.id && (b.start == c || b.goal == c));
        if banned(a.start) || banned(a.goal) {
            return false;
        }
        let mut seen = vec![false; (w * h) as usize];
        let mut queue = VecDeque::from([a.start]);
        seen[(a.start.y as i64 * w + a.start.x as i64) as usize] = true;
        while let Some(c) = queue.pop_front() {
            if c == a.goal {
                return true;
            }
            for (dx, dy) in [(0, -1), (1, 0), (0, 1), (-1, 0)] {
                let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
                if x < 0 || y < 0 || x >= w || y >= h {
                    continue;
                }
                let n = Cell::new(x as u32, y as u32);
                let i = (y * w + x) as usize;
                if seen[i] || inst.map.is_blocked(n) || banned(n) {
                    continue;
                }
                seen[i] = true;
                queue.push_back(n);
            }
        }
        false
    })
}

/// Accelerate, cruise at `v_max` if the peak would exceed it, decelerate.
fn stop_to_stop(d: f64, v_max: f64, a: f64, b: f64) -> f64 {
    let peak = (2.0 * a * b * d / (a + b)).sqrt();
    if peak <= v_max {
        peak / a + peak / b
    } else {
        let ramp = v_max * v_max / (2.0 * a) + v_max * v_max / (2.0 * b);
        v_max / a + v_max / b + (d - ramp) / v_max
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn well_formedness_matches_flood_fill(world in small_world(5)) {
        if let Some(inst) = world.instance() {
            prop_assert_eq!(is_well_formed(&inst), well_formed_oracle(&inst));
        }
    }

    #[test]
    fn reservations_stay_sorted_disjoint_and_complementary(
        spans in prop::collection::vec((0.0f64..50.0, 0.01f64..10.0, prop::bool::weighted(0.1)), 0..20),
        probes in prop::collection::vec(0.0f64..70.0, 50),
    ) {
        let map = GridMap::new(1, 1).unwrap();
        let cell = Cell::new(0, 0);
        let mut table = ReservationTable::new(&map);
        let inputs: Vec<TimeInterval> = spans
            .iter()
            .map(|&(s, len, open)| if open { TimeInterval::from(s) } else { TimeInterval::new(s, s + len) })
            .collect();
        for &iv in &inputs {
            table.reserve(cell, iv);
        }
        let reserved = table.reserved(cell);
        for pair in reserved.windows(2) {
            prop_assert!(pair[0].end < pair[1].start, "{:?}", reserved);
        }
        let safe = table.safe_intervals(cell);
        for &t in &probes {
            let in_input = inputs.iter().any(|iv| iv.start <= t && t < iv.end);
            let in_reserved = reserved.iter().any(|iv| iv.start <= t && t < iv.end);
            let in_safe = safe.iter().any(|iv| iv.start <= t && t < iv.end);
            prop_assert_eq!(in_input, in_reserved, "t = {}", t);
            prop_assert_ne!(in_reserved, in_safe, "t = {}", t);
        }
    }

    #[test]
    fn transitions_follow_the_acceleration_bounds(
        v_max in 0.5f64..4.0,
        a_acc in 0.2f64..3.0,
        a_dec in 0.2f64..3.0,
        steps in 1u32..8,
        d in 0.5f64..2.0,
    ) {
        let step = v_max / steps as f64;
        let p = KinematicParams::new(v_max, a_acc, a_dec, step, 1.0).unwrap();
        let table = TransitionTable::for_params(&p, d);
        let mirrored = TransitionTable::for_params(&KinematicParams { a_acc: a_dec, a_dec: a_acc, ..p }, d);
        prop_assert_eq!(table.len(), steps as usize + 1);
        for i in 0..table.len() {
            for j in 0..table.len() {
                let (vi, vj) = (table.speed(i), table.speed(j));
                let a = (vj * vj - vi * vi) / (2.0 * d);
                let expect = -a_dec - 1e-9 <= a && a <= a_acc + 1e-9;
                prop_assert_eq!(table.is_achievable(i, j), expect);
                // Running a move backwards swaps the roles of the two limits.
                prop_assert_eq!(table.is_achievable(i, j), mirrored.is_achievable(j, i));
                if let Some(t) = table.move_time(i, j) {
                    let want = if i == 0 && j == 0 { stop_to_stop(d, v_max, a_acc, a_dec) } else { 2.0 * d / (vi + vj) };
                    prop_assert!((t - want).abs() <= 1e-9 && t > 0.0);
                    prop_assert!(t * v_max >= d - 1e-9, "faster than v_max allows");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn well_formed_small_instances_plan_cleanly(world in small_world(4), step_div in 1u32..=4, h in 0usize..3) {
        let Some(inst) = world.instance() else { return Ok(()) };
        if !is_well_formed(&inst) {
            return Ok(());
        }
        let params = KinematicParams { speed_step: 2.0 / step_div as f64, ..KinematicParams::default() };
        let options = PlanOptions { heuristic: HeuristicKind::ALL[h], ..PlanOptions::default() };
        let sol = plan(&inst, &params, &default_order(&inst), &options).unwrap();
        prop_assert!(sol.success, "failed at {:?}", sol.failed_agent);
        let found = validate_solution(&sol.plans, &inst, &ValidationMode::Kinematic(params)).unwrap();
        prop_assert!(found.is_empty(), "{:?}", found);
    }

    #[test]
    fn lower_priorities_do_not_change_earlier_plans(world in small_world(5), a in 0usize..5, b in 0usize..5) {
        let Some(inst) = world.instance() else { return Ok(()) };
        let n = inst.agents.len();
        let (a, b) = (a % n, b % n);
        if a == b {
            return Ok(());
        }
        // Swapping the goals of two agents keeps the set of endpoints, so the
        // agents ranked above both of them see exactly the same constraints.
        let mut swapped = inst.agents.clone();
        let (ga, gb) = (swapped[a].goal, swapped[b].goal);
        swapped[a].goal = gb;
        swapped[b].goal = ga;
        let other = Instance::new(inst.map.clone(), swapped).unwrap();
        let order = PriorityOrder::new((0..n as u32).collect(), &inst).unwrap();
        let options = PlanOptions { force: true, ..PlanOptions::default() };
        let params = KinematicParams::default();
        let x = plan(&inst, &params, &order, &options).unwrap();
        let y = plan(&other, &params, &order, &options).unwrap();
        let k = a.min(b).min(x.plans.len());
        prop_assert!(y.plans.len() >= k);
        prop_assert_eq!(&x.plans[..k], &y.plans[..k]);
    }
}
