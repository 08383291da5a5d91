//! Single-agent safe-interval search over `(cell, heading, speed, interval)`.
//!
//! An agent at zero speed may rotate and wait, so of all states sharing a
//! cell, heading and safe interval only the earliest matters. A moving agent
//! can do neither: it must leave through the cell ahead right after it
//! arrives. Arriving earlier is therefore not always better. Moving states
//! keep a slack window instead. The whole run since the last standstill can
//! be delayed by up to `slack` seconds without violating any reservation.
//! Any arrival time inside the window is reachable, so per key the search
//! tracks the union of windows seen so far and only opens states for the
//! parts of a new window not already covered.
//!
//! The agent occupies a cell from the moment it starts moving into it until
//! it has completely moved out of it. That whole span must fit in one safe
//! interval of the cell.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::clock::Clock;
use crate::grid::{Cell, GridMap, Heading};
use crate::heuristics::GoalHeuristic;
use crate::kinematics::{KinematicParams, TransitionTable};
use crate::plan::{Action, AgentPlan};
use crate::reservation::{complement, ReservationTable, TimeInterval};
use crate::TIME_EPS;

/// How an agent's speed evolves.
#[derive(Debug, Clone, Copy)]
pub enum SpeedModel<'a> {
    /// Discretized speeds with precomputed transitions.
    Kinematic(&'a TransitionTable),
    /// Constant cruising speed with instantaneous starts and stops; the agent
    /// may wait or rotate in any cell.
    FixedSpeed { speed: f64, cell_size: f64 },
}

impl SpeedModel<'_> {
    pub fn num_speeds(&self) -> usize {
        match self {
            SpeedModel::Kinematic(t) => t.len(),
            SpeedModel::FixedSpeed { .. } => 1,
        }
    }

    fn achievable(&self, from: usize) -> &[usize] {
        match self {
            SpeedModel::Kinematic(t) => t.achievable(from),
            SpeedModel::FixedSpeed { .. } => &[0],
        }
    }

    fn move_time(&self, from: usize, to: usize) -> f64 {
        match *self {
            SpeedModel::Kinematic(t) => t.move_time(from, to).unwrap_or(f64::INFINITY),
            SpeedModel::FixedSpeed { speed, cell_size } => cell_size / speed,
        }
    }

    /// Speeds reported at the two ends of a move.
    fn move_speeds(&self, from: usize, to: usize) -> (f64, f64) {
        match *self {
            SpeedModel::Kinematic(t) => (t.speed(from), t.speed(to)),
            SpeedModel::FixedSpeed { speed, .. } => (speed, speed),
        }
    }

    /// Whether a state at this speed index can wait and rotate.
    fn is_stopped(&self, speed_idx: usize) -> bool {
        match self {
            SpeedModel::Kinematic(_) => speed_idx == 0,
            SpeedModel::FixedSpeed { .. } => true,
        }
    }
}

/// Time to rotate in place from one heading to another.
pub fn rotation_cost(from: Heading, to: Heading, params: &KinematicParams) -> f64 {
    params.rotation_time(from.quarter_turns(to))
}

/// At the goal, stopped, and free to stay forever.
pub fn goal_test(cell: Cell, speed: f64, interval: &TimeInterval, goal: Cell) -> bool {
    cell == goal && speed == 0.0 && interval.is_unbounded()
}

/// Safe intervals of every cell, computed once per search.
#[derive(Debug, Clone)]
pub struct SafeIntervals {
    per_cell: Vec<Vec<TimeInterval>>,
}

impl SafeIntervals {
    pub fn build(map: &GridMap, table: &ReservationTable) -> Self {
        let per_cell = (0..map.num_cells())
            .map(|i| {
                if map.is_free(map.cell_at(i)) {
                    complement(table.reserved_at(i))
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { per_cell }
    }

    pub fn of(&self, index: usize) -> &[TimeInterval] {
        &self.per_cell[index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchState {
    pub cell: Cell,
    pub heading: Heading,
    pub speed_idx: usize,
    /// Arrival time at `cell`.
    pub time: f64,
    pub interval_id: usize,
    pub interval: TimeInterval,
}

/// A found path: its states (with actual arrival times) and the timed plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub states: Vec<SearchState>,
    pub plan: AgentPlan,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    /// Successors discarded because an equal-or-better state with the same key existed.
    pub duplicates_pruned: u64,
    /// Expanded states later superseded by a better state with the same key.
    pub reopened: u64,
    /// Times a key's arrival-window union exceeded its size cap and two of
    /// its ranges were joined. Zero means the search was exact.
    pub window_merges: u64,
    pub runtime_secs: f64,
}

impl SearchStats {
    pub fn accumulate(&mut self, other: &SearchStats) {
        self.expansions += other.expansions;
        self.generated += other.generated;
        self.duplicates_pruned += other.duplicates_pruned;
        self.reopened += other.reopened;
        self.window_merges += other.window_merges;
        self.runtime_secs += other.runtime_secs;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found(Path),
    NoPath,
    /// Deadline or expansion budget hit.
    Aborted,
}

impl SearchOutcome {
    pub fn path(&self) -> Option<&Path> {
        match self {
            SearchOutcome::Found(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_path(self) -> Option<Path> {
        match self {
            SearchOutcome::Found(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Copy)]
pub struct SearchLimits<'a> {
    pub clock: &'a dyn Clock,
    /// Absolute clock reading after which the search gives up.
    pub deadline: Option<f64>,
    pub max_expansions: Option<u64>,
    /// Record the f-values of expanded states in the returned trace.
    pub trace: bool,
}

impl<'a> SearchLimits<'a> {
    pub fn unlimited(clock: &'a dyn Clock) -> Self {
        Self {
            clock,
            deadline: None,
            max_expansions: None,
            trace: false,
        }
    }
}

/// One expanded state, recorded when tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    pub cell: Cell,
    pub heading: Heading,
    pub speed_idx: usize,
    pub time: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
    pub trace: Vec<Expansion>,
}

/// Everything a single-agent search needs besides limits.
pub struct SearchProblem<'a> {
    pub map: &'a GridMap,
    pub safe: &'a SafeIntervals,
    pub model: SpeedModel<'a>,
    pub params: &'a KinematicParams,
    pub heuristic: &'a GoalHeuristic<'a>,
    pub agent: u32,
    pub start: Cell,
    pub start_heading: Heading,
    pub goal: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Open,
    Closed,
    Dead,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    cell: u32,
    heading: Heading,
    speed: u16,
    interval: u16,
    t: f64,
    slack: f64,
    parent: u32,
    status: Status,
}

/// Disjoint arrival-window ranges tracked per moving key.
const MAX_WINDOW_RANGES: usize = 4;

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    f: f64,
    g: f64,
    key: (u32, u8, u16, u16),
    id: u32,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    // BinaryHeap pops the maximum: smallest f, then largest g, then smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.key.cmp(&self.key))
            .then(other.id.cmp(&self.id))
    }
}

struct Search<'p, 'a> {
    p: &'p SearchProblem<'a>,
    n_speeds: usize,
    nodes: Vec<Node>,
    /// Live stopped node ids per (cell, heading, speed); the interval is
    /// matched on scan.
    slots: Vec<Vec<u32>>,
    /// Union of arrival windows of moving states per (cell, heading, speed),
    /// as `(interval, earliest, latest)`.
    covered: Vec<Vec<(u16, f64, f64)>>,
    open: BinaryHeap<QueueEntry>,
    stats: SearchStats,
}

impl<'p, 'a> Search<'p, 'a> {
    fn new(p: &'p SearchProblem<'a>) -> Self {
        let n_speeds = p.model.num_speeds();
        let slots = p.map.num_cells() * 4 * n_speeds;
        Self {
            p,
            n_speeds,
            nodes: Vec::new(),
            slots: vec![Vec::new(); slots],
            covered: vec![Vec::new(); slots],
            open: BinaryHeap::new(),
            stats: SearchStats::default(),
        }
    }

    fn slot(&self, cell: u32, heading: Heading, speed: u16) -> usize {
        (cell as usize * 4 + heading.index()) * self.n_speeds + speed as usize
    }

    fn dominates(a: &Node, b: &Node) -> bool {
        a.t <= b.t + TIME_EPS && a.t + a.slack >= b.t + b.slack - TIME_EPS
    }

    fn push(&mut self, node: Node) {
        self.stats.generated += 1;
        let cell = self.p.map.cell_at(node.cell as usize);
        let h = self.p.heuristic.estimate(cell, node.heading, node.speed as usize);
        if !h.is_finite() {
            return;
        }
        let slot = self.slot(node.cell, node.heading, node.speed);
        if !self.p.model.is_stopped(node.speed as usize) {
            self.push_moving(node, slot, h);
            return;
        }
        let same = |n: &Node| n.interval == node.interval;
        if self.slots[slot]
            .iter()
            .map(|&id| &self.nodes[id as usize])
            .any(|e| same(e) && Self::dominates(e, &node))
        {
            self.stats.duplicates_pruned += 1;
            return;
        }
        let mut i = 0;
        while i < self.slots[slot].len() {
            let id = self.slots[slot][i] as usize;
            let e = self.nodes[id];
            if same(&e) && Self::dominates(&node, &e) {
                if e.status == Status::Closed {
                    self.stats.reopened += 1;
                }
                self.nodes[id].status = Status::Dead;
                self.slots[slot].swap_remove(i);
            } else {
                i += 1;
            }
        }
        let id = self.open_node(node, h);
        self.slots[slot].push(id);
    }

    fn open_node(&mut self, node: Node, h: f64) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(node);
        self.open.push(QueueEntry {
            f: node.t + h,
            g: node.t,
            key: (node.cell, node.heading.index() as u8, node.speed, node.interval),
            id,
        });
        id
    }

    /// Keeps at most `MAX_WINDOW_RANGES` ranges per key by joining the two
    /// closest ones. Times inside the closed gap are then treated as already
    /// reached, which can only cost optimality, never completeness: stopped
    /// states are never merged.
    fn cap_coverage(&mut self, slot: usize, interval: u16) {
        let cov = &mut self.covered[slot];
        let count = cov.iter().filter(|r| r.0 == interval).count();
        if count <= MAX_WINDOW_RANGES {
            return;
        }
        let mut mine: Vec<(f64, f64)> = cov.iter().filter(|r| r.0 == interval).map(|r| (r.1, r.2)).collect();
        cov.retain(|r| r.0 != interval);
        mine.sort_by(|a, b| a.0.total_cmp(&b.0));
        while mine.len() > MAX_WINDOW_RANGES {
            let i = (0..mine.len() - 1)
                .min_by(|&i, &j| (mine[i + 1].0 - mine[i].1).total_cmp(&(mine[j + 1].0 - mine[j].1)))
                .unwrap_or(0);
            mine[i].1 = mine[i].1.max(mine[i + 1].1);
            mine.remove(i + 1);
            self.stats.window_merges += 1;
        }
        cov.extend(mine.into_iter().map(|(a, b)| (interval, a, b)));
    }

    fn push_moving(&mut self, node: Node, slot: usize, h: f64) {
        let (lo, hi) = (node.t, node.t + node.slack);
        let mut ranges: Vec<(f64, f64)> = self.covered[slot]
            .iter()
            .filter(|r| r.0 == node.interval)
            .map(|r| (r.1, r.2))
            .collect();
        ranges.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut pieces: Vec<(f64, f64)> = Vec::new();
        if hi - lo <= TIME_EPS {
            if !ranges.iter().any(|&(a, b)| a <= lo + TIME_EPS && lo <= b + TIME_EPS) {
                pieces.push((lo, hi));
            }
        } else {
            let mut cur = lo;
            for &(a, b) in &ranges {
                if b < cur || a > hi {
                    continue;
                }
                if a > cur + TIME_EPS {
                    pieces.push((cur, a));
                }
                cur = cur.max(b);
            }
            if hi > cur + TIME_EPS {
                pieces.push((cur, hi));
            }
        }
        if pieces.is_empty() {
            self.stats.duplicates_pruned += 1;
            return;
        }

        let (mut m_lo, mut m_hi) = (lo, hi);
        self.covered[slot].retain(|&(iv, a, b)| {
            let overlaps = iv == node.interval && a <= m_hi + TIME_EPS && b >= m_lo - TIME_EPS;
            if overlaps {
                m_lo = m_lo.min(a);
                m_hi = m_hi.max(b);
            }
            !overlaps
        });
        self.covered[slot].push((node.interval, m_lo, m_hi));
        self.cap_coverage(slot, node.interval);

        for (a, b) in pieces {
            self.open_node(
                Node {
                    t: a,
                    slack: b - a,
                    ..node
                },
                h,
            );
        }
    }

    fn expand(&mut self, id: u32) {
        let n = self.nodes[id as usize];
        let map = self.p.map;
        let here = map.cell_at(n.cell as usize);
        let iv = self.p.safe.of(n.cell as usize)[n.interval as usize];
        let model = self.p.model;
        let v = n.speed as usize;

        if model.is_stopped(v) {
            for h2 in Heading::ALL {
                let Some(next) = map.step(here, h2) else { continue };
                let ni = map.index(next);
                let earliest = n.t + rotation_cost(n.heading, h2, self.p.params);
                for &w in model.achievable(v) {
                    let tau = model.move_time(v, w);
                    let origin_limit = iv.end - tau;
                    let stopped = model.is_stopped(w);
                    for (j, sj) in self.p.safe.of(ni).iter().enumerate() {
                        if sj.start > origin_limit + TIME_EPS {
                            break;
                        }
                        let dep_min = earliest.max(sj.start);
                        let dep_max = origin_limit.min(sj.end - tau);
                        if dep_min > dep_max + TIME_EPS {
                            continue;
                        }
                        self.push(Node {
                            cell: ni as u32,
                            heading: h2,
                            speed: w as u16,
                            interval: j as u16,
                            t: dep_min + tau,
                            slack: if stopped { f64::INFINITY } else { (dep_max - dep_min).max(0.0) },
                            parent: id,
                            status: Status::Open,
                        });
                    }
                }
            }
        } else {
            let Some(next) = map.step(here, n.heading) else { return };
            let ni = map.index(next);
            for &w in model.achievable(v) {
                let tau = model.move_time(v, w);
                let stopped = model.is_stopped(w);
                let upper = n.slack.min(iv.end - n.t - tau);
                for (j, sj) in self.p.safe.of(ni).iter().enumerate() {
                    let delay_min = (sj.start - n.t).max(0.0);
                    if delay_min > upper + TIME_EPS {
                        break;
                    }
                    let delay_max = upper.min(sj.end - n.t - tau);
                    if delay_min > delay_max + TIME_EPS {
                        continue;
                    }
                    self.push(Node {
                        cell: ni as u32,
                        heading: n.heading,
                        speed: w as u16,
                        interval: j as u16,
                        t: n.t + delay_min + tau,
                        slack: if stopped { f64::INFINITY } else { (delay_max - delay_min).max(0.0) },
                        parent: id,
                        status: Status::Open,
                    });
                }
            }
        }
    }

    fn reconstruct(&self, goal_id: u32) -> Path {
        let mut chain = Vec::new();
        let mut id = goal_id;
        while id != NO_PARENT {
            chain.push(self.nodes[id as usize]);
            id = self.nodes[id as usize].parent;
        }
        chain.reverse();

        let model = self.p.model;
        let k = chain.len() - 1;
        // Moving states may have been delayed within their slack; recover
        // the actual times backwards from the goal.
        let mut actual = vec![0.0; chain.len()];
        actual[k] = chain[k].t;
        for i in (0..k).rev() {
            actual[i] = if model.is_stopped(chain[i].speed as usize) {
                chain[i].t
            } else {
                actual[i + 1] - model.move_time(chain[i].speed as usize, chain[i + 1].speed as usize)
            };
        }

        let map = self.p.map;
        let mut actions = Vec::new();
        for i in 0..k {
            let (a, b) = (&chain[i], &chain[i + 1]);
            let from = map.cell_at(a.cell as usize);
            let to = map.cell_at(b.cell as usize);
            let (va, vb) = (a.speed as usize, b.speed as usize);
            let tau = model.move_time(va, vb);
            let t_end = actual[i + 1];
            let mut t = actual[i];
            if model.is_stopped(va) {
                if a.heading != b.heading {
                    let rot_end = t + rotation_cost(a.heading, b.heading, self.p.params);
                    actions.push(Action::Rotate {
                        t_start: t,
                        t_end: rot_end,
                        cell: from,
                        from: a.heading,
                        to: b.heading,
                    });
                    t = rot_end;
                }
                let departure = t_end - tau;
                if departure > t + TIME_EPS {
                    actions.push(Action::Wait {
                        t_start: t,
                        t_end: departure,
                        cell: from,
                    });
                    t = departure;
                }
            }
            let (v_start, v_end) = model.move_speeds(va, vb);
            actions.push(Action::Move {
                t_start: t,
                t_end,
                from,
                to,
                v_start,
                v_end,
            });
        }

        let states = chain
            .iter()
            .zip(&actual)
            .map(|(n, &t)| SearchState {
                cell: map.cell_at(n.cell as usize),
                heading: n.heading,
                speed_idx: n.speed as usize,
                time: t,
                interval_id: n.interval as usize,
                interval: self.p.safe.of(n.cell as usize)[n.interval as usize],
            })
            .collect();
        Path {
            states,
            cost: chain[k].t,
            plan: AgentPlan {
                agent: self.p.agent,
                start: self.p.start,
                start_heading: self.p.start_heading,
                goal: self.p.goal,
                actions,
            },
        }
    }
}

/// Runs the search. Returns the earliest-arrival path in the discretized
/// state space when one exists (given an admissible heuristic).
pub fn sipp(problem: &SearchProblem<'_>, limits: SearchLimits<'_>) -> SearchResult {
    let started = limits.clock.now_secs();
    let map = problem.map;
    let mut search = Search::new(problem);
    let mut trace = Vec::new();
    let finish = |search: &Search, outcome, trace| SearchResult {
        outcome,
        stats: SearchStats {
            runtime_secs: limits.clock.now_secs() - started,
            ..search.stats
        },
        trace,
    };

    if !map.is_free(problem.start) || !map.is_free(problem.goal) {
        return finish(&search, SearchOutcome::NoPath, trace);
    }
    let si = map.index(problem.start);
    if !problem.safe.of(si).first().is_some_and(|s| s.start <= TIME_EPS) {
        return finish(&search, SearchOutcome::NoPath, trace);
    }
    search.push(Node {
        cell: si as u32,
        heading: problem.start_heading,
        speed: 0,
        interval: 0,
        t: 0.0,
        slack: f64::INFINITY,
        parent: NO_PARENT,
        status: Status::Open,
    });

    while let Some(entry) = search.open.pop() {
        let node = search.nodes[entry.id as usize];
        if node.status != Status::Open {
            continue;
        }
        search.nodes[entry.id as usize].status = Status::Closed;
        search.stats.expansions += 1;
        let cell = map.cell_at(node.cell as usize);
        if limits.trace {
            trace.push(Expansion {
                cell,
                heading: node.heading,
                speed_idx: node.speed as usize,
                time: node.t,
                f: entry.f,
            });
        }

        let iv = problem.safe.of(node.cell as usize)[node.interval as usize];
        if cell == problem.goal && problem.model.is_stopped(node.speed as usize) && iv.is_unbounded() {
            let path = search.reconstruct(entry.id);
            return finish(&search, SearchOutcome::Found(path), trace);
        }

        if search.stats.expansions.is_multiple_of(128) {
            let over_budget = limits.max_expansions.is_some_and(|m| search.stats.expansions >= m);
            let late = limits.deadline.is_some_and(|d| limits.clock.now_secs() > d);
            if over_budget || late {
                return finish(&search, SearchOutcome::Aborted, trace);
            }
        }
        search.expand(entry.id);
    }
    finish(&search, SearchOutcome::NoPath, trace)
}
