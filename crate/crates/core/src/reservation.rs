//! Per-cell reserved time intervals and the safe intervals between them.
//!
//! Intervals are half-open `[start, end)`, so an agent may enter a cell at
//! the instant another agent's reservation ends.
//!
//! Agents are disks whose diameter equals the cell size. During a move
//! between adjacent cell centres the disk overlaps exactly the origin and
//! the destination cell for the whole move, and it only touches the side
//! cells tangentially, which does not count as overlap.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{Cell, GridMap, Instance};
use crate::plan::{Action, AgentPlan};
use crate::TIME_EPS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub const ALL: TimeInterval = TimeInterval {
        start: 0.0,
        end: f64::INFINITY,
    };

    pub const fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub const fn from(start: f64) -> Self {
        Self {
            start,
            end: f64::INFINITY,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn is_unbounded(&self) -> bool {
        self.end == f64::INFINITY
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    /// `other` lies inside `self`, up to [`TIME_EPS`].
    pub fn covers(&self, other: &TimeInterval) -> bool {
        self.start <= other.start + TIME_EPS && other.end <= self.end + TIME_EPS
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t + TIME_EPS && t < self.end - TIME_EPS
    }

    /// Shared length of two intervals (zero when they only touch).
    pub fn overlap(&self, other: &TimeInterval) -> f64 {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if hi > lo {
            hi - lo
        } else {
            0.0
        }
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unbounded() {
            write!(f, "[{}, inf)", self.start)
        } else {
            write!(f, "[{}, {})", self.start, self.end)
        }
    }
}

/// Inserts `iv` into a sorted disjoint list, merging anything it overlaps
/// or touches.
pub(crate) fn insert_merged(list: &mut Vec<TimeInterval>, iv: TimeInterval) {
    if iv.is_empty() {
        return;
    }
    let first = list.partition_point(|x| x.end + TIME_EPS < iv.start);
    let mut last = first;
    let mut merged = iv;
    while last < list.len() && list[last].start <= merged.end + TIME_EPS {
        merged.start = merged.start.min(list[last].start);
        merged.end = merged.end.max(list[last].end);
        last += 1;
    }
    list.splice(first..last, [merged]);
}

/// The time interval during which an agent's disk overlaps `cell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub cell: Cell,
    pub interval: TimeInterval,
}

/// Per-cell sorted, pairwise disjoint reserved intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservationTable {
    width: u32,
    height: u32,
    reserved: Vec<Vec<TimeInterval>>,
}

impl ReservationTable {
    pub fn new(map: &GridMap) -> Self {
        Self {
            width: map.width(),
            height: map.height(),
            reserved: vec![Vec::new(); map.num_cells()],
        }
    }

    fn index(&self, cell: Cell) -> Option<usize> {
        (cell.x < self.width && cell.y < self.height).then(|| cell.y as usize * self.width as usize + cell.x as usize)
    }

    pub fn reserve(&mut self, cell: Cell, interval: TimeInterval) {
        if let Some(i) = self.index(cell) {
            insert_merged(&mut self.reserved[i], interval);
        }
    }

    pub fn reserved(&self, cell: Cell) -> &[TimeInterval] {
        self.index(cell).map_or(&[], |i| &self.reserved[i])
    }

    pub(crate) fn reserved_at(&self, index: usize) -> &[TimeInterval] {
        &self.reserved[index]
    }

    /// Cells with at least one reservation, in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (Cell, &[TimeInterval])> + '_ {
        let w = self.width as usize;
        self.reserved
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(move |(i, r)| (Cell::new((i % w) as u32, (i / w) as u32), r.as_slice()))
    }

    /// Maximal intervals of `[0, inf)` not covered by any reservation.
    pub fn safe_intervals(&self, cell: Cell) -> Vec<TimeInterval> {
        complement(self.reserved(cell))
    }

    /// The safe interval that contains the whole `occupancy`, if any.
    pub fn fits(&self, cell: Cell, occupancy: TimeInterval) -> Option<TimeInterval> {
        self.safe_intervals(cell).into_iter().find(|s| s.covers(&occupancy))
    }

    pub fn reserve_records(&mut self, records: &[SweepRecord]) {
        for r in records {
            self.reserve(r.cell, r.interval);
        }
    }

    pub fn reserve_plan(&mut self, plan: &AgentPlan) {
        self.reserve_records(&sweep_of_plan(plan));
    }

    /// Blocks the start and goal of every agent other than `skip_agent`
    /// that has not been planned yet, for all time.
    pub fn reserve_endpoints(&mut self, instance: &Instance, skip_agent: u32, is_planned: impl Fn(u32) -> bool) {
        for a in &instance.agents {
            if a.id == skip_agent || is_planned(a.id) {
                continue;
            }
            self.reserve(a.start, TimeInterval::ALL);
            self.reserve(a.goal, TimeInterval::ALL);
        }
    }
}

/// Complement of a sorted disjoint list within `[0, inf)`.
pub(crate) fn complement(reserved: &[TimeInterval]) -> Vec<TimeInterval> {
    let mut out = Vec::with_capacity(reserved.len() + 1);
    let mut t = 0.0;
    for r in reserved {
        if r.start > t {
            out.push(TimeInterval::new(t, r.start));
        }
        t = t.max(r.end);
    }
    if t < f64::INFINITY {
        out.push(TimeInterval::from(t));
    }
    out
}

/// Cells overlapped by the agent over time, coalesced per cell and sorted
/// by cell then start time.
pub fn sweep_of_plan(plan: &AgentPlan) -> Vec<SweepRecord> {
    let mut raw: Vec<SweepRecord> = Vec::with_capacity(plan.actions.len() * 2 + 2);
    let mut push = |cell, start, end| raw.push(SweepRecord {
        cell,
        interval: TimeInterval::new(start, end),
    });
    let first = plan.actions.first().map_or(f64::INFINITY, Action::t_start);
    push(plan.start, 0.0, first);
    let mut last_cell = plan.start;
    for a in &plan.actions {
        match *a {
            Action::Rotate { t_start, t_end, cell, .. } | Action::Wait { t_start, t_end, cell } => {
                push(cell, t_start, t_end);
                last_cell = cell;
            }
            Action::Move {
                t_start, t_end, from, to, ..
            } => {
                push(from, t_start, t_end);
                push(to, t_start, t_end);
                last_cell = to;
            }
        }
    }
    if !plan.actions.is_empty() {
        push(last_cell, plan.end_time(), f64::INFINITY);
    }

    raw.retain(|r| !r.interval.is_empty());
    raw.sort_by(|a, b| a.cell.cmp(&b.cell).then(a.interval.start.total_cmp(&b.interval.start)));
    let mut out: Vec<SweepRecord> = Vec::with_capacity(raw.len());
    for r in raw {
        match out.last_mut() {
            Some(prev) if prev.cell == r.cell && r.interval.start <= prev.interval.end + TIME_EPS => {
                prev.interval.end = prev.interval.end.max(r.interval.end);
            }
            _ => out.push(r),
        }
    }
    out
}
