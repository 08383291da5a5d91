//! Independent plan checker.
//!
//! Per agent it replays the actions and checks pose continuity, speed and
//! acceleration bounds, that rotations and waits happen at rest, and that
//! the agent ends stopped on its goal. Across agents it rebuilds every
//! agent's occupancy from the motion profiles (a disk of diameter equal to
//! the cell size against the cell squares) and reports any two agents
//! overlapping the same cell for longer than the tolerance.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap, Heading, Instance};
use crate::kinematics::{fastest_profile, implied_acceleration, KinematicParams, MotionProfile, ProfileSegment};
use crate::plan::{Action, AgentPlan};
use crate::reservation::{SweepRecord, TimeInterval};

/// Tolerance for times, speeds and accelerations.
pub const VALIDATION_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    SpeedBound,
    AccelBound,
    /// Position, heading or time jumps that no motion explains.
    Teleport,
    RotationWhileMoving,
    Collision,
    GoalNotHeld,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::SpeedBound => "speed-bound",
            ViolationKind::AccelBound => "accel-bound",
            ViolationKind::Teleport => "teleport",
            ViolationKind::RotationWhileMoving => "rotation-while-moving",
            ViolationKind::Collision => "collision",
            ViolationKind::GoalNotHeld => "goal-not-held",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub agents: Vec<u32>,
    pub time: f64,
    pub cell: Option<Cell>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} agents={:?} t={:.6}", self.kind, self.agents, self.time)?;
        if let Some(c) = self.cell {
            write!(f, " cell={c}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// The motion model a plan is checked against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidationMode {
    Kinematic(KinematicParams),
    /// Every move at exactly `speed`; starting and stopping are instantaneous.
    FixedSpeed { speed: f64, rot_time_quarter: f64 },
}

impl ValidationMode {
    fn rotation_time(&self, quarters: u32) -> f64 {
        match self {
            ValidationMode::Kinematic(p) => p.rotation_time(quarters),
            ValidationMode::FixedSpeed { rot_time_quarter, .. } => rot_time_quarter * quarters as f64,
        }
    }
}

fn violation(kind: ViolationKind, agent: u32, time: f64, cell: Option<Cell>, detail: String) -> Violation {
    Violation {
        kind,
        agents: vec![agent],
        time,
        cell,
        detail,
    }
}

fn check_structure(plan: &AgentPlan) -> Result<()> {
    let n = plan.actions.len();
    for (i, a) in plan.actions.iter().enumerate() {
        let (s, e) = (a.t_start(), a.t_end());
        let end_ok = e.is_finite() || (e == f64::INFINITY && i + 1 == n && matches!(a, Action::Wait { .. }));
        if !s.is_finite() || s < 0.0 || !end_ok || e.is_nan() || e < s - VALIDATION_EPS {
            return Err(Error::MalformedPlan(format!(
                "agent {} action {i} ({}) has bad times [{s}, {e})",
                plan.agent,
                a.kind()
            )));
        }
        if let Action::Move { v_start, v_end, .. } = *a {
            if !v_start.is_finite() || !v_end.is_finite() {
                return Err(Error::MalformedPlan(format!(
                    "agent {} action {i} has non-finite speeds",
                    plan.agent
                )));
            }
        }
    }
    Ok(())
}

/// Checks one agent's plan in isolation. Malformed input (non-finite or
/// reversed times) is an error rather than a violation.
pub fn validate_agent(plan: &AgentPlan, map: &GridMap, mode: &ValidationMode) -> Result<Vec<Violation>> {
    check_structure(plan)?;
    let eps = VALIDATION_EPS;
    let id = plan.agent;
    let d = map.cell_size();
    let mut out = Vec::new();
    let mut pos = plan.start;
    let mut heading = plan.start_heading;
    let mut speed = 0.0_f64;
    let mut t = 0.0_f64;

    if !map.is_free(plan.start) {
        out.push(violation(
            ViolationKind::Teleport,
            id,
            0.0,
            Some(plan.start),
            format!("starts on blocked or outside cell {}", plan.start),
        ));
    }

    for a in &plan.actions {
        let (t0, t1) = (a.t_start(), a.t_end());
        if t0 < t - eps {
            out.push(violation(
                ViolationKind::Teleport,
                id,
                t0,
                Some(pos),
                format!("{} starts at {t0} before the previous action ended at {t}", a.kind()),
            ));
        } else if t0 > t + eps && speed > eps {
            out.push(violation(
                ViolationKind::Teleport,
                id,
                t,
                Some(pos),
                format!("time gap [{t}, {t0}) while moving at {speed}"),
            ));
        }
        match *a {
            Action::Rotate { cell, from, to, .. } => {
                if speed > eps {
                    out.push(violation(
                        ViolationKind::RotationWhileMoving,
                        id,
                        t0,
                        Some(cell),
                        format!("rotates at speed {speed}"),
                    ));
                }
                if cell != pos || from != heading {
                    out.push(violation(
                        ViolationKind::Teleport,
                        id,
                        t0,
                        Some(cell),
                        format!("rotation from {from} at {cell} but pose is {heading} at {pos}"),
                    ));
                }
                let need = mode.rotation_time(from.quarter_turns(to));
                if t1 - t0 < need - eps {
                    out.push(violation(
                        ViolationKind::SpeedBound,
                        id,
                        t0,
                        Some(cell),
                        format!("rotation {from}->{to} takes {} s, needs {need} s", t1 - t0),
                    ));
                }
                pos = cell;
                heading = to;
                speed = 0.0;
            }
            Action::Wait { cell, .. } => {
                if speed > eps {
                    out.push(violation(
                        ViolationKind::RotationWhileMoving,
                        id,
                        t0,
                        Some(cell),
                        format!("waits while moving at {speed}"),
                    ));
                }
                if cell != pos {
                    out.push(violation(
                        ViolationKind::Teleport,
                        id,
                        t0,
                        Some(cell),
                        format!("waits at {cell} but is at {pos}"),
                    ));
                }
                pos = cell;
                speed = 0.0;
            }
            Action::Move {
                from, to, v_start, v_end, ..
            } => {
                if from != pos {
                    out.push(violation(
                        ViolationKind::Teleport,
                        id,
                        t0,
                        Some(from),
                        format!("move starts at {from} but agent is at {pos}"),
                    ));
                }
                match Heading::between(from, to) {
                    None => out.push(violation(
                        ViolationKind::Teleport,
                        id,
                        t0,
                        Some(to),
                        format!("{from} -> {to} is not a single grid step"),
                    )),
                    Some(h) if h != heading => out.push(violation(
                        ViolationKind::Teleport,
                        id,
                        t0,
                        Some(from),
                        format!("moves {h} while facing {heading}"),
                    )),
                    Some(_) => {}
                }
                if !map.is_free(to) {
                    out.push(violation(
                        ViolationKind::Teleport,
                        id,
                        t0,
                        Some(to),
                        format!("enters blocked or outside cell {to}"),
                    ));
                }
                let dur = t1 - t0;
                match mode {
                    ValidationMode::Kinematic(p) => {
                        for v in [v_start, v_end] {
                            if v < -eps || v > p.v_max + eps {
                                out.push(violation(
                                    ViolationKind::SpeedBound,
                                    id,
                                    t0,
                                    Some(from),
                                    format!("speed {v} outside [0, {}]", p.v_max),
                                ));
                            }
                        }
                        if (v_start - speed).abs() > eps {
                            out.push(violation(
                                ViolationKind::AccelBound,
                                id,
                                t0,
                                Some(from),
                                format!("speed jumps from {speed} to {v_start}"),
                            ));
                        }
                        if v_start + v_end > eps {
                            let acc = implied_acceleration(v_start, v_end, d);
                            if acc > p.a_acc + eps || acc < -p.a_dec - eps {
                                out.push(violation(
                                    ViolationKind::AccelBound,
                                    id,
                                    t0,
                                    Some(from),
                                    format!("{v_start} -> {v_end} over {d} m needs acceleration {acc}"),
                                ));
                            }
                            let expected = 2.0 * d / (v_start + v_end);
                            if (dur - expected).abs() > eps * expected.max(1.0) {
                                out.push(violation(
                                    ViolationKind::Teleport,
                                    id,
                                    t0,
                                    Some(from),
                                    format!("move takes {dur} s, speeds {v_start} -> {v_end} imply {expected} s"),
                                ));
                            }
                        } else if let Ok(fast) = fastest_profile(d, 0.0, 0.0, p) {
                            let min = fast.duration();
                            if dur < min - eps {
                                out.push(violation(
                                    ViolationKind::AccelBound,
                                    id,
                                    t0,
                                    Some(from),
                                    format!("stop-to-stop move takes {dur} s, needs at least {min} s"),
                                ));
                            }
                        }
                        speed = v_end;
                    }
                    ValidationMode::FixedSpeed { speed: v, .. } => {
                        if (v_start - v).abs() > eps || (v_end - v).abs() > eps {
                            out.push(violation(
                                ViolationKind::SpeedBound,
                                id,
                                t0,
                                Some(from),
                                format!("moves at {v_start} -> {v_end}, fixed speed is {v}"),
                            ));
                        }
                        let expected = d / v;
                        if (dur - expected).abs() > eps * expected.max(1.0) {
                            out.push(violation(
                                ViolationKind::Teleport,
                                id,
                                t0,
                                Some(from),
                                format!("move takes {dur} s, fixed speed implies {expected} s"),
                            ));
                        }
                        speed = 0.0;
                    }
                }
                pos = to;
            }
        }
        t = t1;
    }

    if pos != plan.goal || speed > eps {
        out.push(violation(
            ViolationKind::GoalNotHeld,
            id,
            t,
            Some(pos),
            format!("ends at {pos} with speed {speed}, goal is {}", plan.goal),
        ));
    }
    Ok(out)
}

/// Profile actually followed during a move of `duration` seconds.
fn move_profile(v_start: f64, v_end: f64, duration: f64, d: f64, mode: &ValidationMode) -> MotionProfile {
    match mode {
        ValidationMode::FixedSpeed { .. } => MotionProfile::constant(duration, d / duration),
        ValidationMode::Kinematic(p) => {
            if v_start + v_end > 0.0 {
                MotionProfile {
                    segments: vec![ProfileSegment {
                        duration,
                        v_start,
                        accel: (v_end - v_start) / duration,
                    }],
                }
            } else {
                // A slower stop-to-stop move is the fastest one stretched in time.
                match fastest_profile(d, 0.0, 0.0, p) {
                    Ok(fast) if fast.duration() > 0.0 => {
                        let k = duration / fast.duration();
                        MotionProfile {
                            segments: fast
                                .segments
                                .iter()
                                .map(|s| ProfileSegment {
                                    duration: s.duration * k,
                                    v_start: s.v_start / k,
                                    accel: s.accel / (k * k),
                                })
                                .collect(),
                        }
                    }
                    _ => MotionProfile::constant(duration, d / duration),
                }
            }
        }
    }
}

/// Per-cell occupancy of one agent, computed from its motion: the agent is
/// a disk of diameter `d` and occupies every cell square its interior
/// overlaps. Records are coalesced per cell and sorted by cell then time.
pub fn geometric_sweep(plan: &AgentPlan, map: &GridMap, mode: &ValidationMode) -> Vec<SweepRecord> {
    let d = map.cell_size();
    let radius = d / 2.0;
    let mut raw: Vec<SweepRecord> = Vec::new();
    let mut push = |cell: Cell, start: f64, end: f64| {
        if end > start {
            raw.push(SweepRecord {
                cell,
                interval: TimeInterval::new(start, end),
            });
        }
    };
    let mut pos = plan.start;
    let mut t = 0.0;
    for a in &plan.actions {
        let (t0, t1) = (a.t_start(), a.t_end());
        // Standing still between actions.
        push(pos, t, t0);
        match *a {
            Action::Rotate { cell, .. } | Action::Wait { cell, .. } => {
                push(cell, t0, t1);
                pos = cell;
            }
            Action::Move {
                from, to, v_start, v_end, ..
            } => {
                let Some(h) = Heading::between(from, to) else {
                    push(from, t0, t1);
                    push(to, t0, t1);
                    pos = to;
                    t = t1;
                    continue;
                };
                let profile = move_profile(v_start, v_end, t1 - t0, d, mode);
                let (dx, dy) = h.delta();
                let (px, py) = (-dy, dx);
                for along in -1i64..=2 {
                    for lateral in -1i64..=1 {
                        // The disk centre moves along the axis from 0 to d;
                        // a cell at (along·d, lateral·d) is overlapped while
                        // |x - along·d| < d/2 + r and |lateral·d| < d/2 + r.
                        if (lateral.abs() as f64) * d >= d / 2.0 + radius {
                            continue;
                        }
                        let centre = along as f64 * d;
                        let lo = centre - d / 2.0 - radius;
                        let hi = centre + d / 2.0 + radius;
                        if hi <= 0.0 || lo >= d {
                            continue;
                        }
                        let enter = if lo < 0.0 {
                            0.0
                        } else {
                            profile.time_at_position(lo).unwrap_or(t1 - t0)
                        };
                        let leave = if hi > d {
                            t1 - t0
                        } else {
                            profile.time_at_position(hi).unwrap_or(t1 - t0)
                        };
                        let cx = from.x as i64 + along * dx as i64 + lateral * px as i64;
                        let cy = from.y as i64 + along * dy as i64 + lateral * py as i64;
                        if cx < 0 || cy < 0 || cx > u32::MAX as i64 || cy > u32::MAX as i64 {
                            continue;
                        }
                        push(Cell::new(cx as u32, cy as u32), t0 + enter, t0 + leave);
                    }
                }
                pos = to;
            }
        }
        t = t1;
    }
    push(pos, t, f64::INFINITY);

    raw.sort_by(|a, b| a.cell.cmp(&b.cell).then(a.interval.start.total_cmp(&b.interval.start)));
    let mut out: Vec<SweepRecord> = Vec::with_capacity(raw.len());
    for r in raw {
        match out.last_mut() {
            Some(prev) if prev.cell == r.cell && r.interval.start <= prev.interval.end + VALIDATION_EPS => {
                prev.interval.end = prev.interval.end.max(r.interval.end);
            }
            _ => out.push(r),
        }
    }
    out
}

/// Checks every plan on its own and all pairs for shared-cell overlap.
/// Plans must cover exactly the instance's agents with matching endpoints.
pub fn validate_solution(plans: &[AgentPlan], instance: &Instance, mode: &ValidationMode) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for task in &instance.agents {
        let matching: Vec<&AgentPlan> = plans.iter().filter(|p| p.agent == task.id).collect();
        match matching.as_slice() {
            [] => out.push(violation(
                ViolationKind::GoalNotHeld,
                task.id,
                0.0,
                Some(task.goal),
                String::from("no plan for agent"),
            )),
            [p] => {
                if p.start != task.start || p.start_heading != task.start_heading {
                    out.push(violation(
                        ViolationKind::Teleport,
                        task.id,
                        0.0,
                        Some(p.start),
                        format!(
                            "plan starts at {} facing {}, task starts at {} facing {}",
                            p.start, p.start_heading, task.start, task.start_heading
                        ),
                    ));
                }
                if p.goal != task.goal {
                    out.push(violation(
                        ViolationKind::GoalNotHeld,
                        task.id,
                        0.0,
                        Some(p.goal),
                        format!("plan targets {}, task goal is {}", p.goal, task.goal),
                    ));
                }
            }
            _ => {
                return Err(Error::MalformedPlan(format!("agent {} has several plans", task.id)));
            }
        }
    }
    for p in plans {
        if instance.agent(p.agent).is_none() {
            return Err(Error::MalformedPlan(format!("plan for unknown agent {}", p.agent)));
        }
        out.extend(validate_agent(p, &instance.map, mode)?);
    }

    let mut by_cell: BTreeMap<Cell, Vec<(u32, TimeInterval)>> = BTreeMap::new();
    for p in plans {
        for r in geometric_sweep(p, &instance.map, mode) {
            by_cell.entry(r.cell).or_default().push((p.agent, r.interval));
        }
    }
    let mut reported: BTreeMap<(u32, u32), ()> = BTreeMap::new();
    for (cell, mut occ) in by_cell {
        occ.sort_by(|a, b| a.1.start.total_cmp(&b.1.start));
        for i in 0..occ.len() {
            for j in i + 1..occ.len() {
                let ((a, ia), (b, ib)) = (occ[i], occ[j]);
                if ib.start >= ia.end {
                    break;
                }
                if a == b || ia.overlap(&ib) <= VALIDATION_EPS {
                    continue;
                }
                let pair = (a.min(b), a.max(b));
                if reported.insert(pair, ()).is_some() {
                    continue;
                }
                out.push(Violation {
                    kind: ViolationKind::Collision,
                    agents: vec![pair.0, pair.1],
                    time: ib.start.max(ia.start),
                    cell: Some(cell),
                    detail: format!("both occupy {cell} during {ia} and {ib}"),
                });
            }
        }
    }
    Ok(out)
}
