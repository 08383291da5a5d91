//! Reference computations written without the planner's code paths: speed
//! sets, transitions, stop-to-stop times, an exhaustive optimal planner for
//! one agent among reservations, and exact costs-to-go on an empty map.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use kinosipp_core::grid::{Cell, GridMap, Heading};
use kinosipp_core::reservation::{ReservationTable, TimeInterval};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const EPS: f64 = 1e-9;

/// `0, step, 2·step, …` up to `v_max`, each capped at `v_max`.
pub fn speed_values(v_max: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let v = k as f64 * step;
        if v > v_max + 1e-9 * step.max(1.0) {
            break;
        }
        out.push(v.min(v_max));
        k += 1;
    }
    out
}

/// Constant-acceleration reachability over one cell; stop-to-stop is
/// always allowed.
pub fn feasible(vi: f64, vj: f64, d: f64, a_acc: f64, a_dec: f64) -> bool {
    if vi == 0.0 && vj == 0.0 {
        return true;
    }
    let change = vj * vj - vi * vi;
    change <= 2.0 * d * a_acc + 2.0 * d * 1e-9 && -change <= 2.0 * d * a_dec + 2.0 * d * 1e-9
}

/// Fastest stop-to-stop traversal of `d`, found by bisecting on the peak
/// speed reached before braking.
pub fn stop_to_stop_time(d: f64, v_max: f64, a_acc: f64, a_dec: f64) -> f64 {
    let covered = |vp: f64| vp * vp / (2.0 * a_acc) + vp * vp / (2.0 * a_dec);
    if covered(v_max) <= d {
        return v_max / a_acc + v_max / a_dec + (d - covered(v_max)) / v_max;
    }
    let (mut lo, mut hi) = (0.0_f64, v_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if covered(mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let vp = 0.5 * (lo + hi);
    vp / a_acc + vp / a_dec
}

/// Time to cover one cell from `vi` to `vj` when feasible.
pub fn traversal_time(vi: f64, vj: f64, d: f64, v_max: f64, a_acc: f64, a_dec: f64) -> Option<f64> {
    if !feasible(vi, vj, d, a_acc, a_dec) {
        return None;
    }
    Some(if vi + vj > 0.0 {
        // Average speed over a constant-acceleration segment.
        d / ((vi + vj) / 2.0)
    } else {
        stop_to_stop_time(d, v_max, a_acc, a_dec)
    })
}

#[derive(Debug, Clone)]
pub struct Kinematics {
    pub speeds: Vec<f64>,
    pub d: f64,
    pub v_max: f64,
    pub a_acc: f64,
    pub a_dec: f64,
    pub rot: f64,
}

impl Kinematics {
    pub fn new(v_max: f64, a_acc: f64, a_dec: f64, step: f64, rot: f64, d: f64) -> Self {
        Self {
            speeds: speed_values(v_max, step),
            d,
            v_max,
            a_acc,
            a_dec,
            rot,
        }
    }

    pub fn time(&self, i: usize, j: usize) -> Option<f64> {
        traversal_time(self.speeds[i], self.speeds[j], self.d, self.v_max, self.a_acc, self.a_dec)
    }

    pub fn turn(&self, from: usize, to: usize) -> f64 {
        let diff = (from as i32 - to as i32).rem_euclid(4);
        self.rot * diff.min(4 - diff) as f64
    }
}

/// Heading index order N, E, S, W with North towards smaller y.
pub const DELTAS: [(i32, i32); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

pub fn heading_index(h: Heading) -> usize {
    match h {
        Heading::North => 0,
        Heading::East => 1,
        Heading::South => 2,
        Heading::West => 3,
    }
}

pub fn heading_of(i: usize) -> Heading {
    [Heading::North, Heading::East, Heading::South, Heading::West][i]
}

/// A single-agent problem with raw per-cell reservations.
#[derive(Debug, Clone)]
pub struct SingleAgentCase {
    pub width: usize,
    pub height: usize,
    pub blocked: Vec<bool>,
    pub reserved: Vec<Vec<(f64, f64)>>,
    pub start: (usize, usize),
    pub heading: usize,
    pub goal: (usize, usize),
    pub kin: Kinematics,
    pub step: f64,
}

impl SingleAgentCase {
    fn idx(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    fn step_from(&self, (x, y): (usize, usize), h: usize) -> Option<(usize, usize)> {
        let (dx, dy) = DELTAS[h];
        let nx = x as i64 + dx as i64;
        let ny = y as i64 + dy as i64;
        if nx < 0 || ny < 0 || nx >= self.width as i64 || ny >= self.height as i64 {
            return None;
        }
        let (nx, ny) = (nx as usize, ny as usize);
        (!self.blocked[self.idx(nx, ny)]).then_some((nx, ny))
    }

    /// Free time ranges of a cell.
    pub fn free_ranges(&self, x: usize, y: usize) -> Vec<(f64, f64)> {
        let mut r = self.reserved[self.idx(x, y)].clone();
        r.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut out = Vec::new();
        let mut t = 0.0;
        for (s, e) in r {
            if s > t {
                out.push((t, s));
            }
            t = f64::max(t, e);
        }
        out.push((t, f64::INFINITY));
        out
    }

    pub fn map(&self) -> GridMap {
        let blocked = (0..self.width * self.height)
            .filter(|&i| self.blocked[i])
            .map(|i| Cell::new((i % self.width) as u32, (i / self.width) as u32));
        GridMap::from_blocked(self.width as u32, self.height as u32, blocked).unwrap()
    }

    pub fn table(&self, map: &GridMap) -> ReservationTable {
        let mut t = ReservationTable::new(map);
        for (i, rs) in self.reserved.iter().enumerate() {
            for &(s, e) in rs {
                t.reserve(
                    Cell::new((i % self.width) as u32, (i / self.width) as u32),
                    TimeInterval::new(s, e),
                );
            }
        }
        t
    }

    pub fn empty_reservations(&self) -> Self {
        Self {
            reserved: vec![Vec::new(); self.reserved.len()],
            ..self.clone()
        }
    }
}

type Ranges = Vec<(f64, f64)>;

fn intersect(a: &Ranges, b: &Ranges) -> Ranges {
    let mut out = Vec::new();
    for &(p, q) in a {
        for &(r, s) in b {
            let lo = p.max(r);
            let hi = q.min(s);
            if lo <= hi + EPS {
                out.push((lo, hi.max(lo)));
            }
        }
    }
    out
}

#[derive(PartialEq)]
struct Entry(f64, (usize, usize), usize, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0)
    }
}

/// Earliest arrival at the goal, stopped, in a free range that never ends.
///
/// Dijkstra over standstill states `(cell, heading, free range)`. From a
/// standstill the agent turns, waits, then drives straight through any
/// number of cells with positive speeds until the next standstill. For each
/// such run every cell must stay inside one free range from the moment the
/// agent starts entering it until it has fully left; the admissible
/// departure times are the intersection of those constraints.
pub fn optimal_arrival(case: &SingleAgentCase) -> Option<f64> {
    let kin = &case.kin;
    let n = kin.speeds.len();
    let ranges: Vec<Vec<Ranges>> = (0..case.height)
        .map(|y| (0..case.width).map(|x| case.free_ranges(x, y)).collect())
        .collect();
    let free = |c: (usize, usize)| &ranges[c.1][c.0];

    let (sx, sy) = case.start;
    let first = free(case.start)[0];
    if first.0 > EPS {
        return None;
    }
    let mut best: HashMap<((usize, usize), usize, usize), f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(((sx, sy), case.heading, 0), 0.0);
    heap.push(Entry(0.0, (sx, sy), case.heading, 0));

    while let Some(Entry(t, cell, h, ri)) = heap.pop() {
        if best.get(&(cell, h, ri)).is_some_and(|&b| b < t) {
            continue;
        }
        let here = free(cell)[ri];
        if cell == case.goal && here.1.is_infinite() {
            return Some(t);
        }
        for h2 in 0..4 {
            let ready = t + kin.turn(h, h2);
            // (cell, speed index, time to reach it, time to reach previous, departure set)
            let mut stack: Vec<((usize, usize), usize, f64, f64, Ranges, bool)> =
                vec![(cell, 0, 0.0, 0.0, vec![(ready, f64::INFINITY)], true)];
            while let Some((c, s, t_here, t_prev, deps, is_origin)) = stack.pop() {
                let Some(next) = case.step_from(c, h2) else { continue };
                for s2 in 0..n {
                    let Some(tau) = kin.time(s, s2) else { continue };
                    let t_next = t_here + tau;
                    // `c` must stay free until the agent is fully in `next`.
                    let exit: Ranges = if is_origin {
                        vec![(f64::NEG_INFINITY, here.1 - t_next)]
                    } else {
                        free(c).iter().map(|&(a, b)| (a - t_prev, b - t_next)).collect()
                    };
                    let deps2 = intersect(&deps, &exit);
                    if deps2.is_empty() {
                        continue;
                    }
                    if s2 == 0 {
                        for (rj, &(a, b)) in free(next).iter().enumerate() {
                            let ok = intersect(&deps2, &vec![(a - t_here, b - t_next)]);
                            let Some(dep) = ok.iter().map(|r| r.0).reduce(f64::min) else { continue };
                            let arrival = dep + t_next;
                            let key = (next, h2, rj);
                            if best.get(&key).is_none_or(|&b| arrival < b - EPS) {
                                best.insert(key, arrival);
                                heap.push(Entry(arrival, next, h2, rj));
                            }
                        }
                    } else {
                        stack.push((next, s2, t_next, t_here, deps2, false));
                    }
                }
            }
        }
    }
    None
}

/// Exact cost-to-go on an empty map for every `(x, y, heading, speed)`,
/// by Dijkstra over reversed transitions from the stopped goal states.
pub fn cost_to_go(case: &SingleAgentCase) -> HashMap<((usize, usize), usize, usize), f64> {
    let kin = &case.kin;
    let n = kin.speeds.len();
    type State = ((usize, usize), usize, usize);
    let mut reverse: HashMap<State, Vec<(State, f64)>> = HashMap::new();
    for y in 0..case.height {
        for x in 0..case.width {
            if case.blocked[case.idx(x, y)] {
                continue;
            }
            for h in 0..4 {
                for s in 0..n {
                    let from = ((x, y), h, s);
                    let turns: Vec<usize> = if s == 0 { (0..4).collect() } else { vec![h] };
                    for h2 in turns {
                        let Some(next) = case.step_from((x, y), h2) else { continue };
                        for s2 in 0..n {
                            if let Some(tau) = kin.time(s, s2) {
                                let cost = kin.turn(h, h2) + tau;
                                reverse.entry((next, h2, s2)).or_default().push((from, cost));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut dist: HashMap<State, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for h in 0..4 {
        dist.insert((case.goal, h, 0), 0.0);
        heap.push(Entry(0.0, case.goal, h, 0));
    }
    while let Some(Entry(d, cell, h, s)) = heap.pop() {
        if dist.get(&(cell, h, s)).is_some_and(|&b| b < d) {
            continue;
        }
        for &(prev, cost) in reverse.get(&(cell, h, s)).map(Vec::as_slice).unwrap_or(&[]) {
            let nd = d + cost;
            if dist.get(&prev).map_or(true, |&b| nd < b) {
                dist.insert(prev, nd);
                heap.push(Entry(nd, prev.0, prev.1, prev.2));
            }
        }
    }
    dist
}

/// Random map of at most 8×8 with at most three speeds and up to three
/// reservations per cell.
pub fn random_case(rng: &mut ChaCha8Rng) -> SingleAgentCase {
    let width = rng.gen_range(2..=8);
    let height = rng.gen_range(2..=8);
    let mut blocked: Vec<bool> = (0..width * height).map(|_| rng.gen_bool(0.15)).collect();
    let free: Vec<usize> = (0..width * height).filter(|&i| !blocked[i]).collect();
    let (start, goal) = if free.len() < 2 {
        blocked.iter_mut().for_each(|b| *b = false);
        (0, width * height - 1)
    } else {
        let s = free[rng.gen_range(0..free.len())];
        let g = if rng.gen_bool(0.05) { s } else { free[rng.gen_range(0..free.len())] };
        (s, g)
    };
    let v_max = [1.0, 2.0][rng.gen_range(0..2)];
    let step = if rng.gen_bool(0.5) { v_max / 2.0 } else { v_max };
    let a_acc = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let a_dec = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
    let rot = [0.5, 1.0][rng.gen_range(0..2)];
    let reserved = (0..width * height)
        .map(|i| {
            if blocked[i] || !rng.gen_bool(0.5) {
                return Vec::new();
            }
            let k = rng.gen_range(1..=3);
            (0..k)
                .map(|_| {
                    let lo = if i == start { 1.0 } else { 0.0 };
                    let s: f64 = rng.gen_range(lo..25.0);
                    let len: f64 = rng.gen_range(0.2..6.0);
                    (s, s + len)
                })
                .collect()
        })
        .collect();
    SingleAgentCase {
        width,
        height,
        blocked,
        reserved,
        start: (start % width, start / width),
        heading: rng.gen_range(0..4),
        goal: (goal % width, goal / width),
        kin: Kinematics::new(v_max, a_acc, a_dec, step, rot, 1.0),
        step,
    }
}
