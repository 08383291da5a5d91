//! Admissible cost-to-go estimates.
//!
//! * `H1` sums the fastest continuous (trapezoidal) profiles over the
//!   straight runs of a Manhattan path. Every change of axis needs a full
//!   stop and a rotation.
//! * `H2` has the same structure but each run is costed with a dynamic
//!   program over the discrete speed set, so `H1 <= H2`.
//! * `H3` is the obstacle-aware grid distance to the goal (a breadth-first
//!   search from the goal) travelled at top speed.
//!
//! For a state moving at `v > 0` the agent cannot turn before it stops, so
//! the first run continues along the current heading for at least one cell
//! and at least the braking distance. If that overshoots the goal's
//! coordinate on the heading axis, the estimate also charges the way back
//! and the turn-around.
//!
//! Rotation cost is the fewest quarter turns that make the agent face every
//! direction it must travel in at some point.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Cell, GridMap, Heading};
use crate::kinematics::{min_time_segment, KinematicParams, TransitionTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeuristicKind {
    H1,
    H2,
    H3,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 3] = [HeuristicKind::H1, HeuristicKind::H2, HeuristicKind::H3];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::H1 => "h1",
            HeuristicKind::H2 => "h2",
            HeuristicKind::H3 => "h3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "h1" | "H1" => Some(HeuristicKind::H1),
            "h2" | "H2" => Some(HeuristicKind::H2),
            "h3" | "H3" => Some(HeuristicKind::H3),
            _ => None,
        }
    }
}

/// `QUARTER_WALK[h][mask]`: fewest quarter turns starting from heading `h`
/// after which every heading whose bit is set in `mask` has been faced.
static QUARTER_WALK: [[u8; 16]; 4] = build_quarter_walk();

const fn build_quarter_walk() -> [[u8; 16]; 4] {
    // dist[h][cur][visited] by relaxation; the state space is 4 x 16.
    let mut out = [[u8::MAX; 16]; 4];
    let mut start = 0;
    while start < 4 {
        let mut dist = [[u8::MAX; 16]; 4];
        dist[start][1 << start] = 0;
        let mut changed = true;
        while changed {
            changed = false;
            let mut h = 0;
            while h < 4 {
                let mut m = 0;
                while m < 16 {
                    let d = dist[h][m];
                    if d != u8::MAX {
                        let mut k = 0;
                        while k < 2 {
                            let nh = if k == 0 { (h + 1) % 4 } else { (h + 3) % 4 };
                            let nm = m | (1 << nh);
                            if dist[nh][nm] > d + 1 {
                                dist[nh][nm] = d + 1;
                                changed = true;
                            }
                            k += 1;
                        }
                    }
                    m += 1;
                }
                h += 1;
            }
        }
        let mut want = 0;
        while want < 16 {
            let mut best = u8::MAX;
            let mut h = 0;
            while h < 4 {
                let mut m = 0;
                while m < 16 {
                    if m & want == want && dist[h][m] < best {
                        best = dist[h][m];
                    }
                    m += 1;
                }
                h += 1;
            }
            out[start][want] = best;
            want += 1;
        }
        start += 1;
    }
    out
}

/// Fewest quarter turns from `from` that face every heading in `required`.
pub fn min_quarter_turns(from: Heading, required: &[Heading]) -> u32 {
    let mask = required.iter().fold(0usize, |m, h| m | (1 << h.index()));
    QUARTER_WALK[from.index()][mask] as u32
}

fn bit(h: Heading) -> usize {
    1 << h.index()
}

/// Cost-to-go over a straight horizon for one speed model. Entries are
/// `f64::INFINITY` where no profile exists.
#[derive(Debug, Clone)]
struct RunTables {
    /// Longest run length (cells) the tables cover.
    max_cells: usize,
    /// Stop-to-stop cost of covering at least `x` cells.
    zero: Vec<f64>,
    /// `exact[v][a]`: start at speed `v`, stop exactly `a` cells ahead.
    exact: Vec<Vec<f64>>,
    /// `over[v][a + max_cells]`: start at `v`, the goal coordinate is `a`
    /// cells ahead, and the agent ends up reversing at least once.
    over: Vec<Vec<f64>>,
    /// Fallback for zero-speed runs longer than `max_cells`.
    tail: TailBound,
}

#[derive(Debug, Clone, Copy)]
enum TailBound {
    Continuous { params: KinematicParams, d: f64 },
    Linear { secs_per_cell: f64 },
}

impl TailBound {
    fn cost(&self, cells: usize) -> f64 {
        match *self {
            TailBound::Continuous { params, d } => {
                min_time_segment(cells as f64 * d, 0.0, 0.0, &params).unwrap_or(f64::INFINITY)
            }
            TailBound::Linear { secs_per_cell } => cells as f64 * secs_per_cell,
        }
    }
}

impl RunTables {
    fn zero_cost(&self, cells: usize) -> f64 {
        if cells <= self.max_cells {
            self.zero[cells]
        } else {
            self.tail.cost(cells)
        }
    }

    /// Continuous relaxation: trapezoidal profiles, overshoot allowed.
    fn continuous(params: &KinematicParams, speeds: &[f64], d: f64, max_cells: usize) -> Self {
        let seg = |dist: f64, v: f64| min_time_segment(dist, v, 0.0, params).unwrap_or(f64::INFINITY);
        let zero: Vec<f64> = (0..=max_cells).map(|x| seg(x as f64 * d, 0.0)).collect();
        let span = 2 * max_cells + 1;
        let mut exact = vec![vec![f64::INFINITY; max_cells + 1]; speeds.len()];
        let mut over = vec![vec![f64::INFINITY; span]; speeds.len()];
        for (vi, &v) in speeds.iter().enumerate().skip(1) {
            let r_min = d.max(params.stop_distance(v));
            for a in 1..=max_cells {
                let ad = a as f64 * d;
                if ad >= r_min - 1e-9 {
                    exact[vi][a] = seg(ad, v);
                }
            }
            for (k, slot) in over[vi].iter_mut().enumerate() {
                let ad = (k as f64 - max_cells as f64) * d;
                let r1 = r_min.max(ad);
                let back = seg(r1 - ad, 0.0);
                *slot = seg(r1, v) + back;
            }
        }
        Self {
            max_cells,
            zero,
            exact,
            over,
            tail: TailBound::Continuous { params: *params, d },
        }
    }

    /// Discrete dynamic program over the speed set.
    fn discrete(table: &TransitionTable, max_cells: usize) -> Self {
        let n = table.len();
        // time2[x][v]: cheapest way to cover exactly x cells from speed v and stop.
        let mut time2 = vec![vec![f64::INFINITY; n]; max_cells + 1];
        time2[0][0] = 0.0;
        for x in 1..=max_cells {
            for v in 0..n {
                let mut best = f64::INFINITY;
                for &w in table.achievable(v) {
                    let c = table.move_time(v, w).unwrap_or(f64::INFINITY) + time2[x - 1][w];
                    if c < best {
                        best = c;
                    }
                }
                time2[x][v] = best;
            }
        }
        let tail = TailBound::Continuous {
            params: *table.params(),
            d: table.distance(),
        };
        // Suffix minimum makes "at least x cells" monotone and admissible.
        let mut zero = vec![f64::INFINITY; max_cells + 1];
        let mut running = tail.cost(max_cells + 1);
        for x in (0..=max_cells).rev() {
            running = running.min(time2[x][0]);
            zero[x] = running;
        }
        let zero_at = |x: usize| if x <= max_cells { zero[x] } else { tail.cost(x) };

        let span = 2 * max_cells + 1;
        let mut exact = vec![vec![f64::INFINITY; max_cells + 1]; n];
        let mut over = vec![vec![f64::INFINITY; span]; n];
        for v in 1..n {
            for a in 1..=max_cells {
                exact[v][a] = (1..=a)
                    .map(|r| time2[r][v] + zero_at(a - r))
                    .fold(f64::INFINITY, f64::min);
            }
            for (k, slot) in over[v].iter_mut().enumerate() {
                let a = k as i64 - max_cells as i64;
                *slot = (1..=max_cells)
                    .filter(|&r| time2[r][v].is_finite())
                    .map(|r| {
                        let r = r as i64;
                        // Forward remainder minus backward run equals a - r, backward run >= 1.
                        let rest = (r - a).max(a - r + 2).max(1) as usize;
                        time2[r as usize][v] + zero_at(rest)
                    })
                    .fold(f64::INFINITY, f64::min);
            }
        }
        Self {
            max_cells,
            zero,
            exact,
            over,
            tail,
        }
    }

    /// Infinite acceleration at a fixed speed.
    fn fixed(secs_per_cell: f64, max_cells: usize) -> Self {
        Self {
            max_cells,
            zero: (0..=max_cells).map(|x| x as f64 * secs_per_cell).collect(),
            exact: vec![Vec::new()],
            over: vec![Vec::new()],
            tail: TailBound::Linear { secs_per_cell },
        }
    }
}

#[derive(Debug, Clone)]
enum Estimator {
    Runs(RunTables),
    Distance { secs_per_cell: f64 },
}

/// Goal-independent heuristic data for one speed model and map size.
#[derive(Debug, Clone)]
pub struct HeuristicContext {
    kind: HeuristicKind,
    rot_time_quarter: f64,
    estimator: Estimator,
}

impl HeuristicContext {
    pub fn kinematic(kind: HeuristicKind, table: &TransitionTable, map: &GridMap) -> Self {
        let params = table.params();
        let max_cells = (map.width() + map.height()) as usize;
        let estimator = match kind {
            HeuristicKind::H1 => Estimator::Runs(RunTables::continuous(
                params,
                table.speeds().speeds(),
                table.distance(),
                max_cells,
            )),
            HeuristicKind::H2 => Estimator::Runs(RunTables::discrete(table, max_cells)),
            HeuristicKind::H3 => Estimator::Distance {
                secs_per_cell: table.distance() / params.v_max,
            },
        };
        Self {
            kind,
            rot_time_quarter: params.rot_time_quarter,
            estimator,
        }
    }

    /// Fixed speed with instantaneous starts and stops. H1 and H2 coincide.
    pub fn fixed_speed(kind: HeuristicKind, speed: f64, rot_time_quarter: f64, map: &GridMap) -> Self {
        let secs_per_cell = map.cell_size() / speed;
        let estimator = match kind {
            HeuristicKind::H1 | HeuristicKind::H2 => {
                Estimator::Runs(RunTables::fixed(secs_per_cell, (map.width() + map.height()) as usize))
            }
            HeuristicKind::H3 => Estimator::Distance { secs_per_cell },
        };
        Self {
            kind,
            rot_time_quarter,
            estimator,
        }
    }

    pub fn kind(&self) -> HeuristicKind {
        self.kind
    }

    pub fn for_goal<'a>(&'a self, map: &GridMap, goal: Cell) -> GoalHeuristic<'a> {
        let field = match self.estimator {
            Estimator::Distance { .. } => Some(DistanceField::build(map, goal)),
            Estimator::Runs(_) => None,
        };
        GoalHeuristic {
            ctx: self,
            goal,
            field,
        }
    }
}

/// Static-obstacle grid distances (in cells) to one goal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: u32,
    dist: Vec<u32>,
}

impl DistanceField {
    pub const UNREACHABLE: u32 = u32::MAX;

    pub fn build(map: &GridMap, goal: Cell) -> Self {
        let mut dist = vec![Self::UNREACHABLE; map.num_cells()];
        if map.is_free(goal) {
            dist[map.index(goal)] = 0;
            let mut queue = VecDeque::from([goal]);
            while let Some(c) = queue.pop_front() {
                let next = dist[map.index(c)] + 1;
                for (n, _) in map.neighbors(c) {
                    let i = map.index(n);
                    if dist[i] == Self::UNREACHABLE {
                        dist[i] = next;
                        queue.push_back(n);
                    }
                }
            }
        }
        Self {
            width: map.width(),
            dist,
        }
    }

    pub fn get(&self, cell: Cell) -> u32 {
        self.dist[cell.y as usize * self.width as usize + cell.x as usize]
    }
}

/// A heuristic bound to one goal cell.
#[derive(Debug, Clone)]
pub struct GoalHeuristic<'a> {
    ctx: &'a HeuristicContext,
    goal: Cell,
    field: Option<DistanceField>,
}

impl GoalHeuristic<'_> {
    pub fn goal(&self) -> Cell {
        self.goal
    }

    /// Lower bound on the time from `(cell, heading, speed_idx)` to standing
    /// still at the goal. `speed_idx` 0 is a standstill.
    pub fn estimate(&self, cell: Cell, heading: Heading, speed_idx: usize) -> f64 {
        match &self.ctx.estimator {
            Estimator::Distance { secs_per_cell } => {
                let d = self.field.as_ref().map_or(DistanceField::UNREACHABLE, |f| f.get(cell));
                if d == DistanceField::UNREACHABLE {
                    f64::INFINITY
                } else {
                    d as f64 * secs_per_cell
                }
            }
            Estimator::Runs(tables) => self.runs_estimate(tables, cell, heading, speed_idx),
        }
    }

    fn runs_estimate(&self, t: &RunTables, cell: Cell, heading: Heading, speed_idx: usize) -> f64 {
        let dx = self.goal.x as i64 - cell.x as i64;
        let dy = self.goal.y as i64 - cell.y as i64;
        let rot = self.ctx.rot_time_quarter;
        let axis_bits = |dx: i64, dy: i64| {
            let mut m = 0;
            if dx > 0 {
                m |= bit(Heading::East);
            } else if dx < 0 {
                m |= bit(Heading::West);
            }
            if dy > 0 {
                m |= bit(Heading::South);
            } else if dy < 0 {
                m |= bit(Heading::North);
            }
            m
        };
        let walk = |mask: usize| QUARTER_WALK[heading.index()][mask] as f64 * rot;

        if speed_idx == 0 {
            if dx == 0 && dy == 0 {
                return 0.0;
            }
            return t.zero_cost(dx.unsigned_abs() as usize)
                + t.zero_cost(dy.unsigned_abs() as usize)
                + walk(axis_bits(dx, dy));
        }

        let (hx, hy) = heading.delta();
        let (hx, hy) = (hx as i64, hy as i64);
        let along = dx * hx + dy * hy;
        let (px, py) = (dx - along * hx, dy - along * hy);
        let perp_cells = (px.abs() + py.abs()) as usize;
        let perp_mask = axis_bits(px, py);
        let perp = t.zero_cost(perp_cells);

        let m = t.max_cells as i64;
        let exact = if along >= 1 && along <= m {
            t.exact[speed_idx][along as usize] + walk(perp_mask)
        } else {
            f64::INFINITY
        };
        let over = t.over[speed_idx][(along.clamp(-m, m) + m) as usize] + walk(perp_mask | bit(heading.opposite()));
        exact.min(over) + perp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::SpeedSet;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn quarter_walks() {
        use Heading::*;
        assert_eq!(min_quarter_turns(East, &[]), 0);
        assert_eq!(min_quarter_turns(East, &[East]), 0);
        assert_eq!(min_quarter_turns(East, &[North]), 1);
        assert_eq!(min_quarter_turns(East, &[West]), 2);
        assert_eq!(min_quarter_turns(East, &[East, South]), 1);
        assert_eq!(min_quarter_turns(North, &[East, South]), 2);
        assert_eq!(min_quarter_turns(West, &[East, South]), 2);
        assert_eq!(min_quarter_turns(North, &[East, West]), 3);
    }

    fn setup(v_max: f64, a: f64, stp: f64, w: u32, h: u32) -> (TransitionTable, GridMap) {
        let p = KinematicParams::new(v_max, a, a, stp, 1.0).unwrap();
        (TransitionTable::for_params(&p, 1.0), GridMap::new(w, h).unwrap())
    }

    #[test]
    fn h1_straight_ahead_from_rest() {
        let (table, map) = setup(2.0, 1.0, 0.5, 6, 1);
        let ctx = HeuristicContext::kinematic(HeuristicKind::H1, &table, &map);
        let h = ctx.for_goal(&map, Cell::new(3, 0));
        assert!(close(h.estimate(Cell::new(0, 0), Heading::East, 0), 2.0 * libm::sqrt(3.0)));
        assert_eq!(h.estimate(Cell::new(3, 0), Heading::North, 0), 0.0);
    }

    #[test]
    fn h1_two_segments_with_rotation() {
        let (table, map) = setup(2.0, 1.0, 0.5, 6, 6);
        let ctx = HeuristicContext::kinematic(HeuristicKind::H1, &table, &map);
        let h = ctx.for_goal(&map, Cell::new(2, 1));
        let p = table.params();
        let expected = min_time_segment(2.0, 0.0, 0.0, p).unwrap() + 1.0 + min_time_segment(1.0, 0.0, 0.0, p).unwrap();
        assert!(close(h.estimate(Cell::new(0, 0), Heading::East, 0), expected));
    }

    #[test]
    fn h2_dp_example() {
        let p = KinematicParams::new(2.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let table = TransitionTable::precompute(SpeedSet::build(&p), 1.0, &p);
        let map = GridMap::new(5, 1).unwrap();
        let ctx = HeuristicContext::kinematic(HeuristicKind::H2, &table, &map);
        let h = ctx.for_goal(&map, Cell::new(2, 0));
        // 0 -> 1 -> 0 costs 2 + 2.
        assert!(close(h.estimate(Cell::new(0, 0), Heading::East, 0), 4.0));
        assert_eq!(h.estimate(Cell::new(2, 0), Heading::East, 0), 0.0);
    }

    #[test]
    fn h3_scaled_distance() {
        let (table, map) = setup(2.0, 1.0, 0.5, 8, 8);
        let ctx = HeuristicContext::kinematic(HeuristicKind::H3, &table, &map);
        let h = ctx.for_goal(&map, Cell::new(5, 0));
        assert!(close(h.estimate(Cell::new(0, 0), Heading::West, 3), 2.5));
        assert_eq!(h.estimate(Cell::new(5, 0), Heading::West, 0), 0.0);
    }

    #[test]
    fn h3_detour_around_wall() {
        // Wall in column 2 from row 0 to row 2; going (0,0) -> (4,0) needs 4 + 2*3 = 10 moves
        // unless a gap exists; leave row 3 open so the detour is 4 + 2 * 3 = 10 cells.
        let mut map = GridMap::new(5, 4).unwrap();
        for y in 0..3 {
            map.set_blocked(Cell::new(2, y), true).unwrap();
        }
        let field = DistanceField::build(&map, Cell::new(4, 0));
        assert_eq!(field.get(Cell::new(0, 0)), 10);
        assert_eq!(field.get(Cell::new(2, 0)), DistanceField::UNREACHABLE);
    }

    #[test]
    fn moving_agent_at_goal_is_not_free() {
        let (table, map) = setup(2.0, 1.0, 0.5, 8, 1);
        for kind in [HeuristicKind::H1, HeuristicKind::H2] {
            let ctx = HeuristicContext::kinematic(kind, &table, &map);
            let h = ctx.for_goal(&map, Cell::new(4, 0));
            let e = h.estimate(Cell::new(4, 0), Heading::East, 1);
            assert!(e > 2.0, "{kind:?}: {e}");
        }
    }

    #[test]
    fn fixed_speed_estimates() {
        let map = GridMap::new(6, 6).unwrap();
        let ctx = HeuristicContext::fixed_speed(HeuristicKind::H1, 2.0, 1.0, &map);
        let h = ctx.for_goal(&map, Cell::new(4, 2));
        assert!(close(h.estimate(Cell::new(0, 0), Heading::East, 0), 3.0 + 1.0));
    }
}
