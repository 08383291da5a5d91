//! Static environment: the grid, headings, agent tasks and instances.
//!
//! Coordinates are `x` = column, `y` = row with the origin at the top-left
//! corner. North is `-y`, South is `+y`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// The neighbouring cell in direction `heading`, if it does not underflow.
    pub fn step(self, heading: Heading) -> Option<Cell> {
        let (dx, dy) = heading.delta();
        let x = self.x.checked_add_signed(dx)?;
        let y = self.y.checked_add_signed(dy)?;
        Some(Cell { x, y })
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    /// Order used wherever neighbours are enumerated.
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    pub const fn delta(self) -> (i32, i32) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn from_index(i: usize) -> Heading {
        Heading::ALL[i & 3]
    }

    pub const fn opposite(self) -> Heading {
        Heading::from_index(self.index() + 2)
    }

    pub const fn clockwise(self) -> Heading {
        Heading::from_index(self.index() + 1)
    }

    pub const fn counter_clockwise(self) -> Heading {
        Heading::from_index(self.index() + 3)
    }

    /// Number of 90 degree turns needed to go from `self` to `other` (0, 1 or 2).
    pub const fn quarter_turns(self, other: Heading) -> u32 {
        let diff = (other.index() + 4 - self.index()) % 4;
        if diff == 3 {
            1
        } else {
            diff as u32
        }
    }

    /// Heading pointing from `from` to an orthogonally adjacent `to`.
    pub fn between(from: Cell, to: Cell) -> Option<Heading> {
        Heading::ALL.into_iter().find(|h| from.step(*h) == Some(to))
    }

    pub const fn letter(self) -> char {
        match self {
            Heading::North => 'N',
            Heading::East => 'E',
            Heading::South => 'S',
            Heading::West => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Heading> {
        match c {
            'N' | 'n' => Some(Heading::North),
            'E' | 'e' => Some(Heading::East),
            'S' | 's' => Some(Heading::South),
            'W' | 'w' => Some(Heading::West),
            _ => None,
        }
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A static 4-connected grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
    cell_size: f64,
}

impl GridMap {
    /// An obstacle-free map with 1 m cells.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        Self::with_cell_size(width, height, 1.0)
    }

    pub fn with_cell_size(width: u32, height: u32, cell_size: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMap(format!("dimensions must be positive, got {width}x{height}")));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidMap(format!("cell size must be positive, got {cell_size}")));
        }
        Ok(Self {
            width,
            height,
            blocked: vec![false; width as usize * height as usize],
            cell_size,
        })
    }

    pub fn from_blocked<I: IntoIterator<Item = Cell>>(width: u32, height: u32, blocked: I) -> Result<Self> {
        let mut map = Self::new(width, height)?;
        for cell in blocked {
            map.set_blocked(cell, true)?;
        }
        Ok(map)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn num_cells(&self) -> usize {
        self.blocked.len()
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x < self.width && cell.y < self.height
    }

    pub fn set_blocked(&mut self, cell: Cell, blocked: bool) -> Result<()> {
        if !self.in_bounds(cell) {
            return Err(Error::InvalidMap(format!("cell {cell} is out of bounds")));
        }
        let i = self.index(cell);
        self.blocked[i] = blocked;
        Ok(())
    }

    pub fn is_blocked(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && self.blocked[self.index(cell)]
    }

    /// In bounds and not an obstacle.
    pub fn is_free(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && !self.blocked[self.index(cell)]
    }

    /// Row-major index. `cell` must be in bounds.
    pub fn index(&self, cell: Cell) -> usize {
        cell.y as usize * self.width as usize + cell.x as usize
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let w = self.width as usize;
        Cell::new((index % w) as u32, (index / w) as u32)
    }

    pub fn blocked_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| self.cell_at(i))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.blocked
            .iter()
            .enumerate()
            .filter(|(_, b)| !**b)
            .map(|(i, _)| self.cell_at(i))
    }

    /// The free cell one step from `cell` along `heading`.
    pub fn step(&self, cell: Cell, heading: Heading) -> Option<Cell> {
        cell.step(heading).filter(|c| self.is_free(*c))
    }

    /// Free orthogonal neighbours in N, E, S, W order, each with the heading
    /// that points from `cell` to it.
    pub fn neighbors(&self, cell: Cell) -> Vec<(Cell, Heading)> {
        Heading::ALL
            .into_iter()
            .filter_map(|h| self.step(cell, h).map(|c| (c, h)))
            .collect()
    }

    /// True when some 4-neighbour of `cell` is an obstacle.
    pub fn touches_obstacle(&self, cell: Cell) -> bool {
        Heading::ALL
            .into_iter()
            .any(|h| cell.step(h).is_some_and(|c| self.is_blocked(c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentTask {
    pub id: u32,
    pub start: Cell,
    pub start_heading: Heading,
    pub goal: Cell,
}

/// A map plus an ordered list of agent tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub map: GridMap,
    pub agents: Vec<AgentTask>,
}

impl Instance {
    /// Checks endpoint validity, id uniqueness and endpoint distinctness.
    pub fn new(map: GridMap, agents: Vec<AgentTask>) -> Result<Self> {
        for (i, a) in agents.iter().enumerate() {
            for (what, cell) in [("start", a.start), ("goal", a.goal)] {
                if !map.is_free(cell) {
                    return Err(Error::InvalidInstance(format!(
                        "agent {} {what} {cell} is out of bounds or blocked",
                        a.id
                    )));
                }
            }
            for b in &agents[..i] {
                if a.id == b.id {
                    return Err(Error::InvalidInstance(format!("duplicate agent id {}", a.id)));
                }
                if a.start == b.start {
                    return Err(Error::InvalidInstance(format!(
                        "agents {} and {} share start {}",
                        b.id, a.id, a.start
                    )));
                }
                if a.goal == b.goal {
                    return Err(Error::InvalidInstance(format!(
                        "agents {} and {} share goal {}",
                        b.id, a.id, a.goal
                    )));
                }
            }
        }
        Ok(Self { map, agents })
    }

    pub fn agent(&self, id: u32) -> Option<&AgentTask> {
        self.agents.iter().find(|a| a.id == id)
    }
}

/// Shortest 4-connected path from `start` to `goal` that never enters a cell
/// for which `forbidden` returns true (the endpoints themselves are exempt).
pub fn bfs_path(map: &GridMap, start: Cell, goal: Cell, forbidden: impl Fn(Cell) -> bool) -> Option<Vec<Cell>> {
    if !map.is_free(start) || !map.is_free(goal) {
        return None;
    }
    if start == goal {
        return Some(vec![start]);
    }
    let mut parent = vec![usize::MAX; map.num_cells()];
    let s = map.index(start);
    parent[s] = s;
    let mut queue = VecDeque::from([start]);
    while let Some(cell) = queue.pop_front() {
        for (next, _) in map.neighbors(cell) {
            let ni = map.index(next);
            if parent[ni] != usize::MAX || (next != goal && forbidden(next)) {
                continue;
            }
            parent[ni] = map.index(cell);
            if next == goal {
                let mut path = vec![goal];
                let mut i = parent[ni];
                while i != s {
                    path.push(map.cell_at(i));
                    i = parent[i];
                }
                path.push(start);
                path.reverse();
                return Some(path);
            }
            queue.push_back(next);
        }
    }
    None
}

/// One witness path per agent (in instance order) that avoids every other
/// agent's start and goal, or the id of the first agent that has none.
/// An agent whose own start or goal is another agent's endpoint has none:
/// the planner keeps unplanned agents' endpoints blocked for all time.
pub fn well_formed_witnesses(instance: &Instance) -> Result<Vec<Vec<Cell>>> {
    let map = &instance.map;
    let mut endpoint_owner: Vec<Vec<u32>> = vec![Vec::new(); map.num_cells()];
    for a in &instance.agents {
        endpoint_owner[map.index(a.start)].push(a.id);
        endpoint_owner[map.index(a.goal)].push(a.id);
    }
    instance
        .agents
        .iter()
        .map(|a| {
            let foreign = |c: Cell| endpoint_owner[map.index(c)].iter().any(|owner| *owner != a.id);
            if foreign(a.start) || foreign(a.goal) {
                return Err(Error::NotWellFormed { agent: a.id });
            }
            bfs_path(map, a.start, a.goal, foreign).ok_or(Error::NotWellFormed { agent: a.id })
        })
        .collect()
}

pub fn is_well_formed(instance: &Instance) -> bool {
    well_formed_witnesses(instance).is_ok()
}
