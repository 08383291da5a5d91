//! Timed per-agent action sequences.

use alloc::vec::Vec;

use crate::grid::{Cell, Heading};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    /// In-place rotation at zero speed.
    Rotate {
        t_start: f64,
        t_end: f64,
        cell: Cell,
        from: Heading,
        to: Heading,
    },
    /// Standing still at zero speed.
    Wait { t_start: f64, t_end: f64, cell: Cell },
    /// Traversal between adjacent cell centres.
    Move {
        t_start: f64,
        t_end: f64,
        from: Cell,
        to: Cell,
        v_start: f64,
        v_end: f64,
    },
}

impl Action {
    pub fn t_start(&self) -> f64 {
        match *self {
            Action::Rotate { t_start, .. } | Action::Wait { t_start, .. } | Action::Move { t_start, .. } => t_start,
        }
    }

    pub fn t_end(&self) -> f64 {
        match *self {
            Action::Rotate { t_end, .. } | Action::Wait { t_end, .. } | Action::Move { t_end, .. } => t_end,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Action::Rotate { .. } => "rotate",
            Action::Wait { .. } => "wait",
            Action::Move { .. } => "move",
        }
    }
}

/// The plan of one agent. An agent with no actions stays at its start forever.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentPlan {
    pub agent: u32,
    pub start: Cell,
    pub start_heading: Heading,
    pub goal: Cell,
    pub actions: Vec<Action>,
}

impl AgentPlan {
    pub fn stationary(agent: u32, start: Cell, start_heading: Heading) -> Self {
        Self {
            agent,
            start,
            start_heading,
            goal: start,
            actions: Vec::new(),
        }
    }

    /// Time the agent reaches its final cell and stays there.
    pub fn arrival_time(&self) -> f64 {
        self.actions
            .iter()
            .rev()
            .find(|a| matches!(a, Action::Move { .. }))
            .map_or(0.0, Action::t_end)
    }

    pub fn end_time(&self) -> f64 {
        self.actions.last().map_or(0.0, Action::t_end)
    }

    /// Number of cell-to-cell moves.
    pub fn num_moves(&self) -> usize {
        self.actions.iter().filter(|a| matches!(a, Action::Move { .. })).count()
    }

    /// Cells visited, in order, starting with the start cell.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.num_moves() + 1);
        out.push(self.start);
        out.extend(self.actions.iter().filter_map(|a| match a {
            Action::Move { to, .. } => Some(*to),
            _ => None,
        }));
        out
    }
}
