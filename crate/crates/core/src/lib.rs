//! Multi-agent path finding on 4-connected grids for agents with bounded
//! speed and bounded acceleration/deceleration.
//!
//! Agents are planned one at a time in priority order. Each single-agent
//! search is a safe-interval search over `(cell, heading, speed, interval)`
//! states where speeds come from a finite, evenly spaced set and per-cell
//! speed transitions are precomputed once per parameter set. Plans of
//! higher-priority agents are turned into per-cell sweep reservations that
//! later agents must avoid.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! and the benchmark harness live in the `kinosipp` crate.

#![no_std]

extern crate alloc;

pub mod clock;
pub mod error;
pub mod grid;
pub mod heuristics;
pub mod kinematics;
pub mod plan;
pub mod planner;
pub mod reservation;
pub mod scenario;
pub mod search;
pub mod validator;

pub use clock::{Clock, NullClock};
pub use error::{Error, Result};
pub use grid::{AgentTask, Cell, GridMap, Heading, Instance};
pub use heuristics::{HeuristicContext, HeuristicKind};
pub use kinematics::{KinematicParams, SpeedSet, TransitionTable};
pub use plan::{Action, AgentPlan};
pub use planner::{PlanOptions, PriorityOrder, Solution};
pub use reservation::{ReservationTable, SweepRecord, TimeInterval};
pub use search::{SearchStats, SpeedModel};
pub use validator::{Violation, ViolationKind};

/// Absolute tolerance used for every time comparison inside the search.
pub const TIME_EPS: f64 = 1e-9;
