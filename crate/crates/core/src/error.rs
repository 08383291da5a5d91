use alloc::string::String;

use crate::grid::Cell;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid kinematic parameters: {0}")]
    InvalidParams(String),
    #[error("speed transition {v_from} -> {v_to} over {distance} m is infeasible")]
    InfeasibleTransition { v_from: f64, v_to: f64, distance: f64 },
    #[error("cannot go from {v_in} m/s to {v_out} m/s within {distance} m")]
    InfeasibleSegment { v_in: f64, v_out: f64, distance: f64 },
    #[error("instance generation failed: {0}")]
    Generation(String),
    #[error("layout does not fit: {0}")]
    Layout(String),
    #[error("instance is not well-formed: agent {agent} has no path avoiding other endpoints")]
    NotWellFormed { agent: u32 },
    #[error("priority order is not a permutation of the agent ids")]
    BadOrder,
    #[error("malformed plan: {0}")]
    MalformedPlan(String),
    #[error("cell {0} is outside the map or blocked")]
    BadCell(Cell),
}
