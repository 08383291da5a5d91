//! Text and JSON formats: MovingAI-style maps, scenario files, solution
//! files and reservation dumps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use kinosipp_core::grid::{AgentTask, Cell, GridMap, Heading, Instance};
use kinosipp_core::kinematics::KinematicParams;
use kinosipp_core::plan::{Action, AgentPlan};
use kinosipp_core::planner::Solution;
use kinosipp_core::reservation::ReservationTable;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("cannot read {path}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("map line {line}: {message}")]
    Map { line: usize, message: String },
    #[error("bad JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] kinosipp_core::Error),
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Read {
        path: path.to_owned(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| FormatError::Write {
        path: path.to_owned(),
        source,
    })
}

/// Parses `type octile / height H / width W / map` followed by `H` rows of
/// `W` glyphs. `.` and `G` are free; `@`, `T`, `O` and `W` are blocked.
pub fn parse_map(text: &str) -> Result<GridMap> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let mut height = None;
    let mut width = None;
    let mut last_line = 0;
    loop {
        let Some((no, line)) = lines.next() else {
            return Err(FormatError::Map {
                line: last_line + 1,
                message: "missing `map` line".into(),
            });
        };
        last_line = no;
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next()) {
            (None, _) => continue,
            (Some("type"), _) => {}
            (Some("height"), Some(v)) => {
                height = Some(v.parse::<u32>().map_err(|e| FormatError::Map {
                    line: no,
                    message: format!("bad height {v:?}: {e}"),
                })?)
            }
            (Some("width"), Some(v)) => {
                width = Some(v.parse::<u32>().map_err(|e| FormatError::Map {
                    line: no,
                    message: format!("bad width {v:?}: {e}"),
                })?)
            }
            (Some("map"), None) => break,
            _ => {
                return Err(FormatError::Map {
                    line: no,
                    message: format!("unexpected header line {line:?}"),
                })
            }
        }
    }
    let missing = |what: &str| FormatError::Map {
        line: last_line,
        message: format!("header has no {what}"),
    };
    let height = height.ok_or_else(|| missing("height"))?;
    let width = width.ok_or_else(|| missing("width"))?;
    let mut map = GridMap::new(width, height)?;
    let mut y = 0;
    for (no, line) in lines {
        if y == height {
            if line.trim().is_empty() {
                continue;
            }
            return Err(FormatError::Map {
                line: no,
                message: format!("more than {height} rows"),
            });
        }
        let glyphs: Vec<char> = line.chars().collect();
        if glyphs.len() != width as usize {
            return Err(FormatError::Map {
                line: no,
                message: format!("row has {} cells, expected {width}", glyphs.len()),
            });
        }
        for (x, g) in glyphs.into_iter().enumerate() {
            let blocked = match g {
                '.' | 'G' => false,
                '@' | 'T' | 'O' | 'W' => true,
                other => {
                    return Err(FormatError::Map {
                        line: no,
                        message: format!("unknown glyph {other:?} at column {x}"),
                    })
                }
            };
            map.set_blocked(Cell::new(x as u32, y), blocked)?;
        }
        y += 1;
    }
    if y != height {
        return Err(FormatError::Map {
            line: last_line + y as usize + 1,
            message: format!("expected {height} rows, found {y}"),
        });
    }
    Ok(map)
}

pub fn serialize_map(map: &GridMap) -> String {
    let mut out = String::with_capacity(map.num_cells() + map.height() as usize + 40);
    let _ = write!(out, "type octile\nheight {}\nwidth {}\nmap\n", map.height(), map.width());
    for y in 0..map.height() {
        for x in 0..map.width() {
            out.push(if map.is_blocked(Cell::new(x, y)) { '@' } else { '.' });
        }
        out.push('\n');
    }
    out
}

pub fn read_map(path: &Path) -> Result<GridMap> {
    parse_map(&read_text(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAgent {
    pub id: u32,
    pub start: [u32; 2],
    pub heading: String,
    pub goal: [u32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub agents: Vec<ScenarioAgent>,
}

fn cell(xy: [u32; 2]) -> Cell {
    Cell::new(xy[0], xy[1])
}

fn xy(c: Cell) -> [u32; 2] {
    [c.x, c.y]
}

fn heading(s: &str) -> Result<Heading> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Heading::from_letter(c),
        _ => None,
    }
    .ok_or_else(|| FormatError::Invalid(format!("heading must be one of N, E, S, W, got {s:?}")))
}

pub fn parse_scenario(text: &str, map: GridMap) -> Result<Instance> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    let agents = file
        .agents
        .iter()
        .map(|a| {
            Ok(AgentTask {
                id: a.id,
                start: cell(a.start),
                start_heading: heading(&a.heading)?,
                goal: cell(a.goal),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(map, agents)?)
}

pub fn serialize_scenario(instance: &Instance) -> String {
    let file = ScenarioFile {
        agents: instance
            .agents
            .iter()
            .map(|a| ScenarioAgent {
                id: a.id,
                start: xy(a.start),
                heading: a.start_heading.letter().to_string(),
                goal: xy(a.goal),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("scenario serializes")
}

pub fn read_instance(map_path: &Path, scen_path: &Path) -> Result<Instance> {
    let map = read_map(map_path)?;
    parse_scenario(&read_text(scen_path)?, map)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRecord {
    #[serde(rename = "type")]
    pub kind: String,
    pub t_start: f64,
    pub t_end: f64,
    pub from: [u32; 2],
    pub to: [u32; 2],
    pub v_start: f64,
    pub v_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_to: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub id: u32,
    pub start: [u32; 2],
    pub heading: String,
    pub goal: [u32; 2],
    pub cost: f64,
    pub actions: Vec<ActionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub success: bool,
    pub failed_agent: Option<u32>,
    pub sum_of_costs: f64,
    pub makespan: f64,
    pub runtime_ms: f64,
    pub expansions: u64,
    pub generated: u64,
}

/// Motion model the plans were made for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub v_max: f64,
    pub a_acc: f64,
    pub a_dec: f64,
    pub speed_step: f64,
    pub rot_time: f64,
    pub cell_size: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_speed: Option<f64>,
}

impl ModelRecord {
    pub fn params(&self) -> KinematicParams {
        KinematicParams {
            v_max: self.v_max,
            a_acc: self.a_acc,
            a_dec: self.a_dec,
            speed_step: self.speed_step,
            rot_time_quarter: self.rot_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub model: ModelRecord,
    pub summary: SummaryRecord,
    pub agents: Vec<PlanRecord>,
}

pub fn action_record(a: &Action) -> ActionRecord {
    match *a {
        Action::Rotate {
            t_start,
            t_end,
            cell,
            from,
            to,
        } => ActionRecord {
            kind: "rotate".into(),
            t_start,
            t_end,
            from: xy(cell),
            to: xy(cell),
            v_start: 0.0,
            v_end: 0.0,
            heading_from: Some(from.letter().to_string()),
            heading_to: Some(to.letter().to_string()),
        },
        Action::Wait { t_start, t_end, cell } => ActionRecord {
            kind: "wait".into(),
            t_start,
            t_end,
            from: xy(cell),
            to: xy(cell),
            v_start: 0.0,
            v_end: 0.0,
            heading_from: None,
            heading_to: None,
        },
        Action::Move {
            t_start,
            t_end,
            from,
            to,
            v_start,
            v_end,
        } => ActionRecord {
            kind: "move".into(),
            t_start,
            t_end,
            from: xy(from),
            to: xy(to),
            v_start,
            v_end,
            heading_from: None,
            heading_to: None,
        },
    }
}

pub fn action_from_record(r: &ActionRecord) -> Result<Action> {
    let headings = || -> Result<(Heading, Heading)> {
        match (&r.heading_from, &r.heading_to) {
            (Some(f), Some(t)) => Ok((heading(f)?, heading(t)?)),
            _ => Err(FormatError::Invalid("rotate action needs heading_from and heading_to".into())),
        }
    };
    Ok(match r.kind.as_str() {
        "rotate" => {
            let (from, to) = headings()?;
            Action::Rotate {
                t_start: r.t_start,
                t_end: r.t_end,
                cell: cell(r.from),
                from,
                to,
            }
        }
        "wait" => Action::Wait {
            t_start: r.t_start,
            t_end: r.t_end,
            cell: cell(r.from),
        },
        "move" => Action::Move {
            t_start: r.t_start,
            t_end: r.t_end,
            from: cell(r.from),
            to: cell(r.to),
            v_start: r.v_start,
            v_end: r.v_end,
        },
        other => return Err(FormatError::Invalid(format!("unknown action type {other:?}"))),
    })
}

pub fn plan_record(plan: &AgentPlan, cost: f64) -> PlanRecord {
    PlanRecord {
        id: plan.agent,
        start: xy(plan.start),
        heading: plan.start_heading.letter().to_string(),
        goal: xy(plan.goal),
        cost,
        actions: plan.actions.iter().map(action_record).collect(),
    }
}

pub fn plan_from_record(r: &PlanRecord) -> Result<AgentPlan> {
    Ok(AgentPlan {
        agent: r.id,
        start: cell(r.start),
        start_heading: heading(&r.heading)?,
        goal: cell(r.goal),
        actions: r.actions.iter().map(action_from_record).collect::<Result<_>>()?,
    })
}

pub fn solution_file(solution: &Solution, model: ModelRecord) -> SolutionFile {
    let cost_of = |id: u32| {
        solution
            .agents
            .iter()
            .find(|a| a.agent == id)
            .map_or(f64::NAN, |a| a.cost)
    };
    SolutionFile {
        model,
        summary: SummaryRecord {
            success: solution.success,
            failed_agent: solution.failed_agent,
            sum_of_costs: solution.sum_of_costs,
            makespan: solution.makespan,
            runtime_ms: solution.runtime_secs * 1e3,
            expansions: solution.stats.expansions,
            generated: solution.stats.generated,
        },
        agents: solution.plans.iter().map(|p| plan_record(p, cost_of(p.agent))).collect(),
    }
}

pub fn parse_solution(text: &str) -> Result<(SolutionFile, Vec<AgentPlan>)> {
    let file: SolutionFile = serde_json::from_str(text)?;
    let plans = file.agents.iter().map(plan_from_record).collect::<Result<_>>()?;
    Ok((file, plans))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservedCell {
    pub cell: [u32; 2],
    /// `[start, end]` pairs; `end` is `null` when the reservation never ends.
    pub intervals: Vec<(f64, Option<f64>)>,
}

/// Debug listing of every reserved cell.
pub fn reservation_dump(table: &ReservationTable) -> Vec<ReservedCell> {
    table
        .iter()
        .filter(|(_, r)| !r.is_empty())
        .map(|(c, r)| ReservedCell {
            cell: xy(c),
            intervals: r
                .iter()
                .map(|iv| (iv.start, iv.end.is_finite().then_some(iv.end)))
                .collect(),
        })
        .collect()
}
