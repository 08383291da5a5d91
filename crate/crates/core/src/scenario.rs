//! Warehouse-style maps and random task generation.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{is_well_formed, AgentTask, Cell, GridMap, Heading, Instance};

/// A grid of rectangular obstacle blocks with fixed gaps, centred in the
/// map (any odd leftover goes to the left/top margin).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WarehouseLayout {
    pub width: u32,
    pub height: u32,
    pub blocks_x: u32,
    pub blocks_y: u32,
    pub block_w: u32,
    pub block_h: u32,
    pub gap_x: u32,
    pub gap_y: u32,
}

impl WarehouseLayout {
    /// 46 columns × 24 rows, 5×5 blocks of 5 columns × 2 rows.
    pub const MAP1: WarehouseLayout = WarehouseLayout {
        width: 46,
        height: 24,
        blocks_x: 5,
        blocks_y: 5,
        block_w: 5,
        block_h: 2,
        gap_x: 4,
        gap_y: 3,
    };
    /// 142 columns × 46 rows, 10×10 blocks of 10 columns × 2 rows.
    pub const MAP2: WarehouseLayout = WarehouseLayout {
        width: 142,
        height: 46,
        blocks_x: 10,
        blocks_y: 10,
        block_w: 10,
        block_h: 2,
        gap_x: 4,
        gap_y: 2,
    };
    /// 352 columns × 66 rows, 15×15 blocks of 20 columns × 2 rows.
    pub const MAP3: WarehouseLayout = WarehouseLayout {
        width: 352,
        height: 66,
        blocks_x: 15,
        blocks_y: 15,
        block_w: 20,
        block_h: 2,
        gap_x: 3,
        gap_y: 2,
    };

    pub fn preset(name: &str) -> Option<WarehouseLayout> {
        match name.to_ascii_lowercase().as_str() {
            "map1" => Some(Self::MAP1),
            "map2" => Some(Self::MAP2),
            "map3" => Some(Self::MAP3),
            _ => None,
        }
    }

    fn margins(span: u32, count: u32, size: u32, gap: u32, axis: &str) -> Result<(u32, u32)> {
        let used = count
            .checked_mul(size)
            .and_then(|b| b.checked_add(count.saturating_sub(1).checked_mul(gap)?))
            .ok_or_else(|| Error::Layout(format!("{axis} extent overflows")))?;
        if used + 2 > span {
            return Err(Error::Layout(format!(
                "{axis}: blocks need {used} cells plus a free border, map has {span}"
            )));
        }
        let spare = span - used;
        Ok((spare - spare / 2, spare / 2))
    }

    pub fn build(&self) -> Result<GridMap> {
        if self.block_w == 0 || self.block_h == 0 {
            return Err(Error::Layout(format!("empty block {}x{}", self.block_w, self.block_h)));
        }
        let (left, _) = Self::margins(self.width, self.blocks_x, self.block_w, self.gap_x, "width")?;
        let (top, _) = Self::margins(self.height, self.blocks_y, self.block_h, self.gap_y, "height")?;
        let mut map = GridMap::new(self.width, self.height)?;
        for by in 0..self.blocks_y {
            for bx in 0..self.blocks_x {
                let x0 = left + bx * (self.block_w + self.gap_x);
                let y0 = top + by * (self.block_h + self.gap_y);
                for y in y0..y0 + self.block_h {
                    for x in x0..x0 + self.block_w {
                        map.set_blocked(Cell::new(x, y), true)?;
                    }
                }
            }
        }
        Ok(map)
    }
}

/// Free cells next to an obstacle, plus free cells of the first column.
pub fn candidate_endpoints(map: &GridMap) -> Vec<Cell> {
    map.free_cells()
        .filter(|&c| c.x == 0 || map.touches_obstacle(c))
        .collect()
}

const MAX_ATTEMPTS: usize = 1000;

/// Draws `n_agents` tasks with distinct starts and distinct goals among the
/// candidate endpoints and random headings, redrawing until the instance is
/// well-formed. Deterministic for a given seed.
pub fn generate_instance(map: &GridMap, n_agents: usize, seed: u64) -> Result<Instance> {
    let candidates = candidate_endpoints(map);
    if candidates.len() < 2 * n_agents {
        return Err(Error::Generation(format!(
            "{n_agents} agents need {} endpoint cells, map has {}",
            2 * n_agents,
            candidates.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let picked: Vec<Cell> = candidates.choose_multiple(&mut rng, 2 * n_agents).copied().collect();
        let agents = (0..n_agents)
            .map(|i| AgentTask {
                id: i as u32,
                start: picked[2 * i],
                start_heading: Heading::from_index(rng.gen_range(0..4)),
                goal: picked[2 * i + 1],
            })
            .collect();
        let instance = Instance::new(map.clone(), agents)?;
        if is_well_formed(&instance) {
            return Ok(instance);
        }
    }
    Err(Error::Generation(format!(
        "no well-formed instance with {n_agents} agents after {MAX_ATTEMPTS} draws"
    )))
}
