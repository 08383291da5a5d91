//! File formats, configuration, a wall clock and the benchmark harness
//! around [`kinosipp_core`].

pub mod bench;
pub mod config;
pub mod formats;

pub use kinosipp_core as core;

use std::time::Instant;

use kinosipp_core::Clock;

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock(Instant);

impl StdClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now_secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}
