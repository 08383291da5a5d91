//! Wall-clock access for runtime statistics and time limits.
//!
//! The core has no access to an OS clock, so callers that want runtimes or
//! deadlines pass an implementation in.

/// Monotonic seconds since some fixed origin.
pub trait Clock {
    fn now_secs(&self) -> f64;
}

/// A clock that never advances. Runtimes read as zero and deadlines never fire.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_secs(&self) -> f64 {
        0.0
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now_secs(&self) -> f64 {
        (**self).now_secs()
    }
}
