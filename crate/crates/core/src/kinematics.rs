//! Speed discretization, per-cell speed transitions and acceleration-limited
//! motion profiles.
//!
//! A traversal between adjacent cell centres starting at speed `vi` and
//! ending at `vj` uses one constant acceleration `(vj² - vi²) / 2d`, which
//! takes `2d / (vi + vj)` seconds. The `0 -> 0` traversal cannot use a
//! constant acceleration and instead accelerates at the limit, optionally
//! cruises at `v_max`, and brakes at the limit.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Slack applied to the acceleration bound when testing a speed transition.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicParams {
    /// Maximum speed, m/s.
    pub v_max: f64,
    /// Maximum acceleration, m/s².
    pub a_acc: f64,
    /// Maximum deceleration (positive), m/s².
    pub a_dec: f64,
    /// Speed discretization step, m/s.
    pub speed_step: f64,
    /// Seconds per 90 degree in-place rotation.
    pub rot_time_quarter: f64,
}

impl Default for KinematicParams {
    fn default() -> Self {
        Self {
            v_max: 2.0,
            a_acc: 1.0,
            a_dec: 1.0,
            speed_step: 0.5,
            rot_time_quarter: 1.0,
        }
    }
}

impl KinematicParams {
    pub fn new(v_max: f64, a_acc: f64, a_dec: f64, speed_step: f64, rot_time_quarter: f64) -> Result<Self> {
        let p = Self {
            v_max,
            a_acc,
            a_dec,
            speed_step,
            rot_time_quarter,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("v_max", self.v_max),
            ("a_acc", self.a_acc),
            ("a_dec", self.a_dec),
            ("speed_step", self.speed_step),
            ("rot_time_quarter", self.rot_time_quarter),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if self.speed_step > self.v_max {
            return Err(Error::InvalidParams(format!(
                "speed step {} exceeds v_max {}",
                self.speed_step, self.v_max
            )));
        }
        Ok(())
    }

    /// Distance needed to brake from `v` to a standstill.
    pub fn stop_distance(&self, v: f64) -> f64 {
        v * v / (2.0 * self.a_dec)
    }

    pub fn rotation_time(&self, quarter_turns: u32) -> f64 {
        quarter_turns as f64 * self.rot_time_quarter
    }
}

/// The finite speed set `{0, stp, 2·stp, …, ⌊v_max/stp⌋·stp}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedSet {
    speeds: Vec<f64>,
}

impl SpeedSet {
    pub fn build(params: &KinematicParams) -> Self {
        // v_max / stp can land a hair under an integer (2 / 0.1), so nudge before flooring.
        let count = libm::floor(params.v_max / params.speed_step + 1e-9) as usize;
        let speeds = (0..=count)
            .map(|k| (k as f64 * params.speed_step).min(params.v_max))
            .collect();
        Self { speeds }
    }

    pub fn from_speeds(speeds: Vec<f64>) -> Self {
        Self { speeds }
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.speeds[index]
    }
}

/// Acceleration implied by going from `vi` to `vj` over `d` with one constant acceleration.
pub fn implied_acceleration(vi: f64, vj: f64, d: f64) -> f64 {
    (vj - vi) * (vi + vj) / (2.0 * d)
}

/// Whether `vj` can be reached from `vi` over one cell of length `d`.
pub fn transition_feasible(vi: f64, vj: f64, d: f64, params: &KinematicParams) -> bool {
    if vi == 0.0 && vj == 0.0 {
        return true;
    }
    let bound_ok = |v: f64| (0.0..=params.v_max + FEASIBILITY_SLACK).contains(&v);
    if !bound_ok(vi) || !bound_ok(vj) {
        return false;
    }
    let a = implied_acceleration(vi, vj, d);
    -params.a_dec - FEASIBILITY_SLACK <= a && a <= params.a_acc + FEASIBILITY_SLACK
}

/// Minimal time to traverse one cell from `vi` to `vj`.
pub fn move_time(vi: f64, vj: f64, d: f64, params: &KinematicParams) -> Result<f64> {
    if !transition_feasible(vi, vj, d, params) {
        return Err(Error::InfeasibleTransition {
            v_from: vi,
            v_to: vj,
            distance: d,
        });
    }
    if vi + vj > 0.0 {
        Ok(2.0 * d / (vi + vj))
    } else {
        min_time_segment(d, 0.0, 0.0, params)
    }
}

/// Closed-form stop-to-stop time with maximum acceleration then maximum
/// deceleration, ignoring the speed bound.
pub fn bang_bang_time(d: f64, params: &KinematicParams) -> f64 {
    let (a, b) = (params.a_acc, params.a_dec);
    (1.0 / a + 1.0 / b) * libm::sqrt(2.0 * a * b * d / (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSegment {
    pub duration: f64,
    pub v_start: f64,
    pub accel: f64,
}

impl ProfileSegment {
    pub fn v_end(&self) -> f64 {
        self.v_start + self.accel * self.duration
    }

    pub fn displacement(&self) -> f64 {
        self.v_start * self.duration + 0.5 * self.accel * self.duration * self.duration
    }
}

/// Piecewise-constant-acceleration motion along a straight line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotionProfile {
    pub segments: Vec<ProfileSegment>,
}

impl MotionProfile {
    pub fn constant(duration: f64, speed: f64) -> Self {
        Self {
            segments: vec![ProfileSegment {
                duration,
                v_start: speed,
                accel: 0.0,
            }],
        }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn displacement(&self) -> f64 {
        self.segments.iter().map(ProfileSegment::displacement).sum()
    }

    pub fn v_start(&self) -> f64 {
        self.segments.first().map_or(0.0, |s| s.v_start)
    }

    pub fn v_end(&self) -> f64 {
        self.segments.last().map_or(0.0, ProfileSegment::v_end)
    }

    /// Distance covered after `t` seconds (clamped to the profile's span).
    pub fn position_at(&self, t: f64) -> f64 {
        let mut remaining = t.max(0.0);
        let mut pos = 0.0;
        for s in &self.segments {
            if remaining <= s.duration {
                return pos + s.v_start * remaining + 0.5 * s.accel * remaining * remaining;
            }
            pos += s.displacement();
            remaining -= s.duration;
        }
        pos
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        let mut remaining = t.max(0.0);
        for s in &self.segments {
            if remaining <= s.duration {
                return s.v_start + s.accel * remaining;
            }
            remaining -= s.duration;
        }
        self.v_end()
    }

    /// Earliest time at which the covered distance reaches `target`, if it does.
    /// Assumes speeds never go negative, so position is non-decreasing.
    pub fn time_at_position(&self, target: f64) -> Option<f64> {
        if target <= 0.0 {
            return Some(0.0);
        }
        let mut t0 = 0.0;
        let mut pos = 0.0;
        for s in &self.segments {
            let seg = s.displacement();
            if pos + seg >= target {
                let need = target - pos;
                let tau = if s.accel.abs() < 1e-15 {
                    need / s.v_start
                } else {
                    // v0·τ + a·τ²/2 = need, smallest non-negative root.
                    let disc = (s.v_start * s.v_start + 2.0 * s.accel * need).max(0.0);
                    (libm::sqrt(disc) - s.v_start) / s.accel
                };
                return Some(t0 + tau.clamp(0.0, s.duration));
            }
            pos += seg;
            t0 += s.duration;
        }
        None
    }
}

/// Fastest profile covering `distance` from `v_in` to `v_out` under the
/// acceleration limits and `v_max`: a triangle, or a trapezoid when the
/// triangle's peak would exceed `v_max`.
pub fn fastest_profile(distance: f64, v_in: f64, v_out: f64, params: &KinematicParams) -> Result<MotionProfile> {
    let infeasible = || Error::InfeasibleSegment {
        v_in,
        v_out,
        distance,
    };
    let speed_ok = |v: f64| (0.0..=params.v_max + FEASIBILITY_SLACK).contains(&v);
    if !(distance >= 0.0) || !speed_ok(v_in) || !speed_ok(v_out) {
        return Err(infeasible());
    }
    let (a, b) = (params.a_acc, params.a_dec);
    let (v_in, v_out) = (v_in.min(params.v_max), v_out.min(params.v_max));
    let needed = if v_out >= v_in {
        (v_out * v_out - v_in * v_in) / (2.0 * a)
    } else {
        (v_in * v_in - v_out * v_out) / (2.0 * b)
    };
    if needed > distance + FEASIBILITY_SLACK {
        return Err(infeasible());
    }

    let peak_sq = (2.0 * a * b * distance + b * v_in * v_in + a * v_out * v_out) / (a + b);
    let peak = libm::sqrt(peak_sq).max(v_in).max(v_out);
    let mut segments = Vec::with_capacity(3);
    let mut push = |duration: f64, v_start: f64, accel: f64| {
        if duration > 0.0 {
            segments.push(ProfileSegment {
                duration,
                v_start,
                accel,
            });
        }
    };
    if peak <= params.v_max {
        push((peak - v_in) / a, v_in, a);
        push((peak - v_out) / b, peak, -b);
    } else {
        let vm = params.v_max;
        let d_acc = (vm * vm - v_in * v_in) / (2.0 * a);
        let d_dec = (vm * vm - v_out * v_out) / (2.0 * b);
        push((vm - v_in) / a, v_in, a);
        push((distance - d_acc - d_dec) / vm, vm, 0.0);
        push((vm - v_out) / b, vm, -b);
    }
    Ok(MotionProfile { segments })
}

/// Minimum time to cover `distance` from `v_in` to `v_out`.
pub fn min_time_segment(distance: f64, v_in: f64, v_out: f64, params: &KinematicParams) -> Result<f64> {
    fastest_profile(distance, v_in, v_out, params).map(|p| p.duration())
}

/// The motion used by the planner for one cell traversal `vi -> vj`.
pub fn profile_for_move(vi: f64, vj: f64, d: f64, params: &KinematicParams) -> Result<MotionProfile> {
    if !transition_feasible(vi, vj, d, params) {
        return Err(Error::InfeasibleTransition {
            v_from: vi,
            v_to: vj,
            distance: d,
        });
    }
    if vi + vj > 0.0 {
        Ok(MotionProfile {
            segments: vec![ProfileSegment {
                duration: 2.0 * d / (vi + vj),
                v_start: vi,
                accel: implied_acceleration(vi, vj, d),
            }],
        })
    } else {
        fastest_profile(d, 0.0, 0.0, params)
    }
}

/// Memoized transition feasibility and move times over a [`SpeedSet`].
/// Speeds are addressed by index only.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    params: KinematicParams,
    speeds: SpeedSet,
    distance: f64,
    achievable: Vec<Vec<usize>>,
    move_time: Vec<f64>,
}

impl TransitionTable {
    /// Builds the table for cells `distance` apart.
    pub fn precompute(speeds: SpeedSet, distance: f64, params: &KinematicParams) -> Self {
        let n = speeds.len();
        let mut achievable = vec![Vec::new(); n];
        let mut times = vec![f64::INFINITY; n * n];
        for i in 0..n {
            for j in 0..n {
                if let Ok(t) = move_time(speeds.get(i), speeds.get(j), distance, params) {
                    achievable[i].push(j);
                    times[i * n + j] = t;
                }
            }
        }
        Self {
            params: *params,
            speeds,
            distance,
            achievable,
            move_time: times,
        }
    }

    pub fn for_params(params: &KinematicParams, distance: f64) -> Self {
        Self::precompute(SpeedSet::build(params), distance, params)
    }

    pub fn params(&self) -> &KinematicParams {
        &self.params
    }

    pub fn speeds(&self) -> &SpeedSet {
        &self.speeds
    }

    pub fn speed(&self, index: usize) -> f64 {
        self.speeds.get(index)
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn achievable(&self, from: usize) -> &[usize] {
        &self.achievable[from]
    }

    pub fn is_achievable(&self, from: usize, to: usize) -> bool {
        self.move_time[from * self.len() + to].is_finite()
    }

    pub fn move_time(&self, from: usize, to: usize) -> Option<f64> {
        let t = self.move_time[from * self.len() + to];
        t.is_finite().then_some(t)
    }
}
