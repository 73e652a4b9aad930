//! Longitudinal control laws.
//!
//! Gaps passed to the individual laws are *net* gaps: bumper-to-bumper distance
//! minus the minimum standstill gap, so that a stopped queue settles exactly at
//! the minimum gap.

use crate::model::CarFollowingParams;

/// Constant-spacing controller weight of the leader's acceleration.
const CACC_C1: f64 = 0.5;
const CACC_DAMPING: f64 = 1.0;
const CACC_BANDWIDTH: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderInfo {
    pub gap: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatoonContext {
    /// Bumper-to-bumper distance to the predecessor.
    pub gap: f64,
    pub pred_speed: f64,
    pub pred_accel: f64,
    pub leader_speed: f64,
    pub leader_accel: f64,
}

/// Next speed under the Krauss law without dawdling.
pub fn krauss_speed(
    speed: f64,
    desired: f64,
    leader: Option<LeaderInfo>,
    cf: &CarFollowingParams,
    dt: f64,
) -> f64 {
    let mut next = desired.min(cf.v_max).min(speed + cf.max_accel * dt);
    if let Some(l) = leader {
        let tau = cf.krauss_headway;
        let v_safe = l.speed + (l.gap - l.speed * tau) / (speed / cf.max_decel + tau);
        next = next.min(v_safe);
    }
    next.max(0.0)
}

/// ACC acceleration: constant time-gap spacing policy, or speed tracking when
/// that asks for less.
pub fn acc_accel(
    speed: f64,
    desired: f64,
    leader: Option<LeaderInfo>,
    cf: &CarFollowingParams,
) -> f64 {
    let mut a = cf.acc_free_gain * (desired.min(cf.v_max) - speed);
    if let Some(l) = leader {
        let spacing_error = l.gap - cf.acc_headway * speed;
        let follow = (cf.acc_lambda * spacing_error + (l.speed - speed)) / cf.acc_headway;
        a = a.min(follow);
    }
    a.clamp(-cf.max_decel, cf.max_accel)
}

/// Sub-steps used when integrating the ACC law over one simulation step.
pub const ACC_SUBSTEPS: u32 = 10;

/// Speed after one step of ACC driving.
///
/// The law is integrated over `ACC_SUBSTEPS` sub-steps while the leader's speed
/// moves linearly from `leader.speed` to `leader_next_speed`. Evaluating the law
/// once per step with a headway equal to the step length overcorrects relative
/// speed and amplifies disturbances along a queue.
pub fn acc_speed(
    speed: f64,
    desired: f64,
    leader: Option<LeaderInfo>,
    leader_next_speed: f64,
    cf: &CarFollowingParams,
    dt: f64,
) -> f64 {
    let h = dt / f64::from(ACC_SUBSTEPS);
    let mut v = speed;
    let mut gap = leader.map(|l| l.gap);
    for i in 1..=ACC_SUBSTEPS {
        let current = leader.zip(gap).map(|(l, g)| {
            let share = f64::from(i) / f64::from(ACC_SUBSTEPS);
            LeaderInfo {
                gap: g,
                speed: l.speed + (leader_next_speed - l.speed) * share,
            }
        });
        v = (v + acc_accel(v, desired, current, cf) * h).clamp(0.0, cf.v_max);
        if let (Some(g), Some(l)) = (gap.as_mut(), current) {
            *g += (l.speed - v) * h;
        }
    }
    v
}

/// Constant-spacing CACC acceleration of a platoon follower.
pub fn cacc_accel(speed: f64, ctx: &PlatoonContext, cf: &CarFollowingParams) -> f64 {
    let root = CACC_DAMPING + (CACC_DAMPING * CACC_DAMPING - 1.0).max(0.0).sqrt();
    let k_pred = (2.0 * CACC_DAMPING - CACC_C1 * root) * CACC_BANDWIDTH;
    let k_lead = CACC_C1 * root * CACC_BANDWIDTH;
    let k_gap = CACC_BANDWIDTH * CACC_BANDWIDTH;
    let a = (1.0 - CACC_C1) * ctx.pred_accel + CACC_C1 * ctx.leader_accel
        - k_pred * (speed - ctx.pred_speed)
        - k_lead * (speed - ctx.leader_speed)
        + k_gap * (ctx.gap - cf.cacc_gap);
    a.clamp(-cf.max_decel, cf.max_accel)
}

/// Distance covered while braking at `decel` per step from `speed` to a stop,
/// with positions updated from the already reduced speed.
pub fn braking_distance(speed: f64, decel: f64, dt: f64) -> f64 {
    let step = decel * dt;
    if speed <= 0.0 {
        return 0.0;
    }
    let n = (speed / step).floor();
    dt * (n * speed - step * n * (n + 1.0) / 2.0)
}

/// Largest speed for the coming step from which the vehicle can still stop
/// behind a leader that starts braking at full deceleration now.
///
/// Solves `dt * v + braking_distance(v) <= net_gap + braking_distance(v_leader)`
/// exactly; the left side is piecewise linear and increasing in `v`.
pub fn safe_speed(net_gap: f64, leader_speed: f64, cf: &CarFollowingParams, dt: f64) -> f64 {
    let step = cf.max_decel * dt;
    let budget = net_gap + braking_distance(leader_speed, cf.max_decel, dt);
    if budget <= 0.0 {
        return 0.0;
    }
    let mut n = 0.0f64;
    loop {
        let v = (budget / dt + step * n * (n + 1.0) / 2.0) / (n + 1.0);
        if v < (n + 1.0) * step {
            return v;
        }
        n += 1.0;
    }
}

/// Whether a follower at `follower_speed` can keep a safe distance to a new
/// leader at `leader_speed` by braking at most comfortably this step.
pub fn follower_tolerates(
    follower_speed: f64,
    net_gap: f64,
    leader_speed: f64,
    cf: &CarFollowingParams,
    dt: f64,
) -> bool {
    if net_gap < 0.0 {
        return false;
    }
    let v = (follower_speed - cf.comfort_decel * dt).max(0.0);
    dt * v + braking_distance(v, cf.max_decel, dt)
        <= net_gap + braking_distance(leader_speed, cf.max_decel, dt) + 1e-9
}
