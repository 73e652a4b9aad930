//! Deviation between a searching vehicle `c` and a target entity `t`.
//!
//! The total deviation is `alpha * d_s + (1 - alpha) * d_p` where `d_s` is the speed
//! difference relative to the searcher's allowed speed window and `d_p` the distance
//! to the closer end of the target relative to the search range. A pair is eligible
//! when both ratios are at most one and the target is not behind the searcher.

use crate::model::{FormationParams, PlatoonableEntity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub speed_dev: f64,
    pub position_dev: f64,
    pub total: f64,
}

impl Deviation {
    /// Cost of staying individual.
    pub const SELF: Deviation = Deviation {
        speed_dev: 0.0,
        position_dev: 0.0,
        total: 1.0,
    };
}

/// `|D_c - D_t| / (m * D_c)`. Normalised by the searcher, so not symmetric.
pub fn speed_deviation(c: &PlatoonableEntity, t: &PlatoonableEntity, speed_window: f64) -> f64 {
    (c.desired_speed - t.desired_speed).abs() / (speed_window * c.desired_speed)
}

/// `min(|p_c - p_t|, |l_t - p_c|) / r`.
pub fn position_deviation(c: &PlatoonableEntity, t: &PlatoonableEntity, range: f64) -> f64 {
    let to_front = (c.front_position - t.front_position).abs();
    let to_rear = (t.rear_position - c.front_position).abs();
    to_front.min(to_rear) / range
}

pub fn deviation(
    c: &PlatoonableEntity,
    t: &PlatoonableEntity,
    params: &FormationParams,
) -> Deviation {
    if c.id == t.id {
        return Deviation::SELF;
    }
    let speed_dev = speed_deviation(c, t, params.speed_window);
    let position_dev = position_deviation(c, t, params.position_range);
    Deviation {
        speed_dev,
        position_dev,
        total: params.alpha * speed_dev + (1.0 - params.alpha) * position_dev,
    }
}

/// Inclusive window checks; a vehicle may always stay on its own.
pub fn is_eligible(c: &PlatoonableEntity, t: &PlatoonableEntity, params: &FormationParams) -> bool {
    if c.id == t.id {
        return true;
    }
    c.front_position <= t.rear_position
        && speed_deviation(c, t, params.speed_window) <= 1.0
        && position_deviation(c, t, params.position_range) <= 1.0
}

/// Deviation of an eligible pair, `None` otherwise.
pub fn eligible_deviation(
    c: &PlatoonableEntity,
    t: &PlatoonableEntity,
    params: &FormationParams,
) -> Option<Deviation> {
    if c.id == t.id {
        return Some(Deviation::SELF);
    }
    if c.front_position > t.rear_position {
        return None;
    }
    let d = deviation(c, t, params);
    (d.speed_dev <= 1.0 && d.position_dev <= 1.0).then_some(d)
}
