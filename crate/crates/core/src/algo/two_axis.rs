use num_traits::{One, Signed, Zero};

use super::{become_leader, stage2_step, Action, Rule};
use crate::geom::{RPoint, Rational};
use crate::model::{Light, LocalView, Pattern};

/// Leader election with both axes agreed: the unique leftmost robot
/// descends and lights up; among several leftmost robots the bottommost
/// steps left first.
pub fn two_axis_step(view: &LocalView, pattern: &Pattern) -> Action {
    let leader_seen = view.own_color == Light::Leader || view.visible.iter().any(|(_, l)| *l == Light::Leader);
    if leader_seen {
        return stage2_step(view, pattern);
    }
    if view.own_color != Light::Off {
        return Action::null();
    }
    let nothing_left = view.visible.iter().all(|(p, _)| !p.x.is_negative());
    let level = || view.visible.iter().filter(|(p, _)| p.x.is_zero());
    if nothing_left && level().next().is_none() && view.visible.iter().all(|(_, l)| *l == Light::Off) {
        return become_leader(view);
    }
    if nothing_left && level().all(|(p, _)| p.y.is_positive()) && level().next().is_some() {
        return Action::move_to(RPoint::new(-Rational::one(), Rational::zero()), Rule::ShiftLeft);
    }
    Action::null()
}
