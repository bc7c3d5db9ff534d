use num_traits::{One, Signed, Zero};

use super::{psi_targets, Action, Rule};
use crate::geom::{RPoint, Rational};
use crate::model::{Light, LocalView, Pattern};

/// The shared frame fixed by the leader r_l at (-1, -1) and r_u at (-1, 0).
///
/// Stored relative to the observer: `origin` is the agreed origin in the
/// observer's oriented frame (local frame with y multiplied by `sigma`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgreedFrame {
    pub sigma: i8,
    pub origin: RPoint,
    pub u: Rational,
}

impl AgreedFrame {
    /// From the leader and r_u in oriented coordinates.
    pub fn from_anchors(sigma: i8, leader: &RPoint, r_u: &RPoint) -> Option<Self> {
        let u = &r_u.y - &leader.y;
        if !u.is_positive() || r_u.x != leader.x {
            return None;
        }
        let origin = RPoint::new(&leader.x + &u, &leader.y + &u);
        Some(Self { sigma, origin, u })
    }

    pub fn to_local(&self, agreed: &RPoint) -> RPoint {
        unorient(self.sigma, &self.origin.add(&agreed.scale(&self.u)))
    }

    pub fn from_local(&self, local: &RPoint) -> RPoint {
        orient(self.sigma, local).sub(&self.origin).scale(&(Rational::one() / &self.u))
    }
}

fn orient(sigma: i8, p: &RPoint) -> RPoint {
    if sigma < 0 {
        RPoint::new(p.x.clone(), -p.y.clone())
    } else {
        p.clone()
    }
}

fn unorient(sigma: i8, p: &RPoint) -> RPoint {
    orient(sigma, p)
}

/// True iff `i == 2` or a done robot is visible at the agreed point P[i-1].
pub fn partial_formation(view: &LocalView, frame: &AgreedFrame, pattern: &Pattern, i: usize) -> bool {
    if i == 2 {
        return true;
    }
    let spot = frame.to_local(pattern.get(i - 1));
    view.visible.iter().any(|(p, l)| *l == Light::Done && *p == spot)
}

pub fn stage2_step(view: &LocalView, pattern: &Pattern) -> Action {
    match view.own_color {
        Light::Leader => leader_step(view, pattern),
        Light::Off => off_step(view, pattern),
        _ => Action::null(),
    }
}

fn leader_step(view: &LocalView, pattern: &Pattern) -> Action {
    if view.visible.iter().any(|(_, l)| *l == Light::Off) {
        return Action::null();
    }
    if view.visible.is_empty() || pattern.len() < 2 {
        return Action::color(Light::Done, Rule::LeaderFinish);
    }
    let sigma: i8 = if view.visible.iter().all(|(p, _)| p.y.is_positive()) {
        1
    } else if view.visible.iter().all(|(p, _)| p.y.is_negative()) {
        -1
    } else {
        return Action::null();
    };
    let s1 = view.visible.iter().map(|(p, _)| orient(sigma, p)).min().expect("non-empty");
    let (p0, p1) = (pattern.get(0), pattern.get(1));
    let u = &s1.x / (&p1.x + Rational::one());
    if !u.is_positive() {
        return Action::null();
    }
    let frame = AgreedFrame { sigma, origin: RPoint::new(u.clone(), u.clone()), u };
    Action::color_and_move(Light::Done, frame.to_local(p0), Rule::LeaderFinish)
}

fn off_step(view: &LocalView, pattern: &Pattern) -> Action {
    let n = pattern.len();
    let mut leaders = view.visible.iter().filter(|(_, l)| *l == Light::Leader);
    let Some((leader_local, _)) = leaders.next() else {
        return Action::null();
    };
    if leaders.next().is_some() {
        return Action::null();
    }
    // robots sharing the leader's vertical line; the nearest one is r_u
    let on_lv = |sigma: i8| {
        let l = orient(sigma, leader_local);
        view.visible
            .iter()
            .filter(|(p, lt)| *lt != Light::Leader && p.x == l.x)
            .map(|(p, _)| orient(sigma, p))
            .filter(|p| p.y > l.y)
            .min_by(|a, b| a.y.cmp(&b.y))
    };
    let sigma: i8 = if leader_local.y.is_negative() {
        1
    } else if leader_local.y.is_positive() {
        -1
    } else {
        let above = view
            .visible
            .iter()
            .filter(|(p, lt)| *lt != Light::Leader && p.x == leader_local.x && !p.y.is_zero())
            .min_by(|a, b| a.0.y.abs().cmp(&b.0.y.abs()));
        match above {
            Some((p, _)) if p.y.is_negative() => -1,
            Some(_) => 1,
            None => return Action::null(),
        }
    };
    let l = orient(sigma, leader_local);
    let oriented: Vec<(RPoint, Light)> = view.visible.iter().map(|(p, lt)| (orient(sigma, p), *lt)).collect();

    if l.x.is_negative() && l.y.is_negative() {
        if oriented.iter().any(|(_, lt)| *lt == Light::Done) {
            return Action::color(Light::Done, Rule::AdoptDone);
        }
        if n == 2 && is_at_second_target(&l, pattern) {
            return Action::color(Light::Done, Rule::AdoptDone);
        }
        let quadrant_below_empty = !oriented
            .iter()
            .any(|(p, _)| p.y.is_negative() && p.y > l.y && p.x > l.x);
        let leftmost_on_row = !oriented
            .iter()
            .any(|(p, _)| p.y.is_zero() && p.x.is_negative() && p.x > l.x);
        if !(quadrant_below_empty && leftmost_on_row) {
            return Action::null();
        }
        return match on_lv(sigma) {
            None if oriented.iter().all(|(p, lt)| *lt == Light::Leader || p.x != l.x) => Action::move_to(
                unorient(sigma, &RPoint::new(l.x.clone(), Rational::zero())),
                Rule::ToLeaderLine,
            ),
            None => Action::null(),
            Some(r_u) => {
                let Some(frame) = AgreedFrame::from_anchors(sigma, &l, &r_u) else {
                    return Action::null();
                };
                let k = oriented.iter().filter(|(p, lt)| *lt == Light::Off && p.y == l.y).count();
                if k + 2 >= n {
                    return Action::null();
                }
                let (psi, _) = psi_targets(pattern);
                let staging = RPoint::new(psi[k + 2].clone(), -Rational::one());
                Action::move_to(frame.to_local(&staging), Rule::ToStaging)
            }
        };
    }

    if l.y.is_zero() && l.x.is_negative() {
        let Some(r_u) = on_lv(sigma) else {
            return Action::null();
        };
        let off_upper_right = oriented
            .iter()
            .any(|(p, lt)| *lt == Light::Off && p.y.is_positive() && p.x > l.x);
        if off_upper_right {
            return Action::null();
        }
        let Some(frame) = AgreedFrame::from_anchors(sigma, &l, &r_u) else {
            return Action::null();
        };
        let me = frame.from_local(&RPoint::origin());
        if me.y != -Rational::one() {
            return Action::null();
        }
        let (psi, _) = psi_targets(pattern);
        let Some(i) = (2..n).find(|&i| psi[i] == me.x) else {
            return Action::null();
        };
        if partial_formation(view, &frame, pattern, i) {
            return Action::color_and_move(Light::Done, frame.to_local(pattern.get(i)), Rule::ToTarget);
        }
        return Action::null();
    }

    if l.x.is_zero() && l.y.is_negative() && n >= 2 {
        let other_off_above = oriented.iter().any(|(p, lt)| *lt == Light::Off && !p.y.is_negative());
        let others_below = oriented.iter().any(|(p, lt)| *lt != Light::Leader && p.y.is_negative());
        if other_off_above || others_below {
            return Action::null();
        }
        let frame = AgreedFrame::from_anchors(sigma, &l, &RPoint::origin()).expect("leader strictly below");
        return Action::move_to(frame.to_local(pattern.get(1)), Rule::UnitToTarget);
    }

    Action::null()
}

/// With two robots the only non-leader stops at P[1]; there are no done
/// robots to signal it, so it recognises the spot from the leader's offset.
fn is_at_second_target(leader: &RPoint, pattern: &Pattern) -> bool {
    let p1 = pattern.get(1);
    let (dx, dy) = (-leader.x.clone(), -leader.y.clone());
    dx * (&p1.y + Rational::one()) == dy * (&p1.x + Rational::one())
}
