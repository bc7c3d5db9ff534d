use num_traits::{Signed, Zero};

use crate::geom::{RPoint, Rational};

/// Linear motion from `from` at `t_start` to `to` at `t_end`; the robot
/// rests at `from` before and at `to` after. A stationary robot has
/// `from == to`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Motion {
    pub from: RPoint,
    pub to: RPoint,
    pub t_start: Rational,
    pub t_end: Rational,
}

impl Motion {
    pub fn stationary(p: RPoint) -> Self {
        Self { from: p.clone(), to: p, t_start: Rational::zero(), t_end: Rational::zero() }
    }

    pub fn position_at(&self, t: &Rational) -> RPoint {
        if *t <= self.t_start || self.t_end <= self.t_start {
            if *t >= self.t_end { self.to.clone() } else { self.from.clone() }
        } else if *t >= self.t_end {
            self.to.clone()
        } else {
            self.from.lerp(&self.to, &((t - &self.t_start) / (&self.t_end - &self.t_start)))
        }
    }
}

/// Smallest `s` in `[0, 1]` with `d0 + s * w = 0`.
fn meeting_fraction(d0: &RPoint, w: &RPoint) -> Option<Rational> {
    if w.is_origin() {
        return d0.is_origin().then(Rational::zero);
    }
    let s = if !w.x.is_zero() { -&d0.x / &w.x } else { -&d0.y / &w.y };
    let hit = d0.add(&w.scale(&s)).is_origin();
    (hit && !s.is_negative() && s <= Rational::from_integer(1.into())).then_some(s)
}

/// Earliest coincidence on `[t0, t1]` when every robot moves linearly from
/// `start[i]` to `end[i]` over that interval. Pairs of robots that are both
/// at rest are skipped: they were checked when they stopped.
pub fn collision_in_interval(
    start: &[RPoint],
    end: &[RPoint],
    t0: &Rational,
    t1: &Rational,
) -> Option<(Rational, (usize, usize))> {
    let moving: Vec<bool> = start.iter().zip(end).map(|(a, b)| a != b).collect();
    let mut best: Option<(Rational, (usize, usize))> = None;
    for i in 0..start.len() {
        for j in (i + 1)..start.len() {
            if !moving[i] && !moving[j] {
                continue;
            }
            let d0 = start[i].sub(&start[j]);
            let w = end[i].sub(&start[i]).sub(&end[j].sub(&start[j]));
            if let Some(s) = meeting_fraction(&d0, &w) {
                let t = t0 + s * (t1 - t0);
                if best.as_ref().is_none_or(|(bt, _)| t < *bt) {
                    best = Some((t, (i, j)));
                }
            }
        }
    }
    best
}

/// Earliest instant at which two of the given motions coincide.
pub fn collision_check(motions: &[Motion]) -> Option<(Rational, (usize, usize))> {
    let mut times: Vec<Rational> = motions.iter().flat_map(|m| [m.t_start.clone(), m.t_end.clone()]).collect();
    times.sort();
    times.dedup();
    if times.is_empty() {
        return None;
    }
    let at = |t: &Rational| motions.iter().map(|m| m.position_at(t)).collect::<Vec<_>>();
    let first = at(&times[0]);
    for i in 0..first.len() {
        for j in (i + 1)..first.len() {
            if first[i] == first[j] {
                return Some((times[0].clone(), (i, j)));
            }
        }
    }
    times
        .windows(2)
        .find_map(|w| collision_in_interval(&at(&w[0]), &at(&w[1]), &w[0], &w[1]))
}
