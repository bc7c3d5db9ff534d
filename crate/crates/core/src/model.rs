//! Robots, lights, local frames and the LOOK snapshot.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{RPoint, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Light {
    Off,
    Terminal,
    Candidate,
    Symmetry,
    Leader,
    Done,
}

impl Light {
    pub const ALL: [Light; 6] = [
        Light::Off,
        Light::Terminal,
        Light::Candidate,
        Light::Symmetry,
        Light::Leader,
        Light::Done,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Light::Off => "off",
            Light::Terminal => "terminal",
            Light::Candidate => "candidate",
            Light::Symmetry => "symmetry",
            Light::Leader => "leader",
            Light::Done => "done",
        }
    }

    /// Colours an algorithm may use in the given mode.
    pub fn allowed_in(self, mode: Mode) -> bool {
        match mode {
            Mode::OneAxis => true,
            Mode::TwoAxis => matches!(self, Light::Off | Light::Leader | Light::Done),
        }
    }
}

impl fmt::Display for Light {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Light {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Light::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown light `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "one-axis")]
    OneAxis,
    #[serde(rename = "two-axis")]
    TwoAxis,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::OneAxis => "one-axis",
            Mode::TwoAxis => "two-axis",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "one-axis" => Ok(Mode::OneAxis),
            "two-axis" => Ok(Mode::TwoAxis),
            _ => Err(format!("unknown mode `{s}` (expected one-axis or two-axis)")),
        }
    }
}

/// A robot's private coordinate system. X direction is always the global
/// one; Y may be flipped and the unit is arbitrary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalFrame {
    y_sign: i8,
    unit: Rational,
}

impl LocalFrame {
    /// Panics unless `y_sign` is ±1 and `unit > 0`.
    pub fn new(y_sign: i8, unit: Rational) -> Self {
        assert!(y_sign == 1 || y_sign == -1, "y_sign must be +1 or -1");
        assert!(unit.is_positive(), "unit must be positive");
        Self { y_sign, unit }
    }

    pub fn standard() -> Self {
        Self::new(1, Rational::one())
    }

    pub fn y_sign(&self) -> i8 {
        self.y_sign
    }

    pub fn unit(&self) -> &Rational {
        &self.unit
    }

    pub fn to_local(&self, origin: &RPoint, p: &RPoint) -> RPoint {
        let dx = (&p.x - &origin.x) / &self.unit;
        let dy = (&p.y - &origin.y) / &self.unit;
        RPoint::new(dx, if self.y_sign < 0 { -dy } else { dy })
    }

    pub fn to_global(&self, origin: &RPoint, q: &RPoint) -> RPoint {
        let y = if self.y_sign < 0 { -q.y.clone() } else { q.y.clone() };
        RPoint::new(&origin.x + &q.x * &self.unit, &origin.y + y * &self.unit)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern is empty")]
    Empty,
    #[error("pattern point {index} {point} has a negative coordinate")]
    Negative { index: usize, point: RPoint },
    #[error("pattern point {index} {point} is not strictly after its predecessor (pattern must be sorted and distinct)")]
    NotSorted { index: usize, point: RPoint },
}

/// Target pattern: distinct, lexicographically sorted, non-negative points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Pattern {
    points: Vec<RPoint>,
}

impl Pattern {
    pub fn new(points: Vec<RPoint>) -> Result<Self, PatternError> {
        if points.is_empty() {
            return Err(PatternError::Empty);
        }
        for (index, p) in points.iter().enumerate() {
            if p.x.is_negative() || p.y.is_negative() {
                return Err(PatternError::Negative { index, point: p.clone() });
            }
            if index > 0 && points[index - 1] >= *p {
                return Err(PatternError::NotSorted { index, point: p.clone() });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[RPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, i: usize) -> &RPoint {
        &self.points[i]
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let points = Vec::<RPoint>::deserialize(d)?;
        Pattern::new(points).map_err(serde::de::Error::custom)
    }
}

/// Where a robot is inside its current LCM cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Activity {
    Idle,
    /// Snapshot taken and action computed; colour not yet applied.
    Computed {
        new_color: Option<Light>,
        destination: Option<RPoint>,
    },
    /// Colour applied; waiting to start the move.
    AwaitingMove { destination: RPoint },
    Moving {
        from: RPoint,
        to: RPoint,
        t_start: Rational,
        t_end: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RobotState {
    pub id: usize,
    /// Position when not moving; the start point while moving.
    pub pos: RPoint,
    pub light: Light,
    pub frame: LocalFrame,
    pub activity: Activity,
}

impl RobotState {
    pub fn new(id: usize, pos: RPoint, frame: LocalFrame) -> Self {
        Self { id, pos, light: Light::Off, frame, activity: Activity::Idle }
    }

    pub fn position_at(&self, t: &Rational) -> RPoint {
        match &self.activity {
            Activity::Moving { from, to, t_start, t_end } => {
                if t <= t_start {
                    from.clone()
                } else if t >= t_end {
                    to.clone()
                } else {
                    from.lerp(to, &((t - t_start) / (t_end - t_start)))
                }
            }
            _ => self.pos.clone(),
        }
    }

    /// Stationary with no pending colour change or move.
    pub fn is_stable(&self) -> bool {
        self.activity == Activity::Idle
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("robots {0} and {1} coincide at {2}")]
pub struct CoincidentRobots(pub usize, pub usize, pub RPoint);

/// The observer's snapshot: visible robots in its own frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalView {
    /// Sorted by position so the view carries no trace of robot identity.
    pub visible: Vec<(RPoint, Light)>,
    pub own_color: Light,
    pub n: usize,
}

impl LocalView {
    pub fn new(mut visible: Vec<(RPoint, Light)>, own_color: Light, n: usize) -> Self {
        visible.sort();
        Self { visible, own_color, n }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub mode: Mode,
    pub pattern: Pattern,
    pub robots: Vec<RobotState>,
}

impl World {
    pub fn positions_at(&self, t: &Rational) -> Vec<RPoint> {
        self.robots.iter().map(|r| r.position_at(t)).collect()
    }

    pub fn is_stable(&self) -> bool {
        self.robots.iter().all(RobotState::is_stable)
    }

    pub fn visible_set(
        &self,
        observer: usize,
        t: &Rational,
    ) -> Result<Vec<(RPoint, Light)>, CoincidentRobots> {
        let positions = self.positions_at(t);
        let idx = visible_indices(&positions, observer)?;
        Ok(idx.into_iter().map(|i| (positions[i].clone(), self.robots[i].light)).collect())
    }

    pub fn take_snapshot(&self, observer: usize, t: &Rational) -> Result<LocalView, CoincidentRobots> {
        let robot = &self.robots[observer];
        let origin = robot.position_at(t);
        let visible = self
            .visible_set(observer, t)?
            .into_iter()
            .map(|(p, l)| (robot.frame.to_local(&origin, &p), l))
            .collect();
        Ok(LocalView::new(visible, robot.light, self.pattern.len()))
    }
}

/// Reduces `v` to the primitive integer direction it points along and the
/// rational factor `s` with `v = s * dir`.
fn primitive_direction(v: &RPoint) -> ((BigInt, BigInt), Rational) {
    let l = v.x.denom().lcm(v.y.denom());
    let a = v.x.numer() * (&l / v.x.denom());
    let b = v.y.numer() * (&l / v.y.denom());
    let g = a.gcd(&b);
    let s = Rational::new(g.clone(), l);
    ((a / &g, b / &g), s)
}

/// Indices of the robots visible from `positions[observer]`: for each ray
/// out of the observer only the nearest robot on it is seen.
pub fn visible_indices(positions: &[RPoint], observer: usize) -> Result<Vec<usize>, CoincidentRobots> {
    let o = &positions[observer];
    let mut nearest: HashMap<(BigInt, BigInt), (Rational, usize)> = HashMap::new();
    for (i, p) in positions.iter().enumerate() {
        if i == observer {
            continue;
        }
        let v = p.sub(o);
        if v.x.is_zero() && v.y.is_zero() {
            return Err(CoincidentRobots(observer.min(i), observer.max(i), p.clone()));
        }
        let (dir, s) = primitive_direction(&v);
        match nearest.get_mut(&dir) {
            Some(entry) if entry.0 <= s => {}
            Some(entry) => *entry = (s, i),
            None => {
                nearest.insert(dir, (s, i));
            }
        }
    }
    let mut out: Vec<usize> = nearest.into_values().map(|(_, i)| i).collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{int, rat, strictly_between};
    use proptest::prelude::*;

    fn p(x: i64, y: i64) -> RPoint {
        RPoint::from_ints(x, y)
    }

    fn world(points: &[RPoint]) -> World {
        let robots = points
            .iter()
            .enumerate()
            .map(|(i, q)| RobotState::new(i, q.clone(), LocalFrame::standard()))
            .collect::<Vec<_>>();
        let pattern = Pattern::new((0..points.len() as i64).map(|i| p(i, 0)).collect()).unwrap();
        World { mode: Mode::OneAxis, pattern, robots }
    }

    fn brute_visible(positions: &[RPoint], o: usize) -> Vec<usize> {
        (0..positions.len())
            .filter(|&j| j != o)
            .filter(|&j| {
                !(0..positions.len())
                    .any(|k| k != o && k != j && strictly_between(&positions[o], &positions[k], &positions[j]))
            })
            .collect()
    }

    #[test]
    fn collinear_blocking() {
        let w = world(&[p(0, 0), p(1, 0), p(2, 0)]);
        let seen: Vec<_> = w.visible_set(0, &int(0)).unwrap().into_iter().map(|(q, _)| q).collect();
        assert_eq!(seen, vec![p(1, 0)]);

        let w = world(&[p(0, 0), p(1, 0), p(2, 0), p(0, 1)]);
        let seen: Vec<_> = w.visible_set(0, &int(0)).unwrap().into_iter().map(|(q, _)| q).collect();
        assert_eq!(seen, vec![p(1, 0), p(0, 1)]);
    }

    #[test]
    fn frame_conversions() {
        let f = LocalFrame::standard();
        assert_eq!(f.to_local(&p(0, 0), &p(3, 4)), p(3, 4));
        let f = LocalFrame::new(-1, int(1));
        assert_eq!(f.to_local(&p(0, 0), &p(0, 1)), p(0, -1));
        let f = LocalFrame::new(1, int(2));
        assert_eq!(f.to_local(&p(1, 1), &p(5, 3)), p(2, 1));
        assert_eq!(f.to_global(&p(1, 1), &p(2, 1)), p(5, 3));
    }

    #[test]
    fn snapshot_of_lone_robot() {
        let w = world(&[p(3, 3)]);
        let v = w.take_snapshot(0, &int(0)).unwrap();
        assert!(v.visible.is_empty());
        assert_eq!(v.n, 1);
        assert_eq!(v.own_color, Light::Off);
    }

    #[test]
    fn flipped_frames_see_mirrored_y() {
        let mut w = world(&[p(0, 0), p(1, 2)]);
        w.robots[1].frame = LocalFrame::new(-1, int(1));
        let a = w.take_snapshot(0, &int(0)).unwrap();
        let b = w.take_snapshot(1, &int(0)).unwrap();
        assert_eq!(a.visible[0].0, p(1, 2));
        assert_eq!(b.visible[0].0, p(-1, 2));
    }

    #[test]
    fn snapshot_sees_mover_at_interpolated_point() {
        let mut w = world(&[p(0, 5), p(0, 0)]);
        w.robots[1].activity = Activity::Moving {
            from: p(0, 0),
            to: p(4, 0),
            t_start: int(0),
            t_end: int(2),
        };
        let v = w.take_snapshot(0, &int(1)).unwrap();
        assert_eq!(v.visible, vec![(p(2, -5), Light::Off)]);
    }

    #[test]
    fn coincident_robots_fault() {
        let w = world(&[p(0, 0), p(0, 0)]);
        assert!(w.visible_set(0, &int(0)).is_err());
    }

    #[test]
    fn pattern_validation() {
        assert_eq!(Pattern::new(vec![]), Err(PatternError::Empty));
        assert!(matches!(Pattern::new(vec![p(0, 0), p(-1, 0)]), Err(PatternError::Negative { .. })));
        assert!(matches!(Pattern::new(vec![p(1, 0), p(0, 0)]), Err(PatternError::NotSorted { .. })));
        assert!(matches!(Pattern::new(vec![p(1, 0), p(1, 0)]), Err(PatternError::NotSorted { .. })));
        assert!(Pattern::new(vec![p(0, 0), p(0, 2), p(3, 1)]).is_ok());
    }

    #[test]
    fn light_names_round_trip() {
        for l in Light::ALL {
            assert_eq!(l.as_str().parse::<Light>().unwrap(), l);
        }
        assert!(Light::Terminal.allowed_in(Mode::OneAxis));
        assert!(!Light::Terminal.allowed_in(Mode::TwoAxis));
    }

    fn arb_points(max: usize) -> impl Strategy<Value = Vec<RPoint>> {
        prop::collection::btree_set((-6i64..=6, -6i64..=6, prop_oneof![Just(1i64), Just(2), Just(3)]), 1..=max)
            .prop_map(|s| {
                let mut seen = std::collections::BTreeSet::new();
                s.into_iter()
                    .map(|(x, y, d)| RPoint::new(rat(x, d), rat(y, d)))
                    .filter(|q| seen.insert(q.clone()))
                    .collect()
            })
    }

    proptest! {
        #[test]
        fn visibility_matches_brute_force(pts in arb_points(12)) {
            for o in 0..pts.len() {
                prop_assert_eq!(visible_indices(&pts, o).unwrap(), brute_visible(&pts, o));
            }
        }

        #[test]
        fn visibility_is_symmetric(pts in arb_points(12)) {
            let vis: Vec<Vec<usize>> = (0..pts.len()).map(|o| visible_indices(&pts, o).unwrap()).collect();
            for a in 0..pts.len() {
                for &b in &vis[a] {
                    prop_assert!(vis[b].contains(&a));
                }
            }
        }

        #[test]
        fn frame_round_trip(ox in -20i64..20, oy in -20i64..20, px in -50i64..50, py in -50i64..50,
                            flip in any::<bool>(), un in 1i64..9, ud in 1i64..9) {
            let f = LocalFrame::new(if flip { -1 } else { 1 }, rat(un, ud));
            let o = RPoint::new(rat(ox, 3), rat(oy, 7));
            let q = RPoint::new(rat(px, 5), rat(py, 2));
            prop_assert_eq!(f.to_global(&o, &f.to_local(&o, &q)), q);
        }

        #[test]
        fn snapshot_is_label_free(pts in arb_points(9), seed in any::<u64>()) {
            let w = world(&pts);
            let mut perm: Vec<usize> = (0..pts.len()).collect();
            let len = perm.len();
            for i in (1..len).rev() {
                perm.swap(i, (seed as usize).wrapping_mul(31).wrapping_add(i * 17) % (i + 1));
            }
            let shuffled: Vec<RPoint> = perm.iter().map(|&i| pts[i].clone()).collect();
            let w2 = world(&shuffled);
            for (new_i, &old_i) in perm.iter().enumerate() {
                let a = w.take_snapshot(old_i, &int(0)).unwrap();
                let b = w2.take_snapshot(new_i, &int(0)).unwrap();
                prop_assert!(a.visible.len() < pts.len());
                prop_assert_eq!(a, b);
            }
        }
    }
}
