//! Global-view oracles: configuration classes, solvability and the final
//! pattern check. Robots never call into this module.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algo::psi_targets;
use crate::geom::{horizontal_symmetry_axis, match_axis_aligned_similarity, RPoint, Rational};
use crate::model::{Light, Mode, Pattern, World};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfigClass {
    #[serde(rename = "leader")]
    Leader,
    #[serde(rename = "candidate")]
    Candidate,
    #[serde(rename = "agreement")]
    Agreement,
    #[serde(rename = "L_config")]
    LConfig,
    #[serde(rename = "final_formed")]
    FinalFormed,
    #[serde(rename = "other")]
    Other,
}

impl ConfigClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfigClass::Leader => "leader",
            ConfigClass::Candidate => "candidate",
            ConfigClass::Agreement => "agreement",
            ConfigClass::LConfig => "L_config",
            ConfigClass::FinalFormed => "final_formed",
            ConfigClass::Other => "other",
        }
    }
}

impl fmt::Display for ConfigClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("configuration is not stable: robot {0} has a pending action")]
pub struct Unstable(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solvability {
    Solvable,
    Unsolvable { axis_y: Rational },
}

impl Solvability {
    pub fn is_solvable(&self) -> bool {
        matches!(self, Solvability::Solvable)
    }
}

fn require_stable(world: &World) -> Result<(), Unstable> {
    match world.robots.iter().find(|r| !r.is_stable()) {
        Some(r) => Err(Unstable(r.id)),
        None => Ok(()),
    }
}

/// Vertical orientations a configuration may be read in.
fn orientations(mode: Mode) -> &'static [i8] {
    match mode {
        Mode::OneAxis => &[1, -1],
        Mode::TwoAxis => &[1],
    }
}

fn flip(sigma: i8, p: &RPoint) -> RPoint {
    if sigma < 0 {
        RPoint::new(p.x.clone(), -p.y.clone())
    } else {
        p.clone()
    }
}

struct Snapshot {
    pts: Vec<RPoint>,
    lights: Vec<Light>,
}

impl Snapshot {
    fn of(world: &World) -> Self {
        Self {
            pts: world.robots.iter().map(|r| r.pos.clone()).collect(),
            lights: world.robots.iter().map(|r| r.light).collect(),
        }
    }

    fn only(&self, light: Light) -> Vec<usize> {
        (0..self.pts.len()).filter(|&i| self.lights[i] == light).collect()
    }

    /// Unique leader with every other robot off.
    fn leader_and_off(&self) -> Option<usize> {
        let leaders = self.only(Light::Leader);
        let off = self.only(Light::Off);
        (leaders.len() == 1 && off.len() + 1 == self.pts.len()).then(|| leaders[0])
    }
}

fn is_leader(s: &Snapshot, mode: Mode) -> bool {
    let Some(l) = s.leader_and_off() else { return false };
    orientations(mode).iter().any(|&sg| {
        let lp = flip(sg, &s.pts[l]);
        (0..s.pts.len())
            .filter(|&i| i != l)
            .all(|i| {
                let p = flip(sg, &s.pts[i]);
                p.x > lp.x && p.y > lp.y
            })
    })
}

fn is_candidate(s: &Snapshot) -> bool {
    let c = s.only(Light::Candidate);
    if c.len() != 2 || s.only(Light::Off).len() + 2 != s.pts.len() {
        return false;
    }
    let x = &s.pts[c[0]].x;
    if s.pts[c[1]].x != *x {
        return false;
    }
    (0..s.pts.len()).filter(|i| !c.contains(i)).all(|i| s.pts[i].x > *x)
}

/// Orientation and r_u for the agreement / L-configuration definitions.
fn unit_robot(s: &Snapshot, l: usize, sigma: i8) -> Option<usize> {
    let lp = flip(sigma, &s.pts[l]);
    let on_line: Vec<usize> = (0..s.pts.len()).filter(|&i| i != l && s.pts[i].x == lp.x).collect();
    match on_line.as_slice() {
        [u] if flip(sigma, &s.pts[*u]).y > lp.y => Some(*u),
        _ => None,
    }
}

fn is_agreement(s: &Snapshot, mode: Mode) -> bool {
    let Some(l) = s.leader_and_off() else { return false };
    orientations(mode).iter().any(|&sg| {
        let Some(u) = unit_robot(s, l, sg) else { return false };
        let lp = flip(sg, &s.pts[l]);
        let up = flip(sg, &s.pts[u]);
        (0..s.pts.len()).filter(|&i| i != l && i != u).all(|i| {
            let p = flip(sg, &s.pts[i]);
            p.y > lp.y && p.y >= up.y
        })
    })
}

fn is_l_config(s: &Snapshot, pattern: &Pattern, mode: Mode) -> bool {
    let n = s.pts.len();
    if pattern.len() != n {
        return false;
    }
    let Some(l) = s.leader_and_off() else { return false };
    let (psi, _) = psi_targets(pattern);
    orientations(mode).iter().any(|&sg| {
        let Some(u) = unit_robot(s, l, sg) else { return false };
        let lp = flip(sg, &s.pts[l]);
        let unit = flip(sg, &s.pts[u]).y - &lp.y;
        let expected: BTreeSet<RPoint> = psi[2..]
            .iter()
            .map(|x| RPoint::new(&lp.x + &unit * (x + Rational::one()), lp.y.clone()))
            .collect();
        let actual: BTreeSet<RPoint> = (0..n)
            .filter(|&i| i != l && i != u)
            .map(|i| flip(sg, &s.pts[i]))
            .collect();
        expected == actual
    })
}

/// Classifies a stable world. Checks run in a fixed order so the result
/// is unique: leader, candidate, agreement, L-configuration, final.
pub fn classify(world: &World, pattern: &Pattern, mode: Mode) -> Result<ConfigClass, Unstable> {
    require_stable(world)?;
    let s = Snapshot::of(world);
    let class = if is_leader(&s, mode) {
        ConfigClass::Leader
    } else if is_candidate(&s) {
        ConfigClass::Candidate
    } else if is_agreement(&s, mode) {
        ConfigClass::Agreement
    } else if is_l_config(&s, pattern, mode) {
        ConfigClass::LConfig
    } else if formed(&s, pattern) {
        ConfigClass::FinalFormed
    } else {
        ConfigClass::Other
    };
    Ok(class)
}

/// Initial-configuration test: under one-axis agreement a horizontal
/// mirror axis with no robot on it makes formation impossible.
pub fn check_solvable(world: &World, mode: Mode) -> Solvability {
    let pts: Vec<RPoint> = world.robots.iter().map(|r| r.pos.clone()).collect();
    check_points_solvable(&pts, mode)
}

pub fn check_points_solvable(pts: &[RPoint], mode: Mode) -> Solvability {
    if mode == Mode::TwoAxis {
        return Solvability::Solvable;
    }
    match horizontal_symmetry_axis(pts) {
        Some((axis_y, false)) => Solvability::Unsolvable { axis_y },
        _ => Solvability::Solvable,
    }
}

fn formed(s: &Snapshot, pattern: &Pattern) -> bool {
    s.lights.iter().all(|l| *l == Light::Done) && match_axis_aligned_similarity(&s.pts, pattern.points()).is_some()
}

/// All lights done and positions similar to the pattern.
pub fn pattern_formed(world: &World, pattern: &Pattern) -> Result<bool, Unstable> {
    require_stable(world)?;
    Ok(formed(&Snapshot::of(world), pattern))
}

/// True iff the world has a horizontal mirror axis, every mirror pair
/// shares a light, and no robot lies on the axis.
pub fn mirrored_about(world: &World, axis_y: &Rational) -> bool {
    let twice = axis_y * Rational::from_integer(2.into());
    world.robots.iter().all(|r| {
        if r.pos.y == *axis_y {
            return false;
        }
        let image = RPoint::new(r.pos.x.clone(), &twice - &r.pos.y);
        world.robots.iter().any(|o| o.pos == image && o.light == r.light)
    })
}
