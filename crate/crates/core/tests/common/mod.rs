#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use apf_core::geom::{int, rat, RPoint, Rational};
use apf_core::model::{LocalFrame, Mode, Pattern, RobotState, World};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// Rational in `[lo, hi]` with denominator up to 4.
pub fn rq(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    let d = rng.gen_range(1..=4);
    rat(rng.gen_range(lo * d..=hi * d), d)
}

/// Distinct points; about a third share a handful of integer abscissae so
/// vertical lines with several robots are common.
pub fn random_points(rng: &mut ChaCha8Rng, n: usize, span: i64) -> Vec<RPoint> {
    let mut pts = BTreeSet::new();
    while pts.len() < n {
        let x = if rng.gen_bool(0.3) { int(rng.gen_range(-3..=3)) } else { rq(rng, -span, span) };
        pts.insert(RPoint::new(x, rq(rng, -span, span)));
    }
    pts.into_iter().collect()
}

pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize) -> Pattern {
    let mut pat = BTreeSet::new();
    while pat.len() < n {
        let x = if rng.gen_bool(0.4) { int(rng.gen_range(0..=3)) } else { rq(rng, 0, 10) };
        pat.insert(RPoint::new(x, rq(rng, 0, 10)));
    }
    Pattern::new(pat.into_iter().collect()).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(1..=5), rng.gen_range(1..=3))
}

/// Robots at `pts` with random units and, in one-axis mode, random y signs.
pub fn world_from(rng: &mut ChaCha8Rng, mode: Mode, pts: Vec<RPoint>, pattern: Pattern) -> World {
    let robots = pts
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let s = if mode == Mode::OneAxis && rng.gen_bool(0.5) { -1 } else { 1 };
            RobotState::new(i, p, LocalFrame::new(s, random_unit(rng)))
        })
        .collect();
    World { mode, pattern, robots }
}

/// Brute-force mirror test: some horizontal line reflects the set onto
/// itself and carries none of its points.
pub fn mirror_oracle(pts: &[RPoint]) -> Option<Rational> {
    let two = int(2);
    for a in pts {
        for b in pts {
            let axis = (&a.y + &b.y) / &two;
            let reflects = pts.iter().all(|p| {
                let image = RPoint::new(p.x.clone(), &axis * &two - &p.y);
                pts.contains(&image)
            });
            if reflects && pts.iter().all(|p| p.y != axis) {
                return Some(axis);
            }
        }
    }
    None
}

/// A random scenario for end-to-end runs. One-axis inputs with a robot-free
/// mirror axis are redrawn.
pub fn random_world(rng: &mut ChaCha8Rng, mode: Mode) -> World {
    loop {
        let n = rng.gen_range(2..=10);
        let pts = random_points(rng, n, 10);
        if mode == Mode::OneAxis && mirror_oracle(&pts).is_some() {
            continue;
        }
        let pattern = random_pattern(rng, n);
        return world_from(rng, mode, pts, pattern);
    }
}

/// Robots paired across a horizontal axis with opposite y signs and equal
/// units, nobody on the axis.
pub fn mirrored_world(rng: &mut ChaCha8Rng) -> (World, Rational) {
    let pairs = rng.gen_range(1..=5);
    let axis = rq(rng, -3, 3);
    let mut tops = BTreeSet::new();
    while tops.len() < pairs {
        tops.insert(RPoint::new(rq(rng, -6, 6), &axis + rq(rng, 1, 6)));
    }
    let pattern = random_pattern(rng, 2 * pairs);
    let mut robots = Vec::new();
    for top in tops {
        let unit = random_unit(rng);
        let s: i8 = if rng.gen_bool(0.5) { 1 } else { -1 };
        let bottom = RPoint::new(top.x.clone(), &axis * int(2) - &top.y);
        robots.push(RobotState::new(robots.len(), top, LocalFrame::new(s, unit.clone())));
        robots.push(RobotState::new(robots.len(), bottom, LocalFrame::new(-s, unit)));
    }
    (World { mode: Mode::OneAxis, pattern, robots }, axis)
}

/// All robots on one vertical line.
pub fn vertical_world(rng: &mut ChaCha8Rng, equal_units: bool) -> World {
    loop {
        let n = rng.gen_range(2..=8);
        let x = rq(rng, -5, 5);
        let mut ys = BTreeSet::new();
        while ys.len() < n {
            ys.insert(rq(rng, -10, 10));
        }
        let pts: Vec<RPoint> = ys.into_iter().map(|y| RPoint::new(x.clone(), y)).collect();
        if mirror_oracle(&pts).is_some() {
            continue;
        }
        let pattern = random_pattern(rng, n);
        let mut w = world_from(rng, Mode::OneAxis, pts, pattern);
        if equal_units {
            let u = random_unit(rng);
            for r in &mut w.robots {
                r.frame = LocalFrame::new(r.frame.y_sign(), u.clone());
            }
        } else {
            let (lo, hi) = (0, w.robots.len() - 1);
            if w.robots[lo].frame.unit() == w.robots[hi].frame.unit() {
                let u = w.robots[hi].frame.unit() + int(1);
                w.robots[hi].frame = LocalFrame::new(w.robots[hi].frame.y_sign(), u);
            }
        }
        return w;
    }
}

/// Scenarios whose leftmost vertical line holds two or more robots but
/// not all of them.
pub fn shared_leftmost_world(rng: &mut ChaCha8Rng) -> World {
    loop {
        let n = rng.gen_range(3..=9);
        let k = rng.gen_range(2..n);
        let mut pts = BTreeSet::new();
        while pts.len() < k {
            pts.insert(RPoint::new(int(-8), rq(rng, -10, 10)));
        }
        while pts.len() < n {
            pts.insert(RPoint::new(rq(rng, -7, 10), rq(rng, -10, 10)));
        }
        let pts: Vec<RPoint> = pts.into_iter().collect();
        if mirror_oracle(&pts).is_some() {
            continue;
        }
        let pattern = random_pattern(rng, n);
        return world_from(rng, Mode::OneAxis, pts, pattern);
    }
}

/// Mirror pairs about a horizontal line plus robots off the pairing; with
/// `near` only the leftmost pair is mirrored. Inputs with a robot-free
/// axis are redrawn.
pub fn symmetric_world(rng: &mut ChaCha8Rng, near: bool) -> World {
    loop {
        let n = rng.gen_range(3..=10);
        let c = rq(rng, -3, 3);
        let mut pts = BTreeSet::new();
        if near {
            let dy = rq(rng, 1, 6);
            pts.insert(RPoint::new(int(-5), &c + &dy));
            pts.insert(RPoint::new(int(-5), &c - &dy));
            while pts.len() < n {
                pts.insert(RPoint::new(int(rng.gen_range(-4..=3)), rq(rng, -8, 8)));
            }
        } else {
            while pts.len() + 1 < n {
                let x = int(rng.gen_range(-3..=3));
                let dy = rq(rng, 1, 6);
                pts.insert(RPoint::new(x.clone(), &c + &dy));
                pts.insert(RPoint::new(x, &c - dy));
            }
            while pts.len() < n {
                let y = if rng.gen_bool(0.5) { c.clone() } else { rq(rng, -8, 8) };
                pts.insert(RPoint::new(rq(rng, -3, 5), y));
            }
        }
        let mut pts: Vec<RPoint> = pts.into_iter().collect();
        pts.truncate(n);
        if mirror_oracle(&pts).is_some() {
            continue;
        }
        let pattern = random_pattern(rng, pts.len());
        return world_from(rng, Mode::OneAxis, pts, pattern);
    }
}
