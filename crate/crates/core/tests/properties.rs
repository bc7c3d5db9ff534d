mod common;

use std::collections::BTreeSet;

use apf_core::algo::decide;
use apf_core::geom::{RPoint, Rational};
use apf_core::model::{LocalFrame, Mode, World};
use apf_core::scenario::Scenario;
use apf_core::sim::{replay, run, SchedulerKind, SchedulerPolicy, Status, Trace};
use proptest::prelude::*;

use common::*;

fn world_strategy(mode: Mode) -> impl Strategy<Value = World> {
    any::<u64>().prop_map(move |s| random_world(&mut rng(s), mode))
}

fn positions(w: &World) -> BTreeSet<RPoint> {
    w.robots.iter().map(|r| r.pos.clone()).collect()
}

/// The same robots listed in another order.
fn permuted(w: &World, rotate: usize) -> World {
    let mut out = w.clone();
    out.robots.rotate_left(rotate % w.robots.len());
    for (i, r) in out.robots.iter_mut().enumerate() {
        r.id = i;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn visibility_is_symmetric(w in world_strategy(Mode::OneAxis)) {
        let t = Rational::default();
        let n = w.robots.len();
        let seen: Vec<BTreeSet<RPoint>> =
            (0..n).map(|i| w.visible_set(i, &t).unwrap().into_iter().map(|(p, _)| p).collect()).collect();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(seen[i].contains(&w.robots[j].pos), seen[j].contains(&w.robots[i].pos));
            }
        }
    }

    #[test]
    fn decisions_ignore_robot_order(w in world_strategy(Mode::OneAxis), rotate in 0usize..10) {
        let p = permuted(&w, rotate);
        let t = Rational::default();
        for (i, r) in w.robots.iter().enumerate() {
            let j = p.robots.iter().position(|q| q.pos == r.pos).unwrap();
            let a = w.take_snapshot(i, &t).unwrap();
            let b = p.take_snapshot(j, &t).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(decide(&a, &w.pattern, w.mode), decide(&b, &p.pattern, p.mode));
        }
    }

    #[test]
    fn fsync_outcome_ignores_robot_order(w in world_strategy(Mode::TwoAxis), rotate in 0usize..10) {
        let policy = SchedulerPolicy::new(SchedulerKind::Fsync, 0);
        let (_, a) = run(w.clone(), policy.clone(), 20_000).unwrap();
        let (_, b) = run(permuted(&w, rotate), policy, 20_000).unwrap();
        prop_assert_eq!(&a.status, &Status::Formed);
        prop_assert_eq!(a.event_count, b.event_count);
        prop_assert_eq!(positions(&a.final_world), positions(&b.final_world));
    }

    #[test]
    fn replay_reproduces_every_scheduler(w in world_strategy(Mode::OneAxis), seed in 0u64..1000) {
        for kind in [SchedulerKind::Fsync, SchedulerKind::Ssync, SchedulerKind::Async] {
            let (trace, outcome) = run(w.clone(), SchedulerPolicy::new(kind, seed), 20_000).unwrap();
            prop_assert_eq!(&outcome.status, &Status::Formed);
            let reparsed = Trace::parse_jsonl(&trace.to_jsonl()).unwrap();
            prop_assert_eq!(&reparsed.to_jsonl(), &trace.to_jsonl());
            let end = replay(&reparsed).unwrap();
            prop_assert_eq!(&end, &outcome.final_world);
        }
    }

    #[test]
    fn schedulers_agree_on_the_formed_shape(w in world_strategy(Mode::OneAxis), seed in 0u64..1000) {
        let finals: Vec<World> = [SchedulerKind::Fsync, SchedulerKind::Async]
            .into_iter()
            .map(|k| run(w.clone(), SchedulerPolicy::new(k, seed), 20_000).unwrap().1.final_world)
            .collect();
        for f in &finals {
            let pts: Vec<RPoint> = f.robots.iter().map(|r| r.pos.clone()).collect();
            prop_assert!(apf_core::geom::match_axis_aligned_similarity(w.pattern.points(), &pts).is_some());
        }
    }

    #[test]
    fn scenario_json_round_trips(w in world_strategy(Mode::OneAxis)) {
        let s = Scenario::from_world(&w);
        let back = Scenario::parse(&s.to_json()).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_world(), w);
    }

    #[test]
    fn local_frames_invert(seed in any::<u64>(), sign in prop::sample::select(vec![1i8, -1])) {
        let mut g = rng(seed);
        let frame = LocalFrame::new(sign, random_unit(&mut g));
        let o = RPoint::new(rq(&mut g, -10, 10), rq(&mut g, -10, 10));
        let p = RPoint::new(rq(&mut g, -10, 10), rq(&mut g, -10, 10));
        prop_assert_eq!(frame.to_global(&o, &frame.to_local(&o, &p)), p);
    }
}
