use num_traits::{One, Signed, Zero};

use super::{Action, Rule};
use crate::geom::{RPoint, Rational};
use crate::model::{Light, LocalView};

pub fn phase1_step(view: &LocalView) -> Action {
    match view.own_color {
        Light::Off => {
            let nothing_left_or_level = view.visible.iter().all(|(p, _)| p.x.is_positive());
            let all_off = view.visible.iter().all(|(_, l)| *l == Light::Off);
            if nothing_left_or_level && all_off {
                become_leader(view)
            } else if leftmost_terminal(view) {
                Action::color_and_move(Light::Terminal, compute_destination(view), Rule::TerminalMove)
            } else {
                Action::null()
            }
        }
        Light::Terminal => Action::color(Light::Candidate, Rule::TerminalToCandidate),
        Light::Candidate => {
            let candidate_right = view
                .visible
                .iter()
                .any(|(p, l)| *l == Light::Candidate && p.x.is_positive());
            let off_left = view.visible.iter().any(|(p, l)| *l == Light::Off && p.x.is_negative());
            if candidate_right || off_left {
                Action::color(Light::Off, Rule::CandidateReset)
            } else {
                Action::null()
            }
        }
        _ => Action::null(),
    }
}

/// Descend below every visible robot, then light up as leader.
pub fn become_leader(view: &LocalView) -> Action {
    let bottom = view
        .visible
        .iter()
        .map(|(p, _)| p)
        .filter(|p| !p.y.is_positive())
        .min_by(|a, b| a.y.cmp(&b.y).then_with(|| a.x.cmp(&b.x)));
    match bottom {
        None => Action::color(Light::Leader, Rule::BecomeLeaderLight),
        Some(b) => {
            let d = b.y.abs();
            Action::move_to(RPoint::new(Rational::zero(), -(d + Rational::one())), Rule::BecomeLeaderDescend)
        }
    }
}

pub fn leftmost_terminal(view: &LocalView) -> bool {
    let on_line_above = || view.visible.iter().any(|(p, _)| p.x.is_zero() && p.y.is_positive());
    let on_line_below = || view.visible.iter().any(|(p, _)| p.x.is_zero() && p.y.is_negative());
    let left: Vec<&(RPoint, Light)> = view.visible.iter().filter(|(p, _)| p.x.is_negative()).collect();
    match left.as_slice() {
        // a unique leftmost robot waits for the other lights to go off
        [] => on_line_above() != on_line_below(),
        [(q, Light::Candidate)] => {
            if q.y.is_positive() {
                !on_line_below()
            } else if q.y.is_negative() {
                !on_line_above()
            } else {
                // level with the candidate: neither open half-plane excludes it
                false
            }
        }
        _ => false,
    }
}

pub fn compute_destination(view: &LocalView) -> RPoint {
    let d = view
        .visible
        .iter()
        .map(|(p, _)| &p.x)
        .filter(|x| x.is_positive())
        .min()
        .cloned()
        .unwrap_or_else(Rational::one);
    RPoint::new(-d, Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::int;

    fn p(x: i64, y: i64) -> RPoint {
        RPoint::from_ints(x, y)
    }

    fn view(own: Light, vis: &[((i64, i64), Light)]) -> LocalView {
        LocalView::new(vis.iter().map(|&((x, y), l)| (p(x, y), l)).collect(), own, vis.len() + 1)
    }

    #[test]
    fn unique_leftmost_descends_past_lower_robot() {
        let v = view(Light::Off, &[((2, -3), Light::Off), ((1, 4), Light::Off)]);
        assert_eq!(phase1_step(&v), Action::move_to(p(0, -4), Rule::BecomeLeaderDescend));
    }

    #[test]
    fn become_leader_examples() {
        let v = view(Light::Off, &[((1, 1), Light::Off)]);
        assert_eq!(become_leader(&v), Action::color(Light::Leader, Rule::BecomeLeaderLight));
        let v = view(Light::Off, &[((5, -3), Light::Off), ((1, -3), Light::Off), ((2, 0), Light::Off)]);
        assert_eq!(become_leader(&v).destination, Some(p(0, -4)));
        // level robots count as below (closed half-plane)
        let v = view(Light::Off, &[((3, 0), Light::Off)]);
        assert_eq!(become_leader(&v).destination, Some(p(0, -1)));
    }

    /// Repeated descents against a hidden column terminate: each step
    /// strictly lowers the observer below one more robot.
    #[test]
    fn descent_loop_terminates() {
        let column: Vec<RPoint> = vec![p(4, -2), p(8, -4), p(12, -6), p(1, 3)];
        let mut me = p(0, 0);
        let mut steps = 0;
        loop {
            let all: Vec<RPoint> = column.iter().map(|q| q.sub(&me)).collect();
            let idx = crate::model::visible_indices(
                &std::iter::once(RPoint::origin()).chain(all.iter().cloned()).collect::<Vec<_>>(),
                0,
            )
            .unwrap();
            let vis = idx.into_iter().map(|i| (all[i - 1].clone(), Light::Off)).collect();
            let v = LocalView::new(vis, Light::Off, 5);
            let a = become_leader(&v);
            match a.destination {
                None => break,
                Some(d) => {
                    let before = column.iter().filter(|q| q.y <= me.y).count();
                    me = me.add(&d);
                    let after = column.iter().filter(|q| q.y <= me.y).count();
                    assert!(after < before);
                }
            }
            steps += 1;
            assert!(steps < 10);
        }
        assert!(column.iter().all(|q| q.y > me.y));
    }

    #[test]
    fn terminal_becomes_candidate() {
        let v = view(Light::Terminal, &[((0, 1), Light::Off)]);
        assert_eq!(phase1_step(&v), Action::color(Light::Candidate, Rule::TerminalToCandidate));
    }

    #[test]
    fn candidate_resets() {
        let v = view(Light::Candidate, &[((2, 1), Light::Candidate)]);
        assert_eq!(phase1_step(&v), Action::color(Light::Off, Rule::CandidateReset));
        let v = view(Light::Candidate, &[((-2, 1), Light::Off)]);
        assert_eq!(phase1_step(&v).new_color, Some(Light::Off));
        let v = view(Light::Candidate, &[((2, 1), Light::Off), ((-1, 0), Light::Candidate)]);
        assert_eq!(phase1_step(&v), Action::null());
    }

    #[test]
    fn leftmost_terminal_examples() {
        let top = view(Light::Off, &[((0, -1), Light::Off)]);
        assert!(leftmost_terminal(&top));
        let middle = view(Light::Off, &[((0, -1), Light::Off), ((0, 1), Light::Off)]);
        assert!(!leftmost_terminal(&middle));
        let cand_below = view(Light::Off, &[((-1, -2), Light::Candidate), ((0, -1), Light::Off)]);
        assert!(leftmost_terminal(&cand_below));
        let cand_below_blocked = view(Light::Off, &[((-1, -2), Light::Candidate), ((0, 1), Light::Off)]);
        assert!(!leftmost_terminal(&cand_below_blocked));
        let cand_level = view(Light::Off, &[((-1, 0), Light::Candidate)]);
        assert!(!leftmost_terminal(&cand_level));
        let off_left = view(Light::Off, &[((-1, -2), Light::Off)]);
        assert!(!leftmost_terminal(&off_left));
    }

    #[test]
    fn compute_destination_examples() {
        let v = view(Light::Off, &[((0, 1), Light::Off), ((0, 2), Light::Off)]);
        assert_eq!(compute_destination(&v), p(-1, 0));
        let v = view(Light::Off, &[((3, 1), Light::Off), ((5, 2), Light::Off)]);
        assert_eq!(compute_destination(&v), p(-3, 0));
        let v = view(Light::Off, &[((3, 1), Light::Off)]);
        assert_eq!(compute_destination(&v), RPoint::new(int(-3), int(0)));
    }

    #[test]
    fn off_robot_with_leftmost_terminal_lights_and_moves() {
        let v = view(Light::Off, &[((0, 2), Light::Off), ((4, 1), Light::Off)]);
        assert_eq!(
            phase1_step(&v),
            Action::color_and_move(Light::Terminal, p(-4, 0), Rule::TerminalMove)
        );
    }
}
