//! Decision functions: a [`LocalView`] in, an [`Action`] out.
//!
//! Nothing here sees global state. Every function is a pure function of the
//! snapshot, the pattern and the agreement mode.

mod phase1;
mod phase2;
mod stage2;
mod two_axis;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::geom::{int, RPoint, Rational};
use crate::model::{Light, LocalView, Mode, Pattern};

pub use phase1::{become_leader, compute_destination, leftmost_terminal, phase1_step};
pub use phase2::{compute_destination2, lambda_strings, phase2_step, LogicalFrame};
pub use stage2::{partial_formation, stage2_step, AgreedFrame};
pub use two_axis::two_axis_step;

/// Which rule produced an action. Diagnostic only: robots never read it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Null,
    BecomeLeaderDescend,
    BecomeLeaderLight,
    TerminalMove,
    TerminalToCandidate,
    CandidateReset,
    SymmetryApproach,
    SymmetryAdopt,
    SameSideRetreat,
    LambdaPrimeRetreat,
    LambdaRetreat,
    LambdaYield,
    SymmetricRetreat,
    /// Doubling climb while every robot below is absent but some robot is hidden.
    ClimbBlocked,
    /// Doubling climb while some robot lies below in the logical frame.
    ClimbBelow,
    SymmetryReset,
    AxisLeave,
    AdoptDone,
    ToLeaderLine,
    ToStaging,
    ToTarget,
    UnitToTarget,
    LeaderFinish,
    ShiftLeft,
}

/// Result of COMPUTE. Colour is applied before the move starts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub new_color: Option<Light>,
    /// Destination in the robot's local frame.
    pub destination: Option<RPoint>,
    pub rule: Rule,
}

impl Action {
    pub fn null() -> Self {
        Self { new_color: None, destination: None, rule: Rule::Null }
    }

    pub fn color(c: Light, rule: Rule) -> Self {
        Self { new_color: Some(c), destination: None, rule }
    }

    pub fn move_to(p: RPoint, rule: Rule) -> Self {
        Self { new_color: None, destination: Some(p), rule }
    }

    pub fn color_and_move(c: Light, p: RPoint, rule: Rule) -> Self {
        Self { new_color: Some(c), destination: Some(p), rule }
    }

    /// Neither a colour change nor a real move (staying put counts as no move).
    pub fn is_null_for(&self, own: Light) -> bool {
        self.new_color.is_none_or(|c| c == own)
            && self.destination.as_ref().is_none_or(RPoint::is_origin)
    }
}

/// One term of a λ string; `None` is the padding symbol Φ.
type Term = Option<RPoint>;

/// Lexicographically sorted positions, compared with Φ padding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LambdaString {
    terms: Vec<RPoint>,
}

impl LambdaString {
    pub fn new(mut terms: Vec<RPoint>) -> Self {
        terms.sort();
        Self { terms }
    }

    pub fn terms(&self) -> &[RPoint] {
        &self.terms
    }

    /// Terms on the y axis of the half-plane frame (robots on the line L').
    pub fn on_axis(&self) -> LambdaString {
        LambdaString { terms: self.terms.iter().filter(|p| p.x.is_zero()).cloned().collect() }
    }

    fn padded(&self, len: usize) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().cloned().map(Some).chain(std::iter::repeat(None)).take(len)
    }
}

fn cmp_term(a: &Term, b: &Term) -> Ordering {
    match (a, b) {
        (Some(p), Some(q)) => p.cmp(q),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

impl Ord for LambdaString {
    fn cmp(&self, other: &Self) -> Ordering {
        let len = self.terms.len().max(other.terms.len());
        self.padded(len)
            .zip(other.padded(len))
            .map(|(a, b)| cmp_term(&a, &b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for LambdaString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Staging abscissae Ψ(0..n) and the gap ε they were derived from.
pub fn psi_targets(pattern: &Pattern) -> (Vec<Rational>, Rational) {
    let pts = pattern.points();
    let mut lines: BTreeMap<&Rational, usize> = BTreeMap::new();
    for p in pts {
        *lines.entry(&p.x).or_default() += 1;
    }
    let xs: Vec<&Rational> = lines.keys().copied().collect();
    let eps = xs
        .windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .unwrap_or_else(Rational::one);
    let mut psi = Vec::with_capacity(pts.len());
    let mut rank = 0usize;
    for (i, p) in pts.iter().enumerate() {
        rank = if i > 0 && pts[i - 1].x == p.x { rank + 1 } else { 1 };
        let m = lines[&p.x];
        let offset = if m == 1 {
            Rational::zero()
        } else {
            int(rank as i64 - 1) / int(2 * (m as i64 - 1)) * &eps
        };
        psi.push(&p.x + offset);
    }
    (psi, eps)
}

/// Top-level decision for either agreement mode.
pub fn decide(view: &LocalView, pattern: &Pattern, mode: Mode) -> Action {
    match mode {
        Mode::OneAxis => dispatch(view, pattern),
        Mode::TwoAxis => two_axis_step(view, pattern),
    }
}

/// Stage and phase selection under one-axis agreement.
pub fn dispatch(view: &LocalView, pattern: &Pattern) -> Action {
    let lights = || view.visible.iter().map(|(_, l)| *l).chain(std::iter::once(view.own_color));
    if lights().any(|l| l == Light::Leader) {
        return stage2_step(view, pattern);
    }
    if lights().any(|l| l == Light::Symmetry) || candidates_share_line(view) {
        return phase2_step(view);
    }
    phase1_step(view)
}

fn candidates_share_line(view: &LocalView) -> bool {
    let mut xs: Vec<&Rational> = view
        .visible
        .iter()
        .filter(|(_, l)| *l == Light::Candidate)
        .map(|(p, _)| &p.x)
        .collect();
    let zero = Rational::zero();
    if view.own_color == Light::Candidate {
        xs.push(&zero);
    }
    xs.sort();
    xs.windows(2).any(|w| w[0] == w[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rat;

    fn p(x: i64, y: i64) -> RPoint {
        RPoint::from_ints(x, y)
    }

    fn pattern(pts: &[(i64, i64)]) -> Pattern {
        Pattern::new(pts.iter().map(|&(x, y)| p(x, y)).collect()).unwrap()
    }

    #[test]
    fn psi_examples() {
        let (psi, eps) = psi_targets(&pattern(&[(0, 0), (0, 2), (3, 1)]));
        assert_eq!(eps, int(3));
        assert_eq!(psi, vec![int(0), rat(3, 2), int(3)]);

        let (psi, eps) = psi_targets(&pattern(&[(0, 0), (0, 1), (0, 2)]));
        assert_eq!(eps, int(1));
        assert_eq!(psi, vec![int(0), rat(1, 4), rat(1, 2)]);

        let (psi, _) = psi_targets(&pattern(&[(0, 3), (2, 0), (5, 1)]));
        assert_eq!(psi, vec![int(0), int(2), int(5)]);
    }

    #[test]
    fn lambda_padding_and_order() {
        let q = |x: Rational, y: Rational| RPoint::new(x, y);
        let r1 = LambdaString::new(vec![
            q(int(0), int(1)),
            q(int(0), int(2)),
            q(int(1), rat(5, 2)),
            q(rat(5, 2), rat(5, 4)),
            q(rat(9, 2), rat(9, 2)),
        ]);
        let r2 = LambdaString::new(vec![
            q(int(0), int(1)),
            q(int(0), int(2)),
            q(int(1), rat(5, 2)),
            q(rat(5, 2), int(4)),
            q(int(4), rat(1, 2)),
            q(rat(9, 2), int(2)),
            q(int(6), int(1)),
            q(int(7), int(4)),
        ]);
        assert!(r1 < r2);
        assert_eq!(r1.on_axis(), r2.on_axis());
        assert_eq!(r1.on_axis().terms(), &[p(0, 1), p(0, 2)]);

        // a proper prefix is padded with Φ, which sorts after every point
        let short = LambdaString::new(vec![p(0, 1)]);
        let long = LambdaString::new(vec![p(0, 1), p(9, 9)]);
        assert!(long < short);
        assert_eq!(LambdaString::new(vec![]).cmp(&LambdaString::new(vec![])), Ordering::Equal);
    }

    #[test]
    fn dispatch_routes() {
        let pat = pattern(&[(0, 0), (1, 0), (2, 0)]);
        // a leader anywhere sends the robot to stage 2; the off robot with
        // the leader below-left and nobody on the leader's line walks onto it
        let v = LocalView::new(vec![(p(-2, -1), Light::Leader), (p(3, 3), Light::Off)], Light::Off, 3);
        let a = dispatch(&v, &pat);
        assert_eq!(a.rule, Rule::ToLeaderLine);

        // two candidates on one line (self and partner) route to phase 2
        let v = LocalView::new(
            vec![(p(0, 2), Light::Candidate), (p(3, 0), Light::Off)],
            Light::Candidate,
            3,
        );
        assert_eq!(dispatch(&v, &pat).rule, phase2_step(&v).rule);
        assert!(candidates_share_line(&v));

        let v = LocalView::new(vec![(p(1, 0), Light::Off), (p(2, 5), Light::Off)], Light::Off, 3);
        assert_eq!(dispatch(&v, &pat), phase1_step(&v));
        assert!(!candidates_share_line(&v));
    }

    #[test]
    fn null_detection() {
        assert!(Action::null().is_null_for(Light::Off));
        assert!(Action::color(Light::Off, Rule::CandidateReset).is_null_for(Light::Off));
        assert!(Action::move_to(p(0, 0), Rule::ShiftLeft).is_null_for(Light::Off));
        assert!(!Action::move_to(p(0, 1), Rule::ShiftLeft).is_null_for(Light::Off));
    }
}
