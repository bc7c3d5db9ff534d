use num_traits::{One, Signed, Zero};

use super::{Action, LambdaString, Rule};
use crate::geom::{int, RPoint, Rational};
use crate::model::{Light, LocalView};

/// Per-cycle frame with +Y pointing at the partner on the caller's
/// vertical line. Only the y sign changes; the unit stays the local one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalFrame {
    flip: bool,
    /// Partner position, logical coordinates (x = 0, y > 0).
    pub partner: RPoint,
    pub partner_light: Light,
    /// Abscissa of L', the leftmost line holding a robot strictly right.
    pub x_prime: Rational,
    /// Ordinate of K, the horizontal line through the mean of L'.
    pub k: Rational,
    /// Everything visible except the partner, logical coordinates.
    pub others: Vec<(RPoint, Light)>,
}

impl LogicalFrame {
    /// `None` unless exactly one candidate or symmetry robot shares the
    /// caller's vertical line and some robot lies strictly right.
    pub fn build(view: &LocalView) -> Option<Self> {
        let mut partners = view
            .visible
            .iter()
            .filter(|(p, l)| p.x.is_zero() && matches!(l, Light::Candidate | Light::Symmetry));
        let partner = partners.next()?;
        if partners.next().is_some() {
            return None;
        }
        let flip = partner.0.y.is_negative();
        let map = |p: &RPoint| RPoint::new(p.x.clone(), if flip { -p.y.clone() } else { p.y.clone() });
        let x_prime = view.visible.iter().map(|(p, _)| &p.x).filter(|x| x.is_positive()).min()?.clone();
        let on_line: Vec<&Rational> =
            view.visible.iter().filter(|(p, _)| p.x == x_prime).map(|(p, _)| &p.y).collect();
        let sum: Rational = on_line.iter().copied().sum();
        let mut k = sum / int(on_line.len() as i64);
        if flip {
            k = -k;
        }
        let others = view
            .visible
            .iter()
            .filter(|q| !std::ptr::eq(*q, partner))
            .map(|(p, l)| (map(p), *l))
            .collect();
        Some(Self { flip, partner: map(&partner.0), partner_light: partner.1, x_prime, k, others })
    }

    pub fn to_local(&self, p: &RPoint) -> RPoint {
        RPoint::new(p.x.clone(), if self.flip { -p.y.clone() } else { p.y.clone() })
    }

    pub fn d_self(&self) -> Rational {
        self.k.abs()
    }

    pub fn d_partner(&self) -> Rational {
        (&self.partner.y - &self.k).abs()
    }
}

/// (λ(self), λ(partner), λ'(self), λ'(partner)). Coordinates are measured
/// from the point K ∩ L', with +Y pointing into each half-plane and
/// d_LL' as the unit. Robots on K belong to neither string.
pub fn lambda_strings(frame: &LogicalFrame) -> (LambdaString, LambdaString, LambdaString, LambdaString) {
    let d = &frame.x_prime;
    let mut mine = Vec::new();
    let mut theirs = Vec::new();
    for (p, _) in &frame.others {
        let x = (&p.x - d) / d;
        if p.y < frame.k {
            mine.push(RPoint::new(x, (&frame.k - &p.y) / d));
        } else if p.y > frame.k {
            theirs.push(RPoint::new(x, (&p.y - &frame.k) / d));
        }
    }
    let a = LambdaString::new(mine);
    let b = LambdaString::new(theirs);
    let (a1, b1) = (a.on_axis(), b.on_axis());
    (a, b, a1, b1)
}

/// Leftward step that keeps the caller strictly on its side of the line
/// through the partner and the topmost robot of L' beyond the partner.
pub fn compute_destination2(frame: &LogicalFrame) -> RPoint {
    let yp = &frame.partner.y;
    let top = frame
        .others
        .iter()
        .map(|(p, _)| p)
        .filter(|p| p.x == frame.x_prime && p.y > *yp)
        .map(|p| &p.y)
        .max();
    let x = match top {
        None => -Rational::one(),
        Some(ytop) => -(&frame.x_prime * yp) / (int(2) * (ytop - yp)),
    };
    RPoint::new(x, Rational::zero())
}

pub fn phase2_step(view: &LocalView) -> Action {
    match view.own_color {
        Light::Candidate => candidate_step(view),
        Light::Symmetry => {
            if view.visible.iter().any(|(p, l)| *l == Light::Off && p.x.is_negative()) {
                Action::color(Light::Off, Rule::SymmetryReset)
            } else {
                Action::null()
            }
        }
        Light::Off => off_step(view),
        _ => Action::null(),
    }
}

fn candidate_step(view: &LocalView) -> Action {
    let Some(f) = LogicalFrame::build(view) else {
        return Action::null();
    };
    let retreat = |rule| Action::move_to(f.to_local(&compute_destination2(&f)), rule);
    let vertical = |dy: Rational, rule| Action::move_to(f.to_local(&RPoint::new(Rational::zero(), dy)), rule);
    let (d_r, d_p) = (f.d_self(), f.d_partner());

    if f.partner_light == Light::Symmetry {
        return if d_r < d_p {
            vertical(-(d_p - d_r), Rule::SymmetryApproach)
        } else if d_r == d_p {
            Action::color(Light::Symmetry, Rule::SymmetryAdopt)
        } else {
            Action::null()
        };
    }

    let separated = f.k.is_positive() && f.k < f.partner.y;
    if !separated {
        return if d_r > d_p { retreat(Rule::SameSideRetreat) } else { Action::null() };
    }

    let (lam, lam_p, lam1, lam1_p) = lambda_strings(&f);
    if lam1 < lam1_p {
        return retreat(Rule::LambdaPrimeRetreat);
    }
    if lam1 > lam1_p || d_r < d_p {
        return Action::null();
    }
    let below = f.others.iter().any(|(p, _)| p.y.is_negative());
    let sees_all = view.visible.len() + 1 == view.n;
    if sees_all && !below {
        if lam < lam_p {
            retreat(Rule::LambdaRetreat)
        } else if lam > lam_p {
            Action::move_to(RPoint::new(&f.x_prime / int(2), Rational::zero()), Rule::LambdaYield)
        } else if f.others.iter().all(|(p, _)| p.y != f.k) {
            retreat(Rule::SymmetricRetreat)
        } else {
            Action::color(Light::Symmetry, Rule::SymmetryAdopt)
        }
    } else {
        let rule = if below { Rule::ClimbBelow } else { Rule::ClimbBlocked };
        vertical(-d_r, rule)
    }
}

fn off_step(view: &LocalView) -> Action {
    let mut sym: Vec<&RPoint> = view
        .visible
        .iter()
        .filter(|(p, l)| *l == Light::Symmetry && p.x.is_negative())
        .map(|(p, _)| p)
        .collect();
    sym.sort();
    for pair in sym.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.x != b.x {
            continue;
        }
        let on_axis = (&a.y + &b.y).is_zero();
        let leftmost_on_axis = !view.visible.iter().any(|(p, _)| p.y.is_zero() && p.x.is_negative());
        if on_axis && leftmost_on_axis {
            return Action::move_to(RPoint::new(&a.x - Rational::one(), Rational::zero()), Rule::AxisLeave);
        }
    }
    Action::null()
}
