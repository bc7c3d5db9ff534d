//! Exact rational plane geometry.
//!
//! Everything here works on [`Rational`] coordinates so that collinearity,
//! obstruction and symmetry tests are decided exactly. Floating point never
//! enters the simulation path.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// `n / d` as a [`Rational`]. Panics when `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as a [`Rational`].
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("`{0}` is not an exact rational (expected `p` or `p/q` with integer p, q)")]
    Malformed(String),
    #[error("`{0}` has a zero denominator")]
    ZeroDenominator(String),
}

fn parse_integer(s: &str, whole: &str) -> Result<BigInt, ParseRationalError> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError::Malformed(whole.to_string()));
    }
    BigInt::from_str(s).map_err(|_| ParseRationalError::Malformed(whole.to_string()))
}

/// Parses `"p"` or `"p/q"`. Decimal and exponent notation are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_integer(s, s)?)),
        Some((p, q)) => {
            let num = parse_integer(p, s)?;
            let den = parse_integer(q, s)?;
            if den.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            Ok(Rational::new(num, den))
        }
    }
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Fixed-point decimal expansion with `digits` fractional digits
/// (truncated toward zero). Used for rendering only.
pub fn to_decimal(r: &Rational, digits: usize) -> String {
    let neg = r.is_negative();
    let abs = r.abs();
    let (int_part, mut rem) = abs.numer().div_rem(abs.denom());
    let mut out = String::new();
    if neg && !(int_part.is_zero() && rem.is_zero()) {
        out.push('-');
    }
    out.push_str(&int_part.to_string());
    if digits > 0 {
        out.push('.');
        let ten = BigInt::from(10);
        for _ in 0..digits {
            rem *= &ten;
            let (d, r2) = rem.div_rem(abs.denom());
            out.push_str(&d.to_string());
            rem = r2;
        }
    }
    out
}

/// Serde adapter: rationals travel as `"p/q"` strings, never as JSON numbers.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// A point with exact rational coordinates.
///
/// The derived ordering is lexicographic: `x` first, then `y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RPoint {
    pub x: Rational,
    pub y: Rational,
}

impl RPoint {
    pub fn new(x: Rational, y: Rational) -> Self {
        Self { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(int(x), int(y))
    }

    pub fn origin() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }

    pub fn add(&self, other: &RPoint) -> RPoint {
        RPoint::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn sub(&self, other: &RPoint) -> RPoint {
        RPoint::new(&self.x - &other.x, &self.y - &other.y)
    }

    pub fn scale(&self, k: &Rational) -> RPoint {
        RPoint::new(&self.x * k, &self.y * k)
    }

    pub fn is_origin(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// `self + (other - self) * f`
    pub fn lerp(&self, other: &RPoint, f: &Rational) -> RPoint {
        self.add(&other.sub(self).scale(f))
    }
}

impl fmt::Display for RPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_rational(&self.x), format_rational(&self.y))
    }
}

impl Serialize for RPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [format_rational(&self.x), format_rational(&self.y)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for RPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[String; 2]>::deserialize(d)?;
        let x = parse_rational(&x).map_err(serde::de::Error::custom)?;
        let y = parse_rational(&y).map_err(serde::de::Error::custom)?;
        Ok(RPoint::new(x, y))
    }
}

fn cross(o: &RPoint, a: &RPoint, b: &RPoint) -> Rational {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

fn dot(o: &RPoint, a: &RPoint, b: &RPoint) -> Rational {
    (&a.x - &o.x) * (&b.x - &o.x) + (&a.y - &o.y) * (&b.y - &o.y)
}

/// True iff `b` lies on the open segment `(a, c)`.
pub fn strictly_between(a: &RPoint, b: &RPoint, c: &RPoint) -> bool {
    if a == c || b == a || b == c {
        return false;
    }
    cross(a, b, c).is_zero() && dot(a, b, c).is_positive() && dot(c, b, a).is_positive()
}

/// Lexicographic comparison, `x` then `y`.
pub fn lex_compare(p: &RPoint, q: &RPoint) -> Ordering {
    p.cmp(q)
}

/// The horizontal line `y = axis_y` about which `points` are mirror
/// symmetric, if any, plus whether some point lies on it.
///
/// For a non-empty set the only possible axis is halfway between the
/// extreme `y` values.
pub fn horizontal_symmetry_axis(points: &[RPoint]) -> Option<(Rational, bool)> {
    let min_y = points.iter().map(|p| &p.y).min()?;
    let max_y = points.iter().map(|p| &p.y).max()?;
    let axis = (min_y + max_y) / int(2);
    let set: BTreeSet<&RPoint> = points.iter().collect();
    let twice = &axis * int(2);
    let symmetric = points
        .iter()
        .all(|p| set.contains(&RPoint::new(p.x.clone(), &twice - &p.y)));
    if !symmetric {
        return None;
    }
    let on_axis = points.iter().any(|p| p.y == axis);
    Some((axis, on_axis))
}

/// The eight isometries of the plane that map the coordinate axes onto
/// themselves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Isometry {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    /// `(x, y) -> (x, -y)`
    FlipY,
    /// `(x, y) -> (-x, y)`
    FlipX,
    /// `(x, y) -> (y, x)`
    SwapXY,
    /// `(x, y) -> (-y, -x)`
    SwapNegXY,
}

impl Isometry {
    pub const ALL: [Isometry; 8] = [
        Isometry::Identity,
        Isometry::Rot90,
        Isometry::Rot180,
        Isometry::Rot270,
        Isometry::FlipY,
        Isometry::FlipX,
        Isometry::SwapXY,
        Isometry::SwapNegXY,
    ];

    pub fn apply(self, p: &RPoint) -> RPoint {
        let (x, y) = (p.x.clone(), p.y.clone());
        match self {
            Isometry::Identity => RPoint::new(x, y),
            Isometry::Rot90 => RPoint::new(-y, x),
            Isometry::Rot180 => RPoint::new(-x, -y),
            Isometry::Rot270 => RPoint::new(y, -x),
            Isometry::FlipY => RPoint::new(x, -y),
            Isometry::FlipX => RPoint::new(-x, y),
            Isometry::SwapXY => RPoint::new(y, x),
            Isometry::SwapNegXY => RPoint::new(-y, -x),
        }
    }

    pub fn inverse(self) -> Isometry {
        match self {
            Isometry::Rot90 => Isometry::Rot270,
            Isometry::Rot270 => Isometry::Rot90,
            other => other,
        }
    }
}

/// `p -> scale * isometry(p) + translation` with `scale > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisAlignedSimilarity {
    pub isometry: Isometry,
    pub scale: Rational,
    pub translation: RPoint,
}

impl AxisAlignedSimilarity {
    pub fn identity() -> Self {
        Self {
            isometry: Isometry::Identity,
            scale: Rational::one(),
            translation: RPoint::origin(),
        }
    }

    /// Panics if `scale` is not positive.
    pub fn new(isometry: Isometry, scale: Rational, translation: RPoint) -> Self {
        assert!(scale.is_positive(), "similarity scale must be positive");
        Self { isometry, scale, translation }
    }

    pub fn apply(&self, p: &RPoint) -> RPoint {
        self.isometry.apply(p).scale(&self.scale).add(&self.translation)
    }

    pub fn invert(&self, p: &RPoint) -> RPoint {
        let q = p.sub(&self.translation).scale(&(Rational::one() / &self.scale));
        self.isometry.inverse().apply(&q)
    }

    pub fn inverse(&self) -> AxisAlignedSimilarity {
        let inv_iso = self.isometry.inverse();
        let inv_scale = Rational::one() / &self.scale;
        let translation = inv_iso.apply(&self.translation).scale(&-inv_scale.clone());
        AxisAlignedSimilarity::new(inv_iso, inv_scale, translation)
    }
}

/// Finds a similarity from the restricted group with `T(a) = b` as sets.
///
/// Positive scaling and translation preserve lexicographic order, so for
/// each isometry the lexicographic extremes of the image must land on the
/// extremes of `b`. That pins down scale and translation; the candidate
/// is then checked point by point.
pub fn match_axis_aligned_similarity(a: &[RPoint], b: &[RPoint]) -> Option<AxisAlignedSimilarity> {
    if a.len() != b.len() || a.is_empty() {
        return None;
    }
    let target: BTreeSet<&RPoint> = b.iter().collect();
    if target.len() != b.len() {
        return None;
    }
    let b_min = b.iter().min()?;
    let b_max = b.iter().max()?;
    for iso in Isometry::ALL {
        let image: Vec<RPoint> = a.iter().map(|p| iso.apply(p)).collect();
        let i_min = image.iter().min()?;
        let i_max = image.iter().max()?;
        let scale = if a.len() == 1 {
            Rational::one()
        } else {
            let di = i_max.sub(i_min);
            let db = b_max.sub(b_min);
            let s = if !di.x.is_zero() {
                &db.x / &di.x
            } else if !di.y.is_zero() {
                &db.y / &di.y
            } else {
                continue;
            };
            if !s.is_positive() {
                continue;
            }
            s
        };
        let translation = b_min.sub(&i_min.scale(&scale));
        let candidate = AxisAlignedSimilarity::new(iso, scale, translation);
        let hits = image
            .iter()
            .map(|p| p.scale(&candidate.scale).add(&candidate.translation))
            .filter(|p| target.contains(p))
            .collect::<BTreeSet<_>>()
            .len();
        if hits == b.len() {
            return Some(candidate);
        }
    }
    None
}
