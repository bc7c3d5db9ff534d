//! Scenario files: initial robots, mode and target pattern.

use std::collections::HashMap;

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{rational_str, RPoint, Rational};
use crate::model::{LocalFrame, Mode, Pattern, PatternError, RobotState, World};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    #[serde(with = "rational_str")]
    pub x: Rational,
    #[serde(with = "rational_str")]
    pub y: Rational,
    pub y_sign: i8,
    #[serde(with = "rational_str")]
    pub unit: Rational,
}

impl RobotSpec {
    pub fn position(&self) -> RPoint {
        RPoint::new(self.x.clone(), self.y.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    pub robots: Vec<RobotSpec>,
    pub pattern: Pattern,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid { line: Option<usize>, message: String },
}

impl ScenarioError {
    fn invalid(line: Option<usize>, message: impl Into<String>) -> Self {
        ScenarioError::Invalid { line, message: message.into() }
    }
}

/// Same layout as [`Scenario`] but with the pattern unchecked, so that
/// pattern problems can be reported against their own line.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    mode: Mode,
    robots: Vec<RobotSpec>,
    #[serde(default)]
    pattern: Option<Vec<RPoint>>,
}

impl Scenario {
    /// Parses and validates scenario JSON.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        Self::parse_with_pattern(text, None)
    }

    /// Like [`Scenario::parse`], but `pattern`, when given, replaces the
    /// scenario's own (which may then be absent).
    pub fn parse_with_pattern(text: &str, pattern: Option<Pattern>) -> Result<Self, ScenarioError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(syntax)?;
        let robot_line = |i: usize| element_line(text, "robots", i);
        let pattern = match (pattern, raw.pattern) {
            (Some(p), _) => p,
            (None, Some(points)) => Pattern::new(points).map_err(|e| {
                let line = match &e {
                    PatternError::Empty => key_line(text, "pattern"),
                    PatternError::Negative { index, .. } | PatternError::NotSorted { index, .. } => {
                        element_line(text, "pattern", *index)
                    }
                };
                ScenarioError::invalid(line, e.to_string())
            })?,
            (None, None) => return Err(ScenarioError::invalid(None, "scenario has no pattern")),
        };
        let scenario = Scenario { mode: raw.mode, robots: raw.robots, pattern };
        scenario.check(robot_line)?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.check(|_| None)
    }

    fn check(&self, robot_line: impl Fn(usize) -> Option<usize>) -> Result<(), ScenarioError> {
        if self.robots.is_empty() {
            return Err(ScenarioError::invalid(None, "scenario has no robots"));
        }
        if self.robots.len() != self.pattern.len() {
            return Err(ScenarioError::invalid(
                None,
                format!("{} robots but the pattern has {} points", self.robots.len(), self.pattern.len()),
            ));
        }
        let mut seen: HashMap<RPoint, usize> = HashMap::new();
        for (i, r) in self.robots.iter().enumerate() {
            if r.y_sign != 1 && r.y_sign != -1 {
                return Err(ScenarioError::invalid(robot_line(i), format!("robot {i}: y_sign must be 1 or -1")));
            }
            if self.mode == Mode::TwoAxis && r.y_sign != 1 {
                return Err(ScenarioError::invalid(
                    robot_line(i),
                    format!("robot {i}: y_sign must be 1 in two-axis mode"),
                ));
            }
            if !r.unit.is_positive() {
                return Err(ScenarioError::invalid(robot_line(i), format!("robot {i}: unit must be positive")));
            }
            if let Some(j) = seen.insert(r.position(), i) {
                return Err(ScenarioError::invalid(
                    robot_line(i),
                    format!("robots {j} and {i} share position {}", r.position()),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn to_world(&self) -> World {
        let robots = self
            .robots
            .iter()
            .enumerate()
            .map(|(i, r)| RobotState::new(i, r.position(), LocalFrame::new(r.y_sign, r.unit.clone())))
            .collect();
        World { mode: self.mode, pattern: self.pattern.clone(), robots }
    }

    /// Positions and frames of `world`; lights and activities are dropped.
    pub fn from_world(world: &World) -> Self {
        let robots = world
            .robots
            .iter()
            .map(|r| RobotSpec {
                x: r.pos.x.clone(),
                y: r.pos.y.clone(),
                y_sign: r.frame.y_sign(),
                unit: r.frame.unit().clone(),
            })
            .collect();
        Scenario { mode: world.mode, robots, pattern: world.pattern.clone() }
    }
}

/// Parses a stand-alone pattern file: a JSON array of `["x", "y"]` pairs.
pub fn parse_pattern(text: &str) -> Result<Pattern, ScenarioError> {
    let points: Vec<RPoint> = serde_json::from_str(text).map_err(syntax)?;
    Pattern::new(points).map_err(|e| {
        let line = match &e {
            PatternError::Empty => None,
            PatternError::Negative { index, .. } | PatternError::NotSorted { index, .. } => {
                text.find('[').and_then(|open| array_element_line(text, open, *index))
            }
        };
        ScenarioError::invalid(line, e.to_string())
    })
}

fn syntax(e: serde_json::Error) -> ScenarioError {
    ScenarioError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.find(&format!("\"{key}\"")).map(|o| line_of(text, o))
}

/// Line on which element `index` of the array under `key` starts.
fn element_line(text: &str, key: &str, index: usize) -> Option<usize> {
    let start = text.find(&format!("\"{key}\""))?;
    let open = start + text[start..].find('[')?;
    array_element_line(text, open, index)
}

/// Line on which element `index` of the array opening at byte `open` starts.
fn array_element_line(text: &str, open: usize, index: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let (mut depth, mut in_str, mut escaped) = (0usize, false, false);
    let mut count = 0usize;
    let mut expecting = true;
    for (k, &b) in bytes.iter().enumerate().skip(open + 1) {
        if in_str {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_str = false,
                _ => {}
            }
            continue;
        }
        if depth == 0 && expecting && !b.is_ascii_whitespace() {
            if b == b']' {
                return None;
            }
            if count == index {
                return Some(line_of(text, k));
            }
            count += 1;
            expecting = false;
        }
        match b {
            b'"' => in_str = true,
            b'[' | b'{' => depth += 1,
            b']' | b'}' if depth == 0 => return None,
            b']' | b'}' => depth -= 1,
            b',' if depth == 0 => expecting = true,
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{int, rat};

    const GOOD: &str = r#"{
  "mode": "one-axis",
  "robots": [
    {"x": "0", "y": "1/2", "y_sign": 1, "unit": "1"},
    {"x": "3", "y": "-2", "y_sign": -1, "unit": "5/3"}
  ],
  "pattern": [["0", "0"], ["1", "0"]]
}"#;

    #[test]
    fn parses_rationals_and_frames() {
        let s = Scenario::parse(GOOD).unwrap();
        assert_eq!(s.mode, Mode::OneAxis);
        assert_eq!(s.robots[0].y, rat(1, 2));
        assert_eq!(s.robots[1].unit, rat(5, 3));
        let w = s.to_world();
        assert_eq!(w.robots[1].frame.y_sign(), -1);
        assert_eq!(w.robots[1].pos, RPoint::new(int(3), int(-2)));
    }

    #[test]
    fn round_trip() {
        let s = Scenario::parse(GOOD).unwrap();
        assert_eq!(Scenario::parse(&s.to_json()).unwrap(), s);
        assert_eq!(Scenario::from_world(&s.to_world()), s);
    }

    #[test]
    fn rejects_float_literals() {
        let bad = GOOD.replace("\"1/2\"", "0.5");
        let err = Scenario::parse(&bad).unwrap_err();
        assert!(matches!(err, ScenarioError::Syntax { line: 4, .. }), "{err}");
        let bad = GOOD.replace("\"1/2\"", "\"0.5\"");
        assert!(matches!(Scenario::parse(&bad).unwrap_err(), ScenarioError::Syntax { line: 4, .. }));
    }

    #[test]
    fn duplicate_positions_point_at_the_second_robot() {
        let bad = GOOD.replace(r#""x": "3", "y": "-2""#, r#""x": "0", "y": "1/2""#);
        assert_eq!(
            Scenario::parse(&bad).unwrap_err(),
            ScenarioError::invalid(Some(5), "robots 0 and 1 share position (0, 1/2)")
        );
    }

    #[test]
    fn pattern_errors_carry_lines() {
        let bad = GOOD.replace(r#"[["0", "0"], ["1", "0"]]"#, "[\n[\"1\", \"0\"],\n[\"0\", \"0\"]]");
        let err = Scenario::parse(&bad).unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid { line: Some(9), .. }), "{err}");
        let bad = GOOD.replace(r#"["1", "0"]"#, r#"["0", "0"]"#);
        assert!(Scenario::parse(&bad).is_err());
        let bad = GOOD.replace(r#"["1", "0"]"#, r#"["1", "-1"]"#);
        assert!(Scenario::parse(&bad).is_err());
    }

    #[test]
    fn external_pattern() {
        let no_pattern = GOOD.replace(",\n  \"pattern\": [[\"0\", \"0\"], [\"1\", \"0\"]]", "");
        assert!(!no_pattern.contains("pattern"));
        assert_eq!(
            Scenario::parse(&no_pattern).unwrap_err(),
            ScenarioError::invalid(None, "scenario has no pattern")
        );
        let p = parse_pattern("[\n  [\"0\", \"0\"],\n  [\"0\", \"3/2\"]\n]").unwrap();
        let s = Scenario::parse_with_pattern(&no_pattern, Some(p.clone())).unwrap();
        assert_eq!(s.pattern, p);
        let err = parse_pattern("[\n  [\"0\", \"0\"],\n  [\"0\", \"-1\"]\n]").unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid { line: Some(3), .. }), "{err}");
    }

    #[test]
    fn two_axis_needs_positive_y_sign() {
        let bad = GOOD.replace("one-axis", "two-axis");
        let err = Scenario::parse(&bad).unwrap_err();
        assert_eq!(err, ScenarioError::invalid(Some(5), "robot 1: y_sign must be 1 in two-axis mode"));
    }

    #[test]
    fn size_mismatch_and_bad_unit() {
        let bad = GOOD.replace(r#", ["1", "0"]"#, "");
        assert!(Scenario::parse(&bad).is_err());
        let bad = GOOD.replace(r#""unit": "5/3""#, r#""unit": "-1""#);
        assert!(Scenario::parse(&bad).is_err());
        let bad = GOOD.replace(r#""y_sign": -1"#, r#""y_sign": 2"#);
        assert!(Scenario::parse(&bad).is_err());
    }
}
