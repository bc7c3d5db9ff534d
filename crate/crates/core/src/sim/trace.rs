//! Append-only event log, its JSONL encoding and trace-level checks.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::scheduler::SchedulerKind;
use super::EventKind;
use crate::algo::Rule;
use crate::geom::{format_rational, rational_str, RPoint, Rational};
use crate::model::{Light, Mode, Pattern, World};
use crate::scenario::Scenario;
use crate::verify::ConfigClass;

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => rational_str::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        match Option::<String>::deserialize(d)? {
            Some(s) => crate::geom::parse_rational(&s).map(Some).map_err(serde::de::Error::custom),
            None => Ok(None),
        }
    }
}

/// Event payload. Which fields are present depends on the event kind.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDetail {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Rule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Light>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<RPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<RPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub t_end: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<RPoint>,
    /// Classification of the world after the event, when every robot is idle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_class: Option<ConfigClass>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEvent {
    #[serde(with = "rational_str")]
    pub t: Rational,
    pub robot: usize,
    pub kind: EventKind,
    pub world_digest: String,
    pub detail: EventDetail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    pub seed: u64,
    pub scheduler: SchedulerKind,
    pub mode: Mode,
    #[serde(with = "rational_str")]
    pub max_phase_delay: Rational,
    pub pattern_hash: String,
    pub scenario: Scenario,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeRecord {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub time: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<[usize; 2]>,
    pub event_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_class: Option<ConfigClass>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub events: Vec<TraceEvent>,
    pub outcome: Option<OutcomeRecord>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trace has no meta line")]
    MissingMeta,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLine {
    meta: TraceMeta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeLine {
    outcome: OutcomeRecord,
}

fn sha256_hex(data: &str) -> String {
    hex::encode(Sha256::digest(data.as_bytes()))
}

/// Hash over the sorted `(position, light)` pairs at time `t`.
pub fn world_digest(world: &World, t: &Rational) -> String {
    let mut items: Vec<(RPoint, Light)> = world.robots.iter().map(|r| (r.position_at(t), r.light)).collect();
    items.sort();
    let mut s = String::new();
    for (p, l) in &items {
        let _ = write!(s, "{},{},{};", format_rational(&p.x), format_rational(&p.y), l);
    }
    sha256_hex(&s)
}

pub fn pattern_hash(pattern: &Pattern) -> String {
    let mut s = String::new();
    for p in pattern.points() {
        let _ = write!(s, "{},{};", format_rational(&p.x), format_rational(&p.y));
    }
    sha256_hex(&s)
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&MetaLine { meta: self.meta.clone() }).expect("meta serialises");
        out.push('\n');
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serialises"));
            out.push('\n');
        }
        if let Some(o) = &self.outcome {
            out.push_str(&serde_json::to_string(&OutcomeLine { outcome: o.clone() }).expect("outcome serialises"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_jsonl())
    }

    pub fn parse_jsonl(text: &str) -> Result<Trace, TraceError> {
        let mut meta = None;
        let mut events = Vec::new();
        let mut outcome = None;
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |e: serde_json::Error| TraceError::Parse { line: line_no, message: e.to_string() };
            let value: serde_json::Value = serde_json::from_str(line).map_err(err)?;
            if value.get("meta").is_some() {
                let m: MetaLine = serde_json::from_value(value).map_err(err)?;
                m.meta.scenario.validate().map_err(|e| TraceError::Parse { line: line_no, message: e.to_string() })?;
                meta = Some(m.meta);
            } else if value.get("outcome").is_some() {
                outcome = Some(serde_json::from_value::<OutcomeLine>(value).map_err(err)?.outcome);
            } else {
                events.push(serde_json::from_value::<TraceEvent>(value).map_err(err)?);
            }
        }
        Ok(Trace { meta: meta.ok_or(TraceError::MissingMeta)?, events, outcome })
    }

    pub fn read_jsonl(path: &Path) -> Result<Trace, TraceError> {
        Trace::parse_jsonl(&std::fs::read_to_string(path)?)
    }

    /// Every light the run ever showed, starting with `off`.
    pub fn colors_used(&self) -> BTreeSet<Light> {
        let mut set: BTreeSet<Light> = [Light::Off].into();
        set.extend(
            self.events.iter().filter(|e| e.kind == EventKind::ColorCommit).filter_map(|e| e.detail.color),
        );
        set
    }

    /// Index of the first event committing `light`.
    pub fn first_color_event(&self, light: Light) -> Option<usize> {
        self.events
            .iter()
            .position(|e| e.kind == EventKind::ColorCommit && e.detail.color == Some(light))
    }

    /// `(event index, class)` for every event after which the world was stable.
    pub fn stable_classes(&self) -> impl Iterator<Item = (usize, ConfigClass)> + '_ {
        self.events.iter().enumerate().filter_map(|(i, e)| e.detail.stable_class.map(|c| (i, c)))
    }

    /// Largest number of consecutive activations that some robot had to
    /// wait for, counting the stretches before its first and after its
    /// last activation. The run is fair for window `K` iff this is ≤ `K`.
    pub fn max_activation_gap(&self) -> usize {
        let n = self.meta.scenario.robots.len();
        let acts: Vec<usize> =
            self.events.iter().filter(|e| e.kind == EventKind::Activate).map(|e| e.robot).collect();
        let mut last: Vec<Option<usize>> = vec![None; n];
        let mut worst = 0;
        for (k, &r) in acts.iter().enumerate() {
            let gap = match last[r] {
                Some(prev) => k - prev,
                None => k + 1,
            };
            worst = worst.max(gap);
            last[r] = Some(k);
        }
        for l in last {
            worst = worst.max(match l {
                Some(prev) => acts.len() - prev,
                None => acts.len() + 1,
            });
        }
        worst
    }

    /// Times never decrease, and each robot cycles through
    /// activate, look, then optionally colour commit, move start and move
    /// end, with look at the activation instant and later phases strictly
    /// after the previous one.
    pub fn check_event_order(&self) -> Result<(), String> {
        let n = self.meta.scenario.robots.len();
        let mut last: Vec<Option<(EventKind, &Rational)>> = vec![None; n];
        let mut prev_t: Option<&Rational> = None;
        for (i, e) in self.events.iter().enumerate() {
            if prev_t.is_some_and(|p| e.t < *p) {
                return Err(format!("event {i}: time goes backwards"));
            }
            prev_t = Some(&e.t);
            if e.t <= Rational::default() {
                return Err(format!("event {i}: time not positive"));
            }
            use EventKind::*;
            let ok = match (last[e.robot], e.kind) {
                (None | Some((Look | ColorCommit | MoveEnd, _)), Activate) => true,
                (Some((Activate, t0)), Look) => *t0 == e.t,
                (Some((Look, t0)), ColorCommit) | (Some((ColorCommit, t0)), MoveStart) => *t0 < e.t,
                (Some((MoveStart, t0)), MoveEnd) => *t0 < e.t,
                _ => false,
            };
            if !ok {
                return Err(format!("event {i}: robot {} has {:?} after {:?}", e.robot, e.kind, last[e.robot]));
            }
            last[e.robot] = Some((e.kind, &e.t));
        }
        Ok(())
    }
}
