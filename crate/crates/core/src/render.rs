//! SVG snapshots of a recorded run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::geom::{int, match_axis_aligned_similarity, to_decimal, RPoint, Rational};
use crate::model::{Light, World};
use crate::sim::{replay_with, SimError, Trace};

const CANVAS: i64 = 600;
const MARGIN: i64 = 30;
const DIGITS: usize = 20;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("every must be at least 1")]
    ZeroStride,
    #[error("observer {0} is not a robot of this trace")]
    NoSuchObserver(usize),
    #[error(transparent)]
    Replay(#[from] SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn light_color(l: Light) -> &'static str {
    match l {
        Light::Off => "gray",
        Light::Terminal => "orange",
        Light::Candidate => "blue",
        Light::Symmetry => "purple",
        Light::Leader => "red",
        Light::Done => "green",
    }
}

struct Frame {
    index: usize,
    t: Rational,
    robots: Vec<(RPoint, Light)>,
    sight: Vec<(RPoint, RPoint)>,
}

/// Maps world coordinates onto the canvas, Y pointing up.
struct Viewport {
    min: RPoint,
    max_y: Rational,
    scale: Rational,
}

impl Viewport {
    fn fit<'a>(points: impl Iterator<Item = &'a RPoint>) -> Self {
        let pts: Vec<&RPoint> = points.collect();
        let lo = |f: fn(&RPoint) -> &Rational| pts.iter().map(|p| f(p)).min().cloned().unwrap_or_default();
        let hi = |f: fn(&RPoint) -> &Rational| pts.iter().map(|p| f(p)).max().cloned().unwrap_or_default();
        let (min_x, max_x, min_y, max_y) = (lo(|p| &p.x), hi(|p| &p.x), lo(|p| &p.y), hi(|p| &p.y));
        let span = (&max_x - &min_x).max(&max_y - &min_y);
        let span = if span.is_zero() { Rational::one() } else { span };
        Viewport { min: RPoint::new(min_x, min_y), max_y, scale: int(CANVAS - 2 * MARGIN) / span }
    }

    fn map(&self, p: &RPoint) -> (String, String) {
        let x = (&p.x - &self.min.x) * &self.scale + int(MARGIN);
        let y = (&self.max_y - &p.y) * &self.scale + int(MARGIN);
        (to_decimal(&x, DIGITS), to_decimal(&y, DIGITS))
    }
}

fn svg(frame: &Frame, targets: &[RPoint], vp: &Viewport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="8" y="18" font-size="12">event {} t={}</text>"#, frame.index, frame.t);
    for (a, b) in &frame.sight {
        let ((x1, y1), (x2, y2)) = (vp.map(a), vp.map(b));
        let _ = writeln!(s, r#"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="lightgray" stroke-width="1"/>"#);
    }
    for p in targets {
        let (x, y) = vp.map(p);
        let _ = writeln!(s, r#"<circle class="target" cx="{x}" cy="{y}" r="9" fill="none" stroke="black" stroke-width="1.5"/>"#);
    }
    for (p, l) in &frame.robots {
        let (x, y) = vp.map(p);
        let _ = writeln!(
            s,
            r#"<circle class="robot {l}" cx="{x}" cy="{y}" r="6" fill="{}"/>"#,
            light_color(*l)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes one SVG for every `every`-th event (the last event of each block
/// of `every`) into `out_dir` and returns the written paths. With an
/// observer, lines of sight from that robot are drawn. Pattern targets are
/// placed where the final configuration puts them if it matches the
/// pattern, else at their pattern coordinates.
pub fn render_trace(
    trace: &Trace,
    out_dir: &Path,
    every: usize,
    observer: Option<usize>,
) -> Result<Vec<PathBuf>, RenderError> {
    if every == 0 {
        return Err(RenderError::ZeroStride);
    }
    let n = trace.meta.scenario.robots.len();
    if let Some(o) = observer.filter(|&o| o >= n) {
        return Err(RenderError::NoSuchObserver(o));
    }
    if trace.events.is_empty() {
        log::warn!("trace has no events; nothing to render");
        return Ok(Vec::new());
    }
    let mut frames = Vec::new();
    let final_world: World = replay_with(trace, |index, world, ev| {
        if index % every != every - 1 {
            return;
        }
        let robots = world.robots.iter().map(|r| (r.position_at(&ev.t), r.light)).collect();
        let sight = observer
            .map(|o| {
                let from = world.robots[o].position_at(&ev.t);
                world
                    .visible_set(o, &ev.t)
                    .map(|v| v.into_iter().map(|(p, _)| (from.clone(), p)).collect())
                    .unwrap_or_default()
            })
            .unwrap_or_default();
        frames.push(Frame { index, t: ev.t.clone(), robots, sight });
    })?;
    let pattern = trace.meta.scenario.pattern.points();
    let finals: Vec<RPoint> = final_world.robots.iter().map(|r| r.pos.clone()).collect();
    let targets: Vec<RPoint> = match match_axis_aligned_similarity(pattern, &finals) {
        Some(sim) => pattern.iter().map(|p| sim.apply(p)).collect(),
        None => pattern.to_vec(),
    };
    let vp = Viewport::fit(
        frames.iter().flat_map(|f| f.robots.iter().map(|(p, _)| p)).chain(targets.iter()),
    );
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for f in &frames {
        let path = out_dir.join(format!("frame_{:06}.svg", f.index));
        std::fs::write(&path, svg(f, &targets, &vp))?;
        written.push(path);
    }
    Ok(written)
}
