use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{int, Rational};

/// Delay menu size: every emitted delay is `k / MENU * max_phase_delay`.
pub const MENU: i64 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    Fsync,
    Ssync,
    Async,
    Mirrored,
}

impl SchedulerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerKind::Fsync => "fsync",
            SchedulerKind::Ssync => "ssync",
            SchedulerKind::Async => "async",
            SchedulerKind::Mirrored => "mirrored",
        }
    }

    fn synchronous(self) -> bool {
        !matches!(self, SchedulerKind::Async)
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fsync" => Ok(SchedulerKind::Fsync),
            "ssync" => Ok(SchedulerKind::Ssync),
            "async" | "async_random" => Ok(SchedulerKind::Async),
            "mirrored" | "mirrored_fsync" => Ok(SchedulerKind::Mirrored),
            _ => Err(format!("unknown scheduler `{s}` (expected fsync, ssync, async or mirrored)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchedulerPolicy {
    pub kind: SchedulerKind,
    pub seed: u64,
    pub max_phase_delay: Rational,
    /// Explicit fairness window; `None` uses [`SchedulerPolicy::fairness_window`].
    pub fairness: Option<usize>,
}

impl SchedulerPolicy {
    pub fn new(kind: SchedulerKind, seed: u64) -> Self {
        Self { kind, seed, max_phase_delay: Rational::one(), fairness: None }
    }

    pub fn with_max_phase_delay(mut self, m: Rational) -> Self {
        assert!(m.is_positive(), "max phase delay must be positive");
        self.max_phase_delay = m;
        self
    }

    /// Every robot is activated at least once in any run of this many
    /// consecutive activations.
    ///
    /// Async: a robot's activations are at most 4M apart (idle, colour,
    /// start and travel delays, each ≤ M), and any other robot's are at
    /// least M/7 apart, so at most 29 of its activations fit between two of
    /// ours. Synchronous policies activate everyone within 3 rounds.
    pub fn fairness_window(&self, n: usize) -> usize {
        self.fairness.unwrap_or(match self.kind {
            SchedulerKind::Async => (4 * MENU as usize + 1) * n,
            SchedulerKind::Fsync | SchedulerKind::Mirrored => n,
            SchedulerKind::Ssync => 3 * n,
        })
    }
}

/// Timing source for the event loop.
pub(crate) struct Scheduler {
    policy: SchedulerPolicy,
    rng: ChaCha8Rng,
    quarter: Rational,
}

impl Scheduler {
    pub fn new(policy: SchedulerPolicy) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(policy.seed);
        let quarter = &policy.max_phase_delay / int(4);
        Self { policy, rng, quarter }
    }


    fn menu_delay(&mut self) -> Rational {
        let k = self.rng.gen_range(1..=MENU);
        &self.policy.max_phase_delay * int(k) / int(MENU)
    }

    /// Delay between consecutive phases of one cycle.
    pub fn phase_delay(&mut self) -> Rational {
        if self.policy.kind.synchronous() {
            self.quarter.clone()
        } else {
            self.menu_delay()
        }
    }

    /// When robot `i`, idle from time `t`, next wakes up.
    pub fn next_activation(&mut self, i: usize, n: usize, t: &Rational) -> Rational {
        match self.policy.kind {
            SchedulerKind::Async => t + self.menu_delay(),
            SchedulerKind::Fsync | SchedulerKind::Mirrored => self.round_start(self.round_after(t)),
            SchedulerKind::Ssync => {
                let mut r = self.round_after(t);
                while !self.ssync_selected(r, i, n) {
                    r += 1;
                }
                self.round_start(r)
            }
        }
    }

    fn round_start(&self, r: u64) -> Rational {
        &self.policy.max_phase_delay * int(r as i64)
    }

    /// First round index whose start is strictly after `t`.
    fn round_after(&self, t: &Rational) -> u64 {
        let q = (t / &self.policy.max_phase_delay).floor();
        q.to_integer().to_u64().unwrap_or(0) + 1
    }

    /// Robots active in SSync round `r`: every robot with `(r + i) % 3 == 0`,
    /// a seeded coin for the rest, and robot `r % n` if nobody else.
    fn ssync_selected(&self, r: u64, i: usize, n: usize) -> bool {
        let chosen = |j: usize| {
            (r + j as u64).is_multiple_of(3) || {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(self.policy.seed ^ r.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ j as u64);
                rng.gen_bool(0.5)
            }
        };
        if chosen(i) {
            return true;
        }
        i == (r % n as u64) as usize && !(0..n).any(chosen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rat;

    #[test]
    fn async_delays_come_from_the_menu() {
        let mut s = Scheduler::new(SchedulerPolicy::new(SchedulerKind::Async, 3).with_max_phase_delay(int(2)));
        for _ in 0..200 {
            let d = s.phase_delay();
            assert!(d.is_positive() && d <= int(2));
            assert!((d.clone() * int(MENU) / int(2)).is_integer());
        }
    }

    #[test]
    fn fsync_rounds() {
        let mut s = Scheduler::new(SchedulerPolicy::new(SchedulerKind::Fsync, 0));
        assert_eq!(s.next_activation(0, 3, &int(0)), int(1));
        assert_eq!(s.next_activation(0, 3, &rat(7, 4)), int(2));
        assert_eq!(s.next_activation(0, 3, &int(2)), int(3));
        assert_eq!(s.phase_delay(), rat(1, 4));
    }

    #[test]
    fn ssync_activates_someone_every_round_and_everyone_within_three() {
        let s = Scheduler::new(SchedulerPolicy::new(SchedulerKind::Ssync, 11));
        for n in 1..6 {
            for r in 1..60 {
                assert!((0..n).any(|i| s.ssync_selected(r, i, n)));
                for i in 0..n {
                    assert!((r..r + 3).any(|q| s.ssync_selected(q, i, n)));
                }
            }
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("async".parse::<SchedulerKind>().unwrap(), SchedulerKind::Async);
        assert_eq!("mirrored".parse::<SchedulerKind>().unwrap(), SchedulerKind::Mirrored);
        assert!("rr".parse::<SchedulerKind>().is_err());
    }
}
