//! Online crossing counter for one center, and the completion-time ledger
//! built on top of it.
//!
//! The machine tracks, per circle `k`, whether the walker is at or beyond
//! radius `r_k` (`d² ≥ ⌈r_k²⌉`). Level `l` arms when the walker crosses
//! strictly inside circle `l−1` and counts one completed excursion when,
//! while armed, it first reaches distance `≥ r_l`. Every circle crossing is
//! logged, which is enough to reconstruct the boundary-visit history.
//!
//! Schedules must keep consecutive radii more than one lattice step apart,
//! so a single step flips at most one circle and the event order is
//! unambiguous.

use alloc::vec;
use alloc::vec::Vec;

use super::{ExcursionError, RadiiSchedule};
use crate::estimators::torus_distance_sq;
use crate::numeric::ceil;
use crate::walk::{Point, StepObserver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcursionEvent {
    /// The walker crossed circle `circle` (`outward` = now at or beyond it).
    Crossing {
        circle: usize,
        outward: bool,
        time: u64,
    },
    /// A level-`level` inner→outer traversal completed.
    Completed { level: usize, time: u64 },
    /// The walker occupied the center site.
    CenterVisit { time: u64 },
}

/// What one observed step produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepOutcome {
    pub completed_level: Option<usize>,
    pub center_visit: bool,
}

#[derive(Debug, Clone)]
pub struct CrossingMachine {
    n: u32,
    center: Point,
    thresholds: Vec<u64>,
    outside: Vec<bool>,
    armed: Vec<bool>,
    counts: Vec<u64>,
    center_visits: u64,
    log: Vec<ExcursionEvent>,
    started: bool,
}

impl CrossingMachine {
    /// Builds a machine for `center` on the `n × n` torus over the given
    /// schedule. The top radius must not exceed `n/2` so the wrapped metric
    /// stays unambiguous.
    pub fn new(n: u32, center: Point, schedule: &RadiiSchedule) -> Result<Self, ExcursionError> {
        let thresholds = schedule.squared_thresholds()?;
        if schedule.max_radius() > n as f64 / 2.0 {
            return Err(ExcursionError::ScheduleUnusable(
                "top radius exceeds half the torus side",
            ));
        }
        let levels = schedule.levels();
        Ok(Self {
            n,
            center,
            thresholds,
            outside: vec![false; levels + 1],
            armed: vec![false; levels + 1],
            counts: vec![0; levels + 1],
            center_visits: 0,
            log: Vec::new(),
            started: false,
        })
    }

    pub fn levels(&self) -> usize {
        self.thresholds.len() - 1
    }

    pub fn center(&self) -> Point {
        self.center
    }

    /// Completed level-`l` excursions so far (`l = 1..=levels`).
    pub fn count(&self, level: usize) -> u64 {
        self.counts[level]
    }

    pub fn center_visits(&self) -> u64 {
        self.center_visits
    }

    pub fn events(&self) -> &[ExcursionEvent] {
        &self.log
    }

    /// Feeds one `(time, position)` occupancy. Events are deterministic
    /// functions of the observed path.
    pub fn observe(&mut self, time: u64, position: Point) -> StepOutcome {
        let d2 = torus_distance_sq(self.n, self.center, position);
        let mut outcome = StepOutcome::default();
        if d2 == 0 {
            self.center_visits += 1;
            self.log.push(ExcursionEvent::CenterVisit { time });
            outcome.center_visit = true;
        }
        if !self.started {
            for k in 0..self.thresholds.len() {
                self.outside[k] = d2 >= self.thresholds[k];
            }
            for l in 1..self.thresholds.len() {
                self.armed[l] = !self.outside[l - 1];
            }
            self.started = true;
            return outcome;
        }
        for k in 0..self.thresholds.len() {
            let now_outside = d2 >= self.thresholds[k];
            if now_outside == self.outside[k] {
                continue;
            }
            self.outside[k] = now_outside;
            self.log.push(ExcursionEvent::Crossing {
                circle: k,
                outward: now_outside,
                time,
            });
            if now_outside {
                if k >= 1 && self.armed[k] {
                    self.counts[k] += 1;
                    self.armed[k] = false;
                    self.log.push(ExcursionEvent::Completed { level: k, time });
                    outcome.completed_level = Some(k);
                }
            } else if k + 1 < self.thresholds.len() {
                self.armed[k + 1] = true;
            }
        }
        outcome
    }
}

impl StepObserver for CrossingMachine {
    fn on_step(&mut self, time: u64, position: Point) {
        self.observe(time, position);
    }
}

/// Boundary-visit history: the sequence of circle indices from the crossing
/// log, recording a crossing only when its circle differs from the last
/// recorded one. Successive entries differ by exactly one.
pub fn history_levels(events: &[ExcursionEvent]) -> Vec<usize> {
    let mut out = Vec::new();
    for ev in events {
        if let ExcursionEvent::Crossing { circle, .. } = ev {
            if out.last() != Some(circle) {
                out.push(*circle);
            }
        }
    }
    out
}

/// Snapshot of all level counts at one completion time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerRow {
    /// Step index at which the level's target count was reached.
    pub time: u64,
    /// Completed excursion counts per level `1..=L` at that moment
    /// (index 0 unused).
    pub counts: Vec<u64>,
    /// Center occupancies before that moment.
    pub center_visits: u64,
}

/// Per-center crossing counts `N[k][l]` frozen at the completion times
/// `R[k]` of each level's excursion target.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionLedger {
    pub center: Point,
    pub n: u32,
    /// Real-valued per-level targets; row `k` fires when the level-`k` count
    /// reaches `⌈target⌉`.
    pub targets: Vec<f64>,
    /// Row per level `1..=L` (index 0 unused); `None` when the walk ended
    /// before the target was met.
    pub rows: Vec<Option<LedgerRow>>,
    /// Counts at the end of the observed walk.
    pub final_counts: Vec<u64>,
    pub final_center_visits: u64,
}

impl ExcursionLedger {
    pub fn levels(&self) -> usize {
        self.rows.len() - 1
    }

    /// True when rows `1..=k` are all present.
    pub fn complete_through(&self, k: usize) -> bool {
        k < self.rows.len() && (1..=k).all(|l| self.rows[l].is_some())
    }

    /// `N[k][l]`: completed level-`l` excursions at time `R[k]`.
    pub fn count(&self, k: usize, l: usize) -> Option<u64> {
        self.rows.get(k)?.as_ref().map(|row| row.counts[l])
    }

    /// `N[k][0]`: center occupancies before `R[k]`.
    pub fn center_visits_before(&self, k: usize) -> Option<u64> {
        self.rows.get(k)?.as_ref().map(|row| row.center_visits)
    }

    /// `R[k]`: completion time of the level-`k` target.
    pub fn completion_time(&self, k: usize) -> Option<u64> {
        self.rows.get(k)?.as_ref().map(|row| row.time)
    }
}

/// Watches a walk through a [`CrossingMachine`] and freezes ledger rows as
/// level targets complete.
#[derive(Debug, Clone)]
pub struct LedgerBuilder {
    machine: CrossingMachine,
    targets: Vec<f64>,
    target_counts: Vec<u64>,
    rows: Vec<Option<LedgerRow>>,
}

impl LedgerBuilder {
    /// `targets[l-1]` is the (real-valued) excursion target for level `l`.
    pub fn new(machine: CrossingMachine, targets: &[f64]) -> Result<Self, ExcursionError> {
        if targets.len() != machine.levels() {
            return Err(ExcursionError::InvalidParameter(
                "one target per schedule level required",
            ));
        }
        let mut target_counts = vec![0u64; targets.len() + 1];
        for (l, &t) in targets.iter().enumerate() {
            if !(t >= 1.0) || !t.is_finite() {
                return Err(ExcursionError::InvalidParameter(
                    "targets must be finite and >= 1",
                ));
            }
            target_counts[l + 1] = ceil(t) as u64;
        }
        let rows = vec![None; targets.len() + 1];
        let mut padded = Vec::with_capacity(targets.len() + 1);
        padded.push(f64::NAN);
        padded.extend_from_slice(targets);
        Ok(Self {
            machine,
            targets: padded,
            target_counts,
            rows,
        })
    }

    pub fn machine(&self) -> &CrossingMachine {
        &self.machine
    }

    pub fn observe(&mut self, time: u64, position: Point) {
        let outcome = self.machine.observe(time, position);
        if let Some(level) = outcome.completed_level {
            if self.rows[level].is_none() && self.machine.count(level) >= self.target_counts[level]
            {
                self.rows[level] = Some(LedgerRow {
                    time,
                    counts: self.machine.counts.clone(),
                    center_visits: self.machine.center_visits,
                });
            }
        }
    }

    pub fn finish(self) -> ExcursionLedger {
        ExcursionLedger {
            center: self.machine.center,
            n: self.machine.n,
            targets: self.targets,
            rows: self.rows,
            final_counts: self.machine.counts,
            final_center_visits: self.machine.center_visits,
        }
    }
}

impl StepObserver for LedgerBuilder {
    fn on_step(&mut self, time: u64, position: Point) {
        self.observe(time, position);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feed_path(machine: &mut CrossingMachine, path: &[(i64, i64)], n: u32) {
        for (t, &(x, y)) in path.iter().enumerate() {
            let p = Point {
                x: x.rem_euclid(n as i64) as u32,
                y: y.rem_euclid(n as i64) as u32,
            };
            machine.observe(t as u64, p);
        }
    }

    fn radial_path(to: i64) -> Vec<(i64, i64)> {
        (0..=to).map(|x| (x, 0)).collect()
    }

    #[test]
    fn monotone_outward_path_counts_one_excursion_per_level() {
        let n = 512;
        let schedule = RadiiSchedule::geometric(4.0, 2.0, 4).unwrap();
        let mut m = CrossingMachine::new(n, Point::ORIGIN, &schedule).unwrap();
        // Start at the center and march straight past the top radius (64).
        feed_path(&mut m, &radial_path(70), n);
        for l in 1..=4 {
            assert_eq!(m.count(l), 1, "level {l}");
        }
        assert_eq!(m.center_visits(), 1);
    }

    #[test]
    fn oscillation_below_the_outer_circle_counts_nothing() {
        let n = 512;
        let schedule = RadiiSchedule::geometric(4.0, 2.0, 2).unwrap();
        let mut m = CrossingMachine::new(n, Point::ORIGIN, &schedule).unwrap();
        // Bounce between radius 3 (inside r_0 = 4) and radius 7 (< r_1 = 8):
        // level 1 keeps re-arming but never completes, level 2 never arms.
        let mut path = alloc::vec![(0, 0)];
        for _ in 0..10 {
            for x in 1..=7 {
                path.push((x, 0));
            }
            for x in (3..7).rev() {
                path.push((x, 0));
            }
        }
        let mut m2 = m.clone();
        feed_path(&mut m, &path, n);
        assert_eq!(m.count(1), 0);
        assert_eq!(m.count(2), 0);

        // One extra step beyond r_1 completes exactly one level-1 excursion.
        path.push((8, 0));
        feed_path(&mut m2, &path, n);
        assert_eq!(m2.count(1), 1);
        assert_eq!(m2.count(2), 0);
    }

    #[test]
    fn reentry_is_required_between_completions() {
        let n = 512;
        let schedule = RadiiSchedule::geometric(4.0, 2.0, 1).unwrap();
        let mut m = CrossingMachine::new(n, Point::ORIGIN, &schedule).unwrap();
        let mut path = radial_path(9);
        // Dip back to radius 5 (not inside r_0 = 4) and out again: no re-arm.
        path.extend([
            (8, 0),
            (7, 0),
            (6, 0),
            (5, 0),
            (6, 0),
            (7, 0),
            (8, 0),
            (9, 0),
        ]);
        // Now dip strictly inside r_0 and out: one more excursion.
        path.extend([
            (8, 0),
            (7, 0),
            (6, 0),
            (5, 0),
            (4, 0),
            (3, 0),
            (4, 0),
            (5, 0),
            (6, 0),
            (7, 0),
            (8, 0),
        ]);
        feed_path(&mut m, &path, n);
        assert_eq!(m.count(1), 2);
    }

    #[test]
    fn history_collapses_repeated_circles() {
        let n = 4096;
        // Circles at radii 4, 8, 16, 32, 64, 128 (indices 0..=5). Monotone
        // legs along the x-axis between waypoints chosen strictly inside
        // annuli cross exactly the circles between the endpoints, and a
        // crossing is recorded only when its circle differs from the last
        // recorded one. The down-up-down sweep below reproduces the
        // distinct-boundary sequence 4,3,2,3,2,1,2,3,4,5.
        let schedule = RadiiSchedule::geometric(4.0, 2.0, 5).unwrap();
        let mut m = CrossingMachine::new(n, Point::ORIGIN, &schedule).unwrap();
        fn push_leg(path: &mut Vec<(i64, i64)>, from: i64, to: i64) {
            if from < to {
                for x in from..=to {
                    path.push((x, 0));
                }
            } else {
                for x in (to..=from).rev() {
                    path.push((x, 0));
                }
            }
        }
        let waypoints = [100i64, 40, 20, 12, 40, 12, 5, 20, 40, 100, 200];
        let mut path = Vec::new();
        push_leg(&mut path, waypoints[0], waypoints[1]);
        for w in waypoints.windows(2).skip(1) {
            let mut leg = Vec::new();
            push_leg(&mut leg, w[0], w[1]);
            path.extend_from_slice(&leg[1..]);
        }
        feed_path(&mut m, &path, n);
        assert_eq!(
            history_levels(m.events()),
            alloc::vec![4, 3, 2, 3, 2, 1, 2, 3, 4, 5]
        );
    }

    #[test]
    fn ledger_rows_freeze_counts_at_completion_times() {
        let n = 512;
        let schedule = RadiiSchedule::geometric(4.0, 2.0, 2).unwrap();
        let machine = CrossingMachine::new(n, Point::ORIGIN, &schedule).unwrap();
        let mut builder = LedgerBuilder::new(machine, &[2.0, 1.0]).unwrap();
        // Two level-1 round trips, then out past r_2 = 16.
        let mut path = radial_path(9);
        path.extend([(8, 0), (7, 0), (6, 0), (5, 0), (4, 0), (3, 0)]);
        path.extend((4..=9).map(|x| (x, 0)));
        path.extend([(8, 0), (7, 0), (6, 0), (5, 0), (4, 0), (3, 0)]);
        path.extend((4..=17).map(|x| (x, 0)));
        for (t, &(x, y)) in path.iter().enumerate() {
            builder.observe(
                t as u64,
                Point {
                    x: x as u32,
                    y: y as u32,
                },
            );
        }
        let ledger = builder.finish();
        assert!(ledger.complete_through(2));
        // Level-1 target (2 excursions) completed on the second crossing of
        // r_1 = 8; at that moment the level-2 count was still 0.
        assert_eq!(ledger.count(1, 1), Some(2));
        assert_eq!(ledger.count(1, 2), Some(0));
        assert_eq!(ledger.count(2, 2), Some(1));
        assert_eq!(ledger.center_visits_before(1), Some(1));
        let r1 = ledger.completion_time(1).unwrap();
        let r2 = ledger.completion_time(2).unwrap();
        assert!(r1 < r2);
    }
}
