//! Seeded simple random walk on the `n × n` torus with per-site first-hit
//! recording and a streaming observer contract.
//!
//! Reproducibility contract:
//!
//! * The step stream is a pure function of `(n, seed)`. The generator is
//!   ChaCha12 keyed with `seed_from_u64(seed)`; the walk consumes stream 0,
//!   auxiliary draws (e.g. late-set sampling) use nonzero stream ids via
//!   [`aux_stream`]. Each 64-bit draw yields 32 two-bit direction nibbles,
//!   consumed from the least significant bits upward.
//! * Per-replica seeds are derived from a master seed with [`replica_seed`]
//!   (the SplitMix64 output sequence), so replica streams are independent
//!   and the mapping is documented and stable.
//! * Direction nibbles map as `0 → +x`, `1 → −x`, `2 → +y`, `3 → −y`,
//!   all modulo `n`.
//!
//! The origin is occupied at time 0, and a site counts as hit when the
//! walker occupies it after a step; hence the origin is never late. The walk
//! hands `(time, position)` to every registered observer in slice order,
//! starting with `(0, origin)`.

use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Sentinel first-hit value for sites not yet visited. Chosen as the maximum
/// representable time so that max/compare semantics are preserved.
pub const UNVISITED: u64 = u64::MAX;

/// A lattice point on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: u32,
    pub y: u32,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    /// Row-major flat index `y * n + x`.
    #[inline]
    pub fn index(self, n: u32) -> usize {
        self.y as usize * n as usize + self.x as usize
    }
}

/// Walk configuration: torus side, stream seed, optional step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    pub n: u32,
    pub seed: u64,
    pub max_steps: Option<u64>,
}

impl WalkConfig {
    pub fn new(n: u32, seed: u64) -> Self {
        Self {
            n,
            seed,
            max_steps: None,
        }
    }
}

/// Per-site first-hit times of one walk, plus run metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstHitField {
    pub n: u32,
    pub seed: u64,
    pub hits: Vec<u64>,
    pub walk_length: u64,
    pub covered: bool,
}

impl FirstHitField {
    #[inline]
    pub fn hit_time(&self, p: Point) -> u64 {
        self.hits[p.index(self.n)]
    }

    pub fn unvisited_count(&self) -> usize {
        self.hits.iter().filter(|&&h| h == UNVISITED).count()
    }

    /// The cover time: the maximum finite first-hit entry, available once
    /// every site has been visited.
    pub fn cover_time(&self) -> Option<u64> {
        if self.covered {
            self.hits.iter().copied().max()
        } else {
            None
        }
    }
}

/// Streaming observer of the walk's occupancy sequence. Observers are
/// read-only with respect to the walk and are invoked in slice order for
/// every `(time, position)`, starting with `(0, origin)`.
pub trait StepObserver {
    fn on_step(&mut self, time: u64, position: Point);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkError {
    /// Step budget hit before coverage; carries the partial field.
    BudgetExhausted(FirstHitField),
    /// Torus side must be at least 1.
    InvalidSide,
}

impl core::fmt::Display for WalkError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WalkError::BudgetExhausted(field) => write!(
                f,
                "step budget exhausted after {} steps with {} sites unvisited",
                field.walk_length,
                field.unvisited_count()
            ),
            WalkError::InvalidSide => f.write_str("torus side must be at least 1"),
        }
    }
}

const SPLITMIX_GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replica `ordinal` under `master_seed`: the `(ordinal + 1)`-th
/// output of a SplitMix64 generator seeded with `master_seed`.
pub fn replica_seed(master_seed: u64, ordinal: u64) -> u64 {
    splitmix_mix(master_seed.wrapping_add(SPLITMIX_GOLDEN.wrapping_mul(ordinal.wrapping_add(1))))
}

/// ChaCha12 generator on the walk's own stream (stream 0).
pub fn walk_stream(seed: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// ChaCha12 generator on an auxiliary stream of the same seed. Stream ids
/// must be nonzero to stay disjoint from the walk stream; the sweep runner
/// uses `1 + alpha_index` for late-set sampling.
pub fn aux_stream(seed: u64, stream: u64) -> ChaCha12Rng {
    debug_assert!(stream != 0, "stream 0 is reserved for the walk itself");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One step of the walk: moves ±1 in exactly one coordinate, modulo `n`.
/// `nibble` must be uniform over `0..4`.
#[inline]
pub fn next_position(current: Point, nibble: u8, n: u32) -> Point {
    let Point { mut x, mut y } = current;
    match nibble & 3 {
        0 => x = if x + 1 == n { 0 } else { x + 1 },
        1 => x = if x == 0 { n - 1 } else { x - 1 },
        2 => y = if y + 1 == n { 0 } else { y + 1 },
        _ => y = if y == 0 { n - 1 } else { y - 1 },
    }
    Point { x, y }
}

/// Buffered direction nibbles over a ChaCha12 stream: 32 two-bit nibbles
/// per 64-bit draw, least significant bits first.
pub struct DirectionStream {
    rng: ChaCha12Rng,
    buf: u64,
    left: u8,
}

impl DirectionStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: walk_stream(seed),
            buf: 0,
            left: 0,
        }
    }

    #[inline]
    pub fn next_nibble(&mut self) -> u8 {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 32;
        }
        let nib = (self.buf & 3) as u8;
        self.buf >>= 2;
        self.left -= 1;
        nib
    }
}

enum StopRule {
    Cover,
    Time(u64),
}

fn run_walk(
    cfg: &WalkConfig,
    stop: StopRule,
    observers: &mut [&mut dyn StepObserver],
) -> Result<FirstHitField, WalkError> {
    if cfg.n == 0 {
        return Err(WalkError::InvalidSide);
    }
    let n = cfg.n;
    let sites = n as usize * n as usize;
    let mut hits = vec![UNVISITED; sites];
    let mut remaining = sites;
    let mut pos = Point::ORIGIN;
    hits[pos.index(n)] = 0;
    remaining -= 1;
    for obs in observers.iter_mut() {
        obs.on_step(0, pos);
    }

    let mut stream = DirectionStream::new(cfg.seed);
    let mut t: u64 = 0;
    loop {
        match stop {
            StopRule::Cover => {
                if remaining == 0 {
                    break;
                }
            }
            StopRule::Time(limit) => {
                if t >= limit {
                    break;
                }
            }
        }
        if let Some(budget) = cfg.max_steps {
            if t >= budget {
                return Err(WalkError::BudgetExhausted(FirstHitField {
                    n,
                    seed: cfg.seed,
                    hits,
                    walk_length: t,
                    covered: remaining == 0,
                }));
            }
        }
        t += 1;
        pos = next_position(pos, stream.next_nibble(), n);
        let idx = pos.index(n);
        if hits[idx] == UNVISITED {
            hits[idx] = t;
            remaining -= 1;
        }
        if !observers.is_empty() {
            for obs in observers.iter_mut() {
                obs.on_step(t, pos);
            }
        }
    }

    Ok(FirstHitField {
        n,
        seed: cfg.seed,
        hits,
        walk_length: t,
        covered: remaining == 0,
    })
}

/// Runs until every site has been visited. The returned field has
/// `covered = true` and `walk_length` equal to the cover time.
pub fn run_to_cover(
    cfg: &WalkConfig,
    observers: &mut [&mut dyn StepObserver],
) -> Result<FirstHitField, WalkError> {
    run_walk(cfg, StopRule::Cover, observers)
}

/// Runs for exactly `t` steps. First-hit entries are finite exactly for the
/// sites visited by time `t`; truncating a longer run of the same seed to
/// `t` produces the identical field.
pub fn run_to_time(
    cfg: &WalkConfig,
    t: u64,
    observers: &mut [&mut dyn StepObserver],
) -> Result<FirstHitField, WalkError> {
    run_walk(cfg, StopRule::Time(t), observers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraparound_and_degenerate_sides() {
        // n = 5: -x from the origin wraps to x = 4.
        assert_eq!(
            next_position(Point { x: 0, y: 0 }, 1, 5),
            Point { x: 4, y: 0 }
        );
        // n = 2: both horizontal directions coincide mod 2.
        assert_eq!(
            next_position(Point { x: 0, y: 0 }, 0, 2),
            Point { x: 1, y: 0 }
        );
        assert_eq!(
            next_position(Point { x: 0, y: 0 }, 1, 2),
            Point { x: 1, y: 0 }
        );
    }

    #[test]
    fn single_site_torus_covers_instantly() {
        let field = run_to_cover(&WalkConfig::new(1, 7), &mut []).unwrap();
        assert_eq!(field.walk_length, 0);
        assert_eq!(field.hits, vec![0]);
        assert!(field.covered);
        assert_eq!(field.cover_time(), Some(0));
    }

    #[test]
    fn two_by_two_has_four_finite_entries() {
        let field = run_to_cover(&WalkConfig::new(2, 3), &mut []).unwrap();
        assert_eq!(field.hits.iter().filter(|&&h| h != UNVISITED).count(), 4);
        assert_eq!(field.hit_time(Point::ORIGIN), 0);
        assert_eq!(field.cover_time(), Some(field.walk_length));
    }

    #[test]
    fn identical_config_reproduces_identical_field() {
        let cfg = WalkConfig::new(16, 424242);
        let a = run_to_cover(&cfg, &mut []).unwrap();
        let b = run_to_cover(&cfg, &mut []).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn time_zero_run_visits_only_origin() {
        let field = run_to_time(&WalkConfig::new(8, 1), 0, &mut []).unwrap();
        assert_eq!(field.walk_length, 0);
        assert_eq!(field.unvisited_count(), 63);
        assert_eq!(field.hit_time(Point::ORIGIN), 0);
    }

    #[test]
    fn prefix_consistency_under_truncation() {
        let cfg = WalkConfig::new(12, 99);
        let long = run_to_time(&cfg, 4000, &mut []).unwrap();
        let short = run_to_time(&cfg, 2000, &mut []).unwrap();
        for (a, b) in short.hits.iter().zip(long.hits.iter()) {
            if *b <= 2000 {
                assert_eq!(a, b);
            } else {
                assert_eq!(*a, UNVISITED);
            }
        }
        // Finite-entry count is nondecreasing in t.
        assert!(short.unvisited_count() >= long.unvisited_count());
    }

    #[test]
    fn budget_error_carries_partial_field() {
        let mut cfg = WalkConfig::new(64, 5);
        cfg.max_steps = Some(100);
        match run_to_cover(&cfg, &mut []) {
            Err(WalkError::BudgetExhausted(field)) => {
                assert_eq!(field.walk_length, 100);
                assert!(!field.covered);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn observers_see_the_full_occupancy_stream() {
        struct Recorder(Vec<(u64, Point)>);
        impl StepObserver for Recorder {
            fn on_step(&mut self, time: u64, position: Point) {
                self.0.push((time, position));
            }
        }
        let mut rec = Recorder(Vec::new());
        let field = run_to_time(&WalkConfig::new(6, 11), 50, &mut [&mut rec]).unwrap();
        assert_eq!(rec.0.len(), 51);
        assert_eq!(rec.0[0], (0, Point::ORIGIN));
        // Replaying the recorded stream reproduces the first-hit field.
        let mut replay = vec![UNVISITED; 36];
        for &(t, p) in &rec.0 {
            let idx = p.index(6);
            if replay[idx] == UNVISITED {
                replay[idx] = t;
            }
        }
        assert_eq!(replay, field.hits);
        // Consecutive positions are nearest neighbors on the torus.
        for w in rec.0.windows(2) {
            let (a, b) = (w[0].1, w[1].1);
            let dx = (a.x as i64 - b.x as i64)
                .rem_euclid(6)
                .min((b.x as i64 - a.x as i64).rem_euclid(6));
            let dy = (a.y as i64 - b.y as i64)
                .rem_euclid(6)
                .min((b.y as i64 - a.y as i64).rem_euclid(6));
            assert_eq!(dx + dy, 1);
        }
    }

    #[test]
    fn replica_seeds_differ() {
        let s0 = replica_seed(42, 0);
        let s1 = replica_seed(42, 1);
        assert_ne!(s0, s1);
        assert_ne!(replica_seed(42, 0), replica_seed(43, 0));
    }
}
