//! JSON serialization of excursion event logs and ledgers.
//!
//! Field names are part of the analyze interface: events carry
//! `{kind, circle|level, outward, time}`, ledgers carry the schedule radii,
//! targets, per-level completion rows and final counts.

use latewalk_core::excursions::{ExcursionEvent, ExcursionLedger};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventDto {
    Crossing {
        circle: usize,
        outward: bool,
        time: u64,
    },
    Completed {
        level: usize,
        time: u64,
    },
    CenterVisit {
        time: u64,
    },
}

impl From<&ExcursionEvent> for EventDto {
    fn from(e: &ExcursionEvent) -> Self {
        match *e {
            ExcursionEvent::Crossing {
                circle,
                outward,
                time,
            } => EventDto::Crossing {
                circle,
                outward,
                time,
            },
            ExcursionEvent::Completed { level, time } => EventDto::Completed { level, time },
            ExcursionEvent::CenterVisit { time } => EventDto::CenterVisit { time },
        }
    }
}

impl From<&EventDto> for ExcursionEvent {
    fn from(e: &EventDto) -> Self {
        match *e {
            EventDto::Crossing {
                circle,
                outward,
                time,
            } => ExcursionEvent::Crossing {
                circle,
                outward,
                time,
            },
            EventDto::Completed { level, time } => ExcursionEvent::Completed { level, time },
            EventDto::CenterVisit { time } => ExcursionEvent::CenterVisit { time },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerRowDto {
    pub level: usize,
    pub completion_time: u64,
    /// Counts per level `1..=L` frozen at the completion time.
    pub counts: Vec<u64>,
    pub center_visits: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedgerDto {
    pub n: u32,
    pub center: [u32; 2],
    /// Schedule radii `r_0..=r_L`.
    pub radii: Vec<f64>,
    /// Real-valued targets per level `1..=L`.
    pub targets: Vec<f64>,
    /// One row per completed level target, ascending level.
    pub rows: Vec<LedgerRowDto>,
    /// Counts per level `1..=L` at the end of the walk.
    pub final_counts: Vec<u64>,
    pub final_center_visits: u64,
}

impl LedgerDto {
    pub fn from_ledger(ledger: &ExcursionLedger, radii: Vec<f64>) -> Self {
        let levels = ledger.levels();
        let rows = (1..=levels)
            .filter_map(|level| {
                ledger.completion_time(level).map(|t| LedgerRowDto {
                    level,
                    completion_time: t,
                    counts: (1..=levels)
                        .map(|l| ledger.count(level, l).unwrap())
                        .collect(),
                    center_visits: ledger.center_visits_before(level).unwrap(),
                })
            })
            .collect();
        LedgerDto {
            n: ledger.n,
            center: [ledger.center.x, ledger.center.y],
            radii,
            targets: ledger.targets[1..].to_vec(),
            rows,
            final_counts: ledger.final_counts[1..].to_vec(),
            final_center_visits: ledger.final_center_visits,
        }
    }
}

pub fn events_to_json(events: &[ExcursionEvent]) -> serde_json::Result<String> {
    let dtos: Vec<EventDto> = events.iter().map(EventDto::from).collect();
    serde_json::to_string_pretty(&dtos)
}

pub fn events_from_json(text: &str) -> serde_json::Result<Vec<ExcursionEvent>> {
    let dtos: Vec<EventDto> = serde_json::from_str(text)?;
    Ok(dtos.iter().map(ExcursionEvent::from).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_round_trip() {
        let events = vec![
            ExcursionEvent::Crossing {
                circle: 2,
                outward: true,
                time: 17,
            },
            ExcursionEvent::Completed { level: 2, time: 17 },
            ExcursionEvent::CenterVisit { time: 30 },
        ];
        let json = events_to_json(&events).unwrap();
        assert!(json.contains("\"kind\": \"crossing\""));
        let back = events_from_json(&json).unwrap();
        assert_eq!(back, events);
    }
}
