//! Overnight depot charging: a fleet, a limited bank of chargers, and an
//! earliest-deadline-first queue.
//!
//! The schedule is event-driven on exact session timings from the charging
//! module, so no time stepping is involved. A bus keeps its charger until it
//! is full or its departure deadline arrives, whichever comes first; there is
//! no preemption. A site power cap defers plug-ins rather than derating
//! running sessions.

use crate::battery::BatteryPack;
use crate::charging::{self, ChargeProfile};
use crate::quantities::{non_negative, positive};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DepotError {
    #[error("invalid depot config: {field}: {reason}")]
    InvalidDepot {
        field: &'static str,
        reason: &'static str,
    },
    /// The site cap cannot power even one charger.
    #[error("infeasible depot: site power cap {site_power_cap_w} W below one charger ({charger_power_w} W)")]
    InfeasibleConfig {
        site_power_cap_w: f64,
        charger_power_w: f64,
    },
    #[error("fleet is empty")]
    EmptyFleet,
    #[error("invalid bus {id}: {reason}")]
    InvalidBus { id: String, reason: &'static str },
}

/// One bus waiting for (or receiving) an overnight charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusState {
    pub id: String,
    /// Seconds since scenario start.
    pub arrival_time_s: f64,
    pub arrival_soc: f64,
    /// Seconds since scenario start; must be after arrival.
    pub departure_deadline_s: f64,
    pub pack: BatteryPack,
}

impl BusState {
    pub fn validate(&self) -> Result<(), DepotError> {
        if !non_negative(self.arrival_time_s) {
            return Err(DepotError::InvalidBus {
                id: self.id.clone(),
                reason: "arrival_time_s must be >= 0",
            });
        }
        let deadline_ok = self.departure_deadline_s.is_finite()
            && self.departure_deadline_s > self.arrival_time_s;
        if !deadline_ok {
            return Err(DepotError::InvalidBus {
                id: self.id.clone(),
                reason: "departure_deadline_s must exceed arrival_time_s",
            });
        }
        if !(0.0..=1.0).contains(&self.arrival_soc) {
            return Err(DepotError::InvalidBus {
                id: self.id.clone(),
                reason: "arrival_soc must be in [0, 1]",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorityRule {
    EarliestDeadlineFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepotConfig {
    pub charger_count: usize,
    /// Per-charger output (W).
    pub charger_power_w: f64,
    /// Total simultaneous draw allowed at the site (W), if the grid
    /// connection is the bottleneck.
    pub site_power_cap_w: Option<f64>,
    pub priority_rule: PriorityRule,
}

impl Default for DepotConfig {
    fn default() -> Self {
        Self {
            charger_count: 1,
            charger_power_w: 200_000.0,
            site_power_cap_w: None,
            priority_rule: PriorityRule::EarliestDeadlineFirst,
        }
    }
}

impl DepotConfig {
    pub fn validate(self) -> Result<Self, DepotError> {
        if self.charger_count < 1 {
            return Err(DepotError::InvalidDepot {
                field: "charger_count",
                reason: "must be >= 1",
            });
        }
        if !positive(self.charger_power_w) {
            return Err(DepotError::InvalidDepot {
                field: "charger_power_w",
                reason: "must be > 0",
            });
        }
        if let Some(cap) = self.site_power_cap_w {
            if cap < self.charger_power_w {
                return Err(DepotError::InfeasibleConfig {
                    site_power_cap_w: cap,
                    charger_power_w: self.charger_power_w,
                });
            }
        }
        Ok(self)
    }

    /// Sessions that may run at once: charger count, further limited by the
    /// site cap in whole chargers.
    fn concurrency_limit(&self) -> usize {
        match self.site_power_cap_w {
            Some(cap) => ((cap / self.charger_power_w) as usize).min(self.charger_count),
            None => self.charger_count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepotEventKind {
    Arrival,
    ChargeStart,
    ChargeComplete,
    DeadlineRelease,
}

/// One entry of the deterministic event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepotEvent {
    pub t_s: f64,
    pub bus_id: String,
    pub kind: DepotEventKind,
    /// State of charge at the event instant.
    pub soc: f64,
}

/// Per-bus outcome of the night.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusOutcome {
    pub id: String,
    pub start_charge_s: Option<f64>,
    /// Time spent waiting for a plug (s).
    pub wait_s: f64,
    pub release_s: f64,
    pub final_soc: f64,
    pub charged_full: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepotReport {
    pub buses: Vec<BusOutcome>,
    /// Busy charger-seconds over available charger-seconds across the
    /// scenario window (start to latest deadline).
    pub charger_utilization: f64,
    /// True iff every bus reached full charge by its deadline.
    pub feasible: bool,
    pub events: Vec<DepotEvent>,
}

/// Internal per-bus scheduling state.
struct Slot {
    bus: BusState,
    start_charge_s: Option<f64>,
    release_s: Option<f64>,
    final_soc: f64,
}

/// Run the overnight schedule for a fleet.
///
/// When a charger (and site headroom) is free, the waiting bus with the
/// earliest departure deadline plugs in, ties broken by bus id. The event
/// log is totally ordered and reproducible for identical inputs.
pub fn schedule(
    fleet: &[BusState],
    depot: &DepotConfig,
    profile: &ChargeProfile,
) -> Result<DepotReport, DepotError> {
    if fleet.is_empty() {
        return Err(DepotError::EmptyFleet);
    }
    let depot = depot.clone().validate()?;
    for bus in fleet {
        bus.validate()?;
    }
    let session_profile = profile.with_charger_cap(depot.charger_power_w);
    let limit = depot.concurrency_limit();

    let mut slots: Vec<Slot> = fleet
        .iter()
        .map(|bus| Slot {
            bus: bus.clone(),
            start_charge_s: None,
            release_s: None,
            final_soc: bus.arrival_soc,
        })
        .collect();
    let mut events: Vec<DepotEvent> = Vec::new();

    // Timeline of moments when the pool may change: arrivals plus session
    // releases discovered as they are scheduled.
    let mut pending_times: Vec<f64> = slots.iter().map(|s| s.bus.arrival_time_s).collect();
    pending_times.sort_by(f64::total_cmp);
    pending_times.dedup();

    for slot in &slots {
        events.push(DepotEvent {
            t_s: slot.bus.arrival_time_s,
            bus_id: slot.bus.id.clone(),
            kind: DepotEventKind::Arrival,
            soc: slot.bus.arrival_soc,
        });
    }

    while let Some(now) = pending_times.first().copied() {
        pending_times.remove(0);

        let active = slots
            .iter()
            .filter(|s| {
                s.start_charge_s.is_some() && s.release_s.is_some_and(|r| r > now)
            })
            .count();
        let mut free = limit.saturating_sub(active);

        loop {
            if free == 0 {
                break;
            }
            // Waiting pool: arrived, not yet departed, never plugged in.
            let next = slots
                .iter_mut()
                .filter(|s| {
                    s.start_charge_s.is_none()
                        && s.bus.arrival_time_s <= now
                        && s.bus.departure_deadline_s > now
                })
                .min_by(|a, b| {
                    f64::total_cmp(&a.bus.departure_deadline_s, &b.bus.departure_deadline_s)
                        .then_with(|| a.bus.id.cmp(&b.bus.id))
                });
            let Some(slot) = next else { break };

            let full_in_s =
                charging::time_to_full(&slot.bus.pack, &session_profile, slot.bus.arrival_soc);
            let (release, soc, kind) = if full_in_s == 0.0 {
                (now, slot.bus.arrival_soc, DepotEventKind::ChargeComplete)
            } else if now + full_in_s <= slot.bus.departure_deadline_s {
                (now + full_in_s, 1.0, DepotEventKind::ChargeComplete)
            } else {
                let held_s = slot.bus.departure_deadline_s - now;
                let soc = charging::soc_after(
                    &slot.bus.pack,
                    &session_profile,
                    slot.bus.arrival_soc,
                    held_s,
                );
                (slot.bus.departure_deadline_s, soc, DepotEventKind::DeadlineRelease)
            };

            slot.start_charge_s = Some(now);
            slot.release_s = Some(release);
            slot.final_soc = soc;
            events.push(DepotEvent {
                t_s: now,
                bus_id: slot.bus.id.clone(),
                kind: DepotEventKind::ChargeStart,
                soc: slot.bus.arrival_soc,
            });
            events.push(DepotEvent {
                t_s: release,
                bus_id: slot.bus.id.clone(),
                kind,
                soc,
            });
            if release > now {
                free -= 1;
                if !pending_times.contains(&release) {
                    let idx = pending_times
                        .iter()
                        .position(|t| *t > release)
                        .unwrap_or(pending_times.len());
                    pending_times.insert(idx, release);
                }
            }
        }
    }

    // Buses whose deadline passed while they were still queued.
    for slot in &mut slots {
        if slot.start_charge_s.is_none() {
            slot.release_s = Some(slot.bus.departure_deadline_s);
            events.push(DepotEvent {
                t_s: slot.bus.departure_deadline_s,
                bus_id: slot.bus.id.clone(),
                kind: DepotEventKind::DeadlineRelease,
                soc: slot.final_soc,
            });
        }
    }

    events.sort_by(|a, b| {
        f64::total_cmp(&a.t_s, &b.t_s)
            .then_with(|| event_rank(a.kind).cmp(&event_rank(b.kind)))
            .then_with(|| a.bus_id.cmp(&b.bus_id))
    });

    // Scenario window runs from t = 0 to the latest departure.
    let horizon_end = fleet
        .iter()
        .map(|b| b.departure_deadline_s)
        .fold(0.0, f64::max);
    let available = depot.charger_count as f64 * horizon_end;
    let busy: f64 = slots
        .iter()
        .filter_map(|s| Some(s.release_s? - s.start_charge_s?))
        .sum();
    let utilization = if available > 0.0 { busy / available } else { 0.0 };

    let mut feasible = true;
    let buses: Vec<BusOutcome> = slots
        .iter()
        .map(|s| {
            let charged_full = s.final_soc >= 1.0 - 1e-9;
            let release = s.release_s.unwrap_or(s.bus.departure_deadline_s);
            feasible &= charged_full && release <= s.bus.departure_deadline_s;
            // A bus that never plugged in waited out its whole stay.
            let wait_s = s
                .start_charge_s
                .unwrap_or(s.bus.departure_deadline_s)
                - s.bus.arrival_time_s;
            BusOutcome {
                id: s.bus.id.clone(),
                start_charge_s: s.start_charge_s,
                wait_s,
                release_s: release,
                final_soc: s.final_soc,
                charged_full,
            }
        })
        .collect();

    Ok(DepotReport {
        buses,
        charger_utilization: utilization,
        feasible,
        events,
    })
}

fn event_rank(kind: DepotEventKind) -> u8 {
    match kind {
        DepotEventKind::Arrival => 0,
        DepotEventKind::ChargeComplete => 1,
        DepotEventKind::DeadlineRelease => 2,
        DepotEventKind::ChargeStart => 3,
    }
}
