//! Simulation and sizing toolkit for battery-electric city buses.
//!
//! The crate covers the design chain of a dual-motor electric bus end to
//! end: longitudinal dynamics and motor sizing ([`dynamics`]), part-time AWD
//! power allocation ([`powertrain`]), an energy-reservoir battery pack
//! ([`battery`]), the battery-to-link DC-DC stage ([`converter`]),
//! fast-charge sessions ([`charging`]), overnight depot scheduling
//! ([`depot`]), and a drive-cycle simulator tying the chain together
//! ([`simulator`]).
//!
//! Everything is deterministic: identical inputs produce identical outputs,
//! bit for bit. Components are immutable after validation and safe to share
//! across concurrently running scenarios; mutable state (a pack's state of
//! charge) stays inside each run.

pub mod battery;
pub mod charging;
pub mod converter;
pub mod depot;
pub mod dynamics;
pub mod powertrain;
pub mod quantities;
pub mod simulator;

pub use battery::{BatteryPack, PowerDirection};
pub use charging::{ChargeProfile, ChargeSession, TaperShape};
pub use converter::ConverterSpec;
pub use depot::{BusState, DepotConfig, DepotReport, PriorityRule};
pub use dynamics::ForceBreakdown;
pub use powertrain::{AllocationPolicy, MotorSpec, PowerSplit};
pub use quantities::{RoadState, VehicleConfig};
pub use simulator::{
    city_cycle, sizing_report, CityCycleParams, DriveCycle, Simulation, SimulationReport,
    SizingReport,
};
