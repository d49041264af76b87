//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them). Tolerances are
//! pinned here and nowhere else.
//!
//! Random inputs come from a small embedded generator so every run checks
//! the same cases.

use ebus_core::battery::{series_cell_count, BatteryPack};
use ebus_core::charging::{self, ChargeProfile};
use ebus_core::converter::ConverterSpec;
use ebus_core::depot::{self, BusState, DepotConfig, DepotEventKind};
use ebus_core::dynamics::{self};
use ebus_core::powertrain::{self, AllocationPolicy, MotorSpec};
use ebus_core::quantities::{RoadState, VehicleConfig};
use ebus_core::simulator::{city_cycle, CityCycleParams, CycleSample, DriveCycle, Simulation};

/// Deterministic xorshift generator for the randomized suites.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    /// Uniform in [lo, hi).
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + u * (hi - lo)
    }

    fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

fn check(criterion: &str, ok: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_design_chain_values() {
    let cfg = VehicleConfig::default().validate().unwrap();
    let flat = RoadState::flat();

    let rolling = dynamics::rolling_force(&cfg, &flat);
    check("1a rolling force", (rolling - 2646.0).abs() < 1e-9, &format!("{rolling} N vs 2646 N"));

    let fb = dynamics::traction_force(&cfg, cfg.top_speed_ms, cfg.max_accel_ms2, &flat).unwrap();
    check("1b aero force", (fb.aero_n - 1885.90).abs() <= 0.05, &format!("{} N vs 1885.90 N", fb.aero_n));
    check("1c net force", (fb.net_n - 12_600.0).abs() < 1e-9, &format!("{} N vs 12600 N", fb.net_n));
    check(
        "1d traction force",
        (fb.traction_n - 17_131.90).abs() <= 0.1,
        &format!("{} N vs 17131.90 N", fb.traction_n),
    );

    let p_tractive = dynamics::tractive_power(&fb, cfg.top_speed_ms);
    check(
        "1e tractive power",
        (p_tractive - 380_330.0).abs() <= 100.0,
        &format!("{:.2} kW vs 380.33 kW", p_tractive / 1000.0),
    );

    let p_motor = dynamics::required_motor_power(p_tractive, cfg.drivetrain_eff);
    check(
        "1f required motor power",
        (p_motor - 447_440.0).abs() <= 50.0,
        &format!("{:.2} kW vs 447.44 kW", p_motor / 1000.0),
    );

    let rating = dynamics::size_motor_rating(&cfg);
    check("1g selected rating", rating == 450_000.0, &format!("{} kW vs 450 kW", rating / 1000.0));
}

#[test]
fn criterion_2_battery_sizing() {
    let pack = BatteryPack::default().validate().unwrap();
    let mass = pack.pack_mass_display_kg();
    check("2a pack mass", mass == 1818, &format!("{mass} kg vs 1818 kg"));

    let conv = ConverterSpec::default();
    let cells = series_cell_count(conv.input_voltage_v, pack.cell_voltage_v);
    check("2b series cells", cells == 35, &format!("{cells} cells vs 35"));
}

#[test]
fn criterion_3_converter_link_voltage() {
    let conv = ConverterSpec::default().validate().unwrap();
    let v = conv.hv_link_voltage().unwrap();
    check(
        "3a link voltage",
        (v - 741.38).abs() <= 0.05,
        &format!("{v:.3} V vs 741.38 V (duty {:.5})", conv.duty_cycle),
    );
    check("3b link in band", conv.check_link_in_range(v), &format!("{v:.3} V within [700, 800] V"));
}

#[test]
fn criterion_4_charging_times() {
    let dt = 1.0;
    let profile = ChargeProfile::default();

    let mut pack = BatteryPack::default();
    let session = charging::charge(&mut pack, &profile, 0.0, 0.94, dt).unwrap();
    check(
        "4a fast charge to knee",
        (session.elapsed_s - 564.0).abs() <= 2.0 * dt,
        &format!("{} s vs 564 s (±{})", session.elapsed_s, 2.0 * dt),
    );

    let capped = profile.with_charger_cap(200_000.0);
    let mut pack = BatteryPack::default();
    let session = charging::charge(&mut pack, &capped, 0.0, 1.0, dt).unwrap();
    check(
        "4b 200 kW full charge",
        (session.elapsed_s - 3600.0).abs() <= 2.0 * dt,
        &format!("{} s vs 3600 s (±{})", session.elapsed_s, 2.0 * dt),
    );
    // A 200 kWh pack on a 200 kW charger cannot fill in a ~20 minute break;
    // the session report must carry a note flagging that, not reproduce the
    // figure.
    let twenty_minutes_s = 20.0 * 60.0;
    let notes = charging::session_notes(&BatteryPack::default(), &capped);
    check(
        "4c 20-minute figure flagged",
        session.elapsed_s > 2.0 * twenty_minutes_s && !notes.is_empty(),
        &format!(
            "full charge takes {} s, not ~{twenty_minutes_s} s; report note: {:?}",
            session.elapsed_s,
            notes.first()
        ),
    );
}

#[test]
fn criterion_5_property_suites() {
    let start = std::time::Instant::now();
    property_energy_ledger_and_soc_bounds();
    property_allocation_conservation_and_caps();
    property_drag_quadratic_scaling();
    property_depot_edf_and_work_conservation();
    property_charge_time_agreement();
    let elapsed = start.elapsed();
    check(
        "5f suite runtime",
        elapsed.as_secs() < 60,
        &format!("{:.2} s (target < 60 s)", elapsed.as_secs_f64()),
    );
}

/// Energy ledger closes within 1e-6 relative and soc stays in [0, 1] on 100
/// randomized cycles.
fn property_energy_ledger_and_soc_bounds() {
    let mut rng = Rng::new(0x5eed_0001);
    let sim = Simulation::default();
    for case in 0..100 {
        let n = 40 + rng.index(160);
        let mut v: f64 = 0.0;
        let mut samples = Vec::with_capacity(n);
        for k in 0..n {
            samples.push(CycleSample {
                t_s: k as f64,
                v_ms: v,
                grade_rad: 0.0,
            });
            v = (v + rng.uniform(-2.0, 2.0)).clamp(0.0, 25.0);
        }
        let cycle = DriveCycle {
            name: format!("random-{case}"),
            samples,
        };
        let mut setup = sim.clone();
        setup.pack.soc = rng.uniform(0.3, 1.0);
        let start_soc = setup.pack.soc;
        let report = match setup.run(&cycle) {
            Ok(r) => r,
            Err(ebus_core::simulator::SimError::PackDepleted { partial, .. }) => *partial,
            Err(e) => panic!("unexpected error: {e}"),
        };
        let delta_wh = setup.pack.capacity_wh * (start_soc - report.final_soc);
        let net_wh = report.energy_from_battery_wh - report.energy_regenerated_wh;
        let scale = net_wh.abs().max(1.0);
        assert!(
            (delta_wh - net_wh).abs() <= 1e-6 * scale,
            "case {case}: ledger gap {} vs scale {scale}",
            (delta_wh - net_wh).abs()
        );
        assert!((0.0..=1.0).contains(&report.final_soc));
        for step in &report.trace {
            assert!((0.0..=1.0).contains(&step.soc), "case {case}: soc {}", step.soc);
        }
    }
    check("5a energy ledger + soc bounds", true, "100 randomized cycles within 1e-6 relative");
}

/// Allocation conserves demand and respects per-motor caps on 1e5
/// randomized demands.
fn property_allocation_conservation_and_caps() {
    let mut rng = Rng::new(0x5eed_0002);
    let front = MotorSpec::front_pmsm_133kw();
    let rear = MotorSpec::rear_induction_235kw();
    let policy = AllocationPolicy::default();
    for case in 0..100_000 {
        let demand = rng.uniform(-10e6, 10e6);
        let speed = rng.uniform(0.0, 30.0);
        let accel = rng.uniform(-3.0, 3.0);
        let split = powertrain::allocate(demand, speed, accel, &front, &rear, &policy).unwrap();
        let total = split.front_mech_w + split.rear_mech_w + split.dropped_mech_w;
        assert!(
            (total - demand).abs() <= 1e-9 * demand.abs().max(1.0),
            "case {case}: conservation broke: {total} vs {demand}"
        );
        assert!(split.front_mech_w.abs() <= front.rated_power_w + 1e-9, "case {case}");
        assert!(split.rear_mech_w.abs() <= rear.rated_power_w + 1e-9, "case {case}");
        assert!(split.limited == (split.dropped_mech_w != 0.0), "case {case}");
    }
    check("5b allocation conservation + caps", true, "100000 randomized demands");
}

/// aero(2v) = 4*aero(v) within 1e-12 relative.
fn property_drag_quadratic_scaling() {
    let mut rng = Rng::new(0x5eed_0003);
    let cfg = VehicleConfig::default();
    let road = RoadState::flat();
    for _ in 0..10_000 {
        let v = rng.uniform(0.01, 60.0);
        let f1 = dynamics::aero_force(&cfg, v, &road).unwrap();
        let f2 = dynamics::aero_force(&cfg, 2.0 * v, &road).unwrap();
        assert!((f2 / f1 - 4.0).abs() <= 1e-12, "v = {v}");
    }
    check("5c drag quadratic scaling", true, "10000 random speeds within 1e-12 relative");
}

/// EDF priority, capacity limits, and work conservation hold on randomized
/// fleets of up to 20 buses, with and without a site power cap.
fn property_depot_edf_and_work_conservation() {
    let mut rng = Rng::new(0x5eed_0004);
    for case in 0..60 {
        let n = 1 + rng.index(20);
        let fleet: Vec<BusState> = (0..n)
            .map(|i| {
                let arrival = rng.uniform(0.0, 4.0 * 3600.0);
                BusState {
                    id: format!("bus-{i:02}"),
                    arrival_time_s: arrival,
                    arrival_soc: rng.uniform(0.0, 1.0),
                    departure_deadline_s: arrival + rng.uniform(600.0, 10.0 * 3600.0),
                    pack: BatteryPack::default(),
                }
            })
            .collect();
        let charger_count = 1 + rng.index(4);
        // Every third case throttles the site below its full charger bank.
        let site_power_cap_w = if case % 3 == 0 {
            Some(200_000.0 * (1 + rng.index(charger_count)) as f64)
        } else {
            None
        };
        let depot_cfg = DepotConfig {
            charger_count,
            charger_power_w: 200_000.0,
            site_power_cap_w,
            priority_rule: ebus_core::depot::PriorityRule::EarliestDeadlineFirst,
        };
        let report = depot::schedule(&fleet, &depot_cfg, &ChargeProfile::default()).unwrap();
        let again = depot::schedule(&fleet, &depot_cfg, &ChargeProfile::default()).unwrap();
        assert_eq!(report.events, again.events, "case {case}: nondeterministic");

        verify_depot_invariants(&fleet, &depot_cfg, &report, case);
    }
    check(
        "5d depot EDF + work conservation",
        true,
        "60 randomized fleets (<= 20 buses, site caps mixed in) replayed from event logs",
    );
}

/// Replays the event log and asserts, at every assignment instant: the
/// started bus had the earliest deadline among eligible waiters, the
/// concurrency limit (chargers, or fewer under a site cap) was never
/// exceeded, and no slot idled while a bus waited.
fn verify_depot_invariants(
    fleet: &[BusState],
    depot_cfg: &DepotConfig,
    report: &ebus_core::depot::DepotReport,
    case: usize,
) {
    let limit = match depot_cfg.site_power_cap_w {
        Some(cap) => ((cap / depot_cfg.charger_power_w) as usize).min(depot_cfg.charger_count),
        None => depot_cfg.charger_count,
    };
    let by_id = |id: &str| fleet.iter().find(|b| b.id == id).unwrap();
    let outcome = |id: &str| report.buses.iter().find(|b| b.id == id).unwrap();

    let starts: Vec<(&str, f64)> = report
        .events
        .iter()
        .filter(|e| e.kind == DepotEventKind::ChargeStart)
        .map(|e| (e.bus_id.as_str(), e.t_s))
        .collect();

    for &(id, t) in &starts {
        let started = by_id(id);
        // Eligible waiters at this instant: arrived, deadline ahead, not yet
        // started (or starting right now).
        for other in fleet {
            if other.id == id {
                continue;
            }
            let o = outcome(&other.id);
            let waiting = other.arrival_time_s <= t
                && other.departure_deadline_s > t
                && o.start_charge_s.is_none_or(|s| s > t);
            if waiting {
                let edf_ok = other.departure_deadline_s > started.departure_deadline_s
                    || (other.departure_deadline_s == started.departure_deadline_s
                        && other.id.as_str() > id);
                // A waiter may be bypassed only when no charger was free, so
                // equal-or-earlier deadlines passed over imply full occupancy.
                if !edf_ok {
                    let active = report
                        .buses
                        .iter()
                        .filter(|b| {
                            b.start_charge_s.is_some_and(|s| s <= t) && b.release_s > t
                        })
                        .count();
                    assert!(
                        active >= limit,
                        "case {case}: EDF violated at t = {t}: {} waited for {}",
                        other.id,
                        id
                    );
                }
            }
        }
    }

    // Capacity and work conservation at every event instant.
    for e in &report.events {
        let t = e.t_s;
        let active = report
            .buses
            .iter()
            .filter(|b| b.start_charge_s.is_some_and(|s| s <= t) && b.release_s > t)
            .count();
        assert!(
            active <= limit,
            "case {case}: {active} active at t = {t}"
        );
        let waiting = fleet
            .iter()
            .filter(|b| {
                let o = outcome(&b.id);
                b.arrival_time_s <= t
                    && b.departure_deadline_s > t
                    && o.start_charge_s.is_none_or(|s| s > t)
            })
            .count();
        if waiting > 0 {
            assert!(
                active == limit,
                "case {case}: charger idle at t = {t} with {waiting} waiting"
            );
        }
    }
}

/// Analytic and stepped charge times agree within 2*dt for dt in {0.1, 1}.
fn property_charge_time_agreement() {
    let mut rng = Rng::new(0x5eed_0005);
    for &dt in &[0.1, 1.0] {
        for case in 0..20 {
            let start = rng.uniform(0.0, 0.99);
            let cap_w = rng.uniform(100_000.0, 1_500_000.0);
            let profile = ChargeProfile::default().with_charger_cap(cap_w);
            let mut pack = BatteryPack::default();
            let session = charging::charge(&mut pack, &profile, start, 1.0, dt).unwrap();
            let analytic = charging::time_to_full(&BatteryPack::default(), &profile, start);
            assert!(
                (session.elapsed_s - analytic).abs() <= 2.0 * dt,
                "dt {dt} case {case}: stepped {} vs analytic {analytic}",
                session.elapsed_s
            );
        }
    }
    check("5e charge time agreement", true, "stepped vs analytic within 2*dt for dt in {0.1, 1}");
}

#[test]
fn criterion_6_range_on_default_city_cycle() {
    let sim = Simulation::default();
    let report = sim.run(&city_cycle(&CityCycleParams::default())).unwrap();
    let energy_per_km = report.energy_per_km_wh.expect("cycle covers distance");

    // Consumption pinned from the first oracle run of the default city
    // cycle (cross-checked against the steady-cruise hand chain, which
    // bounds it from below at ~1399 Wh/km; stop-and-go overhead raises it).
    let pinned_wh_per_km = 1862.6;
    check(
        "6a pinned consumption",
        (energy_per_km - pinned_wh_per_km).abs() <= 0.01 * pinned_wh_per_km,
        &format!("{energy_per_km:.1} Wh/km vs pinned {pinned_wh_per_km} Wh/km (±1%)"),
    );

    let range = report.projected_range_km.expect("consumption is positive");
    check(
        "6b range target",
        range >= 50.0 && report.range_target_met,
        &format!("projected {range:.1} km vs 50 km target"),
    );
}
