//! Drive-cycle time-stepping engine and design-point sizing report.
//!
//! Each cycle interval runs the chain dynamics -> allocation -> converter ->
//! battery with acceleration from forward differences and drag evaluated at
//! the midpoint speed. The battery is the single source of truth for the
//! energy ledger: every ledger figure integrates the power the pack actually
//! accepted.

use crate::battery::BatteryPack;
use crate::converter::ConverterSpec;
use crate::dynamics::{self, ForceBreakdown};
use crate::powertrain::{self, AllocationError, AllocationPolicy, MotorSpec};
use crate::quantities::{RoadState, VehicleConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CycleError {
    #[error("cycle has no samples")]
    Empty,
    #[error("cycle line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cycle sample {index}: time must increase strictly")]
    NonMonotonicTime { index: usize },
    #[error("cycle sample {index}: speed must be >= 0")]
    NegativeSpeed { index: usize },
    #[error("cycle sample {index}: values must be finite")]
    NonFinite { index: usize },
    #[error("cycle sample {index}: |grade| must be below pi/2")]
    SteepGrade { index: usize },
    #[error("cycle must start at t = 0")]
    NonZeroStart,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    /// The pack hit empty mid-cycle; the partial report covers the steps
    /// that completed.
    #[error("pack depleted at t = {t_s} s")]
    PackDepleted {
        t_s: f64,
        partial: Box<SimulationReport>,
    },
    #[error(transparent)]
    Cycle(#[from] CycleError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
}

/// One velocity sample of a drive cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSample {
    pub t_s: f64,
    pub v_ms: f64,
    /// Road grade (radians), zero when the source file has no grade column.
    #[serde(default)]
    pub grade_rad: f64,
}

/// Time-stamped velocity (and optional grade) profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveCycle {
    pub name: String,
    pub samples: Vec<CycleSample>,
}

impl DriveCycle {
    pub fn validate(&self) -> Result<(), CycleError> {
        let first = self.samples.first().ok_or(CycleError::Empty)?;
        if first.t_s != 0.0 {
            return Err(CycleError::NonZeroStart);
        }
        for (index, s) in self.samples.iter().enumerate() {
            if !(s.t_s.is_finite() && s.v_ms.is_finite() && s.grade_rad.is_finite()) {
                return Err(CycleError::NonFinite { index });
            }
            if s.v_ms < 0.0 {
                return Err(CycleError::NegativeSpeed { index });
            }
            if s.grade_rad.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(CycleError::SteepGrade { index });
            }
        }
        for (i, pair) in self.samples.windows(2).enumerate() {
            if pair[1].t_s <= pair[0].t_s {
                return Err(CycleError::NonMonotonicTime { index: i + 1 });
            }
        }
        Ok(())
    }

    /// Total cycle duration (s).
    pub fn duration_s(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t_s)
    }

    /// Peak speed over the cycle (m/s).
    pub fn max_speed_ms(&self) -> f64 {
        self.samples.iter().map(|s| s.v_ms).fold(0.0, f64::max)
    }

    /// Parse the `t_s,v_ms[,grade_deg]` CSV format. Line numbers in errors
    /// are 1-based and include the header.
    pub fn from_csv_str(name: &str, text: &str) -> Result<Self, CycleError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(CycleError::Empty)?;
        let columns: Vec<&str> = header.trim().split(',').map(str::trim).collect();
        let has_grade = match columns.as_slice() {
            ["t_s", "v_ms"] => false,
            ["t_s", "v_ms", "grade_deg"] => true,
            _ => {
                return Err(CycleError::Parse {
                    line: 1,
                    reason: format!("expected header 't_s,v_ms[,grade_deg]', got '{header}'"),
                })
            }
        };
        let mut samples = Vec::new();
        for (idx, raw) in lines {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let expected = if has_grade { 3 } else { 2 };
            if fields.len() != expected {
                return Err(CycleError::Parse {
                    line,
                    reason: format!("expected {expected} fields, got {}", fields.len()),
                });
            }
            let parse = |field: &str, what: &str| -> Result<f64, CycleError> {
                field.parse::<f64>().map_err(|e| CycleError::Parse {
                    line,
                    reason: format!("bad {what} '{field}': {e}"),
                })
            };
            samples.push(CycleSample {
                t_s: parse(fields[0], "t_s")?,
                v_ms: parse(fields[1], "v_ms")?,
                grade_rad: if has_grade {
                    parse(fields[2], "grade_deg")?.to_radians()
                } else {
                    0.0
                },
            });
        }
        let cycle = Self {
            name: name.to_string(),
            samples,
        };
        cycle.validate()?;
        Ok(cycle)
    }

    /// Render back to the CSV interchange format.
    pub fn to_csv_string(&self) -> String {
        let has_grade = self.samples.iter().any(|s| s.grade_rad != 0.0);
        let mut out = String::from(if has_grade {
            "t_s,v_ms,grade_deg\n"
        } else {
            "t_s,v_ms\n"
        });
        for s in &self.samples {
            if has_grade {
                out.push_str(&format!("{},{},{}\n", s.t_s, s.v_ms, s.grade_rad.to_degrees()));
            } else {
                out.push_str(&format!("{},{}\n", s.t_s, s.v_ms));
            }
        }
        out
    }
}

/// Parameters of the synthetic stop-and-go city cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CityCycleParams {
    /// Cruise speed between stops (m/s).
    pub cruise_speed_ms: f64,
    /// Distance from stop to stop (m).
    pub stop_spacing_m: f64,
    /// Acceleration and deceleration magnitude (m/s^2).
    pub accel_ms2: f64,
    /// Standstill time at each stop (s).
    pub dwell_s: f64,
    /// Number of stop-to-stop segments.
    pub segments: u32,
    /// Sampling interval (s).
    pub sample_dt_s: f64,
}

impl Default for CityCycleParams {
    /// 50 km/h cruise, a stop every 500 m, design acceleration both ways.
    fn default() -> Self {
        Self {
            cruise_speed_ms: 13.89,
            stop_spacing_m: 500.0,
            accel_ms2: 0.7,
            dwell_s: 10.0,
            segments: 10,
            sample_dt_s: 1.0,
        }
    }
}

/// Build the synthetic city cycle: accelerate, cruise, brake, dwell,
/// repeated per segment and sampled at a fixed interval.
pub fn city_cycle(params: &CityCycleParams) -> DriveCycle {
    let v = params.cruise_speed_ms;
    let a = params.accel_ms2;
    let t_ramp = v / a;
    let d_ramp = v * v / (2.0 * a);
    let d_cruise = (params.stop_spacing_m - 2.0 * d_ramp).max(0.0);
    let t_cruise = d_cruise / v;
    let t_segment = 2.0 * t_ramp + t_cruise + params.dwell_s;
    let total_s = t_segment * params.segments as f64;

    let speed_at = |t: f64| -> f64 {
        let tau = t % t_segment;
        if tau < t_ramp {
            a * tau
        } else if tau < t_ramp + t_cruise {
            v
        } else if tau < 2.0 * t_ramp + t_cruise {
            (v - a * (tau - t_ramp - t_cruise)).max(0.0)
        } else {
            0.0
        }
    };

    let steps = (total_s / params.sample_dt_s).ceil() as usize;
    let samples = (0..=steps)
        .map(|k| {
            let t = k as f64 * params.sample_dt_s;
            CycleSample {
                t_s: t,
                v_ms: if t >= total_s { 0.0 } else { speed_at(t) },
                grade_rad: 0.0,
            }
        })
        .collect();
    DriveCycle {
        name: "city-stop-and-go".to_string(),
        samples,
    }
}

/// Per-interval record of the simulation chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub t_s: f64,
    pub v_ms: f64,
    pub accel_ms2: f64,
    pub rolling_n: f64,
    pub aero_n: f64,
    pub net_n: f64,
    pub traction_n: f64,
    pub front_mech_w: f64,
    pub rear_mech_w: f64,
    /// Battery terminal power the pack accepted (+discharge).
    pub batt_power_w: f64,
    pub soc: f64,
}

/// Aggregates and trace of one simulated cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub cycle_name: String,
    /// Gross energy drawn from the pack (Wh).
    pub energy_from_battery_wh: f64,
    /// Energy returned to the pack by regeneration (Wh).
    pub energy_regenerated_wh: f64,
    /// Braking energy shed as heat: wheel-side power the motors could not
    /// absorb plus battery-side charge power the pack refused (Wh).
    pub energy_dropped_friction_wh: f64,
    pub distance_km: f64,
    /// Net battery energy per distance (Wh/km); absent for zero-distance cycles.
    pub energy_per_km_wh: Option<f64>,
    pub final_soc: f64,
    /// Range supported by the usable soc window at the observed consumption
    /// (km); absent when consumption is zero or negative.
    pub projected_range_km: Option<f64>,
    pub range_target_met: bool,
    /// Set when the run halted early with an empty pack.
    pub pack_depleted_at_s: Option<f64>,
    pub trace: Vec<StepTrace>,
}

/// A vehicle, its powertrain, and run settings bound together for cycle runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub vehicle: VehicleConfig,
    pub front_motor: MotorSpec,
    pub rear_motor: MotorSpec,
    pub pack: BatteryPack,
    pub converter: ConverterSpec,
    pub policy: AllocationPolicy,
    /// Constant hotel load drawn battery-side (W).
    pub aux_load_w: f64,
    /// Fraction of capacity held back in range projections.
    pub reserve_floor_soc: f64,
}

impl Default for Simulation {
    fn default() -> Self {
        Self {
            vehicle: VehicleConfig::default(),
            front_motor: MotorSpec::front_pmsm_133kw(),
            rear_motor: MotorSpec::rear_induction_235kw(),
            pack: BatteryPack::default(),
            converter: ConverterSpec::default(),
            policy: AllocationPolicy::default(),
            aux_load_w: 8000.0,
            reserve_floor_soc: 0.05,
        }
    }
}

impl Simulation {
    /// Integrate the cycle. The configured pack is cloned, so a simulation
    /// value can run any number of cycles.
    pub fn run(&self, cycle: &DriveCycle) -> Result<SimulationReport, SimError> {
        cycle.validate()?;
        let mut pack = self.pack.clone();
        let cfg = &self.vehicle;
        let mut report = SimulationReport {
            cycle_name: cycle.name.clone(),
            energy_from_battery_wh: 0.0,
            energy_regenerated_wh: 0.0,
            energy_dropped_friction_wh: 0.0,
            distance_km: 0.0,
            energy_per_km_wh: None,
            final_soc: pack.soc,
            projected_range_km: None,
            range_target_met: false,
            pack_depleted_at_s: None,
            trace: Vec::with_capacity(cycle.samples.len().saturating_sub(1)),
        };
        let mut distance_m = 0.0;

        for pair in cycle.samples.windows(2) {
            let (s0, s1) = (pair[0], pair[1]);
            let dt = s1.t_s - s0.t_s;
            let accel = (s1.v_ms - s0.v_ms) / dt;
            let v_mid = 0.5 * (s0.v_ms + s1.v_ms);
            let road = RoadState {
                grade_rad: s0.grade_rad,
                headwind_ms: 0.0,
            };
            let fb: ForceBreakdown = dynamics::traction_force(cfg, v_mid, accel, &road)?;
            let wheel_w = dynamics::tractive_power(&fb, v_mid);
            let mech_w = dynamics::required_motor_power(wheel_w, cfg.drivetrain_eff);
            let split = powertrain::allocate(
                mech_w,
                v_mid,
                accel,
                &self.front_motor,
                &self.rear_motor,
                &self.policy,
            )?;
            let batt_traction_w = self.converter.battery_side_power(split.link_power_w());
            let requested_w = batt_traction_w + self.aux_load_w;
            let accepted_w = pack.step(requested_w, dt);

            let step_wh = |p: f64| p * dt / 3600.0;
            if accepted_w >= 0.0 {
                report.energy_from_battery_wh += step_wh(accepted_w);
            } else {
                report.energy_regenerated_wh += step_wh(-accepted_w);
            }
            // Friction ledger: unabsorbed braking power at the wheels, plus
            // regen the pack refused.
            report.energy_dropped_friction_wh += step_wh((-split.dropped_mech_w).max(0.0));
            if requested_w < accepted_w {
                report.energy_dropped_friction_wh += step_wh(accepted_w - requested_w);
            }
            distance_m += v_mid * dt;

            report.trace.push(StepTrace {
                t_s: s0.t_s,
                v_ms: s0.v_ms,
                accel_ms2: accel,
                rolling_n: fb.rolling_n,
                aero_n: fb.aero_n,
                net_n: fb.net_n,
                traction_n: fb.traction_n,
                front_mech_w: split.front_mech_w,
                rear_mech_w: split.rear_mech_w,
                batt_power_w: accepted_w,
                soc: pack.soc,
            });

            // Depleted: the pack could not serve a discharge request and its
            // soc is at (or within rounding dust of) empty.
            if requested_w - accepted_w > 1e-9 && pack.soc < 1e-12 {
                report.pack_depleted_at_s = Some(s1.t_s);
                break;
            }
        }

        report.distance_km = distance_m / 1000.0;
        report.final_soc = pack.soc;
        if report.distance_km > 0.0 {
            let net_wh = report.energy_from_battery_wh - report.energy_regenerated_wh;
            let per_km = net_wh / report.distance_km;
            report.energy_per_km_wh = Some(per_km);
            if per_km > 0.0 {
                let range = projected_range_km(per_km, &self.pack, self.reserve_floor_soc);
                report.range_target_met = range >= cfg.operating_range_target_km;
                report.projected_range_km = Some(range);
            } else {
                // Net-regenerative cycle: range is unbounded at this consumption.
                report.range_target_met = true;
            }
        }

        match report.pack_depleted_at_s {
            Some(t_s) => Err(SimError::PackDepleted {
                t_s,
                partial: Box::new(report),
            }),
            None => Ok(report),
        }
    }
}

/// Range supported by the usable soc window (full down to the reserve
/// floor) at a given consumption.
pub fn projected_range_km(energy_per_km_wh: f64, pack: &BatteryPack, reserve_floor_soc: f64) -> f64 {
    pack.capacity_wh * (1.0 - reserve_floor_soc) / energy_per_km_wh
}

// Reference design values for the default configuration, used by the sizing
// report to flag regressions.
const REFERENCE_ROLLING_N: f64 = 2646.0;
const REFERENCE_AERO_N: f64 = 1885.90;
const REFERENCE_NET_N: f64 = 12_600.0;
const REFERENCE_TRACTION_N: f64 = 17_131.90;
const REFERENCE_TRACTIVE_KW: f64 = 380.33;
const REFERENCE_MOTOR_KW: f64 = 447.44;
const REFERENCE_RATING_KW: f64 = 450.0;
const REFERENCE_PACK_MASS_KG: f64 = 1818.0;
const REFERENCE_SERIES_CELLS: f64 = 35.0;
const REFERENCE_LINK_V: f64 = 741.38;
const EXACT_TOL: f64 = 1e-6;

/// One sizing figure compared against its reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCheck {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
    /// False when the inputs differ from the reference configuration, in
    /// which case the expected value does not apply.
    pub applicable: bool,
    /// Pass/fail for applicable checks, absent otherwise.
    pub pass: Option<bool>,
}

impl DesignCheck {
    fn new(name: &str, computed: f64, expected: f64, tolerance: f64, applicable: bool) -> Self {
        Self {
            name: name.to_string(),
            computed,
            expected,
            tolerance,
            applicable,
            pass: applicable.then(|| (computed - expected).abs() <= tolerance),
        }
    }
}

/// Sizing chain outcome: every design figure, checked where applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingReport {
    pub checks: Vec<DesignCheck>,
    /// Link voltage falls inside the converter's target band.
    pub link_in_target_band: bool,
    pub all_applicable_pass: bool,
}

impl SizingReport {
    /// Plain-text table for terminal output.
    pub fn to_table_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<26} {:>14} {:>14} {:>11} {}\n",
            "check", "computed", "expected", "tolerance", "status"
        ));
        for c in &self.checks {
            let status = match c.pass {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "n/a",
            };
            out.push_str(&format!(
                "{:<26} {:>14.4} {:>14.4} {:>11.4} {}\n",
                c.name, c.computed, c.expected, c.tolerance, status
            ));
        }
        out.push_str(&format!(
            "link in target band: {}\nall applicable checks pass: {}\n",
            if self.link_in_target_band { "yes" } else { "no" },
            if self.all_applicable_pass { "yes" } else { "no" }
        ));
        out
    }
}

/// Evaluate the full sizing chain (forces, powers, rating, pack mass, cell
/// count, link voltage) and compare each figure against the reference design
/// where the inputs still match it.
pub fn sizing_report(
    cfg: &VehicleConfig,
    front: &MotorSpec,
    rear: &MotorSpec,
    pack: &BatteryPack,
    converter: &ConverterSpec,
) -> SizingReport {
    let _ = (front, rear); // motor envelopes do not enter the sizing chain
    let flat = RoadState::flat();
    let reference = VehicleConfig::default();
    let reference_pack = BatteryPack::default();
    let reference_conv = ConverterSpec::default();

    let rolling_applicable = cfg.rolling_coeff == reference.rolling_coeff
        && cfg.sim_mass_kg == reference.sim_mass_kg
        && cfg.gravity_ms2 == reference.gravity_ms2;
    let aero_applicable = cfg.drag_coeff == reference.drag_coeff
        && cfg.frontal_area_m2 == reference.frontal_area_m2
        && cfg.air_density_kgm3 == reference.air_density_kgm3
        && cfg.top_speed_ms == reference.top_speed_ms;
    let net_applicable =
        cfg.sim_mass_kg == reference.sim_mass_kg && cfg.max_accel_ms2 == reference.max_accel_ms2;
    let chain_applicable = rolling_applicable && aero_applicable && net_applicable;
    let motor_applicable = chain_applicable && cfg.drivetrain_eff == reference.drivetrain_eff;

    let rolling = dynamics::rolling_force(cfg, &flat);
    let fb = dynamics::traction_force(cfg, cfg.top_speed_ms, cfg.max_accel_ms2, &flat)
        .expect("flat road cannot fail");
    let p_tractive = dynamics::tractive_power(&fb, cfg.top_speed_ms);
    let p_motor = dynamics::required_motor_power(p_tractive, cfg.drivetrain_eff);
    let rating = dynamics::size_motor_rating(cfg);

    let pack_applicable = pack.capacity_wh == reference_pack.capacity_wh
        && pack.specific_energy_wh_per_kg == reference_pack.specific_energy_wh_per_kg;
    let cells_applicable = converter.input_voltage_v == reference_conv.input_voltage_v
        && pack.cell_voltage_v == reference_pack.cell_voltage_v;
    let link_applicable = converter.input_voltage_v == reference_conv.input_voltage_v
        && converter.turns_ratio == reference_conv.turns_ratio
        && (converter.duty_cycle - reference_conv.duty_cycle).abs() < 1e-12;

    let link_v = converter.hv_link_voltage().unwrap_or(f64::NAN);
    let cells = crate::battery::series_cell_count(converter.input_voltage_v, pack.cell_voltage_v);

    let checks = vec![
        DesignCheck::new("rolling_force_n", rolling, REFERENCE_ROLLING_N, EXACT_TOL, rolling_applicable),
        DesignCheck::new("aero_force_n", fb.aero_n, REFERENCE_AERO_N, 0.05, aero_applicable),
        DesignCheck::new("net_force_n", fb.net_n, REFERENCE_NET_N, EXACT_TOL, net_applicable),
        DesignCheck::new("traction_force_n", fb.traction_n, REFERENCE_TRACTION_N, 0.1, chain_applicable),
        DesignCheck::new("tractive_power_kw", p_tractive / 1000.0, REFERENCE_TRACTIVE_KW, 0.1, chain_applicable),
        DesignCheck::new("required_motor_power_kw", p_motor / 1000.0, REFERENCE_MOTOR_KW, 0.05, motor_applicable),
        DesignCheck::new("selected_rating_kw", rating / 1000.0, REFERENCE_RATING_KW, EXACT_TOL, motor_applicable),
        DesignCheck::new("pack_mass_kg", pack.pack_mass_display_kg() as f64, REFERENCE_PACK_MASS_KG, EXACT_TOL, pack_applicable),
        DesignCheck::new("series_cell_count", cells as f64, REFERENCE_SERIES_CELLS, EXACT_TOL, cells_applicable),
        DesignCheck::new("hv_link_voltage_v", link_v, REFERENCE_LINK_V, 0.05, link_applicable),
    ];
    let all_applicable_pass = checks.iter().all(|c| c.pass != Some(false));
    SizingReport {
        checks,
        link_in_target_band: converter.check_link_in_range(link_v),
        all_applicable_pass,
    }
}
