//! JSON configuration: builtin defaults, file overlay, and `--set` overrides.
//!
//! The effective configuration is built in three layers: serialize the
//! builtin defaults, deep-merge the user's JSON file over them (objects merge
//! by key, everything else replaces), then apply `--set key=value` overrides.
//! Human-friendly alternates (`*_kmh` speeds, a converter link setpoint) are
//! resolved after merging, so sparse config files stay sparse.

use anyhow::{anyhow, bail, Context, Result};
use ebus_core::battery::BatteryPack;
use ebus_core::charging::{ChargeProfile, TaperShape};
use ebus_core::converter::{duty_for_link_voltage, ConverterSpec};
use ebus_core::depot::DepotConfig;
use ebus_core::powertrain::{AllocationPolicy, MotorSpec};
use ebus_core::quantities::{kmh_to_ms, VehicleConfig};
use ebus_core::simulator::{CityCycleParams, Simulation};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

/// Section order used to resolve bare `--set` keys.
const SECTIONS: [&str; 8] = [
    "vehicle", "motors", "pack", "converter", "policy", "charging", "depot", "sim",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VehicleSection {
    pub curb_mass_kg: f64,
    pub payload_mass_kg: f64,
    pub sim_mass_kg: f64,
    pub frontal_area_m2: f64,
    pub drag_coeff: f64,
    pub rolling_coeff: f64,
    pub gravity_ms2: f64,
    pub air_density_kgm3: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_speed_ms: Option<f64>,
    /// Takes precedence over `top_speed_ms` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_speed_kmh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_speed_ms: Option<f64>,
    /// Takes precedence over `avg_speed_ms` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_speed_kmh: Option<f64>,
    pub max_accel_ms2: f64,
    pub drivetrain_eff: f64,
    pub operating_range_target_km: f64,
}

impl VehicleSection {
    fn resolve(&self) -> Result<VehicleConfig> {
        let top_speed_ms = match (self.top_speed_kmh, self.top_speed_ms) {
            (Some(kmh), _) => kmh_to_ms(kmh),
            (None, Some(ms)) => ms,
            (None, None) => bail!("vehicle: one of top_speed_ms or top_speed_kmh is required"),
        };
        let avg_speed_ms = match (self.avg_speed_kmh, self.avg_speed_ms) {
            (Some(kmh), _) => kmh_to_ms(kmh),
            (None, Some(ms)) => ms,
            (None, None) => bail!("vehicle: one of avg_speed_ms or avg_speed_kmh is required"),
        };
        Ok(VehicleConfig {
            curb_mass_kg: self.curb_mass_kg,
            payload_mass_kg: self.payload_mass_kg,
            sim_mass_kg: self.sim_mass_kg,
            frontal_area_m2: self.frontal_area_m2,
            drag_coeff: self.drag_coeff,
            rolling_coeff: self.rolling_coeff,
            gravity_ms2: self.gravity_ms2,
            air_density_kgm3: self.air_density_kgm3,
            top_speed_ms,
            avg_speed_ms,
            max_accel_ms2: self.max_accel_ms2,
            drivetrain_eff: self.drivetrain_eff,
            operating_range_target_km: self.operating_range_target_km,
        })
    }
}

impl From<&VehicleConfig> for VehicleSection {
    fn from(v: &VehicleConfig) -> Self {
        Self {
            curb_mass_kg: v.curb_mass_kg,
            payload_mass_kg: v.payload_mass_kg,
            sim_mass_kg: v.sim_mass_kg,
            frontal_area_m2: v.frontal_area_m2,
            drag_coeff: v.drag_coeff,
            rolling_coeff: v.rolling_coeff,
            gravity_ms2: v.gravity_ms2,
            air_density_kgm3: v.air_density_kgm3,
            top_speed_ms: Some(v.top_speed_ms),
            top_speed_kmh: None,
            avg_speed_ms: Some(v.avg_speed_ms),
            avg_speed_kmh: None,
            max_accel_ms2: v.max_accel_ms2,
            drivetrain_eff: v.drivetrain_eff,
            operating_range_target_km: v.operating_range_target_km,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MotorsSection {
    pub front: MotorSpec,
    pub rear: MotorSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConverterSection {
    pub turns_ratio: f64,
    pub duty_cycle: f64,
    pub input_voltage_v: f64,
    pub efficiency: f64,
    pub hv_link_target_range_v: (f64, f64),
    /// When present, the duty cycle is re-solved to hit this link voltage.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hv_link_setpoint_v: Option<f64>,
}

impl ConverterSection {
    fn resolve(&self) -> ConverterSpec {
        let duty_cycle = match self.hv_link_setpoint_v {
            Some(target) => duty_for_link_voltage(self.input_voltage_v, self.turns_ratio, target),
            None => self.duty_cycle,
        };
        ConverterSpec {
            turns_ratio: self.turns_ratio,
            duty_cycle,
            input_voltage_v: self.input_voltage_v,
            efficiency: self.efficiency,
            hv_link_target_range_v: self.hv_link_target_range_v,
        }
    }
}

impl From<&ConverterSpec> for ConverterSection {
    fn from(c: &ConverterSpec) -> Self {
        Self {
            turns_ratio: c.turns_ratio,
            duty_cycle: c.duty_cycle,
            input_voltage_v: c.input_voltage_v,
            efficiency: c.efficiency,
            hv_link_target_range_v: c.hv_link_target_range_v,
            hv_link_setpoint_v: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChargingSection {
    pub cc_c_rate: f64,
    pub knee_soc: f64,
    /// Absent means an unconstrained bench supply.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charger_power_cap_w: Option<f64>,
    pub taper_shape: TaperShape,
}

impl ChargingSection {
    fn resolve(&self) -> ChargeProfile {
        ChargeProfile {
            cc_c_rate: self.cc_c_rate,
            knee_soc: self.knee_soc,
            charger_power_cap_w: self.charger_power_cap_w.unwrap_or(f64::INFINITY),
            taper_shape: self.taper_shape,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimSection {
    pub aux_load_w: f64,
    pub reserve_floor_soc: f64,
    pub city_cycle: CityCycleParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppConfig {
    pub vehicle: VehicleSection,
    pub motors: MotorsSection,
    pub pack: BatteryPack,
    pub converter: ConverterSection,
    pub policy: AllocationPolicy,
    pub charging: ChargingSection,
    pub depot: DepotConfig,
    pub sim: SimSection,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            vehicle: (&VehicleConfig::default()).into(),
            motors: MotorsSection {
                front: MotorSpec::front_pmsm_133kw(),
                rear: MotorSpec::rear_induction_235kw(),
            },
            pack: BatteryPack::default(),
            converter: (&ConverterSpec::default()).into(),
            policy: AllocationPolicy::default(),
            charging: ChargingSection {
                cc_c_rate: 6.0,
                knee_soc: 0.94,
                charger_power_cap_w: None,
                taper_shape: TaperShape::LinearPowerToZeroAtFull,
            },
            depot: DepotConfig::default(),
            sim: SimSection {
                aux_load_w: 8000.0,
                reserve_floor_soc: 0.05,
                city_cycle: CityCycleParams::default(),
            },
        }
    }
}

/// Validated, unit-resolved runtime configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub vehicle: VehicleConfig,
    pub front: MotorSpec,
    pub rear: MotorSpec,
    pub pack: BatteryPack,
    pub converter: ConverterSpec,
    pub policy: AllocationPolicy,
    pub profile: ChargeProfile,
    pub depot: DepotConfig,
    pub aux_load_w: f64,
    pub reserve_floor_soc: f64,
    pub city_cycle: CityCycleParams,
}

impl Resolved {
    pub fn simulation(&self) -> Simulation {
        Simulation {
            vehicle: self.vehicle.clone(),
            front_motor: self.front.clone(),
            rear_motor: self.rear.clone(),
            pack: self.pack.clone(),
            converter: self.converter.clone(),
            policy: self.policy.clone(),
            aux_load_w: self.aux_load_w,
            reserve_floor_soc: self.reserve_floor_soc,
        }
    }
}

/// Load the effective configuration: defaults, optional file, `--set` overrides.
pub fn load(config_path: Option<&Path>, sets: &[String]) -> Result<Resolved> {
    let mut tree = serde_json::to_value(AppConfig::default()).expect("defaults serialize");

    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let user: Value = serde_json::from_str(&text)
            .with_context(|| format!("config file {} is not valid JSON", path.display()))?;
        deep_merge(&mut tree, user);
    }
    for set in sets {
        apply_set(&mut tree, set)?;
    }

    let config: AppConfig = serde_json::from_value(tree).context("invalid configuration")?;
    resolve(config)
}

fn resolve(config: AppConfig) -> Result<Resolved> {
    let vehicle = config.vehicle.resolve()?.validate()?;
    let front = config.motors.front.validate()?;
    let rear = config.motors.rear.validate()?;
    let pack = config.pack.validate()?;
    let converter = config.converter.resolve().validate()?;
    let policy = config.policy.validate()?;
    let profile = config.charging.resolve().validate()?;
    let depot = config.depot.validate()?;
    Ok(Resolved {
        vehicle,
        front,
        rear,
        pack,
        converter,
        policy,
        profile,
        depot,
        aux_load_w: config.sim.aux_load_w,
        reserve_floor_soc: config.sim.reserve_floor_soc,
        city_cycle: config.sim.city_cycle,
    })
}

/// Objects merge key by key; anything else replaces.
fn deep_merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(base_map), Value::Object(overlay_map)) => {
            for (key, value) in overlay_map {
                match base_map.get_mut(&key) {
                    Some(slot) => deep_merge(slot, value),
                    None => {
                        base_map.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// Apply one `--set key=value`. Dotted paths are explicit; a bare key must
/// name exactly one section's direct field.
fn apply_set(tree: &mut Value, set: &str) -> Result<()> {
    let (key, raw_value) = set
        .split_once('=')
        .ok_or_else(|| anyhow!("--set '{set}': expected KEY=VALUE"))?;
    let value: Value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| Value::String(raw_value.to_string()));

    let path: Vec<&str> = key.split('.').collect();
    let full_path: Vec<String> = if path.len() == 1 {
        let field = path[0];
        let mut hits: Vec<String> = SECTIONS
            .iter()
            .filter(|s| tree[*s].get(field).is_some())
            .map(|s| s.to_string())
            .collect();
        if tree.get(field).is_some() {
            hits.push(String::new()); // top level
        }
        match hits.len() {
            0 => bail!("--set '{set}': no section has a field '{field}'"),
            1 if hits[0].is_empty() => vec![field.to_string()],
            1 => vec![hits.remove(0), field.to_string()],
            _ => bail!(
                "--set '{set}': '{field}' is ambiguous (found in {}); use a dotted path",
                hits.join(", ")
            ),
        }
    } else {
        path.iter().map(|s| s.to_string()).collect()
    };

    let mut slot = tree;
    for (i, segment) in full_path.iter().enumerate() {
        if i + 1 == full_path.len() {
            let obj = slot
                .as_object_mut()
                .ok_or_else(|| anyhow!("--set '{set}': '{segment}' is not settable"))?;
            obj.insert(segment.clone(), value);
            return Ok(());
        }
        slot = slot
            .get_mut(segment.as_str())
            .ok_or_else(|| anyhow!("--set '{set}': unknown path segment '{segment}'"))?;
    }
    unreachable!("loop returns on the last segment")
}

/// Fleet scenario file for the depot command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FleetFile {
    pub buses: Vec<FleetBus>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FleetBus {
    pub id: String,
    pub arrival_time_s: f64,
    pub arrival_soc: f64,
    pub departure_deadline_s: f64,
}

pub fn load_fleet(path: &Path) -> Result<FleetFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read fleet file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("fleet file {} is invalid", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_and_validate() {
        let resolved = load(None, &[]).unwrap();
        assert_eq!(resolved.vehicle.top_speed_ms, 22.2);
        assert_eq!(resolved.pack.capacity_wh, 200_000.0);
        assert!(resolved.profile.charger_power_cap_w.is_infinite());
    }

    #[test]
    fn bare_set_key_finds_its_section() {
        let resolved = load(None, &["sim_mass_kg=28000".into()]).unwrap();
        assert_eq!(resolved.vehicle.sim_mass_kg, 28_000.0);
    }

    #[test]
    fn dotted_set_key() {
        let resolved = load(None, &["sim.city_cycle.segments=3".into()]).unwrap();
        assert_eq!(resolved.city_cycle.segments, 3);
    }

    #[test]
    fn bare_keys_unique_or_rejected() {
        // knee_soc lives only in the charging section.
        let resolved = load(None, &["knee_soc=0.9".into()]).unwrap();
        assert_eq!(resolved.profile.knee_soc, 0.9);
        assert!(load(None, &["no_such_field=1".into()]).is_err());
        assert!(load(None, &["missing_the_equals_sign".into()]).is_err());
    }

    #[test]
    fn kmh_alternate_overrides_ms_default() {
        let resolved = load(None, &["vehicle.top_speed_kmh=90".into()]).unwrap();
        assert!((resolved.vehicle.top_speed_ms - 25.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_value_fails_validation() {
        assert!(load(None, &["drivetrain_eff=0".into()]).is_err());
    }
}
