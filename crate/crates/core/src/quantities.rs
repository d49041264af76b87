//! Validated configuration records and unit conventions.
//!
//! All physics code works in SI base units: kilograms, meters, seconds,
//! watts, newtons, radians. Watt-hours are the one deliberate exception
//! (battery capacity and energy bookkeeping). Field names carry their unit
//! suffix so a bare `f64` is never ambiguous. Human-facing inputs in km/h
//! or degrees are converted at the I/O boundary with the helpers below.

use serde::{Deserialize, Serialize};

/// km/h to m/s.
pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

/// m/s to km/h.
pub fn ms_to_kmh(ms: f64) -> f64 {
    ms * 3.6
}

/// Degrees to radians.
pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

/// Radians to degrees.
pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    /// Names the first violated invariant.
    #[error("invalid config: {field}: {reason}")]
    InvalidConfig {
        field: &'static str,
        reason: &'static str,
    },
}

/// Finite and strictly positive. NaN and infinities fail.
pub(crate) fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Finite and at least zero.
pub(crate) fn non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Finite fraction in (0, 1].
pub(crate) fn unit_fraction(x: f64) -> bool {
    x.is_finite() && x > 0.0 && x <= 1.0
}

/// Vehicle body and drivetrain parameters used by the dynamics equations.
///
/// `sim_mass_kg` is the mass substituted into the force equations. The
/// default configuration uses the rated payload (18 000 kg) there, matching
/// the reference design point; set it to curb + payload (28 000 kg) for
/// gross-weight studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleConfig {
    /// Empty vehicle mass (kg).
    pub curb_mass_kg: f64,
    /// Rated carried mass (kg).
    pub payload_mass_kg: f64,
    /// Mass used in the dynamics equations (kg).
    pub sim_mass_kg: f64,
    /// Frontal area (m^2).
    pub frontal_area_m2: f64,
    /// Aerodynamic drag coefficient (dimensionless).
    pub drag_coeff: f64,
    /// Rolling resistance coefficient (dimensionless).
    pub rolling_coeff: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity_ms2: f64,
    /// Air density (kg/m^3).
    pub air_density_kgm3: f64,
    /// Design top speed (m/s).
    pub top_speed_ms: f64,
    /// Expected operational average speed (m/s).
    pub avg_speed_ms: f64,
    /// Design acceleration (m/s^2).
    pub max_accel_ms2: f64,
    /// Transmission/drivetrain efficiency, motor shaft to wheel, in (0, 1].
    pub drivetrain_eff: f64,
    /// Range the design must cover on one charge (km).
    pub operating_range_target_km: f64,
}

impl Default for VehicleConfig {
    /// Reference 18 m city-bus design point.
    fn default() -> Self {
        Self {
            curb_mass_kg: 10_000.0,
            payload_mass_kg: 18_000.0,
            sim_mass_kg: 18_000.0,
            frontal_area_m2: 8.925,
            drag_coeff: 0.7,
            rolling_coeff: 0.015,
            gravity_ms2: 9.8,
            air_density_kgm3: 1.225,
            top_speed_ms: 22.2,
            avg_speed_ms: 13.89,
            max_accel_ms2: 0.7,
            drivetrain_eff: 0.85,
            operating_range_target_km: 50.0,
        }
    }
}

impl VehicleConfig {
    /// Checks every invariant and echoes the record unchanged if all hold.
    ///
    /// Validation is idempotent: a config that passed once passes again,
    /// identically.
    pub fn validate(self) -> Result<Self, ConfigError> {
        fn err(field: &'static str, reason: &'static str) -> Result<VehicleConfig, ConfigError> {
            Err(ConfigError::InvalidConfig { field, reason })
        }
        if !positive(self.curb_mass_kg) {
            return err("curb_mass_kg", "must be > 0");
        }
        if !positive(self.payload_mass_kg) {
            return err("payload_mass_kg", "must be > 0");
        }
        if !positive(self.sim_mass_kg) {
            return err("sim_mass_kg", "must be > 0");
        }
        if !positive(self.frontal_area_m2) {
            return err("frontal_area_m2", "must be > 0");
        }
        if !non_negative(self.drag_coeff) {
            return err("drag_coeff", "must be >= 0");
        }
        if !non_negative(self.rolling_coeff) {
            return err("rolling_coeff", "must be >= 0");
        }
        if !positive(self.gravity_ms2) {
            return err("gravity_ms2", "must be > 0");
        }
        if !positive(self.air_density_kgm3) {
            return err("air_density_kgm3", "must be > 0");
        }
        if !unit_fraction(self.drivetrain_eff) {
            return err("drivetrain_eff", "must be in (0, 1]");
        }
        if !positive(self.avg_speed_ms) {
            return err("avg_speed_ms", "must be > 0");
        }
        if !(self.top_speed_ms.is_finite() && self.top_speed_ms > self.avg_speed_ms) {
            return err("top_speed_ms", "must exceed avg_speed_ms");
        }
        if !non_negative(self.max_accel_ms2) {
            return err("max_accel_ms2", "must be >= 0");
        }
        if !positive(self.operating_range_target_km) {
            return err("operating_range_target_km", "must be > 0");
        }
        Ok(self)
    }
}

/// Road condition at a point: grade angle and headwind.
///
/// Grade is in radians internally; external files carry degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadState {
    /// Inclination angle (radians), positive uphill. Must satisfy |angle| < pi/2.
    pub grade_rad: f64,
    /// Wind speed opposing travel (m/s); negative means tailwind.
    #[serde(default)]
    pub headwind_ms: f64,
}

impl RoadState {
    /// Level road, still air.
    pub const fn flat() -> Self {
        Self {
            grade_rad: 0.0,
            headwind_ms: 0.0,
        }
    }

    pub fn validate(self) -> Result<Self, ConfigError> {
        let in_range =
            self.grade_rad.is_finite() && self.grade_rad.abs() < std::f64::consts::FRAC_PI_2;
        if !in_range {
            return Err(ConfigError::InvalidConfig {
                field: "grade_rad",
                reason: "|grade| must be < pi/2",
            });
        }
        Ok(self)
    }
}

impl Default for RoadState {
    fn default() -> Self {
        Self::flat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = VehicleConfig::default();
        let validated = cfg.clone().validate().unwrap();
        assert_eq!(cfg, validated);
    }

    #[test]
    fn validation_is_idempotent() {
        let once = VehicleConfig::default().validate().unwrap();
        let twice = once.clone().validate().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn zero_efficiency_rejected() {
        let cfg = VehicleConfig {
            drivetrain_eff: 0.0,
            ..Default::default()
        };
        match cfg.validate() {
            Err(ConfigError::InvalidConfig { field, .. }) => assert_eq!(field, "drivetrain_eff"),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }

    #[test]
    fn negative_frontal_area_rejected() {
        let cfg = VehicleConfig {
            frontal_area_m2: -1.0,
            ..Default::default()
        };
        match cfg.validate() {
            Err(ConfigError::InvalidConfig { field, .. }) => assert_eq!(field, "frontal_area_m2"),
            other => panic!("expected InvalidConfig, got {other:?}"),
        }
    }

    #[test]
    fn top_speed_must_exceed_avg_speed() {
        let cfg = VehicleConfig {
            top_speed_ms: 10.0,
            avg_speed_ms: 10.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn steep_grade_rejected() {
        let road = RoadState {
            grade_rad: std::f64::consts::FRAC_PI_2,
            headwind_ms: 0.0,
        };
        assert!(road.validate().is_err());
    }

    #[test]
    fn unit_helpers_round_trip() {
        assert!((kmh_to_ms(80.0) - 22.2222).abs() < 1e-3);
        assert!((ms_to_kmh(kmh_to_ms(50.0)) - 50.0).abs() < 1e-12);
        assert!((rad_to_deg(deg_to_rad(3.5)) - 3.5).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_preserves_fields_bit_exactly() {
        let cfg = VehicleConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: VehicleConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);

        // Decimal values with <= 6 significant digits survive unchanged.
        let awkward = VehicleConfig {
            sim_mass_kg: 12345.6,
            rolling_coeff: 0.0123456,
            ..Default::default()
        };
        let back: VehicleConfig =
            serde_json::from_str(&serde_json::to_string(&awkward).unwrap()).unwrap();
        assert!(back.sim_mass_kg.to_bits() == awkward.sim_mass_kg.to_bits());
        assert!(back.rolling_coeff.to_bits() == awkward.rolling_coeff.to_bits());
    }
}
