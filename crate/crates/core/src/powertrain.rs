//! Dual-motor power allocation for the part-time AWD drivetrain.
//!
//! The rear induction motor is the workhorse; the front PMSM engages at
//! launch, when demand exceeds the rear rating, and preferentially during
//! regenerative braking. Power that neither motor can absorb while braking
//! is reported as friction-brake power so callers can keep the energy
//! ledger closed.

use crate::quantities::{positive, unit_fraction};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axle {
    Front,
    Rear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotorKind {
    Pmsm,
    Induction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMode {
    Propulsion,
    Regen,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AllocationError {
    #[error("invalid motor spec: {field}: {reason}")]
    InvalidMotor {
        field: &'static str,
        reason: &'static str,
    },
    #[error("invalid allocation policy: {field}: {reason}")]
    InvalidPolicy {
        field: &'static str,
        reason: &'static str,
    },
    /// Braking demand with no regen-capable motor on either axle.
    #[error("regenerative demand but neither motor is regen-capable")]
    NotRegenCapable,
}

/// Single traction motor envelope. Efficiencies are single-point values,
/// not maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorSpec {
    pub axle: Axle,
    pub kind: MotorKind,
    /// Rated mechanical power (W), applies to drive and regen alike.
    pub rated_power_w: f64,
    pub rated_voltage_v: f64,
    pub regen_capable: bool,
    /// Electrical-to-mechanical efficiency while driving.
    pub drive_efficiency: f64,
    /// Mechanical-to-electrical efficiency while regenerating.
    pub regen_efficiency: f64,
}

impl MotorSpec {
    /// 235 kW rear-axle induction motor of the reference design.
    pub fn rear_induction_235kw() -> Self {
        Self {
            axle: Axle::Rear,
            kind: MotorKind::Induction,
            rated_power_w: 235_000.0,
            rated_voltage_v: 320.0,
            regen_capable: true,
            drive_efficiency: 0.92,
            regen_efficiency: 0.92,
        }
    }

    /// 133 kW front-axle PMSM of the reference design.
    pub fn front_pmsm_133kw() -> Self {
        Self {
            axle: Axle::Front,
            kind: MotorKind::Pmsm,
            rated_power_w: 133_000.0,
            rated_voltage_v: 320.0,
            regen_capable: true,
            drive_efficiency: 0.92,
            regen_efficiency: 0.92,
        }
    }

    pub fn validate(self) -> Result<Self, AllocationError> {
        fn err(field: &'static str, reason: &'static str) -> Result<MotorSpec, AllocationError> {
            Err(AllocationError::InvalidMotor { field, reason })
        }
        if !positive(self.rated_power_w) {
            return err("rated_power_w", "must be > 0");
        }
        if !unit_fraction(self.drive_efficiency) {
            return err("drive_efficiency", "must be in (0, 1]");
        }
        if !unit_fraction(self.regen_efficiency) {
            return err("regen_efficiency", "must be in (0, 1]");
        }
        Ok(self)
    }
}

/// Thresholds steering the allocation rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPolicy {
    /// Below this speed the starting load splits equally across both axles (m/s).
    pub launch_speed_threshold_ms: f64,
    /// At or above this acceleration, weight transfer shifts allocation
    /// rear-first (m/s^2).
    pub hard_accel_threshold_ms2: f64,
    /// Fraction of braking power the front motor takes first, in [0.5, 1].
    pub regen_front_share: f64,
}

impl Default for AllocationPolicy {
    fn default() -> Self {
        Self {
            // 15 km/h crawl boundary.
            launch_speed_threshold_ms: 4.17,
            hard_accel_threshold_ms2: 0.7,
            regen_front_share: 0.6,
        }
    }
}

impl AllocationPolicy {
    pub fn validate(self) -> Result<Self, AllocationError> {
        fn err(field: &'static str, reason: &'static str) -> Result<AllocationPolicy, AllocationError> {
            Err(AllocationError::InvalidPolicy { field, reason })
        }
        if !positive(self.launch_speed_threshold_ms) {
            return err("launch_speed_threshold_ms", "must be > 0");
        }
        if !positive(self.hard_accel_threshold_ms2) {
            return err("hard_accel_threshold_ms2", "must be > 0");
        }
        if !(self.regen_front_share.is_finite() && (0.5..=1.0).contains(&self.regen_front_share)) {
            return err("regen_front_share", "must be in [0.5, 1]");
        }
        Ok(self)
    }
}

/// Outcome of one allocation: mechanical and electrical power per axle,
/// plus whatever the pair could not serve.
///
/// Signs follow the demand: positive while driving, negative while
/// regenerating. `front_mech_w + rear_mech_w + dropped_mech_w` equals the
/// demand exactly; `dropped_mech_w` is zero unless `limited` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub front_mech_w: f64,
    pub rear_mech_w: f64,
    pub front_elec_w: f64,
    pub rear_elec_w: f64,
    /// Demand the motors could not serve; during braking this is the
    /// friction-brake share.
    pub dropped_mech_w: f64,
    /// True iff the demand was clipped anywhere.
    pub limited: bool,
}

impl PowerSplit {
    pub const ZERO: Self = Self {
        front_mech_w: 0.0,
        rear_mech_w: 0.0,
        front_elec_w: 0.0,
        rear_elec_w: 0.0,
        dropped_mech_w: 0.0,
        limited: false,
    };

    /// Combined electrical power at the DC link (signed like the demand).
    pub fn link_power_w(&self) -> f64 {
        self.front_elec_w + self.rear_elec_w
    }
}

/// Combined rated power for the mode: every motor counts for propulsion,
/// only regen-capable ones for regen (W).
pub fn capability(motors: &[&MotorSpec], mode: AllocationMode) -> f64 {
    motors
        .iter()
        .filter(|m| mode == AllocationMode::Propulsion || m.regen_capable)
        .map(|m| m.rated_power_w)
        .sum()
}

/// Split a mechanical power demand between the two motors.
///
/// Driving (`demand > 0`):
/// - below the launch threshold the load splits equally, each side clipped
///   to its rating with the shortfall spilling to the other side;
/// - otherwise the rear motor serves first up to its rating and the front
///   takes the remainder (which also covers hard acceleration, where the
///   front backs off in favor of the rear).
///
/// Braking (`demand < 0`): the front motor absorbs `regen_front_share` of
/// the braking power up to its rating, the rear takes the rest up to its
/// rating, and anything left goes to the friction brakes (`dropped_mech_w`).
pub fn allocate(
    demand_mech_w: f64,
    speed_ms: f64,
    accel_ms2: f64,
    front: &MotorSpec,
    rear: &MotorSpec,
    policy: &AllocationPolicy,
) -> Result<PowerSplit, AllocationError> {
    debug_assert!(demand_mech_w.is_finite());
    let _ = accel_ms2; // weight-transfer rule folds into rear-first ordering
    if demand_mech_w == 0.0 {
        return Ok(PowerSplit::ZERO);
    }

    let (front_mech, rear_mech) = if demand_mech_w > 0.0 {
        if speed_ms < policy.launch_speed_threshold_ms {
            split_equal(demand_mech_w, front.rated_power_w, rear.rated_power_w)
        } else {
            split_rear_first(demand_mech_w, front.rated_power_w, rear.rated_power_w)
        }
    } else {
        if !front.regen_capable && !rear.regen_capable {
            return Err(AllocationError::NotRegenCapable);
        }
        let magnitude = -demand_mech_w;
        let front_take = if front.regen_capable {
            (magnitude * policy.regen_front_share).min(front.rated_power_w)
        } else {
            0.0
        };
        let rear_take = if rear.regen_capable {
            (magnitude - front_take).min(rear.rated_power_w)
        } else {
            0.0
        };
        (-front_take, -rear_take)
    };

    let dropped = demand_mech_w - front_mech - rear_mech;
    Ok(PowerSplit {
        front_mech_w: front_mech,
        rear_mech_w: rear_mech,
        front_elec_w: to_electrical(front_mech, front),
        rear_elec_w: to_electrical(rear_mech, rear),
        dropped_mech_w: dropped,
        limited: dropped != 0.0,
    })
}

/// Equal split with spill-over: each side takes half, a saturated side's
/// excess moves to the other up to its rating.
fn split_equal(demand: f64, front_rated: f64, rear_rated: f64) -> (f64, f64) {
    let half = demand * 0.5;
    let mut front = half.min(front_rated);
    let mut rear = half.min(rear_rated);
    let mut leftover = demand - front - rear;
    if leftover > 0.0 {
        let add_rear = leftover.min(rear_rated - rear);
        rear += add_rear;
        leftover -= add_rear;
        front += leftover.min(front_rated - front);
    }
    (front, rear)
}

/// Rear motor first, front takes the remainder (part-time AWD).
fn split_rear_first(demand: f64, front_rated: f64, rear_rated: f64) -> (f64, f64) {
    let rear = demand.min(rear_rated);
    let front = (demand - rear).min(front_rated);
    (front, rear)
}

/// Electrical power at the motor terminals for a mechanical assignment:
/// driving draws mech/eff, regenerating returns mech*eff.
fn to_electrical(mech_w: f64, motor: &MotorSpec) -> f64 {
    if mech_w >= 0.0 {
        mech_w / motor.drive_efficiency
    } else {
        mech_w * motor.regen_efficiency
    }
}
