//! Steady-state model of the bidirectional DC-DC stage between the battery
//! and the high-voltage link.
//!
//! The topology is an isolated current-fed boost converter; in steady state
//! its ideal gain is V_out = V_in / (n * (1 - D)) with transformer turns
//! ratio `n` and duty cycle `D`. Switching behavior is out of scope, so the
//! model reduces to the gain law, a two-quadrant operating check (unipolar
//! link voltage, bipolar current), and a flat efficiency in both directions.

use crate::quantities::{positive, unit_fraction};
use serde::{Deserialize, Serialize};

/// Duty cycles at or above 1 - GAIN_EPS are treated as singular.
pub const GAIN_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConverterError {
    #[error("invalid converter spec: {field}: {reason}")]
    InvalidSpec {
        field: &'static str,
        reason: &'static str,
    },
    /// Duty cycle so close to 1 that the ideal gain diverges.
    #[error("gain singularity: duty cycle {duty} within {GAIN_EPS} of 1")]
    GainSingularity { duty: f64 },
    /// Operating point implies a reversed link-voltage polarity, outside the
    /// two-quadrant region.
    #[error("quadrant violation: link voltage {link_voltage_v} V is not positive")]
    QuadrantViolation { link_voltage_v: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverterSpec {
    /// Transformer turns ratio; smaller values boost more.
    pub turns_ratio: f64,
    /// Boost-switch duty cycle in (0, 1).
    pub duty_cycle: f64,
    /// Battery-side input voltage (V).
    pub input_voltage_v: f64,
    /// Power efficiency, applied symmetrically in both flow directions.
    pub efficiency: f64,
    /// Acceptable high-voltage link band (V), inclusive.
    pub hv_link_target_range_v: (f64, f64),
}

/// Duty cycle that makes the ideal gain hit `v_target` from `v_in` at turns
/// ratio `n`: D = 1 - v_in / (n * v_target).
pub fn duty_for_link_voltage(v_in: f64, n: f64, v_target: f64) -> f64 {
    1.0 - v_in / (n * v_target)
}

/// Reference high-voltage link setpoint (V) for the default converter.
pub const HV_LINK_SETPOINT_V: f64 = 741.38;

impl Default for ConverterSpec {
    /// 80 V battery string boosted onto a 700-800 V link.
    fn default() -> Self {
        Self {
            turns_ratio: 0.27,
            duty_cycle: duty_for_link_voltage(80.0, 0.27, HV_LINK_SETPOINT_V),
            input_voltage_v: 80.0,
            efficiency: 0.97,
            hv_link_target_range_v: (700.0, 800.0),
        }
    }
}

impl ConverterSpec {
    pub fn validate(self) -> Result<Self, ConverterError> {
        fn err(field: &'static str, reason: &'static str) -> Result<ConverterSpec, ConverterError> {
            Err(ConverterError::InvalidSpec { field, reason })
        }
        if !positive(self.turns_ratio) {
            return err("turns_ratio", "must be > 0");
        }
        if !(positive(self.duty_cycle) && self.duty_cycle < 1.0) {
            return err("duty_cycle", "must be in (0, 1)");
        }
        if !positive(self.input_voltage_v) {
            return err("input_voltage_v", "must be > 0");
        }
        if !unit_fraction(self.efficiency) {
            return err("efficiency", "must be in (0, 1]");
        }
        let (lo, hi) = self.hv_link_target_range_v;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return err("hv_link_target_range_v", "min must not exceed max");
        }
        Ok(self)
    }

    /// Steady-state link voltage from the ideal gain law.
    pub fn hv_link_voltage(&self) -> Result<f64, ConverterError> {
        if self.duty_cycle >= 1.0 - GAIN_EPS {
            return Err(ConverterError::GainSingularity {
                duty: self.duty_cycle,
            });
        }
        Ok(self.input_voltage_v / (self.turns_ratio * (1.0 - self.duty_cycle)))
    }

    /// True iff `v` lies inside the target link band, boundaries included.
    pub fn check_link_in_range(&self, v: f64) -> bool {
        v >= self.hv_link_target_range_v.0 && v <= self.hv_link_target_range_v.1
    }

    /// Power delivered through the converter for a requested flow, either
    /// direction: delivered = requested * efficiency. The operating point's
    /// link voltage must be positive (two-quadrant region).
    pub fn transfer_power(&self, requested_w: f64, link_voltage_v: f64) -> Result<f64, ConverterError> {
        if link_voltage_v <= 0.0 && requested_w != 0.0 {
            return Err(ConverterError::QuadrantViolation { link_voltage_v });
        }
        Ok(requested_w * self.efficiency)
    }

    /// Battery-side power needed so that `link_power_w` appears on the link
    /// (positive: battery supplies the link; negative: link charges the
    /// battery). Inverse of [`Self::transfer_power`] in the propulsion
    /// direction.
    pub fn battery_side_power(&self, link_power_w: f64) -> f64 {
        if link_power_w >= 0.0 {
            link_power_w / self.efficiency
        } else {
            link_power_w * self.efficiency
        }
    }
}
