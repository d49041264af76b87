//! Energy-reservoir battery pack model with C-rate and specific-power caps.
//!
//! The pack tracks state of charge only; there is no internal-resistance or
//! thermal model. Losses live in the motors and converter, so a charge
//! followed by an equal-energy discharge returns the pack to its starting
//! state.
//!
//! Sign convention (project-wide): positive terminal power discharges the
//! pack, negative charges it.

use crate::quantities::{non_negative, positive};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerDirection {
    Charge,
    Discharge,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BatteryError {
    #[error("invalid battery pack: {field}: {reason}")]
    InvalidPack {
        field: &'static str,
        reason: &'static str,
    },
}

/// Fast-charge-tolerant pack described by its headline ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryPack {
    /// Energy capacity (Wh).
    pub capacity_wh: f64,
    /// Specific energy (Wh/kg); sets pack mass.
    pub specific_energy_wh_per_kg: f64,
    /// Specific power (W/kg); one of the two power caps.
    pub specific_power_w_per_kg: f64,
    /// Volumetric energy density (Wh/L); informational.
    pub energy_density_wh_per_l: f64,
    /// Nominal single-cell voltage (V).
    pub cell_voltage_v: f64,
    /// Maximum sustained charge rate (1/h).
    pub max_charge_c_rate: f64,
    /// Maximum sustained discharge rate (1/h).
    pub max_discharge_c_rate: f64,
    /// Rated full-depth cycle life, min..max; carried for reports only.
    pub cycle_durability_cycles: (u32, u32),
    /// State of charge, fraction of capacity in [0, 1].
    pub soc: f64,
}

impl Default for BatteryPack {
    /// 200 kWh lithium-titanate pack for the reference bus design.
    fn default() -> Self {
        Self {
            capacity_wh: 200_000.0,
            specific_energy_wh_per_kg: 110.0,
            specific_power_w_per_kg: 1000.0,
            energy_density_wh_per_l: 177.0,
            cell_voltage_v: 2.3,
            max_charge_c_rate: 6.0,
            max_discharge_c_rate: 10.0,
            cycle_durability_cycles: (6000, 20000),
            soc: 1.0,
        }
    }
}

impl BatteryPack {
    pub fn validate(self) -> Result<Self, BatteryError> {
        fn err(field: &'static str, reason: &'static str) -> Result<BatteryPack, BatteryError> {
            Err(BatteryError::InvalidPack { field, reason })
        }
        if !positive(self.capacity_wh) {
            return err("capacity_wh", "must be > 0");
        }
        if !positive(self.specific_energy_wh_per_kg) {
            return err("specific_energy_wh_per_kg", "must be > 0");
        }
        if !positive(self.specific_power_w_per_kg) {
            return err("specific_power_w_per_kg", "must be > 0");
        }
        if !positive(self.cell_voltage_v) {
            return err("cell_voltage_v", "must be > 0");
        }
        if !non_negative(self.max_charge_c_rate) {
            return err("max_charge_c_rate", "must be >= 0");
        }
        if !non_negative(self.max_discharge_c_rate) {
            return err("max_discharge_c_rate", "must be >= 0");
        }
        if !(self.soc.is_finite() && (0.0..=1.0).contains(&self.soc)) {
            return err("soc", "must be in [0, 1]");
        }
        Ok(self)
    }

    /// Pack mass from capacity over specific energy, full precision.
    pub fn pack_mass_kg(&self) -> f64 {
        self.capacity_wh / self.specific_energy_wh_per_kg
    }

    /// Pack mass truncated to whole kilograms for report display.
    pub fn pack_mass_display_kg(&self) -> u64 {
        self.pack_mass_kg() as u64
    }

    /// Sustained power cap for the given direction: the tighter of the
    /// specific-power bound and the direction's C-rate bound (W).
    pub fn power_limit_w(&self, direction: PowerDirection) -> f64 {
        let specific_bound = self.specific_power_w_per_kg * self.pack_mass_kg();
        let c_rate = match direction {
            PowerDirection::Charge => self.max_charge_c_rate,
            PowerDirection::Discharge => self.max_discharge_c_rate,
        };
        specific_bound.min(c_rate * self.capacity_wh)
    }

    /// Advance the pack by `dt_s` seconds at the requested terminal power
    /// (+discharge / -charge), clipping to the power caps and to the energy
    /// headroom so soc stays in [0, 1]. Returns the power actually accepted;
    /// callers account for any shortfall.
    pub fn step(&mut self, terminal_power_w: f64, dt_s: f64) -> f64 {
        debug_assert!(dt_s > 0.0);
        if terminal_power_w == 0.0 {
            return 0.0;
        }
        let (direction, magnitude) = if terminal_power_w > 0.0 {
            (PowerDirection::Discharge, terminal_power_w)
        } else {
            (PowerDirection::Charge, -terminal_power_w)
        };
        let headroom_wh = match direction {
            PowerDirection::Discharge => self.soc * self.capacity_wh,
            PowerDirection::Charge => (1.0 - self.soc) * self.capacity_wh,
        };
        let headroom_power = headroom_wh * 3600.0 / dt_s;
        let accepted_mag = magnitude.min(self.power_limit_w(direction)).min(headroom_power);
        let accepted = if terminal_power_w > 0.0 {
            accepted_mag
        } else {
            -accepted_mag
        };
        self.soc = (self.soc - accepted * dt_s / 3600.0 / self.capacity_wh).clamp(0.0, 1.0);
        accepted
    }
}

/// Cells in series to reach a pack terminal voltage: ceil(v_pack / v_cell).
pub fn series_cell_count(pack_input_voltage_v: f64, cell_voltage_v: f64) -> u32 {
    debug_assert!(pack_input_voltage_v > 0.0 && cell_voltage_v > 0.0);
    // Guard against ratios that are integers in exact arithmetic but land a
    // hair above one in floating point.
    (pack_input_voltage_v / cell_voltage_v - 1e-9).ceil() as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pack() -> BatteryPack {
        BatteryPack::default()
    }

    #[test]
    fn pack_mass_reference_values() {
        let p = pack();
        assert_eq!(p.pack_mass_display_kg(), 1818);
        assert!((p.pack_mass_kg() - 1818.18).abs() < 0.01);
    }

    #[test]
    fn pack_mass_smaller_pack() {
        let p = BatteryPack {
            capacity_wh: 150_000.0,
            ..pack()
        };
        assert_eq!(p.pack_mass_display_kg(), 1363);
    }

    #[test]
    fn charge_power_limit_c_rate_binds() {
        // min(1818.18 kg * 1000 W/kg, 6/h * 200 kWh) = 1200 kW.
        let p = pack();
        assert!((p.power_limit_w(PowerDirection::Charge) - 1_200_000.0).abs() < 1e-6);
    }

    #[test]
    fn discharge_power_limit_specific_power_binds() {
        // min(1818.18 kW, 10/h * 200 kWh = 2000 kW) = 1818.18 kW.
        let p = pack();
        let limit = p.power_limit_w(PowerDirection::Discharge);
        assert!((limit - 1_818_181.8).abs() < 1.0, "got {limit}");
    }

    #[test]
    fn zero_c_rate_means_zero_limit() {
        let p = BatteryPack {
            max_charge_c_rate: 0.0,
            ..pack()
        };
        assert_eq!(p.power_limit_w(PowerDirection::Charge), 0.0);
    }

    #[test]
    fn step_charges_by_hand_integrated_amount() {
        // 1200 kW for 60 s into a half-full 200 kWh pack raises soc by 0.1.
        let mut p = BatteryPack { soc: 0.5, ..pack() };
        let accepted = p.step(-1_200_000.0, 60.0);
        assert_eq!(accepted, -1_200_000.0);
        assert!((p.soc - 0.6).abs() < 1e-12, "soc {}", p.soc);
    }

    #[test]
    fn step_zero_power_leaves_soc() {
        let mut p = BatteryPack { soc: 0.37, ..pack() };
        assert_eq!(p.step(0.0, 1.0), 0.0);
        assert_eq!(p.soc, 0.37);
    }

    #[test]
    fn full_pack_accepts_no_charge() {
        let mut p = BatteryPack { soc: 1.0, ..pack() };
        assert_eq!(p.step(-500_000.0, 1.0), 0.0);
        assert_eq!(p.soc, 1.0);
    }

    #[test]
    fn empty_pack_delivers_nothing() {
        let mut p = BatteryPack { soc: 0.0, ..pack() };
        assert_eq!(p.step(500_000.0, 1.0), 0.0);
        assert_eq!(p.soc, 0.0);
    }

    #[test]
    fn final_step_clips_to_exact_full() {
        let mut p = BatteryPack { soc: 0.9999, ..pack() };
        // Headroom is 20 Wh; a 1200 kW request over 1 s would deliver 333 Wh.
        let accepted = p.step(-1_200_000.0, 1.0);
        assert!(accepted > -1_200_000.0);
        assert!((p.soc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_cell_count_reference() {
        assert_eq!(series_cell_count(80.0, 2.3), 35);
        assert_eq!(series_cell_count(2.3, 2.3), 1);
        assert_eq!(series_cell_count(320.0, 2.3), 140);
    }

    #[test]
    fn validation_rejects_bad_soc() {
        let p = BatteryPack { soc: 1.5, ..pack() };
        assert!(p.validate().is_err());
        let p = BatteryPack {
            capacity_wh: 0.0,
            ..pack()
        };
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn soc_stays_in_bounds(
            start in 0.0..1.0f64,
            powers in proptest::collection::vec(-3e6..3e6f64, 1..60),
        ) {
            let mut p = BatteryPack { soc: start, ..pack() };
            for pw in powers {
                p.step(pw, 1.0);
                prop_assert!((0.0..=1.0).contains(&p.soc), "soc {}", p.soc);
            }
        }

        #[test]
        fn energy_conservation_over_steps(
            start in 0.0..1.0f64,
            powers in proptest::collection::vec(-2e6..2e6f64, 1..60),
        ) {
            let mut p = BatteryPack { soc: start, ..pack() };
            let mut accepted_wh = 0.0;
            for pw in powers {
                accepted_wh += p.step(pw, 1.0) * 1.0 / 3600.0;
            }
            let delta_wh = p.capacity_wh * (start - p.soc);
            prop_assert!(
                (delta_wh - accepted_wh).abs() <= 1e-9 * p.capacity_wh.max(accepted_wh.abs()),
                "delta {delta_wh} vs accepted {accepted_wh}"
            );
        }

        #[test]
        fn clipping_never_amplifies(request in -5e6..5e6f64, soc in 0.0..1.0f64) {
            let mut p = BatteryPack { soc, ..pack() };
            let accepted = p.step(request, 1.0);
            prop_assert!(accepted.abs() <= request.abs() + 1e-9);
            prop_assert_eq!(accepted.signum() * request.signum() >= 0.0, true);
        }

        #[test]
        fn charge_then_discharge_round_trips(soc in 0.2..0.8f64, power in 1e3..5e5f64) {
            let mut p = BatteryPack { soc, ..pack() };
            let charged = p.step(-power, 10.0);
            let discharged = p.step(-charged, 10.0);
            prop_assert!((discharged + charged).abs() < 1e-9);
            prop_assert!((p.soc - soc).abs() < 1e-12);
        }
    }
}
