//! Fast-charge sessions: constant current to the knee, then a taper.
//!
//! The chemistry tolerates its full rated charge rate only up to a knee
//! state of charge (94% at 6C for the reference pack); past the knee the
//! power ramps linearly in time down to zero, sized so the ramp lands on a
//! full pack exactly. Sessions that a weaker charger holds below the
//! battery's own ceiling never reach that voltage-limited regime and charge
//! at constant power all the way to full.
//!
//! Both a stepped session simulator and closed-form timing functions are
//! provided; they agree to within two time steps and the scheduler leans on
//! the closed forms.

use crate::battery::{BatteryPack, PowerDirection};
use crate::quantities::{positive, unit_fraction};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChargeError {
    #[error("invalid charge profile: {field}: {reason}")]
    InvalidProfile {
        field: &'static str,
        reason: &'static str,
    },
    #[error("charge target {target} exceeds a full pack")]
    TargetUnreachable { target: f64 },
}

/// Shape of the power rolloff past the knee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaperShape {
    /// Power falls linearly in time from the constant-current level to zero,
    /// with the ramp length chosen so the pack is exactly full at zero power.
    LinearPowerToZeroAtFull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeProfile {
    /// Constant-current charge rate (1/h).
    pub cc_c_rate: f64,
    /// State of charge where the taper begins when charging at the battery
    /// ceiling.
    pub knee_soc: f64,
    /// Charger hardware limit (W); `f64::INFINITY` for an unconstrained bench
    /// supply.
    #[serde(default = "unlimited")]
    pub charger_power_cap_w: f64,
    pub taper_shape: TaperShape,
}

fn unlimited() -> f64 {
    f64::INFINITY
}

impl Default for ChargeProfile {
    fn default() -> Self {
        Self {
            cc_c_rate: 6.0,
            knee_soc: 0.94,
            charger_power_cap_w: f64::INFINITY,
            taper_shape: TaperShape::LinearPowerToZeroAtFull,
        }
    }
}

impl ChargeProfile {
    pub fn validate(self) -> Result<Self, ChargeError> {
        fn err(field: &'static str, reason: &'static str) -> Result<ChargeProfile, ChargeError> {
            Err(ChargeError::InvalidProfile { field, reason })
        }
        if !positive(self.cc_c_rate) {
            return err("cc_c_rate", "must be > 0");
        }
        if !unit_fraction(self.knee_soc) {
            return err("knee_soc", "must be in (0, 1]");
        }
        // Infinity is the unconstrained bench supply, so only NaN and
        // non-positive caps are invalid.
        if self.charger_power_cap_w.is_nan() || self.charger_power_cap_w <= 0.0 {
            return err("charger_power_cap_w", "must be > 0");
        }
        Ok(self)
    }

    /// Capped at `cap_w`, e.g. by a depot charger.
    pub fn with_charger_cap(&self, cap_w: f64) -> Self {
        Self {
            charger_power_cap_w: self.charger_power_cap_w.min(cap_w),
            ..self.clone()
        }
    }
}

/// One sample of a charging session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChargeTracePoint {
    pub t_s: f64,
    pub soc: f64,
    pub power_w: f64,
}

/// Record of one completed charging session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeSession {
    pub start_soc: f64,
    pub target_soc: f64,
    pub elapsed_s: f64,
    pub energy_delivered_wh: f64,
    pub trace: Vec<ChargeTracePoint>,
}

/// Constant-current level and whether the taper regime applies.
///
/// The CC level is the tightest of the profile C-rate, the charger cap, and
/// the pack's own charge limit. The taper applies only when the battery-side
/// ceiling is the binding constraint; a charger-limited session stays below
/// the voltage limit and runs CC to full.
fn cc_operating_point(pack: &BatteryPack, profile: &ChargeProfile) -> (f64, bool) {
    let battery_ceiling_w =
        (profile.cc_c_rate * pack.capacity_wh).min(pack.power_limit_w(PowerDirection::Charge));
    let cc_power_w = battery_ceiling_w.min(profile.charger_power_cap_w);
    (cc_power_w, profile.charger_power_cap_w >= battery_ceiling_w)
}

/// Step a pack from `start_soc` to `target_soc` under the profile, sampling
/// every `dt_s` seconds. The session ends as soon as soc reaches the target;
/// a target at or below the start yields a zero-length session.
pub fn charge(
    pack: &mut BatteryPack,
    profile: &ChargeProfile,
    start_soc: f64,
    target_soc: f64,
    dt_s: f64,
) -> Result<ChargeSession, ChargeError> {
    debug_assert!(dt_s > 0.0);
    debug_assert!((0.0..=1.0).contains(&start_soc));
    if target_soc > 1.0 {
        return Err(ChargeError::TargetUnreachable { target: target_soc });
    }
    pack.soc = start_soc;
    let mut session = ChargeSession {
        start_soc,
        target_soc,
        elapsed_s: 0.0,
        energy_delivered_wh: 0.0,
        trace: Vec::new(),
    };
    if target_soc <= start_soc {
        session.trace.push(ChargeTracePoint {
            t_s: 0.0,
            soc: start_soc,
            power_w: 0.0,
        });
        return Ok(session);
    }

    let (cc_power_w, taper_applies) = cc_operating_point(pack, profile);
    // Taper ramp state: entry time and ramp length, set when the knee is crossed.
    let mut taper: Option<(f64, f64)> = None;
    let mut t = 0.0;
    while pack.soc < target_soc - 1e-12 {
        let power = if taper_applies && pack.soc >= profile.knee_soc {
            let (t0, ramp_s) = *taper.get_or_insert_with(|| {
                let remaining_wh = (1.0 - pack.soc) * pack.capacity_wh;
                (t, 2.0 * remaining_wh * 3600.0 / cc_power_w)
            });
            // Midpoint power integrates the linear ramp exactly, keeping the
            // stepped trajectory on the analytic one.
            let ramp_power = cc_power_w * (1.0 - (t - t0 + 0.5 * dt_s) / ramp_s);
            if ramp_power > 0.0 {
                ramp_power
            } else {
                // Ramp exhausted inside this step; finish the remainder.
                ((target_soc - pack.soc) * pack.capacity_wh * 3600.0 / dt_s).min(cc_power_w)
            }
        } else {
            cc_power_w
        };
        if power <= 0.0 {
            break;
        }
        session.trace.push(ChargeTracePoint {
            t_s: t,
            soc: pack.soc,
            power_w: power,
        });
        pack.step(-power, dt_s);
        t += dt_s;
    }
    session.elapsed_s = t;
    session.energy_delivered_wh = (pack.soc - start_soc) * pack.capacity_wh;
    session.trace.push(ChargeTracePoint {
        t_s: t,
        soc: pack.soc,
        power_w: 0.0,
    });
    Ok(session)
}

/// Closed-form session duration from `start_soc` to a full pack.
pub fn time_to_full(pack: &BatteryPack, profile: &ChargeProfile, start_soc: f64) -> f64 {
    time_to_reach(pack, profile, start_soc, 1.0)
}

/// Closed-form session duration from `start_soc` to `target_soc` under the
/// same piecewise profile as [`charge`].
pub fn time_to_reach(
    pack: &BatteryPack,
    profile: &ChargeProfile,
    start_soc: f64,
    target_soc: f64,
) -> f64 {
    let target = target_soc.min(1.0);
    if target <= start_soc {
        return 0.0;
    }
    let (cc_power_w, taper_applies) = cc_operating_point(pack, profile);
    if cc_power_w <= 0.0 {
        return f64::INFINITY;
    }
    // Full-power soc rate, per second.
    let cc_rate = cc_power_w / (pack.capacity_wh * 3600.0);
    if !taper_applies || target <= profile.knee_soc {
        return (target - start_soc) / cc_rate;
    }
    let entry_soc = start_soc.max(profile.knee_soc);
    let cc_time = (entry_soc - start_soc).max(0.0) / cc_rate;
    // Time-linear ramp from full power at the entry point: soc approaches 1
    // along a parabola, reaching it exactly when the ramp hits zero.
    let ramp_s = 2.0 * (1.0 - entry_soc) / cc_rate;
    let frac = ((1.0 - target) / (1.0 - entry_soc)).max(0.0);
    cc_time + ramp_s * (1.0 - frac.sqrt())
}

/// Nominal end-stop break a city bus gets for opportunity charging (s).
pub const TYPICAL_END_STOP_BREAK_S: f64 = 1200.0;

/// Operational notes for a session report. Flags a charger that cannot
/// complete a full charge within a typical end-stop break, with the soc
/// fraction such a break actually reaches.
pub fn session_notes(pack: &BatteryPack, profile: &ChargeProfile) -> Vec<String> {
    let mut notes = Vec::new();
    let full_s = time_to_full(pack, profile, 0.0);
    if full_s > TYPICAL_END_STOP_BREAK_S {
        let reached = soc_after(pack, profile, 0.0, TYPICAL_END_STOP_BREAK_S);
        notes.push(format!(
            "full charge from empty takes {full_s:.0} s; a {TYPICAL_END_STOP_BREAK_S:.0} s \
             end-stop break reaches only {:.0}% soc, so quick-turnaround full charges are \
             not achievable with this charger/pack pairing",
            reached * 100.0
        ));
    }
    notes
}

/// State of charge after charging for `elapsed_s` seconds from `start_soc`,
/// closed form, matching [`charge`]'s piecewise profile.
pub fn soc_after(
    pack: &BatteryPack,
    profile: &ChargeProfile,
    start_soc: f64,
    elapsed_s: f64,
) -> f64 {
    if elapsed_s <= 0.0 {
        return start_soc;
    }
    let (cc_power_w, taper_applies) = cc_operating_point(pack, profile);
    if cc_power_w <= 0.0 {
        return start_soc;
    }
    let cc_rate = cc_power_w / (pack.capacity_wh * 3600.0);
    if !taper_applies {
        return (start_soc + cc_rate * elapsed_s).min(1.0);
    }
    let entry_soc = start_soc.max(profile.knee_soc);
    let cc_time = (entry_soc - start_soc).max(0.0) / cc_rate;
    if elapsed_s <= cc_time {
        return start_soc + cc_rate * elapsed_s;
    }
    let ramp_s = 2.0 * (1.0 - entry_soc) / cc_rate;
    if ramp_s <= 0.0 {
        return entry_soc;
    }
    let tau = (elapsed_s - cc_time).min(ramp_s);
    let remaining_frac = 1.0 - tau / ramp_s;
    (entry_soc + (1.0 - entry_soc) * (1.0 - remaining_frac * remaining_frac)).min(1.0)
}
