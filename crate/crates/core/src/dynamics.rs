//! Longitudinal vehicle dynamics: resistive forces, traction force, and
//! tractive/mechanical power.
//!
//! All functions are pure. Sign convention: positive force/power propels the
//! vehicle forward; negative values mean braking (candidate regeneration).

use crate::quantities::{RoadState, VehicleConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    /// Relative airflow is from behind (tailwind faster than the vehicle);
    /// the drag model does not cover that regime.
    #[error("negative relative speed {v_rel_ms} m/s: tailwind exceeds vehicle speed")]
    NegativeRelativeSpeed { v_rel_ms: f64 },
}

/// Per-component force decomposition at one operating point.
///
/// `traction_n` is computed as the exact sum of the other three, so the
/// decomposition identity holds bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceBreakdown {
    /// Rolling resistance (N), >= 0 on grades below vertical.
    pub rolling_n: f64,
    /// Aerodynamic drag (N), >= 0 for forward relative flow.
    pub aero_n: f64,
    /// Inertial force M*a plus grade load M*g*sin(grade) (N); negative while slowing.
    pub net_n: f64,
    /// Force the drivetrain must apply at the wheels (N).
    pub traction_n: f64,
}

/// Rolling resistance: C_r * M * g * cos(grade), using the simulation mass.
pub fn rolling_force(cfg: &VehicleConfig, road: &RoadState) -> f64 {
    cfg.rolling_coeff * cfg.sim_mass_kg * cfg.gravity_ms2 * road.grade_rad.cos()
}

/// Aerodynamic drag: 0.5 * C_a * A_f * rho * v_rel^2, with
/// v_rel = vehicle speed + headwind.
pub fn aero_force(cfg: &VehicleConfig, speed_ms: f64, road: &RoadState) -> Result<f64, DynamicsError> {
    let v_rel = speed_ms + road.headwind_ms;
    if v_rel < 0.0 {
        return Err(DynamicsError::NegativeRelativeSpeed { v_rel_ms: v_rel });
    }
    Ok(0.5 * cfg.drag_coeff * cfg.frontal_area_m2 * cfg.air_density_kgm3 * v_rel * v_rel)
}

/// Grade load: M * g * sin(grade). Zero on a flat road.
pub fn grade_force(cfg: &VehicleConfig, road: &RoadState) -> f64 {
    if road.grade_rad == 0.0 {
        0.0
    } else {
        cfg.sim_mass_kg * cfg.gravity_ms2 * road.grade_rad.sin()
    }
}

/// Total traction force as net (inertial + grade) plus rolling plus drag.
pub fn traction_force(
    cfg: &VehicleConfig,
    speed_ms: f64,
    accel_ms2: f64,
    road: &RoadState,
) -> Result<ForceBreakdown, DynamicsError> {
    let rolling_n = rolling_force(cfg, road);
    let aero_n = aero_force(cfg, speed_ms, road)?;
    let net_n = cfg.sim_mass_kg * accel_ms2 + grade_force(cfg, road);
    Ok(ForceBreakdown {
        rolling_n,
        aero_n,
        net_n,
        traction_n: net_n + rolling_n + aero_n,
    })
}

/// Power at the wheels: traction force times speed. Sign follows the force.
pub fn tractive_power(fb: &ForceBreakdown, speed_ms: f64) -> f64 {
    fb.traction_n * speed_ms
}

/// Mechanical power the motors must produce (or absorb) for a given wheel
/// power, given the drivetrain efficiency.
///
/// Propulsion divides by the efficiency (losses between motor and wheel);
/// regeneration multiplies (losses between wheel and motor), so recovered
/// power never exceeds wheel power.
pub fn required_motor_power(p_traction_w: f64, drivetrain_eff: f64) -> f64 {
    if p_traction_w >= 0.0 {
        p_traction_w / drivetrain_eff
    } else {
        p_traction_w * drivetrain_eff
    }
}

/// Default rounding step for motor-rating selection (W).
pub const RATING_GRANULARITY_W: f64 = 10_000.0;

/// Motor rating that covers the worst-case design point (top speed at the
/// design acceleration on a flat road), rounded up to `granularity_w`.
pub fn size_motor_rating_with_granularity(cfg: &VehicleConfig, granularity_w: f64) -> f64 {
    let fb = traction_force(cfg, cfg.top_speed_ms, cfg.max_accel_ms2, &RoadState::flat())
        .expect("flat road with zero headwind cannot fail");
    let p_mech = required_motor_power(tractive_power(&fb, cfg.top_speed_ms), cfg.drivetrain_eff);
    if p_mech <= 0.0 {
        return 0.0;
    }
    (p_mech / granularity_w).ceil() * granularity_w
}

/// [`size_motor_rating_with_granularity`] at the default 10 kW step.
pub fn size_motor_rating(cfg: &VehicleConfig) -> f64 {
    size_motor_rating_with_granularity(cfg, RATING_GRANULARITY_W)
}
