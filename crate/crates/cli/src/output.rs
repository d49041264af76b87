//! Report writers. Every canonical output is a pure function of the inputs;
//! wall-clock metadata goes to a `run_meta.json` sidecar so reruns stay
//! byte-identical.

use anyhow::{Context, Result};
use ebus_core::charging::ChargeSession;
use ebus_core::depot::DepotReport;
use ebus_core::simulator::SimulationReport;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Pick the output directory: flag, then `EBUS_OUTPUT_DIR`, then `./out`.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("EBUS_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

/// Timestamp sidecar, the one file allowed to differ between reruns.
pub fn write_run_meta(dir: &Path, command: &str, inputs: &[String]) -> Result<()> {
    #[derive(Serialize)]
    struct RunMeta<'a> {
        command: &'a str,
        inputs: &'a [String],
        unix_time_s: u64,
    }
    let meta = RunMeta {
        command,
        inputs,
        unix_time_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    write_json(dir, "run_meta.json", &meta)?;
    Ok(())
}

pub fn sim_trace_csv(report: &SimulationReport) -> String {
    let mut out = String::from(
        "t_s,v_ms,accel_ms2,rolling_n,aero_n,net_n,traction_n,front_mech_w,rear_mech_w,batt_power_w,soc\n",
    );
    for s in &report.trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            s.t_s,
            s.v_ms,
            s.accel_ms2,
            s.rolling_n,
            s.aero_n,
            s.net_n,
            s.traction_n,
            s.front_mech_w,
            s.rear_mech_w,
            s.batt_power_w,
            s.soc
        ));
    }
    out
}

/// Two-column series for gnuplot: `t value` per line.
pub fn two_column_dat(title: &str, rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut out = format!("# {title}\n");
    for (t, v) in rows {
        out.push_str(&format!("{t} {v}\n"));
    }
    out
}

pub fn charge_trace_csv(session: &ChargeSession) -> String {
    let mut out = String::from("t_s,soc,power_w\n");
    for p in &session.trace {
        out.push_str(&format!("{},{},{}\n", p.t_s, p.soc, p.power_w));
    }
    out
}

pub fn depot_events_csv(report: &DepotReport) -> String {
    let mut out = String::from("t_s,bus_id,event,soc\n");
    for e in &report.events {
        let kind = match e.kind {
            ebus_core::depot::DepotEventKind::Arrival => "arrival",
            ebus_core::depot::DepotEventKind::ChargeStart => "charge-start",
            ebus_core::depot::DepotEventKind::ChargeComplete => "charge-complete",
            ebus_core::depot::DepotEventKind::DeadlineRelease => "deadline-release",
        };
        out.push_str(&format!("{},{},{},{}\n", e.t_s, e.bus_id, kind, e.soc));
    }
    out
}
