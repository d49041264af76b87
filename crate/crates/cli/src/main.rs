//! Batch front end for the bus simulation toolkit.
//!
//! Exit codes are a stable contract: 0 success, 1 domain failure (sizing
//! check mismatch or infeasible depot schedule), 2 input error, 3 pack
//! depleted mid-cycle.

mod config;
mod output;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use ebus_core::charging;
use ebus_core::depot::{self, BusState, DepotError};
use ebus_core::simulator::{city_cycle, sizing_report, DriveCycle, SimError, SimulationReport};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ebus",
    version,
    about = "Battery-electric city bus sizing, simulation, charging, and depot scheduling"
)]
struct Cli {
    /// JSON configuration file; builtin defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config value, e.g. --set sim_mass_kg=28000 or
    /// --set sim.city_cycle.segments=4. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Output directory (fallback: $EBUS_OUTPUT_DIR, then ./out).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the sizing chain and check it against the reference design.
    Size,
    /// Run drive cycles through the simulator.
    Simulate {
        /// Cycle CSV files (`t_s,v_ms` with optional `grade_deg`); the builtin
        /// city cycle when omitted.
        #[arg(long = "cycle", value_name = "CSV")]
        cycles: Vec<PathBuf>,
        /// Run up to N cycles in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run one charging session on the configured pack.
    Charge {
        /// Starting state of charge.
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        /// Target state of charge.
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        /// Constant-current rate override (1/h).
        #[arg(long = "crate", value_name = "C_RATE")]
        c_rate: Option<f64>,
        /// Charger power cap override (kW).
        #[arg(long, value_name = "KW")]
        charger_kw: Option<f64>,
        /// Session time step (s).
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
    },
    /// Schedule overnight charging for a fleet file.
    Depot {
        /// Fleet JSON scenario.
        #[arg(long, value_name = "JSON")]
        fleet: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let resolved = config::load(cli.config.as_deref(), &cli.set)?;
    let out_dir = output::output_dir(cli.output_dir);
    match cli.command {
        Command::Size => cmd_size(&resolved, &out_dir),
        Command::Simulate { cycles, jobs } => cmd_simulate(&resolved, &out_dir, &cycles, jobs),
        Command::Charge {
            from,
            to,
            c_rate,
            charger_kw,
            dt,
        } => cmd_charge(&resolved, &out_dir, from, to, c_rate, charger_kw, dt),
        Command::Depot { fleet } => cmd_depot(&resolved, &out_dir, &fleet),
    }
}

fn cmd_size(resolved: &config::Resolved, out_dir: &Path) -> Result<ExitCode> {
    let report = sizing_report(
        &resolved.vehicle,
        &resolved.front,
        &resolved.rear,
        &resolved.pack,
        &resolved.converter,
    );
    output::write_json(out_dir, "sizing.json", &report)?;
    let table = report.to_table_string();
    output::write_text(out_dir, "sizing.txt", &table)?;
    output::write_run_meta(out_dir, "size", &[])?;
    print!("{table}");
    Ok(if report.all_applicable_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn load_cycles(resolved: &config::Resolved, paths: &[PathBuf]) -> Result<Vec<DriveCycle>> {
    if paths.is_empty() {
        return Ok(vec![city_cycle(&resolved.city_cycle)]);
    }
    let mut cycles = Vec::with_capacity(paths.len());
    let mut stems: Vec<String> = Vec::new();
    for path in paths {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("cycle")
            .to_string();
        if stems.contains(&stem) {
            bail!("duplicate cycle name '{stem}'; rename one of the files");
        }
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read cycle file {}", path.display()))?;
        let cycle = DriveCycle::from_csv_str(&stem, &text)
            .with_context(|| format!("cycle file {}", path.display()))?;
        stems.push(stem);
        cycles.push(cycle);
    }
    Ok(cycles)
}

fn cmd_simulate(
    resolved: &config::Resolved,
    out_dir: &Path,
    cycle_paths: &[PathBuf],
    jobs: usize,
) -> Result<ExitCode> {
    let cycles = load_cycles(resolved, cycle_paths)?;
    for cycle in &cycles {
        if cycle.max_speed_ms() > resolved.vehicle.top_speed_ms {
            eprintln!(
                "warning: cycle '{}' peaks at {:.2} m/s, above the configured top speed {:.2} m/s; \
                 simulating it anyway",
                cycle.name,
                cycle.max_speed_ms(),
                resolved.vehicle.top_speed_ms
            );
        }
    }

    let simulation = resolved.simulation();
    let jobs = jobs.max(1);
    let mut results: Vec<Option<Result<SimulationReport, SimError>>> =
        (0..cycles.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for chunk in cycles
            .iter()
            .zip(results.iter_mut())
            .collect::<Vec<_>>()
            .chunks_mut(jobs)
        {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(cycle, _)| {
                    let sim = simulation.clone();
                    let cycle: &DriveCycle = cycle;
                    scope.spawn(move || sim.run(cycle))
                })
                .collect();
            for ((_, slot), handle) in chunk.iter_mut().zip(handles) {
                **slot = Some(handle.join().expect("simulation thread panicked"));
            }
        }
    });

    let mut worst = ExitCode::SUCCESS;
    let inputs: Vec<String> = cycles.iter().map(|c| c.name.clone()).collect();
    for (cycle, result) in cycles.iter().zip(results) {
        let (report, depleted) = match result.expect("every cycle ran") {
            Ok(report) => (report, false),
            Err(SimError::PackDepleted { partial, .. }) => (*partial, true),
            Err(err) => return Err(err).context(format!("cycle '{}'", cycle.name)),
        };
        write_sim_outputs(out_dir, cycle, &report)?;
        println!(
            "{}: {:.3} km, {:.1} Wh/km, projected range {}, final soc {:.3}{}",
            cycle.name,
            report.distance_km,
            report.energy_per_km_wh.unwrap_or(f64::NAN),
            report
                .projected_range_km
                .map_or("n/a".to_string(), |r| format!("{r:.1} km")),
            report.final_soc,
            if depleted { " [PACK DEPLETED]" } else { "" }
        );
        if depleted {
            worst = ExitCode::from(3);
        }
    }
    output::write_run_meta(out_dir, "simulate", &inputs)?;
    Ok(worst)
}

fn write_sim_outputs(out_dir: &Path, cycle: &DriveCycle, report: &SimulationReport) -> Result<()> {
    let stem = &cycle.name;
    output::write_json(out_dir, &format!("{stem}.report.json"), report)?;
    output::write_text(out_dir, &format!("{stem}.trace.csv"), &output::sim_trace_csv(report))?;
    output::write_text(
        out_dir,
        &format!("{stem}.power.dat"),
        &output::two_column_dat(
            "t_s battery_power_w",
            report.trace.iter().map(|s| (s.t_s, s.batt_power_w)),
        ),
    )?;
    output::write_text(
        out_dir,
        &format!("{stem}.soc.dat"),
        &output::two_column_dat("t_s soc", report.trace.iter().map(|s| (s.t_s, s.soc))),
    )?;
    Ok(())
}

/// Charge session report with derived figures and operational notes.
#[derive(Serialize)]
struct ChargeReport {
    start_soc: f64,
    target_soc: f64,
    elapsed_s: f64,
    energy_delivered_wh: f64,
    analytic_time_to_target_s: f64,
    notes: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_charge(
    resolved: &config::Resolved,
    out_dir: &Path,
    from: f64,
    to: f64,
    c_rate: Option<f64>,
    charger_kw: Option<f64>,
    dt: f64,
) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&from) {
        bail!("--from must be in [0, 1], got {from}");
    }
    if dt <= 0.0 {
        bail!("--dt must be > 0, got {dt}");
    }
    let mut profile = resolved.profile.clone();
    if let Some(c) = c_rate {
        profile.cc_c_rate = c;
    }
    if let Some(kw) = charger_kw {
        profile.charger_power_cap_w = kw * 1000.0;
    }
    let profile = profile.validate()?;

    let mut pack = resolved.pack.clone();
    let session = charging::charge(&mut pack, &profile, from, to, dt)?;
    let report = ChargeReport {
        start_soc: session.start_soc,
        target_soc: session.target_soc,
        elapsed_s: session.elapsed_s,
        energy_delivered_wh: session.energy_delivered_wh,
        analytic_time_to_target_s: charging::time_to_reach(&resolved.pack, &profile, from, to),
        notes: charging::session_notes(&resolved.pack, &profile),
    };
    output::write_json(out_dir, "session.json", &report)?;
    output::write_text(out_dir, "session_trace.csv", &output::charge_trace_csv(&session))?;
    output::write_run_meta(out_dir, "charge", &[])?;
    println!(
        "charged {:.3} -> {:.3} in {} s ({:.1} kWh delivered)",
        session.start_soc,
        pack.soc,
        session.elapsed_s,
        session.energy_delivered_wh / 1000.0
    );
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_depot(resolved: &config::Resolved, out_dir: &Path, fleet_path: &Path) -> Result<ExitCode> {
    let fleet_file = config::load_fleet(fleet_path)?;
    let fleet: Vec<BusState> = fleet_file
        .buses
        .iter()
        .map(|b| BusState {
            id: b.id.clone(),
            arrival_time_s: b.arrival_time_s,
            arrival_soc: b.arrival_soc,
            departure_deadline_s: b.departure_deadline_s,
            pack: resolved.pack.clone(),
        })
        .collect();

    let report = match depot::schedule(&fleet, &resolved.depot, &resolved.profile) {
        Ok(report) => report,
        // A site cap that cannot power one charger is a domain verdict, not
        // a malformed input.
        Err(err @ DepotError::InfeasibleConfig { .. }) => {
            eprintln!("infeasible: {err}");
            return Ok(ExitCode::from(1));
        }
        Err(err) => return Err(err.into()),
    };
    output::write_json(out_dir, "depot_report.json", &report)?;
    output::write_text(out_dir, "depot_events.csv", &output::depot_events_csv(&report))?;
    output::write_run_meta(out_dir, "depot", &[fleet_path.display().to_string()])?;
    println!(
        "{} buses, {:.0}% charger utilization, feasible: {}",
        report.buses.len(),
        report.charger_utilization * 100.0,
        report.feasible
    );
    for bus in &report.buses {
        println!(
            "  {}: start {}, release {:.0} s, final soc {:.3}{}",
            bus.id,
            bus.start_charge_s
                .map_or("never".to_string(), |t| format!("{t:.0} s")),
            bus.release_s,
            bus.final_soc,
            if bus.charged_full { "" } else { " [NOT FULL]" }
        );
    }
    Ok(if report.feasible {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
