use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use ereg_sim::calibration::{
    cv_from_sample, fit_choked_constant, fit_cv_curve, fit_gamma, read_flow_samples,
    read_telemetry, steady_state_records, write_fit_report, FitReport,
};
use ereg_sim::control::ControllerVariant;
use ereg_sim::error::FitError;
use ereg_sim::fluids::ValveModel;
use ereg_sim::scenario::{baseline_file, size_mock_injector, EregId, Mode, ScenarioConfig};
use ereg_sim::sim::{
    compare_controllers, emit_telemetry, regulation_metrics, simulate, RegulationMetrics,
    RunOptions,
};
use ereg_sim::units::{bar_to_pa, choked_constant_from_si, choked_constant_to_si, si_cv_to_us, us_cv_to_si};
use ereg_sim::Error;

#[derive(Parser)]
#[command(name = "ereg", version, about = "Electronic pressure regulator feed-system simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write telemetry CSV.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's controller variant (pid, ff, ff+dyn).
        #[arg(long)]
        controller: Option<ControllerVariant>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Regulation metrics of a telemetry file, as JSON.
    Metrics {
        #[arg(long)]
        telemetry: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run several controller variants on the same scenario.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values = ["pid", "ff", "ff+dyn"])]
        variants: Vec<ControllerVariant>,
    },
    /// Fit an empirical constant from logged data.
    Calibrate {
        #[command(subcommand)]
        fit: CalibrateCommand,
    },
    /// Orifice area for a mock injector passing the target flow.
    SizeInjector {
        #[arg(long)]
        scenario: PathBuf,
        /// kg/s.
        #[arg(long)]
        target_mdot: f64,
        #[arg(long, value_enum)]
        propellant: Propellant,
        /// Defaults to the profile's starting injector setpoint.
        #[arg(long)]
        upstream_bar: Option<f64>,
        /// Defaults to ambient.
        #[arg(long)]
        downstream_bar: Option<f64>,
        /// Defaults to the scenario injector's Cd.
        #[arg(long)]
        cd: Option<f64>,
    },
    /// Print a baseline scenario file.
    Template {
        #[arg(long, value_enum, default_value = "staticfire")]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CalibrateCommand {
    /// Valve curve from flow samples.
    Cv {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Choked constant for gas rows, kg/(s·bar·Cv).
        #[arg(long)]
        choked_k: Option<f64>,
    },
    /// Tank feedforward gain from closed-loop telemetry.
    Gamma {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        theta_zero_deg: f64,
        /// Restrict to one tank regulator; both are pooled by default.
        #[arg(long, value_enum)]
        ereg: Option<TankEreg>,
    },
    /// Choked constant from gas flow samples through a known valve.
    Choked {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Valve slope, Cv per degree.
        #[arg(long)]
        cv_per_deg: f64,
        #[arg(long, default_value_t = 10.0)]
        theta_zero_deg: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Propellant {
    Ox,
    Fuel,
}

#[derive(Clone, Copy, ValueEnum)]
enum TankEreg {
    OxTank,
    FuelTank,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Staticfire,
    Coldflow,
    Waterflow,
}

/// Failure reported on stderr as one JSON line.
struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 2,
            _ => 1,
        };
        Failure {
            kind: e.kind(),
            message: e.to_string(),
            code,
        }
    }
}

fn fail(e: impl Into<Error>) -> Failure {
    Failure::from(e.into())
}

fn metrics_json(m: &RegulationMetrics) -> Value {
    let mut map = Map::new();
    for id in EregId::ALL {
        map.insert(id.name().into(), serde_json::to_value(m.get(id)).expect("metrics serialize"));
    }
    Value::Object(map)
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, Failure> {
    Ok(ScenarioConfig::load(path)?)
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            scenario,
            out,
            controller,
            seed,
        } => {
            let mut cfg = load(&scenario)?;
            if let Some(v) = controller {
                cfg.variant = v;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let result = simulate(&cfg, &RunOptions::default())?;
            emit_telemetry(&result.frames, &out)?;
            let last = result.frames.last();
            println!(
                "{}",
                json!({
                    "scenario": cfg.name,
                    "controller": cfg.variant.as_str(),
                    "rows": result.frames.len(),
                    "final_time_s": last.map(|f| f.time),
                    "events": last.map(|f| f.events.to_field()),
                    "out": out,
                })
            );
            if let Some(abort) = result.abort {
                return Err(Failure {
                    kind: "abort",
                    message: format!("t = {:.3} s: {}", abort.time, abort.reason),
                    code: 3,
                });
            }
        }
        Command::Metrics { telemetry, scenario } => {
            let cfg = load(&scenario)?;
            let frames = read_telemetry(&telemetry)?;
            if frames.is_empty() {
                return Err(Failure {
                    kind: "format",
                    message: format!("{}: no telemetry rows", telemetry.display()),
                    code: 1,
                });
            }
            println!("{}", metrics_json(&regulation_metrics(&frames, &cfg)));
        }
        Command::Compare { scenario, variants } => {
            let cfg = load(&scenario)?;
            let report = compare_controllers(&cfg, &variants);
            let rows: Vec<Value> = report
                .variants
                .iter()
                .map(|v| match &v.outcome {
                    Ok(o) => json!({
                        "variant": v.variant.as_str(),
                        "final_time_s": o.final_time,
                        "events": o.events.to_field(),
                        "metrics": metrics_json(&o.metrics),
                    }),
                    Err(e) => json!({ "variant": v.variant.as_str(), "error": e }),
                })
                .collect();
            println!("{}", json!({ "scenario": report.scenario, "variants": rows }));
        }
        Command::Calibrate { fit } => calibrate(fit)?,
        Command::SizeInjector {
            scenario,
            target_mdot,
            propellant,
            upstream_bar,
            downstream_bar,
            cd,
        } => {
            let cfg = load(&scenario)?;
            let i = propellant as usize;
            let upstream = upstream_bar.map(bar_to_pa).unwrap_or(cfg.profile.start[i]);
            let downstream = downstream_bar.map(bar_to_pa).unwrap_or(cfg.ambient_pressure);
            let cd = cd.unwrap_or(cfg.injectors[i].cd);
            let area = size_mock_injector(target_mdot, cfg.densities()[i], upstream, downstream, cd)
                .map_err(fail)?;
            println!(
                "{}",
                json!({
                    "area_m2": area,
                    "diameter_m": (4.0 * area / std::f64::consts::PI).sqrt(),
                    "cd": cd,
                })
            );
        }
        Command::Template { mode, out } => {
            let mode = match mode {
                ModeArg::Staticfire => Mode::Staticfire,
                ModeArg::Coldflow => Mode::Coldflow,
                ModeArg::Waterflow => Mode::Waterflow,
            };
            let text = baseline_file(mode).to_toml();
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| fail(Error::io(&p, e)))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn calibrate(cmd: CalibrateCommand) -> Result<(), Failure> {
    let (report, out) = match cmd {
        CalibrateCommand::Cv { data, out, choked_k } => {
            let samples = read_flow_samples(&data)?;
            let k = choked_k.map(choked_constant_to_si);
            let pairs = samples
                .iter()
                .map(|s| cv_from_sample(s, k).map(|cv| (s.valve_angle, cv)))
                .collect::<Result<Vec<_>, FitError>>()
                .map_err(fail)?;
            let fit = fit_cv_curve(&pairs).map_err(fail)?;
            let report = FitReport::new(
                "cv",
                &[
                    ("cv_per_deg", si_cv_to_us(fit.alpha)),
                    ("theta_zero_deg", fit.theta_zero),
                ],
                si_cv_to_us(fit.residual_rms),
                fit.sample_count,
            );
            (report, out)
        }
        CalibrateCommand::Gamma {
            data,
            out,
            theta_zero_deg,
            ereg,
        } => {
            let frames = read_telemetry(&data)?;
            let ids: &[EregId] = match ereg {
                Some(TankEreg::OxTank) => &[EregId::OxTank],
                Some(TankEreg::FuelTank) => &[EregId::FuelTank],
                None => &[EregId::OxTank, EregId::FuelTank],
            };
            let records: Vec<_> = ids
                .iter()
                .flat_map(|&id| steady_state_records(&frames, id))
                .collect();
            let fit = fit_gamma(&records, theta_zero_deg).map_err(fail)?;
            let report = FitReport::new(
                "gamma",
                &[("gamma_deg", fit.gamma), ("theta_zero_deg", theta_zero_deg)],
                fit.residual_rms,
                fit.sample_count,
            );
            (report, out)
        }
        CalibrateCommand::Choked {
            data,
            out,
            cv_per_deg,
            theta_zero_deg,
        } => {
            let samples = read_flow_samples(&data)?;
            let valve = ValveModel::new(us_cv_to_si(cv_per_deg), theta_zero_deg, f64::INFINITY, 0.0)
                .map_err(fail)?;
            let fit = fit_choked_constant(&samples, &valve).map_err(fail)?;
            let report = FitReport::new(
                "choked",
                &[("choked_k", choked_constant_from_si(fit.k))],
                fit.residual_rms,
                fit.sample_count,
            );
            (report, out)
        }
    };
    write_fit_report(&report, &out)?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
