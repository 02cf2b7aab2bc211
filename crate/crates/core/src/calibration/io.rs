use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fit::{FlowSample, Phase};
use crate::error::Error;
use crate::sim::{telemetry_header, TelemetryFrame};
use crate::units::PA_PER_BAR;

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<std::fs::File, Error> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

/// Reads a telemetry CSV written by the simulator.
pub fn read_telemetry(path: impl AsRef<Path>) -> Result<Vec<TelemetryFrame>, Error> {
    let path = path.as_ref();
    read_telemetry_from(open(path)?).map_err(|m| format_err(path, m))
}

pub(crate) fn read_telemetry_from<R: Read>(input: R) -> Result<Vec<TelemetryFrame>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(telemetry_header().iter().map(String::as_str)) {
        return Err("header does not match the telemetry column set".into());
    }
    let mut frames = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        frames.push(TelemetryFrame::from_record(&rec).map_err(|e| format!("row {}: {e}", i + 1))?);
    }
    Ok(frames)
}

#[derive(Debug, Deserialize)]
struct FlowRow {
    valve_angle_deg: f64,
    upstream_bar: f64,
    downstream_bar: f64,
    flow: f64,
    #[serde(default)]
    density_kg_m3: Option<f64>,
    phase: Phase,
}

/// Reads a flow-sample CSV with columns `valve_angle_deg, upstream_bar,
/// downstream_bar, flow, density_kg_m3, phase`. Flow is kg/s for gas rows
/// and m³/s for liquid rows.
pub fn read_flow_samples(path: impl AsRef<Path>) -> Result<Vec<FlowSample>, Error> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_reader(open(path)?);
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<FlowRow>().enumerate() {
        let row = row.map_err(|e| format_err(path, format!("row {}: {e}", i + 1)))?;
        out.push(FlowSample {
            valve_angle: row.valve_angle_deg,
            upstream_pressure: row.upstream_bar * PA_PER_BAR,
            downstream_pressure: row.downstream_bar * PA_PER_BAR,
            flow: row.flow,
            fluid_density: row.density_kg_m3.unwrap_or(0.0),
            phase: row.phase,
        });
    }
    Ok(out)
}

pub const FIT_SCHEMA_VERSION: u32 = 1;

/// Result file written by the calibration commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    pub schema_version: u32,
    /// `cv`, `gamma` or `choked`.
    pub fit: String,
    pub parameters: BTreeMap<String, f64>,
    pub residual_rms: f64,
    pub sample_count: usize,
}

impl FitReport {
    pub fn new(fit: &str, parameters: &[(&str, f64)], residual_rms: f64, sample_count: usize) -> Self {
        FitReport {
            schema_version: FIT_SCHEMA_VERSION,
            fit: fit.to_string(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            residual_rms,
            sample_count,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fit report serializes")
    }
}

pub fn write_fit_report(report: &FitReport, path: impl AsRef<Path>) -> Result<(), Error> {
    let path = path.as_ref();
    std::fs::write(path, report.to_toml()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::write_telemetry;

    #[test]
    fn flow_samples_parse_in_si() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(
            &p,
            "valve_angle_deg,upstream_bar,downstream_bar,flow,density_kg_m3,phase\n\
             30,42,35,0.001,1141,liquid\n\
             20,300,42,0.05,,gas\n",
        )
        .unwrap();
        let s = read_flow_samples(&p).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].upstream_pressure, 42e5);
        assert_eq!(s[0].phase, Phase::Liquid);
        assert_eq!(s[1].fluid_density, 0.0);
        assert_eq!(s[1].phase, Phase::Gas);
    }

    #[test]
    fn bad_phase_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(
            &p,
            "valve_angle_deg,upstream_bar,downstream_bar,flow,density_kg_m3,phase\n30,42,35,0.001,1141,plasma\n",
        )
        .unwrap();
        assert!(matches!(read_flow_samples(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn telemetry_reader_rejects_foreign_header() {
        assert!(read_telemetry_from("a,b\n1,2\n".as_bytes()).is_err());
        let mut buf = Vec::new();
        write_telemetry(&[], &mut buf).unwrap();
        assert!(read_telemetry_from(buf.as_slice()).unwrap().is_empty());
    }

    #[test]
    fn report_round_trips() {
        let r = FitReport::new("gamma", &[("gamma_deg", 73.1)], 0.2, 40);
        let back: FitReport = toml::from_str(&r.to_toml()).unwrap();
        assert_eq!(back, r);
    }
}
