//! Telemetry frames and their CSV form.
//!
//! Columns: `time_s`, then for each regulator in the order ox_tank,
//! fuel_tank, ox_inj, fuel_inj the six fields `<id>_setpoint_bar`,
//! `<id>_pressure_bar`, `<id>_valve_angle_deg`, `<id>_feedforward_deg`,
//! `<id>_u1_deg`, `<id>_u2`, then `supply_pressure_bar`, `mdot_ox_kg_s`,
//! `mdot_fuel_kg_s`, `mdot_gas_kg_s`, `chamber_pressure_bar`, `thrust_n`,
//! `of_ratio` (empty when there is no fuel flow) and `events` (flag names
//! joined by `|`). Numbers carry nine significant digits.

use std::io::Write;
use std::path::Path;

use bitflags::bitflags;

use crate::error::Error;
use crate::scenario::EregId;

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct Events: u8 {
        const OX_DEPLETED = 1;
        const FUEL_DEPLETED = 1 << 1;
        const SUPPLY_DEPLETED = 1 << 2;
        const ABORT = 1 << 3;
    }
}

const EVENT_NAMES: [(Events, &str); 4] = [
    (Events::OX_DEPLETED, "ox_depleted"),
    (Events::FUEL_DEPLETED, "fuel_depleted"),
    (Events::SUPPLY_DEPLETED, "supply_depleted"),
    (Events::ABORT, "abort"),
];

impl Events {
    pub fn any_depletion(self) -> bool {
        self.intersects(Events::OX_DEPLETED | Events::FUEL_DEPLETED)
    }

    pub fn to_field(self) -> String {
        EVENT_NAMES
            .iter()
            .filter(|(f, _)| self.contains(*f))
            .map(|(_, n)| *n)
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn from_field(s: &str) -> Option<Events> {
        let mut out = Events::empty();
        for part in s.split('|').map(str::trim).filter(|p| !p.is_empty()) {
            let (flag, _) = EVENT_NAMES.iter().find(|(_, n)| *n == part)?;
            out |= *flag;
        }
        Some(out)
    }
}

/// One regulator's slice of a frame, in telemetry units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EregFrame {
    pub setpoint_bar: f64,
    pub pressure_bar: f64,
    pub valve_angle_deg: f64,
    pub feedforward_deg: f64,
    pub u1_deg: f64,
    pub u2: f64,
}

impl EregFrame {
    pub fn error_bar(&self) -> f64 {
        self.setpoint_bar - self.pressure_bar
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TelemetryFrame {
    pub time: f64,
    pub eregs: [EregFrame; 4],
    pub supply_pressure_bar: f64,
    pub mdot_ox: f64,
    pub mdot_fuel: f64,
    pub mdot_gas: f64,
    pub chamber_pressure_bar: f64,
    pub thrust: f64,
    pub of_ratio: Option<f64>,
    /// Sticky: a flag stays set in every later frame.
    pub events: Events,
}

impl TelemetryFrame {
    pub fn ereg(&self, id: EregId) -> &EregFrame {
        &self.eregs[id.index()]
    }
}

const EREG_FIELDS: [&str; 6] = [
    "setpoint_bar",
    "pressure_bar",
    "valve_angle_deg",
    "feedforward_deg",
    "u1_deg",
    "u2",
];

const TAIL_FIELDS: [&str; 8] = [
    "supply_pressure_bar",
    "mdot_ox_kg_s",
    "mdot_fuel_kg_s",
    "mdot_gas_kg_s",
    "chamber_pressure_bar",
    "thrust_n",
    "of_ratio",
    "events",
];

pub fn telemetry_header() -> Vec<String> {
    let mut h = vec!["time_s".to_string()];
    for id in EregId::ALL {
        for f in EREG_FIELDS {
            h.push(format!("{}_{}", id.name(), f));
        }
    }
    h.extend(TAIL_FIELDS.iter().map(|s| s.to_string()));
    h
}

/// Shortest decimal rendering of `x` rounded to nine significant digits.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { format!("{x}") };
    }
    let sci = format!("{x:.8e}");
    let rounded: f64 = sci.parse().expect("formatted float parses");
    // plain notation for the values telemetry normally carries
    let exp = rounded.abs().log10().floor() as i32;
    if (-5..=12).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{rounded:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        sci
    }
}

impl TelemetryFrame {
    fn to_record(&self) -> Vec<String> {
        let mut r = Vec::with_capacity(1 + 24 + 8);
        r.push(format_sig9(self.time));
        for e in &self.eregs {
            for v in [
                e.setpoint_bar,
                e.pressure_bar,
                e.valve_angle_deg,
                e.feedforward_deg,
                e.u1_deg,
                e.u2,
            ] {
                r.push(format_sig9(v));
            }
        }
        for v in [
            self.supply_pressure_bar,
            self.mdot_ox,
            self.mdot_fuel,
            self.mdot_gas,
            self.chamber_pressure_bar,
            self.thrust,
        ] {
            r.push(format_sig9(v));
        }
        r.push(self.of_ratio.map(format_sig9).unwrap_or_default());
        r.push(self.events.to_field());
        r
    }

    pub(crate) fn from_record(rec: &csv::StringRecord) -> Result<Self, String> {
        if rec.len() != 33 {
            return Err(format!("expected 33 columns, found {}", rec.len()));
        }
        let num = |i: usize| -> Result<f64, String> {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| format!("column {i}: '{}' is not a number", &rec[i]))
        };
        let mut eregs = [EregFrame::default(); 4];
        for (k, e) in eregs.iter_mut().enumerate() {
            let b = 1 + 6 * k;
            *e = EregFrame {
                setpoint_bar: num(b)?,
                pressure_bar: num(b + 1)?,
                valve_angle_deg: num(b + 2)?,
                feedforward_deg: num(b + 3)?,
                u1_deg: num(b + 4)?,
                u2: num(b + 5)?,
            };
        }
        let of_ratio = if rec[31].trim().is_empty() {
            None
        } else {
            Some(num(31)?)
        };
        Ok(TelemetryFrame {
            time: num(0)?,
            eregs,
            supply_pressure_bar: num(25)?,
            mdot_ox: num(26)?,
            mdot_fuel: num(27)?,
            mdot_gas: num(28)?,
            chamber_pressure_bar: num(29)?,
            thrust: num(30)?,
            of_ratio,
            events: Events::from_field(&rec[32])
                .ok_or_else(|| format!("unknown event flag in '{}'", &rec[32]))?,
        })
    }
}

/// Writes the header and one row per frame.
pub fn write_telemetry<W: Write>(frames: &[TelemetryFrame], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(telemetry_header())?;
    for f in frames {
        w.write_record(f.to_record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_telemetry(frames: &[TelemetryFrame], path: impl AsRef<Path>) -> Result<(), Error> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_telemetry(frames, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    })
}
