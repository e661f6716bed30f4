//! Parameter tables of the subcommands. Defaults use the same spelling as
//! configuration files.

use super::config::Dim;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Quantity(Dim),
    Number,
    Integer,
    Text,
    Flag,
    Choice(&'static [&'static str]),
}

impl Kind {
    pub fn describe(self) -> String {
        match self {
            Kind::Quantity(d) => format!("a quantity string in {}", d.canonical_unit()),
            Kind::Number => "a number".into(),
            Kind::Integer => "an integer".into(),
            Kind::Text => "a string".into(),
            Kind::Flag => "true/false".into(),
            Kind::Choice(opts) => format!("one of {}", opts.join(", ")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeySpec {
    pub key: &'static str,
    pub kind: Kind,
    /// `None` marks a required key.
    pub default: Option<&'static str>,
    /// Lower bound in SI units.
    pub min: Option<f64>,
    pub help: &'static str,
}

const fn q(key: &'static str, dim: Dim, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, kind: Kind::Quantity(dim), default: Some(default), min: None, help }
}

const fn qpos(key: &'static str, dim: Dim, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, kind: Kind::Quantity(dim), default: Some(default), min: Some(0.0), help }
}

const fn int(key: &'static str, default: &'static str, min: f64, help: &'static str) -> KeySpec {
    KeySpec { key, kind: Kind::Integer, default: Some(default), min: Some(min), help }
}

const fn num(key: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, kind: Kind::Number, default: Some(default), min: None, help }
}

const fn choice(key: &'static str, options: &'static [&'static str], default: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, kind: Kind::Choice(options), default: Some(default), min: None, help }
}

const fn required_text(key: &'static str, help: &'static str) -> KeySpec {
    KeySpec { key, kind: Kind::Text, default: None, min: None, help }
}

const DRIVES: &[&str] = &["longitudinal", "transverse"];

pub const COMMANDS: [&str; 10] =
    ["trap-design", "odmr-sim", "berry-shift", "spin-dynamics", "rabi-sweep", "thermal", "rotor", "cooling-sim", "fit-odmr", "fit-psd"];

const TRAP: &[KeySpec] = &[
    qpos("ring_inner", Dim::Length, "270 um", "inner ring radius a"),
    qpos("ring_outer", Dim::Length, "450 um", "outer ring radius b"),
    qpos("drive_voltage", Dim::Voltage, "300 V", "drive amplitude"),
    qpos("drive_frequency", Dim::Frequency, "16 kHz", "drive frequency; give rad/s for angular"),
    KeySpec { key: "charges", kind: Kind::Number, default: Some("2000"), min: Some(1.0), help: "elementary charges on the particle" },
    qpos("radius", Dim::Length, "264 nm", "particle radius"),
    qpos("density", Dim::Density, "3500 kg/m3", "particle density"),
    qpos("profile_z_min", Dim::Length, "20 um", "first profile height"),
    qpos("profile_z_max", Dim::Length, "2000 um", "last profile height"),
    int("profile_points", "400", 3.0, "profile samples"),
];

const ODMR_SIM: &[KeySpec] = &[
    q("crystal_tilt", Dim::Angle, "0 deg", "tilt of the [111] axis from the rotation axis"),
    q("b_static", Dim::MagneticField, "0 G", "static field along the rotation axis"),
    q("rotation", Dim::Frequency, "0 MHz", "signed rotation rate (negative = clockwise)"),
    qpos("zero_field", Dim::Frequency, "2.87 GHz", "zero-field splitting D"),
    qpos("strain", Dim::Frequency, "6.7 MHz", "strain splitting E"),
    qpos("linewidth", Dim::Frequency, "19 MHz", "intrinsic Lorentzian FWHM"),
    num("contrast", "0.03", "contrast per dip"),
    choice("drive", DRIVES, "longitudinal", "microwave component"),
    qpos("f_min", Dim::Frequency, "2.70 GHz", "grid start"),
    qpos("f_max", Dim::Frequency, "3.05 GHz", "grid end"),
    int("points", "3501", 3.0, "grid points"),
];

const BERRY_SHIFT: &[KeySpec] = &[
    q("theta", Dim::Angle, "20.7 deg", "NV axis vs rotation axis"),
    q("b_static", Dim::MagneticField, "0 mT", "static field along the rotation axis"),
    qpos("rotation_min", Dim::Frequency, "0.1 MHz", "smallest rotation rate"),
    qpos("rotation_max", Dim::Frequency, "10 MHz", "largest rotation rate"),
    int("points", "100", 2.0, "rates sampled"),
    choice("sense", &["ccw", "cw"], "ccw", "rotation sense"),
    KeySpec { key: "target_ms", kind: Kind::Choice(&["+1", "-1"]), default: Some("+1"), min: None, help: "target spin level" },
    choice("drive", DRIVES, "longitudinal", "microwave component"),
    qpos("zero_field", Dim::Frequency, "2.87 GHz", "zero-field splitting D"),
];

const SPIN_DYNAMICS: &[KeySpec] = &[
    q("theta", Dim::Angle, "20.7 deg", "NV axis vs rotation axis"),
    q("phi0", Dim::Angle, "0 deg", "initial azimuth"),
    q("b_static", Dim::MagneticField, "10 mT", "static field along the rotation axis"),
    q("rotation", Dim::Frequency, "1 MHz", "signed rotation rate"),
    qpos("mw_amplitude", Dim::MagneticField, "0.1 mT", "microwave amplitude"),
    q("mw_detuning", Dim::Frequency, "0 MHz", "carrier offset from the exact resonance"),
    choice("drive", DRIVES, "longitudinal", "microwave component"),
    KeySpec { key: "target_ms", kind: Kind::Choice(&["+1", "-1"]), default: Some("+1"), min: None, help: "target spin level" },
    qpos("zero_field", Dim::Frequency, "2.87 GHz", "zero-field splitting D"),
    qpos("duration", Dim::Time, "1 us", "pulse length"),
    int("samples", "200", 1.0, "output samples"),
    KeySpec { key: "phase_per_step", kind: Kind::Number, default: Some("0.1"), min: Some(1e-6), help: "‖H‖·Δt per step" },
];

const RABI_SWEEP: &[KeySpec] = &[
    q("theta", Dim::Angle, "22 deg", "NV axis vs rotation axis"),
    q("theta_prime", Dim::Angle, "8.5 deg", "microwave tilt from the rotation axis"),
    choice("plane", &["yz", "xz"], "yz", "plane containing the microwave field"),
    qpos("mw_amplitude", Dim::MagneticField, "0.1 mT", "microwave amplitude"),
    int("phi_points", "360", 2.0, "rotation phases on [0, 2π)"),
    KeySpec { key: "trace", kind: Kind::Flag, default: Some("false"), min: None, help: "also simulate one Rabi trace" },
    q("trace_phi", Dim::Angle, "90 deg", "start phase of the simulated pulse"),
    q("b_static", Dim::MagneticField, "2 mT", "static field for the trace"),
    q("rotation", Dim::Frequency, "1 kHz", "rotation rate for the trace"),
    qpos("trace_duration", Dim::Time, "1 us", "longest simulated pulse"),
    int("trace_samples", "400", 8.0, "pulse lengths simulated"),
];

const THERMAL: &[KeySpec] = &[
    qpos("radius", Dim::Length, "332 nm", "particle radius"),
    qpos("intensity_532", Dim::Intensity, "0.030 W/mm2", "excitation intensity"),
    qpos("absorption_532", Dim::Absorption, "111 cm-1", "absorption at 532 nm"),
    qpos("intensity_1064", Dim::Intensity, "0.520 W/mm2", "detection intensity"),
    qpos("absorption_1064", Dim::Absorption, "5.87 cm-1", "absorption at 1064 nm"),
    qpos("a_gas", Dim::GasCoefficient, "1.74e-12 W/(Pa K)", "gas-cooling coefficient"),
    qpos("t0", Dim::Temperature, "298 K", "gas temperature"),
    qpos("plateau_temperature", Dim::Temperature, "350 K", "low-pressure temperature fixing the black-body term"),
    qpos("p_min", Dim::Pressure, "1e-6 Torr", "lowest pressure"),
    qpos("p_max", Dim::Pressure, "10 Torr", "highest pressure"),
    int("points", "71", 2.0, "log-spaced pressures"),
];

const ROTOR: &[KeySpec] = &[
    qpos("radius", Dim::Length, "264 nm", "particle radius"),
    qpos("density", Dim::Density, "3500 kg/m3", "particle density"),
    qpos("dipole", Dim::DipoleMoment, "3.13e-25 C*m", "electric dipole"),
    qpos("e_field", Dim::ElectricField, "2000 V/m", "rotating field amplitude"),
    q("drive_frequency", Dim::Frequency, "100 Hz", "signed rotation frequency of the field"),
    qpos("pressure", Dim::Pressure, "10 Torr", "gas pressure"),
    qpos("t0", Dim::Temperature, "298 K", "gas temperature"),
    qpos("duration", Dim::Time, "2 s", "simulated time"),
    qpos("dt", Dim::Time, "10 us", "integration step"),
    int("stride", "100", 1.0, "record every n-th step"),
];

const COOLING: &[KeySpec] = &[
    qpos("radius", Dim::Length, "264 nm", "particle radius"),
    qpos("density", Dim::Density, "3500 kg/m3", "particle density"),
    qpos("pressure", Dim::Pressure, "1 Torr", "gas pressure"),
    qpos("t0", Dim::Temperature, "298 K", "bath temperature"),
    qpos("f_x", Dim::Frequency, "1.10 kHz", "x mode frequency"),
    qpos("f_y", Dim::Frequency, "1.25 kHz", "y mode frequency"),
    qpos("f_z", Dim::Frequency, "1.64 kHz", "z mode frequency"),
    choice("feedback", &["none", "ideal", "delayed"], "none", "feedback path"),
    num("gain_ratio_x", "0", "feedback rate over gas damping, x"),
    num("gain_ratio_y", "0", "feedback rate over gas damping, y"),
    num("gain_ratio_z", "0", "feedback rate over gas damping, z"),
    KeySpec { key: "damping_times", kind: Kind::Number, default: Some("200"), min: Some(1.0), help: "record length in units of 2/γ" },
    int("steps_per_period", "40", 20.0, "integration steps per period of the fastest mode"),
    int("record_every", "6", 1.0, "decimation of the recorded series"),
    qpos("noise_floor", Dim::Length, "0 m", "white detection noise per sample"),
    int("segment_length", "512", 16.0, "Welch segment length"),
    KeySpec { key: "write_series", kind: Kind::Flag, default: Some("false"), min: None, help: "also write the time series" },
];

const FIT_ODMR: &[KeySpec] = &[required_text("input", "spectrum CSV (freq_hz,contrast)"), int("dips", "2", 1.0, "number of dips")];

const FIT_PSD: &[KeySpec] = &[
    required_text("input", "time series CSV (t_s,x_m)"),
    int("segment_length", "512", 16.0, "Welch segment length"),
    qpos("radius", Dim::Length, "264 nm", "particle radius for the mass"),
    qpos("density", Dim::Density, "3500 kg/m3", "particle density"),
    qpos("pressure", Dim::Pressure, "1 Torr", "gas pressure for radius inference"),
    qpos("t0", Dim::Temperature, "298 K", "gas temperature"),
];

pub fn spec_for(command: &str) -> Option<&'static [KeySpec]> {
    Some(match command {
        "trap-design" => TRAP,
        "odmr-sim" => ODMR_SIM,
        "berry-shift" => BERRY_SHIFT,
        "spin-dynamics" => SPIN_DYNAMICS,
        "rabi-sweep" => RABI_SWEEP,
        "thermal" => THERMAL,
        "rotor" => ROTOR,
        "cooling-sim" => COOLING,
        "fit-odmr" => FIT_ODMR,
        "fit-psd" => FIT_PSD,
        _ => return None,
    })
}

/// JSON schema for the documents written by every subcommand.
pub fn output_schema() -> serde_json::Value {
    let configs: serde_json::Map<String, serde_json::Value> = COMMANDS
        .iter()
        .map(|c| {
            let props: serde_json::Map<String, serde_json::Value> = spec_for(c)
                .expect("listed")
                .iter()
                .map(|s| {
                    let ty = match s.kind {
                        Kind::Quantity(d) => serde_json::json!({ "type": "string", "pattern": format!(" {}$", regex_escape(d.canonical_unit())) }),
                        Kind::Number => serde_json::json!({ "type": "number" }),
                        Kind::Integer => serde_json::json!({ "type": "integer" }),
                        Kind::Text => serde_json::json!({ "type": "string" }),
                        Kind::Flag => serde_json::json!({ "type": "boolean" }),
                        Kind::Choice(o) => serde_json::json!({ "enum": o }),
                    };
                    (s.key.to_string(), ty)
                })
                .collect();
            let required: Vec<&str> = spec_for(c).expect("listed").iter().map(|s| s.key).collect();
            (
                c.to_string(),
                serde_json::json!({ "type": "object", "properties": props, "required": required, "additionalProperties": false }),
            )
        })
        .collect();
    let variants: Vec<serde_json::Value> = COMMANDS
        .iter()
        .map(|c| {
            serde_json::json!({
                "properties": {
                    "command": { "const": c },
                    "config": { "$ref": format!("#/$defs/{c}") }
                }
            })
        })
        .collect();
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "levnv output document",
        "type": "object",
        "required": ["provenance", "result"],
        "properties": {
            "provenance": {
                "type": "object",
                "required": ["tool", "version", "command", "seed", "config"],
                "properties": {
                    "tool": { "const": "levnv" },
                    "version": { "type": "string" },
                    "command": { "enum": COMMANDS },
                    "seed": { "type": ["integer", "null"], "minimum": 0 },
                    "config": { "type": "object" }
                },
                "oneOf": variants,
                "additionalProperties": false
            },
            "result": { "type": "object" }
        },
        "$defs": configs
    })
}

fn regex_escape(s: &str) -> String {
    s.chars().flat_map(|c| if "()*^/".contains(c) { vec!['\\', c] } else { vec![c] }).collect()
}
