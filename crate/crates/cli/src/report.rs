//! Run reports and the stable exit-code contract.
//!
//! Every command prints one report: key/value lines, any crossing ledger,
//! then the wall time as the final line. Given the same scenario and seed
//! the output is byte-identical except for that last line.

use std::fmt::Display;
use std::process::ExitCode;
use std::time::Instant;

use skylink::alk::CrossingMethod;
use skylink::{AlkComputation, Error, SurfaceModel, SurfacePoint};

/// Exit codes: 0 success, 2 null-related pair, 64 configuration or usage,
/// 70 numeric failure, 74 output I/O failure.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    NullRelated(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::NullRelated(_) => 2,
            CliError::Config(_) => 64,
            CliError::Numeric(_) => 70,
            CliError::Io(_) => 74,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::NullRelated(m)
            | CliError::Numeric(m)
            | CliError::Io(m) => m,
        }
    }

    pub fn report(&self) -> ExitCode {
        eprintln!("error: {}", self.message());
        ExitCode::from(self.exit_code())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::CommonNullGeodesic { count } => CliError::NullRelated(format!(
                "the events lie on a common null geodesic ({count} connection{}); \
                 no linking value exists",
                if *count == 1 { "" } else { "s" }
            )),
            Error::InvalidPoint(_)
            | Error::RepresentationMismatch
            | Error::IdenticalEvents
            | Error::NotTimelike { .. }
            | Error::NotFutureDirected { .. }
            | Error::CurveThroughVertex
            | Error::TooFewSamples { .. }
            | Error::SliceMismatch { .. }
            | Error::InvalidDescriptor(_)
            | Error::NonOrientable
            | Error::InvalidInput(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// Line-oriented run report. Keys are stable; floating-point values print
/// with 12 significant digits so reruns diff cleanly.
pub struct Report {
    lines: Vec<String>,
    started: Instant,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            lines: vec![format!("command: {command}")],
            started: Instant::now(),
        }
    }

    pub fn kv(&mut self, key: &str, value: impl Display) {
        self.lines.push(format!("{key}: {value}"));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.lines.push(format!("{key}: {}", sig(value)));
    }

    /// A preformatted line, for output whose shape is part of the contract.
    pub fn line(&mut self, text: String) {
        self.lines.push(text);
    }

    pub fn ledger(&mut self, label: &str, comp: &AlkComputation, model: &SurfaceModel) {
        self.kv(
            &format!("ledger[{label}]"),
            format!("{} crossings", comp.crossings.len()),
        );
        for (i, c) in comp.crossings.iter().enumerate() {
            self.lines.push(format!(
                "  crossing {i}: sign={:+} method={} parameter={} location={}",
                c.sign,
                method_name(c.method),
                sig(c.parameter),
                point_str(model, &c.location),
            ));
        }
        if comp.swapped {
            self.kv(&format!("note[{label}]"), "events swapped into slice-time order");
        }
        if comp.perturbed {
            self.kv(
                &format!("note[{label}]"),
                "target moved by the regular-value device",
            );
        }
    }

    /// Prints every accumulated line, then the wall time. Nothing above the
    /// final line depends on timing.
    pub fn print(self) {
        for l in &self.lines {
            println!("{l}");
        }
        println!("wall-time-ms: {:.3}", self.started.elapsed().as_secs_f64() * 1e3);
    }
}

pub fn sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let s = format!("{v:.11e}");
    // Trim "1.20000000000e2" style output back to plain decimal when short.
    match s.parse::<f64>() {
        Ok(r) => {
            let plain = format!("{r}");
            if plain.len() <= 14 && plain.parse::<f64>() == Ok(r) {
                plain
            } else {
                s
            }
        }
        Err(_) => s,
    }
}

pub fn method_name(m: CrossingMethod) -> &'static str {
    match m {
        CrossingMethod::PreimageJacobian => "preimage-jacobian",
        CrossingMethod::FrameDeterminant => "frame-determinant",
        CrossingMethod::TangencyFormula => "tangency-formula",
    }
}

pub fn point_str(model: &SurfaceModel, p: &SurfacePoint) -> String {
    match model.chart_of(p) {
        Ok([a, b]) => format!("({}, {})", sig(a), sig(b)),
        Err(_) => "(unchartable)".into(),
    }
}
