//! Bit-stable report emission. Every floating-point number is printed with
//! 17 significant digits so parsing an emitted document reproduces the
//! in-memory values exactly.

use std::io::{self, Write};

use carnot_core::quadrature::McEstimate;
use carnot_core::verify::ResidualReport;
use serde_json::ser::Formatter;
use serde_json::Value;

/// Formats one f64 with 17 significant digits (round-trip exact).
pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{}", fmt_f64(value))
    }
}

/// Serializes a JSON value with 17-significant-digit floats and a trailing
/// newline.
pub fn to_json_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    serde::Serialize::serialize(value, &mut ser).expect("JSON serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// Adds the stable top-level schema fields around a serialized report.
pub fn wrap_report(mut value: Value) -> Value {
    let obj = value.as_object_mut().expect("reports serialize to objects");
    obj.insert(
        "tool_version".into(),
        Value::String(env!("CARGO_PKG_VERSION").into()),
    );
    value
}

/// CSV rendering of a residual report: one comment line of metadata, a
/// header, then the point/residual table.
pub fn report_to_csv(report: &ResidualReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# check_name={} verdict={:?} tolerance={} seed={} rng_name={} tool_version={}\n",
        report.check_name,
        report.verdict,
        fmt_f64(report.tolerance),
        report.seed,
        report.rng_name,
        env!("CARGO_PKG_VERSION"),
    ));
    let dim = report.points.first().map_or(0, |p| p.point.len());
    let mut header: Vec<String> = (0..dim.saturating_sub(1))
        .map(|i| format!("x{}", i))
        .collect();
    if dim > 0 {
        header.push("t".into());
    }
    header.push("residual".into());
    header.push("field_value".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for p in &report.points {
        let mut row: Vec<String> = p.point.iter().copied().map(fmt_f64).collect();
        row.push(fmt_f64(p.residual));
        row.push(fmt_f64(p.field_value));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// CSV rendering of a Monte Carlo estimate.
pub fn estimate_to_csv(est: &McEstimate) -> String {
    format!(
        "value,std_error,samples,seed,rng_name\n{},{},{},{},{}\n",
        fmt_f64(est.value),
        fmt_f64(est.std_error),
        est.samples,
        est.seed,
        est.rng_name,
    )
}
