//! CSV and JSON writers with 17 significant digits.

use super::study::StudyReport;
use serde::Serialize;
use std::io;

/// `x` in scientific notation with 17 significant digits.
pub fn format_float(x: f64) -> String {
    // avoid a distinct "-0" spelling
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }
}

/// Compact JSON with every float written by [`format_float`]; non-finite values become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits);
    value.serialize(&mut ser).expect("serializing to memory");
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// `# title`, then columns `N,lambda,error,truncation,included,<components>`.
pub fn study_csv(report: &StudyReport) -> String {
    let mut out = format!("# {}\nN,lambda,error,truncation,included", report.title);
    for name in &report.component_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for p in &report.points {
        let truncation = p.truncation.map(format_float).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}",
            p.particles,
            format_float(p.lambda),
            format_float(p.error),
            truncation,
            p.included
        ));
        for c in &p.components {
            out.push(',');
            out.push_str(&format_float(*c));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Summary<'a> {
    kind: &'a str,
    level: usize,
    order: usize,
    slope: Option<f64>,
    intercept: Option<f64>,
    r2: Option<f64>,
    expected_slope: f64,
    exact_zero: bool,
    pass: bool,
}

/// `{slope, intercept, r2, pass}` with context.
pub fn study_summary_json(report: &StudyReport) -> String {
    to_json(&Summary {
        kind: &report.kind,
        level: report.level,
        order: report.order,
        slope: report.fit.as_ref().map(|f| f.slope),
        intercept: report.fit.as_ref().map(|f| f.intercept),
        r2: report.fit.as_ref().map(|f| f.r2),
        expected_slope: report.expected_slope,
        exact_zero: report.exact_zero,
        pass: report.pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        let json = to_json(&vec![0.5, f64::NAN]);
        assert_eq!(json, "[5.0000000000000000e-1,null]");
        let parsed: Vec<Option<f64>> = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, vec![Some(0.5), None]);
    }
}
