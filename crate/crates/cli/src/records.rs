//! Result records and their serialization. One record per grid point, in a
//! fixed column order, with floats printed at 17 significant digits so
//! regression fixtures round-trip exactly.

use std::io::{self, Write};

use jcberry::BranchSign;

use crate::config::Point;

/// The column set, in serialization order, shared by the CSV and JSONL
/// writers.
pub const COLUMNS: [&str; 26] = [
    "kind", "delta", "lambda", "nu", "alpha", "beta", "theta", "n", "nprime", "sign", "nodes",
    "cutoff_a", "cutoff_b", "duration", "method", "wrapped", "unwrapped", "winding", "visibility",
    "analytic", "abs_error", "min_gap", "fidelity", "drift", "leakage", "wall_ms",
];

/// Phase values and diagnostics produced by one grid point. Fields an
/// experiment kind does not produce stay `None` and serialize as empty
/// columns (CSV) or nulls (JSONL).
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub method: String,
    pub wrapped: Option<f64>,
    pub unwrapped: Option<f64>,
    pub winding: Option<i64>,
    pub visibility: Option<f64>,
    pub analytic: Option<f64>,
    pub abs_error: Option<f64>,
    pub min_gap: Option<f64>,
    pub fidelity: Option<f64>,
    pub drift: Option<f64>,
    pub leakage: Option<f64>,
}

/// One emitted row: the echoed configuration point plus its outcome.
#[derive(Clone, Debug)]
pub struct Record {
    pub kind: &'static str,
    pub point: Point,
    pub outcome: Outcome,
    /// Wall time of the point in milliseconds; only serialized when timing
    /// output is requested, because it varies between otherwise identical
    /// runs and the data section must not.
    pub wall_ms: Option<f64>,
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

fn opt_int(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_sign(v: Option<BranchSign>) -> String {
    match v {
        Some(BranchSign::Plus) => "+".into(),
        Some(BranchSign::Minus) => "-".into(),
        None => String::new(),
    }
}

impl Record {
    /// The row's cells in [`COLUMNS`] order, empty strings for absent values.
    fn cells(&self, timing: bool) -> [String; 26] {
        let p = &self.point;
        let o = &self.outcome;
        [
            self.kind.to_string(),
            opt_float(p.delta),
            opt_float(p.lambda),
            opt_float(p.nu),
            opt_float(p.alpha),
            opt_float(p.beta),
            opt_float(p.theta),
            opt_int(p.n),
            opt_int(p.nprime),
            opt_sign(p.sign),
            opt_int(p.nodes),
            opt_int(p.cutoff_a),
            opt_int(p.cutoff_b),
            opt_float(p.duration),
            o.method.clone(),
            opt_float(o.wrapped),
            opt_float(o.unwrapped),
            o.winding.map(|w| w.to_string()).unwrap_or_default(),
            opt_float(o.visibility),
            opt_float(o.analytic),
            opt_float(o.abs_error),
            opt_float(o.min_gap),
            opt_float(o.fidelity),
            opt_float(o.drift),
            opt_float(o.leakage),
            if timing { opt_float(self.wall_ms) } else { String::new() },
        ]
    }
}

/// Writes the comment header (the only line carrying a timestamp), the
/// column header, and one line per record.
pub fn write_csv<W: Write>(
    mut w: W,
    kind: &str,
    stamp: &str,
    records: &[Record],
    timing: bool,
) -> io::Result<()> {
    writeln!(w, "# jcberry {} {kind} {stamp}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "{}", COLUMNS.join(","))?;
    for record in records {
        writeln!(w, "{}", record.cells(timing).join(","))?;
    }
    Ok(())
}

/// Writes one JSON object per record with the same fields as the CSV
/// columns; numbers use the identical 17-significant-digit notation and
/// absent values are nulls. The stream carries no header, so its bytes are
/// fully deterministic.
pub fn write_jsonl<W: Write>(mut w: W, records: &[Record], timing: bool) -> io::Result<()> {
    for record in records {
        let cells = record.cells(timing);
        let mut line = String::with_capacity(256);
        line.push('{');
        for (slot, (name, cell)) in COLUMNS.iter().zip(cells.iter()).enumerate() {
            if slot > 0 {
                line.push(',');
            }
            line.push('"');
            line.push_str(name);
            line.push_str("\":");
            let is_string = matches!(slot, 0 | 9 | 14);
            if cell.is_empty() {
                line.push_str("null");
            } else if is_string {
                line.push('"');
                for c in cell.chars() {
                    match c {
                        '"' => line.push_str("\\\""),
                        '\\' => line.push_str("\\\\"),
                        c if (c as u32) < 0x20 => line.push_str(&format!("\\u{:04x}", c as u32)),
                        c => line.push(c),
                    }
                }
                line.push('"');
            } else {
                line.push_str(cell);
            }
        }
        line.push('}');
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Record {
        Record {
            kind: "single-mode",
            point: Point {
                delta: Some(0.0),
                lambda: Some(1.0),
                nu: Some(1.0),
                n: Some(0),
                sign: Some(BranchSign::Plus),
                nodes: Some(2000),
                cutoff_a: Some(8),
                ..Default::default()
            },
            outcome: Outcome {
                method: "connection".into(),
                wrapped: Some(std::f64::consts::PI),
                unwrapped: Some(std::f64::consts::PI),
                winding: Some(0),
                visibility: Some(1.0),
                analytic: Some(std::f64::consts::PI),
                abs_error: Some(1.1e-9),
                min_gap: Some(2.0),
                ..Default::default()
            },
            wall_ms: Some(12.5),
        }
    }

    #[test]
    fn csv_layout_and_precision() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "single-mode", "unix:0", &[sample()], false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("# jcberry "));
        assert_eq!(lines[1], COLUMNS.join(","));
        let cells: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(cells.len(), COLUMNS.len());
        assert_eq!(cells[0], "single-mode");
        assert_eq!(cells[9], "+");
        // 17 significant digits round-trip exactly
        assert_eq!(cells[15].parse::<f64>().unwrap(), std::f64::consts::PI);
        assert_eq!(cells[15], "3.1415926535897931e0");
        // timing suppressed: the wall column is empty
        assert_eq!(cells[25], "");
        // absent parameters serialize as empty cells
        assert_eq!(cells[4], "");
    }

    #[test]
    fn jsonl_mirrors_the_columns() {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &[sample()], true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let value: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
        let obj = value.as_object().unwrap();
        assert_eq!(obj.len(), COLUMNS.len());
        assert_eq!(obj["kind"], "single-mode");
        assert_eq!(obj["sign"], "+");
        assert_eq!(obj["wrapped"].as_f64().unwrap(), std::f64::consts::PI);
        assert!(obj["alpha"].is_null());
        assert_eq!(obj["wall_ms"].as_f64().unwrap(), 12.5);
        assert_eq!(obj["winding"].as_i64().unwrap(), 0);
    }
}
