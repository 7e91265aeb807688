//! Reports and data files.

use std::fmt::Write as _;
use std::path::Path;

use fraclap::Field;
use serde::Serialize;
use serde_json::Value;

pub const CSV_HEADER: &str = "# fraclap-solution v1";

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().unwrap_or(x)
    } else {
        x
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round12(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits. Non-finite
/// values serialize as `null`.
pub fn to_json(value: &impl Serialize) -> String {
    let mut v = serde_json::to_value(value).expect("serializable report");
    round_value(&mut v);
    serde_json::to_string_pretty(&v).expect("json") + "\n"
}

pub fn to_json_line(value: &impl Serialize) -> String {
    let mut v = serde_json::to_value(value).expect("serializable summary");
    round_value(&mut v);
    serde_json::to_string(&v).expect("json")
}

pub fn write_file(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        String::from("nan")
    }
}

/// Node coordinates, value and a flag per grid node: 0 interior, 1 within
/// `2h` of the boundary, 2 outside the support.
pub fn field_csv(u: &Field) -> String {
    let g = u.grid();
    let dim = g.dim();
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    let cols: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    let _ = writeln!(out, "{},value,flag", cols.join(","));
    for i in 0..g.len() {
        let x = g.node(i);
        let flag = match u.support() {
            Some(d) => {
                let delta = d.signed_distance(&x);
                if delta <= 0.0 {
                    2
                } else if delta < 2.0 * g.h() {
                    1
                } else {
                    0
                }
            }
            None => 0,
        };
        let coords: Vec<String> = x.iter().map(|v| csv_number(*v)).collect();
        let _ = writeln!(out, "{},{},{flag}", coords.join(","), csv_number(u.value(i)));
    }
    out
}

/// A table with a fixed header and numeric rows.
pub fn table_csv(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    out.push_str(&columns.join(","));
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| csv_number(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
