//! Curve serialization: self-describing CSV with a commented header block,
//! a JSON variant, and the CSV reader the compare subcommand uses.
//!
//! Floats are printed with 17 significant digits so identical configs
//! produce byte-identical artifacts.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::run::SweepResult;
use crate::CliError;

pub const COLUMNS: [&str; 7] = [
    "theta",
    "jx2",
    "jx2_normalized",
    "jx4",
    "var_jx2",
    "inv_precision",
    "flags",
];

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(
    mut w: W,
    echo: &[(String, String)],
    result: &SweepResult,
) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("write failed: {e}"));
    writeln!(w, "# gradiometry {}", env!("CARGO_PKG_VERSION")).map_err(io)?;
    for (key, value) in echo {
        writeln!(w, "# {key} = {value}").map_err(io)?;
    }
    writeln!(w, "# wn_variance = {}", fmt(result.wn_variance)).map_err(io)?;
    writeln!(w, "{}", COLUMNS.join(",")).map_err(io)?;
    let c = &result.curve;
    for i in 0..c.len() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt(c.thetas[i]),
            fmt(c.jx2[i]),
            fmt(result.normalized_jx2[i]),
            fmt(c.jx4[i]),
            fmt(c.var_jx2[i]),
            fmt(c.inv_precision[i]),
            c.flags[i],
        )
        .map_err(io)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonCurve<'a> {
    tool: &'static str,
    version: &'static str,
    config: Vec<(&'a str, &'a str)>,
    wn_variance: f64,
    theta: &'a [f64],
    jx2: &'a [f64],
    jx2_normalized: &'a [f64],
    jx4: &'a [f64],
    var_jx2: &'a [f64],
    inv_precision: &'a [f64],
    flags: &'a [u32],
}

pub fn write_json<W: Write>(
    w: W,
    echo: &[(String, String)],
    result: &SweepResult,
) -> Result<(), CliError> {
    let doc = JsonCurve {
        tool: "gradiometry",
        version: env!("CARGO_PKG_VERSION"),
        config: echo.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect(),
        wn_variance: result.wn_variance,
        theta: &result.curve.thetas,
        jx2: &result.curve.jx2,
        jx2_normalized: &result.normalized_jx2,
        jx4: &result.curve.jx4,
        var_jx2: &result.curve.var_jx2,
        inv_precision: &result.curve.inv_precision,
        flags: &result.curve.flags,
    };
    serde_json::to_writer_pretty(w, &doc)
        .map_err(|e| CliError::Runtime(format!("JSON write failed: {e}")))
}

/// A curve file read back for comparison: named columns over a common grid.
pub struct CurveTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_csv<R: BufRead>(reader: R) -> Result<CurveTable, CliError> {
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Config(format!("read failed: {e}")))?;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        match &columns {
            None => columns = Some(content.split(',').map(|s| s.trim().to_string()).collect()),
            Some(names) => {
                let fields: Vec<&str> = content.split(',').collect();
                if fields.len() != names.len() {
                    return Err(CliError::Config(format!(
                        "line {}: expected {} fields, found {}",
                        lineno + 1,
                        names.len(),
                        fields.len()
                    )));
                }
                let row = fields
                    .iter()
                    .map(|f| {
                        f.trim().parse::<f64>().map_err(|_| {
                            CliError::Config(format!("line {}: bad number '{f}'", lineno + 1))
                        })
                    })
                    .collect::<Result<Vec<f64>, CliError>>()?;
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| CliError::Config("no header line found".into()))?;
    Ok(CurveTable { columns, rows })
}

pub fn read_csv_file(path: &std::path::Path) -> Result<CurveTable, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    read_csv(std::io::BufReader::new(file))
}
